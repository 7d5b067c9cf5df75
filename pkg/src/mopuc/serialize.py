"""Deterministic JSON/CSV serialization (schema 1).

Floats are written with 17 significant digits and lowercase exponents so that
identical inputs produce byte-identical artifacts; complex entries appear as
[re, im] pairs and matrices as row-major nested arrays.
"""

import csv
import io
import json

import numpy as np

from .errors import InvalidSpecError
from .moments import MomentTable
from .szego import VerblunskyLattice
from .weights import PearsonSpec, WeightSpec

SCHEMA = 1


def fmt_float(x) -> float:
    """Round-trip through the fixed 17-significant-digit representation."""
    return float(f"{float(x):.16e}")


def complex_pair(z):
    z = complex(z)
    return [fmt_float(z.real), fmt_float(z.imag)]


def pair_complex(pair):
    return complex(float(pair[0]), float(pair[1]))


def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    return [[complex_pair(v) for v in row] for row in m]


def json_to_matrix(rows):
    return np.array([[pair_complex(v) for v in row] for row in rows], dtype=complex)


def _coeff_map_to_json(coeffs):
    return {str(int(k)): matrix_to_json(v) for k, v in sorted(coeffs.items())}


def _json_to_coeff_map(obj):
    return {int(k): json_to_matrix(v) for k, v in obj.items()}


def pearson_to_json(spec: PearsonSpec):
    return {
        "n_dim": spec.n_dim,
        "coeffs": _coeff_map_to_json(spec.coeffs),
        "base_point": complex_pair(spec.base_point),
        "base_value": matrix_to_json(spec.base_value),
    }


def json_to_pearson(obj) -> PearsonSpec:
    return PearsonSpec(
        n_dim=int(obj["n_dim"]),
        coeffs=_json_to_coeff_map(obj["coeffs"]),
        base_point=pair_complex(obj["base_point"]),
        base_value=json_to_matrix(obj["base_value"]),
    )


def weight_to_json(spec: WeightSpec):
    doc = {"schema": SCHEMA, "n_dim": spec.n_dim, "kind": spec.kind}
    if spec.pearson is not None:
        doc["pearson"] = pearson_to_json(spec.pearson)
    if spec.kind == "fourier":
        doc["blocks"] = _coeff_map_to_json(spec.fourier)
    elif spec.kind == "freud":
        doc["factors"] = [_coeff_map_to_json(f) for f in spec.freud_factors]
    elif spec.kind == "fuchsian_n2":
        doc["prefactor"] = {
            "p": int(spec.prefactor["p"]),
            "k": int(spec.prefactor["k"]),
            "shifts": [complex_pair(t) for t in spec.prefactor["shifts"]],
        }
        doc["phi"] = [matrix_to_json(c) for c in spec.phi]
        doc["phi_window"] = [matrix_to_json(c) for c in spec.phi_window]
    return doc


def json_to_weight(doc) -> WeightSpec:
    if doc.get("schema") != SCHEMA:
        raise InvalidSpecError(f"unsupported weight schema {doc.get('schema')!r}")
    kind = doc["kind"]
    n_dim = int(doc["n_dim"])
    pearson = json_to_pearson(doc["pearson"]) if "pearson" in doc else None
    if kind == "fourier":
        return WeightSpec(kind=kind, n_dim=n_dim, fourier=_json_to_coeff_map(doc["blocks"]),
                          pearson=pearson)
    if kind == "freud":
        factors = tuple(_json_to_coeff_map(f) for f in doc["factors"])
        return WeightSpec(kind=kind, n_dim=n_dim, freud_factors=factors, pearson=pearson)
    if kind == "pearson":
        if pearson is None:
            raise InvalidSpecError("pearson weight document lacks its spec")
        return WeightSpec(kind=kind, n_dim=n_dim, pearson=pearson)
    if kind == "fuchsian_n2":
        pre = doc["prefactor"]
        return WeightSpec(
            kind=kind,
            n_dim=n_dim,
            pearson=pearson,
            prefactor={
                "p": int(pre["p"]),
                "k": int(pre["k"]),
                "shifts": tuple(pair_complex(t) for t in pre["shifts"]),
            },
            phi=tuple(json_to_matrix(c) for c in doc["phi"]),
            phi_window=tuple(json_to_matrix(c) for c in doc["phi_window"]),
        )
    raise InvalidSpecError(f"unknown weight kind {kind!r}")


def moments_to_json(table: MomentTable):
    return {
        "schema": SCHEMA,
        "n_dim": table.n_dim,
        "j_max": table.j_max,
        "quadrature_size": table.quadrature_size,
        "est_error": fmt_float(table.est_error),
        "blocks": [
            {"j": j, "block": matrix_to_json(table.blocks[j])}
            for j in range(-table.j_max, table.j_max + 1)
        ],
    }


def json_to_moments(doc) -> MomentTable:
    blocks = {int(b["j"]): json_to_matrix(b["block"]) for b in doc["blocks"]}
    return MomentTable(
        n_dim=int(doc["n_dim"]),
        j_max=int(doc["j_max"]),
        blocks=blocks,
        quadrature_size=int(doc.get("quadrature_size", 0)),
        est_error=float(doc.get("est_error", 0.0)),
    )


def moments_to_csv(table: MomentTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["j", "row", "col", "re", "im"])
    for j in range(-table.j_max, table.j_max + 1):
        block = table.blocks[j]
        for r in range(table.n_dim):
            for c in range(table.n_dim):
                writer.writerow(
                    [j, r, c, f"{block[r, c].real:.16e}", f"{block[r, c].imag:.16e}"]
                )
    return buf.getvalue()


def lattice_to_json(lattice: VerblunskyLattice):
    def seq(mats):
        return [matrix_to_json(m) for m in mats]

    return {
        "schema": SCHEMA,
        "n_max": lattice.n_max,
        "n_dim": lattice.n_dim,
        "aL1": seq(lattice.aL1),
        "aR2d": seq(lattice.aR2d),
        "hL": seq(lattice.hL),
        "hR": seq(lattice.hR),
    }


def json_to_lattice(doc) -> VerblunskyLattice:
    def seq(rows):
        return tuple(json_to_matrix(m) for m in rows)

    return VerblunskyLattice(
        n_max=int(doc["n_max"]),
        aL1=seq(doc["aL1"]),
        aR2d=seq(doc["aR2d"]),
        hL=seq(doc["hL"]),
        hR=seq(doc["hR"]),
    )


def lattice_to_csv(lattice: VerblunskyLattice) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "which", "row", "col", "re", "im"])
    for n in range(lattice.n_max + 1):
        for name, seq in (("aL1", lattice.aL1), ("aR2d", lattice.aR2d),
                          ("hL", lattice.hL), ("hR", lattice.hR)):
            block = seq[n]
            for r in range(lattice.n_dim):
                for c in range(lattice.n_dim):
                    writer.writerow(
                        [n, name, r, c, f"{block[r, c].real:.16e}", f"{block[r, c].imag:.16e}"]
                    )
    return buf.getvalue()


def residual_report_json(records):
    """records: iterable of dicts with keys n, z (complex or None), check, residual."""
    out = []
    for rec in records:
        z = rec.get("z")
        out.append(
            {
                "n": int(rec["n"]),
                "z": None if z is None else complex_pair(z),
                "check": str(rec["check"]),
                "residual": fmt_float(rec["residual"]),
            }
        )
    return out


def trajectory_to_json(states, residuals=None, conds=None):
    out = []
    for i, st in enumerate(states):
        rec = {
            "n": st.n,
            "aL1": matrix_to_json(st.aL1_cur),
            "aR2d": matrix_to_json(st.aR2d_cur),
            "S": matrix_to_json(st.s_sum),
        }
        if residuals is not None and i < len(residuals):
            rec["residuals"] = [fmt_float(r) for r in residuals[i]]
        if conds is not None and i < len(conds):
            rec["factor_conds"] = [fmt_float(c) for c in conds[i]]
        out.append(rec)
    return out


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
