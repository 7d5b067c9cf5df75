"""Command-line front end: weight spec in, reports / lattices / trajectories out.

All numerics live in a single self-describing JSON config; flags only steer
paths and verbosity.  Exit codes: 0 ok, 2 convergence failure, 3
quasi-definiteness failure, 4 spec mismatch, 5 singular propagation, 64
usage or parse errors.
"""

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import cauchy_rhp, painleve, serialize, szego, transfer
from .errors import (
    ConvergenceError,
    InvalidSpecError,
    MopucError,
    QuasiDefiniteError,
    ResonanceError,
    SingularCoefficientError,
    SpecMismatchError,
)
from .moments import compute_moments, quasi_definiteness
from .weights import classify

EXIT_OK = 0
EXIT_CONVERGENCE = 2
EXIT_QUASI_DEFINITE = 3
EXIT_SPEC_MISMATCH = 4
EXIT_SINGULAR = 5
EXIT_USAGE = 64

DEFAULT_TOLERANCES = {
    "biorthogonality": 1e-8,
    "recursion": 1e-8,
    "h_ratio": 1e-8,
    "abc_telescope": 1e-9,
    "det_y": 1e-8,
    "jump": 1e-5,
    "x_asymptotics": 1e-4,
    "laurent_split": 1e-10,
    "q_recursion": 1e-8,
    "transfer": 1e-7,
    "transfer_product": 1e-6,
    "pearson_leading": 1e-5,
    "compatibility": 1e-7,
    "dpii": 1e-6,
}


class CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _fail(code, message):
    raise CliFailure(code, message)


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        _fail(EXIT_USAGE, f"config not found: {path}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_USAGE, f"config is not valid JSON: {exc}")
    if "weight" not in cfg:
        _fail(EXIT_USAGE, "config lacks a 'weight' document")
    try:
        weight = serialize.json_to_weight(cfg["weight"])
    except (InvalidSpecError, KeyError, ValueError) as exc:
        _fail(EXIT_USAGE, f"weight document rejected: {exc}")
    n_max = int(cfg.get("n_max", 6))
    j_max = int(cfg.get("j_max", max(2 * n_max + 4, 16)))
    if n_max > j_max:
        _fail(EXIT_USAGE, f"n_max = {n_max} exceeds j_max = {j_max}")
    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in cfg.get("tolerances", {}).items():
        if float(value) <= 0:
            _fail(EXIT_USAGE, f"tolerance override {key} must be positive")
        tolerances[key] = float(value)
    return cfg, weight, n_max, j_max, tolerances


def _pipeline(weight, n_max, j_max):
    try:
        table = compute_moments(weight, j_max)
    except ConvergenceError as exc:
        _fail(EXIT_CONVERGENCE, str(exc))
    try:
        families = szego.solve_all(table, n_max)
        lattice = szego.verblunsky_lattice(table, n_max, families)
    except QuasiDefiniteError as exc:
        _fail(EXIT_QUASI_DEFINITE, str(exc))
    return table, families, lattice


def _write_outputs(cfg, out_dir, artifacts, quiet):
    written = []
    requested = cfg.get("outputs") or []
    for item in requested:
        path = Path(out_dir) / item["path"]
        fmt = item.get("format", "json")
        name = item.get("artifact", "report")
        if name not in artifacts:
            _fail(EXIT_USAGE, f"unknown artifact {name!r}; have {sorted(artifacts)}")
        payload = artifacts[name]
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            serialize.dump_json(payload["json"], path)
        elif fmt == "csv":
            if "csv" not in payload:
                _fail(EXIT_USAGE, f"artifact {name!r} has no CSV form")
            path.write_text(payload["csv"], encoding="utf-8")
        else:
            _fail(EXIT_USAGE, f"unknown format {fmt!r}")
        written.append(str(path))
    if not quiet:
        for path in written:
            click.echo(path)
    return written


@click.group()
def main():
    """Matrix circle-weight pipelines: moments, families, verification, lattices."""


def _common(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path())(fn)
    fn = click.option("--out", "out_dir", default=".", type=click.Path(file_okay=False))(fn)
    fn = click.option("--quiet", is_flag=True, default=False)(fn)
    return fn


def _run(body):
    try:
        code = body()
    except CliFailure as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    except MopucError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    sys.exit(code)


@main.command()
@_common
def moments(config_path, out_dir, quiet):
    """Compute the moment table of the configured weight."""

    def body():
        cfg, weight, n_max, j_max, _ = _load_config(config_path)
        try:
            table = compute_moments(weight, j_max)
        except ConvergenceError as exc:
            _fail(EXIT_CONVERGENCE, str(exc))
        artifacts = {
            "moments": {
                "json": serialize.moments_to_json(table),
                "csv": serialize.moments_to_csv(table),
            }
        }
        if not cfg.get("outputs"):
            cfg["outputs"] = [{"path": "moments.json", "format": "json", "artifact": "moments"}]
        for item in cfg["outputs"]:
            item.setdefault("artifact", "moments")
        _write_outputs(cfg, out_dir, artifacts, quiet)
        return EXIT_OK

    _run(body)


@main.command("szego")
@_common
def szego_cmd(config_path, out_dir, quiet):
    """Solve the polynomial families and export the reflection lattice."""

    def body():
        cfg, weight, n_max, j_max, _ = _load_config(config_path)
        _, families, lattice = _pipeline(weight, n_max, j_max)
        artifacts = {
            "lattice": {
                "json": serialize.lattice_to_json(lattice),
                "csv": serialize.lattice_to_csv(lattice),
            }
        }
        if not cfg.get("outputs"):
            cfg["outputs"] = [{"path": "lattice.json", "format": "json", "artifact": "lattice"}]
        for item in cfg["outputs"]:
            item.setdefault("artifact", "lattice")
        _write_outputs(cfg, out_dir, artifacts, quiet)
        return EXIT_OK

    _run(body)


def _verify_records(weight, table, families, lattice, n_max, tol):
    builder = cauchy_rhp.FrameBuilder(weight, table, families)
    records = []

    def add(n, check, residual, z=None):
        records.append(
            {"n": n, "check": check, "residual": float(residual), "z": z,
             "threshold": tol.get(check.split(":")[0], tol.get(check, 1e-6))}
        )

    for n in range(n_max + 1):
        add(n, "biorthogonality", szego.check_biorthogonality(families[n], table, families))
    for n, name, res in szego.check_recursions(lattice, families):
        add(n, "recursion" if name != "abc_telescope" else "abc_telescope", res)
    for n, name, res in szego.h_ratio_residuals(lattice):
        add(n, "h_ratio", res)

    angles = np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)
    off_circle = [0.5 * a for a in angles[:4]] + [2.0 * a for a in angles[4:]]
    for n in range(min(n_max, 6) + 1):
        for z in off_circle:
            add(n, "det_y", cauchy_rhp.det_y_residual(builder.frame(n, z)), z=z)
        jumps = cauchy_rhp.check_jump(n, angles, weight, builder)
        add(n, "jump", max(jumps.values()))
        add(n, "laurent_split", cauchy_rhp.laurent_split_residual(builder, n))
    for n, name, z, res in cauchy_rhp.q_recursion_residuals(
        lattice, families[: min(n_max, 6) + 1], weight, table, (0.5, 2.0)
    ):
        add(n, "q_recursion", res, z=z)
    for n in range(min(n_max - 2, 5) + 1):
        xc = cauchy_rhp.x_coefficients(lattice, n)
        x1_fit, _ = cauchy_rhp.x_asymptotic_fit(builder, n)
        add(n, "x_asymptotics",
            float(np.linalg.norm(x1_fit - xc.X1) / (1.0 + np.linalg.norm(xc.X1))))
    for n in range(min(n_max - 1, 5) + 1):
        add(n, "transfer", max(
            transfer.check_transfer(lattice, builder, n, (0.5, 2.0 * 1j)).values()
        ))
    add(3 if n_max >= 3 else n_max, "transfer_product",
        transfer.transfer_product_residual(lattice, builder, min(3, n_max), 2.0))

    if weight.pearson is not None:
        cls = classify(weight.pearson)
        for n in range(1, min(n_max - 1, 4) + 1):
            lead = transfer.pearson_leading(lattice, n, cls)
            num = transfer.m_leading_fourier(builder, n, lead.order)
            add(n, "pearson_leading",
                float(np.linalg.norm(num - lead.M0) / (1.0 + np.linalg.norm(lead.M0))))
            add(n, "compatibility", transfer.compatibility_residual(lattice, cls, n))
    return records


@main.command()
@_common
def verify(config_path, out_dir, quiet):
    """Run the full structural verification battery on the configured weight."""

    def body():
        cfg, weight, n_max, j_max, tol = _load_config(config_path)
        table, families, lattice = _pipeline(weight, n_max, j_max)
        records = _verify_records(weight, table, families, lattice, n_max, tol)
        failures = [r for r in records if r["residual"] > r["threshold"]]
        report = {
            "schema": serialize.SCHEMA,
            "n_max": n_max,
            "checks": serialize.residual_report_json(records),
            "thresholds": {r["check"]: r["threshold"] for r in records},
            "failed": len(failures),
        }
        artifacts = {"report": {"json": report}}
        if not cfg.get("outputs"):
            cfg["outputs"] = [{"path": "verify.json", "format": "json", "artifact": "report"}]
        for item in cfg["outputs"]:
            item.setdefault("artifact", "report")
        _write_outputs(cfg, out_dir, artifacts, quiet)
        if failures:
            first = failures[0]
            click.echo(
                f"FAIL {len(failures)} checks; first: {first['check']} at n={first['n']} "
                f"residual {first['residual']:.3e} > {first['threshold']:.1e}",
                err=True,
            )
            return 1
        return EXIT_OK

    _run(body)


@main.command()
@click.option("--mode", type=click.Choice(["residual", "propagate", "compare"]),
              default="residual")
@_common
def dpii(mode, config_path, out_dir, quiet):
    """Difference-system residuals / propagation for the reflection lattice."""

    def body():
        cfg, weight, n_max, j_max, tol = _load_config(config_path)
        if weight.pearson is None:
            _fail(EXIT_SPEC_MISMATCH, "weight carries no Pearson data; dpii needs the variant")
        try:
            coeffs = painleve.coefficients_from_pearson(weight.pearson)
        except SpecMismatchError as exc:
            _fail(EXIT_SPEC_MISMATCH, str(exc))
        residual_fn = (
            painleve.fuchsian_residual
            if coeffs.variant == "fuchsian"
            else painleve.nonfuchsian_residual
        )

        records, trajectory = [], None
        lattice = None
        if mode in ("residual", "compare"):
            _, _, lattice = _pipeline(weight, n_max + 1, j_max)
            for n in range(1, n_max + 1):
                r1, r2 = residual_fn(lattice, coeffs, n)
                records.append({"n": n, "check": f"dpii_eq1_{coeffs.variant}", "z": None,
                                "residual": float(np.linalg.norm(r1))})
                records.append({"n": n, "check": f"dpii_eq2_{coeffs.variant}", "z": None,
                                "residual": float(np.linalg.norm(r2))})
        if mode in ("propagate", "compare"):
            init = cfg.get("dpii", {}).get("initial")
            if init is not None:
                state = painleve.DPIIState.initial(
                    serialize.json_to_matrix(init["aL1_1"]),
                    serialize.json_to_matrix(init["aR2d_1"]),
                )
            else:
                if lattice is None:
                    _, _, lattice = _pipeline(weight, max(n_max, 2), j_max)
                state = painleve.DPIIState.from_lattice(lattice, 1)
            try:
                states = painleve.propagate(state, coeffs, n_max)
            except (SingularCoefficientError, ResonanceError) as exc:
                _fail(EXIT_SINGULAR, str(exc))
            trajectory = serialize.trajectory_to_json(states)
            if mode == "compare":
                for st in states:
                    gap = max(
                        float(np.linalg.norm(st.aL1_cur - lattice.aL1[st.n]))
                        / (1.0 + float(np.linalg.norm(lattice.aL1[st.n]))),
                        float(np.linalg.norm(st.aR2d_cur - lattice.aR2d[st.n]))
                        / (1.0 + float(np.linalg.norm(lattice.aR2d[st.n]))),
                    )
                    records.append({"n": st.n, "check": "propagation_gap", "z": None,
                                    "residual": gap})

        report = {
            "schema": serialize.SCHEMA,
            "variant": coeffs.variant,
            "mode": mode,
            "checks": serialize.residual_report_json(records),
        }
        if trajectory is not None:
            report["trajectory"] = trajectory
        artifacts = {"report": {"json": report}}
        if not cfg.get("outputs"):
            cfg["outputs"] = [{"path": "dpii.json", "format": "json", "artifact": "report"}]
        for item in cfg["outputs"]:
            item.setdefault("artifact", "report")
        _write_outputs(cfg, out_dir, artifacts, quiet)
        bad = [r for r in records if r["check"].startswith("dpii") and
               r["residual"] > tol["dpii"]]
        return EXIT_OK if not bad else 1

    _run(body)


@main.command("fuchsian-weight")
@click.option("--p", type=int, required=True)
@click.option("--k", type=click.IntRange(1, 3), required=True)
@click.option("--params", required=True,
              help="comma-separated a0,b0,c0,d0,a1,b1,c1,d1 (real or re+imj)")
@click.option("--order", type=int, default=24)
@click.option("--out", "out_path", default="weight.json", type=click.Path())
@click.option("--quiet", is_flag=True, default=False)
def fuchsian_weight(p, k, params, order, out_path, quiet):
    """Construct the resonant N=2 simple-pole weight and write its document."""

    def body():
        try:
            values = [complex(tok) for tok in params.split(",")]
        except ValueError as exc:
            _fail(EXIT_USAGE, f"cannot parse params: {exc}")
        if len(values) != 8:
            _fail(EXIT_USAGE, "params must list the 8 scalars a0..d1")
        from .errors import ConstraintError
        from .weights import fuchsian_weight_n2

        try:
            spec = fuchsian_weight_n2(p, k, values, order=order)
        except ConstraintError as exc:
            _fail(EXIT_SPEC_MISMATCH, str(exc))
        serialize.dump_json(serialize.weight_to_json(spec), out_path)
        if not quiet:
            click.echo(out_path)
        return EXIT_OK

    _run(body)


if __name__ == "__main__":
    main()
