"""Cauchy transforms of the polynomial families and the 2N x 2N boundary frames.

Evaluates the four transforms by circle quadrature or by their interior /
exterior power series, assembles the piecewise-analytic frames Y, X, Z, and
verifies the defining properties numerically: unit determinant, multiplicative
boundary jumps, Laurent block structure at the origin, normalization at
infinity, and the reflection-matrix parametrization of the expansion
coefficients there.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .moments import MomentTable, circle_values
from .szego import SzegoFamily, VerblunskyLattice
from .util import eye, fro, rel, richardson_pair
from .weights import WeightSpec, eval_weight

CIRCLE_EXCLUSION = 0.05  # direct quadrature refuses |z| within this band of 1
BOUNDARY_R = 1.0 - 1e-4  # radius used for one-sided boundary values


@dataclass(frozen=True, eq=False)
class CauchyValues:
    """Values of the four transforms at one point."""

    n: int
    z: complex
    qL1: np.ndarray
    qL2: np.ndarray
    qR1: np.ndarray
    qR2: np.ndarray


@dataclass(frozen=True, eq=False)
class RHPFrame:
    """Boundary-problem frames at one point: Y plus its X and Z dressings."""

    n: int
    z: complex
    Y: np.ndarray
    X: np.ndarray
    Z: np.ndarray


@dataclass(frozen=True, eq=False)
class XCoefficients:
    """First two expansion coefficients of X about infinity."""

    n: int
    X1: np.ndarray
    X2: np.ndarray


def _quad_once(family, values, zs_nodes, z):
    n = family.n
    zb = np.conj(zs_nodes)
    kern = 1.0 / (1.0 - zb * z)
    pl1 = np.stack([family.pL1(zz) for zz in zs_nodes])
    tl2 = np.stack([family.tL2(zz) for zz in zs_nodes])
    pr1 = np.stack([family.pR1(zz) for zz in zs_nodes])
    tr2 = np.stack([family.tR2(zz) for zz in zs_nodes])
    f1 = (zb**n * kern)[:, None, None]
    f2 = (zb ** (n + 1) * kern)[:, None, None]
    q_l1 = (f1 * (pl1 @ values)).mean(axis=0)
    q_l2 = (f2 * (values @ tl2)).mean(axis=0)
    q_r1 = (f1 * (values @ pr1)).mean(axis=0)
    q_r2 = (f2 * (tr2 @ values)).mean(axis=0)
    return q_l1, q_l2, q_r1, q_r2


def cauchy_eval(family: SzegoFamily, spec: WeightSpec, z, initial_m=256,
                tol=1e-12, m_max=2**18) -> CauchyValues:
    """Contour-quadrature values of the four transforms, doubling nodes to tol.

    Refuses points within 5% of the circle, where the kernel makes uniform
    quadrature useless; use series_eval there.
    """
    z = complex(z)
    if abs(abs(z) - 1.0) < CIRCLE_EXCLUSION:
        raise DomainError(
            f"|z| = {abs(z):.4f} too close to the contour; use series_eval near the circle"
        )
    m = int(initial_m)
    zs = np.exp(2j * np.pi * np.arange(m) / m)
    prev = _quad_once(family, circle_values(spec, m), zs, z)
    prev_change = np.inf
    while True:
        m *= 2
        zs = np.exp(2j * np.pi * np.arange(m) / m)
        cur = _quad_once(family, circle_values(spec, m), zs, z)
        scale = 1.0 + max(fro(q) for q in cur)
        change = max(fro(cur[i] - prev[i]) for i in range(4))
        # accept on target, or once refinement stagnates at the roundoff floor
        if change < tol * scale or (change < 1e-9 * scale and change > 0.25 * prev_change):
            return CauchyValues(family.n, z, *cur)
        if m >= m_max:
            raise ConvergenceError(f"cauchy quadrature stalled at M = {m} (change {change:.2e})")
        prev, prev_change = cur, change


def hat_pl1(family, table, j):
    """Fourier coefficient of the paired measure: sum_k P^L_{1,k} mu(-j-k)."""
    out = np.zeros((table.n_dim, table.n_dim), dtype=complex)
    for k, c in enumerate(family.pL1.coeffs):
        out += c @ table[-j - k]
    return out


def hat_pl2(family, table, j):
    """sum_k mu(1-j-k) t_k over the left reciprocal coefficients."""
    out = np.zeros((table.n_dim, table.n_dim), dtype=complex)
    for k, c in enumerate(family.tL2.coeffs):
        out += table[1 - j - k] @ c
    return out


def hat_pr1(family, table, j):
    out = np.zeros((table.n_dim, table.n_dim), dtype=complex)
    for k, c in enumerate(family.pR1.coeffs):
        out += table[-j - k] @ c
    return out


def hat_pr2(family, table, j):
    out = np.zeros((table.n_dim, table.n_dim), dtype=complex)
    for k, c in enumerate(family.tR2.coeffs):
        out += c @ table[1 - j - k]
    return out


_HATS = (hat_pl1, hat_pl2, hat_pr1, hat_pr2)


def series_eval(family: SzegoFamily, table: MomentTable, z, side=None,
                tol=1e-13) -> CauchyValues:
    """Power-series values of the four transforms.

    Interior (|z| < 1):  Q = sum_{j>=0} hat(-n-j) z^j
    Exterior (|z| > 1):  Q = -sum_{j>=1} hat(j) z^{-n-j}
    with the appropriate hatted Fourier coefficient for each transform; the
    j = 0 interior terms are hL, hat_pl2(-n), hR, hat_pr2(-n).

    Truncates once every term falls below tol relative to its accumulated sum;
    raises ConvergenceError if the moment table is exhausted first.
    """
    z = complex(z)
    if side is None:
        side = "interior" if abs(z) < 1.0 else "exterior"
    if side not in ("interior", "exterior"):
        raise ValueError("side must be 'interior' or 'exterior'")
    n = family.n
    j_cap = table.j_max - n - 1  # the type-2 hats reach moment index 1+n+j
    if j_cap < 1:
        raise ConvergenceError("moment table too shallow for series evaluation")

    nd = table.n_dim
    if side == "interior":
        acc = [h(family, table, -n) for h in _HATS]
    else:
        acc = [np.zeros((nd, nd), dtype=complex) for _ in range(4)]

    # a hatted coefficient below the moment table's noise level carries no
    # information regardless of the requested tolerance
    table_noise = table.est_error + 1e-15 * (1.0 + fro(table[0]))
    poly_scale = [
        sum(fro(c) for c in poly.coeffs)
        for poly in (family.pL1, family.tL2, family.pR1, family.tR2)
    ]
    last_rel = [np.inf] * 4
    streak = [0] * 4  # consecutive settled terms (guards gapped supports)
    for j in range(1, j_cap + 1):
        for i, hat in enumerate(_HATS):
            if streak[i] >= 3:
                continue
            hat_val = hat(family, table, (-n - j) if side == "interior" else j)
            term = hat_val * z**j if side == "interior" else -hat_val * z ** (-n - j)
            acc[i] = acc[i] + term
            small = (
                fro(term) <= tol * fro(acc[i]) + 1e-300
                or fro(hat_val) <= 10.0 * table_noise * poly_scale[i]
            )
            last_rel[i] = fro(term) / max(fro(acc[i]), 1e-300)
            streak[i] = streak[i] + 1 if small else 0
        if all(s >= 3 for s in streak):
            break
    else:
        if any(streak[i] == 0 and last_rel[i] > 1e3 * tol for i in range(4)):
            raise ConvergenceError(
                f"series truncation tolerance unreachable with j_max = {table.j_max}"
            )
    return CauchyValues(n, z, *acc)


def q_values(family: SzegoFamily, spec: WeightSpec, table: MomentTable, z,
             method="auto") -> CauchyValues:
    """Transform values by quadrature away from the circle, series near it.

    method="series" forces the series path (relatively accurate for far
    points, where the absolute quadrature tolerance is magnified by z^n);
    "quadrature" forces direct integration and fails near the circle.
    """
    if method == "series" or (
        method == "auto" and abs(abs(complex(z)) - 1.0) < CIRCLE_EXCLUSION
    ):
        return series_eval(family, table, z)
    return cauchy_eval(family, spec, z)


class FrameBuilder:
    """Assembles frames for one weight, reusing family and moment data."""

    def __init__(self, spec: WeightSpec, table: MomentTable, families):
        self.spec = spec
        self.table = table
        self.families = families

    def frame(self, n, z, with_z=True, method="auto") -> RHPFrame:
        fam = self.families[n]
        prev = self.families[n - 1] if n >= 1 else None
        return assemble_frame(
            n, z, fam, prev, self.spec, self.table, with_z=with_z, method=method
        )


def assemble_frame(n, z, family_n: SzegoFamily, family_prev, spec: WeightSpec,
                   table: MomentTable, with_z=True, method="auto") -> RHPFrame:
    """Build Y (and its X, Z dressings) at a point off the circle.

    Y rows: [P^L_{1,n}, Q^L_{1,n}; -hR_{n-1}^{-1} tR2_{n-1}, -hR_{n-1}^{-1} Q^R_{2,n-1}],
    degenerating to [[I, Q^L_{1,0}], [0, I]] at n = 0;
    X = Y diag(z^{-n} I, z^n I), Z = Y diag(w(z) z^{-n}, I).  with_z=False
    skips the weight factor (exp-type weights overflow at very large |z|).
    """
    z = complex(z)
    if z == 0:
        raise DomainError("frames undefined at z = 0")
    nd = spec.n_dim
    i_n = eye(nd)
    zero = np.zeros((nd, nd))
    if n == 0:
        q0 = q_values(family_n, spec, table, z, method)
        y = np.block([[i_n, q0.qL1], [zero, i_n]])
    else:
        qn = q_values(family_n, spec, table, z, method)
        qprev = q_values(family_prev, spec, table, z, method)
        hr_inv = np.linalg.inv(family_prev.hR)
        y = np.block(
            [
                [family_n.pL1(z), qn.qL1],
                [-hr_inv @ family_prev.tR2(z), -hr_inv @ qprev.qR2],
            ]
        )
    x = y @ np.block([[i_n * z**-n, zero], [zero, i_n * z**n]])
    zf = None
    if with_z:
        w = eval_weight(spec, z)
        zf = y @ np.block([[w * z**-n, zero], [zero, i_n]])
    return RHPFrame(n, z, y, x, zf)


def det_y_residual(frame: RHPFrame) -> float:
    """|det Y - 1|; unit determinant follows from Liouville for the strong problem."""
    return abs(np.linalg.det(frame.Y) - 1.0)


def jump_matrix_y(spec: WeightSpec, zeta, n):
    nd = spec.n_dim
    w = eval_weight(spec, zeta)
    return np.block([[eye(nd), w * np.conj(zeta) ** n], [np.zeros((nd, nd)), eye(nd)]])


def check_jump(n, zeta_samples, spec: WeightSpec, builder: FrameBuilder) -> dict:
    """Jump residuals of Y and of the constant-jump Z form on the circle.

    Boundary values come from two-radius Richardson extrapolation at r, r^2
    (inside) and 1/r, 1/r^2 (outside), with r = 1 - 1e-4.
    """
    nd = spec.n_dim
    r = BOUNDARY_R
    jz = np.block([[eye(nd), eye(nd)], [np.zeros((nd, nd)), eye(nd)]])
    worst_y, worst_z = 0.0, 0.0
    for zeta in np.asarray(zeta_samples, dtype=complex).ravel():
        y_plus = richardson_pair(builder.frame(n, r * zeta).Y, builder.frame(n, r * r * zeta).Y, r)
        y_minus = richardson_pair(builder.frame(n, zeta / r).Y, builder.frame(n, zeta / r**2).Y, r)
        z_plus = richardson_pair(builder.frame(n, r * zeta).Z, builder.frame(n, r * r * zeta).Z, r)
        z_minus = richardson_pair(builder.frame(n, zeta / r).Z, builder.frame(n, zeta / r**2).Z, r)
        jm = jump_matrix_y(spec, zeta, n)
        worst_y = max(worst_y, rel(y_plus - y_minus @ jm, y_plus))
        worst_z = max(worst_z, rel(z_plus - z_minus @ jz, z_plus))
    return {"Y": worst_y, "Z": worst_z}


def x_coefficients(lattice: VerblunskyLattice, n: int) -> XCoefficients:
    """X1 and X2 blocks from the reflection-matrix closed forms.

    X1 = [[a, b], [c, d]] with
        a_n = sum_{m<n} aL1[m+1] aR2d[m]        b_n = aL1[n+1] hR[n]
        c_n = -hR[n-1]^{-1} aR2d[n-1]           d_n = -sum_{m<n} hR[m]^{-1} aR2d[m] aL1[m+1] hR[m]
    (index-0 reflections are taken to be the identity).  X2 follows from the
    one-step matrix recursions seeded by the empty-product values; its b block
    uses b_{n+1}, so the lattice must reach n + 2.
    """
    if n + 2 > lattice.n_max:
        raise ValueError("x_coefficients needs lattice depth n + 2")
    nd = lattice.n_dim
    zero = np.zeros((nd, nd), dtype=complex)

    def a_of(m):
        return sum((lattice.aL1[i + 1] @ lattice.aR2d[i] for i in range(m)), zero.copy())

    def b_of(m):
        return lattice.aL1[m + 1] @ lattice.hR[m]

    def c_of(m):
        if m == 0:
            return zero.copy()
        return -np.linalg.solve(lattice.hR[m - 1], lattice.aR2d[m - 1])

    def d_of(m):
        return -sum(
            (
                np.linalg.solve(lattice.hR[i], lattice.aR2d[i]) @ lattice.aL1[i + 1] @ lattice.hR[i]
                for i in range(m)
            ),
            zero.copy(),
        )

    x1 = np.block([[a_of(n), b_of(n)], [c_of(n), d_of(n)]])

    def b2_of(m):
        return b_of(m + 1) - (a_of(m + 1) - a_of(m)) @ b_of(m) + b_of(m) @ d_of(m)

    a2 = zero.copy()  # a2_m vanishes for m <= 1
    for m in range(1, n):
        a2 = a2 + (a_of(m + 1) - a_of(m)) @ a_of(m) - b_of(m) @ c_of(m)
    c2 = c_of(n) @ a_of(n - 1) + c_of(n - 1) if n >= 2 else zero.copy()
    d2 = zero.copy()
    for m in range(n):
        d2 = d2 + c_of(m + 1) @ b2_of(m)
    x2 = np.block([[a2, b2_of(n)], [c2, d2]])
    return XCoefficients(n, x1, x2)


def x_asymptotic_fit(builder: FrameBuilder, n, radii=(1e4, 1e5)):
    """Fit X(z) = I + X1/z + X2/z^2 from frames at two large radii."""
    r1, r2 = (float(r) for r in radii)
    x_a = builder.frame(n, complex(r1), with_z=False, method="series").X
    x_b = builder.frame(n, complex(r2), with_z=False, method="series").X
    dim = x_a.shape[0]
    v = np.array([[1.0 / r1, 1.0 / r1**2], [1.0 / r2, 1.0 / r2**2]])
    rhs = np.stack([(x_a - np.eye(dim)).ravel(), (x_b - np.eye(dim)).ravel()])
    sol = np.linalg.solve(v, rhs)
    return sol[0].reshape(dim, dim), sol[1].reshape(dim, dim)


def laurent_split_residual(builder: FrameBuilder, n, rho=0.5, m_nodes=64) -> float:
    """Block structure of the Laurent expansion of X at the origin.

    Coefficients are extracted by discrete contour integration on |z| = rho.
    The principal part must consist of the polynomial data with an empty
    second block column; the regular part minus diag(I, 0) must have an empty
    first block column.
    """
    nd = builder.spec.n_dim
    fam = builder.families[n]
    prev = builder.families[n - 1] if n >= 1 else None
    zs = rho * np.exp(2j * np.pi * np.arange(m_nodes) / m_nodes)
    frames = np.stack([builder.frame(n, z, with_z=False).X for z in zs])
    worst = 0.0
    scale = 1.0 + float(np.abs(frames).max())
    for k in range(-n, n + 1):
        coeff = (frames * (zs ** (-k))[:, None, None]).mean(axis=0)
        if k < 0:
            # principal part: second block column empty, first matches polynomials
            worst = max(worst, fro(coeff[:, nd:]) / scale)
            top = fam.pL1.coeffs[n + k]
            bot = (
                -np.linalg.solve(prev.hR, prev.tR2.coeffs[n + k])
                if n + k <= n - 1
                else np.zeros((nd, nd))
            )
            worst = max(worst, fro(coeff[:, :nd] - np.vstack([top, bot])) / scale)
        elif k == 0:
            ref = np.vstack([eye(nd), np.zeros((nd, nd))])
            worst = max(worst, fro(coeff[:, :nd] - ref) / scale)
        else:
            worst = max(worst, fro(coeff[:, :nd]) / scale)
    return worst


def q_recursion_residuals(lattice, families, spec, table, zs) -> list:
    """Residuals of the transform pair of the recursion theorem at sample points:

    Q^L_{1,n+1}(z) = Q^L_{1,n}(z) + aL1[n+1] Q^R_{2,n}(z)
    z Q^R_{2,n}(z) = aR2d[n] Q^L_{1,n}(z) + (I - aR2d[n] aL1[n]) Q^R_{2,n-1}(z)
    """
    i_n = eye(lattice.n_dim)
    out = []
    for n in range(len(families) - 1):
        for z in zs:
            z = complex(z)
            q_n = q_values(families[n], spec, table, z)
            q_n1 = q_values(families[n + 1], spec, table, z)
            r1 = q_n1.qL1 - q_n.qL1 - lattice.aL1[n + 1] @ q_n.qR2
            out.append((n, "qL1_step", z, rel(r1, q_n1.qL1)))
            if n >= 1:
                q_prev = q_values(families[n - 1], spec, table, z)
                gain = i_n - lattice.aR2d[n] @ lattice.aL1[n]
                r2 = z * q_n.qR2 - lattice.aR2d[n] @ q_n.qL1 - gain @ q_prev.qR2
                out.append((n, "qR2_step", z, rel(r2, q_n.qR2)))
    return out
