"""Monic matrix polynomial families biorthogonal on the circle.

Solves the four block Toeplitz normal systems for the degree-n families,
forms reciprocals, reads off the reflection (Verblunsky) matrices at z = 0,
and verifies orthogonality, the degree recursions and the block-norm ratio
identities against the moment data.
"""

from dataclasses import dataclass

import numpy as np

from .errors import QuasiDefiniteError
from .moments import MomentTable, truncated_moment_matrix
from .util import dagger, eye, fro, rel, schur_last_block


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """Matrix polynomial sum_k coeffs[k] z^k, coefficients ascending."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(np.asarray(c, dtype=complex) for c in self.coeffs))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def n_dim(self):
        return self.coeffs[0].shape[0]

    def __call__(self, z):
        out = np.zeros_like(self.coeffs[0])
        for c in reversed(self.coeffs):
            out = out * z + c
        return out

    def derivative(self):
        if self.degree == 0:
            return MatrixPolynomial((np.zeros_like(self.coeffs[0]),))
        return MatrixPolynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k >= 1))

    def shift(self):
        """Multiply by z."""
        return MatrixPolynomial((np.zeros_like(self.coeffs[0]),) + self.coeffs)


def reciprocal(p: MatrixPolynomial) -> MatrixPolynomial:
    """Degree-reversed, conjugate-transposed coefficients."""
    return MatrixPolynomial(tuple(dagger(c) for c in reversed(p.coeffs)))


@dataclass(frozen=True, eq=False)
class SzegoFamily:
    """Degree-n snapshot: the four monic families, reciprocals, reflections, norms."""

    n: int
    pL1: MatrixPolynomial
    pR1: MatrixPolynomial
    pL2: MatrixPolynomial
    pR2: MatrixPolynomial
    tL2: MatrixPolynomial
    tR2: MatrixPolynomial
    alphaL1: np.ndarray
    alphaR1: np.ndarray
    alphaL2: np.ndarray
    alphaR2: np.ndarray
    hL: np.ndarray
    hR: np.ndarray


def _solve_or_raise(a, b, n, what):
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise QuasiDefiniteError(n, f"{what} system singular") from exc
    if not np.all(np.isfinite(x)):
        raise QuasiDefiniteError(n, f"{what} system produced non-finite values")
    return x


def solve_family(table: MomentTable, n: int) -> SzegoFamily:
    """Solve the degree-n normal systems.

    With mu(j) the moment blocks, the monic coefficient rows/columns satisfy
      sum_k P^L_{1,k} mu(j-k)       = 0   (j = 0..n-1)
      sum_k mu(i-k) P^R_{1,k}       = 0   (i = 0..n-1)
      sum_k mu(k-j) (P^L_{2,k})^+   = 0   (j = 0..n-1)
      sum_k (P^R_{2,k})^+ mu(k-j)   = 0   (j = 0..n-1)
    and the quasi-tau matrices are hL = sum_k P^L_{1,k} mu(n-k),
    hR = sum_k mu(n-k) P^R_{1,k}.
    """
    nd = table.n_dim
    i_n = eye(nd)
    if n == 0:
        p = MatrixPolynomial((i_n,))
        mu0 = table[0]
        return SzegoFamily(0, p, p, p, p, p, p, i_n, i_n, i_n, i_n, mu0.copy(), mu0.copy())

    t_r = truncated_moment_matrix(table, n, "R")  # block (i, j) = mu(j - i)
    t_l = truncated_moment_matrix(table, n, "L")  # block (i, j) = mu(i - j)

    rhs_l1 = -np.hstack([table[j - n] for j in range(n)])
    row_l1 = _solve_or_raise(t_r.T, rhs_l1.T, n, "left type-1").T
    pl1 = [row_l1[:, k * nd : (k + 1) * nd] for k in range(n)] + [i_n]

    rhs_r1 = -np.vstack([table[i - n] for i in range(n)])
    col_r1 = _solve_or_raise(t_l, rhs_r1, n, "right type-1")
    pr1 = [col_r1[k * nd : (k + 1) * nd, :] for k in range(n)] + [i_n]

    # daggered type-2 systems share the moment matrices with rows/cols swapped
    rhs_l2 = -np.vstack([table[n - j] for j in range(n)])
    col_l2 = _solve_or_raise(t_r, rhs_l2, n, "left type-2")
    pl2 = [dagger(col_l2[k * nd : (k + 1) * nd, :]) for k in range(n)] + [i_n]

    rhs_r2 = -np.hstack([table[n - j] for j in range(n)])
    row_r2 = _solve_or_raise(t_l.T, rhs_r2.T, n, "right type-2").T
    pr2 = [dagger(row_r2[:, k * nd : (k + 1) * nd]) for k in range(n)] + [i_n]

    h_l = sum(pl1[k] @ table[n - k] for k in range(n + 1))
    h_r = sum(table[n - k] @ pr1[k] for k in range(n + 1))
    for h, side in ((h_l, "left"), (h_r, "right")):
        if not np.all(np.isfinite(h)) or np.linalg.cond(h) > 1e13:
            raise QuasiDefiniteError(n, f"{side} quasi-tau matrix numerically singular")

    p_l1 = MatrixPolynomial(tuple(pl1))
    p_r1 = MatrixPolynomial(tuple(pr1))
    p_l2 = MatrixPolynomial(tuple(pl2))
    p_r2 = MatrixPolynomial(tuple(pr2))
    return SzegoFamily(
        n,
        p_l1,
        p_r1,
        p_l2,
        p_r2,
        reciprocal(p_l2),
        reciprocal(p_r2),
        pl1[0].copy(),
        pr1[0].copy(),
        pl2[0].copy(),
        pr2[0].copy(),
        h_l,
        h_r,
    )


def schur_quasi_tau(table: MomentTable, n: int):
    """(hL, hR) as trailing-block Schur complements of the (n+1)-truncations."""
    if n == 0:
        return table[0].copy(), table[0].copy()
    t_r = truncated_moment_matrix(table, n + 1, "R")
    t_l = truncated_moment_matrix(table, n + 1, "L")
    return schur_last_block(t_r, table.n_dim), schur_last_block(t_l, table.n_dim)


@dataclass(frozen=True, eq=False)
class VerblunskyLattice:
    """Reflection-matrix and norm-matrix sequences through degree n_max.

    aR2d stores the daggered right type-2 values (alpha^R_{2,n})^+; index-0
    entries are the identity by convention and hL[0] = hR[0] = mu(0).
    """

    n_max: int
    aL1: tuple
    aR2d: tuple
    hL: tuple
    hR: tuple

    @property
    def n_dim(self):
        return self.aL1[0].shape[0]


def solve_all(table: MomentTable, n_max: int):
    """Families for n = 0..n_max."""
    return [solve_family(table, n) for n in range(n_max + 1)]


def verblunsky_lattice(table: MomentTable, n_max: int, families=None) -> VerblunskyLattice:
    if families is None:
        families = solve_all(table, n_max)
    i_n = eye(table.n_dim)
    a_l1, a_r2d = [i_n], [i_n]
    h_l, h_r = [table[0].copy()], [table[0].copy()]
    for n in range(1, n_max + 1):
        fam = families[n]
        a_l1.append(fam.alphaL1.copy())
        a_r2d.append(dagger(fam.alphaR2))
        h_l.append(fam.hL.copy())
        h_r.append(fam.hR.copy())
    return VerblunskyLattice(n_max, tuple(a_l1), tuple(a_r2d), tuple(h_l), tuple(h_r))


def pair_left(p1, p2, table: MomentTable):
    """Left pairing: sum_{k,l} P1_k mu(l-k) (P2_l)^+ (integrand P1 dmu P2^+)."""
    nd = table.n_dim
    out = np.zeros((nd, nd), dtype=complex)
    for k, a in enumerate(p1.coeffs):
        for l, b in enumerate(p2.coeffs):
            out += a @ table[l - k] @ dagger(b)
    return out


def pair_right(p2, p1, table: MomentTable):
    """Right pairing: sum_{a,b} (P2_a)^+ mu(a-b) P1_b (integrand P2^+ dmu P1)."""
    nd = table.n_dim
    out = np.zeros((nd, nd), dtype=complex)
    for a, c2 in enumerate(p2.coeffs):
        for b, c1 in enumerate(p1.coeffs):
            out += dagger(c2) @ table[a - b] @ c1
    return out


def check_biorthogonality(family: SzegoFamily, table: MomentTable, others=None) -> float:
    """Max residual of the biorthogonality sums against delta_{nm} hL / hR.

    others supplies the partner families for all degrees m <= n (defaults to
    re-solving them from the table).
    """
    n = family.n
    if others is None:
        others = [solve_family(table, m) for m in range(n + 1)]
    worst = 0.0
    for m, fam_m in enumerate(others[: n + 1]):
        left = pair_left(family.pL1, fam_m.pL2, table)
        right = pair_right(fam_m.pR2, family.pR1, table)
        tgt_l = family.hL if m == n else 0.0
        tgt_r = family.hR if m == n else 0.0
        worst = max(worst, rel(left - tgt_l, family.hL), rel(right - tgt_r, family.hR))
    return worst


def _poly_residual(coeffs_a, coeffs_b):
    la, lb = len(coeffs_a), len(coeffs_b)
    width = max(la, lb)
    out = 0.0
    for k in range(width):
        a = coeffs_a[k] if k < la else 0.0
        b = coeffs_b[k] if k < lb else 0.0
        out = max(out, fro(a - b))
    return out


def check_recursions(lattice: VerblunskyLattice, families) -> list:
    """Residuals of the coefficient-level degree recursions.

    Covers the two polynomial relations of the four-relation theorem (the
    Cauchy-transform pair is checked against sample points in cauchy_rhp) and
    the telescoping identity a_{n+1} - a_n + b_n c_{n+1} = 0 expressed through
    the reflection parametrization.  Returns (n, name, residual) records.
    """
    i_n = eye(lattice.n_dim)
    out = []
    for n in range(len(families) - 1):
        fam, nxt = families[n], families[n + 1]
        scale = 1.0 + max(fro(c) for c in nxt.pL1.coeffs)
        # P^L_{1,n+1}(z) = z P^L_{1,n}(z) + aL1[n+1] tR2_n(z)
        lhs = nxt.pL1.coeffs
        rhs = [
            (fam.pL1.coeffs[k - 1] if k >= 1 else 0.0) + lattice.aL1[n + 1] @ fam.tR2.coeffs[k]
            for k in range(n + 1)
        ] + [i_n]
        out.append((n, "pL1_step", _poly_residual(lhs, rhs) / scale))
        # tR2_n(z) = aR2d[n] P^L_{1,n}(z) + (I - aR2d[n] aL1[n]) tR2_{n-1}(z)
        if n >= 1:
            prev = families[n - 1]
            gain = i_n - lattice.aR2d[n] @ lattice.aL1[n]
            rhs = [
                lattice.aR2d[n] @ fam.pL1.coeffs[k]
                + (gain @ prev.tR2.coeffs[k] if k <= n - 1 else 0.0)
                for k in range(n + 1)
            ]
            out.append((n, "tR2_step", _poly_residual(fam.tR2.coeffs, rhs) / scale))
        # a_{n+1} - a_n + b_n c_{n+1} = 0 via the reflection parametrization
        hr_n = lattice.hR[n]
        step = lattice.aL1[n + 1] @ lattice.aR2d[n]
        b_n = lattice.aL1[n + 1] @ hr_n
        c_n1 = -np.linalg.solve(hr_n, lattice.aR2d[n])
        out.append((n, "abc_telescope", fro(step + b_n @ c_n1) / (1.0 + fro(step))))
    return out


def h_ratio_residuals(lattice: VerblunskyLattice) -> list:
    """Residuals of hR[n] hR[n-1]^{-1} = I - aR2d[n] aL1[n] and the left twin."""
    i_n = eye(lattice.n_dim)
    out = []
    for n in range(1, lattice.n_max + 1):
        r_r = lattice.hR[n] @ np.linalg.inv(lattice.hR[n - 1]) - (
            i_n - lattice.aR2d[n] @ lattice.aL1[n]
        )
        r_l = lattice.hL[n] @ np.linalg.inv(lattice.hL[n - 1]) - (
            i_n - lattice.aL1[n] @ lattice.aR2d[n]
        )
        out.append((n, "h_ratio_R", rel(r_r, i_n)))
        out.append((n, "h_ratio_L", rel(r_l, i_n)))
    return out
