"""Degree-step transfer matrix R_n(z) and the z-derivative system of Z_n.

R_n(z) = Z_{n+1}(z) Z_n(z)^{-1} is a first-order polynomial in 1/z whose
residue is a rank-structured (dyadic) combination of reflection data.  The
logarithmic z-derivative M_n(z) = Z_n'(z) Z_n(z)^{-1} is analytic off the
origin; its leading Laurent coefficient is a dyadic sandwich of the weight's
singularity data, and the pair (R_n, M_n) satisfies a differential
compatibility identity.  Everything here is verified numerically against the
frames.
"""

from dataclasses import dataclass

import numpy as np

from .cauchy_rhp import FrameBuilder
from .szego import VerblunskyLattice
from .util import eye, fro, rel
from .weights import SingularityClass

FOURIER_RHO = 0.5
FOURIER_NODES = 64


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """R_n(z) = R0 + Rm1 / z."""

    n: int
    R0: np.ndarray
    Rm1: np.ndarray

    def __call__(self, z):
        return self.R0 + self.Rm1 / z


@dataclass(frozen=True, eq=False)
class PearsonLeading:
    """Leading Laurent coefficient of M_n at 0 and its pole order."""

    n: int
    M0: np.ndarray
    order: int


def transfer_matrix(lattice: VerblunskyLattice, n: int) -> TransferMatrix:
    """Assemble R_n from lattice data through n + 1.

    Rm1 = [[aL1[n+1] aR2d[n], -aL1[n+1] hR[n]], [-hR[n]^{-1} aR2d[n], I]],
    equal to the dyadic product [aL1[n+1]; -hR[n]^{-1}] [aR2d[n], -hR[n]].
    """
    nd = lattice.n_dim
    zero = np.zeros((nd, nd))
    r0 = np.block([[eye(nd), zero], [zero, zero]])
    hr_inv = np.linalg.inv(lattice.hR[n])
    rm1 = np.block(
        [
            [lattice.aL1[n + 1] @ lattice.aR2d[n], -lattice.aL1[n + 1] @ lattice.hR[n]],
            [-hr_inv @ lattice.aR2d[n], eye(nd)],
        ]
    )
    return TransferMatrix(n, r0, rm1)


def dyadic_residual(lattice: VerblunskyLattice, n: int) -> float:
    """Gap between Rm1 and its rank-structured factorization."""
    nd = lattice.n_dim
    rm1 = transfer_matrix(lattice, n).Rm1
    col = np.vstack([lattice.aL1[n + 1], -np.linalg.inv(lattice.hR[n])])
    row = np.hstack([lattice.aR2d[n], -lattice.hR[n]])
    return rel(rm1 - col @ row, rm1)


def check_transfer(lattice: VerblunskyLattice, builder: FrameBuilder, n, z_samples) -> dict:
    """Residuals of the one-step relations at sample points.

    Y_{n+1}(z) = R_n(z) Y_n(z) diag(zI, I) and
    X_{n+1}(z) = R_n(z) X_n(z) diag(I, zI).
    """
    nd = lattice.n_dim
    r_n = transfer_matrix(lattice, n)
    zero = np.zeros((nd, nd))
    worst_y = worst_x = 0.0
    for z in np.asarray(z_samples, dtype=complex).ravel():
        f_n = builder.frame(n, z)
        f_n1 = builder.frame(n + 1, z)
        dy = np.block([[z * eye(nd), zero], [zero, eye(nd)]])
        dx = np.block([[eye(nd), zero], [zero, z * eye(nd)]])
        worst_y = max(worst_y, rel(f_n1.Y - r_n(z) @ f_n.Y @ dy, f_n1.Y))
        worst_x = max(worst_x, rel(f_n1.X - r_n(z) @ f_n.X @ dx, f_n1.X))
    return {"Y": worst_y, "X": worst_x}


def transfer_product_residual(lattice: VerblunskyLattice, builder: FrameBuilder, n, z) -> float:
    """Reconstruct Y_n(z) as R_{n-1}(z)...R_0(z) applied to the degree-0 frame.

    The seed column uses the weight's plain Cauchy transform, i.e. the (1,2)
    entry of the degree-0 frame.
    """
    z = complex(z)
    nd = lattice.n_dim
    f0 = builder.frame(0, z)
    seed = np.block(
        [
            [z**n * eye(nd), f0.Y[:nd, nd:]],
            [np.zeros((nd, nd)), eye(nd)],
        ]
    )
    prod = eye(2 * nd)
    for m in range(n):
        prod = transfer_matrix(lattice, m)(z) @ prod
    target = builder.frame(n, z).Y
    return rel(target - prod @ seed, target)


def transfer_analyticity_residual(lattice, builder, n, zeta_samples, r=1.0 - 1e-4) -> float:
    """R from frame ratios inside vs outside the circle (no jump across it).

    Evaluates Z_{n+1} Z_n^{-1} at r*zeta and zeta/r; the gap after Richardson
    extrapolation in both radii measures any residual jump.
    """
    from .util import richardson_pair

    worst = 0.0
    for zeta in np.asarray(zeta_samples, dtype=complex).ravel():

        def ratio(z):
            return builder.frame(n + 1, z).Z @ np.linalg.inv(builder.frame(n, z).Z)

        inside = richardson_pair(ratio(r * zeta), ratio(r * r * zeta), r)
        outside = richardson_pair(ratio(zeta / r), ratio(zeta / r**2), r)
        worst = max(worst, rel(inside - outside, inside))
    return worst


def pearson_leading(lattice: VerblunskyLattice, n: int, cls: SingularityClass) -> PearsonLeading:
    """Dyadic leading coefficient of M_n at the origin.

    n >= 1: [aL1[n]; -hR[n-1]^{-1}] W_n^[0] [aR2d[n], -hR[n]];
    n  = 0: [[W_0^[0], -W_0^[0] hR[0]], [0, 0]].
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    nd = lattice.n_dim
    w_n0 = cls.leading_matrix(n)
    if n == 0:
        m0 = np.block(
            [
                [w_n0, -w_n0 @ lattice.hR[0]],
                [np.zeros((nd, nd)), np.zeros((nd, nd))],
            ]
        )
    else:
        col = np.vstack([lattice.aL1[n], -np.linalg.inv(lattice.hR[n - 1])])
        row = np.hstack([lattice.aR2d[n], -lattice.hR[n]])
        m0 = col @ w_n0 @ row
    return PearsonLeading(n, m0, cls.pole_order)


def m_numeric(builder: FrameBuilder, n, z, step_scale=1e-6, method="auto") -> np.ndarray:
    """M_n(z) = Z_n'(z) Z_n(z)^{-1} with the derivative by central difference."""
    z = complex(z)
    h = step_scale * abs(z)
    z_p = builder.frame(n, z + h, method=method).Z
    z_m = builder.frame(n, z - h, method=method).Z
    dz = (z_p - z_m) / (2.0 * h)
    return dz @ np.linalg.inv(builder.frame(n, z, method=method).Z)


def m_numeric_x(builder: FrameBuilder, n, z, step_scale=1e-6, method="auto") -> np.ndarray:
    """M_n via the X dressing: X'X^{-1} + X diag(W(z), -n/z I) X^{-1}.

    Equivalent to the Z-route but free of the weight's magnitude, so it stays
    well conditioned for exponentially growing weights far from the circle.
    Needs the attached Pearson data for W(z).
    """
    z = complex(z)
    nd = builder.spec.n_dim
    h = step_scale * abs(z)
    x_p = builder.frame(n, z + h, with_z=False, method=method).X
    x_m = builder.frame(n, z - h, with_z=False, method=method).X
    x_0 = builder.frame(n, z, with_z=False, method=method).X
    x_inv = np.linalg.inv(x_0)
    w_z = builder.spec.pearson.eval(z)
    zero = np.zeros((nd, nd))
    core = np.block([[w_z, zero], [zero, -(n / z) * eye(nd)]])
    return (x_p - x_m) / (2.0 * h) @ x_inv + x_0 @ core @ x_inv


def m_laurent_coefficient(builder: FrameBuilder, n, k, rho, nodes=FOURIER_NODES,
                          method="auto", route="z") -> np.ndarray:
    """z^k Laurent coefficient of M_n, by contour integration on |z| = rho.

    Exponentially accurate: aliasing picks up c_{k +- nodes}, which is
    suppressed by rho^{+-nodes} (and vanishes outright above the top degree).
    """
    zs = rho * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    m_fn = m_numeric if route == "z" else m_numeric_x
    vals = np.stack([m_fn(builder, n, z, method=method) for z in zs])
    return (vals * (zs ** (-k))[:, None, None]).mean(axis=0)


def m_leading_fourier(builder: FrameBuilder, n, order, rho=FOURIER_RHO,
                      nodes=FOURIER_NODES) -> np.ndarray:
    """Leading pole coefficient (z^{-order}) of M_n on a small circle."""
    return m_laurent_coefficient(builder, n, -order, rho, nodes)


def m_analyticity_residual(builder: FrameBuilder, n, zeta_samples, r=0.999) -> float:
    """Boundary values of M_n from inside vs outside along rays.

    Each side is Richardson-extrapolated to the circle before comparison, so an
    analytic M_n leaves only the O((1-r)^2) extrapolation error.
    """
    from .util import richardson_pair

    worst = 0.0
    for zeta in np.asarray(zeta_samples, dtype=complex).ravel():
        inside = richardson_pair(
            m_numeric(builder, n, r * zeta), m_numeric(builder, n, r * r * zeta), r
        )
        outside = richardson_pair(
            m_numeric(builder, n, zeta / r), m_numeric(builder, n, zeta / r**2), r
        )
        worst = max(worst, rel(inside - outside, inside))
    return worst


def m_infinity_coefficient(builder: FrameBuilder, n, s, rho=50.0) -> np.ndarray:
    """z^s (top-degree) coefficient of M_n.

    For a weight whose log-derivative tops out at degree s this equals
    diag(W_s, 0).  Extracted on |z| = rho through the X dressing, which keeps
    the conditioning independent of the weight's exponential growth.
    """
    return m_laurent_coefficient(builder, n, s, rho, method="series", route="x")


def compatibility_residual(lattice: VerblunskyLattice, cls: SingularityClass, n: int) -> float:
    """Leading-coefficient compatibility of the (R_n, M_n) pair.

    M^[0]_{n+1} Rm1 - Rm1 M^[0]_n equals -Rm1 in the ordinary/fuchsian cases
    and vanishes in the non-fuchsian ones.
    """
    rm1 = transfer_matrix(lattice, n).Rm1
    m_n = pearson_leading(lattice, n, cls).M0
    m_n1 = pearson_leading(lattice, n + 1, cls).M0
    correction = -rm1 if cls.kind in ("ordinary", "fuchsian") else np.zeros_like(rm1)
    return rel(m_n1 @ rm1 - rm1 @ m_n - correction, rm1)


def compatibility_differential_residual(lattice, builder, n, z) -> float:
    """Full differential compatibility dR_n/dz = M_{n+1} R_n - R_n M_n at one z."""
    z = complex(z)
    r_n = transfer_matrix(lattice, n)
    d_r = -r_n.Rm1 / z**2
    m_n = m_numeric(builder, n, z)
    m_n1 = m_numeric(builder, n + 1, z)
    return rel(d_r - (m_n1 @ r_n(z) - r_n(z) @ m_n), d_r)


def differential_relation_residual(builder: FrameBuilder, cls: SingularityClass, n, z) -> float:
    """The z-derivative system applied to the polynomial column at one z.

    M_n(z) [P^L_{1,n}; -hR_{n-1}^{-1} tR2_{n-1}] must equal the displayed
    combination d/dz - n/z + (right multiplication by W(z)) of that column.
    """
    z = complex(z)
    fam = builder.families[n]
    spec = builder.spec
    w_z = spec.pearson.eval(z)
    m_n = m_numeric(builder, n, z)
    if n == 0:
        col = np.vstack([eye(builder.spec.n_dim), np.zeros((builder.spec.n_dim,) * 2)])
        target = np.vstack([w_z, np.zeros_like(w_z)])
        return rel(m_n @ col - target, target)
    prev = builder.families[n - 1]
    hr_inv = np.linalg.inv(prev.hR)
    top = fam.pL1(z)
    bot = -hr_inv @ prev.tR2(z)
    col = np.vstack([top, bot])
    d_top = fam.pL1.derivative()(z) - (n / z) * top + top @ w_z
    d_bot = -hr_inv @ (prev.tR2.derivative()(z) - (n / z) * prev.tR2(z) + prev.tR2(z) @ w_z)
    target = np.vstack([d_top, d_bot])
    return rel(m_n @ col - target, target)
