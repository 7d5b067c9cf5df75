"""Fourier coefficients of circle weights and truncated block Toeplitz matrices."""

import weakref
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from . import _kernels
from .errors import ConvergenceError, MopucError
from .weights import WeightSpec, eval_weight_many

M_MAX = 2**20
MOMENT_TOL = 1e-12

_NODE_CACHE = weakref.WeakKeyDictionary()


def circle_values(spec: WeightSpec, m: int) -> np.ndarray:
    """Weight values at the m-th roots of unity, cached per spec instance."""
    per_spec = _NODE_CACHE.setdefault(spec, {})
    vals = per_spec.get(m)
    if vals is None:
        zs = np.exp(2j * np.pi * np.arange(m) / m)
        vals = eval_weight_many(spec, zs)
        per_spec[m] = vals
    return vals


@dataclass(frozen=True)
class MomentTable:
    """Fourier blocks mu_hat(j) for |j| <= j_max with the achieved quadrature error."""

    n_dim: int
    j_max: int
    blocks: dict = field(repr=False)  # j -> N x N block
    quadrature_size: int = 0
    est_error: float = 0.0

    def __getitem__(self, j):
        j = int(j)
        if abs(j) > self.j_max:
            raise MomentTableRangeError(f"moment index {j} outside [-{self.j_max}, {self.j_max}]")
        return self.blocks[j]


class MomentTableRangeError(MopucError, IndexError):
    pass


def compute_moments(spec: WeightSpec, j_max: int, initial_m: int = 64,
                    tol: float = MOMENT_TOL, m_max: int = M_MAX) -> MomentTable:
    """Trapezoid (uniform-node) quadrature of mu_hat(j), doubling nodes to convergence.

    mu_hat(j) ~ (1/M) sum_m w(exp(2*pi*i*m/M)) exp(-2*pi*i*j*m/M); spectrally
    accurate for weights analytic in a neighbourhood of the circle.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    js = np.arange(-j_max, j_max + 1)
    m = max(int(initial_m), 2 * j_max + 2)
    prev = _kernels.fourier_reduce(circle_values(spec, m), js)
    while True:
        m *= 2
        cur = _kernels.fourier_reduce(circle_values(spec, m), js)
        scale = 1.0 + max(float(np.linalg.norm(b)) for b in cur)
        change = float(max(np.linalg.norm(cur[i] - prev[i]) for i in range(len(js))))
        if change < tol * scale:
            blocks = {int(j): cur[i] for i, j in enumerate(js)}
            return MomentTable(spec.n_dim, int(j_max), blocks, m, change)
        if m >= m_max:
            raise ConvergenceError(
                f"moment quadrature did not converge by M = {m} (last change {change:.3e})"
            )
        prev = cur


def table_from_blocks(blocks: dict, n_dim: int) -> MomentTable:
    """Assemble a MomentTable from exact blocks (oracle / file input)."""
    jmax = max(abs(int(j)) for j in blocks)
    full = {}
    for j in range(-jmax, jmax + 1):
        full[j] = np.asarray(blocks.get(j, np.zeros((n_dim, n_dim))), dtype=complex)
    return MomentTable(n_dim, jmax, full, 0, 0.0)


def truncated_moment_matrix(table: MomentTable, n: int, side: str) -> np.ndarray:
    """n x n block Toeplitz truncation; block (i, j) is mu_hat(i-j) on the left
    side and mu_hat(j-i) on the right side."""
    if n - 1 > table.j_max:  # blocks reach indices +-(n-1)
        raise MomentTableRangeError(f"truncation {n} exceeds table depth {table.j_max}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if side == "L":
        return np.block([[table[i - j] for j in range(n)] for i in range(n)])
    if side == "R":
        return np.block([[table[j - i] for j in range(n)] for i in range(n)])
    raise ValueError("side must be 'L' or 'R'")


def _rcond_lu(t):
    lu, _, info = lapack.zgetrf(t)
    if info > 0:
        return 0.0
    rcond, _ = lapack.zgecon(lu, np.linalg.norm(t, 1), norm="1")
    return float(rcond)


def quasi_definiteness(table: MomentTable, n_max: int):
    """Reciprocal condition estimates (pivoted LU) of both truncations, n = 1..n_max.

    Values below ~1e-13 flag a numerically non-quasi-definite measure.
    """
    out = []
    for n in range(1, n_max + 1):
        out.append(
            (
                n,
                _rcond_lu(truncated_moment_matrix(table, n, "L")),
                _rcond_lu(truncated_moment_matrix(table, n, "R")),
            )
        )
    return out
