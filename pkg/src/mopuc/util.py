"""Small shared linear-algebra helpers."""

import numpy as np


def dagger(a):
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def fro(a):
    return float(np.linalg.norm(a))


def rel(residual, scale):
    """Frobenius norm of residual relative to 1 + |scale|."""
    return fro(residual) / (1.0 + fro(scale))


def as_matrix(x, n_dim):
    """Coerce to an (n_dim, n_dim) complex array; reject other shapes."""
    a = np.asarray(x, dtype=complex)
    if a.shape == () and n_dim == 1:
        a = a.reshape(1, 1)
    if a.shape != (n_dim, n_dim):
        raise ValueError(f"expected {n_dim}x{n_dim} matrix, got shape {a.shape}")
    return a


def eye(n_dim):
    return np.eye(n_dim, dtype=complex)


def schur_last_block(t, n_dim):
    """Schur complement of the trailing n_dim x n_dim block of t."""
    k = t.shape[0] - n_dim
    if k == 0:
        return t.copy()
    a, b = t[:k, :k], t[:k, k:]
    c, d = t[k:, :k], t[k:, k:]
    return d - c @ np.linalg.solve(a, b)


def richardson_pair(f_r, f_r2, r):
    """Extrapolate f(1) from samples at radii r and r**2 assuming O(1-r) error.

    Eliminates the linear term exactly: f(1) = ((1+r) f(r) - f(r^2)) / r.
    """
    return ((1.0 + r) * f_r - f_r2) / r
