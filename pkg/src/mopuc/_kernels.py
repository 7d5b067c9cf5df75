"""Hot numeric kernels: batched small-matrix exponentials and circle Fourier reduction.

Two interchangeable backends:

* ``numba`` (default when importable): ``@njit``-compiled loops, strictly
  ascending accumulation order.
* ``numpy``: vectorized fallback on scipy/numpy primitives.

Set ``MOPUC_NO_NUMBA=1`` to force the numpy path; ``MOPUC_FORCE_NUMBA=1``
makes a numba import failure fatal instead of silent.
``benchmarks/bench_kernels.py`` compares the two.
"""

import os

import numpy as np
import scipy.linalg

_NO_NUMBA = os.environ.get("MOPUC_NO_NUMBA", "").strip() not in ("", "0")
_FORCE_NUMBA = os.environ.get("MOPUC_FORCE_NUMBA", "").strip() not in ("", "0")

_HAVE_NUMBA = False
if not _NO_NUMBA:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _FORCE_NUMBA:
            raise


def backend():
    """Name of the active kernel backend, 'numba' or 'numpy'."""
    return "numba" if _HAVE_NUMBA else "numpy"


# Pade(13) scaling-and-squaring constants (Higham 2005).
_PADE13_B = np.array(
    [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ]
)
_THETA13 = 5.371920351148152


def _expm_batch_numpy(a):
    return scipy.linalg.expm(a)


def _fourier_reduce_numpy(values, js):
    m = values.shape[0]
    phase = np.exp(-2j * np.pi * np.outer(js, np.arange(m)) / m)
    return np.einsum("jm,mab->jab", phase, values) / m


if _HAVE_NUMBA:

    @njit(cache=True)
    def _expm_one(a, b, theta):  # pragma: no cover - compiled
        n = a.shape[0]
        eye = np.eye(n, dtype=np.complex128)
        nrm = 0.0
        for j in range(n):
            col = 0.0
            for i in range(n):
                col += abs(a[i, j])
            if col > nrm:
                nrm = col
        s = 0
        if nrm > theta:
            s = int(np.ceil(np.log2(nrm / theta)))
        a = a.copy() / (2.0**s)
        a2 = a @ a
        a4 = a2 @ a2
        a6 = a2 @ a4
        u = a @ (
            a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
            + b[7] * a6
            + b[5] * a4
            + b[3] * a2
            + b[1] * eye
        )
        v = (
            a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
            + b[6] * a6
            + b[4] * a4
            + b[2] * a2
            + b[0] * eye
        )
        r = np.linalg.solve(v - u, v + u)
        for _ in range(s):
            r = r @ r
        return r

    @njit(cache=True)
    def _expm_batch_numba(a, b, theta):  # pragma: no cover - compiled
        out = np.empty_like(a)
        for k in range(a.shape[0]):
            out[k] = _expm_one(a[k].copy(), b, theta)
        return out

    @njit(cache=True)
    def _fourier_reduce_numba(values, js):  # pragma: no cover - compiled
        m, n, _ = values.shape
        out = np.zeros((js.shape[0], n, n), dtype=np.complex128)
        for jj in range(js.shape[0]):
            w = np.exp(-2j * np.pi * js[jj] / m)
            ph = 1.0 + 0.0j
            acc = np.zeros((n, n), dtype=np.complex128)
            for k in range(m):  # fixed ascending order for reproducibility
                acc += ph * values[k]
                ph *= w
            out[jj] = acc / m
        return out


def expm_batch(a):
    """exp(a[k]) for a stack of square complex matrices, shape (M, N, N)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim == 2:
        a = a[None]
    if _HAVE_NUMBA:
        return _expm_batch_numba(a, _PADE13_B, _THETA13)
    return _expm_batch_numpy(a)


def fourier_reduce(values, js):
    """Uniform-node circle quadrature of Fourier blocks.

    Returns (1/M) * sum_m values[m] * exp(-2*pi*1j*j*m/M) for each j in js;
    with values[m] = w(exp(2*pi*1j*m/M)) this approximates the moment blocks.
    """
    values = np.ascontiguousarray(values, dtype=np.complex128)
    js = np.asarray(js, dtype=np.int64)
    if _HAVE_NUMBA:
        return _fourier_reduce_numba(values, js)
    return _fourier_reduce_numpy(values, js)
