"""Matrix weights on the unit circle and their right logarithmic derivatives.

A weight is an N x N matrix function w(z), analytic on the punctured plane,
given in one of four representations:

* ``fourier``     -- finite Laurent table  w(z) = sum_j B_j z^j
* ``freud``       -- ordered product of exponentials of Laurent polynomials
* ``pearson``     -- fundamental solution of  dw/dz = W(z) w  from a base point
* ``fuchsian_n2`` -- 2x2 prefactor times an entire Taylor series (resonant
                     simple-pole construction, k = 1, 2, 3)

The right logarithmic derivative W(z) = w'(z) w(z)^{-1}, when known, travels
with the weight as a :class:`PearsonSpec` so downstream code can classify the
singularity at the origin and pick the matching difference system.
"""

import weakref
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import logsumexp

from . import _kernels
from .errors import (
    ConstraintError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    InvalidSpecError,
)
from .util import as_matrix, eye, fro

ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
THETA_TOL = 1e-12

_PHI_CACHE = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class PearsonSpec:
    """Laurent coefficients of W(z) plus one anchor value of the weight."""

    n_dim: int
    coeffs: dict  # exponent k -> N x N matrix W_k
    base_point: complex = 1.0 + 0.0j
    base_value: Optional[np.ndarray] = None

    def __post_init__(self):
        coeffs = {int(k): as_matrix(v, self.n_dim) for k, v in self.coeffs.items()}
        coeffs = {k: v for k, v in coeffs.items() if fro(v) > 0.0}
        if not coeffs:
            raise InvalidSpecError("all Pearson coefficients vanish")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "base_point", complex(self.base_point))
        if self.base_point == 0:
            raise InvalidSpecError("base point must avoid the singularity at 0")
        bv = eye(self.n_dim) if self.base_value is None else as_matrix(self.base_value, self.n_dim)
        if not np.isfinite(np.linalg.cond(bv)):
            raise InvalidSpecError("base value must be nonsingular")
        object.__setattr__(self, "base_value", bv)

    @property
    def min_exponent(self):
        return min(self.coeffs)

    @property
    def max_exponent(self):
        return max(self.coeffs)

    def eval(self, z):
        """W(z) as a matrix."""
        z = complex(z)
        if z == 0:
            raise DomainError("W(z) undefined at z = 0")
        out = np.zeros((self.n_dim, self.n_dim), dtype=complex)
        for k, w_k in self.coeffs.items():
            out += w_k * z**k
        return out


@dataclass(frozen=True)
class SingularityClass:
    """Local type of W(z) at the origin and the degree-shifted leading matrix."""

    kind: str  # 'ordinary' | 'fuchsian' | 'nonfuchsian'
    rank: int  # pole order of W at 0
    n_dim: int
    w_minus: Optional[tuple] = None  # leading singular coefficient, as nested tuples

    def leading_matrix(self, n):
        """W_n^[0]: -nI (ordinary), W_{-1} - nI (fuchsian), W_{-r} (non-fuchsian)."""
        if self.kind == "ordinary":
            return -n * eye(self.n_dim)
        w = np.array(self.w_minus, dtype=complex)
        if self.kind == "fuchsian":
            return w - n * eye(self.n_dim)
        return w

    @property
    def pole_order(self):
        """Pole order at 0 of the derived linear system's coefficient matrix."""
        return self.rank if self.kind == "nonfuchsian" else 1


def classify(spec: PearsonSpec) -> SingularityClass:
    """Classify the singularity of W at 0 from its lowest nonzero exponent."""
    low = spec.min_exponent
    if low >= 0:
        return SingularityClass("ordinary", 0, spec.n_dim)
    w = tuple(tuple(row) for row in spec.coeffs[low])
    if low == -1:
        return SingularityClass("fuchsian", 1, spec.n_dim, w)
    return SingularityClass("nonfuchsian", -low, spec.n_dim, w)


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """One matrix weight in any of the four supported representations."""

    kind: str
    n_dim: int
    fourier: Optional[dict] = None          # j -> block
    freud_factors: Optional[tuple] = None   # tuple of {exponent: matrix} Laurent polys
    pearson: Optional[PearsonSpec] = None   # defining (kind='pearson') or attached
    prefactor: Optional[dict] = None        # fuchsian_n2: {'p', 'k', 'c0', 'theta2'}
    phi: Optional[tuple] = None             # fuchsian_n2 Taylor coefficients Phi_1..Phi_M
    phi_window: Optional[tuple] = None      # sheared coefficient window, for extension

    def __post_init__(self):
        if self.kind not in ("fourier", "freud", "pearson", "fuchsian_n2"):
            raise InvalidSpecError(f"unknown weight kind {self.kind!r}")
        if self.kind == "fourier" and not self.fourier:
            raise InvalidSpecError("fourier weight needs a nonempty block table")
        if self.kind == "freud" and not self.freud_factors:
            raise InvalidSpecError("freud weight needs at least one factor")
        if self.kind == "pearson" and self.pearson is None:
            raise InvalidSpecError("pearson weight needs a PearsonSpec")
        if self.kind == "fuchsian_n2" and (self.prefactor is None or self.phi is None):
            raise InvalidSpecError("fuchsian_n2 weight needs prefactor and series data")


def _laurent_eval_many(table, zs, n_dim):
    out = np.zeros((len(zs), n_dim, n_dim), dtype=complex)
    for k, c in table.items():
        out += np.multiply.outer(zs**k, np.asarray(c, dtype=complex))
    return out


def _freud_values(spec, zs):
    vals = None
    for factor in spec.freud_factors:
        e = _kernels.expm_batch(_laurent_eval_many(factor, zs, spec.n_dim))
        vals = e if vals is None else vals @ e
    return vals


def _integrate_path(spec, w0, path, dpath, t1, dense=False):
    n = spec.n_dim

    def rhs(t, y):
        z = path(t)
        return (dpath(t) * (spec.eval(z) @ y.reshape(n, n))).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, t1),
        np.asarray(w0, dtype=complex).ravel(),
        method="RK45",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        dense_output=dense,
    )
    if not sol.success:
        raise IntegrationError(f"Pearson ODE integration failed: {sol.message}")
    return sol


def _pearson_to_radius(spec, r):
    """Weight at r * exp(i*arg(z0)), integrating radially from the base point."""
    z0 = spec.base_point
    u = z0 / abs(z0)
    a, b = abs(z0), float(r)
    if abs(b - a) < 1e-15:
        return spec.base_value.copy()
    sol = _integrate_path(spec, spec.base_value, lambda t: u * (a + t * (b - a)), lambda t: u * (b - a), 1.0)
    return sol.y[:, -1].reshape(spec.n_dim, spec.n_dim)


def pearson_circle_solution(spec: PearsonSpec, r: float):
    """Dense ODE solution of w along the full circle |z| = r, starting at arg(z0).

    Returns (theta0, sol); sol.sol(t) is w at r*exp(1j*(theta0+t)), t in [0, 2pi].
    """
    w_r = _pearson_to_radius(spec, r)
    theta0 = float(np.angle(spec.base_point))
    sol = _integrate_path(
        spec,
        w_r,
        lambda t: r * np.exp(1j * (theta0 + t)),
        lambda t: 1j * r * np.exp(1j * (theta0 + t)),
        2.0 * np.pi,
        dense=True,
    )
    return theta0, sol


def _pearson_values_on_circle(spec, zs):
    r = float(np.abs(zs[0]))
    theta0, sol = pearson_circle_solution(spec, r)
    ts = np.mod(np.angle(zs) - theta0, 2.0 * np.pi)
    n = spec.n_dim
    return sol.sol(ts).reshape(n, n, len(zs)).transpose(2, 0, 1)


def eval_weight_many(spec: WeightSpec, zs) -> np.ndarray:
    """Evaluate the weight at many points (stacked (M, N, N) result)."""
    zs = np.asarray(zs, dtype=complex).ravel()
    if np.any(zs == 0):
        raise DomainError("weight undefined at z = 0")
    if spec.kind == "fourier":
        return _laurent_eval_many(spec.fourier, zs, spec.n_dim)
    if spec.kind == "freud":
        return _freud_values(spec, zs)
    if spec.kind == "fuchsian_n2":
        return _fuchsian_values(spec, zs)
    radii = np.abs(zs)
    if np.ptp(radii) < 1e-12 * radii.max() and len(zs) > 1:
        return _pearson_values_on_circle(spec.pearson, zs)
    return np.stack([_pearson_single(spec.pearson, z) for z in zs])


def _pearson_single(ps, z):
    w_r = _pearson_to_radius(ps, abs(z))
    th0 = float(np.angle(ps.base_point))
    dth = float(np.mod(np.angle(z) - th0, 2.0 * np.pi))
    if dth < 1e-15:
        return w_r
    r = abs(z)
    sol = _integrate_path(
        ps, w_r, lambda t: r * np.exp(1j * (th0 + t)), lambda t: 1j * r * np.exp(1j * (th0 + t)), dth
    )
    return sol.y[:, -1].reshape(ps.n_dim, ps.n_dim)


def eval_weight(spec: WeightSpec, z) -> np.ndarray:
    """Evaluate the weight at a single nonzero point."""
    return eval_weight_many(spec, np.array([complex(z)]))[0]


def monodromy_defect(spec: PearsonSpec) -> float:
    """Relative gap between w(z0) and its continuation once around the circle.

    Near zero certifies a single-valued weight (trivial monodromy).
    """
    r = abs(spec.base_point)
    th0 = float(np.angle(spec.base_point))
    sol = _integrate_path(
        spec,
        spec.base_value,
        lambda t: r * np.exp(1j * (th0 + t)),
        lambda t: 1j * r * np.exp(1j * (th0 + t)),
        2.0 * np.pi,
    )
    w_loop = sol.y[:, -1].reshape(spec.n_dim, spec.n_dim)
    return fro(w_loop - spec.base_value) / fro(spec.base_value)


def _ad(a, b):
    return a @ b - b @ a


def freud_log_derivative(v_list, z, tol=1e-14, max_terms=80):
    """Right logarithmic derivative of an ordered product of exp(V_i(z)).

    Per factor, d(e^V)/dz e^{-V} = sum_j ad_V^j(V') / (j+1)!; the product rule
    then gives W = D_1 + Ad_{E_1}(D_2) + Ad_{E_1 E_2}(D_3) + ...  Terms are
    summed until one drops below tol relative to the accumulated value.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("log-derivative undefined at z = 0")
    v_list = tuple(v_list)
    n_dim = np.asarray(next(iter(v_list[0].values()))).shape[0]

    def factor_series(vtab):
        v = np.zeros((n_dim, n_dim), dtype=complex)
        dv = np.zeros((n_dim, n_dim), dtype=complex)
        for k, c in vtab.items():
            c = np.asarray(c, dtype=complex)
            v += c * z**k
            dv += c * (k * z ** (k - 1))
        term = dv.copy()
        total = term.copy()
        for j in range(1, max_terms + 1):
            term = _ad(v, term) / (j + 1)
            total += term
            if fro(term) < tol * (1.0 + fro(total)):
                return v, total
        raise ConvergenceError(f"ad-series did not converge in {max_terms} terms")

    prefix = eye(n_dim)
    out = np.zeros((n_dim, n_dim), dtype=complex)
    for i, vtab in enumerate(v_list):
        v, d = factor_series(vtab)
        out += prefix @ d @ np.linalg.inv(prefix)
        if i + 1 < len(v_list):
            prefix = prefix @ _kernels.expm_batch(v[None])[0]
    return out


def phi_series(w_window, order):
    """Taylor coefficients Phi_1..Phi_order of the entire factor of a sheared system.

    w_window lists W_0^(m)..W_K^(m); the recursion is
    m * Phi_m = sum_i W_i^(m) Phi_{m-1-i} with Phi_0 = I.
    """
    if order < 1:
        raise InvalidSpecError("series order must be >= 1")
    w_window = [np.asarray(w, dtype=complex) for w in w_window]
    return _phi_extend(w_window, [eye(w_window[0].shape[0])], order)


def _phi_extend(window, full, extra):
    """Append `extra` coefficients to `full` = [Phi_0, ..]; returns the new ones."""
    start = len(full)
    for m in range(start, start + extra):
        acc = np.zeros_like(full[0])
        for i, w_i in enumerate(window):
            if m - 1 - i >= 0:
                acc += w_i @ full[m - 1 - i]
        full.append(acc / m)
    return full[start:]


def _phi_coeffs_for_radius(spec, radius):
    """Series coefficients long enough for `radius`, by the doubling rule.

    Doubles the order until the last coefficient's contribution is below 1e-14
    and consecutive majorant partial sums agree to 1e-12.
    """
    full = _PHI_CACHE.get(spec)
    if full is None:
        full = [eye(2)] + [np.asarray(c, dtype=complex) for c in spec.phi]
        _PHI_CACHE[spec] = full
    window = [np.asarray(w, dtype=complex) for w in spec.phi_window]
    r = max(float(radius), 1.0)
    log_r = np.log(r)
    while True:
        n = len(full)
        with np.errstate(divide="ignore"):
            logs = np.array([np.log(fro(c)) + m * log_r for m, c in enumerate(full)])
        log_total = logsumexp(logs)
        # relative tail rule (log domain: large radii overflow the raw majorant);
        # the half-to-full gap doubles as the "last two partial sums" test
        if (
            n >= 8
            and logs[-1] - log_total < np.log(1e-14)
            and logsumexp(logs[n // 2 :]) - log_total < np.log(1e-12)
        ):
            return full
        if n > 4096:
            raise ConvergenceError("fuchsian series did not satisfy the tail rule")
        _phi_extend(window, full, n)


def _fuchsian_values(spec, zs):
    full = _phi_coeffs_for_radius(spec, np.max(np.abs(zs)))
    vals = np.zeros((len(zs), 2, 2), dtype=complex)
    for c in reversed(full):
        vals = vals * zs[:, None, None] + c
    p = int(spec.prefactor["p"])
    k = int(spec.prefactor["k"])
    shifts = [complex(t) for t in spec.prefactor["shifts"]]
    pre = np.zeros((len(zs), 2, 2), dtype=complex)
    pre[:, 0, 0] = zs**p
    pre[:, 1, 1] = zs ** (p + k)
    for j, t in enumerate(shifts, start=1):
        pre[:, 1, 0] -= t * zs ** (p + j)
    return pre @ vals


def _shear_down(window):
    """diag(1, 1/z) conjugation plus derivative term, for a diagonal residue.

    Returns (new_lower_left_of_residue, new_window): the (2,1) entries drop one
    power (the constant one lands in the residue), the (1,2) entries gain one.
    """
    lifted = window + [np.zeros((2, 2), dtype=complex)]
    out = []
    for i, m in enumerate(lifted):
        nm = np.zeros((2, 2), dtype=complex)
        nm[0, 0] = m[0, 0]
        nm[1, 1] = m[1, 1]
        if i + 1 < len(lifted):
            nm[1, 0] = lifted[i + 1][1, 0]
        if i >= 1:
            nm[0, 1] = lifted[i - 1][0, 1]
        out.append(nm)
    return window[0][1, 0], out


def _conjugate_lower(t, window):
    """T M T^{-1} with T = [[1, 0], [t, 1]] applied to every window coefficient."""
    out = []
    for m in window:
        a, b = m[0, 0], m[0, 1]
        c, d = m[1, 0], m[1, 1]
        out.append(
            np.array([[a - t * b, b], [c + t * (a - d) - t * t * b, d + t * b]], dtype=complex)
        )
    return out


def fuchsian_shear_chain(p, k, params):
    """Run the k-step shear/re-diagonalization chain.

    Each shear diag(1, 1/z) drops the residue's lower level by one and deposits
    the window's constant lower-left entry next to the remaining gap; while the
    gap is positive a T = [[1,0],[lam/gap,1]] conjugation re-diagonalizes.  The
    final deposit (gap zero) cannot be removed: it is the degree-k constraint
    whose vanishing makes the system resonance free.

    Returns (constraint_value, shifts, window): shifts are the conjugation
    parameters t_1..t_{k-1} entering the prefactor's lower-left entry, window
    the k+2 coefficients feeding the Phi recursion.
    """
    a0, b0, c0, d0, a1, b1, c1, d1 = (complex(x) for x in params)
    window = [
        np.array([[a0, b0], [c0, d0]], dtype=complex),
        np.array([[a1, b1], [c1, d1]], dtype=complex),
    ]
    shifts = []
    lam = 0.0 + 0.0j
    for step in range(k):
        lam, window = _shear_down(window)
        gap = k - step - 1
        if gap > 0:
            t = lam / gap
            shifts.append(t)
            window = _conjugate_lower(t, window)
    return lam, shifts, window


def fuchsian_constraint(p, k, params):
    """Residual of the degree-k single-valuedness constraint (0 means on-surface)."""
    lam, _, _ = fuchsian_shear_chain(p, k, params)
    return lam


def fuchsian_weight_n2(p, k, params, order=24):
    """Build the resonant 2x2 simple-pole weight for k in {1, 2, 3}.

    params = (a0, b0, c0, d0, a1, b1, c1, d1) fixes
    W(z) = diag(p, p+k)/z + [[a0 + a1 z, b0 + b1 z], [c0 + c1 z, d0 + d1 z]].
    Raises ConstraintError unless the degree-k hypersurface constraint holds
    (c0 for k=1, c0*(a0-d0)+c1 for k=2, the cubic surface for k=3), which is
    exactly the condition removing the multivalued branch.
    """
    if k not in (1, 2, 3):
        raise InvalidSpecError("only k = 1, 2, 3 supported")
    p = int(p)
    params = tuple(complex(x) for x in params)
    if len(params) != 8:
        raise InvalidSpecError("params must hold the 8 scalars a0..d1")
    scale = 1.0 + max(abs(x) for x in params)
    lam, shifts, window = fuchsian_shear_chain(p, k, params)
    if abs(lam) > THETA_TOL * scale:
        raise ConstraintError(f"k={k} single-valuedness constraint violated", abs(lam))

    a0, b0, c0, d0, a1, b1, c1, d1 = params
    spec = WeightSpec(
        kind="fuchsian_n2",
        n_dim=2,
        prefactor={"p": p, "k": k, "shifts": tuple(shifts)},
        phi=tuple(phi_series(window, order)),
        phi_window=tuple(window),
    )
    pearson = PearsonSpec(
        n_dim=2,
        coeffs={
            -1: np.diag([p, p + k]).astype(complex),
            0: np.array([[a0, b0], [c0, d0]]),
            1: np.array([[a1, b1], [c1, d1]]),
        },
        base_point=1.0,
        base_value=_fuchsian_values(spec, np.array([1.0 + 0.0j]))[0],
    )
    return WeightSpec(
        kind="fuchsian_n2",
        n_dim=2,
        pearson=pearson,
        prefactor=spec.prefactor,
        phi=spec.phi,
        phi_window=spec.phi_window,
    )
