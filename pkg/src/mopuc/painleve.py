"""Second-order nonlinear difference systems for the reflection matrices.

Weights whose right logarithmic derivative spans three consecutive powers of z
with 1/z among them force the reflection-matrix lattice onto one of two
difference systems: a simple-pole ("fuchsian") variant driven by
(W_{-1}, W_0, W_1) and a double-pole ("nonfuchsian") variant driven by
(W_{-2}, W_{-1}, W_0).  Both carry cubic local terms plus a commutator against
the running lattice sum S_n = sum_{m<=n} aL1[m] aR2d[m-1], which is what makes
them nonlocal in general.  This module evaluates the residuals of both systems
on a given lattice, propagates them forward as difference equations, and
houses the linear reductions with their closed-form product solutions plus the
scalar special case.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ResonanceError, SingularCoefficientError
from .szego import VerblunskyLattice
from .util import eye, fro, rel

SINGULAR_RCOND = 1e-12


@dataclass(frozen=True, eq=False)
class DPIICoefficients:
    """Driving coefficients, lowest power first.

    variant 'fuchsian':    W(z) = w_lo/z   + w_mid   + w_hi*z
    variant 'nonfuchsian': W(z) = w_lo/z^2 + w_mid/z + w_hi
    The outer coefficient (w_hi) multiplies the cubic terms in both systems.
    """

    variant: str
    w_lo: np.ndarray
    w_mid: np.ndarray
    w_hi: np.ndarray

    def __post_init__(self):
        if self.variant not in ("fuchsian", "nonfuchsian"):
            raise ValueError("variant must be 'fuchsian' or 'nonfuchsian'")
        for name in ("w_lo", "w_mid", "w_hi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))

    @property
    def n_dim(self):
        return self.w_lo.shape[0]


def coefficients_from_pearson(pearson) -> DPIICoefficients:
    """Read the variant off a Pearson spec whose exponents fit one window."""
    from .errors import SpecMismatchError

    lo, hi = pearson.min_exponent, pearson.max_exponent
    nd = pearson.n_dim
    zero = np.zeros((nd, nd), dtype=complex)

    def coeff(k):
        return pearson.coeffs.get(k, zero).copy()

    if lo >= -1 and hi <= 1:
        return DPIICoefficients("fuchsian", coeff(-1), coeff(0), coeff(1))
    if lo >= -2 and hi <= 0:
        return DPIICoefficients("nonfuchsian", coeff(-2), coeff(-1), coeff(0))
    raise SpecMismatchError(
        f"Pearson exponents [{lo}, {hi}] fit neither the simple-pole window "
        "[-1, 1] nor the double-pole window [-2, 0]"
    )


@dataclass
class DPIIState:
    """Rolling state of the difference system at index n.

    s_sum carries S_{n-1} = sum_{m=1}^{n-1} aL1[m] aR2d[m-1]; the convention
    entries at index 0 are the identity, so the state at n = 1 holds
    aL1_prev = aR2d_prev = I and an empty sum.
    """

    n: int
    aL1_prev: np.ndarray
    aL1_cur: np.ndarray
    aR2d_prev: np.ndarray
    aR2d_cur: np.ndarray
    s_sum: np.ndarray

    @classmethod
    def initial(cls, aL1_1, aR2d_1):
        aL1_1 = np.asarray(aL1_1, dtype=complex)
        nd = aL1_1.shape[0]
        return cls(
            1,
            eye(nd),
            aL1_1,
            eye(nd),
            np.asarray(aR2d_1, dtype=complex),
            np.zeros((nd, nd), dtype=complex),
        )

    @classmethod
    def from_lattice(cls, lattice: VerblunskyLattice, n: int):
        s = np.zeros((lattice.n_dim, lattice.n_dim), dtype=complex)
        for m in range(1, n):
            s = s + lattice.aL1[m] @ lattice.aR2d[m - 1]
        return cls(
            n,
            lattice.aL1[n - 1].copy(),
            lattice.aL1[n].copy(),
            lattice.aR2d[n - 1].copy(),
            lattice.aR2d[n].copy(),
            s,
        )


def _comm(a, b):
    return a @ b - b @ a


def _lattice_window(lattice, n):
    s_prev = np.zeros((lattice.n_dim, lattice.n_dim), dtype=complex)
    for m in range(1, n):
        s_prev = s_prev + lattice.aL1[m] @ lattice.aR2d[m - 1]
    s_next = s_prev + lattice.aL1[n] @ lattice.aR2d[n - 1] + lattice.aL1[n + 1] @ lattice.aR2d[n]
    return s_prev, s_next


def _residual_pair(a_m1, a_0, a_p1, r_m1, r_0, r_p1, s_prev, s_next, lin_cur, lin_next, w_mid_like,
                   w_outer):
    """Shared skeleton of both systems.

    lin_cur multiplies the current site in equation 1 on the left /
    equation 2 on the right; lin_next is the coefficient of the (n+1)-st
    reflection on the left of eq 1 / right of eq 2 (resonance factor).
    """
    lhs1 = w_mid_like @ a_0 + w_outer @ a_p1 - a_m1 @ lin_cur
    rhs1 = w_outer @ (a_p1 @ r_0 @ a_0 + a_0 @ r_m1 @ a_0) + _comm(w_outer, s_prev) @ a_0
    eq1 = lhs1 - rhs1
    lhs2 = r_0 @ w_mid_like + r_m1 @ w_outer - lin_next @ r_p1
    rhs2 = (r_0 @ a_0 @ r_m1 + r_0 @ a_p1 @ r_0) @ w_outer + r_0 @ _comm(w_outer, s_next)
    eq2 = lhs2 - rhs2
    return eq1, eq2


def fuchsian_residual(lattice: VerblunskyLattice, coeffs: DPIICoefficients, n: int):
    """LHS - RHS of the two simple-pole difference equations at site n.

    Eq 1: W0 a_n + W1 a_{n+1} - a_{n-1}(W_{-1} - (n-1) I)
          = W1 (a_{n+1} r_n a_n + a_n r_{n-1} a_n) + [W1, S_{n-1}] a_n
    Eq 2: r_n W0 + r_{n-1} W1 - (W_{-1} - (n+1) I) r_{n+1}
          = (r_n a_n r_{n-1} + r_n a_{n+1} r_n) W1 + r_n [W1, S_{n+1}]
    with a = aL1, r = aR2d.
    """
    i_n = eye(coeffs.n_dim)
    s_prev, s_next = _lattice_window(lattice, n)
    return _residual_pair(
        lattice.aL1[n - 1],
        lattice.aL1[n],
        lattice.aL1[n + 1],
        lattice.aR2d[n - 1],
        lattice.aR2d[n],
        lattice.aR2d[n + 1],
        s_prev,
        s_next,
        coeffs.w_lo - (n - 1) * i_n,
        coeffs.w_lo - (n + 1) * i_n,
        coeffs.w_mid,
        coeffs.w_hi,
    )


def nonfuchsian_residual(lattice: VerblunskyLattice, coeffs: DPIICoefficients, n: int):
    """LHS - RHS of the two double-pole difference equations at site n.

    Eq 1: (W_{-1} + n I) a_n + W0 a_{n+1} - a_{n-1} W_{-2}
          = W0 (a_{n+1} r_n a_n + a_n r_{n-1} a_n) + [W0, S_{n-1}] a_n
    Eq 2: r_n (W_{-1} + n I) + r_{n-1} W0 - W_{-2} r_{n+1}
          = (r_n a_n r_{n-1} + r_n a_{n+1} r_n) W0 + r_n [W0, S_{n+1}]
    """
    i_n = eye(coeffs.n_dim)
    s_prev, s_next = _lattice_window(lattice, n)
    return _residual_pair(
        lattice.aL1[n - 1],
        lattice.aL1[n],
        lattice.aL1[n + 1],
        lattice.aR2d[n - 1],
        lattice.aR2d[n],
        lattice.aR2d[n + 1],
        s_prev,
        s_next,
        coeffs.w_lo,
        coeffs.w_lo,
        coeffs.w_mid + n * i_n,
        coeffs.w_hi,
    )


def local_residual(lattice: VerblunskyLattice, coeffs: DPIICoefficients, n: int):
    """Residuals of the local variant (nonlocal commutator terms dropped)."""
    nd = coeffs.n_dim
    zero = np.zeros((nd, nd), dtype=complex)
    i_n = eye(nd)
    if coeffs.variant == "fuchsian":
        lin_cur = coeffs.w_lo - (n - 1) * i_n
        lin_next = coeffs.w_lo - (n + 1) * i_n
        w_mid_like = coeffs.w_mid
    else:
        lin_cur = coeffs.w_lo
        lin_next = coeffs.w_lo
        w_mid_like = coeffs.w_mid + n * i_n
    return _residual_pair(
        lattice.aL1[n - 1],
        lattice.aL1[n],
        lattice.aL1[n + 1],
        lattice.aR2d[n - 1],
        lattice.aR2d[n],
        lattice.aR2d[n + 1],
        zero,
        zero,
        lin_cur,
        lin_next,
        w_mid_like,
        coeffs.w_hi,
    )


def _checked_solve(a, b, exc, what):
    cond_ok = np.all(np.isfinite(a)) and 1.0 / max(np.linalg.cond(a), 1.0) > SINGULAR_RCOND
    if not cond_ok:
        raise exc(f"{what} is numerically singular")
    return np.linalg.solve(a, b)


def _step(state: DPIIState, coeffs: DPIICoefficients, lin_cur, lin_mid, lin_next, exc_next,
          what_next):
    """Advance one site: solve eq 1 for aL1[n+1], extend the sum, solve eq 2.

    lin_cur is the right factor of a_{n-1} in eq 1, lin_mid the coefficient of
    a_n, lin_next the factor in front of r_{n+1} in eq 2.
    """
    i_n = eye(coeffs.n_dim)
    w_hi = coeffs.w_hi
    rhs = (
        state.aL1_prev @ lin_cur
        - lin_mid @ state.aL1_cur
        + w_hi @ state.aL1_cur @ state.aR2d_prev @ state.aL1_cur
        + _comm(w_hi, state.s_sum) @ state.aL1_cur
    )
    cofactor = i_n - state.aR2d_cur @ state.aL1_cur
    pre = _checked_solve(w_hi, rhs, SingularCoefficientError, "outer coefficient")
    # right division by the cofactor
    a_next = _checked_solve(
        cofactor.T, pre.T, SingularCoefficientError, "reflection cofactor I - r a"
    ).T
    s_mid = state.s_sum + state.aL1_cur @ state.aR2d_prev  # S_n
    s_next = s_mid + a_next @ state.aR2d_cur  # S_{n+1}
    rhs2 = (
        state.aR2d_cur @ lin_mid
        + state.aR2d_prev @ w_hi
        - (state.aR2d_cur @ state.aL1_cur @ state.aR2d_prev
           + state.aR2d_cur @ a_next @ state.aR2d_cur) @ w_hi
        - state.aR2d_cur @ _comm(w_hi, s_next)
    )
    r_next = _checked_solve(lin_next, rhs2, exc_next, what_next)
    return DPIIState(state.n + 1, state.aL1_cur, a_next, state.aR2d_cur, r_next, s_mid)


def fuchsian_step(state: DPIIState, coeffs: DPIICoefficients) -> DPIIState:
    """One forward step of the simple-pole system.

    Needs invertible W1 and W_{-1} - (n+1) I; integer spectra of W_{-1} hit
    resonances at the matching index and raise ResonanceError.
    """
    n = state.n
    i_n = eye(coeffs.n_dim)
    return _step(
        state,
        coeffs,
        coeffs.w_lo - (n - 1) * i_n,
        coeffs.w_mid,
        coeffs.w_lo - (n + 1) * i_n,
        ResonanceError,
        f"W_-1 - {n + 1} I (integer eigenvalue hit)",
    )


def nonfuchsian_step(state: DPIIState, coeffs: DPIICoefficients) -> DPIIState:
    """One forward step of the double-pole system (requires invertible W0 and W_{-2})."""
    n = state.n
    i_n = eye(coeffs.n_dim)
    return _step(
        state,
        coeffs,
        coeffs.w_lo,
        coeffs.w_mid + n * i_n,
        coeffs.w_lo,
        SingularCoefficientError,
        "W_-2",
    )


def propagate(state: DPIIState, coeffs: DPIICoefficients, n_target: int):
    """Run the matching step function up to index n_target; returns all states."""
    step = fuchsian_step if coeffs.variant == "fuchsian" else nonfuchsian_step
    states = [state]
    while states[-1].n < n_target:
        states.append(step(states[-1], coeffs))
    return states


def linear_fuchsian_solution(aL1_1, aR2d_1, w_lo, w_mid, n):
    """Closed-form products for the W1 = 0 reduction.

    aL1[n]  = W0^{1-n} aL1[1] (W_{-1} - I) ... (W_{-1} - (n-1) I)
    aR2d[n] = (W_{-1} - n I)^{-1} ... (W_{-1} - 2 I)^{-1} aR2d[1] W0^{n-1}
    The compatible initial data satisfy aR2d[1] aL1[1] = W_{-1} (W_{-1}-I)^{-1}
    (reported by constraint_gap_fuchsian, never enforced here).
    """
    aL1_1 = np.asarray(aL1_1, dtype=complex)
    aR2d_1 = np.asarray(aR2d_1, dtype=complex)
    w_lo = np.asarray(w_lo, dtype=complex)
    w_mid = np.asarray(w_mid, dtype=complex)
    nd = aL1_1.shape[0]
    i_n = eye(nd)
    a = aL1_1.copy()
    r = aR2d_1.copy()
    for m in range(2, n + 1):
        a = _checked_solve(w_mid, a, SingularCoefficientError, "W0") @ (w_lo - (m - 1) * i_n)
        r = _checked_solve(w_lo - m * i_n, r, ResonanceError, f"W_-1 - {m} I") @ w_mid
    return a, r


def constraint_gap_fuchsian(aL1_1, aR2d_1, w_lo) -> float:
    """Norm gap of the initial-data constraint of the W1 = 0 reduction."""
    w_lo = np.asarray(w_lo, dtype=complex)
    i_n = eye(w_lo.shape[0])
    target = w_lo @ np.linalg.inv(w_lo - i_n)
    return fro(np.asarray(aR2d_1) @ np.asarray(aL1_1) - target)


def linear_nonfuchsian_solution(aL1_1, aR2d_1, w_lo, w_mid, n):
    """Closed-form products for the W0 = 0 reduction.

    aL1[n]  = (W_{-1} + n I)^{-1} ... (W_{-1} + 2 I)^{-1} aL1[1] W_{-2}^{n-1}
    aR2d[n] = W_{-2}^{1-n} aR2d[1] (W_{-1} + I) ... (W_{-1} + (n-1) I)
    """
    aL1_1 = np.asarray(aL1_1, dtype=complex)
    aR2d_1 = np.asarray(aR2d_1, dtype=complex)
    w_lo = np.asarray(w_lo, dtype=complex)
    w_mid = np.asarray(w_mid, dtype=complex)
    i_n = eye(aL1_1.shape[0])
    a = aL1_1.copy()
    r = aR2d_1.copy()
    for m in range(2, n + 1):
        a = _checked_solve(w_mid + m * i_n, a, ResonanceError, f"W_-1 + {m} I") @ w_lo
        r = _checked_solve(w_lo, r, SingularCoefficientError, "W_-2") @ (w_mid + (m - 1) * i_n)
    return a, r


def linear_nonfuchsian_identity_residual(aL1_1, aR2d_1, w_lo, w_mid, n_max) -> float:
    """Residual of the redundant fourth relation on the closed-form solution:

    r_{n-1} a_n = -W_{-2} r_n a_n + r_{n-1} a_{n-1} W_{-2}.
    """
    worst = 0.0
    for n in range(2, n_max + 1):
        a_n, r_n = linear_nonfuchsian_solution(aL1_1, aR2d_1, w_lo, w_mid, n)
        a_prev, r_prev = linear_nonfuchsian_solution(aL1_1, aR2d_1, w_lo, w_mid, n - 1)
        w2 = np.asarray(w_lo, dtype=complex)
        res = r_prev @ a_n + w2 @ r_n @ a_n - r_prev @ a_prev @ w2
        worst = max(worst, fro(res))
    return worst


def auxiliary_residuals(lattice: VerblunskyLattice, coeffs: DPIICoefficients, n: int):
    """LHS - RHS of the first and fourth expansion-coefficient relations.

    These are the two relations of the four-relation system whose discrete
    n-derivatives (not the relations themselves) follow from the difference
    equations; on a moment-derived lattice both vanish, and on any lattice
    satisfying the difference equations they are constant in n.  Uses the
    reflection parametrization of the expansion blocks a, b, c, d, a2.
    """
    from .cauchy_rhp import x_coefficients

    nd = lattice.n_dim
    i_n = eye(nd)
    xc = x_coefficients(lattice, n) if n + 2 <= lattice.n_max else None
    if xc is None:
        raise ValueError("auxiliary_residuals needs lattice depth n + 2")
    a_n = xc.X1[:nd, :nd]
    b_n = xc.X1[:nd, nd:]
    c_n = xc.X1[nd:, :nd]
    d_n = xc.X1[nd:, nd:]
    a2_n = xc.X2[:nd, :nd]
    w_outer = coeffs.w_hi
    hr_prev_inv = np.linalg.inv(lattice.hR[n - 1])
    if coeffs.variant == "nonfuchsian":
        lead = coeffs.w_lo  # W_{-2}
        w_m1 = coeffs.w_mid
        r1 = (
            -a_n
            + lead
            + _comm(a_n, w_m1)
            + _comm(a2_n, w_outer)
            + w_outer @ (a_n @ a_n + b_n @ c_n)
            - a_n @ w_outer @ a_n
            - lattice.aL1[n] @ lead @ lattice.aR2d[n]
        )
        r4 = -d_n - c_n @ w_outer @ b_n - hr_prev_inv @ lead @ lattice.hR[n]
    else:
        lead = coeffs.w_lo - n * i_n  # W_{-1} - n I
        r1 = (
            coeffs.w_lo
            + _comm(a_n, coeffs.w_mid)
            + _comm(a2_n, w_outer)
            + w_outer @ (a_n @ a_n + b_n @ c_n)
            - a_n @ w_outer @ a_n
            - lattice.aL1[n] @ lead @ lattice.aR2d[n]
        )
        r4 = -n * i_n - c_n @ w_outer @ b_n - hr_prev_inv @ lead @ lattice.hR[n]
    return r1, r4


def scalar_dpii_residual(alpha, k, n) -> complex:
    """n a_n / (1 - a_n^2) + k (a_{n+1} + a_{n-1}) for a scalar sequence with a_0 = 1."""
    from .errors import DomainError

    a_n = complex(alpha[n])
    if abs(1.0 - a_n * a_n) < 1e-15:
        raise DomainError(f"alpha_{n}^2 = 1: scalar system has a pole here")
    return n * a_n / (1.0 - a_n * a_n) + k * (complex(alpha[n + 1]) + complex(alpha[n - 1]))


@dataclass(frozen=True)
class LocalityReport:
    local: bool
    reasons: tuple


def locality_check(coeffs: DPIICoefficients,
                   weight_sample: Optional[np.ndarray] = None) -> LocalityReport:
    """Decide whether the nonlocal commutator terms provably vanish.

    Local when the outer coefficient commutes with the other two AND with a
    weight sample w(z0) (the successive-approximation argument then pushes the
    commutativity to every reflection matrix).  A scalar multiple of the
    identity is local outright.
    """
    outer = coeffs.w_hi
    nd = coeffs.n_dim
    reasons = []
    tol = 1e-12 * (1.0 + fro(outer))
    if fro(outer - outer[0, 0] * eye(nd)) <= tol:
        return LocalityReport(True, ("outer coefficient is a scalar multiple of the identity",))
    ok = True
    for name, other in (("lowest", coeffs.w_lo), ("middle", coeffs.w_mid)):
        gap = fro(_comm(outer, other))
        if gap > tol * (1.0 + fro(other)):
            ok = False
            reasons.append(f"[outer, {name}] norm {gap:.3e}")
        else:
            reasons.append(f"[outer, {name}] = 0")
    if weight_sample is None:
        ok = False
        reasons.append("no weight sample supplied; commutation with w(z0) unverified")
    else:
        gap = fro(_comm(outer, np.asarray(weight_sample, dtype=complex)))
        if gap > tol * (1.0 + fro(weight_sample)):
            ok = False
            reasons.append(f"[outer, w(z0)] norm {gap:.3e}")
        else:
            reasons.append("[outer, w(z0)] = 0")
    return LocalityReport(ok, tuple(reasons))
