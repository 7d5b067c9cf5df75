"""Exception hierarchy shared across the package."""


class MopucError(Exception):
    """Base class for all package errors."""


class DomainError(MopucError):
    """Evaluation requested outside the valid domain (z = 0, near-circle, ...)."""


class InvalidSpecError(MopucError):
    """Weight or Pearson specification violates its invariants."""


class ConstraintError(MopucError):
    """Algebraic constraint violated; carries the residual value."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.6g})")
        self.residual = residual


class IntegrationError(MopucError):
    """ODE integration failed; carries the achieved tolerance if known."""


class ConvergenceError(MopucError):
    """Quadrature or series refinement did not reach tolerance."""


class QuasiDefiniteError(MopucError):
    """Truncated moment matrix numerically singular at some degree."""

    def __init__(self, degree, detail=""):
        msg = f"quasi-definiteness failure at degree {degree}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.degree = degree


class ResonanceError(MopucError):
    """A shifted residue matrix (resonant index) is singular."""


class SingularCoefficientError(MopucError):
    """Propagation requires inverting a singular coefficient; refuse rather than pseudo-invert."""


class SpecMismatchError(MopucError):
    """Weight's Pearson data does not match the requested lattice variant."""
