"""Matrix Szego biorthogonal polynomials on the unit circle.

Moment pipelines for matrix weights, boundary-value frame verification, the
degree-step transfer structure, and the two second-order difference systems
satisfied by the reflection-matrix lattice.
"""

from . import catalog, cauchy_rhp, moments, painleve, serialize, szego, transfer, weights
from ._kernels import backend as kernel_backend
from .errors import (
    ConstraintError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    InvalidSpecError,
    MopucError,
    QuasiDefiniteError,
    ResonanceError,
    SingularCoefficientError,
    SpecMismatchError,
)
from .moments import MomentTable, compute_moments, quasi_definiteness, truncated_moment_matrix
from .painleve import (
    DPIICoefficients,
    DPIIState,
    coefficients_from_pearson,
    fuchsian_residual,
    fuchsian_step,
    linear_fuchsian_solution,
    linear_nonfuchsian_solution,
    locality_check,
    nonfuchsian_residual,
    nonfuchsian_step,
    propagate,
    scalar_dpii_residual,
)
from .szego import (
    MatrixPolynomial,
    SzegoFamily,
    VerblunskyLattice,
    check_biorthogonality,
    check_recursions,
    reciprocal,
    solve_all,
    solve_family,
    verblunsky_lattice,
)
from .weights import (
    PearsonSpec,
    SingularityClass,
    WeightSpec,
    classify,
    eval_weight,
    eval_weight_many,
    freud_log_derivative,
    fuchsian_weight_n2,
    monodromy_defect,
    phi_series,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
