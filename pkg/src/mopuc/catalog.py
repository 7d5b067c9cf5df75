"""Ready-made weights used across the test-suite and the README examples."""

import numpy as np

from .weights import PearsonSpec, WeightSpec, fuchsian_weight_n2

NILPOTENT_A = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
NILPOTENT_B = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)

FUCHSIAN_PARAMS = (0.3, 0.2, 0.0, -0.4, 0.1, 0.05, 0.1, 0.2)  # a0..d1 with c0 = 0
FUCHSIAN_P = -1  # p = 0 makes mu(0) singular; see notes in the test-suite


def lebesgue(n_dim=1) -> WeightSpec:
    """w = I: every nontrivial moment vanishes."""
    return WeightSpec(kind="fourier", n_dim=n_dim, fourier={0: np.eye(n_dim, dtype=complex)})


def modified_bessel(k=1.0) -> WeightSpec:
    """Scalar w(z) = exp(k (z + 1/z)); moments are modified Bessel values I_j(2k)."""
    k = complex(k)
    return WeightSpec(
        kind="freud",
        n_dim=1,
        freud_factors=({1: np.array([[k]]), -1: np.array([[k]])},),
        pearson=PearsonSpec(
            n_dim=1,
            coeffs={-2: np.array([[-k]]), 0: np.array([[k]])},
            base_point=1.0,
            base_value=np.array([[np.exp(2 * k)]]),
        ),
    )


def matrix_bessel(kmat) -> WeightSpec:
    """w(z) = exp(K (z + 1/z)) for a constant matrix K (commuting family)."""
    kmat = np.asarray(kmat, dtype=complex)
    from scipy.linalg import expm

    return WeightSpec(
        kind="freud",
        n_dim=kmat.shape[0],
        freud_factors=({1: kmat, -1: kmat},),
        pearson=PearsonSpec(
            n_dim=kmat.shape[0],
            coeffs={-2: -kmat, 0: kmat},
            base_point=1.0,
            base_value=expm(2 * kmat),
        ),
    )


def nilpotent_exponential() -> WeightSpec:
    """w(z) = exp(-A/z + B z) with the strictly triangular pair A, B.

    V(z) = -A/z + B z squares to -I on the nose, so the weight has the closed
    form cos(1) I + sin(1) V(z).  Its true right logarithmic derivative is
    sin(1)cos(1) (A z^{-2} + B) - sin^2(1) [A, B] z^{-1}: the naive three-term
    ad-series truncation would miss the trigonometric factors because the
    commutator [A, B] fails to be central for this pair.
    """
    s, c = np.sin(1.0), np.cos(1.0)
    comm = NILPOTENT_A @ NILPOTENT_B - NILPOTENT_B @ NILPOTENT_A
    base_val = c * np.eye(2) + s * (-NILPOTENT_A + NILPOTENT_B)
    return WeightSpec(
        kind="freud",
        n_dim=2,
        freud_factors=({-1: -NILPOTENT_A, 1: NILPOTENT_B},),
        pearson=PearsonSpec(
            n_dim=2,
            coeffs={-2: s * c * NILPOTENT_A, -1: -s * s * comm, 0: s * c * NILPOTENT_B},
            base_point=1.0,
            base_value=base_val,
        ),
    )


def nilpotent_closed_form(z):
    """Closed form of nilpotent_exponential: cos(1) I + sin(1) (B z - A / z)."""
    z = complex(z)
    return np.cos(1.0) * np.eye(2) + np.sin(1.0) * (NILPOTENT_B * z - NILPOTENT_A / z)


def fuchsian_example(p=FUCHSIAN_P, order=24) -> WeightSpec:
    """The canonical simple-pole N=2, k=1 example weight (c0 = 0)."""
    return fuchsian_weight_n2(p, 1, FUCHSIAN_PARAMS, order=order)


def power_exponential(m=3) -> WeightSpec:
    """Scalar w(z) = z^{-m} e^z; moments are 1/(m+j)! for j >= -m.

    Carried as a Pearson weight with W(z) = -m/z + 1 and anchor w(1) = e.
    """
    return WeightSpec(
        kind="pearson",
        n_dim=1,
        pearson=PearsonSpec(
            n_dim=1,
            coeffs={-1: np.array([[-float(m)]]), 0: np.array([[1.0]])},
            base_point=1.0,
            base_value=np.array([[np.e]]),
        ),
    )


def halfpower_counterexample() -> PearsonSpec:
    """Scalar W = (1/2)/z: the weight z^{1/2} flips sign around the loop."""
    return PearsonSpec(n_dim=1, coeffs={-1: np.array([[0.5]])}, base_point=1.0,
                       base_value=np.array([[1.0]]))


def acceptance_weights():
    """The four weights exercised by the structural acceptance checks."""
    return {
        "modified_bessel": modified_bessel(1.0),
        "nilpotent_exponential": nilpotent_exponential(),
        "fuchsian_example": fuchsian_example(),
        "matrix_bessel": matrix_bessel(np.array([[1.0, 0.3], [0.3, 1.0]])),
    }
