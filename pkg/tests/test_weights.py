import math

import numpy as np
import pytest

from mopuc import catalog
from mopuc.errors import ConstraintError, DomainError, InvalidSpecError
from mopuc.weights import (
    PearsonSpec,
    classify,
    eval_weight,
    eval_weight_many,
    freud_log_derivative,
    fuchsian_constraint,
    fuchsian_weight_n2,
    monodromy_defect,
    phi_series,
)

A = catalog.NILPOTENT_A
B = catalog.NILPOTENT_B


def pearson_fd_residual(spec, radius, samples=16):
    """Finite-difference check of dw/dz = W(z) w on a circle."""
    ps = spec.pearson
    worst = 0.0
    for m in range(samples):
        z = radius * np.exp(2j * np.pi * (m + 0.37) / samples)
        h = 1e-6 * abs(z)
        wd = (eval_weight(spec, z + h) - eval_weight(spec, z - h)) / (2 * h)
        res = np.linalg.norm(wd - ps.eval(z) @ eval_weight(spec, z)) / np.linalg.norm(wd)
        worst = max(worst, res)
    return worst


class TestClassify:
    def test_constant_is_ordinary(self):
        cls = classify(PearsonSpec(n_dim=2, coeffs={0: np.eye(2)}))
        assert cls.kind == "ordinary"
        assert np.allclose(cls.leading_matrix(3), -3 * np.eye(2))

    def test_double_pole_is_nonfuchsian_rank2(self):
        spec = PearsonSpec(
            n_dim=2, coeffs={-1: np.diag([1.0, -1.0]), -2: A, 0: B}
        )
        cls = classify(spec)
        assert cls.kind == "nonfuchsian" and cls.rank == 2
        assert np.allclose(cls.leading_matrix(5), A)

    def test_simple_pole_is_fuchsian(self):
        spec = PearsonSpec(
            n_dim=2,
            coeffs={-1: np.diag([0.0, 1.0]), 0: np.eye(2), 1: 0.5 * np.eye(2)},
        )
        cls = classify(spec)
        assert cls.kind == "fuchsian"
        assert np.allclose(cls.leading_matrix(2), np.diag([-2.0, -1.0]))

    def test_all_zero_rejected(self):
        with pytest.raises(InvalidSpecError):
            PearsonSpec(n_dim=2, coeffs={0: np.zeros((2, 2))})


class TestEvalWeight:
    def test_fourier_identity(self):
        spec = catalog.lebesgue(3)
        z = np.exp(0.3j)
        assert np.allclose(eval_weight(spec, z), np.eye(3))

    def test_freud_nilpotent_closed_form(self):
        spec = catalog.nilpotent_exponential()
        for z in (1.0, 0.7 * np.exp(1.1j), 2.2 * np.exp(-0.4j)):
            got = eval_weight(spec, z)
            assert np.linalg.norm(got - catalog.nilpotent_closed_form(z)) < 1e-12

    def test_freud_closed_form_at_one(self):
        # V(1) = B - A squares to -I, so exp(V) = cos(1) I + sin(1) (B - A)
        spec = catalog.nilpotent_exponential()
        expect = np.cos(1.0) * np.eye(2) + np.sin(1.0) * np.array([[0, -1], [1, 0]])
        assert np.linalg.norm(eval_weight(spec, 1.0) - expect) < 1e-13

    def test_pearson_scalar_closed_form(self):
        # W = k(1 - z^{-2}) integrates to w = exp(k(z + 1/z))
        k = 1.0
        spec = PearsonSpec(
            n_dim=1,
            coeffs={-2: np.array([[-k]]), 0: np.array([[k]])},
            base_point=1.0,
            base_value=np.array([[np.exp(2 * k)]]),
        )
        wspec = catalog.modified_bessel(k)
        from mopuc.weights import WeightSpec

        ode = WeightSpec(kind="pearson", n_dim=1, pearson=spec)
        for theta in (0.0, 0.9, 2.4, 4.0):
            z = np.exp(1j * theta)
            assert abs(eval_weight(ode, z)[0, 0] - np.exp(2 * k * np.cos(theta))) < 1e-9
            assert abs(eval_weight(wspec, z)[0, 0] - np.exp(2 * k * np.cos(theta))) < 1e-12

    def test_pearson_many_on_circle_matches_single(self):
        spec = catalog.power_exponential(3)
        zs = np.exp(1j * np.array([0.1, 1.4, 3.0, 5.2]))
        batch = eval_weight_many(spec, zs)
        for z, got in zip(zs, batch):
            assert abs(got[0, 0] - z**-3 * np.exp(z)) < 1e-8

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            eval_weight(catalog.lebesgue(1), 0.0)


class TestPearsonResiduals:
    """dw/dz = W(z) w at 16 points on |z| = 0.9 and 1.1 for attached specs."""

    @pytest.mark.parametrize(
        "name",
        ["modified_bessel", "nilpotent_exponential", "fuchsian_example", "matrix_bessel"],
    )
    def test_attached_pearson_consistent(self, name):
        spec = catalog.acceptance_weights()[name]
        for radius in (0.9, 1.1):
            assert pearson_fd_residual(spec, radius) < 1e-6

    def test_power_exponential(self):
        spec = catalog.power_exponential(3)
        for radius in (0.9, 1.1):
            assert pearson_fd_residual(spec, radius) < 1e-6


class TestMonodromy:
    def test_integer_power_single_valued(self):
        spec = PearsonSpec(n_dim=1, coeffs={-1: np.array([[3.0]])})
        assert monodromy_defect(spec) < 1e-9

    def test_half_power_branches(self):
        defect = monodromy_defect(catalog.halfpower_counterexample())
        assert abs(defect - 2.0) < 1e-6  # loop multiplies z^{1/2} by -1

    def test_nilpotent_weight_single_valued(self):
        spec = catalog.nilpotent_exponential()
        assert monodromy_defect(spec.pearson) < 1e-8


class TestFreudLogDerivative:
    def test_scalar_commutative(self):
        k = 0.7
        vt = {1: np.array([[k]]), -1: np.array([[k]])}
        for z in (1.0, 0.6 + 0.2j):
            got = freud_log_derivative([vt], z)
            assert abs(got[0, 0] - (k - k / z**2)) < 1e-13

    def test_commuting_matrix_is_plain_derivative(self):
        kmat = np.array([[1.0, 0.3], [0.3, 1.0]], dtype=complex)
        vt = {1: kmat, -1: kmat}
        z = 1.3 * np.exp(0.2j)
        got = freud_log_derivative([vt], z)
        assert np.linalg.norm(got - (kmat - kmat / z**2)) < 1e-12

    def test_noncommuting_matches_finite_difference(self):
        spec = catalog.nilpotent_exponential()
        for z in (1.0, np.exp(0.8j), 1.4 * np.exp(2.1j)):
            got = freud_log_derivative(spec.freud_factors, z)
            h = 1e-6 * abs(z)
            wd = (eval_weight(spec, z + h) - eval_weight(spec, z - h)) / (2 * h)
            ref = wd @ np.linalg.inv(eval_weight(spec, z))
            assert np.linalg.norm(got - ref) / np.linalg.norm(ref) < 1e-6

    def test_nilpotent_value_at_one(self):
        # the trigonometric prefactors are forced by [A,B] failing to be central
        got = freud_log_derivative(catalog.nilpotent_exponential().freud_factors, 1.0)
        s, c = np.sin(1.0), np.cos(1.0)
        comm = A @ B - B @ A
        expect = s * c * (A + B) - s * s * comm
        assert np.linalg.norm(got - expect) < 1e-12

    def test_ordered_product_two_factors(self):
        vt1 = {1: A}
        vt2 = {-1: B}
        z = 0.9 * np.exp(0.5j)
        got = freud_log_derivative([vt1, vt2], z)
        from mopuc.weights import WeightSpec

        spec = WeightSpec(kind="freud", n_dim=2, freud_factors=(vt1, vt2))
        h = 1e-6 * abs(z)
        wd = (eval_weight(spec, z + h) - eval_weight(spec, z - h)) / (2 * h)
        ref = wd @ np.linalg.inv(eval_weight(spec, z))
        assert np.linalg.norm(got - ref) / (1 + np.linalg.norm(ref)) < 1e-6


class TestPhiSeries:
    def test_zero_window(self):
        out = phi_series([np.zeros((2, 2))] * 3, 5)
        assert all(np.linalg.norm(c) == 0 for c in out)

    def test_scalar_exponential(self):
        a = 0.8
        out = phi_series([np.array([[a]]), np.zeros((1, 1)), np.zeros((1, 1))], 8)
        for j, c in enumerate(out, start=1):
            assert abs(c[0, 0] - a**j / math.factorial(j)) < 1e-14

    def test_second_coefficient_generic(self):
        rng = np.random.default_rng(5)
        w0, w1, w2 = (rng.normal(size=(2, 2)) for _ in range(3))
        out = phi_series([w0, w1, w2], 3)
        assert np.allclose(out[1], 0.5 * (w0 @ w0 + w1))


class TestFuchsianConstructor:
    def test_trivial_prefactor(self):
        spec = fuchsian_weight_n2(0, 1, (0,) * 8, order=4)
        z = 1.7 * np.exp(0.3j)
        assert np.allclose(eval_weight(spec, z), np.diag([1.0, z]))

    def test_constraint_error_reports_residual(self):
        with pytest.raises(ConstraintError) as err:
            fuchsian_weight_n2(0, 1, (0.3, 0.2, 0.1, -0.4, 0.1, 0.05, 0.1, 0.2))
        assert abs(err.value.residual - 0.1) < 1e-14

    def test_k2_quadric_constraint(self):
        # a0 = d0 with c1 = 0 lands on the constraint surface for any c0
        residual = fuchsian_constraint(0, 2, (0.5, 0.2, 0.7, 0.5, 0.1, 0.05, 0.0, 0.2))
        assert abs(residual) < 1e-14

    @pytest.mark.parametrize(
        "k,params",
        [
            (1, (0.3, 0.2, 0.0, -0.4, 0.1, 0.05, 0.1, 0.2)),
            (2, (0.3, 0.2, 0.2, -0.4, 0.1, 0.05, -0.14, 0.2)),
        ],
    )
    def test_constructed_weight_solves_its_system(self, k, params):
        spec = fuchsian_weight_n2(-1, k, params, order=24)
        for radius in (0.9, 1.1):
            assert pearson_fd_residual(spec, radius) < 1e-6
        assert monodromy_defect(spec.pearson) < 1e-8

    def test_k3_on_surface(self):
        # solve the cubic constraint for c1 by bisection, then build and check
        a0, b0, c0, d0, a1, b1, d1 = 0.3, 0.2, 0.4, -0.4, 0.1, 0.05, 0.2

        def f(c1):
            return fuchsian_constraint(-2, 3, (a0, b0, c0, d0, a1, b1, c1, d1)).real

        lo, hi = -2.0, 2.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (f(lo) < 0) == (f(mid) < 0):
                lo = mid
            else:
                hi = mid
        c1 = 0.5 * (lo + hi)
        spec = fuchsian_weight_n2(-2, 3, (a0, b0, c0, d0, a1, b1, c1, d1), order=32)
        assert pearson_fd_residual(spec, 1.1) < 1e-6
        assert monodromy_defect(spec.pearson) < 1e-8

    def test_k3_printed_cubic_is_off_surface(self):
        """The naive cubic c0((a1-d1)+(a0-d0)^2) - b0 c0^2 + c1(a0-d0) = 0 does
        NOT remove the branch point: monodromy stays nontrivial on it."""
        a0, b0, c0, d0, a1, b1, d1 = 0.3, 0.2, 0.4, -0.4, 0.1, 0.05, 0.2
        c1 = (b0 * c0**2 - c0 * ((a1 - d1) + (a0 - d0) ** 2)) / (a0 - d0)
        spec = PearsonSpec(
            n_dim=2,
            coeffs={
                -1: np.diag([-2.0, 1.0]),
                0: np.array([[a0, b0], [c0, d0]]),
                1: np.array([[a1, b1], [c1, d1]]),
            },
        )
        assert monodromy_defect(spec) > 0.05


class TestSeriesReproducesOde:
    def test_fuchsian_series_vs_ode_weight(self):
        """Series evaluation agrees with direct ODE integration of the attached
        Pearson system on the unit circle."""
        from mopuc.weights import WeightSpec

        spec = catalog.fuchsian_example()
        ode = WeightSpec(kind="pearson", n_dim=2, pearson=spec.pearson)
        for theta in (0.5, 2.0, 4.4):
            z = np.exp(1j * theta)
            a = eval_weight(spec, z)
            b = eval_weight(ode, z)
            assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-8
