import numpy as np
import pytest

from mopuc import catalog
from mopuc.cauchy_rhp import FrameBuilder
from mopuc.moments import compute_moments
from mopuc.szego import solve_all, verblunsky_lattice
from mopuc.transfer import (
    check_transfer,
    compatibility_differential_residual,
    compatibility_residual,
    differential_relation_residual,
    dyadic_residual,
    m_analyticity_residual,
    m_infinity_coefficient,
    m_leading_fourier,
    m_numeric,
    pearson_leading,
    transfer_analyticity_residual,
    transfer_matrix,
    transfer_product_residual,
)
from mopuc.weights import classify

ANGLES = np.exp(2j * np.pi * (np.arange(8) + 0.25) / 8)


@pytest.fixture(scope="module")
def setups(bessel_weight, bessel_table, bessel_families, bessel_lattice,
           nilpotent_weight, nilpotent_table, nilpotent_families, nilpotent_lattice,
           fuchsian_weight, fuchsian_table, fuchsian_families, fuchsian_lattice):
    out = {}
    for key, w, t, f, l in (
        ("bessel", bessel_weight, bessel_table, bessel_families, bessel_lattice),
        ("nilpotent", nilpotent_weight, nilpotent_table, nilpotent_families,
         nilpotent_lattice),
        ("fuchsian", fuchsian_weight, fuchsian_table, fuchsian_families, fuchsian_lattice),
    ):
        out[key] = (w, t, f, l, FrameBuilder(w, t, f))
    return out


class TestTransferMatrix:
    def test_lebesgue_structure(self):
        table = compute_moments(catalog.lebesgue(2), 8)
        lattice = verblunsky_lattice(table, 5)
        r = transfer_matrix(lattice, 2)
        assert np.allclose(r.R0, np.block([[np.eye(2), np.zeros((2, 2))],
                                           [np.zeros((2, 2)), np.zeros((2, 2))]]))
        assert np.allclose(r.Rm1, np.block([[np.zeros((2, 2)), np.zeros((2, 2))],
                                            [np.zeros((2, 2)), np.eye(2)]]))

    def test_bessel_degree0_entries(self, bessel_lattice, bessel_table):
        r = transfer_matrix(bessel_lattice, 0)
        a1 = bessel_lattice.aL1[1][0, 0]
        h0 = bessel_table[0][0, 0]
        assert abs(a1 + 0.69777) < 1e-4
        assert abs(r.Rm1[0, 0] - a1) < 1e-12          # aL1[1] * aR2d[0]
        assert abs(r.Rm1[0, 1] + a1 * h0) < 1e-12     # -aL1[1] hR[0]
        assert abs(r.Rm1[1, 0] + 1.0 / h0) < 1e-12    # -hR[0]^{-1} aR2d[0]
        assert abs(r.Rm1[1, 1] - 1.0) < 1e-14

    @pytest.mark.parametrize("name", ["bessel", "nilpotent", "fuchsian"])
    def test_dyadic_factorization(self, setups, name):
        lattice = setups[name][3]
        for n in range(0, 6):
            assert dyadic_residual(lattice, n) < 1e-12

    @pytest.mark.parametrize("name", ["bessel", "nilpotent", "fuchsian"])
    def test_one_step_relations(self, setups, name):
        _, _, _, lattice, builder = setups[name]
        for n in range(0, 4):
            res = check_transfer(lattice, builder, n, (0.5, 2.0j))
            assert res["Y"] < 1e-7, (name, n, res)
            assert res["X"] < 1e-7, (name, n, res)

    @pytest.mark.parametrize("name", ["bessel", "nilpotent", "fuchsian"])
    def test_product_reconstruction(self, setups, name):
        _, _, _, lattice, builder = setups[name]
        assert transfer_product_residual(lattice, builder, 3, 2.0) < 1e-6
        assert transfer_product_residual(lattice, builder, 3, 0.4j) < 1e-6

    @pytest.mark.parametrize("name", ["bessel", "nilpotent"])
    def test_no_jump_across_circle(self, setups, name):
        _, _, _, lattice, builder = setups[name]
        assert transfer_analyticity_residual(lattice, builder, 1, ANGLES) < 1e-6


class TestPearsonLeading:
    def test_degree0_form(self, nilpotent_weight, nilpotent_lattice):
        cls = classify(nilpotent_weight.pearson)
        lead = pearson_leading(nilpotent_lattice, 0, cls)
        w0 = cls.leading_matrix(0)
        h0 = nilpotent_lattice.hR[0]
        assert lead.order == 2
        assert np.allclose(lead.M0[:2, :2], w0)
        assert np.allclose(lead.M0[:2, 2:], -w0 @ h0)
        assert np.linalg.norm(lead.M0[2:]) == 0

    def test_ordinary_case_lebesgue(self):
        from mopuc.weights import PearsonSpec

        table = compute_moments(catalog.lebesgue(2), 8)
        lattice = verblunsky_lattice(table, 5)
        cls = classify(PearsonSpec(n_dim=2, coeffs={0: 1e-30 * np.eye(2)}))
        # zero log-derivative is 'ordinary': W_n^[0] = -n I and alpha = 0 leaves
        # only the lower-right block -n hR[n] hR[n-1]^{-1} = -n I
        lead = pearson_leading(lattice, 3, cls)
        assert np.allclose(lead.M0, np.block(
            [[np.zeros((2, 2)), np.zeros((2, 2))], [np.zeros((2, 2)), -3 * np.eye(2)]]
        ))

    @pytest.mark.parametrize("name,n_top", [("bessel", 4), ("nilpotent", 4), ("fuchsian", 3)])
    def test_matches_contour_extraction(self, setups, name, n_top):
        w, t, f, lattice, builder = setups[name]
        cls = classify(w.pearson)
        for n in range(1, n_top + 1):
            lead = pearson_leading(lattice, n, cls)
            num = m_leading_fourier(builder, n, lead.order)
            gap = np.linalg.norm(num - lead.M0) / (1.0 + np.linalg.norm(lead.M0))
            assert gap < 1e-5, (name, n, gap)


class TestMNumeric:
    def test_degree0_upper_left_is_log_derivative(self, setups):
        w, t, f, lattice, builder = setups["bessel"]
        z = 0.5
        m0 = m_numeric(builder, 0, z)
        assert abs(m0[0, 0] - w.pearson.eval(z)[0, 0]) < 1e-6
        assert abs(m0[1, 0]) < 1e-9 and abs(m0[1, 1]) < 1e-9

    @pytest.mark.parametrize("name", ["bessel", "nilpotent", "fuchsian"])
    def test_analytic_across_circle(self, setups, name):
        _, _, _, _, builder = setups[name]
        for n in (1, 3):
            assert m_analyticity_residual(builder, n, ANGLES[:4]) < 1e-5

    def test_z_coefficient_at_infinity(self, setups):
        # the simple-pole example has a degree-1 top coefficient diag(W1, 0)
        w, t, f, lattice, builder = setups["fuchsian"]
        w1 = w.pearson.coeffs[1]
        got = m_infinity_coefficient(builder, 2, 1)
        expect = np.block([[w1, np.zeros((2, 2))], [np.zeros((2, 2)), np.zeros((2, 2))]])
        assert np.linalg.norm(got - expect) / (1 + np.linalg.norm(expect)) < 1e-5

    @pytest.mark.parametrize("name", ["bessel", "nilpotent", "fuchsian"])
    def test_differential_relations(self, setups, name):
        _, _, _, _, builder = setups[name]
        cls = classify(builder.spec.pearson)
        for n in (0, 1, 3):
            for z in (0.5, 2.0 * 1j):
                assert differential_relation_residual(builder, cls, n, z) < 1e-6


class TestCompatibility:
    @pytest.mark.parametrize("name,n_top", [("bessel", 5), ("nilpotent", 4), ("fuchsian", 4)])
    def test_leading_coefficients(self, setups, name, n_top):
        w, _, _, lattice, _ = setups[name]
        cls = classify(w.pearson)
        for n in range(1, n_top + 1):
            assert compatibility_residual(lattice, cls, n) < 1e-7, (name, n)

    def test_perturbation_sensitivity(self, setups):
        # scalar case: perturbing one reflection must be visible (the nilpotent
        # weight annihilates many perturbations structurally)
        w, _, _, lattice, _ = setups["bessel"]
        cls = classify(w.pearson)
        from mopuc.szego import VerblunskyLattice

        a_l1 = [np.array(m, copy=True) for m in lattice.aL1]
        a_l1[2][0, 0] += 0.1
        bad = VerblunskyLattice(lattice.n_max, tuple(a_l1), lattice.aR2d, lattice.hL,
                                lattice.hR)
        assert max(compatibility_residual(bad, cls, n) for n in (1, 2)) > 1e-3

    @pytest.mark.parametrize("name", ["bessel", "fuchsian"])
    def test_full_differential_identity(self, setups, name):
        _, _, _, lattice, builder = setups[name]
        for n in (1, 2):
            assert compatibility_differential_residual(lattice, builder, n, 0.5) < 1e-5
