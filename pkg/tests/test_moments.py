import math

import numpy as np
import pytest
from scipy.special import iv

from mopuc import catalog
from mopuc._kernels import fourier_reduce
from mopuc.moments import (
    MomentTableRangeError,
    circle_values,
    compute_moments,
    quasi_definiteness,
    table_from_blocks,
    truncated_moment_matrix,
)

A = catalog.NILPOTENT_A
B = catalog.NILPOTENT_B


class TestComputeMoments:
    def test_lebesgue(self):
        table = compute_moments(catalog.lebesgue(2), 6)
        assert np.allclose(table[0], np.eye(2))
        for j in range(1, 7):
            assert np.linalg.norm(table[j]) < 1e-14
            assert np.linalg.norm(table[-j]) < 1e-14

    def test_bessel_values_against_scipy(self, bessel_table):
        # independent oracle: mu(j) = I_j(2) for w = exp(z + 1/z)
        assert abs(bessel_table[0][0, 0] - 2.2795853) < 2e-7
        assert abs(bessel_table[1][0, 0] - 1.5906369) < 2e-7
        assert abs(bessel_table[2][0, 0] - 0.6889484) < 2e-7
        for j in range(-12, 13):
            assert abs(bessel_table[j][0, 0] - iv(j, 2.0)) < 1e-12

    def test_nilpotent_closed_form_blocks(self, nilpotent_table):
        s, c = np.sin(1.0), np.cos(1.0)
        assert np.linalg.norm(nilpotent_table[0] - c * np.eye(2)) < 1e-12
        assert np.linalg.norm(nilpotent_table[1] - s * B) < 1e-12
        assert np.linalg.norm(nilpotent_table[-1] + s * A) < 1e-12
        for j in list(range(2, 8)) + [-2, -3]:
            assert np.linalg.norm(nilpotent_table[j]) < 1e-12

    def test_factorial_moments(self):
        table = compute_moments(catalog.power_exponential(3), 8)
        for j in range(-3, 9):
            assert abs(table[j][0, 0] - 1.0 / math.factorial(3 + j)) < 1e-9
        for j in (-4, -5, -6):
            assert abs(table[j][0, 0]) < 1e-9

    def test_aliasing_consistency(self, bessel_weight, bessel_table):
        # recomputing with twice the nodes moves every block by < est_error
        m = bessel_table.quadrature_size
        js = np.arange(-bessel_table.j_max, bessel_table.j_max + 1)
        refined = fourier_reduce(circle_values(bessel_weight, 2 * m), js)
        for i, j in enumerate(js):
            assert np.linalg.norm(refined[i] - bessel_table[j]) <= bessel_table.est_error + 1e-15

    def test_hermitian_weight_symmetry(self, kmat_table):
        # w(conj(zeta))^+ = w(zeta) forces mu(-j) = mu(j)^+
        for j in range(0, kmat_table.j_max + 1):
            assert np.linalg.norm(kmat_table[-j] - kmat_table[j].conj().T) < 1e-11

    def test_scalar_structure_blocks(self, kmat_table):
        # w = exp(K(z + 1/z)) with symmetric K keeps all blocks symmetric
        for j in range(-8, 9):
            blk = kmat_table[j]
            assert np.linalg.norm(blk - blk.T) < 1e-12

    def test_commutant_transport(self, kmat_weight, kmat_table):
        # anything commuting with the weight at the nodes commutes with moments
        c = np.array([[1.0, 0.3], [0.3, 1.0]])  # commutes with K and hence w
        vals = circle_values(kmat_weight, 256)
        assert max(np.linalg.norm(c @ v - v @ c) for v in vals) < 1e-12
        for j in range(-8, 9):
            blk = kmat_table[j]
            assert np.linalg.norm(c @ blk - blk @ c) < 1e-10

    def test_range_error(self, bessel_table):
        with pytest.raises(MomentTableRangeError):
            bessel_table[25]


class TestTruncatedMatrix:
    def test_n1_both_sides(self, bessel_table):
        assert np.allclose(truncated_moment_matrix(bessel_table, 1, "L"), bessel_table[0])
        assert np.allclose(truncated_moment_matrix(bessel_table, 1, "R"), bessel_table[0])

    def test_n2_layout(self, nilpotent_table):
        t = nilpotent_table
        left = truncated_moment_matrix(t, 2, "L")
        right = truncated_moment_matrix(t, 2, "R")
        assert np.allclose(left[:2, 2:], t[-1])
        assert np.allclose(left[2:, :2], t[1])
        assert np.allclose(right[:2, 2:], t[1])
        assert np.allclose(right[2:, :2], t[-1])

    def test_depth_guard(self, bessel_table):
        with pytest.raises(MomentTableRangeError):
            truncated_moment_matrix(bessel_table, bessel_table.j_max + 1, "L")


class TestQuasiDefiniteness:
    def test_lebesgue_all_ones(self):
        table = compute_moments(catalog.lebesgue(2), 6)
        for n, rl, rr in quasi_definiteness(table, 5):
            assert rl > 0.99 and rr > 0.99

    def test_nilpotent_degree2_determinant(self, nilpotent_table):
        # |det M^L_2| = cos(1)^2, computed via the Schur splitting by hand
        left = truncated_moment_matrix(nilpotent_table, 2, "L")
        assert abs(abs(np.linalg.det(left)) - np.cos(1.0) ** 2) < 1e-10

    def test_bessel_nonsingular_through_12(self, bessel_table):
        for n, rl, rr in quasi_definiteness(bessel_table, 12):
            assert rl > 1e-13 and rr > 1e-13

    def test_degenerate_prefactor_flagged(self):
        # the simple-pole construction with p = 0 has mu(0) = [[1,0],[0,0]]
        from mopuc.weights import fuchsian_weight_n2

        spec = fuchsian_weight_n2(0, 1, catalog.FUCHSIAN_PARAMS, order=16)
        table = compute_moments(spec, 6)
        rows = quasi_definiteness(table, 2)
        assert rows[0][1] < 1e-13 and rows[0][2] < 1e-13


class TestTableFromBlocks:
    def test_roundtrip(self):
        blocks = {0: np.eye(1), 2: np.array([[0.5]])}
        table = table_from_blocks(blocks, 1)
        assert table.j_max == 2
        assert np.allclose(table[2], 0.5 * np.eye(1))
        assert np.allclose(table[-1], 0.0)
