import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacmet import linalg
from pacmet.errors import DimensionMismatchError, DomainError, NonHermitianError

from conftest import random_density, random_pure
from oracles import classical_chernoff_grid, classical_renyi

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


class TestEigh:
    def test_identity(self):
        dec = linalg.eigh(np.eye(2))
        assert dec.eigenvalues == pytest.approx([1.0, 1.0])

    def test_diagonal(self):
        dec = linalg.eigh(np.diag([0.0, 1.0]))
        assert dec.eigenvalues == pytest.approx([0.0, 1.0])

    def test_pauli_x(self):
        dec = linalg.eigh(PAULI_X)
        assert dec.eigenvalues == pytest.approx([-1.0, 1.0])

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            linalg.eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_reconstruction_and_unitarity(self, rng):
        for d in (2, 3, 5):
            a = random_density(rng, d) - random_density(rng, d)
            dec = linalg.eigh(a)
            assert np.linalg.norm(dec.reconstruct() - a) <= 1e-9 * max(
                np.linalg.norm(a), 1.0)
            v = dec.eigenvectors
            assert np.linalg.norm(v.conj().T @ v - np.eye(d)) <= 1e-9


class TestMatrixFunction:
    def test_sqrt(self):
        out = linalg.matrix_function(np.diag([4.0, 9.0]), np.sqrt)
        assert out == pytest.approx(np.diag([2.0, 3.0]))

    def test_pseudo_inverse_rank_deficient(self):
        out = linalg.matrix_function(np.diag([2.0, 0.0]), lambda x: 1.0 / x,
                                     pinv_cutoff=1e-10)
        assert out == pytest.approx(np.diag([0.5, 0.0]))

    def test_fractional_power_matches_scalar(self):
        out = linalg.matrix_function(np.diag([1.0, 8.0]), lambda x: x ** 0.3)
        assert out == pytest.approx(np.diag([1.0, 8.0 ** 0.3]), abs=1e-12)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            linalg.matrix_function(np.diag([1.0, 0.0]), np.log)


class TestTraceNorm:
    def test_diag(self):
        assert linalg.trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)

    def test_density_matrix(self, rng):
        for d in (2, 4):
            assert linalg.trace_norm(random_density(rng, d)) == pytest.approx(1.0)

    def test_projector_difference(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        pp = np.full((2, 2), 0.5, dtype=complex)
        # eigenvalues of (P0 - P+)/2 are +-sqrt(det)/...: trace 0, det -1/8
        expected = 2.0 * math.sqrt(0.125)
        assert linalg.trace_norm(0.5 * (p0 - pp)) == pytest.approx(expected)
        assert expected == pytest.approx(math.sin(math.pi / 4))

    def test_dominates_abs_trace(self, rng):
        for _ in range(25):
            a = random_density(rng, 3) - 0.7 * random_density(rng, 3)
            a = linalg.hermitian_part(a)
            assert linalg.trace_norm(a) >= abs(np.trace(a).real) - 1e-12

    def test_equality_iff_signed(self, rng):
        psd = random_density(rng, 3)
        assert linalg.trace_norm(psd) == pytest.approx(abs(np.trace(psd).real))
        indefinite = np.diag([1.0, -0.5, 0.0])
        assert linalg.trace_norm(indefinite) > abs(np.trace(indefinite)) + 0.5


class TestFidelity:
    def test_self(self, rng):
        rho = random_density(rng, 3)
        assert linalg.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_pure(self):
        assert linalg.fidelity(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == \
            pytest.approx(0.0, abs=1e-12)

    def test_covariant_pair(self):
        # balanced qubit evolved by diag(0,1): overlap over time 2*delta is cos(delta)
        delta = 0.37
        v0 = np.array([1.0, 1.0]) / math.sqrt(2)
        v1 = np.array([1.0, np.exp(-2j * delta)]) / math.sqrt(2)
        f = linalg.fidelity(np.outer(v0, v0.conj()), np.outer(v1, v1.conj()))
        assert f == pytest.approx(math.cos(delta), abs=1e-12)

    def test_symmetry(self, rng):
        for _ in range(10):
            a, b = random_density(rng, 3), random_density(rng, 3)
            assert linalg.fidelity(a, b) == pytest.approx(linalg.fidelity(b, a),
                                                          abs=1e-9)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            linalg.fidelity(random_density(rng, 2), random_density(rng, 3))

    def test_data_processing_partial_trace(self, rng):
        for _ in range(20):
            rho, sigma = random_density(rng, 4), random_density(rng, 4)
            f_full = linalg.fidelity(rho, sigma)
            f_red = linalg.fidelity(linalg.partial_trace(rho, (2, 2), 0),
                                    linalg.partial_trace(sigma, (2, 2), 0))
            assert f_red >= f_full - 1e-9

    def test_fuchs_van_de_graaf(self, rng):
        for _ in range(200):
            rho, sigma = random_density(rng, 2), random_density(rng, 2)
            f = linalg.fidelity(rho, sigma)
            td = linalg.trace_distance(rho, sigma)
            assert 1.0 - f <= td + 1e-10
            assert td <= math.sqrt(max(1.0 - f * f, 0.0)) + 1e-10


class TestChernoff:
    def test_equal_states(self, rng):
        rho = random_density(rng, 3)
        assert linalg.chernoff_divergence(rho, rho) == pytest.approx(0.0, abs=1e-9)

    def test_pure_pair(self):
        delta = 0.29
        v0 = np.array([1.0, 1.0]) / math.sqrt(2)
        v1 = np.array([1.0, np.exp(-2j * delta)]) / math.sqrt(2)
        c = linalg.chernoff_divergence(np.outer(v0, v0.conj()),
                                       np.outer(v1, v1.conj()))
        assert c == pytest.approx(-math.log(math.cos(delta) ** 2), abs=1e-7)

    @pytest.mark.parametrize("p,q", [(0.2, 0.6), (0.35, 0.9), (0.01, 0.5)])
    def test_commuting_matches_grid_scan(self, p, q):
        c = linalg.chernoff_divergence(np.diag([p, 1 - p]), np.diag([q, 1 - q]))
        oracle = classical_chernoff_grid([p, 1 - p], [q, 1 - q])
        assert c == pytest.approx(oracle, abs=1e-7)

    def test_symmetry(self, rng):
        for _ in range(10):
            a, b = random_density(rng, 2), random_density(rng, 2)
            assert linalg.chernoff_divergence(a, b) == pytest.approx(
                linalg.chernoff_divergence(b, a), abs=1e-7)


class TestSandwichedRenyi:
    def test_equal_states(self, rng):
        rho = random_density(rng, 3)
        for alpha in (0.3, 0.5, 2.0):
            assert linalg.sandwiched_renyi(rho, rho, alpha) == pytest.approx(
                0.0, abs=1e-9)

    def test_half_order_fidelity_identity(self):
        # D_{1/2} = -log F^2 with F the root fidelity; on the cos(delta) pair
        # this is -2 log cos(delta)
        delta = 0.41
        v0 = np.array([1.0, 1.0]) / math.sqrt(2)
        v1 = np.array([1.0, np.exp(-2j * delta)]) / math.sqrt(2)
        rho, sigma = np.outer(v0, v0.conj()), np.outer(v1, v1.conj())
        d_half = linalg.sandwiched_renyi(rho, sigma, 0.5)
        f = linalg.fidelity(rho, sigma)
        assert d_half == pytest.approx(-math.log(f * f), abs=1e-8)
        assert d_half == pytest.approx(-2.0 * math.log(math.cos(delta)), abs=1e-8)

    def test_half_order_identity_mixed(self, rng):
        for _ in range(10):
            rho, sigma = random_density(rng, 3), random_density(rng, 3)
            assert linalg.sandwiched_renyi(rho, sigma, 0.5) == pytest.approx(
                -2.0 * math.log(linalg.fidelity(rho, sigma)), abs=1e-8)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9, 1.5, 2.0])
    def test_commuting_matches_classical(self, alpha):
        p, q = [0.3, 0.7], [0.6, 0.4]
        val = linalg.sandwiched_renyi(np.diag(p), np.diag(q), alpha)
        assert val == pytest.approx(classical_renyi(p, q, alpha), abs=1e-9)

    def test_monotone_in_alpha(self, rng):
        grid = [0.3, 0.5, 0.9, 1.5, 2.0]
        for _ in range(10):
            rho, sigma = random_density(rng, 2), random_density(rng, 2)
            vals = [linalg.sandwiched_renyi(rho, sigma, a) for a in grid]
            assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_support_violation_is_infinite(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        sigma = np.diag([0.0, 1.0]).astype(complex)
        assert math.isinf(linalg.sandwiched_renyi(rho, sigma, 2.0))


class TestQfiPure:
    def test_basis_state(self):
        assert linalg.qfi_pure([0.0, 1.0], [1.0, 0.0]) == pytest.approx(0.0)

    def test_balanced_qubit(self):
        amp = 1.0 / math.sqrt(2)
        assert linalg.qfi_pure([0.0, 1.0], [amp, amp]) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [2, 5, 11])
    def test_ghz_scaling(self, n):
        # variance of the two-point distribution at 0 and n is n^2/4
        lam = np.arange(n + 1.0)
        amps = np.zeros(n + 1)
        amps[0] = amps[n] = 1.0 / math.sqrt(2)
        assert linalg.qfi_pure(lam, amps) == pytest.approx(float(n * n))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_classical_fidelity_bhattacharyya(p, q):
    """For commuting states the fidelity is the Bhattacharyya overlap."""
    f = linalg.fidelity(np.diag([p, 1 - p]), np.diag([q, 1 - q]))
    expected = math.sqrt(p * q) + math.sqrt((1 - p) * (1 - q))
    assert f == pytest.approx(expected, abs=1e-10)
