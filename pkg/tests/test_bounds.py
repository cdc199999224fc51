import math

import numpy as np
import pytest

from pacmet import bounds, families, linalg, phase, solver
from pacmet.errors import (
    KrausIncompleteError,
    NoValidPairError,
    ShiftOverlapError,
    ZeroAcceptanceError,
)
from pacmet.families import Domain, PovmGrid, Prior, Window, family_from_states

from conftest import random_density
from oracles import beta_h_sdp, classical_chernoff_grid

TWO_PI = 2.0 * math.pi


def covariant_qubit(n_grid=64):
    return phase.gridded_family(phase.probe_plus_tensor(1), n_grid)


class TestHelstrom:
    def test_equal_states(self, rng):
        rho = random_density(rng, 2)
        assert bounds.helstrom(bounds.TwoPointInstance(rho, rho, 0.5)) == \
            pytest.approx(0.5, abs=1e-12)

    def test_orthogonal_pure(self):
        inst = bounds.TwoPointInstance(np.diag([1.0, 0.0]).astype(complex),
                                       np.diag([0.0, 1.0]).astype(complex), 0.5)
        assert bounds.helstrom(inst) == pytest.approx(1.0, abs=1e-12)

    def test_covariant_pair(self):
        # pure pair with overlap cos(delta): trace distance sqrt(1-F^2)=sin(delta)
        delta = 0.31
        v0 = np.array([1.0, 1.0]) / math.sqrt(2)
        v1 = np.array([1.0, np.exp(-2j * delta)]) / math.sqrt(2)
        inst = bounds.TwoPointInstance(np.outer(v0, v0.conj()),
                                       np.outer(v1, v1.conj()), 0.5)
        assert bounds.helstrom(inst) == pytest.approx(
            0.5 * (1.0 + math.sin(delta)), abs=1e-12)

    def test_dominates_prior_maximum(self, rng):
        for _ in range(10):
            rho, sigma = random_density(rng, 2), random_density(rng, 2)
            p = rng.uniform(0.0, 1.0)
            val = bounds.helstrom(bounds.TwoPointInstance(rho, sigma, p))
            assert val >= max(p, 1 - p) - 1e-12


class TestTwoPointUpperBound:
    def test_covariant_qubit_tightest_pair(self):
        fam = covariant_qubit(64)
        k = 4
        delta = k * fam.step
        rep = bounds.two_point_upper_bound(fam, Window(delta))
        # tightest admissible pair sits one grid step beyond 2*delta
        sep = (2 * k + 1) * fam.step
        expected = 0.5 * (1.0 + math.sin(sep / 2.0))
        assert rep.value == pytest.approx(expected, abs=1e-7)

    def test_orthogonal_everywhere_vacuous(self):
        n = 8
        states = [np.diag(np.eye(n)[l]).astype(complex) for l in range(n)]
        fam = family_from_states(Domain("periodic", TWO_PI), states)
        rep = bounds.two_point_upper_bound(fam, Window(fam.step))
        assert rep.value == pytest.approx(1.0, abs=1e-9)

    def test_no_valid_pair(self, rng):
        fam = family_from_states(Domain("periodic", TWO_PI),
                                 [random_density(rng, 2)] * 8)
        with pytest.raises(NoValidPairError):
            bounds.two_point_upper_bound(fam, Window(3.1))

    def test_dominates_exact_minimax(self, rng):
        for seed in range(5):
            local = np.random.default_rng(seed)
            n = 16
            states = [random_density(local, 2) for _ in range(n)]
            fam = family_from_states(Domain("periodic", TWO_PI), states)
            w = Window(2 * fam.step + 1e-12)
            exact = solver.solve_minimax_sdp(fam, w, tol=1e-5).eta_bar_star
            rep = bounds.two_point_upper_bound(fam, w)
            assert rep.value >= exact - 1e-4


class TestFidelityErrorLowerBound:
    def test_identical_far_states(self, rng):
        fam = family_from_states(Domain("periodic", TWO_PI),
                                 [random_density(rng, 2)] * 16)
        rep = bounds.fidelity_error_lower_bound(fam, Window(fam.step * 1.5))
        assert rep.value == pytest.approx(0.25, abs=1e-9)

    def test_covariant_qubit(self):
        fam = covariant_qubit(64)
        k = 4
        rep = bounds.fidelity_error_lower_bound(fam, Window(k * fam.step))
        sep = (2 * k + 1) * fam.step
        assert rep.value == pytest.approx(0.25 * math.cos(sep / 2.0) ** 2,
                                          abs=1e-7)

    def test_consistent_with_exact(self):
        fam = covariant_qubit(64)
        w = Window(4 * fam.step + 1e-12)
        exact = solver.solve_minimax_sdp(fam, w, tol=1e-6).eta_bar_star
        rep = bounds.fidelity_error_lower_bound(fam, w)
        assert 1.0 - exact >= rep.value - 1e-4


class TestChernoffRateBound:
    def test_covariant_qubit(self):
        fam = covariant_qubit(64)
        k = 4
        rep = bounds.chernoff_rate_bound(fam, Window(k * fam.step))
        sep = (2 * k + 1) * fam.step
        assert rep.value == pytest.approx(-2.0 * math.log(math.cos(sep / 2.0)),
                                          abs=1e-6)

    def test_dephasing_matches_classical(self):
        n = 32
        fam = families.build_dephasing_family(1.0, n, TWO_PI, periodic=True)
        k = 3
        rep = bounds.chernoff_rate_bound(fam, Window(k * fam.step))
        best = math.inf
        for i in range(n):
            for j in range(i + 1, n):
                sep = fam.domain.separation(fam.grid[i], fam.grid[j])
                if sep > 2 * k * fam.step + 1e-12:
                    p = math.cos(fam.grid[i] / 2.0) ** 2
                    q = math.cos(fam.grid[j] / 2.0) ** 2
                    best = min(best, classical_chernoff_grid([p, 1 - p],
                                                             [q, 1 - q], 20001))
        assert rep.value == pytest.approx(best, abs=1e-5)

    def test_constant_family_zero(self, rng):
        fam = family_from_states(Domain("periodic", TWO_PI),
                                 [random_density(rng, 2)] * 16)
        rep = bounds.chernoff_rate_bound(fam, Window(fam.step * 1.5))
        assert rep.value == pytest.approx(0.0, abs=1e-9)


class TestMultishift:
    def test_single_shift_vacuous(self):
        fam = covariant_qubit(32)
        val = bounds.multishift_ht_bound(fam, Prior.uniform(32),
                                         Window(2 * fam.step), [(1.0, 0.0)])
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_everywhere(self):
        n = 8
        states = [np.diag(np.eye(n)[l]).astype(complex) for l in range(n)]
        fam = family_from_states(Domain("periodic", TWO_PI), states)
        val = bounds.multishift_ht_bound(fam, Prior.uniform(n),
                                         Window(fam.step / 2 * 1.5),
                                         [(0.5, 0.0), (0.5, 4 * fam.step)])
        assert val == pytest.approx(1.0, abs=1e-7)

    def test_binary_reduction_matches_helstrom_integral(self):
        fam = covariant_qubit(32)
        states = fam.states
        n = 32
        k = 2
        shift = 8
        val = bounds.multishift_ht_bound(
            fam, Prior.uniform(n), Window(k * fam.step + 1e-12),
            [(0.5, 0.0), (0.5, shift * fam.step)])
        oracle = np.mean([
            0.5 + 0.5 * linalg.trace_norm(0.5 * states[l]
                                          - 0.5 * states[(l + shift) % n])
            for l in range(n)])
        assert val == pytest.approx(oracle, abs=1e-7)

    def test_shift_overlap_rejected(self):
        fam = covariant_qubit(32)
        with pytest.raises(ShiftOverlapError):
            bounds.multishift_ht_bound(fam, Prior.uniform(32),
                                       Window(2 * fam.step),
                                       [(0.5, 0.0), (0.5, fam.step)])


class TestBetaH:
    def test_equal_states(self, rng):
        rho = random_density(rng, 2)
        for eta in (0.2, 0.5, 0.9):
            assert bounds.beta_h(rho, rho, eta) == pytest.approx(eta, abs=1e-9)

    def test_orthogonal_pure(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        sigma = np.diag([0.0, 1.0]).astype(complex)
        assert bounds.beta_h(rho, sigma, 0.9) == pytest.approx(0.0, abs=1e-9)

    def test_matches_reference_sdp(self, rng):
        for _ in range(6):
            rho, sigma = random_density(rng, 2), random_density(rng, 2)
            mine = bounds.beta_h(rho, sigma, 0.9)
            ref = beta_h_sdp(rho, sigma, 0.9)
            assert mine == pytest.approx(ref, abs=1e-7)

    def test_monotone_in_eta(self, rng):
        for _ in range(5):
            rho, sigma = random_density(rng, 2), random_density(rng, 2)
            vals = [bounds.beta_h(rho, sigma, e)
                    for e in (0.1, 0.3, 0.5, 0.7, 0.9)]
            assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))


class TestHtToleranceLowerBound:
    def test_no_information_family(self, rng):
        rho = random_density(rng, 2)
        n, T = 16, TWO_PI
        fam = family_from_states(Domain("periodic", T), [rho] * n)
        eta = 0.4
        val = bounds.ht_tolerance_lower_bound(fam, eta, rho)
        assert val == pytest.approx(0.5 * T * eta, abs=1e-8)
        # exact tolerance of the no-information problem is eta*T/2
        assert val <= eta * T / 2.0 + 1e-9

    def test_orthogonal_family_vacuous(self, rng):
        n = 8
        states = [np.diag(np.eye(n)[l]).astype(complex) for l in range(n)]
        fam = family_from_states(Domain("periodic", TWO_PI), states)
        sigma = random_density(rng, n)
        val = bounds.ht_tolerance_lower_bound(fam, 0.99, sigma)
        assert val <= 0.75

    def test_below_exact_tolerance_on_covariant(self):
        fam = covariant_qubit(64)
        eta = 0.6
        sigma = fam.states[0]
        lower = bounds.ht_tolerance_lower_bound(fam, eta, sigma)
        exact = solver.optimal_tolerance(fam, eta, minimax=True)
        assert lower <= exact + 1e-9


class TestCramerRaoLikeBound:
    def test_iid_balanced_qubit_coefficients(self):
        base = bounds.covariant_fidelity_profile(phase.probe_plus_tensor(1))
        qs = {}
        for n in (1, 4, 16):
            res = bounds.cramer_rao_like_bound(bounds.iid_profile(base, n),
                                               [0.0], 0.99)
            assert res.f[0, 0] == pytest.approx(n / 8.0, rel=1e-4)
            qs[n] = res.q
        # q = O(1/sqrt(n)): quartering n halves q
        assert qs[4] / qs[1] == pytest.approx(0.5, abs=0.05)
        assert qs[16] / qs[4] == pytest.approx(0.5, abs=0.05)

    def test_f2_matches_qfi(self):
        for n in (4, 9):
            probe = phase.probe_plus_tensor(n)
            res = bounds.cramer_rao_like_bound(
                bounds.covariant_fidelity_profile(probe), [0.0], 0.99)
            qfi = linalg.qfi_pure(np.arange(n + 1.0), probe.amps)
            assert res.f[0, 0] == pytest.approx(qfi / 8.0, rel=1e-4)

    @pytest.mark.parametrize("n", [8, 16])
    def test_below_exact_tolerance(self, n):
        probe = phase.probe_plus_tensor(n)
        res = bounds.cramer_rao_like_bound(
            bounds.covariant_fidelity_profile(probe), [0.0], 0.99)
        exact = phase.covariant_tolerance(probe, 0.99)
        assert not res.vacuous
        assert res.delta_lb <= exact

    def test_exact_gamma_inside_bracket(self):
        probe = phase.probe_plus_tensor(8)
        res = bounds.cramer_rao_like_bound(
            bounds.covariant_fidelity_profile(probe), [0.0], 0.99)
        lo, hi = res.gamma_bracket
        assert lo - 1e-12 <= res.exact_gamma <= hi + 1e-12

    def test_requires_large_eta(self):
        with pytest.raises(ValueError):
            bounds.cramer_rao_like_bound(lambda t, tau: 1.0, [0.0], 0.5)


class TestRenyiAsymptote:
    @staticmethod
    def _depolarized_covariant(eps):
        def states_fn(t):
            v = np.array([1.0, np.exp(-1j * t)]) / math.sqrt(2)
            psi = np.outer(v, v.conj())
            return (1 - eps) * psi + eps * np.eye(2) / 2.0

        return states_fn

    def test_vanishes_with_eta(self):
        states_fn = self._depolarized_covariant(0.1)
        small = bounds.renyi_tolerance_asymptote(states_fn, [0.0], 1e-6, 2.0, 100)
        big = bounds.renyi_tolerance_asymptote(states_fn, [0.0], 0.9, 2.0, 100)
        assert small < 1e-6 * big

    def test_pure_family_is_vacuous_but_valid(self):
        def pure_states(t):
            v = np.array([1.0, np.exp(-1j * t)]) / math.sqrt(2)
            return np.outer(v, v.conj())

        val = bounds.renyi_tolerance_asymptote(pure_states, [0.0], 0.9, 2.0, 100)
        assert val == 0.0
        exact = phase.covariant_tolerance(phase.probe_plus_tensor(1), 0.9)
        assert val <= exact

    def test_information_monotone_in_alpha(self):
        states_fn = self._depolarized_covariant(0.2)
        h = 1e-3
        infos = []
        for alpha in (1.1, 1.5, 2.0):
            d = (linalg.sandwiched_renyi(states_fn(0.0), states_fn(h), alpha)
                 + linalg.sandwiched_renyi(states_fn(0.0), states_fn(-h), alpha))
            infos.append(d / (alpha * h * h))
        assert infos[0] <= infos[1] + 1e-6 <= infos[2] + 2e-6

    def test_below_exact_on_mixed_family(self):
        eps = 0.2
        states_fn = self._depolarized_covariant(eps)
        n_copies = 100
        val = bounds.renyi_tolerance_asymptote(states_fn, [0.0], 0.9, 2.0,
                                               n_copies)
        assert 0.0 < val < 1.0


class TestSmallEtaTolerance:
    def test_zero_eta(self):
        fam = covariant_qubit(32)
        povm = phase.pgm_grid_povm(phase.probe_plus_tensor(1), 32)
        assert bounds.small_eta_tolerance(fam, Prior.uniform(32), povm, 0.0) == 0.0

    def test_revelation_slope(self):
        # piecewise-constant revelation family: eta(d) = 2 d / step for small d,
        # so the exact tolerance curve has slope step/2 at eta -> 0
        n = 8
        states = [np.diag(np.eye(n)[l]).astype(complex) for l in range(n)]
        fam = family_from_states(Domain("periodic", TWO_PI), states)
        effects = np.stack(states) / 1.0
        povm = PovmGrid(effects, fam.grid)
        eta = 1e-3
        val = bounds.small_eta_tolerance(fam, Prior.uniform(n), povm, eta)
        assert val == pytest.approx(eta * fam.step / 2.0, abs=1e-15)

    def test_flat_povm(self, rng):
        n, T = 16, TWO_PI
        fam = family_from_states(Domain("periodic", T),
                                 [random_density(rng, 2)] * n)
        povm = PovmGrid.flat(n, 2, fam.grid)
        eta = 1e-3
        val = bounds.small_eta_tolerance(fam, Prior.uniform(n), povm, eta)
        assert val == pytest.approx(eta * T / 2.0, abs=1e-12)
        minimax_val = bounds.small_eta_tolerance(fam, None, povm, eta,
                                                 minimax=True)
        assert minimax_val == pytest.approx(eta * T / 2.0, abs=1e-12)

    def test_zero_acceptance(self):
        # all acceptance weight sits on one prediction; the worst-case
        # diagonal density vanishes
        n = 4
        states = [np.diag([1.0, 0.0]).astype(complex)] * n
        fam = family_from_states(Domain("periodic", TWO_PI), states)
        eff = np.zeros((n, 2, 2), dtype=complex)
        eff[0] = np.eye(2)
        povm = PovmGrid(eff, fam.grid)
        with pytest.raises(ZeroAcceptanceError):
            bounds.small_eta_tolerance(fam, None, povm, 0.1, minimax=True)


class TestProbeOptimization:
    def test_identity_channel_flat_povm(self):
        n, T = 32, TWO_PI
        domain = Domain("periodic", T)
        grid = T * np.arange(n) / n
        povm = PovmGrid.flat(n, 2, grid)
        k = 3
        w = Window(k * (T / n) + 1e-12)
        probe, eta = bounds.probe_optimization_single_use(
            lambda t: [np.eye(2, dtype=complex)], domain, grid,
            Prior.uniform(n), w, povm)
        assert eta == pytest.approx(2 * k * (T / n) / T, abs=1e-12)

    def test_unitary_channel_recovers_balanced_probe(self):
        n = 64
        domain = Domain("periodic", TWO_PI)
        grid = TWO_PI * np.arange(n) / n
        povm = phase.pgm_grid_povm(phase.probe_plus_tensor(1), n)
        k = 4
        w = Window(k * (TWO_PI / n) + 1e-12)

        def kraus(t):
            return [np.diag([1.0, np.exp(-1j * t)])]

        probe, eta = bounds.probe_optimization_single_use(
            kraus, domain, grid, Prior.uniform(n), w, povm)
        balanced = np.full((2, 2), 0.5, dtype=complex)
        assert abs(np.trace(probe @ balanced).real - 1.0) <= 1e-9
        closed = phase.covariant_success_probability(phase.probe_plus_tensor(1),
                                                     k * TWO_PI / n)
        assert eta == pytest.approx(closed, abs=5e-3)

    def test_depolarizing_channel(self):
        n = 16
        domain = Domain("periodic", TWO_PI)
        grid = TWO_PI * np.arange(n) / n
        povm = PovmGrid.flat(n, 2, grid)
        k = 2
        w = Window(k * (TWO_PI / n) + 1e-12)
        kraus_ops = [0.5 * np.eye(2, dtype=complex),
                     0.5 * np.array([[0, 1], [1, 0]], dtype=complex),
                     0.5 * np.array([[0, -1j], [1j, 0]]),
                     0.5 * np.diag([1.0, -1.0]).astype(complex)]
        probe, eta = bounds.probe_optimization_single_use(
            lambda t: kraus_ops, domain, grid, Prior.uniform(n), w, povm,
            minimax=True)
        assert eta == pytest.approx(2 * k / n, abs=1e-12)

    def test_incomplete_kraus_rejected(self):
        n = 8
        domain = Domain("periodic", TWO_PI)
        grid = TWO_PI * np.arange(n) / n
        povm = PovmGrid.flat(n, 2, grid)
        with pytest.raises(KrausIncompleteError):
            bounds.probe_optimization_single_use(
                lambda t: [0.5 * np.eye(2, dtype=complex)], domain, grid,
                Prior.uniform(n), Window(grid[1] + 1e-12), povm)


class TestSampleComplexityBound:
    def test_eta_three_quarters_vanishes(self):
        fam = covariant_qubit(32)
        rep = bounds.two_point_sample_complexity_bound(fam, Window(2 * fam.step),
                                                       0.75)
        assert rep.value == 0.0

    def test_covariant_qubit_value(self):
        fam = covariant_qubit(64)
        k = 4
        rep = bounds.two_point_sample_complexity_bound(
            fam, Window(k * fam.step), 0.99)
        sep = (2 * k + 1) * fam.step
        expected = math.log(25.0) / (4.0 * (-math.log(math.cos(sep / 2.0))))
        assert rep.value == pytest.approx(expected, rel=1e-6)

    def test_below_sample_complexity(self):
        probe = phase.probe_plus_tensor(1)
        fam = phase.gridded_family(probe, 64)
        delta = 4 * fam.step
        rep = bounds.two_point_sample_complexity_bound(fam, Window(delta), 0.9)
        n_star = solver.sample_complexity(fam, 0.9, delta, 200, minimax=True)
        assert rep.value <= n_star


class TestBoundReportSerialization:
    def test_to_dict(self):
        fam = covariant_qubit(32)
        rep = bounds.two_point_upper_bound(fam, Window(2 * fam.step))
        d = rep.to_dict()
        assert set(d) == {"bound_name", "value", "witness"}
        assert "t" in d["witness"] and "t_prime" in d["witness"]
