"""Analytic bounds: binary discrimination, testing reductions, rate and
tolerance bounds, and the finite-sample Cramer-Rao-like bound."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    KrausIncompleteError,
    NoValidPairError,
    ShiftOverlapError,
    ZeroAcceptanceError,
)
from .families import (
    Domain,
    PovmGrid,
    Prior,
    StateFamily,
    Window,
    window_on_grid,
)
from .linalg import (
    chernoff_divergence,
    eigh,
    fidelity,
    hermitian_part,
    require_density,
    require_same_dim,
    sandwiched_renyi,
    trace_norm,
)
from .solver import SolverConfig, least_upper_bound

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TwoPointInstance:
    """Binary discrimination instance: states rho, sigma with prior weight p on rho."""

    rho: np.ndarray
    sigma: np.ndarray
    p: float

    def __post_init__(self) -> None:
        require_same_dim(np.asarray(self.rho), np.asarray(self.sigma))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("prior weight must lie in [0,1]")


@dataclass(frozen=True)
class BoundReport:
    """A named bound value with the grid witness that attains it."""

    bound_name: str
    value: float
    witness: dict

    def to_dict(self) -> dict:
        return {"bound_name": self.bound_name, "value": self.value,
                "witness": self.witness}


def helstrom(instance: TwoPointInstance) -> float:
    """Optimal binary success probability 1/2 + ||p rho - (1-p) sigma||_1 / 2."""
    rho = require_density(instance.rho)
    sigma = require_density(instance.sigma)
    return 0.5 + 0.5 * trace_norm(instance.p * rho - (1.0 - instance.p) * sigma)


def minimax_binary(rho: np.ndarray, sigma: np.ndarray,
                   p_tol: float = 1e-9) -> tuple[float, float]:
    """Minimax binary success probability min_p Helstrom(p) and the minimizer.

    The Bayesian value is convex in p (norm of an affine map), so
    golden-section search locates the equalizing prior.
    """
    golden = (math.sqrt(5.0) - 1.0) / 2.0

    def val(p: float) -> float:
        return 0.5 + 0.5 * trace_norm(p * rho - (1.0 - p) * sigma)

    a, b = 0.0, 1.0
    x1, x2 = b - golden * (b - a), a + golden * (b - a)
    f1, f2 = val(x1), val(x2)
    while b - a > p_tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - golden * (b - a)
            f1 = val(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + golden * (b - a)
            f2 = val(x2)
    p_star = x1 if f1 <= f2 else x2
    return min(f1, f2), p_star


def _valid_pairs(fam: StateFamily, delta: float) -> list[tuple[int, int, float]]:
    grid = fam.grid
    pairs = []
    for i in range(fam.n_points):
        for j in range(i + 1, fam.n_points):
            sep = fam.domain.separation(grid[i], grid[j])
            if sep > 2.0 * delta + 1e-12:
                pairs.append((i, j, sep))
    if not pairs:
        raise NoValidPairError(
            f"no grid pair is separated by more than {2 * delta:.6g}")
    return pairs


def two_point_upper_bound(fam: StateFamily, window: Window) -> BoundReport:
    """Upper bound on the minimax success probability from the hardest
    well-separated binary discrimination instance."""
    states = fam.require_states()
    best = math.inf
    witness = {}
    for i, j, _ in _valid_pairs(fam, window.delta):
        val, p_star = minimax_binary(states[i], states[j])
        if val < best:
            best = val
            witness = {"t": float(fam.grid[i]), "t_prime": float(fam.grid[j]),
                       "p": p_star}
    return BoundReport("two_point_upper", best, witness)


def fidelity_error_lower_bound(fam: StateFamily, window: Window) -> BoundReport:
    """Lower bound F^2/4 on the minimax error probability over valid pairs."""
    states = fam.require_states()
    best = -math.inf
    witness = {}
    for i, j, _ in _valid_pairs(fam, window.delta):
        f = fidelity(states[i], states[j])
        if f ** 2 / 4.0 > best:
            best = f ** 2 / 4.0
            witness = {"t": float(fam.grid[i]), "t_prime": float(fam.grid[j])}
    return BoundReport("fidelity_error_lower", best, witness)


def chernoff_rate_bound(fam: StateFamily, window: Window) -> BoundReport:
    """Upper bound on the asymptotic error rate: smallest Chernoff divergence
    between states more than one window diameter apart."""
    states = fam.require_states()
    best = math.inf
    witness = {}
    for i, j, _ in _valid_pairs(fam, window.delta):
        c = chernoff_divergence(states[i], states[j])
        if c < best:
            best = c
            witness = {"t": float(fam.grid[i]), "t_prime": float(fam.grid[j])}
    return BoundReport("chernoff_rate_upper", best, witness)


def multishift_ht_bound(fam: StateFamily, prior: Prior, window: Window,
                        shifts: Sequence[tuple[float, float]],
                        config: SolverConfig | None = None) -> float:
    """Upper bound on the Bayesian value from shift-discrimination.

    Every grid point spawns the hypothesis set {lambda_k mu(t+s_k) rho(t+s_k)};
    its optimal discrimination value is itself a small least-upper-bound
    program, and the bound integrates those values over the grid.
    """
    lams = np.array([s[0] for s in shifts], dtype=float)
    if abs(lams.sum() - 1.0) > 1e-9 or lams.min() < 0.0:
        raise ValueError("shift weights must be a probability vector")
    svals = [s[1] for s in shifts]
    for a in range(len(svals)):
        for b in range(a + 1, len(svals)):
            if fam.domain.separation(svals[a], svals[b]) <= 2.0 * window.delta:
                raise ShiftOverlapError(
                    f"shifts {svals[a]} and {svals[b]} are within one window diameter")
    states = fam.require_states()
    n = fam.n_points
    offsets = [int(round(s / fam.step)) for s in svals]
    total = 0.0
    for l in range(n):
        ops = []
        for lam, off in zip(lams, offsets):
            m = (l + off) % n if fam.domain.periodic else l + off
            if not fam.domain.periodic and not 0 <= m < n:
                continue
            if lam * prior.weights[m] > 0.0:
                ops.append(lam * prior.weights[m] * states[m])
        if not ops:
            continue
        if len(ops) == 1:
            total += float(np.trace(ops[0]).real)
            continue
        x, _, _, _ = least_upper_bound(np.array(ops), tol=1e-9, config=config)
        total += float(np.trace(x).real)
    return min(total, 1.0)


def beta_h(rho: np.ndarray, sigma: np.ndarray, eta: float,
           c_tol: float = 1e-12, boundary_rtol: float = 1e-9) -> float:
    """Optimal type-II error inf{Tr[M sigma] : Tr[M rho] >= eta, 0 <= M <= I}.

    Neyman-Pearson construction: bisect the threshold c in spectral tests on
    rho - c sigma, then put a common fractional weight on the boundary
    eigenvectors to meet the detection constraint exactly (an even split over
    a degenerate boundary attains the same objective as any other split).
    """
    rho = require_density(rho)
    sigma = require_density(sigma)
    require_same_dim(rho, sigma)
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0,1]")
    if eta == 0.0:
        return 0.0
    # rank-deficient sigma: kernel directions detect for free
    w_s = np.linalg.eigvalsh(sigma)
    if w_s.min() < 1e-13:
        sigma = hermitian_part(sigma + 1e-13 * np.eye(sigma.shape[0]))
        sigma = sigma / float(np.trace(sigma).real)

    def detection(c: float) -> float:
        dec = eigh(rho - c * sigma)
        keep = dec.eigenvalues >= 0.0
        if not np.any(keep):
            return 0.0
        v = dec.eigenvectors[:, keep]
        return float(np.real(np.trace(v.conj().T @ rho @ v)))

    c_lo, c_hi = 0.0, 1.0
    while detection(c_hi) >= eta and c_hi < 1e16:
        c_hi *= 4.0
    while c_hi - c_lo > c_tol * max(1.0, c_hi):
        mid = 0.5 * (c_lo + c_hi)
        if detection(mid) >= eta:
            c_lo = mid
        else:
            c_hi = mid
    c_star = c_lo
    dec = eigh(rho - c_star * sigma)
    # the crossing eigenvalue sits within the bisection resolution of zero,
    # so the boundary window must be absolute in the operator scale
    scale = 1.0 + c_star
    tau = max(boundary_rtol * scale, 10.0 * (c_hi - c_lo))
    strict = dec.eigenvalues > tau
    boundary = np.abs(dec.eigenvalues) <= tau
    r_diag = np.real(np.einsum("ia,ij,ja->a", dec.eigenvectors.conj(), rho,
                               dec.eigenvectors))
    s_diag = np.real(np.einsum("ia,ij,ja->a", dec.eigenvectors.conj(), sigma,
                               dec.eigenvectors))
    det_strict = float(r_diag[strict].sum())
    beta = float(s_diag[strict].sum())
    need = eta - det_strict
    if need > 0.0:
        bnd_r = float(r_diag[boundary].sum())
        if bnd_r > 0.0:
            gamma = min(1.0, need / bnd_r)
            beta += gamma * float(s_diag[boundary].sum())
    return max(0.0, beta)


def ht_tolerance_lower_bound(fam: StateFamily, eta: float,
                             sigma: np.ndarray) -> float:
    """Lower bound (1/2) int dt beta_h^eta(rho(t)||sigma) on the minimax
    tolerance; valid whenever eta does not exceed the achievable value."""
    states = fam.require_states()
    total = sum(beta_h(rho, sigma, eta) for rho in states)
    return 0.5 * fam.step * total


def two_point_sample_complexity_bound(fam: StateFamily, window: Window,
                                      eta: float) -> BoundReport:
    """Lower bound log(1/(4(1-eta))) / (4 min_pairs -log F) on the minimax
    sample complexity."""
    states = fam.require_states()
    best = math.inf
    witness = {}
    for i, j, _ in _valid_pairs(fam, window.delta):
        d = -math.log(max(fidelity(states[i], states[j]), 1e-300))
        if d < best:
            best = d
            witness = {"t": float(fam.grid[i]), "t_prime": float(fam.grid[j])}
    num = math.log(1.0 / (4.0 * (1.0 - eta))) if eta < 1.0 else math.inf
    if num <= 0.0:
        return BoundReport("two_point_sample_complexity", 0.0, witness)
    value = math.inf if best <= 0.0 else num / (4.0 * best)
    return BoundReport("two_point_sample_complexity", value, witness)


# ---------------------------------------------------------------------------
# Cramer-Rao-like tolerance bound
# ---------------------------------------------------------------------------

_STENCILS = {
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2, -1, 1, 2]), np.array([-0.5, 1.0, -1.0, 0.5])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
    5: (np.array([-3, -2, -1, 1, 2, 3]),
        np.array([-0.5, 2.0, -2.5, 2.5, -2.0, 0.5])),
    6: (np.array([-3, -2, -1, 0, 1, 2, 3]),
        np.array([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0])),
}


def _central_derivative(g: Callable[[float], float], order: int, h: float) -> float:
    offs, coeffs = _STENCILS[order]
    return sum(c * g(o * h) for o, c in zip(offs, coeffs)) / h ** order


def _richardson_derivative(g: Callable[[float], float], order: int,
                           h: float) -> float:
    # one Richardson pass removes the h^2 truncation term of the symmetric
    # stencils; the base step must be chosen for the resulting h^4 accuracy
    # (eps^(1/(order+4)) scale), otherwise the h/2 evaluation is noise-bound
    d1 = _central_derivative(g, order, h)
    d2 = _central_derivative(g, order, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


@dataclass
class CrBoundResult:
    """Taylor coefficients of -log(F)/2, the cumulant-ratio coefficient q,
    the bracket on the success-probability coefficient, and the bound."""

    f: np.ndarray                      # (n_t, pmax-1): orders 2..pmax
    q: float
    gamma_bracket: tuple[float, float]
    delta_lb: float
    vacuous: bool
    r_est: float | None
    radius_flag: bool
    exact_gamma: float | None = None


def covariant_fidelity_profile(probe) -> Callable[[float, float], float]:
    """F(rho(t), rho(t+tau)) = |sum_k a_k^2 e^{-i k tau}| for a covariant probe."""
    amps2 = np.asarray(probe.amps, dtype=float) ** 2
    levels = np.arange(len(amps2), dtype=float)

    def fid(_t: float, tau: float) -> float:
        return float(np.abs(np.sum(amps2 * np.exp(-1j * levels * tau))))

    return fid


def iid_profile(base: Callable[[float, float], float],
                n_copies: int) -> Callable[[float, float], float]:
    """Fidelity profile of n i.i.d. copies: F^n."""
    return lambda t, tau: base(t, tau) ** n_copies


def states_fidelity_profile(states_fn: Callable[[float], np.ndarray]):
    """Fidelity profile from a continuous state map t -> rho(t)."""
    return lambda t, tau: fidelity(states_fn(t), states_fn(t + tau))


def _lambert_w_minus1(x: float) -> float:
    """W_-1 branch of w e^w = x for x in (-1/e, 0), by bisection."""
    if not -1.0 / math.e <= x < 0.0:
        raise ValueError("argument outside (-1/e, 0)")
    # w e^w decreases from ~0- down to -1/e as w runs from -745 up to -1
    lo, hi = -745.0, -1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) > x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def exact_gamma(q: float, eta_bar: float) -> float:
    """Exact equality point of the bracket through the product logarithm."""
    a = 0.25 * math.log(1.0 / (4.0 * (1.0 - eta_bar)))
    if q <= 0.0:
        return math.sqrt(2.0 * a)
    u = a * q * q
    w = _lambert_w_minus1(-math.exp(-1.0 - u))
    return -(1.0 + u + w) / q


def cramer_rao_like_bound(fidelity_profile: Callable[[float, float], float],
                          t_grid: Iterable[float], eta_bar: float,
                          pmax: int = 5, tau_scale: float | None = None,
                          tau_max: float = math.pi) -> CrBoundResult:
    """Finite-sample tolerance lower bound Gamma / sqrt(min_t F(t)).

    Expands -log F(rho(t), rho(t+tau))/2 to order ``pmax`` by Richardson-
    extrapolated central differences; the second coefficient is one eighth of
    the Fisher information, higher ones control the coefficient q of the
    bracket containing Gamma.  A nonpositive lower bracket end makes the
    bound vacuous (reported, not raised).
    """
    if not eta_bar > 0.75:
        raise ValueError("the bound requires eta_bar > 3/4")
    if pmax < 4 or pmax > 6:
        raise ValueError("pmax must be 4, 5, or 6")
    t_grid = list(t_grid)
    log_l = math.log(1.0 / (4.0 * (1.0 - eta_bar)))

    rows = []
    for t in t_grid:
        def g(tau: float, _t=t) -> float:
            return -0.5 * math.log(max(fidelity_profile(_t, tau), 1e-300))

        if tau_scale is None:
            h0 = 1e-3 * tau_max
            f2_rough = max((g(h0) + g(-h0)) / h0 ** 2, 1e-12)
            scale = min(1.0 / math.sqrt(f2_rough), tau_max / 2.0)
        else:
            scale = tau_scale
        row = []
        for order in range(2, pmax + 1):
            h = _EPS ** (1.0 / (order + 4)) * scale
            row.append(_richardson_derivative(g, order, h))
        rows.append(row)
    f = np.asarray(rows)

    f2 = f[:, 0]
    if np.min(f2) <= 0.0:
        return CrBoundResult(f, math.inf, (0.0, math.sqrt(log_l)), 0.0, True,
                             None, False)
    q = 0.0
    for i in range(len(t_grid)):
        for order in range(3, pmax + 1):
            ratio = abs(f[i, order - 2]) / f2[i] ** (order / 2.0)
            q = max(q, ratio ** (1.0 / (order - 2)))
    gamma_hi = math.sqrt(log_l)
    gamma_lo = gamma_hi - q / (6.0 * math.sqrt(2.0)) * log_l
    vacuous = gamma_lo <= 0.0
    fisher_min = 8.0 * float(np.min(f2))
    delta_lb = 0.0 if vacuous else gamma_lo / math.sqrt(fisher_min)

    r_est = None
    for tau in np.linspace(tau_max / 400.0, tau_max, 400):
        if any(fidelity_profile(t, tau) <= 1e-12 for t in t_grid):
            r_est = float(tau)
            break
    radius_flag = r_est is not None and delta_lb > r_est
    gamma_exact = math.sqrt(2.0) * exact_gamma(q, eta_bar) if not vacuous else None
    return CrBoundResult(f, q, (gamma_lo, gamma_hi), delta_lb, vacuous,
                         r_est, radius_flag, gamma_exact)


def renyi_tolerance_asymptote(states_fn: Callable[[float], np.ndarray],
                              t_grid: Iterable[float], eta: float, alpha: float,
                              n_copies: int, h: float = 1e-3) -> float:
    """Leading-order minimax tolerance lower bound from the order-alpha
    divergence: eta^(alpha/(alpha-1))/2 * sqrt(2 pi / (alpha n I_alpha)).

    I_alpha is estimated from a second difference of the divergence; families
    where it diverges (pure states at alpha > 1) give the vacuous value 0.
    """
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    worst = math.inf
    for t in t_grid:
        rho0 = states_fn(t)
        d_plus = sandwiched_renyi(rho0, states_fn(t + h), alpha)
        d_minus = sandwiched_renyi(rho0, states_fn(t - h), alpha)
        if not (math.isfinite(d_plus) and math.isfinite(d_minus)):
            return 0.0
        info = (d_plus + d_minus) / (alpha * h * h)
        worst = min(worst, info)
    if not math.isfinite(worst) or worst <= 0.0:
        return 0.0
    return 0.5 * eta ** (alpha / (alpha - 1.0)) * math.sqrt(
        2.0 * math.pi / (alpha * n_copies * worst))


def small_eta_tolerance(fam: StateFamily, prior: Prior | None, povm: PovmGrid,
                        eta: float, minimax: bool = False) -> float:
    """Leading-order tolerance eta / (2 * on-diagonal acceptance density)."""
    states = fam.require_states()
    density = np.einsum("lij,lji->l", states, povm.effects).real / fam.step
    if minimax:
        base = float(density.min())
    else:
        weights = prior.weights if prior is not None else np.full(
            fam.n_points, 1.0 / fam.n_points)
        base = float(weights @ density)
    if base <= 1e-300:
        raise ZeroAcceptanceError("on-diagonal acceptance vanishes")
    return eta / (2.0 * base)


def probe_optimization_single_use(kraus_fn: Callable[[float], Sequence[np.ndarray]],
                                  domain: Domain, grid: np.ndarray,
                                  prior: Prior, window: Window, povm: PovmGrid,
                                  minimax: bool = False):
    """Best probe state for a fixed measurement on a parametrized channel.

    Assembles M = sum_l mu_l N^dag(t_l)[(w*Q)_l] (or the per-t operators in
    the minimax variant) and returns the top eigenvector as a pure probe
    together with its success probability.
    """
    n = len(grid)
    step = domain.T / n
    wg = window_on_grid(window, n, step, domain.periodic)
    from .families import smooth_over_grid

    smeared = smooth_over_grid(povm.effects, wg, domain.periodic)
    ops = []
    for l in range(n):
        ks = kraus_fn(float(grid[l]))
        total = sum(k.conj().T @ k for k in ks)
        if float(np.linalg.norm(total - np.eye(total.shape[0]), 2)) > 1e-9:
            raise KrausIncompleteError(f"Kraus completeness fails at t={grid[l]}")
        ops.append(hermitian_part(
            sum(k.conj().T @ smeared[l] @ k for k in ks)))
    if minimax:
        lambdas = [float(np.linalg.eigvalsh(m).max()) for m in ops]
        idx = int(np.argmin(lambdas))
        target, eta = ops[idx], lambdas[idx]
    else:
        target = hermitian_part(sum(w * m for w, m in zip(prior.weights, ops)))
        eta = float(np.linalg.eigvalsh(target).max())
    w, v = np.linalg.eigh(target)
    top = v[:, -1]
    probe = np.outer(top, top.conj())
    return probe, eta
