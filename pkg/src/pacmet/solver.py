"""POVM optimization: Bayesian and minimax success probabilities.

The Bayesian problem is solved through its dual "least upper bound" form

    minimize Tr X   subject to   X >= B_l  for all grid points l,

where B_l are the window-smeared weighted states.  The dual is attacked with
log-det barrier path following: for increasing t we Newton-minimize

    t Tr X - sum_l log det(X - B_l),

whose stationarity condition sum_l (X - B_l)^{-1} = t I defines the central
path.  The KKT system solved per Newton step is d^2 x d^2, independent of the
number of grid points.  At parameter t the duality gap certificate is
N*d / t, and a primal POVM is recovered from the barrier gradients as
Q_l = (X - B_l)^{-1} / t, then projected to exact completeness with
S^{-1/2} Q_l S^{-1/2}, S = sum_l Q_l.

The minimax value min_mu max_Q eta(mu, Q) is computed by entropic mirror
descent on the prior simplex; the subgradient at mu is the per-t acceptance
profile of the inner-optimal POVM.  Running best upper bounds (dual traces)
and lower bounds (worst-case acceptance of feasible POVMs, including the
averaged iterate) certify the returned value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatchError,
    SizeGuardError,
    SolverDivergedError,
    UnreachableTargetError,
)
from .families import (
    LikelihoodTable,
    PovmGrid,
    Prior,
    StateFamily,
    Window,
    family_window,
    smear_family,
    smooth_over_grid,
)
from .linalg import hermitian_part

SIZE_GUARD = 5_000_000          # dense-solve guard on d^2 * N
TENSOR_DIM_GUARD = 64           # largest materialized tensor-power dimension


@dataclass
class SolverConfig:
    """Barrier and mirror-descent knobs; defaults match the JSON interface."""

    tol: float = 1e-6
    t0: float = 1.0
    t_factor: float = 4.0
    max_newton: int = 50
    max_outer: int = 500
    newton_grad_rtol: float = 1e-10
    mirror_step: float = 2.0

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


@dataclass
class SdpSolution:
    eta_star: float
    povm: PovmGrid
    dual_x: np.ndarray
    duality_gap: float
    iterations: int
    history: list = field(default_factory=list, repr=False)


@dataclass
class MinimaxSolution:
    eta_bar_star: float
    povm: PovmGrid
    prior: Prior
    gap: float
    iterations: int


def _all_pd(stack: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(stack)
        return True
    except np.linalg.LinAlgError:
        return False


def least_upper_bound(operators: np.ndarray, tol: float = 1e-6,
                      config: SolverConfig | None = None,
                      x0: np.ndarray | None = None):
    """Solve min Tr X s.t. X >= B_l for PSD B_l; return (X, Q, newton_count, history).

    The recovered Q is a complete POVM-like stack with sum_l Tr[B_l Q_l]
    within ``tol`` of Tr X.
    """
    cfg = config or SolverConfig()
    b = np.asarray(operators, dtype=complex)
    n_ops, d, _ = b.shape
    if d * d * n_ops > SIZE_GUARD:
        raise SizeGuardError(f"d^2*N = {d * d * n_ops} exceeds {SIZE_GUARD}")
    eye = np.eye(d, dtype=complex)
    nu = n_ops * d

    lam_max = max(float(np.linalg.eigvalsh(op).max()) for op in b)
    x = (1.0 + max(lam_max, 0.0)) * eye
    if x0 is not None:
        margin = max(float(np.linalg.eigvalsh(op - x0).max()) for op in b)
        x = hermitian_part(x0 + (max(margin, 0.0) + 1e-9) * eye)

    t = cfg.t0
    newton_count = 0
    history: list[dict] = []
    for _ in range(200):
        x, inv, used = _center(x, b, t, cfg)
        newton_count += used
        q = inv / t
        q_proj = _project_complete(q)
        trace_x = float(np.trace(x).real)
        primal = float(np.einsum("lij,lji->", b, q_proj).real)
        history.append({"t": t, "trace_x": trace_x, "primal": primal})
        # honest certificate: primal is feasible, trace_x is dual feasible
        if trace_x - primal <= tol and nu / t <= tol:
            return x, q_proj, newton_count, history
        if t > 1e17:
            raise SolverDivergedError(
                f"gap {trace_x - primal:.3e} not closed within path budget")
        t *= cfg.t_factor
    raise SolverDivergedError("path-following step cap reached")


def _center(x: np.ndarray, b: np.ndarray, t: float, cfg: SolverConfig):
    """Newton-minimize t Tr X - sum_l log det(X - B_l) from a feasible X.

    Exits at the gradient target or at the numerical noise floor, whichever
    comes first; conditioning of the Newton system grows with t, so at large
    t the floor is what terminates.
    """
    d = x.shape[0]
    eye = np.eye(d, dtype=complex)
    target = max(1e-12, cfg.newton_grad_rtol * t)
    best_gnorm = math.inf
    best: tuple[np.ndarray, np.ndarray] | None = None
    stall = 0
    used = 0
    prev_gnorm = math.inf
    undamped = False
    for _ in range(cfg.max_newton):
        res = x[None, :, :] - b
        inv = np.linalg.inv(res)
        inv = (inv + inv.conj().transpose(0, 2, 1)) / 2.0
        grad = t * eye - inv.sum(axis=0)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < best_gnorm:
            best_gnorm, best = gnorm, (x, inv)
        # a noise floor shows as undamped steps that stop shrinking the gradient
        if undamped:
            stall = stall + 1 if gnorm >= 0.9 * prev_gnorm else 0
        prev_gnorm = gnorm
        if gnorm <= target or stall >= 3:
            break
        hess = np.einsum("lik,ljm->ijkm", inv.conj(), inv).reshape(d * d, d * d)
        rhs = -grad.flatten(order="F")
        try:
            step = np.linalg.solve(hess, rhs).reshape(d, d, order="F")
        except np.linalg.LinAlgError as exc:
            raise SolverDivergedError("singular Newton system") from exc
        step = hermitian_part(step)
        alpha = 1.0
        while alpha > 1e-14 and not _all_pd(x + alpha * step - b):
            alpha *= 0.5
        if alpha <= 1e-14:
            raise SolverDivergedError("line search failed")
        undamped = alpha == 1.0
        x = hermitian_part(x + alpha * step)
        used += 1
    # best-effort: the caller's primal/dual gap certificate carries correctness
    assert best is not None
    return best[0], best[1], used


def _project_complete(q: np.ndarray) -> np.ndarray:
    """Symmetric normalization S^{-1/2} Q_l S^{-1/2} so effects sum to I."""
    s = q.sum(axis=0)
    w, v = np.linalg.eigh(s)
    s_isqrt = (v / np.sqrt(w)) @ v.conj().T
    out = np.einsum("ab,lbc,cd->lad", s_isqrt, q, s_isqrt)
    return (out + out.conj().transpose(0, 2, 1)) / 2.0


def acceptance_profile(fam: StateFamily, window: Window, povm: PovmGrid) -> np.ndarray:
    """Per-grid-point acceptance a_l = sum_m w_{lm} Tr[rho_l Q_m]."""
    states = fam.require_states()
    if povm.effects.shape[0] != fam.n_points:
        raise GridMismatchError("POVM grid size does not match the family")
    if povm.dim != fam.dim:
        raise GridMismatchError("POVM dimension does not match the family")
    wg = family_window(window, fam)
    smoothed = smooth_over_grid(povm.effects, wg, fam.domain.periodic)
    return np.einsum("lij,lji->l", states, smoothed).real


def success_probability(fam: StateFamily, prior: Prior, window: Window,
                        povm: PovmGrid) -> float:
    """Bayesian success probability of a grid POVM."""
    if len(prior.weights) != fam.n_points:
        raise GridMismatchError("prior length does not match the grid")
    value = float(prior.weights @ acceptance_profile(fam, window, povm))
    if not -1e-9 <= value <= 1.0 + 1e-9:
        raise ValueError(f"success probability {value} outside [0,1]")
    return min(max(value, 0.0), 1.0)


def minimax_success_probability(fam: StateFamily, window: Window, povm: PovmGrid,
                                interior: bool = False) -> float:
    """Worst-case acceptance over the grid.

    On bounded domains window truncation depresses the boundary values; with
    ``interior=True`` the minimum is taken over points at least one window
    radius away from the boundary.
    """
    profile = acceptance_profile(fam, window, povm)
    if interior and not fam.domain.periodic:
        wg = family_window(window, fam)
        if fam.n_points > 2 * wg.k:
            profile = profile[wg.k:fam.n_points - wg.k]
    return float(profile.min())


def solve_bayesian_sdp(fam: StateFamily, prior: Prior, window: Window,
                       tol: float | None = None,
                       config: SolverConfig | None = None,
                       x0: np.ndarray | None = None) -> SdpSolution:
    """Optimal Bayesian success probability and POVM for a discretized family."""
    cfg = config or SolverConfig()
    tol = cfg.tol if tol is None else tol
    b = smear_family(fam, prior, window)
    x, q, iters, history = least_upper_bound(b, tol=tol, config=cfg, x0=x0)
    povm = PovmGrid(q, fam.grid)
    eta = float(np.einsum("lij,lji->", b, q).real)
    gap = float(np.trace(x).real) - eta
    return SdpSolution(eta, povm, x, gap, iters, history)


def solve_minimax_sdp(fam: StateFamily, window: Window,
                      tol: float | None = None,
                      config: SolverConfig | None = None,
                      method: str = "barrier") -> MinimaxSolution:
    """Minimax success probability with a certified duality gap.

    The default engine path-follows the joint dual program over the bound
    operator and the prior simultaneously (the least-favorable prior is the
    program's dual variable and comes out of the central path).  An entropic
    mirror-descent outer loop over priors is kept as ``method="mirror"``;
    it certifies gaps of order 1e-2..1e-3 on asymmetric fixtures, which is
    why it is not the default.

    Either way the returned value is the certified lower bound (worst-case
    acceptance of the returned POVM) and ``gap`` is the distance to the best
    dual upper bound.
    """
    cfg = config or SolverConfig()
    tol = cfg.tol if tol is None else tol
    if method == "barrier":
        return _minimax_barrier(fam, window, tol, cfg)
    if method != "mirror":
        raise ValueError(f"unknown method {method!r}")
    n = fam.n_points
    mu = np.full(n, 1.0 / n)

    best_lb = -math.inf
    best_ub = math.inf
    best_q: np.ndarray | None = None
    best_mu = mu.copy()
    q_sum: np.ndarray | None = None
    x_warm: np.ndarray | None = None
    iterations = 0

    for k in range(1, cfg.max_outer + 1):
        iterations = k
        b = smear_family(fam, Prior(mu), window)
        x, q, _, _ = least_upper_bound(b, tol=tol, config=cfg, x0=x_warm)
        x_warm = x
        profile = acceptance_profile(fam, window, PovmGrid(q, fam.grid))
        ub = float(np.trace(x).real)
        if ub < best_ub:
            best_ub = ub
            best_mu = mu.copy()
        lb = float(profile.min())
        if lb > best_lb:
            best_lb, best_q = lb, q

        q_sum = q if q_sum is None else q_sum + q
        if k > 1:
            q_avg = _project_complete(q_sum / k)
            avg_profile = acceptance_profile(fam, window, PovmGrid(q_avg, fam.grid))
            avg_lb = float(avg_profile.min())
            if avg_lb > best_lb:
                best_lb, best_q = avg_lb, q_avg

        if best_ub - best_lb <= tol:
            break
        support = mu > 1e-8 * mu.max()
        if float(profile[support].max() - profile[support].min()) <= tol:
            break
        step = cfg.mirror_step / math.sqrt(k)
        mu = mu * np.exp(-step * (profile - profile.mean()))
        mu = np.clip(mu, 1e-300, None)
        mu = mu / mu.sum()

    assert best_q is not None
    return MinimaxSolution(best_lb, PovmGrid(best_q, fam.grid), Prior(best_mu),
                           max(best_ub - best_lb, 0.0), iterations)


def _hermitian_basis_matrix(d: int) -> np.ndarray:
    """Columns are column-stacked vecs of an orthonormal Hermitian basis."""
    cols = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        cols.append(e.flatten(order="F"))
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = inv_sqrt2
            cols.append(e.flatten(order="F"))
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1j * inv_sqrt2
            e[j, i] = -1j * inv_sqrt2
            cols.append(e.flatten(order="F"))
    return np.stack(cols, axis=1)


def _minimax_barrier(fam: StateFamily, window: Window, tol: float,
                     cfg: SolverConfig) -> MinimaxSolution:
    """Path-following on the joint dual: min Tr X over X >= B_l(mu), mu in
    the simplex, with B_l(mu) the window smear of the mu-weighted states.

    The prior is a program variable; the barrier adds -sum log mu. Newton
    runs on (X, mu) with the simplex equality handled through a bordered
    KKT system.  The recovered POVM Q_l = (X - B_l)^{-1}/t certifies the
    returned lower bound, Tr X the upper bound.
    """
    states = fam.require_states()
    n, d = fam.n_points, fam.dim
    if d * d * n > SIZE_GUARD:
        raise SizeGuardError(f"d^2*N = {d * d * n} exceeds {SIZE_GUARD}")
    wg = family_window(window, fam)
    periodic = fam.domain.periodic
    eye = np.eye(d, dtype=complex)
    u_basis = _hermitian_basis_matrix(d)
    dd = d * d
    nu = n * d + n

    def smear_mu(mu: np.ndarray) -> np.ndarray:
        return smooth_over_grid(mu[:, None, None] * states, wg, periodic)

    def vec_h(mats: np.ndarray) -> np.ndarray:
        if mats.ndim == 3:
            flat = np.stack([m.flatten(order="F") for m in mats], axis=0)
            return np.real(flat @ u_basis.conj())
        return np.real(u_basis.conj().T @ mats.flatten(order="F"))

    mu = np.full(n, 1.0 / n)
    b = smear_mu(mu)
    lam_max = max(float(np.linalg.eigvalsh(op).max()) for op in b)
    x = (1.0 + max(lam_max, 0.0)) * eye

    t = cfg.t0
    best_lb = -math.inf
    best_ub = math.inf
    best_q: np.ndarray | None = None
    for path_step in range(1, 201):
        prev_dec = math.inf
        stall = 0
        inv = None
        for _ in range(cfg.max_newton):
            b = smear_mu(mu)
            inv = np.linalg.inv(x[None, :, :] - b)
            inv = (inv + inv.conj().transpose(0, 2, 1)) / 2.0
            # gradients
            g_x_mat = t * eye - inv.sum(axis=0)
            inv_sm = smooth_over_grid(inv, wg, periodic)      # sum_l w_lm A_l
            g_mu = np.einsum("mij,mji->m", inv_sm, states).real - 1.0 / mu
            # Hessian blocks
            m_c = np.einsum("lik,ljm->ijkm", inv.conj(), inv).reshape(dd, dd)
            h_xx = np.real(u_basis.conj().T @ m_c @ u_basis)
            g_ops = np.zeros((n, d, d), dtype=complex)
            for off, wt in zip(wg.offsets, wg.weights):
                if periodic:
                    a_sh = np.roll(inv, off, axis=0)
                    g_ops += wt * np.einsum("mab,mbc,mcd->mad", a_sh, states, a_sh)
                else:
                    lo, hi = max(0, -off), min(n, n - off)
                    a_sh = inv[lo + off:hi + off]
                    g_ops[lo:hi] += wt * np.einsum("mab,mbc,mcd->mad", a_sh,
                                                   states[lo:hi], a_sh)
            h_xmu = -vec_h(g_ops).T                           # (dd, n)
            h_mumu = np.zeros((n, n))
            for l in range(n):
                if periodic:
                    members = (l + wg.offsets) % n
                    wts = wg.weights
                else:
                    raw = l + wg.offsets
                    ok = (raw >= 0) & (raw < n)
                    members = raw[ok]
                    wts = wg.weights[ok]
                c_mats = np.einsum("ab,mbc->mac", inv[l], states[members])
                p = np.einsum("aij,bji->ab", c_mats, c_mats).real
                h_mumu[np.ix_(members, members)] += np.outer(wts, wts) * p
            h_mumu[np.diag_indices(n)] += 1.0 / mu ** 2
            # bordered KKT system with the simplex equality
            size = dd + n + 1
            kkt = np.zeros((size, size))
            kkt[:dd, :dd] = h_xx
            kkt[:dd, dd:dd + n] = h_xmu
            kkt[dd:dd + n, :dd] = h_xmu.T
            kkt[dd:dd + n, dd:dd + n] = h_mumu
            kkt[dd:dd + n, -1] = 1.0
            kkt[-1, dd:dd + n] = 1.0
            rhs = np.zeros(size)
            g_x = vec_h(g_x_mat)
            rhs[:dd] = -g_x
            rhs[dd:dd + n] = -g_mu
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError as exc:
                raise SolverDivergedError("singular minimax KKT system") from exc
            dx = (u_basis @ sol[:dd]).reshape(d, d, order="F")
            dx = hermitian_part(dx)
            dmu = sol[dd:dd + n]
            dmu = dmu - dmu.mean()     # exact simplex tangent despite KKT noise
            decrement = -(g_x @ sol[:dd] + g_mu @ dmu)
            if decrement <= 1e-13 * max(1.0, t):
                break
            # only a genuine noise floor keeps the decrement from shrinking
            if decrement >= 0.95 * prev_dec:
                stall += 1
                if stall >= 4:
                    break
            else:
                stall = 0
            prev_dec = decrement
            # line search: mu positivity first, then matrix feasibility
            alpha = 1.0
            neg = dmu < 0
            if np.any(neg):
                alpha = min(alpha, 0.99 * float(np.min(-mu[neg] / dmu[neg])))
            while alpha > 1e-14:
                mu_try = mu + alpha * dmu
                if mu_try.min() > 0.0 and _all_pd(
                        (x + alpha * dx)[None, :, :] - smear_mu(mu_try)):
                    break
                alpha *= 0.5
            if alpha <= 1e-14:
                break    # direction at the numerical floor; keep the iterate
            x_new = hermitian_part(x + alpha * dx)
            mu_new = mu + alpha * dmu
            mu_new = mu_new / mu_new.sum()
            if not _all_pd(x_new[None, :, :] - smear_mu(mu_new)):
                break    # KKT noise broke feasibility; keep the iterate
            x, mu = x_new, mu_new
        inv = np.linalg.inv(x[None, :, :] - smear_mu(mu))
        inv = (inv + inv.conj().transpose(0, 2, 1)) / 2.0
        q_proj = _project_complete(inv / t)
        profile = acceptance_profile(fam, window, PovmGrid(q_proj, fam.grid))
        lb = float(profile.min())
        if lb > best_lb:
            best_lb, best_q = lb, q_proj
        best_ub = min(best_ub, float(np.trace(x).real))
        gap = max(best_ub - best_lb, 0.0)
        # ub and lb are both feasible certificates, so the gap alone decides
        if gap <= tol:
            break
        if t > 1e17:
            raise SolverDivergedError(
                f"minimax gap {gap:.3e} not closed within path budget")
        t *= cfg.t_factor
    else:
        raise SolverDivergedError("minimax path-following step cap reached")
    assert best_q is not None
    return MinimaxSolution(best_lb, PovmGrid(best_q, fam.grid), Prior(mu.copy()),
                           gap, path_step)


@dataclass
class PostProcessing:
    """A prediction strategy outcome -> grid point and its guaranteed value."""

    indices: np.ndarray
    times: np.ndarray
    value: float


def smap_postprocess(table: LikelihoodTable, window: Window) -> PostProcessing:
    """Smoothed maximum a posteriori prediction for a fixed measurement.

    Predicts the grid point maximizing the window-smoothed posterior; ties
    break toward the smallest index.  The returned value is the Bayesian
    success probability, optimal among all post-processings.
    """
    fam = table.family
    wg = family_window(window, fam)
    smoothed = smooth_over_grid(table.posterior.T, wg, fam.domain.periodic).T
    indices = np.argmax(smoothed, axis=1)
    eta = float(np.sum(table.marginal * smoothed[np.arange(len(indices)), indices]))
    return PostProcessing(indices, fam.grid[indices], eta)


def smcl_postprocess(table: LikelihoodTable, window: Window) -> PostProcessing:
    """Smoothed minimax complementary likelihood prediction.

    Each outcome predicts the window position leaving the least likelihood
    weight outside; the returned value is a guaranteed lower bound on the
    minimax success probability of the induced POVM.
    """
    fam = table.family
    wg = family_window(window, fam)
    n = fam.n_points
    complement = np.ones((n, n))
    for off, wt in zip(wg.offsets, wg.weights):
        if fam.domain.periodic:
            idx = (np.arange(n) + off) % n
            complement[np.arange(n), idx] -= wt
        else:
            m = np.arange(n) + off
            ok = (m >= 0) & (m < n)
            complement[np.arange(n)[ok], m[ok]] -= wt
    indices = np.zeros(len(table.labels), dtype=int)
    err = 0.0
    for o in range(len(table.labels)):
        worst = np.max(complement * table.likelihood[o][None, :], axis=1)
        indices[o] = int(np.argmin(worst))
        err += float(worst[indices[o]])
    return PostProcessing(indices, fam.grid[indices], 1.0 - err)


def _covariant_eta(fam: StateFamily, delta: float) -> float:
    from . import phase

    probe = phase.ProbeSpectrum.from_amplitudes(fam.probe_amps)
    return phase.covariant_success_probability(probe, delta)


def _uniformish(prior: Prior | None, n: int) -> bool:
    if prior is None:
        return True
    return bool(np.max(np.abs(prior.weights - 1.0 / n)) <= 1e-12)


def _eta_at_radius(fam: StateFamily, k: int, minimax: bool, prior: Prior | None,
                   tol: float, config: SolverConfig | None) -> float:
    window = Window((k + 0.5) * fam.step * (1 - 1e-12))  # snaps down to k steps
    if fam.covariant and (minimax or _uniformish(prior, fam.n_points)):
        return _covariant_eta(fam, k * fam.step)
    if minimax:
        return solve_minimax_sdp(fam, window, tol=tol, config=config).eta_bar_star
    pr = prior if prior is not None else Prior.uniform(fam.n_points)
    return solve_bayesian_sdp(fam, pr, window, tol=tol, config=config).eta_star


def optimal_tolerance(fam: StateFamily, eta_target: float, minimax: bool = False,
                      prior: Prior | None = None,
                      delta_bracket: tuple[float, float] | None = None,
                      tol: float = 1e-6,
                      config: SolverConfig | None = None) -> float:
    """Smallest grid-representable window radius with eta >= eta_target.

    Bisection over integer window radii; the acceptance is monotone in the
    radius because window weights grow pointwise.
    """
    if eta_target <= 0.0:
        return 0.0
    if fam.domain.periodic:
        k_max = (fam.n_points - 1) // 2
    else:
        k_max = fam.n_points // 2
    k_lo = 1
    if delta_bracket is not None:
        k_lo = max(1, int(np.floor(delta_bracket[0] / fam.step + 1e-9)))
        k_max = min(k_max, int(np.floor(delta_bracket[1] / fam.step + 1e-9)))
    if _eta_at_radius(fam, k_max, minimax, prior, tol, config) < eta_target:
        raise UnreachableTargetError(
            f"eta({k_max * fam.step:.6g}) below target {eta_target}")
    if _eta_at_radius(fam, k_lo, minimax, prior, tol, config) >= eta_target:
        return k_lo * fam.step
    lo, hi = k_lo, k_max   # eta(lo) < target <= eta(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _eta_at_radius(fam, mid, minimax, prior, tol, config) >= eta_target:
            hi = mid
        else:
            lo = mid
    return hi * fam.step


def tensor_power_family(fam: StateFamily, n_copies: int) -> StateFamily:
    """Materialize rho(t)^{tensor n} on the same grid (dimension guard applies)."""
    states = fam.require_states()
    if fam.dim ** n_copies > TENSOR_DIM_GUARD:
        raise SizeGuardError(
            f"dim^n = {fam.dim ** n_copies} exceeds {TENSOR_DIM_GUARD}")
    out = states
    for _ in range(n_copies - 1):
        out = np.einsum("lij,lkm->likjm", out, states).reshape(
            fam.n_points, out.shape[1] * fam.dim, out.shape[1] * fam.dim)
    lip = None if fam.lipschitz is None else n_copies * fam.lipschitz
    return StateFamily(fam.domain, fam.grid, out, lip)


def sample_complexity(fam: StateFamily, eta_target: float, delta: float,
                      n_max: int, minimax: bool = False,
                      prior: Prior | None = None, tol: float = 1e-6,
                      config: SolverConfig | None = None) -> float:
    """Smallest n with eta*(delta, rho^(x n)) >= eta_target, or +inf.

    Covariant families go through the closed form (the n-copy probe spectrum
    is the n-fold convolution of the squared amplitudes); everything else
    materializes tensor powers up to the dimension guard.
    """
    window = Window(delta)
    covariant_path = fam.covariant and (minimax or _uniformish(prior, fam.n_points))
    from . import phase

    for n in range(1, n_max + 1):
        if covariant_path:
            probe_n = phase.convolve_probe(
                phase.ProbeSpectrum.from_amplitudes(fam.probe_amps), n)
            snapped = np.floor(delta / fam.step + 1e-9) * fam.step
            eta = phase.covariant_success_probability(probe_n, snapped)
        else:
            fam_n = tensor_power_family(fam, n)
            if minimax:
                eta = solve_minimax_sdp(fam_n, window, tol=tol, config=config).eta_bar_star
            else:
                pr = prior if prior is not None else Prior.uniform(fam.n_points)
                eta = solve_bayesian_sdp(fam_n, pr, window, tol=tol, config=config).eta_star
        if eta >= eta_target:
            return n
    return math.inf


def subdivision_bound(fam: StateFamily, prior: Prior, window: Window,
                      t_sub: float, tol: float = 1e-6,
                      config: SolverConfig | None = None) -> float:
    """Upper bound on the Bayesian value from prior restriction to subintervals.

    Restricts the prior to every grid-centered interval of length ``t_sub``
    and returns the largest restricted optimum.
    """
    if t_sub < 2 * window.delta:
        raise ValueError("subinterval must be at least one window diameter")
    if t_sub >= fam.domain.T:
        return solve_bayesian_sdp(fam, prior, window, tol=tol, config=config).eta_star
    best = -math.inf
    for c in range(fam.n_points):
        sep = np.array([fam.domain.separation(t, fam.grid[c]) for t in fam.grid])
        # boundary cells of the restriction sit half inside, as in window sums
        coeff = np.where(sep <= t_sub / 2.0 - 1e-12, 1.0,
                         np.where(np.abs(sep - t_sub / 2.0) <= 1e-12, 0.5, 0.0))
        mass = float((coeff * prior.weights).sum())
        if mass <= 0.0:
            continue
        restricted = coeff * prior.weights / mass
        val = solve_bayesian_sdp(fam, Prior(restricted), window,
                                 tol=tol, config=config).eta_star
        best = max(best, val)
    return best


def conditional_min_entropy_check(solution: SdpSolution,
                                  atol: float = 1e-6) -> float:
    """-log eta* and a consistency check against the dual trace.

    The identity holds exactly at zero duality gap; at finite gap the
    discrepancy is bounded by gap/eta, which the check allows for.
    """
    h_min = -math.log(solution.eta_star)
    dual = -math.log(float(np.trace(solution.dual_x).real))
    slack = max(atol, 2.0 * solution.duality_gap / max(solution.eta_star, 1e-300))
    if abs(h_min - dual) > slack:
        raise AssertionError(
            f"-log eta = {h_min:.12g} vs -log Tr X = {dual:.12g} beyond {slack:.3g}")
    return h_min


def povm_density_lipschitz(povm: PovmGrid, step: float) -> float:
    """Post-hoc operator-norm Lipschitz estimate of the POVM density Q/step."""
    q = povm.effects
    diffs = q[1:] - q[:-1]
    worst = max((float(np.linalg.norm(d, 2)) for d in diffs), default=0.0)
    wrap = float(np.linalg.norm(q[0] - q[-1], 2))
    return max(worst, wrap) / step ** 2
