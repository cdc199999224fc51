"""Parametrized state families, priors, windows, and grid discretization.

Discretization conventions
--------------------------
A family lives on a uniform grid of ``N`` points with spacing ``step = T/N``:
``t_l = l*step`` on a periodic domain, ``t_l = (l + 1/2)*step`` on a bounded
interval (cell midpoints).  A rectangular window of radius ``delta`` is
snapped down to ``k = floor(delta/step)`` grid steps.  Grid cells at exactly
``k`` steps from the window center sit half inside the window, so they enter
window sums with weight 1/2; this keeps the discrete window measure equal to
``2*k*step`` exactly and makes translation-invariant quantities like the
random-guessing probability ``2*delta/T`` come out exact.

All container types are immutable after construction by convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    GridMismatchError,
    PeriodMismatchError,
    WindowTooCoarseError,
)
from .linalg import require_density, require_hermitian, trace_norm

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Window:
    """Symmetric rectangular acceptance window of radius ``delta``."""

    delta: float
    kind: str = "rectangular"

    def __post_init__(self) -> None:
        if self.kind != "rectangular":
            raise ValueError(f"unsupported window kind {self.kind!r}")
        if not self.delta > 0.0:
            raise ValueError("window radius must be positive")


def window_hat(window: Window, omega) -> np.ndarray | float:
    """Fourier transform sin(delta*omega)/(pi*omega) of the rectangular window."""
    if window.kind != "rectangular":
        raise ValueError(f"unsupported window kind {window.kind!r}")
    om = np.asarray(omega, dtype=float)
    out = np.where(om == 0.0, window.delta / np.pi,
                   np.sin(window.delta * om) / (np.pi * np.where(om == 0.0, 1.0, om)))
    if np.isscalar(omega) or om.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Domain:
    """Parameter domain: a period-``T`` circle or the closed interval [0, T]."""

    kind: str
    T: float

    def __post_init__(self) -> None:
        if self.kind not in ("periodic", "interval"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.T > 0.0:
            raise ValueError("domain length must be positive")

    @property
    def periodic(self) -> bool:
        return self.kind == "periodic"

    def separation(self, t1: float, t2: float) -> float:
        d = abs(t1 - t2)
        if self.periodic:
            d = min(d, self.T - d)
        return d


def _grid(domain: Domain, n_points: int) -> np.ndarray:
    step = domain.T / n_points
    if domain.periodic:
        return step * np.arange(n_points)
    return step * (np.arange(n_points) + 0.5)


@dataclass(frozen=True)
class Prior:
    """Probability masses on the grid cells; weights sum to one."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("prior weights must be a nonempty vector")
        if w.min() < -1e-15:
            raise ValueError("prior weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"prior weights sum to {w.sum():.15g}, expected 1")
        object.__setattr__(self, "weights", np.clip(w, 0.0, None))

    @classmethod
    def uniform(cls, n_points: int) -> "Prior":
        return cls(np.full(n_points, 1.0 / n_points))

    @classmethod
    def point_masses(cls, n_points: int, sites: dict[int, float]) -> "Prior":
        w = np.zeros(n_points)
        for idx, mass in sites.items():
            w[idx] += mass
        return cls(w)

    @classmethod
    def tabulated(cls, weights: Sequence[float], normalize: bool = False) -> "Prior":
        w = np.asarray(weights, dtype=float)
        if normalize:
            w = w / w.sum()
        return cls(w)


@dataclass
class StateFamily:
    """A one-parameter state family discretized onto a uniform grid.

    ``states`` may be ``None`` for covariant families handled in closed form
    (the Hamiltonian eigenvalues and probe amplitudes are then stored in
    ``h_eigenvalues`` / ``probe_amps``).
    """

    domain: Domain
    grid: np.ndarray
    states: np.ndarray | None
    lipschitz: float | None = None
    h_eigenvalues: np.ndarray | None = None
    probe_amps: np.ndarray | None = None

    @property
    def n_points(self) -> int:
        return len(self.grid)

    @property
    def step(self) -> float:
        return self.domain.T / self.n_points

    @property
    def dim(self) -> int:
        if self.states is not None:
            return self.states.shape[1]
        if self.probe_amps is not None:
            return len(self.probe_amps)
        raise ValueError("family has neither states nor covariant data")

    @property
    def covariant(self) -> bool:
        return (self.h_eigenvalues is not None and self.probe_amps is not None
                and self.domain.periodic)

    def require_states(self) -> np.ndarray:
        if self.states is None:
            raise ValueError("family states were not materialized")
        return self.states


@dataclass
class PovmGrid:
    """POVM effects indexed by grid predictions; effects sum to the identity."""

    effects: np.ndarray
    predictions: np.ndarray
    psd_atol: float = field(default=1e-8, repr=False)
    completeness_atol: float = field(default=1e-7, repr=False)

    def __post_init__(self) -> None:
        q = np.asarray(self.effects, dtype=complex)
        if q.ndim != 3 or q.shape[1] != q.shape[2]:
            raise ValueError("effects must be a stack of square matrices")
        if q.shape[0] != len(self.predictions):
            raise GridMismatchError("one effect per prediction required")
        wmin = min(float(np.linalg.eigvalsh(e).min()) for e in q)
        if wmin < -self.psd_atol:
            raise ValueError(f"effect with eigenvalue {wmin:.3e} below -{self.psd_atol}")
        total = q.sum(axis=0)
        defect = total - np.eye(q.shape[1])
        if float(np.linalg.norm(defect, 2)) > self.completeness_atol:
            raise ValueError("effects do not sum to the identity")
        self.effects = q

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @classmethod
    def flat(cls, n_points: int, dim: int, predictions: np.ndarray) -> "PovmGrid":
        eye = np.broadcast_to(np.eye(dim, dtype=complex) / n_points,
                              (n_points, dim, dim)).copy()
        return cls(eye, predictions)


@dataclass(frozen=True)
class WindowGrid:
    """Rectangular window resolved onto a grid: offsets and their weights."""

    k: int
    delta: float            # snapped radius k*step
    requested_delta: float
    offsets: np.ndarray     # -k..k
    weights: np.ndarray     # 1/2 at |offset| = k, 1 inside


def window_on_grid(window: Window, n_points: int, step: float,
                   periodic: bool) -> WindowGrid:
    """Snap a window down to an integer number of grid steps."""
    k = int(np.floor(window.delta / step + 1e-9))
    if k < 1:
        raise WindowTooCoarseError(
            f"window radius {window.delta} is below the grid step {step}")
    if periodic and 2 * k >= n_points:
        raise ValueError("window diameter must be smaller than the period")
    offsets = np.arange(-k, k + 1)
    weights = np.ones(2 * k + 1)
    weights[0] = weights[-1] = 0.5
    return WindowGrid(k, k * step, window.delta, offsets, weights)


def family_window(window: Window, fam: StateFamily) -> WindowGrid:
    return window_on_grid(window, fam.n_points, fam.step, fam.domain.periodic)


def smooth_over_grid(values: np.ndarray, wg: WindowGrid,
                     periodic: bool) -> np.ndarray:
    """Window sum sum_m w_{lm} values[m] along the first axis."""
    v = np.asarray(values)
    out = np.zeros_like(v, dtype=v.dtype if v.dtype.kind == "c" else float)
    n = v.shape[0]
    for off, wt in zip(wg.offsets, wg.weights):
        if periodic:
            out += wt * np.roll(v, -off, axis=0)
        else:
            src_lo, src_hi = max(0, off), min(n, n + off)
            dst_lo, dst_hi = max(0, -off), min(n, n - off)
            out[dst_lo:dst_hi] += wt * v[src_lo:src_hi]
    return out


def build_unitary_family(h_eigenvalues: Sequence[float], probe_amps: Sequence[float],
                         n_points: int, period: float = TWO_PI,
                         materialize: bool = True) -> StateFamily:
    """Pure family |psi(t)> = sum_k a_k exp(-i e_k t) |k> on a periodic grid."""
    eigs = np.asarray(h_eigenvalues, dtype=float)
    amps = np.asarray(probe_amps, dtype=float)
    if eigs.shape != amps.shape:
        raise ValueError("eigenvalue and amplitude vectors differ in length")
    cycles = (eigs - eigs[0]) * period / TWO_PI
    if np.max(np.abs(cycles - np.round(cycles))) > 1e-9:
        raise PeriodMismatchError(
            "eigenvalue differences are not commensurate with the period")
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError("probe amplitudes must have unit 2-norm")
    domain = Domain("periodic", period)
    grid = _grid(domain, n_points)
    states = None
    if materialize:
        phases = np.exp(-1j * np.outer(grid, eigs))    # (N, d)
        vecs = phases * amps
        states = np.einsum("li,lj->lij", vecs, vecs.conj())
    fam = StateFamily(domain, grid, states, None, eigs, amps)
    if materialize:
        fam.lipschitz = estimate_lipschitz(fam)
    return fam


def build_dephasing_family(omega: float, n_points: int, t_max: float,
                           periodic: bool = False) -> StateFamily:
    """Classical test fixture rho(t) = cos^2(wt/2) P+ + sin^2(wt/2) P-."""
    if not omega > 0.0:
        raise ValueError("omega must be positive")
    if periodic:
        cycles = t_max * omega / TWO_PI
        if abs(cycles - round(cycles)) > 1e-9 or round(cycles) < 1:
            raise PeriodMismatchError(
                "periodic dephasing domain must span whole periods 2*pi/omega")
    domain = Domain("periodic" if periodic else "interval", t_max)
    grid = _grid(domain, n_points)
    p_plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    p_minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
    c2 = np.cos(omega * grid / 2.0) ** 2
    states = c2[:, None, None] * p_plus + (1.0 - c2)[:, None, None] * p_minus
    fam = StateFamily(domain, grid, states)
    fam.lipschitz = estimate_lipschitz(fam)
    return fam


def family_from_states(domain: Domain, states: Sequence[np.ndarray],
                       lipschitz: float | None = None,
                       validate: bool = True) -> StateFamily:
    arr = np.asarray(states, dtype=complex)
    if validate:
        for rho in arr:
            require_density(rho)
    grid = _grid(domain, arr.shape[0])
    fam = StateFamily(domain, grid, arr, lipschitz)
    if lipschitz is None:
        fam.lipschitz = estimate_lipschitz(fam)
    return fam


def smear_family(fam: StateFamily, prior: Prior, window: Window) -> np.ndarray:
    """Window-smeared weighted states B_l = sum_m w_{lm} mu_m rho_m.

    These are the constraint operators of the dual program min Tr X subject
    to X >= B_l, and the per-prediction coefficients of the primal objective.
    """
    states = fam.require_states()
    if len(prior.weights) != fam.n_points:
        raise GridMismatchError("prior length does not match the grid")
    wg = family_window(window, fam)
    weighted = prior.weights[:, None, None] * states
    return smooth_over_grid(weighted, wg, fam.domain.periodic)


def estimate_lipschitz(fam: StateFamily) -> float:
    """max over adjacent grid pairs of ||rho(t+step) - rho(t)||_1 / step."""
    states = fam.require_states()
    n = fam.n_points
    if n < 2:
        raise ValueError("need at least two grid points")
    pairs = range(n) if fam.domain.periodic else range(n - 1)
    worst = 0.0
    for l in pairs:
        d = trace_norm(states[(l + 1) % n] - states[l])
        worst = max(worst, d / fam.step)
    return worst


@dataclass
class LikelihoodTable:
    """Outcome likelihoods, marginal, and posterior for a fixed measurement."""

    family: StateFamily
    prior: Prior
    labels: list
    likelihood: np.ndarray   # (n_outcomes, N), columns sum to 1
    marginal: np.ndarray     # (n_outcomes,)
    posterior: np.ndarray    # (n_outcomes, N), rows sum to 1 where marginal > 0


def make_likelihood_table(fam: StateFamily, prior: Prior,
                          effects: Sequence[np.ndarray],
                          labels: list | None = None) -> LikelihoodTable:
    """Tabulate L(outcome|t) = Tr[rho(t) M_outcome] and the Bayes posterior."""
    states = fam.require_states()
    ms = [require_hermitian(m, atol=1e-9) for m in effects]
    total = sum(ms)
    if float(np.linalg.norm(total - np.eye(fam.dim), 2)) > 1e-7:
        raise ValueError("measurement effects do not sum to the identity")
    if len(prior.weights) != fam.n_points:
        raise GridMismatchError("prior length does not match the grid")
    lik = np.array([[float(np.trace(rho @ m).real) for rho in states] for m in ms])
    lik = np.clip(lik, 0.0, None)
    col = lik.sum(axis=0)
    if np.max(np.abs(col - 1.0)) > 1e-9:
        raise ValueError("likelihood columns do not sum to 1")
    lik = lik / col
    marginal = lik @ prior.weights
    joint = lik * prior.weights
    posterior = np.zeros_like(joint)
    pos = marginal > 0.0
    posterior[pos] = joint[pos] / marginal[pos, None]
    if labels is None:
        labels = list(range(len(ms)))
    return LikelihoodTable(fam, prior, labels, lik, marginal, posterior)
