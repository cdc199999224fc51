"""Covariant phase estimation in closed form.

For a pure probe evolving under a Hamiltonian with integer eigenvalues
0..n over a 2*pi period, the minimax-optimal measurement is the square-root
(pretty good) measurement and the optimal worst-case success probability is
the quadratic form <a, W a> of the nonnegative amplitude vector with the
prolate matrix W[i,j] = what_delta(i-j).  The best probe is the top
eigenvector of W, computed through the commuting Slepian tridiagonal matrix,
whose positive off-diagonal entries make the top eigenvector strictly
positive (Perron-Frobenius).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, i0

from . import precision
from .errors import DeltaRangeError, PositivityViolationError, SaturatedError
from .families import PovmGrid, StateFamily, Window, build_unitary_family, window_hat

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProbeSpectrum:
    """Nonnegative amplitudes over integer Hamiltonian levels 0..n, unit 2-norm."""

    n: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amps, dtype=float)
        if a.ndim != 1 or len(a) != self.n + 1:
            raise ValueError("amplitude vector must have length n+1")
        if a.min() < 0.0:
            raise ValueError("amplitudes must be nonnegative")
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError("amplitudes must have unit 2-norm")
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_amplitudes(cls, amps) -> "ProbeSpectrum":
        a = np.clip(np.asarray(amps, dtype=float), 0.0, None)
        return cls(len(a) - 1, a / np.linalg.norm(a))


def probe_ghz(n: int) -> ProbeSpectrum:
    """1/sqrt(2) on the extreme levels 0 and n."""
    a = np.zeros(n + 1)
    a[0] = a[n] = 1.0
    return ProbeSpectrum.from_amplitudes(a)


def probe_plus_tensor(n: int) -> ProbeSpectrum:
    """Binomial amplitudes sqrt(C(n,k))/2^(n/2) of an i.i.d. balanced probe."""
    k = np.arange(n + 1)
    log_amp = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
                     - n * math.log(2.0))
    return ProbeSpectrum.from_amplitudes(np.exp(log_amp))


def probe_hb(n: int) -> ProbeSpectrum:
    """Uniform superposition over all n+1 levels."""
    return ProbeSpectrum.from_amplitudes(np.ones(n + 1))


def probe_gaussian(n: int, delta: float) -> ProbeSpectrum:
    """Gaussian amplitude profile with variance (n+1)/(2 delta) around n/2."""
    if not delta > 0.0:
        raise DeltaRangeError("gaussian probe needs delta > 0")
    k = np.arange(n + 1)
    return ProbeSpectrum.from_amplitudes(
        np.exp(-(delta / (n + 1.0)) * (k - n / 2.0) ** 2))


def prolate_matrix(n: int, delta: float) -> np.ndarray:
    """Toeplitz matrix W[i,j] = sin(delta (i-j)) / (pi (i-j)), diag delta/pi."""
    w = Window(delta)
    offs = np.arange(-(n), n + 1)
    vals = window_hat(w, offs)
    idx = np.subtract.outer(np.arange(n + 1), np.arange(n + 1))
    return np.asarray(vals)[idx + n]


def slepian_tridiagonal(n: int, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Commuting tridiagonal matrix: diagonal (n/2-k)^2 cos(delta), off-diagonal
    (k+1)(n-k)/2 between levels k and k+1."""
    k = np.arange(n + 1)
    diag = (n / 2.0 - k) ** 2 * math.cos(delta)
    off = (k[:-1] + 1.0) * (n - k[:-1]) / 2.0
    return diag, off


def _check_delta(delta: float, hi: float) -> None:
    if not 0.0 < delta < hi:
        raise DeltaRangeError(f"delta = {delta} outside (0, {hi:.6g})")


def covariant_success_probability(probe: ProbeSpectrum, delta: float) -> float:
    """<a, W a>: the optimal minimax success probability of the probe."""
    _check_delta(delta, np.pi)
    a = probe.amps
    support = np.flatnonzero(a > 0.0)
    w = Window(delta)
    diffs = np.subtract.outer(support, support)
    vals = np.asarray(window_hat(w, diffs.astype(float)))
    eta = float(a[support] @ vals @ a[support])
    return min(eta, 1.0)


def covariant_log_error(probe: ProbeSpectrum, delta: float,
                        dps: int | None = None) -> float:
    """-log(1 - eta) evaluated in extended precision."""
    _check_delta(delta, np.pi)
    return precision.log_error_probability(probe.amps, delta, dps=dps)


def optimal_probe(n: int, delta: float) -> tuple[ProbeSpectrum, float]:
    """Best probe spectrum (top prolate eigenvector) and its success probability.

    Computed from the Slepian tridiagonal matrix, which shares eigenvectors
    with the ill-conditioned prolate matrix but has well-separated top
    eigenvalues.
    """
    _check_delta(delta, np.pi / 2.0)
    if n == 0:
        return ProbeSpectrum(0, np.ones(1)), delta / np.pi
    diag, off = slepian_tridiagonal(n, delta)
    _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(n, n))
    v = vecs[:, 0]
    if v.sum() < 0.0:
        v = -v
    if v.min() < -1e-8:
        raise PositivityViolationError(
            f"top eigenvector entry {v.min():.3e} significantly negative")
    probe = ProbeSpectrum.from_amplitudes(np.clip(v, 0.0, None))
    return probe, covariant_success_probability(probe, delta)


def dpss_bessel_approx(n: int, delta: float) -> ProbeSpectrum:
    """Zeroth-order Bessel approximation to the optimal probe spectrum."""
    _check_delta(delta, np.pi / 2.0)
    if n == 0:
        return ProbeSpectrum(0, np.ones(1))
    k = np.arange(n + 1)
    arg = 1.0 - ((2.0 * k + 1.0) / (n + 1.0) - 1.0) ** 2
    a = i0(0.5 * delta * n * np.sqrt(np.clip(arg, 0.0, None)))
    return ProbeSpectrum.from_amplitudes(a)


def _bisect_delta(eta_of_delta, eta_target: float, xtol: float = 1e-9) -> float:
    """Bisection of a nondecreasing eta(delta) on (0, pi).

    Falls back to a grid scan if a non-monotone segment is detected.
    """
    lo, hi = 1e-12, np.pi - 1e-12
    eta_hi = eta_of_delta(hi)
    if eta_hi < eta_target:
        raise DeltaRangeError(f"target {eta_target} unreachable (eta(pi) = {eta_hi})")
    monotone = True
    prev = eta_of_delta(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        val = eta_of_delta(mid)
        if val >= eta_target:
            hi = mid
        else:
            if val < prev - 1e-12:
                monotone = False
                break
            prev = val
            lo = mid
    if monotone:
        return hi
    grid = np.linspace(1e-12, np.pi - 1e-12, 20001)
    for d in grid:
        if eta_of_delta(d) >= eta_target:
            return float(d)
    raise DeltaRangeError("target unreachable on the scanned grid")


def covariant_tolerance(probe: ProbeSpectrum, eta_target: float,
                        xtol: float = 1e-9) -> float:
    """Smallest delta with covariant success probability >= eta_target."""
    if not 0.0 < eta_target < 1.0:
        raise ValueError("eta_target must lie in (0,1)")
    return _bisect_delta(lambda d: covariant_success_probability(probe, d),
                         eta_target, xtol)


def _dense_prolate_probe(n: int, delta: float) -> ProbeSpectrum:
    """Top eigenvector of the dense prolate matrix (no positivity guarantee)."""
    w = prolate_matrix(n, delta)
    _, vecs = np.linalg.eigh(w)
    v = vecs[:, -1]
    if v.sum() < 0.0:
        v = -v
    if v.min() < -1e-8:
        raise PositivityViolationError(
            "top prolate eigenvector is not entrywise nonnegative here")
    return ProbeSpectrum.from_amplitudes(np.clip(v, 0.0, None))


def optimal_probe_tolerance(n: int, eta_target: float, xtol: float = 1e-9) -> float:
    """Smallest delta at which the best probe of size n reaches eta_target.

    The bisection stays inside the tridiagonal positivity regime delta < pi/2
    whenever the target is reachable there (it is for all but tiny n); wider
    windows fall back to the dense prolate eigenvector with an explicit
    nonnegativity check.
    """
    if not 0.0 < eta_target < 1.0:
        raise ValueError("eta_target must lie in (0,1)")
    if n == 0:
        return eta_target * float(np.pi)
    hi = np.pi / 2.0 - 1e-9
    if optimal_probe(n, hi)[1] >= eta_target:
        lo = 1e-12
        while hi - lo > xtol:
            mid = 0.5 * (lo + hi)
            if optimal_probe(n, mid)[1] >= eta_target:
                hi = mid
            else:
                lo = mid
        return hi

    def eta_wide(d: float) -> float:
        probe = _dense_prolate_probe(n, d)
        return covariant_success_probability(probe, d)

    return _bisect_delta(eta_wide, eta_target, xtol)


def parallel_rate_theory(delta: float) -> float:
    """log((1+sin(delta/2))/(1-sin(delta/2))): best error rate, entangled probes."""
    _check_delta(delta, np.pi / 2.0)
    s = math.sin(delta / 2.0)
    return math.log((1.0 + s) / (1.0 - s))


def iid_rate_theory(delta: float) -> float:
    """-log cos^2(delta): error-rate ceiling for product probes."""
    _check_delta(delta, np.pi / 2.0)
    return -2.0 * math.log(math.cos(delta))


def gaussian_rate_theory(delta: float) -> float:
    """delta/2: error rate achieved by the Gaussian probe."""
    return delta / 2.0


@dataclass
class RateReport:
    """Empirical error-rate fit of a probe family over a range of sizes."""

    probe_name: str
    delta: float
    n_list: list[int]
    eta_list: list[float]
    neg_log_error: list[float]
    fitted_rate: float
    theory_rate: float


def empirical_rate(probe_factory, delta: float, n_list,
                   probe_name: str = "", theory_rate: float = math.nan,
                   dps: int | None = None) -> RateReport:
    """Least-squares slope of -log(1-eta) vs n over the last half of sizes."""
    ns = sorted(int(n) for n in n_list)
    if len(ns) < 3:
        raise ValueError("need at least three probe sizes")
    ys = []
    kept = []
    for n in ns:
        y = covariant_log_error(probe_factory(n), delta, dps=dps)
        if math.isfinite(y):
            kept.append(n)
            ys.append(y)
    if len(kept) < 2:
        raise SaturatedError("error probabilities saturated at every size")
    half = len(kept) // 2
    xs = np.asarray(kept[half:], dtype=float)
    yy = np.asarray(ys[half:], dtype=float)
    if len(xs) < 2:
        xs, yy = np.asarray(kept, float), np.asarray(ys, float)
    slope = float(np.polyfit(xs, yy, 1)[0])
    etas = [1.0 - math.exp(-y) for y in ys]
    return RateReport(probe_name, delta, kept, etas, ys, slope, theory_rate)


def convolve_probe(probe: ProbeSpectrum, n_copies: int) -> ProbeSpectrum:
    """Probe spectrum of n parallel copies: sqrt of the n-fold convolution of
    the squared amplitudes."""
    p = probe.amps ** 2
    dist = reduce(np.convolve, [p] * n_copies)
    return ProbeSpectrum.from_amplitudes(np.sqrt(np.clip(dist, 0.0, None)))


def pgm_grid_povm(probe: ProbeSpectrum, n_points: int) -> PovmGrid:
    """Square-root-measurement effects on an n_points grid over [0, 2*pi).

    Restricted to the span of levels with positive amplitude, where
    Q_l = (1/N) sum_{k,k'} exp(-i (k-k') t_l) |k><k'| and completeness holds
    exactly by discrete Fourier orthogonality (requires N > n).
    """
    support = np.flatnonzero(probe.amps > 0.0)
    span = len(support)
    if n_points <= support.max() - support.min():
        raise ValueError("grid must be finer than the spectral width")
    grid = TWO_PI * np.arange(n_points) / n_points
    phases = np.exp(-1j * np.outer(grid, support.astype(float)))   # (N, span)
    effects = np.einsum("li,lj->lij", phases, phases.conj()) / n_points
    return PovmGrid(effects, grid, psd_atol=1e-12, completeness_atol=1e-10)


def gridded_family(probe: ProbeSpectrum, n_points: int,
                   materialize: bool = True) -> StateFamily:
    """The covariant family of the probe on its positive-amplitude span."""
    support = np.flatnonzero(probe.amps > 0.0)
    return build_unitary_family(support.astype(float), probe.amps[support],
                                n_points, TWO_PI, materialize=materialize)


def gaussian_tolerance_asymptote(eta_bar: float, n: int) -> float:
    """alpha/(n+1) with alpha = 2 log(2/(pi (1-eta_bar)))."""
    if not 0.0 < eta_bar < 1.0:
        raise ValueError("eta_bar must lie in (0,1)")
    alpha = 2.0 * math.log(2.0 / (np.pi * (1.0 - eta_bar)))
    return alpha / (n + 1.0)
