"""Dense Hermitian linear algebra and the divergence/distance zoo.

Everything here works on plain complex ``numpy`` arrays.  States are density
matrices (PSD, unit trace); validation helpers raise the package exceptions
instead of silently propagating garbage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DimensionMismatchError,
    DomainError,
    NonHermitianError,
    SupportViolationError,
)

HERMITICITY_ATOL = 1e-12
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10
PINV_RELATIVE_CUTOFF = 1e-10

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """(a + a^dagger)/2."""
    return (a + a.conj().T) / 2.0


def require_hermitian(a: np.ndarray, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    """Validate Hermiticity entrywise and return the symmetrized matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.abs(a - a.conj().T) <= atol):
        worst = float(np.max(np.abs(a - a.conj().T)))
        raise NonHermitianError(f"matrix is not Hermitian (max |A - A^h| = {worst:.3e})")
    return hermitian_part(a)


def require_density(rho: np.ndarray, psd_atol: float = PSD_ATOL,
                    trace_atol: float = TRACE_ATOL) -> np.ndarray:
    """Validate that ``rho`` is a density matrix (Hermitian, PSD, unit trace)."""
    rho = require_hermitian(rho)
    w = np.linalg.eigvalsh(rho)
    if w.min() < -psd_atol:
        raise NonHermitianError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > trace_atol:
        raise NonHermitianError(f"trace is {tr:.12g}, expected 1")
    return rho


def require_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and unitary eigenvector matrix (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigh(a: np.ndarray, atol: float = HERMITICITY_ATOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix."""
    a = require_hermitian(a, atol)
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w, v)


def matrix_function(a: np.ndarray, f: Callable[[np.ndarray], np.ndarray],
                    pinv_cutoff: float | None = None) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    With ``pinv_cutoff`` set, eigenvalues of magnitude below
    ``pinv_cutoff * max|eigenvalue|`` are mapped to zero in the output
    (pseudo-inverse convention for rank-deficient input).
    """
    dec = eigh(a)
    w = dec.eigenvalues
    fw = np.zeros_like(w)
    keep = np.ones(w.shape, dtype=bool)
    if pinv_cutoff is not None:
        scale = float(np.max(np.abs(w))) if w.size else 0.0
        keep = np.abs(w) > pinv_cutoff * scale
    if np.any(keep):
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.asarray(f(w[keep]), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise DomainError("function undefined on part of the retained spectrum")
        fw[keep] = vals
    v = dec.eigenvectors
    return hermitian_part((v * fw) @ v.conj().T)


def pseudo_inverse_sqrt(a: np.ndarray,
                        cutoff: float = PINV_RELATIVE_CUTOFF) -> np.ndarray:
    """x -> x^(-1/2) on the support of a PSD matrix, zero on its kernel."""
    return matrix_function(a, lambda x: x ** (-0.5), pinv_cutoff=cutoff)


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    w = np.linalg.eigvalsh(require_hermitian(a))
    return float(np.sum(np.abs(w)))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) ||rho - sigma||_1."""
    require_same_dim(np.asarray(rho), np.asarray(sigma))
    return 0.5 * trace_norm(np.asarray(rho, complex) - np.asarray(sigma, complex))


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity Tr[(sigma^(1/2) rho sigma^(1/2))^(1/2)], in [0, 1]."""
    rho = require_hermitian(rho)
    sigma = require_hermitian(sigma)
    require_same_dim(rho, sigma)
    ws, vs = np.linalg.eigh(sigma)
    ws = np.clip(ws, 0.0, None)
    s_half = (vs * np.sqrt(ws)) @ vs.conj().T
    mid = hermitian_part(s_half @ rho @ s_half)
    w = np.clip(np.linalg.eigvalsh(mid), 0.0, None)
    return float(min(1.0, np.sum(np.sqrt(w))))


def _golden_min(fn: Callable[[float], float], lo: float, hi: float,
                xtol: float) -> tuple[float, float]:
    """Golden-section minimization of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > xtol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
    x = x1 if f1 <= f2 else x2
    return x, min(f1, f2)


def _log_trace_power_pairs(rho: np.ndarray, sigma: np.ndarray,
                           cutoff: float = 1e-14):
    """Precompute data so that log Tr[rho^s sigma^(1-s)] is cheap in s.

    Writes the trace as sum_ij |<u_i|v_j>|^2 p_i^s q_j^(1-s) and keeps only
    pairs on the joint support.
    """
    p, u = np.linalg.eigh(rho)
    q, v = np.linalg.eigh(sigma)
    overlap = np.abs(u.conj().T @ v) ** 2
    scale_p = max(float(p.max()), 1.0)
    scale_q = max(float(q.max()), 1.0)
    ip = p > cutoff * scale_p
    iq = q > cutoff * scale_q
    lp = np.log(p[ip])
    lq = np.log(q[iq])
    o = overlap[np.ix_(ip, iq)]
    mask = o > 1e-300
    lo_ = np.log(o[mask])
    lp_mat = np.broadcast_to(lp[:, None], o.shape)[mask]
    lq_mat = np.broadcast_to(lq[None, :], o.shape)[mask]

    def log_trace(s: float) -> float:
        return float(logsumexp(lo_ + s * lp_mat + (1.0 - s) * lq_mat))

    return log_trace


def chernoff_divergence(rho: np.ndarray, sigma: np.ndarray,
                        s_tol: float = 1e-8) -> float:
    """-inf_{0<=s<=1} log Tr[rho^s sigma^(1-s)] for a pair of states.

    log Tr[rho^s sigma^(1-s)] is a log-sum-exp of affine functions of s and
    hence convex, so golden-section search is exact up to ``s_tol``; a dense
    grid scan backs it up if the search returns garbage.
    """
    rho = require_density(rho)
    sigma = require_density(sigma)
    require_same_dim(rho, sigma)
    g = _log_trace_power_pairs(rho, sigma)
    s_star, g_min = _golden_min(g, 0.0, 1.0, s_tol)
    g_min = min(g_min, g(0.0), g(1.0))
    if not math.isfinite(g_min):
        grid = np.linspace(0.0, 1.0, 1001)
        g_min = min(g(s) for s in grid)
    return max(0.0, -g_min)


def sandwiched_renyi(rho: np.ndarray, sigma: np.ndarray, alpha: float,
                     support_atol: float = 1e-10) -> float:
    """Sandwiched Renyi divergence of order alpha.

    D_alpha(rho||sigma) = log Tr[(sigma^c rho sigma^c)^alpha] / (alpha - 1)
    with c = (1-alpha)/(2 alpha).  For alpha > 1 the value is +inf whenever
    supp(rho) is not contained in supp(sigma).
    """
    if alpha <= 0.0 or alpha == 1.0:
        raise ValueError("alpha must lie in (0,1) or (1,inf)")
    rho = require_density(rho)
    sigma = require_density(sigma)
    require_same_dim(rho, sigma)
    ws, vs = np.linalg.eigh(sigma)
    supp = ws > PINV_RELATIVE_CUTOFF * max(float(ws.max()), 1e-300)
    if alpha > 1.0:
        kernel = vs[:, ~supp]
        if kernel.shape[1]:
            leak = float(np.real(np.trace(kernel.conj().T @ rho @ kernel)))
            if leak > support_atol:
                return math.inf
    c = (1.0 - alpha) / (2.0 * alpha)
    sc = matrix_function(sigma, lambda x: x ** c, pinv_cutoff=PINV_RELATIVE_CUTOFF)
    mid = hermitian_part(sc @ rho @ sc)
    w = np.clip(np.linalg.eigvalsh(mid), 0.0, None)
    tr = float(np.sum(w ** alpha))
    if tr <= 0.0:
        return math.inf
    return math.log(tr) / (alpha - 1.0)


def check_support(rho: np.ndarray, sigma: np.ndarray,
                  support_atol: float = 1e-10) -> None:
    """Raise unless supp(rho) is contained in supp(sigma)."""
    if math.isinf(sandwiched_renyi(rho, sigma, 2.0, support_atol)):
        raise SupportViolationError("supp(rho) not contained in supp(sigma)")


def qfi_pure(spectrum: np.ndarray, amplitudes: np.ndarray) -> float:
    """4 Var(H) for a pure probe with the given eigenvalue amplitudes."""
    lam = np.asarray(spectrum, dtype=float)
    amps = np.asarray(amplitudes, dtype=float)
    if lam.shape != amps.shape:
        raise DimensionMismatchError("spectrum and amplitude shapes differ")
    p = amps ** 2
    p = p / p.sum()
    m1 = float(p @ lam)
    m2 = float(p @ lam ** 2)
    return 4.0 * (m2 - m1 ** 2)


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Partial trace of a bipartite operator; ``keep`` selects subsystem 0 or 1."""
    da, db = dims
    r = np.asarray(rho, complex).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ajbj->ab", r)
    if keep == 1:
        return np.einsum("jajb->ab", r)
    raise ValueError("keep must be 0 or 1")
