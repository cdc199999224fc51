"""Independent brute-force oracles used only by the tests."""
import numpy as np


def classical_chernoff_grid(p, q, n_grid=100_000):
    """Dense s-grid scan of -log sum_i p_i^s q_i^(1-s) for distributions."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    s = np.linspace(0.0, 1.0, n_grid)[:, None]
    mask = (p > 0) & (q > 0)
    vals = np.sum(p[mask] ** s * q[mask] ** (1.0 - s), axis=1)
    return -np.log(vals.min())


def classical_renyi(p, q, alpha):
    """(1/(alpha-1)) log sum p^alpha q^(1-alpha) for distributions."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    mask = p > 0
    if alpha > 1 and np.any(mask & (q == 0)):
        return np.inf
    val = np.sum(p[mask] ** alpha * q[mask] ** (1.0 - alpha))
    return np.log(val) / (alpha - 1.0)


def beta_h_sdp(rho, sigma, eta):
    """Reference type-II error via a generic SDP solver."""
    import cvxpy as cp

    d = rho.shape[0]
    m = cp.Variable((d, d), hermitian=True)
    constraints = [m >> 0, np.eye(d) - m >> 0,
                   cp.real(cp.trace(m @ rho)) >= eta]
    problem = cp.Problem(cp.Minimize(cp.real(cp.trace(m @ sigma))), constraints)
    problem.solve(solver=cp.CLARABEL)
    return float(problem.value)


def brute_success(fam, prior_weights, window_delta, effects):
    """Definition-level sum over all (l, m) pairs with explicit window weights."""
    n = fam.n_points
    step = fam.step
    k = int(np.floor(window_delta / step + 1e-9))
    total = 0.0
    for l in range(n):
        for m in range(n):
            if fam.domain.periodic:
                dist = min(abs(l - m), n - abs(l - m))
            else:
                dist = abs(l - m)
            if dist < k:
                w = 1.0
            elif dist == k:
                w = 0.5
            else:
                continue
            total += (prior_weights[l] * w
                      * float(np.trace(fam.states[l] @ effects[m]).real))
    return total


def diagonal_assignment_value(smeared, basis=None):
    """Optimal POVM value for a family diagonal in a common eigenbasis.

    Pinching to that basis preserves objective and constraints, so WLOG the
    POVM is diagonal and the LP separates per basis state: each unit of
    identity budget goes to the best prediction.  ``basis`` columns are the
    common eigenvectors (identity if omitted).
    """
    smeared = np.asarray(smeared)
    if basis is not None:
        smeared = np.einsum("ia,lij,jb->lab", np.conj(basis), smeared, basis)
    diags = np.array([np.real(np.diagonal(b)) for b in smeared])   # (N, d)
    return float(diags.max(axis=0).sum())
