# ## A tour of the analytic bound suite
#
# Every bound brackets a solver value from a safe side: discrimination-based
# upper bounds on the success probability, fidelity-based lower bounds on the
# error, Chernoff ceilings on asymptotic rates, hypothesis-testing floors on
# the tolerance, and a finite-sample Cramer-Rao-like bound.

import math

import numpy as np

from pacmet import bounds, linalg, phase, solver
from pacmet.families import Prior, Window

probe = phase.probe_plus_tensor(1)
fam = phase.gridded_family(probe, 64)
k = 4
delta = k * fam.step
w = Window(delta + 1e-12)

exact = solver.solve_minimax_sdp(fam, w, tol=1e-6)
print(f"covariant qubit family, delta = {delta:.4f}")
print(f"  exact minimax eta     = {exact.eta_bar_star:.6f}\n")

rep = bounds.two_point_upper_bound(fam, w)
print(f"  two-point upper bound = {rep.value:.6f} "
      f"(witness pair {rep.witness['t']:.3f}, {rep.witness['t_prime']:.3f})")

rep = bounds.fidelity_error_lower_bound(fam, w)
print(f"  error lower bound     = {rep.value:.6f} "
      f"(1 - eta = {1 - exact.eta_bar_star:.6f})")

rep = bounds.chernoff_rate_bound(fam, w)
print(f"  rate ceiling          = {rep.value:.6f} per copy")

rep = bounds.two_point_sample_complexity_bound(fam, w, 0.99)
n_star = solver.sample_complexity(fam, 0.99, delta, 400, minimax=True)
print(f"  sample complexity     >= {rep.value:.2f} (exact n* = {n_star})\n")

# ## Neyman-Pearson machinery behind the tolerance bound

rho, sigma = fam.states[0], fam.states[10]
for eta in (0.5, 0.9, 0.99):
    print(f"  type-II error at detection {eta}: "
          f"{bounds.beta_h(rho, sigma, eta):.6f}")
ht = bounds.ht_tolerance_lower_bound(fam, 0.3, fam.states[0])
d_star = solver.optimal_tolerance(fam, 0.3, minimax=True, tol=1e-5)
print(f"  tolerance floor at eta = 0.3: {ht:.4f} <= exact {d_star:.4f}\n")

# ## The finite-sample Cramer-Rao-like bound on i.i.d. spin probes

print("Cramer-Rao-like tolerance bound at eta = 0.99:")
for n in (8, 16, 32):
    pn = phase.probe_plus_tensor(n)
    res = bounds.cramer_rao_like_bound(
        bounds.covariant_fidelity_profile(pn), [0.0], 0.99)
    exact_tol = phase.covariant_tolerance(pn, 0.99)
    qfi = linalg.qfi_pure(np.arange(n + 1.0), pn.amps)
    print(f"  n={n:>2}: f2 = {res.f[0, 0]:.4f} (= QFI/8 = {qfi / 8:.4f}), "
          f"q = {res.q:.4f}, bound {res.delta_lb:.4f} <= exact {exact_tol:.4f}")
print("\nthe coefficient q ~ 1/sqrt(n) measures how Gaussian the fidelity "
      "curve is;\nsmall q recovers the familiar 1/sqrt(QFI) scaling with an "
      "explicit finite-sample correction")

# ## Probe optimization for a fixed measurement

n = 64
grid = 2 * math.pi * np.arange(n) / n
povm = phase.pgm_grid_povm(phase.probe_plus_tensor(1), n)
probe_state, eta = bounds.probe_optimization_single_use(
    lambda t: [np.diag([1.0, np.exp(-1j * t)])],
    fam.domain, grid, Prior.uniform(n), w, povm)
print(f"\nbest probe for the fixed phase measurement: "
      f"overlap with |+> = {np.real(probe_state[0, 1]) * 2:.6f}, eta = {eta:.6f}")
