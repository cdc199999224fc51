"""Finite-sample quantum metrology: success probabilities at fixed tolerance,
optimal tolerances, sample complexity, and the surrounding bound suite."""

from . import bounds, cli, families, jsonio, linalg, phase, precision, solver
from .families import (
    Domain,
    LikelihoodTable,
    PovmGrid,
    Prior,
    StateFamily,
    Window,
    build_dephasing_family,
    build_unitary_family,
    estimate_lipschitz,
    make_likelihood_table,
    smear_family,
    window_hat,
)
from .linalg import (
    EigenDecomposition,
    chernoff_divergence,
    eigh,
    fidelity,
    matrix_function,
    qfi_pure,
    sandwiched_renyi,
    trace_distance,
    trace_norm,
)
from .phase import (
    ProbeSpectrum,
    RateReport,
    covariant_success_probability,
    covariant_tolerance,
    dpss_bessel_approx,
    empirical_rate,
    gaussian_rate_theory,
    gaussian_tolerance_asymptote,
    iid_rate_theory,
    optimal_probe,
    optimal_probe_tolerance,
    parallel_rate_theory,
    pgm_grid_povm,
    probe_gaussian,
    probe_ghz,
    probe_hb,
    probe_plus_tensor,
)
from .solver import (
    MinimaxSolution,
    SdpSolution,
    SolverConfig,
    minimax_success_probability,
    optimal_tolerance,
    sample_complexity,
    smap_postprocess,
    smcl_postprocess,
    solve_bayesian_sdp,
    solve_minimax_sdp,
    subdivision_bound,
    success_probability,
)

__version__ = "0.1.0"
