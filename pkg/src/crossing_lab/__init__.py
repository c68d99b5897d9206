"""Exact crossing-number distributions at extinction for weighted Markov
branching processes, with a Monte Carlo cross-check."""

from .distribution import CrossingDistribution, MomentReport, conditional_distribution, marginal, moments
from .law import (
    BranchingLaw,
    CrossingSet,
    ValidationReport,
    eval_B,
    eval_bbar,
    eval_bbar_prime,
    eval_split,
    eval_tracked,
    load_model,
    dump_model,
    validate,
)
from .montecarlo import (
    Caps,
    ComparisonReport,
    EmpiricalDistribution,
    PathOutcome,
    compare,
    estimate_distribution,
    jump_kernel,
    simulate_path,
    simulate_paths,
    simulate_timed_path,
    survival_divergence_check,
)
from .presets import preset
from .roots import RootResult, min_root_at, min_root_B, min_root_bbar
from .series import (
    TruncatedSeries,
    convolution_power,
    death_series,
    cubic_death_series,
    example32_series,
    solve_rho_series,
    upcross_series,
)

__version__ = "0.1.0"
