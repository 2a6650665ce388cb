"""Spatially coupled multinomial mixture clustering of region count data."""

from .em import (
    FitConfig,
    FitResult,
    MixtureParams,
    c_step,
    e_step,
    fit,
    fit_with_warm_start,
    m_step_lambda,
    observed_loglik_approx,
    q_value,
)
from .gibbs import (
    GibbsParams,
    conditional_prior,
    conditional_prior_field,
    fit_gibbs_params,
    gibbs_sweep,
    potential,
)
from .graph import (
    AdjacencyGraph,
    NeighborCounts,
    build_from_edges,
    build_lattice,
    neighbor_counts,
    read_edge_list,
    write_edge_list,
)
from .metrics import (
    MoranResult,
    ari,
    default_age_midpoints,
    mean_age,
    moran_permutation_test,
    morans_i,
)
from .multinomial import (
    LAMBDA_FLOOR,
    CountMatrix,
    check_identifiability,
    floor_simplex,
    log_multinomial_pmf,
    standard_mixture_loglik,
)
from .selection import LrtResult, SweepResult, bic, free_params, lrt, sweep
from .simulate import SimConfig, SimReport, run_study, simulate_dataset, two_block_lambda

__version__ = "0.1.0"

__all__ = [
    "AdjacencyGraph",
    "CountMatrix",
    "FitConfig",
    "FitResult",
    "GibbsParams",
    "LAMBDA_FLOOR",
    "LrtResult",
    "MixtureParams",
    "MoranResult",
    "NeighborCounts",
    "SimConfig",
    "SimReport",
    "SweepResult",
    "ari",
    "bic",
    "build_from_edges",
    "build_lattice",
    "c_step",
    "check_identifiability",
    "conditional_prior",
    "conditional_prior_field",
    "default_age_midpoints",
    "e_step",
    "fit",
    "fit_gibbs_params",
    "fit_with_warm_start",
    "floor_simplex",
    "free_params",
    "gibbs_sweep",
    "log_multinomial_pmf",
    "lrt",
    "m_step_lambda",
    "mean_age",
    "moran_permutation_test",
    "morans_i",
    "neighbor_counts",
    "observed_loglik_approx",
    "potential",
    "q_value",
    "read_edge_list",
    "run_study",
    "simulate_dataset",
    "standard_mixture_loglik",
    "sweep",
    "two_block_lambda",
    "write_edge_list",
]
