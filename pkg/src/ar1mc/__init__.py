"""AR(1) with intercept: simulation, least squares, and limit-theory checks."""

from .estimator import (
    LsEstimate,
    ScaledError,
    SingularDesignError,
    error_rates,
    ls_estimate,
    normal_equations_oracle,
    scale_error,
)
from .innovations import (
    BnSequence,
    InnovationModel,
    compute_bn,
    custom,
    ell_at_bn,
    eval_l,
    gaussian,
    model_from_config,
    pareto_tail2,
    rademacher,
    sample_innovations,
    uniform_sym,
)
from .limits import (
    BrownianGrid,
    LimitParams,
    brownian_time_change,
    cumulative_growth,
    default_truncation,
    growth_dispersion,
    growth_mean,
    growth_mean_sq,
    sample_explosive_limit,
    sample_growth_functionals,
    sample_limit,
    sample_moderate_limit,
    sample_stationary_limit,
    sample_time_changed_functionals,
    sample_unit_root_limit,
)
from .montecarlo import (
    ConfigError,
    ExperimentConfig,
    McReport,
    ks_two_sample,
    normalized_stationary_sums,
    normalized_tilde_sums,
    rate_slope,
    run_experiment,
    summarize,
)
from .process import Ar1Path, Regime, companion_series, resolve_rho, simulate_path
from .rng import DEFAULT_SEED, derive_seed, generator

__version__ = "0.1.0"
