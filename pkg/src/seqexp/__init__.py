"""Sequential probability ratio tests and their second-order error exponents."""
from .exponents import (
    ExponentReport,
    achievable_region_boundary,
    second_order_expectation,
    second_order_probabilistic,
)
from .harness import (
    ExperimentPlan,
    ExpectationPoint,
    ProbabilisticPoint,
    check_error_convergence,
    check_error_tradeoff_bound,
    check_rogozin,
    estimate_error_probs,
    estimate_stopping,
    fit_stopping_line,
    run_plan,
    simulate_sprt,
)
from .models import (
    CustomPair,
    DistributionPair,
    ExponentialPair,
    GaussianPair,
    Hypothesis,
    MomentSummary,
    k_step_functionals,
    is_nonarithmetic,
    moments,
    pair_from_spec,
    sample_llr,
)
from .renewal import RenewalConstants, SeriesEstimate, constants_overshoot_mc, constants_series
from .simulate import MonteCarloEstimate
from .sprt import (
    Decision,
    SprtConfig,
    SprtOutcome,
    run_sprt,
    thresholds_expectation,
    thresholds_probabilistic,
    wald_error_bounds,
)

__version__ = "0.1.0"
