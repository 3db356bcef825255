"""Small-ball probabilities of multilinear polynomials in independent random variables.

Exact and Monte Carlo small-ball engines, rank and regularity analysis,
closed-form bounds with a calibration harness, and applications to random
subgraph counts and Boolean functions.
"""
from .bounds import (
    BoundReport,
    bound_biased,
    bound_carbery_wright,
    bound_ctv,
    bound_general,
    bound_main,
    bound_regular,
    bound_rv,
    calibrate_B,
    evaluate_bound,
)
from .distributions import DistributionSpec, GeneralCoordinate, coupled_biased_sampler, sample
from .errors import (
    AntiConcError,
    BudgetExceeded,
    HypothesisViolated,
    InputError,
    ParamInfeasible,
)
from .estimates import ProbEstimate
from .poly import (
    MultilinearPoly,
    Restriction,
    RestrictedPoly,
    evaluate,
    influences,
    load_poly,
    make_poly,
    multilinearize,
    restrict,
    translate_domain,
)
from .regularity import (
    RankResult,
    TreeParams,
    TreeReport,
    alpha_estimate,
    critical_index,
    is_gamma_spread,
    is_regular,
    is_tight,
    rank_exact,
    rank_greedy,
    sample_tree_path,
)
from .smallball import (
    ValueHistogram,
    exact_distribution,
    interval_prob,
    levy_concentration,
    monte_carlo_distribution,
)

__version__ = "0.1.0"
