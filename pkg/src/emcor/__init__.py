"""Earth mover's covariance, variance and correlation for metric-space data."""

__version__ = "0.1.0"

from .baselines import distance_correlation, distance_covariance, double_center, pearson_correlation
from .dependence import (
    BernoulliPair,
    DependenceReport,
    DiscreteJoint,
    PairedSample,
    bernoulli_ecor_closed_form,
    build_product_measure,
    conditional_coupling_ecov,
    dependence_report,
    discrete_ecov_exact,
    ecov_lower_bound_remark2,
    empirical_ecor,
    empirical_ecov,
    empirical_evar,
    gaussian_ecor_bounds,
    normal_evar,
    trivariate_ecor,
    trivariate_ecov,
)
from .errors import UndefinedCorrelationError
from .inference import TestResult, mc_validate_cube, mc_validate_gaussian, permutation_test_ecov
from .metric import (
    MetricSpec,
    Similarity,
    apply_similarity,
    distance,
    hilbert_cube_embed,
    load_matrix,
    pair_metric,
    pairwise_matrix,
)
from .transport import (
    TransportPlan,
    TransportProblem,
    brute_force_transport,
    cycle_canceling_transport,
    solve_transport,
    verify_optimality,
)
from .univariate import (
    cube_evar_erf_integral,
    evar_cdf_integral,
    gini_mean_difference,
    quantile_inverse,
    sequence_emd,
    wasserstein_1d,
)
