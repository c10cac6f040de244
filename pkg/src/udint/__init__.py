"""Lebesgue integrals on (0, 1) by averaging along uniformly distributed sequences."""

from udint.equidistribution import DiscrepancyReport, interval_ratio, star_discrepancy, weyl_check
from udint.errors import (
    GeneratorBoundaryError,
    IntegrityError,
    InvalidArgument,
    MissingOracleError,
    SingularEvaluationError,
    UdintError,
)
from udint.estimators import (
    ConditionReport,
    Tolerances,
    Trajectory,
    cesaro_mean,
    check_conditions,
    geometric_checkpoints,
    running_means,
    toeplitz_average,
    truncated_deviation_sq,
    truncated_mean,
    truncated_terms,
)
from udint.integrands import (
    Integrand,
    counterexample_integrand,
    get_integrand,
    level_set_measure,
    negative_part,
    partial_integral_below,
    positive_part,
)
from udint.slln import (
    DistributionFunction,
    ks_distance,
    pushforward_ks,
    quantile,
    slln_trajectory,
)
from udint.sequences import (
    HybridPi,
    Kronecker,
    Prng,
    SequenceSpec,
    VanDerCorput,
    fractional_part,
    hybrid_pi,
    kronecker,
    prng_stream,
    van_der_corput,
)

__version__ = "0.1.0"
