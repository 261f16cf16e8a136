"""Goodness-of-fit testing for the discrete Pareto (zeta / Zipf) distribution."""

__version__ = "0.1.0"

from .bootstrap import BootstrapConfig, GofReport, bootstrap_many, bootstrap_test, critical_value
from .distribution import (
    DParetoParams,
    FrequencyTable,
    ShapeFit,
    cdf,
    compress,
    expand,
    mle,
    pgf,
    pmf,
    sample,
    stein_residual,
)
from .exceptions import (
    ConvergenceError,
    DomainError,
    DParetoError,
    InsufficientDataError,
    ParseError,
    ReplicateError,
)
from .simulation import AlternativeSpec, PowerStudyConfig, PowerTable, draw_alternative, run_power_study
from .special import EvalControl, beta_fn, polylog, quad_semi_infinite, zeta, zeta_prime
from .statistics import (
    StatisticId,
    StatValue,
    evaluate,
    kernel_h,
    stat_cn,
    stat_k,
    stat_sben,
    stat_t,
    stat_z,
)
