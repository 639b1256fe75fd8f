"""Posterior means in location experiments and numerical checks of when they attenuate."""

from .average import (
    AgentBelief,
    average_posterior_mean,
    compare_confidence,
    compare_prior_precision,
    monte_carlo_average,
)
from .config import ExperimentConfig, parse_config
from .densities import (
    Density,
    DensitySpec,
    Family,
    check_log_exp_concave,
    check_logconcave,
    check_quasiconcave,
    check_symmetry,
    make_density,
    make_necessity_prior,
    parse_density_spec,
    scale_density,
)
from .errors import (
    AttenuationError,
    DegenerateSignal,
    InadmissibleDensity,
    InvalidParameter,
    ParseError,
    PreconditionFailed,
    QuadratureFailure,
    SearchExhausted,
    UnresolvedName,
)
from .grids import CheckResult, GridSpec
from .harness import (
    Counterexample,
    SuiteConfig,
    find_counterexample,
    run_full_suite,
    verify_attenuation,
    verify_betweenness,
    verify_posterior_ratio_monotone,
    verify_prior_duality,
    verify_scale_monotonicity,
)
from .output import emit_csv, emit_plot, read_csv
from .posterior import LocationExperiment, posterior_mean, posterior_mean_sweep, posterior_moments
from .precision import (
    OrderVerdict,
    Relation,
    check_less_precise,
    check_mean_preserving_spread,
    check_scale_less_precise,
    likelihood_ratio,
)
from .quadrature import QuadratureConfig, integrate
from .report import ExperimentReport

__version__ = "0.1.0"
