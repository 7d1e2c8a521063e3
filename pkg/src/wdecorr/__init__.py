"""Decorrelated inference for adaptively collected linear-model data.

The package builds an online whitening matrix whose columns depend only on
past covariates, uses it to trade the adaptive-sampling bias of least
squares for controlled variance, and ships the simulators, interval
constructions, and Monte Carlo harness needed to study coverage of the
resulting confidence intervals.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateSample,
    DimensionMismatch,
    EmptyInput,
    NonFiniteInput,
    NonFiniteOutput,
    NonPositiveVariance,
    NotABanditProcess,
    NotOrthogonal,
    SeriesTooShort,
    SingularDesign,
    StaleWhitening,
    TooFewSamples,
    UnsupportedPolicy,
    WdecorrError,
    ZeroDirection,
)
from .intervals import (
    METHOD_OLS_CONC,
    METHOD_OLS_GSN,
    METHOD_W_DECORR,
    ConcentrationParams,
    Interval,
    ci_concentration,
    ci_gaussian_ols,
    ci_w_decorrelated,
    normal_quantile,
)
from .linmodel import (
    AdaptiveDataset,
    DecorrelatedEstimate,
    OlsFit,
    bias_variance_diagnostics,
    ols_fit,
    w_decorrelate,
)
from .mc_harness import (
    ESTIMATOR_OLS,
    ESTIMATOR_W,
    ExperimentConfig,
    MCResult,
    Target,
    arm_fraction_histogram,
    normality_stats,
    pp_data,
    run_experiment,
)
from .noise import NoiseSpec, gaussian, unif
from .policies import (
    BanditEnv,
    BanditTrace,
    PolicySpec,
    PolicyState,
    UcbParams,
    exploration_rate,
    posterior_update,
    run_bandit,
    select_arm,
)
from .processes import ArProcess, BanditProcess, RoundRobinProcess
from .timeseries import ArSpec, ar_dataset, simulate_ar
from .tuning import LambdaRule, select_lambda
from .whitening import (
    WhiteningResult,
    WhiteningState,
    WhiteningStream,
    orthogonal_variance_oracle,
    product_form_bias,
    reverse_sgd_estimate,
    whitening_run,
    whitening_step,
)
