"""Exception types shared across the package."""


class WdecorrError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(WdecorrError):
    """Inputs have inconsistent shapes or lengths."""


class SingularDesign(WdecorrError):
    """The Gram matrix X'X is singular or numerically near-singular.

    For bandit data this signals that the policy never explored some
    direction of the parameter space.
    """


class StaleWhitening(WdecorrError):
    """A whitening result was built from a different covariate sequence."""


class NonFiniteInput(WdecorrError):
    """A covariate contains NaN or infinity."""


class NonFiniteOutput(WdecorrError):
    """A simulated series overflowed (explosive parameters at long horizons)."""


class NotOrthogonal(WdecorrError):
    """Arm vectors are not mutually orthogonal."""


class NonPositiveVariance(WdecorrError):
    """A variance parameter that must be positive is not."""


class UnsupportedPolicy(WdecorrError):
    """The requested operation has no closed form for this policy kind."""


class SeriesTooShort(WdecorrError):
    """A time series is too short for the requested lag order."""


class ZeroDirection(WdecorrError):
    """The target direction vector is zero."""


class EmptyInput(WdecorrError):
    """An input collection that must be nonempty is empty."""


class TooFewSamples(WdecorrError):
    """Not enough samples to compute the requested statistic."""


class DegenerateSample(WdecorrError):
    """The sample has zero variance; the statistic is undefined."""


class NotABanditProcess(WdecorrError):
    """The operation requires bandit traces with arm counts."""


class ConfigError(WdecorrError):
    """A run configuration document is invalid."""
