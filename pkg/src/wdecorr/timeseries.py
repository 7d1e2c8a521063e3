"""Autoregressive series simulation and the lagged-design regression view.

An AR(p) series fits the adaptive linear model with x_i = (y_{i-1}, ...,
y_{i-p}): the covariate is a function of the past, so all whitening and
decorrelation machinery applies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NonFiniteOutput, SeriesTooShort
from .linmodel import AdaptiveDataset
from .noise import NoiseSpec

# |y| beyond this is treated as numerical blow-up of an explosive model.
OVERFLOW_LIMIT = 1e150


@dataclass(frozen=True)
class ArSpec:
    """AR(p) model: y_i = sum_l coefficients[l] * y_{i-l-1} + noise_i.

    Lags reaching before the start of the series read from initial_values,
    given as (y_0, y_{-1}, ..., y_{-p+1}); the default is all zeros.
    """

    coefficients: tuple
    n: int
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    initial_values: tuple | None = None

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 1:
            raise ConfigError("AR order p must be >= 1")
        if self.n <= len(coeffs):
            raise ConfigError(f"series length n={self.n} must exceed the order p={len(coeffs)}")
        init = self.initial_values
        init = (0.0,) * len(coeffs) if init is None else tuple(float(v) for v in init)
        if len(init) != len(coeffs):
            raise ConfigError(
                f"initial_values must have length p={len(coeffs)}, got {len(init)}"
            )
        object.__setattr__(self, "initial_values", init)

    @property
    def p(self) -> int:
        return len(self.coefficients)


def simulate_ar(spec: ArSpec, seed) -> np.ndarray:
    """Generate y_1..y_n. Deterministic given the seed.

    Raises NonFiniteOutput when |y_i| exceeds OVERFLOW_LIMIT, which signals
    explosive coefficients run past a representable horizon.
    """
    rng = np.random.default_rng(seed)
    eps = spec.noise.draw(rng, spec.n)
    coeffs = spec.coefficients
    p = spec.p
    # hist[-1] = y_0, hist[-2] = y_{-1}, ...
    hist = list(reversed(spec.initial_values))
    out = np.empty(spec.n)
    for i in range(spec.n):
        val = eps[i]
        for l in range(p):
            val += coeffs[l] * hist[-1 - l]
        if not abs(val) <= OVERFLOW_LIMIT:
            raise NonFiniteOutput(f"|y_{i+1}| = {val!r} exceeds {OVERFLOW_LIMIT:g}")
        out[i] = val
        hist.append(val)
    return out


def ar_dataset(series, p: int) -> AdaptiveDataset:
    """Regression view of a series: row i is (y_{i-1}, ..., y_{i-p}) with
    response y_i, for i = p .. len-1, so n = len(series) - p.

    The first p observations appear only as lags; their own responses would
    need lags from before the series and are dropped.
    """
    series = np.asarray(series, dtype=np.float64).reshape(-1)
    if p < 1:
        raise ConfigError("lag order p must be >= 1")
    if series.shape[0] <= p:
        raise SeriesTooShort(f"series of length {series.shape[0]} cannot support order p={p}")
    n = series.shape[0] - p
    rows = np.empty((n, p))
    for l in range(p):
        rows[:, l] = series[p - 1 - l : p - 1 - l + n]
    return AdaptiveDataset(rows=rows, responses=series[p:])
