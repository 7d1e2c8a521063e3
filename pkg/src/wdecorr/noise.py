"""Mean-zero noise specifications shared by the bandit and AR simulators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_KINDS = ("uniform", "gaussian")


@dataclass(frozen=True)
class NoiseSpec:
    """A mean-zero noise distribution.

    kind="uniform" draws Unif([low, high]) with low = -high;
    kind="gaussian" draws N(0, sigma2). Unif([0, 0]) / N(0, 0) give
    degenerate zero noise, which is handy for deterministic tests.
    """

    kind: str = "uniform"
    low: float = -1.0
    high: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "uniform":
            if self.low > self.high:
                raise ConfigError("uniform noise requires low <= high")
            scale = max(abs(self.low), abs(self.high), 1.0)
            if abs(self.low + self.high) > 1e-12 * scale:
                raise ConfigError("noise must have mean zero: uniform bounds must satisfy low = -high")
        else:
            if self.sigma2 < 0:
                raise ConfigError("gaussian noise requires sigma2 >= 0")

    @property
    def variance(self) -> float:
        if self.kind == "uniform":
            return (self.high - self.low) ** 2 / 12.0
        return self.sigma2

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=size)
        return rng.normal(0.0, np.sqrt(self.sigma2), size=size)


def unif(half_width: float = 1.0) -> NoiseSpec:
    """Unif([-half_width, half_width]) noise."""
    return NoiseSpec(kind="uniform", low=-half_width, high=half_width)


def gaussian(sigma2: float) -> NoiseSpec:
    """N(0, sigma2) noise."""
    return NoiseSpec(kind="gaussian", sigma2=sigma2)
