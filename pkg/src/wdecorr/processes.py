"""Uniform wrapper around the data-generating processes.

The tuning and Monte Carlo layers only need three things from a process:
its dimension, its true coefficient vector, and a seeded simulation that
yields an AdaptiveDataset (plus arm counts when the process is a bandit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .linmodel import AdaptiveDataset
from .noise import NoiseSpec
from .policies import BanditEnv, BanditTrace, PolicySpec, run_bandit
from .timeseries import ArSpec, ar_dataset, simulate_ar


@dataclass(frozen=True)
class SimulatedTrial:
    """One realization of a process."""

    dataset: AdaptiveDataset
    arm_counts: np.ndarray | None = None


@dataclass(frozen=True)
class BanditProcess:
    env: BanditEnv
    policy: PolicySpec

    @property
    def p(self) -> int:
        return self.env.p

    @property
    def n(self) -> int:
        return self.env.horizon

    @property
    def true_beta(self) -> np.ndarray:
        return np.asarray(self.env.arm_means, dtype=np.float64)

    def simulate(self, seed) -> SimulatedTrial:
        trace = run_bandit(self.env, self.policy, seed)
        return SimulatedTrial(dataset=trace.dataset, arm_counts=trace.arm_counts)

    def simulate_trace(self, seed) -> BanditTrace:
        return run_bandit(self.env, self.policy, seed)


@dataclass(frozen=True)
class ArProcess:
    spec: ArSpec

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def n(self) -> int:
        # observations entering the regression, not the raw series length
        return self.spec.n - self.spec.p

    @property
    def true_beta(self) -> np.ndarray:
        return np.asarray(self.spec.coefficients, dtype=np.float64)

    def simulate(self, seed) -> SimulatedTrial:
        series = simulate_ar(self.spec, seed)
        return SimulatedTrial(dataset=ar_dataset(series, self.spec.p))


@dataclass(frozen=True)
class RoundRobinProcess:
    """Deterministic design pulling arms 0, 1, ..., p-1 cyclically.

    Useful as a degenerate pilot process (its Gram matrix is fixed) and in
    tests; rewards follow arm_means plus the configured noise.
    """

    p: int
    n: int
    arm_means: tuple = ()
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(kind="uniform", low=0.0, high=0.0))

    def __post_init__(self) -> None:
        if self.p < 1 or self.n < 1:
            raise ConfigError("round-robin process needs p >= 1 and n >= 1")
        means = self.arm_means or (0.0,) * self.p
        means = tuple(float(m) for m in means)
        if len(means) != self.p:
            raise ConfigError(f"arm_means must have length p={self.p}")
        object.__setattr__(self, "arm_means", means)

    @property
    def true_beta(self) -> np.ndarray:
        return np.asarray(self.arm_means, dtype=np.float64)

    def simulate(self, seed) -> SimulatedTrial:
        rng = np.random.default_rng(seed)
        arms = np.arange(self.n, dtype=np.int64) % self.p
        ys = np.asarray(self.arm_means)[arms] + self.noise.draw(rng, self.n)
        rows = np.eye(self.p)[arms]
        counts = np.bincount(arms, minlength=self.p)
        return SimulatedTrial(
            dataset=AdaptiveDataset(rows=rows, responses=ys), arm_counts=counts
        )


Process = BanditProcess | ArProcess | RoundRobinProcess
