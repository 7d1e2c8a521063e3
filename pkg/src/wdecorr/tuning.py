"""Regularizer selection.

Three rules are supported. "percentile" runs pilot simulations of the
process on a seed stream disjoint from any evaluation seeds and returns a
low empirical percentile of lambda_min(X'X), optionally divided by
log log n; this treats lambda as set from knowledge of the policy, never
from the data being analyzed. "exploration" converts a per-step exploration
floor mu into n*mu / log(p log n) and exists only for policies with such a
floor (ECB). "fixed" passes a value through. Every rule clamps the result
to at least 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsupportedPolicy
from .policies import exploration_rate
from .processes import BanditProcess, Process

LAMBDA_RULE_KINDS = ("percentile", "exploration", "fixed")


@dataclass(frozen=True)
class LambdaRule:
    kind: str = "percentile"
    percentile: float = 0.05
    pilot_runs: int = 200
    fixed_value: float = 1.0
    loglog_discount: bool = False

    def __post_init__(self) -> None:
        if self.kind not in LAMBDA_RULE_KINDS:
            raise ConfigError(
                f"unknown lambda rule {self.kind!r}; expected one of {LAMBDA_RULE_KINDS}"
            )
        if not 0.0 < self.percentile < 1.0:
            raise ConfigError("percentile must lie in (0, 1)")
        if self.pilot_runs < 1:
            raise ConfigError("pilot_runs must be >= 1")
        if self.kind == "fixed" and self.fixed_value <= 0:
            raise ConfigError("fixed_value must be positive")


def pilot_lambda_mins(process: Process, runs: int, seed) -> np.ndarray:
    """lambda_min(X'X) from `runs` independent pilot simulations.

    Pilot k draws its generator from child k of SeedSequence(seed), a
    stream disjoint from the plain integer seeds used for evaluation
    trials.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(runs)
    out = np.empty(runs)
    for k in range(runs):
        dataset = process.simulate(children[k]).dataset
        gram = dataset.rows.T @ dataset.rows
        out[k] = np.linalg.eigvalsh(gram)[0]
    return out


def select_lambda(rule: LambdaRule, process: Process, seed) -> float:
    """Resolve a LambdaRule against a process. Deterministic given the seed."""
    if rule.kind == "fixed":
        return max(float(rule.fixed_value), 1.0)
    if rule.kind == "exploration":
        if not isinstance(process, BanditProcess):
            raise UnsupportedPolicy("the exploration rule applies only to bandit processes")
        mu = exploration_rate(process.policy, process.p)  # raises for UCB/TS
        n = process.n
        lam = n * mu / math.log(process.p * math.log(n))
        return max(lam, 1.0)
    # percentile
    lams = pilot_lambda_mins(process, rule.pilot_runs, seed)
    # lower-nearest-rank: conservative (never above the interpolated value)
    lam = float(np.quantile(lams, rule.percentile, method="lower"))
    if rule.loglog_discount:
        lam /= math.log(math.log(process.n))
    return max(lam, 1.0)


def pilot_lambda_quantiles(
    process: Process, runs: int, seed, qs=(0.01, 0.05, 0.25, 0.50)
) -> dict[float, float]:
    """Summary table of pilot lambda_min quantiles (for reporting)."""
    lams = pilot_lambda_mins(process, runs, seed)
    return {float(q): float(np.quantile(lams, q, method="lower")) for q in qs}
