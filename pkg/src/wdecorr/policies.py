"""Bandit data-generating processes.

Arms are encoded as basis vectors, so a trace is a special adaptive dataset
whose Gram matrix is diag(N_1, ..., N_p) with N_a the pull count of arm a.
Three selection rules are provided: epsilon-greedy on posterior means (ECB),
a law-of-iterated-logarithm UCB score, and Thompson sampling. ECB and TS
keep independent Gaussian posteriors per arm with an assumed (configurable)
observation variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionMismatch, NonPositiveVariance, UnsupportedPolicy
from .linmodel import AdaptiveDataset
from .noise import NoiseSpec

POLICY_KINDS = ("ECB", "UCB", "TS")

# Variance of Unif([-1, 1]); the default assumed observation variance.
UNIT_UNIFORM_VARIANCE = 1.0 / 3.0


@dataclass(frozen=True)
class BanditEnv:
    """Environment: true mean reward per arm plus mean-zero reward noise."""

    arm_means: tuple
    noise: NoiseSpec
    horizon: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "arm_means", tuple(float(m) for m in self.arm_means))
        if len(self.arm_means) < 1:
            raise ConfigError("need at least one arm")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")

    @property
    def p(self) -> int:
        return len(self.arm_means)


@dataclass(frozen=True)
class UcbParams:
    """Constants of the lil'UCB-style score; all must be positive."""

    epsilon_lil: float = 0.01
    beta_lil: float = 0.5
    delta: float = 0.1

    def __post_init__(self) -> None:
        if min(self.epsilon_lil, self.beta_lil, self.delta) <= 0:
            raise ConfigError("UCB parameters must be positive")


@dataclass(frozen=True)
class PolicySpec:
    """Configuration of a selection rule.

    epsilon only matters for ECB; the Gaussian prior (prior_mean, prior_var)
    and assumed_noise_var drive the posterior updates of ECB and TS;
    ucb_params drives UCB.
    """

    kind: str
    epsilon: float = 0.1
    prior_mean: float = 0.3
    prior_var: float = 0.33
    assumed_noise_var: float = UNIT_UNIFORM_VARIANCE
    ucb_params: UcbParams = field(default_factory=UcbParams)

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.prior_var <= 0 or self.assumed_noise_var <= 0:
            raise NonPositiveVariance("prior_var and assumed_noise_var must be positive")


@dataclass(frozen=True)
class BanditTrace:
    """One simulated run: the basis-vector dataset plus arm bookkeeping."""

    dataset: AdaptiveDataset
    arm_counts: np.ndarray
    per_step_arms: np.ndarray

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def p(self) -> int:
        return self.dataset.p


def posterior_update(mean: float, var: float, y: float, noise_var: float) -> tuple[float, float]:
    """One conjugate Gaussian update of an arm's belief.

    Returns (mean', var') with 1/var' = 1/var + 1/noise_var. A huge
    noise_var makes the observation uninformative and leaves the belief
    essentially unchanged.
    """
    if var <= 0 or noise_var <= 0:
        raise NonPositiveVariance("variances must be positive")
    var_new = 1.0 / (1.0 / var + 1.0 / noise_var)
    mean_new = var_new * (mean / var + y / noise_var)
    return mean_new, var_new


class PolicyState:
    """Mutable per-trace selection state. Not shared across traces."""

    def __init__(self, spec: PolicySpec, p: int):
        if p < 1:
            raise DimensionMismatch("need at least one arm")
        self.spec = spec
        self.p = p
        self.counts = [0] * p
        self.step = 0
        if spec.kind in ("ECB", "TS"):
            self.post_means = [spec.prior_mean] * p
            self.post_vars = [spec.prior_var] * p
        else:
            self.emp_means = [0.0] * p

    def observe(self, arm: int, y: float) -> None:
        spec = self.spec
        if spec.kind in ("ECB", "TS"):
            self.post_means[arm], self.post_vars[arm] = posterior_update(
                self.post_means[arm], self.post_vars[arm], y, spec.assumed_noise_var
            )
        else:
            c = self.counts[arm]
            self.emp_means[arm] = (self.emp_means[arm] * c + y) / (c + 1)
        self.counts[arm] += 1
        self.step += 1


def _argmax(values) -> int:
    # ties broken by lowest index
    best, best_v = 0, values[0]
    for i in range(1, len(values)):
        if values[i] > best_v:
            best, best_v = i, values[i]
    return best


def _ucb_score(mean: float, count: int, spec: PolicySpec) -> float:
    u = spec.ucb_params
    bonus = (1.0 + u.beta_lil) * math.sqrt(
        2.0
        * spec.assumed_noise_var
        * (1.0 + u.epsilon_lil)
        * math.log(math.log((1.0 + u.epsilon_lil) * count + 2.0) / u.delta)
        / count
    )
    return mean + bonus


def select_arm(state: PolicyState, rng: np.random.Generator) -> int:
    """Pick the next arm.

    ECB: with probability epsilon a uniformly random arm (the greedy arm
    included), otherwise the largest posterior mean. UCB: any arm with zero
    pulls first, otherwise the largest lil score. TS: the argmax of one
    posterior draw per arm. All ties break to the lowest index.
    """
    spec, p = state.spec, state.p
    if spec.kind == "ECB":
        if spec.epsilon > 0.0 and rng.random() < spec.epsilon:
            return int(rng.integers(p))
        return _argmax(state.post_means)
    if spec.kind == "TS":
        draws = [
            state.post_means[a] + math.sqrt(state.post_vars[a]) * rng.standard_normal()
            for a in range(p)
        ]
        return _argmax(draws)
    # UCB
    for a in range(p):
        if state.counts[a] == 0:
            return a
    scores = [_ucb_score(state.emp_means[a], state.counts[a], spec) for a in range(p)]
    return _argmax(scores)


def run_bandit(env: BanditEnv, policy: PolicySpec, seed) -> BanditTrace:
    """Simulate one trace: select, observe y = beta_a + noise, update.

    Deterministic given the seed; the per-step randomness (exploration
    coins, posterior draws, reward noise) all comes from one generator in a
    fixed order.
    """
    rng = np.random.default_rng(seed)
    p, n = env.p, env.horizon
    state = PolicyState(policy, p)
    arms = np.empty(n, dtype=np.int64)
    ys = np.empty(n)
    noise = env.noise.draw(rng, n)
    means = env.arm_means
    for i in range(n):
        a = select_arm(state, rng)
        y = means[a] + noise[i]
        state.observe(a, y)
        arms[i] = a
        ys[i] = y
    rows = np.eye(p)[arms]
    counts = np.bincount(arms, minlength=p)
    return BanditTrace(
        dataset=AdaptiveDataset(rows=rows, responses=ys),
        arm_counts=counts,
        per_step_arms=arms,
    )


def exploration_rate(policy: PolicySpec, p: int) -> float:
    """Uniform per-step exploration lower bound.

    ECB explores each arm with probability at least epsilon/p at every
    step. UCB and TS admit no closed-form lower bound; callers should fall
    back to pilot simulation.
    """
    if policy.kind != "ECB":
        raise UnsupportedPolicy(
            f"no closed-form exploration bound for {policy.kind}; use pilot simulation"
        )
    return policy.epsilon / p
