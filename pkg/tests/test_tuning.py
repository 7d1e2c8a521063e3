"""Regularizer selection rules."""

import math

import numpy as np
import pytest

from wdecorr.errors import ConfigError, UnsupportedPolicy
from wdecorr.noise import unif
from wdecorr.policies import BanditEnv, PolicySpec
from wdecorr.processes import ArProcess, BanditProcess, RoundRobinProcess
from wdecorr.timeseries import ArSpec
from wdecorr.tuning import LambdaRule, pilot_lambda_quantiles, select_lambda

ECB_PROCESS = BanditProcess(
    env=BanditEnv(arm_means=(0.3, 0.3), noise=unif(1.0), horizon=1000),
    policy=PolicySpec(kind="ECB", epsilon=0.1),
)


def test_fixed_rule_passthrough():
    rule = LambdaRule(kind="fixed", fixed_value=7.0)
    assert select_lambda(rule, ECB_PROCESS, seed=0) == 7.0


def test_fixed_rule_clamped_to_one():
    rule = LambdaRule(kind="fixed", fixed_value=0.25)
    assert select_lambda(rule, ECB_PROCESS, seed=0) == 1.0


def test_exploration_rule_plug_in_value():
    # n mu / log(p log n) with mu = eps/p = 0.05, n = 1000, p = 2
    rule = LambdaRule(kind="exploration")
    lam = select_lambda(rule, ECB_PROCESS, seed=0)
    expected = 1000 * 0.05 / math.log(2 * math.log(1000))
    assert lam == pytest.approx(expected, rel=1e-12)
    assert lam == pytest.approx(19.0, abs=0.1)


def test_exploration_rule_unsupported_cases():
    rule = LambdaRule(kind="exploration")
    ucb = BanditProcess(env=ECB_PROCESS.env, policy=PolicySpec(kind="UCB"))
    with pytest.raises(UnsupportedPolicy):
        select_lambda(rule, ucb, seed=0)
    ar = ArProcess(spec=ArSpec(coefficients=(1.0,), n=100, noise=unif(1.0)))
    with pytest.raises(UnsupportedPolicy):
        select_lambda(rule, ar, seed=0)


def test_percentile_rule_round_robin_is_exact():
    # every pilot gives lambda_min = floor(n/p); any percentile returns it
    process = RoundRobinProcess(p=2, n=1000)
    for q in (0.01, 0.05, 0.5, 0.99):
        rule = LambdaRule(kind="percentile", percentile=q, pilot_runs=20)
        assert select_lambda(rule, process, seed=0) == 500.0


def test_percentile_rule_monotone_in_percentile():
    lams = [
        select_lambda(
            LambdaRule(kind="percentile", percentile=q, pilot_runs=60), ECB_PROCESS, seed=42
        )
        for q in (0.05, 0.25, 0.5, 0.75)
    ]
    assert all(a <= b for a, b in zip(lams, lams[1:]))


def test_percentile_rule_deterministic_in_seed():
    rule = LambdaRule(kind="percentile", percentile=0.05, pilot_runs=50)
    a = select_lambda(rule, ECB_PROCESS, seed=9)
    b = select_lambda(rule, ECB_PROCESS, seed=9)
    c = select_lambda(rule, ECB_PROCESS, seed=10)
    assert a == b
    assert a != c  # different pilot stream almost surely moves the quantile


def test_loglog_discount_divides():
    plain = select_lambda(
        LambdaRule(kind="percentile", percentile=0.05, pilot_runs=50), ECB_PROCESS, seed=4
    )
    discounted = select_lambda(
        LambdaRule(kind="percentile", percentile=0.05, pilot_runs=50, loglog_discount=True),
        ECB_PROCESS,
        seed=4,
    )
    assert discounted == pytest.approx(plain / math.log(math.log(1000)), rel=1e-12)


def test_pilot_quantiles_are_ordered():
    qs = pilot_lambda_quantiles(ECB_PROCESS, runs=60, seed=1)
    vals = [qs[q] for q in sorted(qs)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_rule_validation():
    with pytest.raises(ConfigError):
        LambdaRule(kind="nope")
    with pytest.raises(ConfigError):
        LambdaRule(kind="percentile", percentile=1.5)
    with pytest.raises(ConfigError):
        LambdaRule(kind="fixed", fixed_value=-1.0)
