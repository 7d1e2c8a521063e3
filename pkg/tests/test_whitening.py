"""Whitening recursion: hand-derived values, closed-form oracles, and the
exact identities the construction satisfies."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wdecorr.errors import DimensionMismatch, NonFiniteInput, NotOrthogonal
from wdecorr.linmodel import AdaptiveDataset, ols_fit, w_decorrelate
from wdecorr.whitening import (
    WhiteningState,
    WhiteningStream,
    orthogonal_variance_oracle,
    product_form_bias,
    reverse_sgd_estimate,
    whitening_run,
    whitening_step,
)


def random_design(rng, p, n, scale=1.0):
    return scale * rng.normal(size=(n, p))


# ---------------------------------------------------------------------------
# whitening_step


def test_step_zero_covariate_only_advances_step():
    state = WhiteningState.initial(3, lam=2.0)
    out = whitening_step(state, np.zeros(3))
    assert out.step == 1
    np.testing.assert_array_equal(out.bias_matrix, np.eye(3))
    np.testing.assert_array_equal(out.columns[0], np.zeros(3))
    np.testing.assert_array_equal(out.w_gram, np.zeros((3, 3)))


def test_step_hand_recursion_p1():
    # lam=1, x=1 twice: w = 1/2 then 1/4, M = 1/2 then 1/4
    state = WhiteningState.initial(1, lam=1.0)
    s1 = whitening_step(state, [1.0])
    assert s1.columns[0][0] == 0.5 and s1.bias_matrix[0, 0] == 0.5
    s2 = whitening_step(s1, [1.0])
    assert s2.columns[1][0] == 0.25 and s2.bias_matrix[0, 0] == 0.25
    assert s2.w_gram[0, 0] == 0.3125


def test_step_repeated_basis_vector_halves_one_diagonal():
    # lam=1, unit basis arm pulled k times: M[a,a] = (1/2)^k, rest untouched
    p, a, k = 3, 1, 5
    state = WhiteningState.initial(p, lam=1.0)
    for _ in range(k):
        state = whitening_step(state, np.eye(p)[a])
    expected = np.eye(p)
    expected[a, a] = 0.5**k
    np.testing.assert_allclose(state.bias_matrix, expected, rtol=0, atol=1e-15)


def test_step_rejects_nonfinite():
    state = WhiteningState.initial(2, lam=1.0)
    with pytest.raises(NonFiniteInput):
        whitening_step(state, [np.nan, 0.0])
    with pytest.raises(DimensionMismatch):
        whitening_step(state, [1.0, 2.0, 3.0])


def test_run_matches_folded_steps():
    rng = np.random.default_rng(7)
    rows = random_design(rng, 3, 12)
    run = whitening_run(rows, lam=4.0)
    state = WhiteningState.initial(3, lam=4.0)
    for x in rows:
        state = whitening_step(state, x)
    np.testing.assert_allclose(run.bias_matrix, state.bias_matrix, atol=1e-15)
    np.testing.assert_allclose(run.w_gram, state.w_gram, atol=1e-15)
    np.testing.assert_allclose(run.columns, np.asarray(state.columns), atol=1e-15)


# ---------------------------------------------------------------------------
# whitening_run


def test_run_empty_sequence():
    run = whitening_run([], lam=1.0, dim=2)
    assert run.n == 0 and run.p == 2
    np.testing.assert_array_equal(run.bias_matrix, np.eye(2))
    assert run.telescoping_residual == 0.0


def test_run_empty_needs_dim():
    with pytest.raises(DimensionMismatch):
        whitening_run([], lam=1.0)


def test_run_hand_telescoping_values():
    # lam=1, rows=[1,1]: drop in ||M||_F^2 is 0.75 then 0.1875, each equal
    # to (2 lam + x^2) ||w||^2 = 3*0.25 and 3*0.0625
    run = whitening_run([1.0, 1.0], lam=1.0)
    assert run.telescoping_residual <= 1e-16
    np.testing.assert_allclose(run.columns.ravel(), [0.5, 0.25], rtol=0, atol=0)
    assert run.w_gram[0, 0] == 0.3125


def test_run_telescoping_residual_on_bandit_trace():
    rng = np.random.default_rng(3)
    arms = rng.integers(0, 2, size=1000)
    rows = np.eye(2)[arms]
    run = whitening_run(rows, lam=20.0)
    assert run.telescoping_residual <= 1e-9


@settings(max_examples=40, deadline=None)
@given(
    p=st.integers(1, 4),
    n=st.integers(0, 30),
    lam=st.floats(0.5, 100.0),
    seed=st.integers(0, 2**31),
)
def test_telescoping_identity_property(p, n, lam, seed):
    rows = random_design(np.random.default_rng(seed), p, n, scale=2.0)
    run = whitening_run(rows, lam=lam, dim=p)
    assert run.telescoping_residual <= 1e-9 * p


@settings(max_examples=40, deadline=None)
@given(
    p=st.integers(1, 4),
    n=st.integers(0, 30),
    lam=st.floats(0.5, 100.0),
    seed=st.integers(0, 2**31),
)
def test_variance_bound_property(p, n, lam, seed):
    # sum over steps of (2 lam + ||x||^2) ||w||^2 telescopes to p - ||M_n||_F^2,
    # so Tr(W W') <= (p - ||M_n||_F^2) / (2 lam) <= p / (2 lam)
    rows = random_design(np.random.default_rng(seed), p, n, scale=2.0)
    run = whitening_run(rows, lam=lam, dim=p)
    drops = 0.0
    for i in range(n):
        x = rows[i]
        drops += (2 * lam + float(x @ x)) * float(run.columns[i] @ run.columns[i])
    fro2 = float(np.sum(run.bias_matrix**2))
    assert abs(drops - (p - fro2)) <= 1e-9
    trace = float(np.trace(run.w_gram))
    assert trace <= (p - fro2) / (2 * lam) + 1e-12
    assert trace <= p / (2 * lam) + 1e-12


def test_prefix_stability():
    # columns depend only on the covariates seen so far: rerunning on a
    # prefix reproduces the first columns of the full run exactly
    rng = np.random.default_rng(11)
    rows = random_design(rng, 3, 25)
    full = whitening_run(rows, lam=3.0)
    for i in (0, 1, 7, 24):
        prefix = whitening_run(rows[: i + 1], lam=3.0)
        np.testing.assert_array_equal(prefix.columns, full.columns[: i + 1])


# ---------------------------------------------------------------------------
# product-form oracle


def test_product_form_trivial_empty():
    np.testing.assert_array_equal(product_form_bias([], 1.0, dim=3), np.eye(3))


def test_product_form_hand_value():
    np.testing.assert_allclose(product_form_bias([1.0, 1.0], 1.0), [[0.25]], atol=0)


@settings(max_examples=40, deadline=None)
@given(
    p=st.integers(1, 4),
    n=st.integers(0, 25),
    lam=st.floats(0.5, 50.0),
    seed=st.integers(0, 2**31),
)
def test_product_form_equals_recursion(p, n, lam, seed):
    rows = random_design(np.random.default_rng(seed), p, n)
    run = whitening_run(rows, lam=lam, dim=p)
    oracle = product_form_bias(rows, lam, dim=p)
    np.testing.assert_allclose(run.bias_matrix, oracle, rtol=0, atol=1e-10)


# ---------------------------------------------------------------------------
# orthogonal-design variance oracle


def test_orthogonal_oracle_two_pulls_exact():
    # single unit arm pulled twice at lam=1: 1/4 * (1 + 1/4) = 5/16, exact
    got = orthogonal_variance_oracle([[1.0]], [0, 0], lam=1.0)
    assert got[0, 0] == 5.0 / 16.0
    run = whitening_run([1.0, 1.0], lam=1.0)
    assert run.w_gram[0, 0] == got[0, 0]


def test_orthogonal_oracle_no_pulls():
    got = orthogonal_variance_oracle(np.eye(2), [], lam=1.0)
    np.testing.assert_array_equal(got, np.zeros((2, 2)))


def test_orthogonal_oracle_alternating_pulls():
    pulls = [0, 1] * 5
    got = orthogonal_variance_oracle(np.eye(2), pulls, lam=1.0)
    run = whitening_run(np.eye(2)[pulls], lam=1.0)
    np.testing.assert_allclose(run.w_gram, got, rtol=0, atol=1e-12)


def test_orthogonal_oracle_scaled_arms_random_pulls():
    rng = np.random.default_rng(5)
    arms = np.diag([1.0, 2.0, 0.5])  # orthogonal, not unit norm
    for seed in range(5):
        pulls = np.random.default_rng(seed).integers(0, 3, size=40)
        got = orthogonal_variance_oracle(arms, pulls, lam=2.5)
        run = whitening_run(arms[pulls], lam=2.5)
        np.testing.assert_allclose(run.w_gram, got, rtol=0, atol=1e-12)


def test_orthogonal_oracle_rejects_oblique_arms():
    with pytest.raises(NotOrthogonal):
        orthogonal_variance_oracle([[1.0, 0.0], [1.0, 1.0]], [0, 1], lam=1.0)


# ---------------------------------------------------------------------------
# reverse implicit SGD equivalence


def test_reverse_sgd_empty_returns_beta_ols():
    data = AdaptiveDataset(np.zeros((0, 2)), np.zeros(0))
    np.testing.assert_array_equal(reverse_sgd_estimate(data, [1.5, -2.0], 3.0), [1.5, -2.0])


def test_reverse_sgd_hand_value():
    data = AdaptiveDataset([[1.0], [1.0]], [0.0, 2.0])
    got = reverse_sgd_estimate(data, [1.0], lam=1.0)
    np.testing.assert_allclose(got, [0.75], rtol=0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(
    p=st.integers(1, 3),
    n=st.integers(5, 50),
    lam=st.floats(0.5, 20.0),
    seed=st.integers(0, 2**31),
)
def test_reverse_sgd_equals_decorrelation(p, n, lam, seed):
    rng = np.random.default_rng(seed)
    rows = random_design(rng, p, max(n, p))
    y = rng.normal(size=rows.shape[0])
    data = AdaptiveDataset(rows, y)
    fit = ols_fit(data)
    est = w_decorrelate(fit, whitening_run(rows, lam), data)
    got = reverse_sgd_estimate(data, fit.beta_ols, lam)
    scale = max(1.0, float(np.linalg.norm(est.beta_d)))
    assert float(np.linalg.norm(got - est.beta_d)) <= 1e-8 * scale


# ---------------------------------------------------------------------------
# commuting-design operator-norm bound (provable form)


def test_commuting_design_bias_bound():
    # For commuting designs the product form gives, along each arm,
    # (1 - ||v||^2/(lam + ||v||^2))^N <= exp(-N ||v||^2 / (lam + C^2)) with
    # C^2 the largest squared covariate norm, hence
    # ||M_n||_op <= exp(-lambda_min / (lam + C^2)).
    rng = np.random.default_rng(19)
    for _ in range(50):
        n = int(rng.integers(2, 300))
        counts = rng.multinomial(n, [0.5, 0.5])
        arms = np.concatenate([np.zeros(counts[0], np.int64), np.ones(counts[1], np.int64)])
        rng.shuffle(arms)
        rows = np.eye(2)[arms]
        lam = float(rng.uniform(1.0, 100.0))
        run = whitening_run(rows, lam=lam)
        op = float(np.linalg.norm(run.bias_matrix, 2))
        lam_min = float(np.linalg.eigvalsh(rows.T @ rows)[0])
        assert op <= math.exp(-lam_min / (lam + 1.0)) + 1e-12


# ---------------------------------------------------------------------------
# streaming mode


def test_stream_matches_batch_decorrelation():
    rng = np.random.default_rng(23)
    rows = random_design(rng, 2, 60)
    y = rng.normal(size=60)
    data = AdaptiveDataset(rows, y)
    fit = ols_fit(data)
    run = whitening_run(rows, lam=5.0)
    est = w_decorrelate(fit, run, data)
    stream = WhiteningStream(dim=2, lam=5.0)
    for x, yi in zip(rows, y):
        stream.update(x, yi)
    np.testing.assert_allclose(stream.decorrelate(fit.beta_ols), est.beta_d, atol=1e-12)
    np.testing.assert_allclose(stream.w_gram, run.w_gram, atol=1e-14)
    np.testing.assert_allclose(stream.bias_matrix, run.bias_matrix, atol=1e-14)
