"""Online construction of the whitening matrix W.

Starting from M_0 = I_p, each covariate x_i appends the column

    w_i = M_{i-1} x_i / (lam + ||x_i||^2),      M_i = M_{i-1} - w_i x_i',

so column i depends only on x_1..x_i and lam, never on any response or on
future covariates. That predictability is what lets the correction
W (y - X beta_ols) be split into a bias term (I - W X)(beta_ols - beta)
and a martingale noise term W eps.

Two independent closed forms are kept alongside the recursion as oracles:
the ordered product form of I - W X (any design) and the direct geometric
summation of W W' (orthogonal designs). Every step also satisfies the exact
telescoping identity

    ||M_{i-1}||_F^2 - ||M_i||_F^2 = (2 lam + ||x_i||^2) ||w_i||^2,

which whitening_run tracks as a residual; summing it gives the deterministic
variance bound Tr(W W') <= p / (2 lam).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput, NotOrthogonal


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_rows(rows, dim: int | None) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.size == 0:
        # a carried shape (0, p) keeps its dimension; a bare empty sequence
        # needs an explicit dim
        p = rows.shape[1] if rows.ndim == 2 and rows.shape[1] > 0 else dim
        if p is None:
            raise DimensionMismatch(
                "cannot infer the covariate dimension from an empty sequence; pass dim="
            )
        if dim is not None and p != dim:
            raise DimensionMismatch(f"rows have p={p}, expected p={dim}")
        return np.zeros((0, p))
    if rows.ndim == 1:
        rows = rows[:, None]
    if rows.ndim != 2:
        raise DimensionMismatch(f"rows must be 2-d (n, p), got shape {rows.shape}")
    if dim is not None and rows.shape[1] != dim:
        raise DimensionMismatch(f"rows have p={rows.shape[1]}, expected p={dim}")
    return rows


@dataclass(frozen=True)
class WhiteningState:
    """State after i whitening steps: the bias matrix, the accumulated
    columns, and the running Gram of W. Treated as an immutable value;
    whitening_step returns a new state."""

    lam: float
    bias_matrix: np.ndarray
    columns: tuple
    w_gram: np.ndarray
    step: int

    @classmethod
    def initial(cls, dim: int, lam: float) -> "WhiteningState":
        if lam <= 0:
            raise ValueError(f"lam must be positive, got {lam}")
        if dim < 1:
            raise DimensionMismatch("dimension must be >= 1")
        return cls(
            lam=float(lam),
            bias_matrix=_readonly(np.eye(dim)),
            columns=(),
            w_gram=_readonly(np.zeros((dim, dim))),
            step=0,
        )

    @property
    def p(self) -> int:
        return self.bias_matrix.shape[0]


@dataclass(frozen=True)
class WhiteningResult:
    """Finished whitening run.

    columns has shape (n, p) with row i holding w_i'. telescoping_residual
    is the largest per-step deviation of the exact telescoping identity, a
    machine-checkable certificate that the recursion was computed correctly
    (it is identically zero in real arithmetic).
    """

    lam: float
    columns: np.ndarray
    bias_matrix: np.ndarray
    w_gram: np.ndarray
    telescoping_residual: float

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def p(self) -> int:
        return self.columns.shape[1]


def whitening_step(state: WhiteningState, x) -> WhiteningState:
    """Append one covariate to a whitening state.

    A zero covariate contributes a zero column and leaves the bias matrix
    untouched (only the step count advances).
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != state.p:
        raise DimensionMismatch(f"covariate has length {x.shape[0]}, expected {state.p}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("covariate contains NaN or infinity")
    nx2 = float(x @ x)
    w = state.bias_matrix @ x / (state.lam + nx2)
    M = state.bias_matrix - np.outer(w, x)
    w_gram = state.w_gram + np.outer(w, w)
    return WhiteningState(
        lam=state.lam,
        bias_matrix=_readonly(M),
        columns=state.columns + (_readonly(w),),
        w_gram=_readonly(w_gram),
        step=state.step + 1,
    )


def whitening_run(rows, lam: float, dim: int | None = None) -> WhiteningResult:
    """Fold the whitening recursion over a covariate sequence in time order.

    Parameters
    ----------
    rows : array-like of shape (n, p), or (n,) for p = 1
    lam : positive regularizer trading bias (small lam) for variance (large lam)
    dim : required only when rows is an empty plain sequence

    Returns a WhiteningResult; raises NonFiniteInput on NaN/Inf covariates.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    rows = _check_rows(rows, dim)
    n, p = rows.shape
    if not np.all(np.isfinite(rows)):
        raise NonFiniteInput("covariates contain NaN or infinity")
    lam = float(lam)
    M = np.eye(p)
    cols = np.zeros((n, p))
    w_gram = np.zeros((p, p))
    fro_prev = float(p)
    max_resid = 0.0
    for i in range(n):
        x = rows[i]
        nx2 = float(x @ x)
        w = M @ x / (lam + nx2)
        M -= np.outer(w, x)
        w_gram += np.outer(w, w)
        cols[i] = w
        fro = float(np.einsum("ij,ij->", M, M))
        resid = abs((fro_prev - fro) - (2.0 * lam + nx2) * float(w @ w))
        if resid > max_resid:
            max_resid = resid
        fro_prev = fro
    return WhiteningResult(
        lam=lam,
        columns=_readonly(cols),
        bias_matrix=_readonly(M),
        w_gram=_readonly(w_gram),
        telescoping_residual=max_resid,
    )


def product_form_bias(rows, lam: float, dim: int | None = None) -> np.ndarray:
    """Ordered-product oracle for the bias matrix.

    Multiplying M_i = M_{i-1} (I - x_i x_i' / (lam + ||x_i||^2)) out gives
    I - W X as the time-ordered product of the per-step factors, computed
    here without ever forming W. Factors do not commute in general, so the
    order matters.
    """
    rows = _check_rows(rows, dim)
    n, p = rows.shape
    P = np.eye(p)
    for i in range(n):
        x = rows[i]
        P = P @ (np.eye(p) - np.outer(x, x) / (lam + float(x @ x)))
    return P


def orthogonal_variance_oracle(arm_vectors, pull_sequence, lam: float) -> np.ndarray:
    """Direct-summation oracle for W W' when covariates come from a fixed
    set of mutually orthogonal arm vectors.

    For orthogonal arms the per-step factors commute and the column at a
    pull of arm a is r_a^{N_a(i-1)} v_a / (lam + ||v_a||^2) with
    r_a = 1 - ||v_a||^2 / (lam + ||v_a||^2) and N_a(i-1) the number of
    earlier pulls of a. W W' is summed term by term from that form; no
    geometric-series shortcut is taken.
    """
    V = np.asarray(arm_vectors, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    k, p = V.shape
    for a in range(k):
        for b in range(a + 1, k):
            na, nb = np.linalg.norm(V[a]), np.linalg.norm(V[b])
            if abs(float(V[a] @ V[b])) > 1e-10 * max(na * nb, 1.0):
                raise NotOrthogonal(f"arm vectors {a} and {b} are not orthogonal")
    pulls = np.asarray(pull_sequence, dtype=np.int64)
    if pulls.size and (pulls.min() < 0 or pulls.max() >= k):
        raise DimensionMismatch(f"pull indices must lie in [0, {k})")
    norms2 = np.einsum("ap,ap->a", V, V)
    r = 1.0 - norms2 / (lam + norms2)
    counts = np.zeros(k, dtype=np.int64)
    total = np.zeros((p, p))
    for a in pulls:
        coeff = r[a] ** (2 * counts[a]) / (lam + norms2[a]) ** 2
        total += coeff * np.outer(V[a], V[a])
        counts[a] += 1
    return total


def reverse_sgd_estimate(data, beta_ols, lam: float) -> np.ndarray:
    """Recompute the decorrelated estimate by implicit stochastic gradient
    steps taken backwards through the sample.

    Starting from beta_ols, each observation (x, y), visited from last to
    first, applies

        b <- (I - x x' / (lam + ||x||^2)) b + y x / (lam + ||x||^2).

    Unrolling shows the result equals beta_ols + W (y - X beta_ols) exactly,
    which makes this an independent equivalence oracle for the whitening
    path.
    """
    X, y = data.rows, data.responses
    b = np.asarray(beta_ols, dtype=np.float64).copy()
    if b.shape[0] != data.p:
        raise DimensionMismatch(f"beta_ols has length {b.shape[0]}, expected {data.p}")
    for i in range(data.n - 1, -1, -1):
        x = X[i]
        denom = lam + float(x @ x)
        b += (y[i] - float(x @ b)) * x / denom
    return b


class WhiteningStream:
    """Streaming variant for the service-style setting where y_i arrives
    with x_i: accumulates W y and I - W X online so the decorrelated
    estimate can be formed at the end without storing any columns.

    Memory is O(p^2) regardless of the stream length.
    """

    def __init__(self, dim: int, lam: float):
        if lam <= 0:
            raise ValueError(f"lam must be positive, got {lam}")
        self.lam = float(lam)
        self.bias_matrix = np.eye(dim)
        self.w_gram = np.zeros((dim, dim))
        self._wy = np.zeros(dim)
        self.step = 0

    @property
    def p(self) -> int:
        return self.bias_matrix.shape[0]

    def update(self, x, y: float) -> None:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.p:
            raise DimensionMismatch(f"covariate has length {x.shape[0]}, expected {self.p}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteInput("covariate contains NaN or infinity")
        w = self.bias_matrix @ x / (self.lam + float(x @ x))
        self.bias_matrix -= np.outer(w, x)
        self.w_gram += np.outer(w, w)
        self._wy += w * float(y)
        self.step += 1

    def decorrelate(self, beta_ols) -> np.ndarray:
        """beta_ols + W y - (W X) beta_ols, using W X = I - bias_matrix."""
        b = np.asarray(beta_ols, dtype=np.float64)
        wx = np.eye(self.p) - self.bias_matrix
        return b + self._wy - wx @ b
