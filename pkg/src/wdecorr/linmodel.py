"""Core linear-model types: OLS fitting, noise-variance estimation, and
application of the whitening correction to an OLS fit.

The data model is the time-ordered regression y_i = <x_i, beta> + eps_i where
the covariate x_i may depend on everything observed before time i. Ordering
is part of the data and is never permuted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, SingularDesign, StaleWhitening

# Relative eigenvalue floor for treating X'X as invertible, scaled by the
# average diagonal mass Tr(G)/p. p is small here; stability beats speed.
GRAM_RTOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AdaptiveDataset:
    """Time-ordered covariate/response pairs.

    rows has shape (n, p) with row i collected at time i; responses has
    shape (n,). Both are stored as read-only float64 arrays.
    """

    rows: np.ndarray
    responses: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        y = np.asarray(self.responses, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2:
            raise DimensionMismatch(f"rows must be 2-d (n, p), got shape {rows.shape}")
        if y.ndim != 1:
            raise DimensionMismatch(f"responses must be 1-d, got shape {y.shape}")
        if rows.shape[0] != y.shape[0]:
            raise DimensionMismatch(
                f"{rows.shape[0]} covariate rows but {y.shape[0]} responses"
            )
        if rows.shape[1] < 1:
            raise DimensionMismatch("covariate dimension p must be >= 1")
        object.__setattr__(self, "rows", _readonly(rows.copy()))
        object.__setattr__(self, "responses", _readonly(y.copy()))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class OlsFit:
    """Least-squares fit with the Gram matrix and its inverse.

    sigma2_hat is ||y - X beta||^2 / n (or /(n-p) when fitted with
    dof_correction), a consistent noise-variance estimate under minimal
    excitation conditions even for adaptively collected rows.
    """

    beta_ols: np.ndarray
    gram: np.ndarray
    gram_inverse: np.ndarray
    sigma2_hat: float
    residuals: np.ndarray
    lambda_min: float
    lambda_max: float

    @property
    def p(self) -> int:
        return self.beta_ols.shape[0]

    @property
    def n(self) -> int:
        return self.residuals.shape[0]


@dataclass(frozen=True)
class DecorrelatedEstimate:
    """OLS estimate plus the whitening correction W (y - X beta_ols).

    Carries the whitening byproducts needed for inference: w_gram = W W'
    (the variance shape) and bias_matrix = I - W X (whose norms bound the
    residual bias).
    """

    beta_d: np.ndarray
    beta_ols: np.ndarray
    w_gram: np.ndarray
    bias_matrix: np.ndarray
    sigma2_hat: float
    lam: float


class BiasVarianceDiagnostics(NamedTuple):
    frobenius_bias: float
    operator_bias: float
    variance_trace: float


def ols_fit(data: AdaptiveDataset, dof_correction: bool = False) -> OlsFit:
    """Fit ordinary least squares via a symmetric eigendecomposition of X'X.

    Raises SingularDesign when n < p or the minimum eigenvalue of X'X falls
    below GRAM_RTOL * Tr(X'X)/p, meaning some direction was never explored.
    """
    X, y = data.rows, data.responses
    n, p = data.n, data.p
    if n < p:
        raise SingularDesign(f"need at least p={p} rows, got n={n}")
    gram = X.T @ X
    evals, evecs = np.linalg.eigh(gram)
    lam_min, lam_max = float(evals[0]), float(evals[-1])
    tol = GRAM_RTOL * np.trace(gram) / p
    if lam_min <= tol:
        raise SingularDesign(
            f"lambda_min(X'X) = {lam_min:.3e} <= tolerance {tol:.3e}: "
            "the design does not span all p directions"
        )
    gram_inverse = (evecs / evals) @ evecs.T
    beta = gram_inverse @ (X.T @ y)
    residuals = y - X @ beta
    denom = n - p if dof_correction else n
    sigma2 = float(residuals @ residuals) / denom
    return OlsFit(
        beta_ols=_readonly(beta),
        gram=_readonly(gram),
        gram_inverse=_readonly(gram_inverse),
        sigma2_hat=sigma2,
        residuals=_readonly(residuals),
        lambda_min=lam_min,
        lambda_max=lam_max,
    )


def w_decorrelate(fit: OlsFit, whitening, data: AdaptiveDataset) -> DecorrelatedEstimate:
    """Apply the whitening correction: beta_d = beta_ols + sum_i w_i * residual_i.

    `whitening` must come from a run over the same covariate sequence as
    `data` (same n and p, same time order); only its length and dimension
    can be checked here.
    """
    if whitening.p != data.p or fit.p != data.p:
        raise DimensionMismatch(
            f"dimension mismatch: whitening p={whitening.p}, data p={data.p}, fit p={fit.p}"
        )
    if whitening.n != data.n:
        raise StaleWhitening(
            f"whitening covers {whitening.n} rows but the dataset has {data.n}"
        )
    if fit.n != data.n:
        raise DimensionMismatch(f"fit has {fit.n} residuals but the dataset has {data.n} rows")
    beta_d = fit.beta_ols + whitening.columns.T @ fit.residuals
    return DecorrelatedEstimate(
        beta_d=_readonly(beta_d),
        beta_ols=fit.beta_ols,
        w_gram=whitening.w_gram,
        bias_matrix=whitening.bias_matrix,
        sigma2_hat=fit.sigma2_hat,
        lam=whitening.lam,
    )


def bias_variance_diagnostics(est) -> BiasVarianceDiagnostics:
    """Norms controlling the bias/variance split of a decorrelated estimate.

    Accepts anything exposing `bias_matrix` and `w_gram` (a
    DecorrelatedEstimate or a WhiteningResult). Returns the Frobenius and
    operator norms of I - W X and the trace of W W'.
    """
    M = np.asarray(est.bias_matrix, dtype=np.float64)
    w_gram = np.asarray(est.w_gram, dtype=np.float64)
    return BiasVarianceDiagnostics(
        frobenius_bias=float(np.linalg.norm(M, "fro")),
        operator_bias=float(np.linalg.norm(M, 2)),
        variance_trace=float(np.trace(w_gram)),
    )
