"""Confidence intervals for linear functionals <v, beta> by three routes:
plain Gaussian OLS theory, a self-normalized concentration bound around a
ridge estimate, and the whitening-corrected estimate with its martingale
standard error.

Method names OLS_GSN / OLS_CONC / W_DECORR are stable identifiers used in
CSV output and must not change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DimensionMismatch, ZeroDirection
from .linmodel import AdaptiveDataset, DecorrelatedEstimate, OlsFit

METHOD_OLS_GSN = "OLS_GSN"
METHOD_OLS_CONC = "OLS_CONC"
METHOD_W_DECORR = "W_DECORR"
METHODS = (METHOD_OLS_GSN, METHOD_OLS_CONC, METHOD_W_DECORR)

# Quantile arguments outside this open interval are rejected rather than
# silently saturated.
_Q_MIN = 1e-8


def normal_quantile(q: float) -> float:
    """Standard normal quantile, accurate to machine precision on
    (1e-8, 1 - 1e-8); values outside that range raise ValueError."""
    if not _Q_MIN < q < 1.0 - _Q_MIN:
        raise ValueError(f"quantile argument {q!r} outside ({_Q_MIN}, {1 - _Q_MIN})")
    return float(ndtri(q))


@dataclass(frozen=True)
class Interval:
    """A (possibly one-sided-calibrated) confidence interval for <v, beta>."""

    target: np.ndarray
    estimate: float
    lower: float
    upper: float
    method: str
    nominal_level: float
    two_sided: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _z_value(alpha: float, two_sided: bool) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return normal_quantile(1.0 - alpha / 2.0) if two_sided else normal_quantile(1.0 - alpha)


def _check_direction(v, p: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != p:
        raise DimensionMismatch(f"direction has length {v.shape[0]}, expected {p}")
    if float(v @ v) == 0.0:
        raise ZeroDirection("target direction must be nonzero")
    return v


def ci_w_decorrelated(
    est: DecorrelatedEstimate, v, alpha: float, two_sided: bool = True
) -> Interval:
    """Interval centered at <v, beta_d> with half-width
    sigma_hat * sqrt(v' W W' v) * z.

    z is the (1 - alpha/2) normal quantile two-sided, (1 - alpha)
    one-sided. With no data W W' is zero and the interval degenerates to a
    point.
    """
    v = _check_direction(v, est.beta_d.shape[0])
    center = float(v @ est.beta_d)
    se = math.sqrt(est.sigma2_hat * max(float(v @ est.w_gram @ v), 0.0))
    hw = se * _z_value(alpha, two_sided)
    return Interval(
        target=v,
        estimate=center,
        lower=center - hw,
        upper=center + hw,
        method=METHOD_W_DECORR,
        nominal_level=1.0 - alpha,
        two_sided=two_sided,
    )


def ci_gaussian_ols(fit: OlsFit, v, alpha: float, two_sided: bool = True) -> Interval:
    """Classical interval: <v, beta_ols> +- sigma_hat sqrt(v' (X'X)^-1 v) z."""
    v = _check_direction(v, fit.p)
    center = float(v @ fit.beta_ols)
    se = math.sqrt(fit.sigma2_hat * max(float(v @ fit.gram_inverse @ v), 0.0))
    hw = se * _z_value(alpha, two_sided)
    return Interval(
        target=v,
        estimate=center,
        lower=center - hw,
        upper=center + hw,
        method=METHOD_OLS_GSN,
        nominal_level=1.0 - alpha,
        two_sided=two_sided,
    )


@dataclass(frozen=True)
class ConcentrationParams:
    """Constants of the self-normalized bound.

    sub_gaussian_R bounds the noise sub-Gaussian norm (1 is valid for any
    noise supported on [-1, 1]); norm_bound_S bounds ||beta||, with None
    meaning the data-inflated default 2 ||beta_ols||; reg_lambda_c is the
    ridge regularizer defining V = reg_lambda_c I + X'X.
    """

    sub_gaussian_R: float = 1.0
    norm_bound_S: float | None = None
    reg_lambda_c: float = 1.0

    def __post_init__(self) -> None:
        if self.sub_gaussian_R <= 0 or self.reg_lambda_c <= 0:
            raise ValueError("sub_gaussian_R and reg_lambda_c must be positive")
        if self.norm_bound_S is not None and self.norm_bound_S <= 0:
            raise ValueError("norm_bound_S must be positive")


def ci_concentration(
    fit: OlsFit,
    data: AdaptiveDataset,
    v,
    alpha: float,
    params: ConcentrationParams = ConcentrationParams(),
) -> Interval:
    """Self-normalized concentration interval around the ridge estimate.

    With V = c I + X'X and beta_r = V^-1 X'y, the radius is

        rho = R sqrt(2 log(det(V)^1/2 det(c I)^-1/2 / alpha)) + sqrt(c) S

    and the interval is <v, beta_r> +- ||v||_{V^-1} rho. The failure
    probability alpha covers both tails at once, so there is no separate
    one-sided calibration; alpha -> 1 leaves only the sqrt(c) S term.

    Valid for any adaptive design, and accordingly conservative.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    v = _check_direction(v, fit.p)
    X, y = data.rows, data.responses
    c = params.reg_lambda_c
    p = fit.p
    Vbar = c * np.eye(p) + fit.gram
    beta_r = np.linalg.solve(Vbar, X.T @ y)
    center = float(v @ beta_r)
    S = params.norm_bound_S
    if S is None:
        S = 2.0 * float(np.linalg.norm(fit.beta_ols))
    # log det(V)^1/2 - log det(cI)^1/2, via slogdet for stability
    _, logdet_v = np.linalg.slogdet(Vbar)
    log_ratio = 0.5 * logdet_v - 0.5 * p * math.log(c)
    rho = params.sub_gaussian_R * math.sqrt(2.0 * (log_ratio + math.log(1.0 / alpha)))
    rho += math.sqrt(c) * S
    hw = math.sqrt(max(float(v @ np.linalg.solve(Vbar, v)), 0.0)) * rho
    return Interval(
        target=v,
        estimate=center,
        lower=center - hw,
        upper=center + hw,
        method=METHOD_OLS_CONC,
        nominal_level=1.0 - alpha,
        two_sided=True,
    )
