"""Monte Carlo experiment engine.

Runs many independent trials of a data-generating process, fits the OLS and
whitening-corrected estimators, builds confidence intervals by every
configured method, and aggregates coverage, widths, bias, and
standardized-error shape statistics.

Seeding contract: the regularizer is selected once from pilot simulations
whose seed stream is derived from (base_seed, PILOT_SALT) and is disjoint
from the evaluation trials, which use the plain integer seeds
base_seed XOR t. Aggregation sorts by trial id, so results do not depend on
the execution order or the degree of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy.special import ndtr
from scipy.stats import kstest

from .errors import (
    ConfigError,
    DegenerateSample,
    EmptyInput,
    NotABanditProcess,
    SingularDesign,
    TooFewSamples,
)
from .intervals import (
    METHOD_OLS_CONC,
    METHOD_OLS_GSN,
    METHOD_W_DECORR,
    METHODS,
    ConcentrationParams,
    ci_concentration,
    ci_gaussian_ols,
    ci_w_decorrelated,
)
from .linmodel import ols_fit, w_decorrelate
from .processes import Process
from .tuning import LambdaRule, select_lambda
from .whitening import whitening_run

ESTIMATOR_OLS = "OLS"
ESTIMATOR_W = "W_DECORR"
ESTIMATORS = (ESTIMATOR_OLS, ESTIMATOR_W)

METHOD_ESTIMATOR = {
    METHOD_OLS_GSN: ESTIMATOR_OLS,
    METHOD_OLS_CONC: ESTIMATOR_OLS,
    METHOD_W_DECORR: ESTIMATOR_W,
}

SIDES = ("one", "two")

PILOT_SALT = 0x57504C54  # distinguishes the pilot seed stream from trial seeds

# Absolute/relative slack of the coverage indicator; needed so degenerate
# zero-width intervals from noiseless designs count their own center as
# covered despite float summation rounding.
COVER_SLACK = 1e-9


@dataclass(frozen=True)
class Target:
    """A named direction v; the experiment reports on <v, beta>."""

    label: str
    vector: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "vector", tuple(float(c) for c in self.vector))
        if not self.label:
            raise ConfigError("target label must be nonempty")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=np.float64)


@dataclass(frozen=True)
class ExperimentConfig:
    process: Process
    targets: tuple
    nominal_levels: tuple
    lambda_rule: LambdaRule
    trials: int
    base_seed: int
    estimators: tuple = ESTIMATORS
    interval_methods: tuple = METHODS
    concentration: ConcentrationParams = field(default_factory=ConcentrationParams)
    dof_correction: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "nominal_levels", tuple(float(l) for l in self.nominal_levels))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "interval_methods", tuple(self.interval_methods))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.targets:
            raise ConfigError("need at least one target")
        labels = [t.label for t in self.targets]
        if len(set(labels)) != len(labels):
            raise ConfigError("target labels must be unique")
        p = self.process.p
        for t in self.targets:
            if len(t.vector) != p:
                raise ConfigError(f"target {t.label!r} has dimension {len(t.vector)}, process has p={p}")
        if not self.nominal_levels:
            raise ConfigError("need at least one nominal level")
        for l in self.nominal_levels:
            if not 0.0 < l < 1.0:
                raise ConfigError(f"nominal level {l} outside (0, 1)")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ConfigError(f"unknown estimator {e!r}; expected subset of {ESTIMATORS}")
        for m in self.interval_methods:
            if m not in METHODS:
                raise ConfigError(f"unknown interval method {m!r}; expected subset of {METHODS}")
            if METHOD_ESTIMATOR[m] not in self.estimators:
                raise ConfigError(
                    f"interval method {m} requires estimator {METHOD_ESTIMATOR[m]}"
                )


@dataclass(frozen=True)
class PointEstimate:
    estimator: str
    target_label: str
    estimate: float
    stderr: float
    std_error: float  # (estimate - truth) / stderr; NaN when stderr == 0


@dataclass(frozen=True)
class IntervalCell:
    estimator: str
    method: str
    target_label: str
    level: float
    side: str
    lower: float
    upper: float
    covered: bool
    width: float


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    ok: bool
    error: str = ""
    lambda_min: float = math.nan
    arm_counts: tuple | None = None
    points: tuple = ()
    cells: tuple = ()


@dataclass(frozen=True)
class SummaryRow:
    estimator: str
    method: str
    target_label: str
    level: float
    side: str
    coverage: float
    n_trials: int
    mean_width: float
    sd_width: float
    bias: float
    kurtosis: float
    ks_stat: float


@dataclass(frozen=True)
class MCResult:
    lambda_used: float
    truths: tuple  # (label, truth) pairs in target order
    records: tuple
    summary: tuple
    n_failed: int
    failed_trials: tuple

    def std_errors(self, estimator: str, target_label: str) -> np.ndarray:
        """Standardized errors of one estimator/target across ok trials."""
        vals = [
            pt.std_error
            for r in self.records
            if r.ok
            for pt in r.points
            if pt.estimator == estimator and pt.target_label == target_label
        ]
        return np.asarray(vals)

    def arm_fractions(self, arm: int) -> np.ndarray:
        fracs = []
        for r in self.records:
            if r.ok and r.arm_counts is not None:
                counts = np.asarray(r.arm_counts)
                fracs.append(counts[arm] / counts.sum())
        if not fracs:
            raise NotABanditProcess("no arm counts recorded; process is not a bandit")
        return np.asarray(fracs)


def _covered(lower: float, upper: float, truth: float, side: str) -> bool:
    slack = COVER_SLACK * max(1.0, abs(truth))
    if side == "one":
        return truth <= upper + slack
    return lower - slack <= truth <= upper + slack


def run_trial(config: ExperimentConfig, lam: float, trial: int) -> TrialRecord:
    """Simulate and evaluate one trial. Failures with a singular design are
    recorded rather than raised."""
    seed = config.base_seed ^ trial
    sim = config.process.simulate(seed)
    data = sim.dataset
    truth_of = {t.label: float(t.as_array() @ config.process.true_beta) for t in config.targets}
    try:
        fit = ols_fit(data, dof_correction=config.dof_correction)
    except SingularDesign as exc:
        return TrialRecord(
            trial=trial,
            seed=seed,
            ok=False,
            error=f"SingularDesign: {exc}",
            arm_counts=None if sim.arm_counts is None else tuple(int(c) for c in sim.arm_counts),
        )
    sigma = math.sqrt(fit.sigma2_hat)
    est = None
    if ESTIMATOR_W in config.estimators:
        whitening = whitening_run(data.rows, lam)
        est = w_decorrelate(fit, whitening, data)

    points = []
    for t in config.targets:
        v = t.as_array()
        truth = truth_of[t.label]
        if ESTIMATOR_OLS in config.estimators:
            center = float(v @ fit.beta_ols)
            se = sigma * math.sqrt(max(float(v @ fit.gram_inverse @ v), 0.0))
            std = (center - truth) / se if se > 0 else math.nan
            points.append(PointEstimate(ESTIMATOR_OLS, t.label, center, se, std))
        if est is not None:
            center = float(v @ est.beta_d)
            se = sigma * math.sqrt(max(float(v @ est.w_gram @ v), 0.0))
            std = (center - truth) / se if se > 0 else math.nan
            points.append(PointEstimate(ESTIMATOR_W, t.label, center, se, std))

    cells = []
    for t in config.targets:
        v = t.as_array()
        truth = truth_of[t.label]
        for method in config.interval_methods:
            for level in config.nominal_levels:
                alpha = 1.0 - level
                for side in SIDES:
                    if method == METHOD_OLS_GSN:
                        iv = ci_gaussian_ols(fit, v, alpha, two_sided=(side == "two"))
                    elif method == METHOD_W_DECORR:
                        iv = ci_w_decorrelated(est, v, alpha, two_sided=(side == "two"))
                    else:
                        # the concentration bound is inherently two-sided in
                        # alpha; one-sided rows reuse the same radius
                        iv = ci_concentration(fit, data, v, alpha, config.concentration)
                    cells.append(
                        IntervalCell(
                            estimator=METHOD_ESTIMATOR[method],
                            method=method,
                            target_label=t.label,
                            level=level,
                            side=side,
                            lower=iv.lower,
                            upper=iv.upper,
                            covered=_covered(iv.lower, iv.upper, truth, side),
                            width=iv.width,
                        )
                    )
    return TrialRecord(
        trial=trial,
        seed=seed,
        ok=True,
        lambda_min=fit.lambda_min,
        arm_counts=None if sim.arm_counts is None else tuple(int(c) for c in sim.arm_counts),
        points=tuple(points),
        cells=tuple(cells),
    )


def _trial_worker(args) -> TrialRecord:
    config, lam, trial = args
    return run_trial(config, lam, trial)


def summarize(records: Iterable[TrialRecord], truths: dict[str, float]) -> tuple:
    """Aggregate trial records into summary rows.

    Coverage, widths, and bias average over ok trials only; shape
    statistics (kurtosis, KS vs standard normal) come from the finite
    standardized errors of the row's underlying estimator and repeat on
    every row of that estimator/target.
    """
    ok = sorted((r for r in records if r.ok), key=lambda r: r.trial)

    est_stats: dict[tuple, tuple] = {}
    for r in ok:
        for pt in r.points:
            est_stats.setdefault((pt.estimator, pt.target_label), [[], []])
    for r in ok:
        for pt in r.points:
            bucket = est_stats[(pt.estimator, pt.target_label)]
            bucket[0].append(pt.estimate - truths[pt.target_label])
            if math.isfinite(pt.std_error):
                bucket[1].append(pt.std_error)

    shape: dict[tuple, tuple] = {}
    for key, (errs, stds) in est_stats.items():
        bias = float(np.mean(errs)) if errs else math.nan
        try:
            stats = normality_stats(np.asarray(stds))
            shape[key] = (bias, stats.kurtosis, stats.ks_statistic)
        except (TooFewSamples, DegenerateSample):
            shape[key] = (bias, math.nan, math.nan)

    groups: dict[tuple, list] = {}
    for r in ok:
        for c in r.cells:
            groups.setdefault((c.estimator, c.method, c.target_label, c.level, c.side), []).append(c)

    rows = []
    for key in sorted(groups):
        estimator, method, label, level, side = key
        cells = groups[key]
        widths = np.asarray([c.width for c in cells])
        bias, kurt, ks = shape.get((estimator, label), (math.nan, math.nan, math.nan))
        rows.append(
            SummaryRow(
                estimator=estimator,
                method=method,
                target_label=label,
                level=level,
                side=side,
                coverage=float(np.mean([c.covered for c in cells])),
                n_trials=len(cells),
                mean_width=float(widths.mean()),
                sd_width=float(widths.std(ddof=1)) if len(widths) > 1 else 0.0,
                bias=bias,
                kurtosis=kurt,
                ks_stat=ks,
            )
        )
    return tuple(rows)


def run_experiment(config: ExperimentConfig, workers: int = 1, progress=None) -> MCResult:
    """Run the full experiment: select lambda once, run all trials, aggregate.

    Identical config and base_seed give identical results, independent of
    `workers`. `progress`, when given, is called with the number of
    completed trials as the loop advances.
    """
    lam = select_lambda(
        config.lambda_rule, config.process, np.random.SeedSequence([config.base_seed, PILOT_SALT])
    )
    jobs = [(config, lam, t) for t in range(config.trials)]
    records = []
    if workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, config.trials // (8 * workers))
            for rec in pool.map(_trial_worker, jobs, chunksize=chunk):
                records.append(rec)
                if progress is not None:
                    progress(len(records))
    else:
        for t in range(config.trials):
            records.append(run_trial(config, lam, t))
            if progress is not None:
                progress(len(records))
    records.sort(key=lambda r: r.trial)
    truths = {t.label: float(t.as_array() @ config.process.true_beta) for t in config.targets}
    summary = summarize(records, truths)
    failed = tuple(r.trial for r in records if not r.ok)
    return MCResult(
        lambda_used=lam,
        truths=tuple((t.label, truths[t.label]) for t in config.targets),
        records=tuple(records),
        summary=summary,
        n_failed=len(failed),
        failed_trials=failed,
    )


def pp_data(standardized_errors) -> np.ndarray:
    """Probability-plot coordinates: sorted errors z_(k) mapped to
    (Phi(z_(k)), k/n). Returns an (n, 2) array."""
    z = np.asarray(standardized_errors, dtype=np.float64).reshape(-1)
    if z.size == 0:
        raise EmptyInput("no standardized errors given")
    z = np.sort(z)
    n = z.size
    return np.column_stack([ndtr(z), np.arange(1, n + 1) / n])


class NormalityStats(NamedTuple):
    kurtosis: float
    ks_statistic: float


def normality_stats(standardized_errors) -> NormalityStats:
    """Shape diagnostics vs the standard normal: kurtosis as m4/m2^2
    (3 for a normal; no excess subtraction) and the one-sample
    Kolmogorov-Smirnov statistic."""
    z = np.asarray(standardized_errors, dtype=np.float64).reshape(-1)
    if z.size < 8:
        raise TooFewSamples(f"need >= 8 samples, got {z.size}")
    centered = z - z.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DegenerateSample("zero-variance sample; kurtosis undefined")
    m4 = float(np.mean(centered**4))
    ks = float(kstest(z, "norm").statistic)
    return NormalityStats(kurtosis=m4 / m2**2, ks_statistic=ks)


def arm_fraction_histogram(traces, arm: int, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Histogram over [0, 1] of N_arm(n)/n across traces.

    Accepts any iterable of objects exposing arm_counts (BanditTrace,
    SimulatedTrial); raises NotABanditProcess otherwise. Returns
    (counts, bin_edges) with counts summing to the number of traces.
    """
    fracs = []
    for tr in traces:
        counts = getattr(tr, "arm_counts", None)
        if counts is None:
            raise NotABanditProcess("trace has no arm counts; not a bandit process")
        counts = np.asarray(counts)
        fracs.append(counts[arm] / counts.sum())
    if not fracs:
        raise EmptyInput("no traces given")
    return np.histogram(np.asarray(fracs), bins=bins, range=(0.0, 1.0))
