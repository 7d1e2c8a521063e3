"""Command-line front end: JSON config in, CSV/JSON artifacts out.

Subcommands:
    simulate     run a Monte Carlo experiment -> trials.csv, summary.csv, run.json
    tune-lambda  resolve the regularizer rule only -> lambda.json
    report       re-aggregate an existing trials.csv -> summary.csv

Exit codes: 0 success, 2 invalid configuration (the message names the
offending key), 3 runtime failure.

CSV outputs are stable: fixed column order, floats at 12 significant
digits, LF newlines. run.json records the resolved config, the selected
lambda, and the base seed, so any trial row can be reproduced in isolation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, WdecorrError
from .intervals import ConcentrationParams, METHODS
from .mc_harness import (
    ESTIMATORS,
    ExperimentConfig,
    IntervalCell,
    MCResult,
    PointEstimate,
    Target,
    TrialRecord,
    run_experiment,
    summarize,
)
from .noise import NoiseSpec
from .policies import BanditEnv, PolicySpec, UcbParams
from .processes import ArProcess, BanditProcess, RoundRobinProcess
from .timeseries import ArSpec
from .tuning import LambdaRule, pilot_lambda_quantiles, select_lambda

TRIALS_COLUMNS = (
    "trial", "seed", "estimator", "target_label", "estimate", "stderr",
    "method", "level", "side", "lower", "upper", "covered", "width",
    "lambda_min", "arm_counts",
)
SUMMARY_COLUMNS = (
    "estimator", "method", "target_label", "level", "side", "coverage",
    "n_trials", "mean_width", "sd_width", "bias", "kurtosis", "ks_stat",
)

_TOP_KEYS_REQUIRED = ("process", "targets", "levels", "lambda", "trials", "seed")
_TOP_KEYS_OPTIONAL = ("policy", "estimators", "intervals", "output_dir", "concentration")


# ---------------------------------------------------------------------------
# config parsing


def _check_keys(obj: dict, where: str, required: tuple, optional: tuple = ()) -> None:
    prefix = f"{where}." if where else ""
    for k in obj:
        if k not in required and k not in optional:
            raise ConfigError(f"unknown key '{prefix}{k}'")
    for k in required:
        if k not in obj:
            raise ConfigError(f"missing required key '{prefix}{k}'")


def _typed(obj: dict, where: str, key: str, types, default=None, required: bool = False):
    prefix = f"{where}." if where else ""
    if key not in obj:
        if required:
            raise ConfigError(f"missing required key '{prefix}{key}'")
        return default
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool) and bool not in np.atleast_1d(types).tolist():
        raise ConfigError(f"key '{prefix}{key}' has invalid type {type(val).__name__}")
    return val


def _number(obj: dict, where: str, key: str, default=None, required: bool = False) -> float:
    val = _typed(obj, where, key, (int, float), default=default, required=required)
    return val if val is None else float(val)


def _parse_noise(obj, where: str) -> NoiseSpec:
    if obj is None:
        return NoiseSpec()
    if not isinstance(obj, dict):
        raise ConfigError(f"key '{where}' must be an object")
    _check_keys(obj, where, ("kind",), ("low", "high", "sigma2"))
    kind = obj["kind"]
    if kind == "uniform":
        return NoiseSpec(
            kind="uniform",
            low=_number(obj, where, "low", default=-1.0),
            high=_number(obj, where, "high", default=1.0),
        )
    if kind == "gaussian":
        return NoiseSpec(kind="gaussian", sigma2=_number(obj, where, "sigma2", required=True))
    raise ConfigError(f"key '{where}.kind' must be 'uniform' or 'gaussian', got {kind!r}")


def _parse_policy(obj, where: str = "policy") -> PolicySpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"key '{where}' must be an object")
    _check_keys(
        obj, where, ("kind",),
        ("epsilon", "prior_mean", "prior_var", "assumed_noise_var", "ucb"),
    )
    kwargs = dict(kind=obj["kind"])
    for k in ("epsilon", "prior_mean", "prior_var", "assumed_noise_var"):
        if k in obj:
            kwargs[k] = _number(obj, where, k)
    if "ucb" in obj:
        u = obj["ucb"]
        _check_keys(u, f"{where}.ucb", (), ("epsilon_lil", "beta_lil", "delta"))
        kwargs["ucb_params"] = UcbParams(
            epsilon_lil=_number(u, f"{where}.ucb", "epsilon_lil", default=0.01),
            beta_lil=_number(u, f"{where}.ucb", "beta_lil", default=0.5),
            delta=_number(u, f"{where}.ucb", "delta", default=0.1),
        )
    return PolicySpec(**kwargs)


def _parse_process(cfg: dict):
    proc = cfg["process"]
    if not isinstance(proc, dict):
        raise ConfigError("key 'process' must be an object")
    kind = _typed(proc, "process", "kind", str, required=True)
    if kind == "bandit":
        _check_keys(proc, "process", ("kind", "horizon", "arm_means"), ("noise",))
        env = BanditEnv(
            arm_means=tuple(proc["arm_means"]),
            noise=_parse_noise(proc.get("noise"), "process.noise"),
            horizon=int(_number(proc, "process", "horizon", required=True)),
        )
        if "policy" not in cfg:
            raise ConfigError("missing required key 'policy' (needed for a bandit process)")
        return BanditProcess(env=env, policy=_parse_policy(cfg["policy"]))
    if kind == "ar":
        _check_keys(proc, "process", ("kind", "coefficients", "n"), ("noise", "initial_values"))
        return ArProcess(
            spec=ArSpec(
                coefficients=tuple(proc["coefficients"]),
                n=int(_number(proc, "process", "n", required=True)),
                noise=_parse_noise(proc.get("noise"), "process.noise"),
                initial_values=tuple(proc["initial_values"]) if "initial_values" in proc else None,
            )
        )
    if kind == "round_robin":
        _check_keys(proc, "process", ("kind", "p", "n"), ("arm_means", "noise"))
        kwargs = dict(
            p=int(_number(proc, "process", "p", required=True)),
            n=int(_number(proc, "process", "n", required=True)),
        )
        if "arm_means" in proc:
            kwargs["arm_means"] = tuple(proc["arm_means"])
        if "noise" in proc:
            kwargs["noise"] = _parse_noise(proc["noise"], "process.noise")
        return RoundRobinProcess(**kwargs)
    raise ConfigError(f"key 'process.kind' must be one of bandit/ar/round_robin, got {kind!r}")


def _parse_lambda_rule(obj) -> LambdaRule:
    if not isinstance(obj, dict):
        raise ConfigError("key 'lambda' must be an object")
    _check_keys(obj, "lambda", ("kind",), ("percentile", "pilot_runs", "value", "loglog_discount"))
    kind = obj["kind"]
    kwargs = dict(kind=kind)
    if "percentile" in obj:
        kwargs["percentile"] = _number(obj, "lambda", "percentile")
    if "pilot_runs" in obj:
        kwargs["pilot_runs"] = int(_number(obj, "lambda", "pilot_runs"))
    if "value" in obj:
        kwargs["fixed_value"] = _number(obj, "lambda", "value")
    if "loglog_discount" in obj:
        flag = obj["loglog_discount"]
        if not isinstance(flag, bool):
            raise ConfigError("key 'lambda.loglog_discount' must be a boolean")
        kwargs["loglog_discount"] = flag
    return LambdaRule(**kwargs)


def _parse_targets(obj) -> tuple:
    if not isinstance(obj, list) or not obj:
        raise ConfigError("key 'targets' must be a nonempty array")
    targets = []
    for i, t in enumerate(obj):
        _check_keys(t, f"targets[{i}]", ("label", "vector"))
        targets.append(Target(label=t["label"], vector=tuple(t["vector"])))
    return tuple(targets)


def _parse_concentration(obj) -> ConcentrationParams:
    if obj is None:
        return ConcentrationParams()
    _check_keys(obj, "concentration", (), ("sub_gaussian_R", "norm_bound_S", "reg_lambda_c"))
    return ConcentrationParams(
        sub_gaussian_R=_number(obj, "concentration", "sub_gaussian_R", default=1.0),
        norm_bound_S=_number(obj, "concentration", "norm_bound_S", default=None),
        reg_lambda_c=_number(obj, "concentration", "reg_lambda_c", default=1.0),
    )


def load_config(path: str | Path) -> dict:
    """Read and schema-check a JSON run configuration."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("the config document must be a JSON object")
    _check_keys(cfg, "", _TOP_KEYS_REQUIRED, _TOP_KEYS_OPTIONAL)
    return cfg


def build_experiment(cfg: dict, seed_override: int | None = None) -> ExperimentConfig:
    """Resolve a validated config dict into an ExperimentConfig."""
    process = _parse_process(cfg)
    estimators = tuple(cfg.get("estimators", list(ESTIMATORS)))
    methods = tuple(cfg.get("intervals", list(METHODS)))
    trials = _typed(cfg, "", "trials", int, required=True)
    seed = _typed(cfg, "", "seed", int, required=True) if seed_override is None else seed_override
    levels = cfg["levels"]
    if not isinstance(levels, list) or not levels:
        raise ConfigError("key 'levels' must be a nonempty array")
    return ExperimentConfig(
        process=process,
        targets=_parse_targets(cfg["targets"]),
        nominal_levels=tuple(levels),
        lambda_rule=_parse_lambda_rule(cfg["lambda"]),
        trials=trials,
        base_seed=seed,
        estimators=estimators,
        interval_methods=methods,
        concentration=_parse_concentration(cfg.get("concentration")),
    )


# ---------------------------------------------------------------------------
# output formatting


def _fmt(val) -> str:
    if val is None:
        return ""
    if isinstance(val, bool):
        return "1" if val else "0"
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, float):
        return "nan" if math.isnan(val) else f"{val:.12g}"
    return str(val)


def _counts_field(counts) -> str:
    return "" if counts is None else "|".join(str(int(c)) for c in counts)


def write_trials_csv(path: Path, result: MCResult) -> None:
    lines = [",".join(TRIALS_COLUMNS)]
    for r in result.records:
        if not r.ok:
            continue
        point_of = {(pt.estimator, pt.target_label): pt for pt in r.points}
        for c in r.cells:
            pt = point_of[(c.estimator, c.target_label)]
            lines.append(",".join((
                _fmt(r.trial), _fmt(r.seed), c.estimator, c.target_label,
                _fmt(pt.estimate), _fmt(pt.stderr), c.method, _fmt(c.level),
                c.side, _fmt(c.lower), _fmt(c.upper), _fmt(c.covered),
                _fmt(c.width), _fmt(r.lambda_min), _counts_field(r.arm_counts),
            )))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_summary_csv(path: Path, summary) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for row in summary:
        lines.append(",".join((
            row.estimator, row.method, row.target_label, _fmt(row.level),
            row.side, _fmt(row.coverage), _fmt(row.n_trials), _fmt(row.mean_width),
            _fmt(row.sd_width), _fmt(row.bias), _fmt(row.kurtosis), _fmt(row.ks_stat),
        )))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _versions() -> dict:
    return {
        "wdecorr": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _resolve_output_dir(cfg: dict, args) -> Path:
    # precedence: --output flag, then OUTPUT_DIR env, then config
    if args.output:
        out = args.output
    elif os.environ.get("OUTPUT_DIR"):
        out = os.environ["OUTPUT_DIR"]
    else:
        out = cfg.get("output_dir")
        if out is None:
            raise ConfigError("missing required key 'output_dir' (or pass --output / set OUTPUT_DIR)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    experiment = build_experiment(cfg, seed_override=args.seed)
    out = _resolve_output_dir(cfg, args)
    t0 = time.perf_counter()
    total = experiment.trials
    step = max(1, total // 20)

    def progress(done: int) -> None:
        if done % step == 0 or done == total:
            print(f"trials: {done}/{total}", file=sys.stderr)

    result = run_experiment(experiment, workers=args.workers, progress=progress)
    wall = time.perf_counter() - t0
    write_trials_csv(out / "trials.csv", result)
    write_summary_csv(out / "summary.csv", result.summary)
    run_info = {
        "config": cfg,
        "base_seed": experiment.base_seed,
        "lambda_used": result.lambda_used,
        "targets": [
            {"label": t.label, "vector": list(t.vector), "truth": truth}
            for t, (_, truth) in zip(experiment.targets, result.truths)
        ],
        "trials": experiment.trials,
        "n_failed": result.n_failed,
        "failed_trials": list(result.failed_trials),
        "versions": _versions(),
        "wall_time_s": wall,
    }
    (out / "run.json").write_text(json.dumps(run_info, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out / 'trials.csv'}, {out / 'summary.csv'}, {out / 'run.json'}")
    return 0


def cmd_tune_lambda(args) -> int:
    cfg = load_config(args.config)
    experiment = build_experiment(cfg, seed_override=args.seed)
    out = _resolve_output_dir(cfg, args)
    rule = experiment.lambda_rule
    seed_seq = np.random.SeedSequence([experiment.base_seed, 0x57504C54])
    lam = select_lambda(rule, experiment.process, seed_seq)
    info = {
        "lambda": lam,
        "rule": cfg["lambda"],
        "base_seed": experiment.base_seed,
        "versions": _versions(),
    }
    if rule.kind == "percentile":
        quantiles = pilot_lambda_quantiles(
            experiment.process, rule.pilot_runs, np.random.SeedSequence([experiment.base_seed, 0x57504C54])
        )
        info["pilot_lambda_min_quantiles"] = {f"{q:g}": v for q, v in quantiles.items()}
        print("pilot lambda_min quantiles:")
        for q, v in quantiles.items():
            print(f"  {q:>5.0%}  {v:.6g}")
    (out / "lambda.json").write_text(json.dumps(info, indent=2) + "\n", encoding="utf-8")
    print(f"selected lambda = {lam:.6g}")
    return 0


def _parse_trials_csv(path: Path) -> list[TrialRecord]:
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != ",".join(TRIALS_COLUMNS):
        raise ConfigError(f"{path} does not have the expected trials.csv header")
    by_trial: dict[int, dict] = {}
    for ln in lines[1:]:
        f = dict(zip(TRIALS_COLUMNS, ln.split(",")))
        t = int(f["trial"])
        slot = by_trial.setdefault(
            t,
            {
                "seed": int(f["seed"]),
                "lambda_min": float(f["lambda_min"]),
                "arm_counts": tuple(int(c) for c in f["arm_counts"].split("|")) if f["arm_counts"] else None,
                "points": {},
                "cells": [],
            },
        )
        slot["points"][(f["estimator"], f["target_label"])] = (
            float(f["estimate"]), float(f["stderr"]),
        )
        slot["cells"].append(
            IntervalCell(
                estimator=f["estimator"],
                method=f["method"],
                target_label=f["target_label"],
                level=float(f["level"]),
                side=f["side"],
                lower=float(f["lower"]),
                upper=float(f["upper"]),
                covered=f["covered"] == "1",
                width=float(f["width"]),
            )
        )
    return [
        TrialRecord(
            trial=t,
            seed=slot["seed"],
            ok=True,
            lambda_min=slot["lambda_min"],
            arm_counts=slot["arm_counts"],
            points=tuple(
                PointEstimate(est, label, est_val, se, math.nan)
                for (est, label), (est_val, se) in slot["points"].items()
            ),
            cells=tuple(slot["cells"]),
        )
        for t, slot in sorted(by_trial.items())
    ]


def cmd_report(args) -> int:
    trials_path = Path(args.input)
    if not trials_path.exists():
        raise ConfigError(f"no such trials file: {trials_path}")
    run_path = Path(args.run) if args.run else trials_path.parent / "run.json"
    if not run_path.exists():
        raise ConfigError(f"no run.json next to {trials_path}; pass --run")
    run_info = json.loads(run_path.read_text(encoding="utf-8"))
    truths = {t["label"]: float(t["truth"]) for t in run_info["targets"]}
    records = _parse_trials_csv(trials_path)
    # recompute standardized errors from the stored estimates
    patched = []
    for r in records:
        points = tuple(
            PointEstimate(
                pt.estimator, pt.target_label, pt.estimate, pt.stderr,
                (pt.estimate - truths[pt.target_label]) / pt.stderr if pt.stderr > 0 else math.nan,
            )
            for pt in r.points
        )
        patched.append(TrialRecord(
            trial=r.trial, seed=r.seed, ok=True, lambda_min=r.lambda_min,
            arm_counts=r.arm_counts, points=points, cells=r.cells,
        ))
    summary = summarize(patched, truths)
    out_dir = Path(args.output) if args.output else trials_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    write_summary_csv(out_dir / "summary.csv", summary)
    print(f"wrote {out_dir / 'summary.csv'}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wdecorr",
        description="Monte Carlo experiments for decorrelated inference on adaptively collected data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="path to a JSON run configuration")
        p.add_argument("--workers", type=int, default=1, help="worker processes for the trial loop")
        p.add_argument("--output", default=None, help="output directory (overrides config and OUTPUT_DIR)")
        p.add_argument("--seed", type=int, default=None, help="override the config base seed")

    p_sim = sub.add_parser("simulate", help="run an experiment and write trials.csv/summary.csv/run.json")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_tune = sub.add_parser("tune-lambda", help="resolve the lambda rule and write lambda.json")
    common(p_tune)
    p_tune.set_defaults(func=cmd_tune_lambda)

    p_rep = sub.add_parser("report", help="re-aggregate an existing trials.csv into summary.csv")
    p_rep.add_argument("--input", required=True, help="path to trials.csv")
    p_rep.add_argument("--run", default=None, help="path to run.json (default: next to trials.csv)")
    p_rep.add_argument("--output", default=None, help="directory for summary.csv (default: next to input)")
    p_rep.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (WdecorrError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
