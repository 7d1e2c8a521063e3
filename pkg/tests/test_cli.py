"""Command-line front end: config validation, CSV schemas, determinism."""

import json
import re

import pytest

from wdecorr.cli import SUMMARY_COLUMNS, TRIALS_COLUMNS, main


def base_config(tmp_path, **overrides):
    cfg = {
        "process": {
            "kind": "bandit",
            "horizon": 80,
            "arm_means": [0.3, 0.3],
            "noise": {"kind": "uniform", "low": -1.0, "high": 1.0},
        },
        "policy": {"kind": "ECB", "epsilon": 0.2},
        "targets": [{"label": "avg", "vector": [0.5, 0.5]}],
        "levels": [0.9],
        "lambda": {"kind": "fixed", "value": 5.0},
        "trials": 6,
        "seed": 424242,
        "output_dir": str(tmp_path / "out"),
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def test_simulate_writes_all_artifacts(tmp_path, capsys):
    path = write_config(tmp_path, base_config(tmp_path))
    assert main(["simulate", "--config", path]) == 0
    out = tmp_path / "out"
    trials = (out / "trials.csv").read_text()
    summary = (out / "summary.csv").read_text()
    run = json.loads((out / "run.json").read_text())
    assert trials.splitlines()[0] == ",".join(TRIALS_COLUMNS)
    assert summary.splitlines()[0] == ",".join(SUMMARY_COLUMNS)
    # 6 trials x 3 methods x 1 level x 2 sides x 1 target
    assert len(trials.splitlines()) == 1 + 6 * 3 * 2
    assert run["lambda_used"] == 5.0
    assert run["base_seed"] == 424242
    assert run["targets"][0]["truth"] == pytest.approx(0.3)
    assert run["n_failed"] == 0
    # summary includes a W_DECORR row at level 0.9 with a sane coverage
    w_rows = [
        ln for ln in summary.splitlines()[1:]
        if ln.startswith("W_DECORR,W_DECORR,avg,0.9,")
    ]
    assert len(w_rows) == 2  # one and two sided
    for ln in w_rows:
        coverage = float(ln.split(",")[5])
        assert 0.0 <= coverage <= 1.0


def test_simulate_missing_key_exits_2(tmp_path, capsys):
    cfg = base_config(tmp_path)
    del cfg["trials"]
    path = write_config(tmp_path, cfg)
    assert main(["simulate", "--config", path]) == 2
    assert "trials" in capsys.readouterr().err


def test_simulate_unknown_key_exits_2(tmp_path, capsys):
    path = write_config(tmp_path, base_config(tmp_path, typo_key=1))
    assert main(["simulate", "--config", path]) == 2
    assert "typo_key" in capsys.readouterr().err


def test_simulate_invalid_json_names_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "process": \n}', encoding="utf-8")
    assert main(["simulate", "--config", str(path)]) == 2
    assert "line" in capsys.readouterr().err


def test_simulate_byte_identical_reruns(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path))
    main(["simulate", "--config", path, "--output", str(tmp_path / "a")])
    main(["simulate", "--config", path, "--output", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()


def test_simulate_seed_flag_overrides(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path))
    main(["simulate", "--config", path, "--output", str(tmp_path / "a"), "--seed", "7"])
    run = json.loads((tmp_path / "a" / "run.json").read_text())
    assert run["base_seed"] == 7


def test_output_dir_env_override(tmp_path, monkeypatch):
    cfg = base_config(tmp_path)
    del cfg["output_dir"]
    path = write_config(tmp_path, cfg)
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "envout"))
    assert main(["simulate", "--config", path]) == 0
    assert (tmp_path / "envout" / "trials.csv").exists()


def test_csv_floats_have_12_significant_digits_and_lf(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path))
    main(["simulate", "--config", path])
    raw = (tmp_path / "out" / "trials.csv").read_bytes()
    assert b"\r" not in raw
    text = raw.decode()
    # estimates carry full 12-digit precision somewhere in the file
    floats = re.findall(r"-?\d\.\d{8,11}\d*", text)
    assert floats, "expected full-precision float cells"


def test_workers_flag_matches_serial(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path))
    main(["simulate", "--config", path, "--output", str(tmp_path / "ser")])
    main(["simulate", "--config", path, "--output", str(tmp_path / "par"), "--workers", "3"])
    assert (tmp_path / "ser" / "trials.csv").read_bytes() == (tmp_path / "par" / "trials.csv").read_bytes()


# ---------------------------------------------------------------------------
# tune-lambda


def test_tune_lambda_round_robin_deterministic(tmp_path, capsys):
    cfg = {
        "process": {"kind": "round_robin", "p": 2, "n": 1000},
        "targets": [{"label": "a0", "vector": [1.0, 0.0]}],
        "levels": [0.9],
        "lambda": {"kind": "percentile", "percentile": 0.05, "pilot_runs": 25},
        "trials": 1,
        "seed": 5,
        "output_dir": str(tmp_path / "out"),
    }
    path = write_config(tmp_path, cfg)
    assert main(["tune-lambda", "--config", path]) == 0
    info = json.loads((tmp_path / "out" / "lambda.json").read_text())
    assert info["lambda"] == 500.0
    # every pilot quantile of a deterministic design equals floor(n/p)
    assert set(info["pilot_lambda_min_quantiles"].values()) == {500.0}


def test_tune_lambda_quantiles_ordered(tmp_path):
    cfg = base_config(tmp_path)
    cfg["lambda"] = {"kind": "percentile", "percentile": 0.05, "pilot_runs": 40}
    path = write_config(tmp_path, cfg)
    assert main(["tune-lambda", "--config", path]) == 0
    info = json.loads((tmp_path / "out" / "lambda.json").read_text())
    q = info["pilot_lambda_min_quantiles"]
    assert q["0.05"] <= q["0.5"]


def test_tune_lambda_fixed_echoes_value(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path))
    assert main(["tune-lambda", "--config", path]) == 0
    info = json.loads((tmp_path / "out" / "lambda.json").read_text())
    assert info["lambda"] == 5.0
    assert "pilot_lambda_min_quantiles" not in info


# ---------------------------------------------------------------------------
# report


def test_report_reaggregates_trials(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path, trials=8))
    main(["simulate", "--config", path])
    out = tmp_path / "out"
    original = (out / "summary.csv").read_text().splitlines()
    rep = tmp_path / "rep"
    assert main(["report", "--input", str(out / "trials.csv"), "--output", str(rep)]) == 0
    regenerated = (rep / "summary.csv").read_text().splitlines()
    assert regenerated[0] == original[0]
    assert len(regenerated) == len(original)
    # coverage and trial counts survive the CSV round trip exactly;
    # recomputed floats agree to the 12 digits that were stored
    for a, b in zip(original[1:], regenerated[1:]):
        fa, fb = a.split(","), b.split(",")
        assert fa[:7] == fb[:7]
        for x, y in zip(fa[7:], fb[7:]):
            assert float(x) == pytest.approx(float(y), rel=1e-9, abs=1e-12)


def test_report_missing_input_exits_2(tmp_path, capsys):
    assert main(["report", "--input", str(tmp_path / "nope.csv")]) == 2
