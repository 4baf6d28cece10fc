import csv
import json

import numpy as np
import pytest

from agtf.cli import main
from agtf.datasets import read_labels, synth_dataset, write_dataset
from agtf.experiment import TRACE_COLUMNS, ExperimentConfig, StageError, run_experiment, sweep, sweep_points

SMALL = ["--k", "3", "--synth-n", "60", "--synth-dims", "4,3", "--max-iter", "30"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_synthetic_outputs(tmp_path):
    out = tmp_path / "r"
    assert main(["run", *SMALL, "--out", str(out)]) == 0
    summary = json.loads((out / "metrics.json").read_text())
    for key in ("acc", "nmi", "purity", "iterations", "converged", "runtime_seconds", "config"):
        assert key in summary
    assert summary["config"]["K"] == 3 and summary["config"]["max_iter"] == 30
    assert summary["config"]["synth"] == {"n": 60, "view_dims": [4, 3]}
    assert len(read_labels(out / "labels.csv")) == 60
    assert len(read_labels(out / "anchors_labels.csv")) == summary["m"] == 24
    with open(out / "trace.csv") as fh:
        header = fh.readline().strip()
    assert header == ",".join(TRACE_COLUMNS)
    assert len(read_csv(out / "trace.csv")) == summary["iterations"]


def test_run_is_byte_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["run", *SMALL, "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a/labels.csv").read_bytes() == (tmp_path / "b/labels.csv").read_bytes()
    assert (tmp_path / "a/trace.csv").read_bytes() == (tmp_path / "b/trace.csv").read_bytes()


def test_run_manifest_without_labels(tmp_path):
    views, _, _ = synth_dataset(3, 45, [3, 3], seed=2)
    manifest = write_dataset(tmp_path / "data", views, labels=None, fmt="csv")
    out = tmp_path / "out"
    assert main(["run", "--manifest", str(manifest), "--k", "3", "--max-iter", "10", "--out", str(out)]) == 0
    summary = json.loads((out / "metrics.json").read_text())
    assert not {"acc", "nmi", "purity"} & set(summary)
    assert len(read_labels(out / "labels.csv")) == 45


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"K": 3, "synth": {"n": 60, "view_dims": [4, 3]}, "max_iter": 50, "p": 0.7}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--max-iter", "7", "--rotate-prox", "false", "--out", str(out)]) == 0
    summary = json.loads((out / "metrics.json").read_text())
    assert summary["config"]["max_iter"] == 7
    assert summary["config"]["p"] == 0.7
    assert summary["config"]["rotate_prox"] is False


def test_trials(tmp_path):
    out = tmp_path / "t"
    assert main(["run", *SMALL, "--trials", "2", "--out", str(out)]) == 0
    summary = json.loads((out / "metrics.json").read_text())
    assert [t["seed"] for t in summary["trials"]] == [0, 1]
    assert "acc_mean" in summary and "acc_std" in summary


@pytest.mark.parametrize(
    "argv, code",
    [
        (["run", "--k", "3"], 1),  # no data source
        (["run", *SMALL, "--p", "1.5"], 1),
        (["run", *SMALL, "--anchor-rate", "0.01"], 1),
        (["run", "--k", "3", "--manifest", "/nonexistent/manifest.json"], 2),
        (["run", *SMALL, "--rotate-prox", "maybe"], 1),
        (["frobnicate"], 1),
        (["run", "--config", "/nonexistent.json"], 1),
    ],
)
def test_exit_codes(tmp_path, argv, code, capsys):
    assert main([*argv, "--out", str(tmp_path / "x")] if argv[0] == "run" else argv) == code
    if code:
        err = capsys.readouterr().err
        assert err


def test_stage_tagged_message(tmp_path, capsys):
    main(["run", "--k", "3", "--manifest", str(tmp_path / "none.json"), "--out", str(tmp_path)])
    assert "[load]" in capsys.readouterr().err


def test_unknown_config_key():
    with pytest.raises(StageError):
        ExperimentConfig.from_dict({"K": 3, "lambda3": 1})


def test_synth_command(tmp_path, capsys):
    assert main(["synth", "--k", "3", "--n", "30", "--dims", "2,2", "--format", "csv", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [v["format"] for v in manifest["views"]] == ["csv", "csv"]
    assert main(["synth", "--k", "3", "--n", "5", "--out", str(tmp_path)]) == 1


def test_sweep_points():
    assert sweep_points("p", [0.3, 0.5]) == [{"p": 0.3}, {"p": 0.5}]
    pts = sweep_points("lambda", [1, 10], [0, 5])
    assert pts == [{"lambda1": 1, "lambda2": 0}, {"lambda1": 1, "lambda2": 5},
                   {"lambda1": 10, "lambda2": 0}, {"lambda1": 10, "lambda2": 5}]
    with pytest.raises(StageError):
        sweep_points("eta", [1.1])


def test_single_point_sweep_matches_run(tmp_path):
    base = dict(K=3, synth={"n": 60, "view_dims": [4, 3]}, max_iter=20)
    rows = sweep(ExperimentConfig(**base, out=str(tmp_path / "s")), [{"p": 0.5}])
    direct = run_experiment(ExperimentConfig(**base, out=str(tmp_path / "r")))
    assert rows[0]["status"] == "ok"
    for key in ("acc", "nmi", "purity", "iterations", "converged", "m"):
        assert rows[0][key] == direct[key]
    assert (tmp_path / "s/point_000/labels.csv").read_bytes() == (tmp_path / "r/labels.csv").read_bytes()


def test_sweep_cli_records_failures(tmp_path):
    out = tmp_path / "sw"
    argv = ["sweep", *SMALL, "--param", "anchor_rate", "--values", "0.2,0.01", "--out", str(out)]
    assert main(argv) == 0
    rows = read_csv(out / "sweep.csv")
    assert [r["status"] for r in rows][0] == "ok"
    assert rows[1]["status"].startswith("error")


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = dict(K=3, synth={"n": 60, "view_dims": [4, 3]}, max_iter=15)
    pts = sweep_points("p", [0.4, 1.0])
    a = sweep(ExperimentConfig(**cfg, out=str(tmp_path / "a")), pts, jobs=1)
    b = sweep(ExperimentConfig(**cfg, out=str(tmp_path / "b")), pts, jobs=2)
    for ra, rb in zip(a, b):
        assert ra["acc"] == rb["acc"] and ra["iterations"] == rb["iterations"]


@pytest.mark.slow
def test_anchor_rate_sweep_runtime_correlation(tmp_path):
    from scipy.stats import spearmanr

    cfg = ExperimentConfig(K=4, synth={"n": 400, "view_dims": [10, 8, 12]}, out=str(tmp_path))
    rates = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    rows = sweep(cfg, sweep_points("anchor_rate", rates))
    assert all(r["status"] == "ok" for r in rows)
    rho = spearmanr(rates, [r["runtime_seconds"] for r in rows]).statistic
    assert rho > 0.8
