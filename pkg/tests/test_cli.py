from __future__ import annotations

import json

import numpy as np
import pytest

from gsdfront import cli
from gsdfront.core import NumericalError

CONFIG = """version: 1
metrics:
  - {name: acc, scale: cardinal}
  - {name: secs, scale: ordinal, orientation: lower, transform: decile, bins: 10}
alpha: 0.1
n_resamples: 30
seed: 3
"""


@pytest.fixture
def data(tmp_path):
    rng = np.random.default_rng(0)
    lines = ["dataset,classifier,acc,secs"]
    for i in range(6):
        base = rng.uniform(0.3, 0.6)
        for c, shift in (("A", 0.3), ("B", 0.1), ("C", 0.0)):
            lines.append(f"D{i},{c},{base + shift + rng.uniform(0, 0.05):.3f},{rng.uniform(1, 9) / (1 + shift):.2f}")
    csv_path = tmp_path / "bench.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(CONFIG)
    return str(csv_path), str(cfg)


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_to_stdout(capsys, data):
    csv_path, cfg = data
    code, out, _ = _run(capsys, "analyze", csv_path, "--config", cfg)
    assert code == 0
    report = json.loads(out)
    assert report["classifiers"] == ["A", "B", "C"]
    assert "A" in report["fronts"]["egsd"]["members"]
    assert set(report["fronts"]["egsd"]["members"]) <= set(report["fronts"]["pareto"]["members"])


def test_every_command_writes_files(capsys, data, tmp_path):
    csv_path, cfg = data
    runs = {
        "analyze": ["analyze", csv_path, "--config", cfg],
        "test": ["test", csv_path, "--config", cfg, "--target", "A"],
        "robust": ["robust", csv_path, "--config", cfg, "--target", "A", "--k-max", "2"],
        "baseline": ["baseline", csv_path, "--config", cfg],
        "simulate": ["simulate", "--s-grid", "5", "10", "--runs", "2"],
        "validate": ["validate", csv_path, "--config", cfg],
    }
    expected = {
        "analyze": {"analysis.json", "d_matrix.csv", "gsd_hasse.dot", "fsd_hasse.dot"},
        "test": {"test.json", "pairwise.csv"},
        "robust": {"robust.json", "curves.csv"},
        "baseline": {"baseline.json", "nemenyi.csv"},
        "simulate": {"experiment.json", "experiment.csv"},
        "validate": {"validate.json"},
    }
    for name, argv in runs.items():
        first, second = tmp_path / f"{name}1", tmp_path / f"{name}2"
        assert _run(capsys, *argv, "--out", str(first))[0] == 0, name
        assert _run(capsys, *argv, "--out", str(second))[0] == 0, name
        files = {p.name for p in first.iterdir()}
        assert files == expected[name]
        for f in files:
            assert (first / f).read_bytes() == (second / f).read_bytes(), f


def test_test_modes(capsys, data):
    csv_path, cfg = data
    _, out, _ = _run(capsys, "test", csv_path, "--config", cfg, "--target", "C", "--static")
    report = json.loads(out)
    assert "static" in report and "dynamic" not in report
    assert report["plan"]["r"] == 31
    _, out, _ = _run(capsys, "test", csv_path, "--config", cfg, "--target", "C", "--dynamic", "--exhaustive")
    report = json.loads(out)
    assert report["plan"]["r"] == 924 and report["dynamic"]["level"] == pytest.approx(0.05)


def test_usage_errors(capsys, data):
    csv_path, cfg = data
    assert _run(capsys, "analyze", csv_path)[0] == 1
    assert _run(capsys, "frobnicate")[0] == 1
    assert _run(capsys, "test", csv_path, "--config", cfg, "--target", "A", "--alpha", "2")[0] == 1
    assert _run(capsys, "robust", csv_path, "--config", cfg, "--target", "A", "--k-max", "6")[0] == 1


def test_data_errors(capsys, data, tmp_path):
    csv_path, cfg = data
    code, _, err = _run(capsys, "analyze", str(tmp_path / "none.csv"), "--config", cfg)
    assert code == 2 and "no such file" in err
    code, _, err = _run(capsys, "test", csv_path, "--config", cfg, "--target", "Z")
    assert code == 2 and "unknown target" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("dataset,classifier,acc\n" + "".join(f"D{i},A,{i + 2}\nD{i},B,0.5\n" for i in range(30)))
    code, _, err = _run(capsys, "validate", str(bad))
    assert code == 2 and len(err.splitlines()) == 30
    code, _, err = _run(capsys, "test", str(bad), "--target", "A")
    assert code == 2 and "and 20 more" in err
    bad_cfg = tmp_path / "bad.yaml"
    bad_cfg.write_text("version: 7\nmetrics: [{name: acc}]\n")
    assert _run(capsys, "analyze", csv_path, "--config", str(bad_cfg))[0] == 2


def test_numerical_failure_exit_code(capsys, data, monkeypatch):
    csv_path, cfg = data

    def fail(*args, **kwargs):
        raise NumericalError("lp did not converge")

    monkeypatch.setattr(cli, "d_matrix", fail)
    code, _, err = _run(capsys, "analyze", csv_path, "--config", cfg)
    assert code == 3 and "numerical failure" in err
