import csv
import json

import numpy as np
import pytest

from chowliupp import cli, io
from chowliupp.model import random_model
from chowliupp.schemas import LEARN_REPORT, PARTITION, validate


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def instance(tmp_path):
    model = random_model(8, 0, values=[0.05, 0.5, 0.9], random_signs=True)
    io.write_model(model, tmp_path / "truth.json")
    return tmp_path


def test_generate_and_learn(instance, capsys):
    assert run("generate", "random", "--n", 8, "--out", instance / "r.json", "--corr-out", instance / "mu.csv") == 0
    code = run(
        "learn", "--corr", instance / "mu.csv", "--eps", 1e-6, "--out", instance / "out.json",
        "--report", instance / "report.json", "--truth", instance / "r.json",
        "--dump-partition", instance / "part.json",
    )
    assert code == 0
    report = json.loads((instance / "report.json").read_text())
    validate(report, LEARN_REPORT)
    assert report["loctv2_vs_truth"] < 1e-3
    validate(json.loads((instance / "part.json").read_text()), PARTITION)
    assert io.read_model(instance / "out.json").n == 8


def test_learn_to_stdout(instance, capsys):
    run("generate", "failure", "--delta", 0.05, "--n", 10, "--out", instance / "mu.csv")
    assert run("learn", "--corr", instance / "mu.csv", "--eps", 0.1, "--quiet") == 0
    assert json.loads(capsys.readouterr().out)["n"] == 20


def test_sample_and_eval(instance, capsys):
    assert run("sample", "--model", instance / "truth.json", "-m", 5, "--seed", 1, "--out", instance / "x.csv") == 0
    assert io.read_samples(instance / "x.csv").shape == (5, 8)
    assert run("eval", "--model-a", instance / "truth.json", "--model-b", instance / "truth.json", "--k", 3) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["loctv2"] == 0.0 and out["loctv3"] == 0.0


def test_eval_size_mismatch(instance):
    io.write_model(random_model(5, 1), instance / "small.json")
    assert run("eval", "--model-a", instance / "truth.json", "--model-b", instance / "small.json") == 2


def test_missing_file_is_invalid_input(tmp_path):
    assert run("learn", "--corr", tmp_path / "nope.csv", "--eps", 0.1) == 2


def test_malformed_correlations(tmp_path):
    (tmp_path / "bad.csv").write_text("1,2\n2,1\n")
    assert run("learn", "--corr", tmp_path / "bad.csv", "--eps", 0.1) == 2


def test_bad_config(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"kind": "latent", "delta": 0.5}))
    assert run("experiment", "latent", "--config", tmp_path / "cfg.json") == 2
    (tmp_path / "cfg.json").write_text("{not json")
    assert run("experiment", "latent", "--config", tmp_path / "cfg.json") == 2


@pytest.mark.parametrize("kind", ["failure", "latent"])
def test_experiment_verify(tmp_path, kind):
    (tmp_path / "cfg.json").write_text(json.dumps({"kind": kind, "delta": 0.01, "n": 30}))
    assert run("experiment", kind, "--config", tmp_path / "cfg.json", "--out-dir", tmp_path / "out", "--verify") == 0
    saved = json.loads((tmp_path / "out" / "report.json").read_text())
    assert saved["config"]["kind"] == kind


def test_scaling_csv(tmp_path):
    cfg = {"kind": "scaling", "n": 15, "trials": 2, "eps_grid": [1e-3, 1e-4]}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert run("experiment", "scaling", "--config", tmp_path / "cfg.json", "--out-dir", tmp_path, "--verify") == 0
    with open(tmp_path / "scaling.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["eps", "observed_C"]
    assert [float(r[0]) for r in rows[1:]] == [1e-3, 1e-4]
    assert all(np.isfinite(float(r[1])) for r in rows[1:])


def test_contract_violation_exit_code(tmp_path, monkeypatch):
    real = cli.run_experiment

    def corrupted(cfg):
        report = real(cfg)
        report["chow_liu_certificate"] = report["chow_liu_loctv2"] + 1.0
        return report

    monkeypatch.setattr(cli, "run_experiment", corrupted)
    (tmp_path / "cfg.json").write_text(json.dumps({"kind": "failure", "delta": 0.01, "n": 20}))
    assert run("experiment", "failure", "--config", tmp_path / "cfg.json", "--verify") == 3


def test_kind_mismatch(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"kind": "latent"}))
    assert run("experiment", "failure", "--config", tmp_path / "cfg.json") == 2
