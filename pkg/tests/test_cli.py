"""Command-line front end: listing, describing, running, config handling."""

import json
import os

from click.testing import CliRunner

from qhrolab.cli import main
from qhrolab.experiments import EXPERIMENTS


def test_list_names_every_experiment():
    res = CliRunner().invoke(main, ["list"])
    assert res.exit_code == 0
    for name in EXPERIMENTS:
        assert name in res.output


def test_describe_shows_bound_and_defaults():
    res = CliRunner().invoke(main, ["describe", "exp_pru2"])
    assert res.exit_code == 0
    assert "2*sqrt((t^2+t*l)/N)" in res.output
    assert "trials = 20000" in res.output
    res = CliRunner().invoke(main, ["describe", "exp_prfs"])
    assert "needs n >= lam + m_in" in res.output


def test_describe_unknown_exits_2():
    res = CliRunner().invoke(main, ["describe", "nope"])
    assert res.exit_code == 2


def test_run_unknown_exits_2(tmp_path):
    res = CliRunner().invoke(main, ["run", "nope", "--out", str(tmp_path)])
    assert res.exit_code == 2


def test_run_writes_reports(tmp_path):
    res = CliRunner().invoke(
        main, ["run", "exp_split_augment", "--seed", "5", "--out", str(tmp_path)]
    )
    assert res.exit_code == 0, res.output
    assert "[pass]" in res.output
    runs = os.listdir(tmp_path / "exp_split_augment")
    assert len(runs) == 1
    rundir = tmp_path / "exp_split_augment" / runs[0]
    obj = json.loads((rundir / "report.json").read_text())
    assert obj["experiment"] == "exp_split_augment" and obj["seed"] == 5
    csv = (rundir / "report.csv").read_text()
    assert csv.splitlines()[0] == "point,check,kind,value,bound,stderr,passed"


def test_run_format_json_only(tmp_path):
    res = CliRunner().invoke(
        main,
        ["run", "exp_split_augment", "--seed", "5", "--out", str(tmp_path), "--format", "json"],
    )
    assert res.exit_code == 0
    runs = os.listdir(tmp_path / "exp_split_augment")
    files = os.listdir(tmp_path / "exp_split_augment" / runs[0])
    assert files == ["report.json"]


def test_run_reports_are_reproducible(tmp_path):
    runner = CliRunner()
    for sub in ("a", "b"):
        res = runner.invoke(
            main,
            ["run", "exp_spru", "--seed", "8", "--trials", "200", "--out", str(tmp_path / sub)],
        )
        assert res.exit_code == 0, res.output

    def read(sub):
        (run,) = os.listdir(tmp_path / sub / "exp_spru")
        d = tmp_path / sub / "exp_spru" / run
        return (d / "report.json").read_bytes(), (d / "report.csv").read_bytes()

    assert read("a") == read("b")


def test_run_with_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps({"schema_version": 1, "experiment": "exp_split_augment", "seed": 4, "n": 2})
    )
    res = CliRunner().invoke(
        main,
        ["run", "exp_split_augment", "--config", str(cfg), "--out", str(tmp_path / "out")],
    )
    assert res.exit_code == 0, res.output
    (run,) = os.listdir(tmp_path / "out" / "exp_split_augment")
    obj = json.loads((tmp_path / "out" / "exp_split_augment" / run / "report.json").read_text())
    assert obj["params"]["n"] == 2 and obj["seed"] == 4


def test_config_rejections(tmp_path):
    runner = CliRunner()

    def attempt(payload):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps(payload))
        return runner.invoke(
            main, ["run", "exp_split_augment", "--config", str(cfg), "--out", str(tmp_path / "o")]
        )

    assert attempt({"seed": 1}).exit_code == 2  # missing schema_version
    assert attempt({"schema_version": 2, "seed": 1}).exit_code == 2
    assert attempt({"schema_version": 1, "seed": 1, "bogus": 3}).exit_code == 2
    assert attempt({"schema_version": 1, "experiment": "exp_spru", "seed": 1}).exit_code == 2


def test_run_invalid_params_exit_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema_version": 1, "seed": 1, "t": 2}))
    res = CliRunner().invoke(
        main,
        ["run", "exp_split_augment", "--config", str(cfg), "--out", str(tmp_path / "o")],
    )
    assert res.exit_code == 2
    assert "invalid run" in res.output
