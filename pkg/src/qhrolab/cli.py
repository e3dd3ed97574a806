"""Command-line front end: list, describe, and run the registered experiments.

No numerics live here; everything routes through the experiments registry.
"""

from __future__ import annotations

import json
import os
import sys
import time

import click

from .experiments import EXPERIMENTS, run_experiment

CONFIG_KEYS = {"schema_version", "experiment", "seed", "trials", "jobs"}


def _load_config(path, name):
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a flat JSON object")
    if "schema_version" not in cfg:
        raise ValueError("config is missing schema_version")
    if cfg["schema_version"] != 1:
        raise ValueError(f"unsupported schema_version {cfg['schema_version']!r}")
    allowed = CONFIG_KEYS | set(EXPERIMENTS[name].defaults)
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    if "experiment" in cfg and cfg["experiment"] != name:
        raise ValueError(f"config is for {cfg['experiment']!r}, not {name!r}")
    cfg.pop("schema_version", None)
    cfg.pop("experiment", None)
    return cfg


@click.group()
def main():
    """Exact-simulation laboratory for keyed oracle constructions."""


@main.command("list")
def cmd_list():
    """List registered experiments."""
    for name in sorted(EXPERIMENTS):
        click.echo(f"{name}: {EXPERIMENTS[name].description}")


@main.command("describe")
@click.argument("name")
def cmd_describe(name):
    """Show parameters, bound, and pass rule of one experiment."""
    if name not in EXPERIMENTS:
        click.echo(f"unknown experiment {name!r}", err=True)
        sys.exit(2)
    d = EXPERIMENTS[name]
    click.echo(f"experiment: {name}")
    click.echo(f"description: {d.description}")
    click.echo(f"bound: {d.bound}")
    click.echo(f"pass rule: {d.pass_rule}")
    click.echo("defaults:")
    for k, v in sorted(d.defaults.items()):
        click.echo(f"  {k} = {v}")


@main.command("run")
@click.argument("name")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--trials", type=click.IntRange(1), default=None)
@click.option("--out", "outdir", type=click.Path(), default="results", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]), default="both", show_default=True)
@click.option("--jobs", type=click.IntRange(1), default=None, help="defaults to QHRO_JOBS or 1")
def cmd_run(name, config_path, seed, trials, outdir, fmt, jobs):
    """Run one experiment and write report files."""
    if name not in EXPERIMENTS:
        click.echo(f"unknown experiment {name!r}", err=True)
        sys.exit(2)
    params = {}
    try:
        if config_path:
            params.update(_load_config(config_path, name))
        params.setdefault("seed", seed)
        if trials is not None:
            params["trials"] = trials
        if jobs is None:
            jobs = int(os.environ.get("QHRO_JOBS", "1"))
        params["jobs"] = jobs
        started = time.time()
        report = run_experiment(name, params)
        elapsed = time.time() - started
    except (ValueError, KeyError, TypeError) as exc:
        click.echo(f"invalid run: {exc}", err=True)
        sys.exit(2)

    stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime())
    rundir = os.path.join(outdir, name, f"{stamp}-{report.seed}")
    os.makedirs(rundir, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        p = os.path.join(rundir, "report.json")
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        written.append(p)
    if fmt in ("csv", "both"):
        p = os.path.join(rundir, "report.csv")
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        written.append(p)

    click.echo(f"{name} seed={report.seed} ({elapsed:.1f}s)")
    for entry in report.grid:
        pt = ";".join(f"{k}={v}" for k, v in sorted(entry["point"].items()))
        for c in entry["checks"]:
            mark = "pass" if c["passed"] else "FAIL"
            click.echo(
                f"  [{mark}] {pt} {c['name']} ({c['kind']}): "
                f"value={c['value']:.6g} bound={c['bound']:.6g} stderr={c['stderr']:.3g}"
            )
    for p in written:
        click.echo(f"wrote {p}")
    sys.exit(0 if report.passed else 1)


if __name__ == "__main__":
    main()
