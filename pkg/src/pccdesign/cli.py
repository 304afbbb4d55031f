"""Batch command-line front end.

Every command takes one JSON config file plus optional ``--seed`` and
``--out`` overrides, writes a run manifest before any data file, and
finalizes the manifest (wall time, completeness) last, so interrupted
runs are detectable.  Exit codes: 0 success, 2 input error,
3 unreliable results or infeasible design.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from importlib.metadata import version as pkg_version
from pathlib import Path

import click
from pydantic import ValidationError

from . import runs
from .configs import (
    GenCohortRunConfig,
    PowerRunConfig,
    RevisionRunConfig,
    RobustnessRunConfig,
    SurfaceRunConfig,
)
from .datagen import save_cohort_csv, save_cohort_npz
from .sampling import InfeasibleDesignError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNRELIABLE = 3


def _die(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(model, config_path: str, seed: int | None):
    try:
        raw = json.loads(Path(config_path).read_text())
    except FileNotFoundError:
        _die(f"config file not found: {config_path}", EXIT_INPUT)
    except json.JSONDecodeError as exc:
        _die(f"malformed JSON in {config_path} at line {exc.lineno}: {exc.msg}", EXIT_INPUT)
    if seed is not None:
        raw["seed"] = seed
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        lines = "; ".join(
            f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()
        )
        _die(f"invalid config {config_path}: {lines}", EXIT_INPUT)


def _config_hash(cfg) -> str:
    canonical = json.dumps(cfg.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


class RunWriter:
    """Writes the manifest first, artifacts next, final manifest last."""

    def __init__(self, out_dir: str, command: str, cfg):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.cfg = cfg
        self.artifacts: list[str] = []
        self.t0 = time.monotonic()
        self._write_manifest(complete=False)

    def _write_manifest(self, complete: bool):
        manifest = {
            "command": self.command,
            "config_hash": _config_hash(self.cfg),
            "master_seed": getattr(self.cfg, "seed", None),
            "artifacts": sorted(self.artifacts),
            "wall_time_s": None if not complete else round(time.monotonic() - self.t0, 3),
            "complete": complete,
            "package_version": pkg_version("pccdesign"),
        }
        (self.out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        )

    def write_json(self, name: str, payload: dict):
        path = self.out / name
        path.write_text(json.dumps(payload, sort_keys=True) + "\n")
        self.artifacts.append(name)
        return path

    def write_csv(self, name: str, header: list[str], rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
        self.artifacts.append(name)
        return path

    def add_artifact(self, name: str):
        self.artifacts.append(name)

    def finish(self):
        self._write_manifest(complete=True)


def _fmt(x) -> str:
    return format(float(x), ".17g")


@click.group()
def main():
    """Planning toolkit for score-stratified outcome-label collection."""


@main.command("gen-cohort")
@click.argument("config_path")
@click.option("--out", default="run_out", show_default=True)
@click.option("--seed", type=int, default=None)
def gen_cohort(config_path, out, seed):
    """Generate a cohort file from a generator config."""
    cfg = _load_config(GenCohortRunConfig, config_path, seed)
    writer = RunWriter(out, "gen-cohort", cfg)
    cohort, summary = runs.run_gen_cohort(cfg)
    if cfg.format in ("csv", "both"):
        save_cohort_csv(cohort, writer.out / "cohort.csv")
        writer.add_artifact("cohort.csv")
    if cfg.format in ("npz", "both"):
        save_cohort_npz(cohort, writer.out / "cohort.npz")
        writer.add_artifact("cohort.npz")
    writer.write_json("cohort_summary.json", summary)
    writer.finish()
    click.echo(f"cohort written to {writer.out}")


@main.command("surface")
@click.argument("config_path")
@click.option("--out", default="run_out", show_default=True)
@click.option("--seed", type=int, default=None)
def surface(config_path, out, seed):
    """Estimate the information response surface pair over a (k, w) grid."""
    cfg = _load_config(SurfaceRunConfig, config_path, seed)
    writer = RunWriter(out, "surface", cfg)
    try:
        result = runs.run_surface(cfg)
    except InfeasibleDesignError as exc:
        _die(str(exc), EXIT_UNRELIABLE)
    except FileNotFoundError as exc:
        _die(str(exc), EXIT_INPUT)
    for key in ("d_opt", "bin_ent"):
        payload = result[key]
        writer.write_json(f"surface_{key}.json", payload)
        rows = []
        for ki, k in enumerate(payload["k_grid"]):
            for wi, w in enumerate(payload["w_grid"]):
                feas = payload["feasible"][ki][wi]
                v = payload["values"][ki][wi]
                se = payload["stderr"][ki][wi]
                rows.append(
                    [
                        _fmt(k),
                        _fmt(w),
                        _fmt(v) if feas and v is not None else "",
                        _fmt(se) if feas and se is not None else "",
                        int(feas),
                    ]
                )
        writer.write_csv(f"surface_{key}.csv", ["k", "w", "value", "stderr", "feasible"], rows)
    writer.finish()
    click.echo(f"surfaces written to {writer.out}")


@main.command("power")
@click.argument("config_path")
@click.option("--out", default="run_out", show_default=True)
@click.option("--seed", type=int, default=None)
def power(config_path, out, seed):
    """Recalibration-test power curves over a parameter grid."""
    cfg = _load_config(PowerRunConfig, config_path, seed)
    writer = RunWriter(out, "power", cfg)
    try:
        result = runs.run_power(cfg)
    except InfeasibleDesignError as exc:
        _die(str(exc), EXIT_UNRELIABLE)
    except (FileNotFoundError, ValueError) as exc:
        _die(str(exc), EXIT_INPUT)
    writer.write_json("power_results.json", result)
    for curve in result["curves"]:
        name = (
            f"power_a0_{curve['alpha0']:g}_a1_{curve['alpha1']:g}_"
            f"{curve['design'].replace('(', '_').replace(')', '').replace(',', '_').replace('=', '')}.csv"
        )
        writer.write_csv(
            name,
            ["test", "n", "power", "stderr", "dropped"],
            [
                [r["test"], r["n"], _fmt(r["power"]), _fmt(r["stderr"]), r["dropped"]]
                for r in curve["rows"]
            ],
        )
    writer.finish()
    if result["unreliable"]:
        click.echo("warning: some cells dropped too many replicates", err=True)
        sys.exit(EXIT_UNRELIABLE)
    click.echo(f"power curves written to {writer.out}")


@main.command("revision")
@click.argument("config_path")
@click.option("--out", default="run_out", show_default=True)
@click.option("--seed", type=int, default=None)
def revision(config_path, out, seed):
    """Support-recovery curves along the penalty path."""
    cfg = _load_config(RevisionRunConfig, config_path, seed)
    writer = RunWriter(out, "revision", cfg)
    try:
        result = runs.run_revision(cfg)
    except InfeasibleDesignError as exc:
        _die(str(exc), EXIT_UNRELIABLE)
    except (FileNotFoundError, ValueError) as exc:
        _die(str(exc), EXIT_INPUT)
    writer.write_json("revision_results.json", result)
    rows = []
    for block in result["designs"]:
        for n_str, curve in block["curves"].items():
            for lam, fdr, fer in zip(curve["lambdas"], curve["fdr"], curve["fer"]):
                rows.append([block["design"], n_str, _fmt(lam), _fmt(fdr), _fmt(fer)])
    writer.write_csv("revision_curves.csv", ["design", "n", "lambda", "fdr", "fer"], rows)
    writer.finish()
    if result["unreliable"]:
        sys.exit(EXIT_UNRELIABLE)
    click.echo(f"recovery curves written to {writer.out}")


@main.command("robustness")
@click.argument("config_path")
@click.option("--out", default="run_out", show_default=True)
@click.option("--seed", type=int, default=None)
def robustness(config_path, out, seed):
    """Surface pairs under several assumed parameter settings."""
    cfg = _load_config(RobustnessRunConfig, config_path, seed)
    writer = RunWriter(out, "robustness", cfg)
    try:
        result = runs.run_robustness(cfg)
    except InfeasibleDesignError as exc:
        _die(str(exc), EXIT_UNRELIABLE)
    except (FileNotFoundError, ValueError) as exc:
        _die(str(exc), EXIT_INPUT)
    writer.write_json("robustness_results.json", result)
    writer.finish()
    click.echo(f"robustness surfaces written to {writer.out}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Start the interactive-planning HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
