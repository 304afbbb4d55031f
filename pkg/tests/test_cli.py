import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from pccdesign.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


SMALL_SURFACE = {
    "cohort": {"kind": "normal_scores", "n": 2000, "mean": -1.5, "sd": 1.0},
    "grid": {"n_k": 4, "n_w": 4, "n": 50, "B": 20},
    "seed": 11,
}

SMOKE_POWER = {
    "cohort": {"kind": "lda", "n": 2000, "p": 30, "prevalence_initial": 0.15,
               "beta": [0.7] * 5 + [-0.7] * 5 + [0.0] * 20},
    "alpha0_values": [-0.7],
    "alpha1_values": [0.8],
    "designs": [{"kind": "srs"}],
    "sample_sizes": [200],
    "replicates": 1,
    "seed": 3,
}


class TestSurfaceCommand:
    def test_writes_surfaces_and_manifest(self, runner, tmp_path):
        cfg = _write_config(tmp_path, "surface.json", SMALL_SURFACE)
        out = tmp_path / "out"
        result = runner.invoke(main, ["surface", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["complete"] is True
        assert manifest["command"] == "surface"
        for name in ("surface_d_opt.json", "surface_bin_ent.json",
                     "surface_d_opt.csv", "surface_bin_ent.csv"):
            assert name in manifest["artifacts"]
            assert (out / name).exists()
        payload = json.loads((out / "surface_d_opt.json").read_text())
        assert payload["criterion"] == "D_OPT"
        assert len(payload["k_grid"]) == 4

    def test_rerun_is_byte_identical(self, runner, tmp_path):
        cfg = _write_config(tmp_path, "surface.json", SMALL_SURFACE)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, ["surface", cfg, "--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, ["surface", cfg, "--out", str(out2)]).exit_code == 0
        for name in ("surface_d_opt.json", "surface_bin_ent.json",
                     "surface_d_opt.csv", "surface_bin_ent.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        m1 = json.loads((out1 / "manifest.json").read_text())
        m2 = json.loads((out2 / "manifest.json").read_text())
        m1.pop("wall_time_s"), m2.pop("wall_time_s")
        assert m1 == m2

    def test_seed_override_changes_hash_and_values(self, runner, tmp_path):
        cfg = _write_config(tmp_path, "surface.json", SMALL_SURFACE)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        runner.invoke(main, ["surface", cfg, "--out", str(out1)])
        runner.invoke(main, ["surface", cfg, "--out", str(out2), "--seed", "99"])
        m1 = json.loads((out1 / "manifest.json").read_text())
        m2 = json.loads((out2 / "manifest.json").read_text())
        assert m1["config_hash"] != m2["config_hash"]
        assert m2["master_seed"] == 99

    def test_missing_cohort_file_exits_2(self, runner, tmp_path):
        cfg = _write_config(
            tmp_path, "surface.json",
            {"cohort": {"kind": "file", "path": str(tmp_path / "nope.csv")},
             "grid": {"n_k": 2, "n_w": 2, "n": 10, "B": 2}},
        )
        result = runner.invoke(main, ["surface", cfg, "--out", str(tmp_path / "o")])
        assert result.exit_code == 2

    def test_malformed_json_exits_2_with_line(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"cohort": \n  broken')
        result = runner.invoke(main, ["surface", str(path), "--out", str(tmp_path / "o")])
        assert result.exit_code == 2
        assert "line" in result.output

    def test_invalid_field_exits_2_named(self, runner, tmp_path):
        payload = dict(SMALL_SURFACE)
        payload["grid"] = {"n": 50, "B": 20, "w_values": [0.5, 1.7]}
        cfg = _write_config(tmp_path, "surface.json", payload)
        result = runner.invoke(main, ["surface", cfg, "--out", str(tmp_path / "o")])
        assert result.exit_code == 2
        assert "w_values" in result.output


class TestPowerCommand:
    def test_single_replicate_smoke(self, runner, tmp_path):
        cfg = _write_config(tmp_path, "power.json", SMOKE_POWER)
        out = tmp_path / "out"
        result = runner.invoke(main, ["power", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "manifest.json").read_text())
        csvs = [a for a in manifest["artifacts"] if a.endswith(".csv")]
        assert len(csvs) == 1
        header, *rows = (out / csvs[0]).read_text().splitlines()
        assert header == "test,n,power,stderr,dropped"
        assert len(rows) == 3  # three tests at one sample size

    def test_parameter_grid_produces_csv_set(self, runner, tmp_path):
        payload = dict(SMOKE_POWER)
        payload["alpha0_values"] = [0.0, -0.4]
        payload["alpha1_values"] = [1.0, 0.8]
        cfg = _write_config(tmp_path, "power.json", payload)
        out = tmp_path / "out"
        result = runner.invoke(main, ["power", cfg, "--out", str(out)])
        assert result.exit_code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        csvs = [a for a in manifest["artifacts"] if a.startswith("power_a0_")]
        assert len(csvs) == 4  # 2 x 2 grid, one design

    def test_infeasible_design_exits_3(self, runner, tmp_path):
        payload = dict(SMOKE_POWER)
        payload["designs"] = [{"kind": "pcc", "k": 10.0, "w": 0.5}]
        cfg = _write_config(tmp_path, "power.json", payload)
        result = runner.invoke(main, ["power", cfg, "--out", str(tmp_path / "o")])
        assert result.exit_code == 3

    def test_manifest_written_before_data(self, runner, tmp_path):
        # sabotage: infeasible run still leaves an incomplete manifest behind
        payload = dict(SMOKE_POWER)
        payload["designs"] = [{"kind": "pcc", "k": 10.0, "w": 0.5}]
        cfg = _write_config(tmp_path, "power.json", payload)
        out = tmp_path / "o"
        runner.invoke(main, ["power", cfg, "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["complete"] is False


class TestGenCohortCommand:
    def test_round_trip(self, runner, tmp_path):
        cfg = _write_config(
            tmp_path, "gen.json",
            {"cohort": {"kind": "lda", "n": 200, "p": 25,
                        "prevalence_initial": 0.2,
                        "beta": [0.5] * 5 + [0.0] * 20},
             "outcomes": {"alpha0": 0.0, "alpha1": 1.0},
             "seed": 5},
        )
        out = tmp_path / "out"
        result = runner.invoke(main, ["gen-cohort", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        from pccdesign.datagen import load_cohort_csv, load_cohort_npz

        csv_cohort = load_cohort_csv(out / "cohort.csv")
        npz_cohort = load_cohort_npz(out / "cohort.npz")
        assert np.array_equal(csv_cohort.scores, npz_cohort.scores)
        assert np.array_equal(csv_cohort.features, npz_cohort.features)
        assert np.array_equal(csv_cohort.labels, npz_cohort.labels)
        summary = json.loads((out / "cohort_summary.json").read_text())
        assert summary["n"] == 200 and summary["p"] == 25


class TestRevisionCommand:
    def test_smoke(self, runner, tmp_path):
        cfg = _write_config(
            tmp_path, "rev.json",
            {"cohort": {"kind": "lda", "n": 1500, "p": 25, "prevalence_initial": 0.15,
                        "beta": [0.7] * 5 + [-0.7] * 5 + [0.0] * 15},
             "gamma": {"effect_size": 0.8, "sparsity": 0.12, "start_index": 10},
             "designs": [{"kind": "pcc", "k": -1.0, "w": 0.5}],
             "sample_sizes": [200],
             "replicates": 2,
             "n_lambdas": 10,
             "seed": 4},
        )
        out = tmp_path / "out"
        result = runner.invoke(main, ["revision", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = (out / "revision_curves.csv").read_text().splitlines()
        assert lines[0] == "design,n,lambda,fdr,fer"
        assert len(lines) == 1 + 10


class TestRobustnessCommand:
    def test_smoke(self, runner, tmp_path):
        cfg = _write_config(
            tmp_path, "rob.json",
            {"cohort": {"kind": "normal_scores", "n": 1500, "mean": -1.0, "sd": 1.0},
             "assumed_list": [{"alpha0": 0.0, "alpha1": 1.0},
                              {"alpha0": -0.69, "alpha1": 1.0}],
             "grid": {"n_k": 3, "n_w": 3, "n": 40, "B": 10},
             "seed": 2},
        )
        out = tmp_path / "out"
        result = runner.invoke(main, ["robustness", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "robustness_results.json").read_text())
        assert len(payload["surfaces"]) == 2
