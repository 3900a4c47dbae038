"""Command-line interface tests: exit codes, output layout, determinism,
and agreement with the underlying library calls."""

import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import make_sub_spec, make_super_spec

from adkit.cli import main
from adkit.estimate import estimate_diffusion
from adkit.model import ModelSpec, spec_to_json
from adkit.riccati import FLArgument, stationary_cf
from adkit.simulate import PathGrid, SimConfig, load_path_csv, save_path_csv, simulate_path


@pytest.fixture(scope="module")
def sub_config(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "sub.json"
    p.write_text(spec_to_json(make_sub_spec()), encoding="utf-8")
    return str(p)


@pytest.fixture(scope="module")
def super_config(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "super.json"
    p.write_text(spec_to_json(make_super_spec()), encoding="utf-8")
    return str(p)


@pytest.fixture(scope="module")
def sim_csv(tmp_path_factory, sub_config):
    """One simulated path CSV shared by the estimate tests."""
    p = tmp_path_factory.mktemp("paths") / "path.csv"
    rc = main(["simulate", "--config", sub_config, "--T", "10", "--dt", "0.001",
               "--seed", "5", "--out", str(p)])
    assert rc == 0
    return str(p)


@pytest.fixture(scope="module")
def rho_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("rho") / "rho.json"
    p.write_text(json.dumps({"rho": [[1.0, 0.0], [0.0, 1.0]]}), encoding="utf-8")
    return str(p)


class TestExitCodes:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "usage" in capsys.readouterr().out

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert capsys.readouterr().out.startswith("adkit ")

    def test_unknown_command_is_usage_error(self, capsys):
        assert main(["frobnicate"]) == 64
        assert "invalid choice" in capsys.readouterr().err

    def test_missing_required_flag_is_usage_error(self, capsys):
        assert main(["classify"]) == 64
        assert "--config" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, sub_config):
        assert main(["classify", "--config", sub_config, "--bogus"]) == 64

    def test_missing_config_file_is_validation_error(self, capsys):
        assert main(["classify", "--config", "/no/such/file.json"]) == 1
        assert "validation error" in capsys.readouterr().err

    def test_inadmissible_model_is_validation_error(self, tmp_path):
        raw = json.loads(spec_to_json(make_sub_spec()))
        raw["a"] = -1.0
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(raw), encoding="utf-8")
        assert main(["classify", "--config", str(p)]) == 1

    def test_bad_scheme_is_usage_error(self, sub_config, tmp_path):
        rc = main(["simulate", "--config", sub_config, "--T", "1", "--dt", "0.1",
                   "--out", str(tmp_path / "x.csv"), "--scheme", "Milstein"])
        assert rc == 64

    def test_conflicting_rho_flags_are_usage_error(self, sim_csv, rho_file):
        rc = main(["estimate", "--path", sim_csv, "--rho-known", rho_file,
                   "--estimate-diffusion"])
        assert rc == 64

    def test_estimate_requires_a_rho_source(self, sim_csv):
        assert main(["estimate", "--path", sim_csv]) == 64

    def test_numerical_failure_exit_code(self, tmp_path, rho_file, capsys):
        # a constant path has singular information: numerical failure, not usage
        t = np.arange(0.0, 1.001, 0.001)
        g = PathGrid(times=t, y=np.full_like(t, 2.0), x=np.zeros((len(t), 1)),
                     spec_hash="s", seed=0)
        csv = tmp_path / "flat.csv"
        save_path_csv(g, csv, scheme="EulerFullTruncation")
        assert main(["estimate", "--path", str(csv), "--rho-known", rho_file]) == 2
        assert "numerical error" in capsys.readouterr().err


class TestClassify:
    def test_subcritical_output(self, sub_config, capsys):
        assert main(["classify", "--config", sub_config]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "subcritical"
        assert "b = 1.0" in out
        assert any(line.startswith("lambda_min(theta) = ") for line in out)
        assert any(line.startswith("lambda_max(theta) = ") for line in out)

    def test_supercritical_output(self, super_config, capsys):
        assert main(["classify", "--config", super_config]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "supercritical"

    def test_critical_output(self, tmp_path, capsys):
        spec = ModelSpec(
            n=1, a=2.0, b=0.0, m=np.array([0.5]), kappa=np.array([0.5]),
            theta=np.array([[0.0]]), rho=np.eye(2), y0=1.0, x0=np.array([0.0]),
        )
        p = tmp_path / "crit.json"
        p.write_text(spec_to_json(spec), encoding="utf-8")
        assert main(["classify", "--config", str(p)]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "critical"


class TestSimulate:
    def test_writes_csv_and_sidecar(self, sub_config, tmp_path, capsys):
        out = tmp_path / "p.csv"
        rc = main(["simulate", "--config", sub_config, "--T", "1", "--dt", "0.01",
                   "--seed", "7", "--out", str(out)])
        assert rc == 0
        assert f"wrote {out}" in capsys.readouterr().out
        assert out.exists()
        sidecar = tmp_path / "p.csv.meta.json"
        assert sidecar.exists()
        assert out.read_text(encoding="utf-8").splitlines()[0] == "t,Y,X1"
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        assert meta["seed"] == 7
        assert meta["dt"] == 0.01
        assert meta["scheme"] == "EulerFullTruncation"

    def test_repeat_runs_are_byte_identical(self, sub_config, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(["simulate", "--config", sub_config, "--T", "2", "--dt", "0.01",
                         "--seed", "3", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.csv.meta.json").read_bytes() == \
               (tmp_path / "b.csv.meta.json").read_bytes()

    def test_seed_changes_output(self, sub_config, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", "--config", sub_config, "--T", "1", "--dt", "0.01",
              "--seed", "1", "--out", str(a)])
        main(["simulate", "--config", sub_config, "--T", "1", "--dt", "0.01",
              "--seed", "2", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()

    def test_matches_library_simulation(self, sub_config, tmp_path):
        out = tmp_path / "p.csv"
        main(["simulate", "--config", sub_config, "--T", "1", "--dt", "0.01",
              "--seed", "9", "--out", str(out)])
        grid, _ = load_path_csv(out)
        ref = simulate_path(make_sub_spec(),
                            SimConfig(T=1.0, dt=0.01, scheme="EulerFullTruncation", seed=9))
        assert np.array_equal(grid.times, ref.times)
        assert np.array_equal(grid.y, ref.y)
        assert np.array_equal(grid.x, ref.x)

    def test_exact_cir_scheme(self, sub_config, tmp_path):
        out = tmp_path / "p.csv"
        rc = main(["simulate", "--config", sub_config, "--T", "1", "--dt", "0.01",
                   "--seed", "9", "--scheme", "ExactCIR", "--out", str(out)])
        assert rc == 0
        meta = json.loads((tmp_path / "p.csv.meta.json").read_text(encoding="utf-8"))
        assert meta["scheme"] == "ExactCIR"


class TestEstimate:
    def test_pipeline_with_estimated_diffusion(self, sim_csv, capsys):
        assert main(["estimate", "--path", sim_csv, "--estimate-diffusion"]) == 0
        res = json.loads(capsys.readouterr().out)
        assert set(res) == {"T", "condition_number", "info_matrix", "ordering",
                            "rho_used", "tau_hat"}
        assert res["ordering"] == "duffie-ad1n-v1"
        assert res["T"] == 10.0
        assert len(res["tau_hat"]) == 5
        grid, _ = load_path_csv(sim_csv)
        _, rho = estimate_diffusion(grid)
        assert np.allclose(np.array(res["rho_used"]), rho, atol=1e-12)

    def test_rho_file_accepts_dict_and_bare_list(self, sim_csv, rho_file, tmp_path, capsys):
        assert main(["estimate", "--path", sim_csv, "--rho-known", rho_file]) == 0
        first = capsys.readouterr().out
        bare = tmp_path / "bare.json"
        bare.write_text(json.dumps([[1.0, 0.0], [0.0, 1.0]]), encoding="utf-8")
        assert main(["estimate", "--path", sim_csv, "--rho-known", str(bare)]) == 0
        assert capsys.readouterr().out == first

    def test_out_flag_writes_same_payload(self, sim_csv, tmp_path, capsys):
        assert main(["estimate", "--path", sim_csv, "--estimate-diffusion"]) == 0
        stdout_payload = capsys.readouterr().out
        out = tmp_path / "res.json"
        assert main(["estimate", "--path", sim_csv, "--estimate-diffusion",
                     "--out", str(out)]) == 0
        assert f"wrote {out}" in capsys.readouterr().out
        assert out.read_text(encoding="utf-8") == stdout_payload

    def test_missing_rho_file_is_validation_error(self, sim_csv):
        assert main(["estimate", "--path", sim_csv, "--rho-known", "/no/rho.json"]) == 1

    def test_missing_path_is_validation_error(self, rho_file):
        assert main(["estimate", "--path", "/no/path.csv", "--rho-known", rho_file]) == 1


class TestStationaryCf:
    def test_reference_value(self, sub_config, capsys):
        assert main(["stationary-cf", "--config", sub_config, "--lambda", "1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert set(out) == {"im", "lambda", "modulus", "mu", "re", "tol"}
        assert out["lambda"] == 1.0
        assert out["mu"] == [0.0]
        assert out["re"] == pytest.approx(16.0 / 81.0, abs=1e-6)
        assert abs(out["im"]) <= 1e-9
        assert out["modulus"] <= 1.0 + 1e-9

    def test_explicit_mu_matches_library(self, sub_config, capsys):
        assert main(["stationary-cf", "--config", sub_config,
                     "--lambda", "0.7", "--mu", "0.5"]) == 0
        out = json.loads(capsys.readouterr().out)
        want = stationary_cf(make_sub_spec(), FLArgument(0.7, np.array([0.5])))
        assert complex(out["re"], out["im"]) == pytest.approx(want, abs=1e-12)

    def test_repeat_runs_are_byte_identical(self, sub_config, capsys):
        assert main(["stationary-cf", "--config", sub_config, "--lambda", "1.5",
                     "--mu", "-0.25"]) == 0
        first = capsys.readouterr().out
        assert main(["stationary-cf", "--config", sub_config, "--lambda", "1.5",
                     "--mu", "-0.25"]) == 0
        assert capsys.readouterr().out == first

    def test_supercritical_rejected(self, super_config):
        assert main(["stationary-cf", "--config", super_config, "--lambda", "1"]) == 1


class TestErgodicCheck:
    def test_default_functionals_and_limits(self, sub_config, capsys):
        assert main(["ergodic-check", "--config", sub_config, "--T", "50",
                     "--dt", "0.01", "--seed", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["T"] == 50.0
        assert out["dt"] == 0.01
        assert out["seed"] == 3
        assert out["spec_hash"] == "ee2e0f62612d0dc1"
        rows = {r["functional"]: r for r in out["averages"]}
        assert set(rows) == {"y", "inv_y"}
        assert rows["y"]["stationary_limit"] == pytest.approx(2.0)
        assert rows["inv_y"]["stationary_limit"] == pytest.approx(2.0 / 3.0)
        for r in rows.values():
            assert np.isfinite(r["average"])

    def test_custom_functionals_have_no_limit(self, sub_config, capsys):
        assert main(["ergodic-check", "--config", sub_config, "--T", "5",
                     "--dt", "0.01", "--functionals", "y2,x1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert [r["functional"] for r in out["averages"]] == ["y2", "x1"]
        assert all(r["stationary_limit"] is None for r in out["averages"])

    def test_empty_functional_list_rejected(self, sub_config):
        assert main(["ergodic-check", "--config", sub_config, "--T", "5",
                     "--dt", "0.01", "--functionals", ","]) == 1

    def test_unknown_functional_rejected(self, sub_config):
        assert main(["ergodic-check", "--config", sub_config, "--T", "5",
                     "--dt", "0.01", "--functionals", "zeta"]) == 1


class TestLyapunov:
    def test_default_certificate(self, sub_config, capsys):
        assert main(["lyapunov", "--config", sub_config]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out == {
            "c": 1.0, "c1": 7.0, "c2": 1.0, "c3": [[1.0]], "c4": [-5.0],
            "d": 18.5, "r": 2.0, "r_bound": 4.0,
        }

    def test_explicit_constants_pass_through(self, sub_config, capsys):
        assert main(["lyapunov", "--config", sub_config, "--c", "0.5", "--r", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["c"] == 0.5
        assert out["r"] == 3.0

    def test_supercritical_rejected(self, super_config, capsys):
        assert main(["lyapunov", "--config", super_config]) == 1
        assert "validation error" in capsys.readouterr().err


class TestMcStudy:
    ARGS = ["--mode", "Consistency", "--T-grid", "20,40", "--dt", "0.02",
            "--n-paths", "4", "--seed", "11"]

    def test_consistency_smoke(self, sub_config, capsys):
        assert main(["mc-study", "--config", sub_config, *self.ARGS]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert set(rep) == {"T_grid", "checks", "dt", "mode", "n_paths", "passed",
                            "records", "schema", "seed", "spec_hash", "summary",
                            "version"}
        assert rep["schema"] == "adkit-report-v1"
        assert rep["mode"] == "Consistency"
        assert len(rep["records"]) == 8

    def test_repeat_runs_are_byte_identical(self, sub_config, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert main(["mc-study", "--config", sub_config, *self.ARGS,
                         "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_mode_is_usage_error(self, sub_config):
        rc = main(["mc-study", "--config", sub_config, "--mode", "Bogus",
                   "--T-grid", "20", "--dt", "0.02", "--n-paths", "4"])
        assert rc == 64

    def test_wrong_regime_is_validation_error(self, super_config):
        assert main(["mc-study", "--config", super_config, *self.ARGS]) == 1


class TestModuleEntryPoint:
    def test_python_dash_m_runs(self):
        proc = subprocess.run([sys.executable, "-m", "adkit", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("adkit ")

    def test_python_dash_m_classify(self, sub_config):
        proc = subprocess.run([sys.executable, "-m", "adkit", "classify",
                               "--config", sub_config],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0] == "subcritical"
