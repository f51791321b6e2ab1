import json

import numpy as np
import pandas as pd
import pytest

from cgorecon.errors import NonConvergenceError
from cgorecon.field_io import read_field_file
from cgorecon.main import main


def _args(command, scenario, out, *extra):
    return [command, "--scenario", str(scenario), "--out", str(out), *extra]


def test_verify_subset_passes(small_scenario_path, tmp_path):
    status = main(_args("verify", small_scenario_path, tmp_path, "--check", "multiplier", "--check", "norm_decay"))
    assert status == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert [c["name"] for c in report["checks"]] == ["multiplier_identity", "norm_decay"]
    assert (tmp_path / "scenario.json").exists()


def test_unknown_check_is_a_usage_error(small_scenario_path, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(_args("verify", small_scenario_path, tmp_path, "--check", "everything"))
    assert info.value.code == 2


def test_missing_potential_exits_2(tmp_path, caplog):
    path = tmp_path / "broken.toml"
    path.write_text('name = "broken"\n')
    assert main(_args("forward", path, tmp_path / "out")) == 2
    assert "potential" in caplog.text


def test_zeta_on_inner_sphere_exits_2(small_scenario_path, tmp_path):
    text = small_scenario_path.read_text().replace("[[3.0, 0.0, 0.0]]", "[[2.0, 0.0, 0.0]]")
    path = tmp_path / "inner.toml"
    path.write_text(text)
    assert main(_args("recover", path, tmp_path / "out")) == 2
    assert not (tmp_path / "out" / "shell.csv").exists()



def test_subcritical_shell_scan_exits_2(small_scenario_path, tmp_path):
    text = (
        small_scenario_path.read_text()
        .replace("zeta_samples = [[3.0, 0.0, 0.0]]\n", "")
        .replace("t_schedule = [4.0, 8.0]", "t_schedule = [1.0]")
        .replace("[shell]\nn_dirs = 2", "[shell]\nn_dirs = 2\nn_radii = 3")
    )
    path = tmp_path / "subcritical.toml"
    path.write_text(text)
    assert main(_args("recover", path, tmp_path / "out")) == 2
    assert not (tmp_path / "out" / "shell.csv").exists()


def test_overflowing_schedule_exits_2(small_scenario_path, tmp_path, caplog):
    path = tmp_path / "overflow.toml"
    path.write_text(small_scenario_path.read_text().replace("t_schedule = [4.0, 8.0]", "t_schedule = [100.0]"))
    assert main(_args("recover", path, tmp_path / "out")) == 2
    assert "overflow guard" in caplog.text


def test_forward_writes_smatrix(small_scenario_path, tmp_path):
    assert main(_args("forward", small_scenario_path, tmp_path)) == 0
    frame = pd.read_csv(tmp_path / "smatrix.csv")
    assert len(frame) == 16
    assert (tmp_path / "smatrix.cgos").exists()
    assert not (tmp_path / "smatrix_prime.cgos").exists()


def test_scan_writes_indicators(small_scenario_path, tmp_path):
    assert main(_args("scan-exceptional", small_scenario_path, tmp_path, "--workers", "1")) == 0
    frame = pd.read_csv(tmp_path / "exceptional_scan.csv")
    assert frame["im_z"].tolist() == [1.0, 2.0]
    assert not frame["flagged"].any()


def test_cgo_writes_fields(small_scenario_path, tmp_path):
    assert main(_args("cgo", small_scenario_path, tmp_path)) == 0
    table = pd.read_csv(tmp_path / "cgo.csv")
    assert table["t"].tolist() == [4.0, 8.0]
    assert (table["residual"] <= 1e-8).all()
    field, meta = read_field_file(tmp_path / "cgo_1.cgof")
    assert field.grid.points_per_axis == 16
    assert meta["t"] == 8.0
    assert len(pd.read_csv(tmp_path / "norm_sweep.csv")) == 2


def test_non_convergence_exits_3(small_scenario_path, tmp_path, monkeypatch, caplog):
    def stalled(*args, **kwargs):
        raise NonConvergenceError("stalled", iterations=600, residual=1e-3, t=4.0)

    monkeypatch.setattr("cgorecon.main.solve_cgo", stalled)
    assert main(_args("cgo", small_scenario_path, tmp_path)) == 3
    assert "iterations 600" in caplog.text


def test_linear_algebra_failure_exits_3(small_scenario_path, tmp_path, monkeypatch, caplog):
    def singular(*args, **kwargs):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr("cgorecon.main.scattering_matrix", singular)
    assert main(_args("forward", small_scenario_path, tmp_path)) == 3
    assert "Numerical failure (LinAlgError)" in caplog.text
    assert "Configuration error" not in caplog.text
