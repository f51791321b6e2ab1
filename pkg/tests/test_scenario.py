import json

import pytest
from pydantic import ValidationError

from cgorecon.errors import (
    OddGridError,
    RealZError,
    ScenarioError,
    ScheduleOverflowError,
    ShellBoundError,
    SubcriticalTError,
)
from cgorecon.scenario import (
    ECHO_NAME,
    ScanSpec,
    Scenario,
    check_preconditions,
    echo_scenario,
    load_scenario,
    normalized,
)

BASE = {"potential": {"kind": "gaussian", "amplitude": 0.1, "sigma": 1.0}}


def _scenario(**updates) -> Scenario:
    return Scenario.model_validate({**BASE, **updates})


def test_reference_scenario_parses(reference_scenario_path):
    scenario = load_scenario(reference_scenario_path)
    assert scenario.name == "reference"
    assert scenario.grid.points_per_axis == 48
    assert scenario.t_schedule == [2.0, 4.0, 8.0]
    assert scenario.shell_bounds()[0] == pytest.approx(2.0)
    assert scenario.scan.complex_z()[3] == 0.5 + 2j
    for subcommand in ("forward", "cgo", "scan-exceptional", "recover", "uniqueness", "verify"):
        check_preconditions(scenario, subcommand)


def test_echo_is_a_fixed_point(reference_scenario_path, tmp_path):
    scenario = load_scenario(reference_scenario_path)
    path = echo_scenario(scenario, tmp_path)
    assert path.name == ECHO_NAME
    reloaded = load_scenario(path)
    assert normalized(reloaded) == normalized(scenario)
    assert json.loads(path.read_text()) == normalized(scenario)


def test_unknown_key_is_rejected():
    with pytest.raises(ValidationError) as info:
        _scenario(grid={"half_width": 4.0, "points": 16})
    assert "points" in str(info.value)


def test_missing_potential():
    with pytest.raises(ValidationError) as info:
        Scenario.model_validate({"name": "empty"})
    assert "potential" in str(info.value)


@pytest.mark.parametrize("schedule", [[4.0, 2.0], [2.0, 2.0], [-1.0, 2.0], []])
def test_t_schedule_must_increase(schedule):
    with pytest.raises(ValidationError):
        _scenario(t_schedule=schedule)


def test_plane_wave_potential_is_rejected():
    with pytest.raises(ValidationError):
        _scenario(potential={"kind": "plane_wave", "rho_real": [1.0, 0.0, 0.0]})
    with pytest.raises(ValidationError):
        _scenario(
            potential_prime={"kind": "sum", "terms": [BASE["potential"], {"kind": "plane_wave", "rho_real": [1, 0, 0]}]}
        )


def test_bad_suffix(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text("name: x")
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_json_scenario(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({**BASE, "name": "from-json", "energy": 2.0}))
    scenario = load_scenario(path)
    assert scenario.name == "from-json"
    assert scenario.shell_bounds()[0] == pytest.approx(2.0 * 2.0**0.5)


def test_shell_bound_precondition():
    scenario = _scenario(zeta_samples=[[2.0, 0.0, 0.0]])
    with pytest.raises(ShellBoundError):
        check_preconditions(scenario, "recover")
    check_preconditions(scenario, "forward")


def test_subcritical_t_precondition():
    with pytest.raises(SubcriticalTError):
        check_preconditions(_scenario(zeta_samples=[[3.5, 0.0, 0.0]], t_schedule=[1.0, 4.0]), "uniqueness")


@pytest.mark.parametrize("subcommand", ["recover", "uniqueness", "verify"])
def test_schedule_growth_precondition(subcommand):
    scenario = _scenario(grid={"half_width": 4.0, "points_per_axis": 16}, t_schedule=[100.0], zeta_samples=[[3.0, 0.0, 0.0]])
    with pytest.raises(ScheduleOverflowError):
        check_preconditions(scenario, subcommand)
    check_preconditions(scenario, "forward")


def test_schedule_growth_allows_reference_reach():
    check_preconditions(_scenario(grid={"half_width": 8.0, "points_per_axis": 16}, t_schedule=[2.0, 4.0, 8.0]), "recover")
    check_preconditions(_scenario(grid={"half_width": 8.0, "points_per_axis": 16}, t_schedule=[10.0]), "recover")
    with pytest.raises(ScheduleOverflowError):
        check_preconditions(_scenario(grid={"half_width": 8.0, "points_per_axis": 16}, t_schedule=[10.5]), "recover")


@pytest.mark.parametrize("subcommand", ["recover", "uniqueness", "verify"])
def test_shell_scan_subcritical_precondition(subcommand):
    # outer samples sit at |zeta| = 2 + (sqrt(13) - 2) * 3/4, needing t > 1.25
    scenario = _scenario(t_schedule=[1.0], shell={"n_dirs": 4, "n_radii": 3})
    with pytest.raises(SubcriticalTError):
        check_preconditions(scenario, subcommand)
    check_preconditions(_scenario(t_schedule=[1.3], shell={"n_dirs": 4, "n_radii": 3}), subcommand)


def test_odd_grid_precondition():
    with pytest.raises(OddGridError):
        check_preconditions(_scenario(grid={"points_per_axis": 15}), "forward")


def test_real_scan_sample_precondition():
    scenario = _scenario(scan={"z_samples": [[1.0, 0.0]]})
    with pytest.raises(RealZError):
        check_preconditions(scenario, "scan-exceptional")


def test_unknown_subcommand():
    with pytest.raises(ScenarioError):
        check_preconditions(_scenario(), "invert")


def test_scan_accepts_complex_strings():
    spec = ScanSpec(z_samples=["0.5+2j", "[0, 1]", 3j])
    assert spec.complex_z() == [0.5 + 2j, 1j, 3j]


def test_overrides(tmp_path):
    scenario = _scenario(seed=3).with_overrides(tmp_path / "out", workers=2, seed=11)
    assert scenario.output_path() == tmp_path / "out"
    assert scenario.solver.workers == 2
    assert scenario.seed == 11
    with pytest.raises(ValidationError):
        scenario.with_overrides(workers=0)


def test_default_prime_is_zero():
    scenario = _scenario(grid={"half_width": 2.0, "points_per_axis": 8})
    V, V_prime = scenario.potentials()
    assert not V.is_zero
    assert V_prime.is_zero
    config = scenario.experiment_config(workers=3)
    assert config.workers == 3
    assert config.t == 8.0
