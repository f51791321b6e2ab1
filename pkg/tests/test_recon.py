import numpy as np
import pytest

from cgorecon.descriptors import GaussianDescriptor
from cgorecon.errors import (
    EmptySweepError,
    FrameError,
    RegularizationError,
    ScheduleOverflowError,
    ShellBoundError,
    SubcriticalTError,
)
from cgorecon.fields import ComplexField, make_grid
from cgorecon.potential import Potential
from cgorecon.recon import (
    ExperimentConfig,
    ShellPoint,
    ShellRecovery,
    completion_widths,
    lowfreq_complete,
    pairing_integral,
    recover_fourier,
    rho_param,
    shell_bounds,
    shell_points,
    shell_scan,
    translation_phase_error,
    uniqueness_experiment,
)

NU = np.array([1.0, 0.0, 0.0])
MU = np.array([0.0, 1.0, 0.0])
GAUSSIAN_AT_ZERO = 0.1 * (2 * np.pi) ** 1.5


def test_rho_param_sums_and_energy():
    zeta = np.array([0.0, 0.0, 3.0])
    rho, rho_prime = rho_param(zeta, 1.0, 4.0, NU, MU)
    np.testing.assert_allclose(rho.rho + rho_prime.rho, zeta, atol=1e-14)
    assert rho.dot_self() == pytest.approx(1.0)
    assert rho_prime.dot_self() == pytest.approx(1.0)
    assert rho.z == 4j
    assert rho_prime.z == -4j


def test_rho_param_preconditions():
    with pytest.raises(FrameError):
        rho_param(np.array([1.0, 0.0, 3.0]), 1.0, 4.0, NU, MU)
    with pytest.raises(FrameError):
        rho_param(np.array([0.0, 0.0, 3.0]), 1.0, 4.0, NU, np.array([0.0, 2.0, 0.0]))
    with pytest.raises(SubcriticalTError):
        rho_param(np.array([0.0, 0.0, 5.0]), 1.0, 2.0, NU, MU)


def test_shell_bounds_and_points():
    assert shell_bounds(1.0, 3.0) == pytest.approx((2.0, np.sqrt(13.0)))
    points = shell_points(1.0, 3.0, 5, 2)
    radii = np.linalg.norm(points, axis=-1)
    assert len(points) == 10
    assert np.all((radii > 2.0) & (radii < np.sqrt(13.0)))


def test_pairing_without_corrections_is_grid_transform(small_potential):
    zero = ComplexField.zeros(small_potential.grid)
    zeta = np.array([1.0, -0.5, 0.5])
    sample = pairing_integral(small_potential.field, zero, zero, zeta, t=3.0)
    assert sample.value == pytest.approx(small_potential.fourier(zeta), rel=1e-12)
    assert sample.t == 3.0
    assert 0.0 <= sample.quadrature_error < 1e-3 * abs(sample.value)


def test_pairing_error_needs_a_coarse_grid():
    grid = make_grid(2.0, 8)
    zero = ComplexField.zeros(grid)
    assert np.isnan(pairing_integral(zero, zero, zero, np.zeros(3)).quadrature_error)


def test_recover_rejects_inner_zeta(small_potential):
    zero = Potential.zero(small_potential.grid, 3.0)
    with pytest.raises(ShellBoundError):
        recover_fourier(small_potential, zero, 1.0, np.array([2.0, 0.0, 0.0]), [4.0])
    with pytest.raises(ValueError):
        recover_fourier(small_potential, zero, 1.0, np.array([3.0, 0.0, 0.0]), [4.0, 2.0])


def test_recover_rejects_overflowing_schedule(small_potential):
    zero = Potential.zero(small_potential.grid, 3.0)
    with pytest.raises(ScheduleOverflowError):
        recover_fourier(small_potential, zero, 1.0, np.array([3.0, 0.0, 0.0]), [4.0, 30.0])


def test_shell_scan_checks_t_before_solving(small_potential, monkeypatch):
    def unreachable(*args, **kwargs):
        raise AssertionError("no CGO solve expected")

    monkeypatch.setattr("cgorecon.recon.solve_cgo", unreachable)
    zero = Potential.zero(small_potential.grid, 3.0)
    with pytest.raises(SubcriticalTError):
        shell_scan(small_potential, zero, 1.0, 4, 3, 1.0, gamma0=3.0, workers=1)
    with pytest.raises(ScheduleOverflowError):
        shell_scan(small_potential, zero, 1.0, 4, 1, 25.0, gamma0=3.0, workers=1)
    with pytest.raises(EmptySweepError):
        shell_scan(small_potential, zero, 1.0, 0, 1, 4.0, gamma0=3.0, workers=1)


def test_identical_potentials_pair_to_zero(small_potential):
    result = recover_fourier(small_potential, small_potential, 1.0, np.array([3.0, 0.0, 0.0]), [2.0, 4.0])
    assert result.t_values == [2.0, 4.0]
    assert result.estimate == 0
    assert list(result.table().columns) == ["t", "re", "im", "abs_diff_to_final", "quadrature_error"]


def test_recovery_table_tracks_schedule(small_potential):
    zero = Potential.zero(small_potential.grid, 3.0)
    result = recover_fourier(small_potential, zero, 1.0, np.array([0.0, 3.0, 0.0]), [4.0, 8.0])
    table = result.table()
    assert table["t"].tolist() == [4.0, 8.0]
    assert table["abs_diff_to_final"].iloc[-1] == 0.0
    assert abs(result.estimate) > 0


def test_antipodal_pairs_are_conjugate():
    grid = make_grid(6.0, 24)
    V = Potential.from_descriptor(GaussianDescriptor(amplitude=0.1, sigma=1.0, center=(0.3, 0.0, 0.0)), grid, 3.0)
    shell = shell_scan(V, Potential.zero(grid, 3.0), 1.0, 2, 1, 4.0, gamma0=3.0, antipodal=True, workers=1)
    assert len(shell.points) == 4
    assert all(p.ok for p in shell.points)
    np.testing.assert_allclose(shell.points[1].zeta, -np.asarray(shell.points[0].zeta))
    assert shell.symmetry_defect() <= 1e-6


def test_angular_spread_of_radial_profile():
    gaussian = GaussianDescriptor(amplitude=0.1, sigma=1.0)
    assert _shell_of(lambda z: complex(gaussian.fourier(z))).angular_spread() <= 1e-12
    tilted = _shell_of(lambda z: complex(gaussian.fourier(z)) * (1.0 + 0.2 * z[0] / np.linalg.norm(z)))
    assert tilted.angular_spread() > 0.02


def test_radial_potential_recovers_isotropically():
    grid = make_grid(6.0, 24)
    V = Potential.from_descriptor(GaussianDescriptor(amplitude=0.1, sigma=1.0), grid, 3.0)
    shell = shell_scan(V, Potential.zero(grid, 3.0), 1.0, 4, 1, 4.0, gamma0=3.0, workers=1)
    assert all(p.ok for p in shell.points)
    assert shell.angular_spread() <= 0.02


def _shell_of(values_at, bounds=(2.0, np.sqrt(13.0))):
    zetas = shell_points(1.0, 3.0, 12, 3)
    return ShellRecovery([ShellPoint(tuple(z.tolist()), values_at(z), 8.0, 0.0) for z in zetas], bounds)


def test_completion_widths_contain_unit_width():
    widths = completion_widths(8)
    assert 1.0 in widths.tolist()
    assert widths[0] == pytest.approx(1 / 16)


def test_completion_of_exact_gaussian():
    gaussian = GaussianDescriptor(amplitude=0.1, sigma=1.0)
    completion = lowfreq_complete(_shell_of(lambda z: complex(gaussian.fourier(z))), 3.0)
    assert completion.value_at(np.zeros(3)) == pytest.approx(GAUSSIAN_AT_ZERO, rel=1e-6)
    assert completion.fit_residual <= 1e-6
    frame = completion.frame()
    assert list(frame.columns) == ["zeta_abs", "re", "im"]
    assert frame["zeta_abs"].iloc[-1] == pytest.approx(2.0)


def test_completion_with_noise():
    gaussian = GaussianDescriptor(amplitude=0.1, sigma=1.0)
    rng = np.random.default_rng(5)

    def noisy(z):
        return complex(gaussian.fourier(z)) * (1.0 + 0.01 * rng.standard_normal())

    completion = lowfreq_complete(_shell_of(noisy), 3.0)
    assert completion.value_at(np.zeros(3)) == pytest.approx(GAUSSIAN_AT_ZERO, rel=0.1)


def test_angular_completion_frame():
    gaussian = GaussianDescriptor(amplitude=0.1, sigma=1.0)
    completion = lowfreq_complete(_shell_of(lambda z: complex(gaussian.fourier(z))), 3.0, angular_degree=1)
    assert list(completion.frame().columns) == ["zeta1", "zeta2", "zeta3", "zeta_abs", "re", "im"]


def test_completion_preconditions():
    shell = _shell_of(lambda z: 1.0 + 0j)
    with pytest.raises(RegularizationError):
        lowfreq_complete(shell, 3.0, reg_weight=0.0)
    failed = ShellRecovery([ShellPoint((3.0, 0.0, 0.0), complex("nan"), 8.0, float("nan"), "stalled")], (2.0, 3.6))
    with pytest.raises(EmptySweepError):
        lowfreq_complete(failed, 3.0)
    assert failed.frame().empty


def test_uniqueness_of_identical_potentials(small_potential):
    config = ExperimentConfig(k_max=1, n_dirs=2, t=4.0, gamma0=3.0, workers=1)
    report = uniqueness_experiment(small_potential, small_potential, 1.0, config)
    assert report.s_equal
    assert report.pairing_equal
    assert report.shell_equal
    assert report.consistent
    assert report.shell_failures == 0
    assert len(report.shell) == 2


@pytest.mark.slow
def test_recovers_gaussian_transform(gaussian):
    grid = make_grid(8.0, 32)
    V = Potential.from_descriptor(gaussian, grid, 3.0)
    zeta = np.array([3.0, 0.0, 0.0])
    result = recover_fourier(V, Potential.zero(grid, 3.0), 1.0, zeta, [2.0, 4.0, 8.0])
    exact = gaussian.fourier(zeta)
    assert abs(result.estimate - exact) <= 0.1 * abs(exact)


def test_translation_keeps_transform_modulus(gaussian):
    grid = make_grid(8.0, 32)
    V = Potential.from_descriptor(gaussian, grid, 3.0)
    moved = V.translated((0.5, 0.0, 0.0))
    zeta = np.array([3.0, 0.0, 0.0])
    assert abs(moved.fourier(zeta)) == pytest.approx(abs(V.fourier(zeta)), rel=1e-8)
    assert moved.fourier(zeta) == pytest.approx(V.fourier(zeta) * np.exp(1.5j), rel=1e-8)
    with pytest.raises(ValueError):
        Potential.zero(grid, 3.0).translated((0.5, 0.0, 0.0))


@pytest.mark.slow
def test_translated_potential_phase_on_shell(gaussian):
    grid = make_grid(8.0, 32)
    V = Potential.from_descriptor(gaussian, grid, 3.0)
    shift = (0.5, 0.0, 0.0)
    config = ExperimentConfig(k_max=1, n_dirs=4, t=8.0, gamma0=3.0, workers=1)
    report = uniqueness_experiment(V, V.translated(shift), 1.0, config)
    assert not report.s_equal
    assert report.shell_failures == 0
    assert translation_phase_error(report, V, shift) <= 0.05
