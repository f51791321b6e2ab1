import numpy as np
import pytest

from cgorecon.cgo import (
    CGOSolution,
    amplitude_sweep,
    default_weight_gamma,
    exceptional_indicator,
    exceptional_scan,
    inner_mask,
    solve_cgo,
)
from cgorecon.descriptors import GaussianDescriptor
from cgorecon.errors import NonConvergenceError, OverflowGuardError, RealZError
from cgorecon.faddeev import ComplexMomentum, apply_G0, dense_green
from cgorecon.fields import ComplexField, WeightedNormSpec, make_grid, weighted_norm
from cgorecon.potential import Potential


def _momentum(grid, t, energy=1.0):
    # rho.rho = -t^2 + (energy + t^2) = energy
    return ComplexMomentum.on_grid(grid, 1j * t, (np.sqrt(energy + t * t), 0.0), energy=energy)


def test_residual_meets_tolerance(small_potential):
    solution = solve_cgo(small_potential, _momentum(small_potential.grid, 2.0), tol=1e-8)
    assert solution.residual <= 1e-8
    assert solution.iterations > 0
    assert np.isnan(solution.indicator)


def test_solution_satisfies_integral_equation(small_potential):
    rho = _momentum(small_potential.grid, 2.0)
    solution = solve_cgo(small_potential, rho, tol=1e-10)
    V = small_potential.field
    lhs = solution.v + apply_G0(rho, V * solution.v)
    rhs = apply_G0(rho, V) * -1.0
    assert np.linalg.norm((lhs - rhs).samples) <= 1e-8 * np.linalg.norm(rhs.samples)


def test_correction_decays_with_t(small_potential):
    spec = WeightedNormSpec(default_weight_gamma(small_potential.gamma0))
    norms = [
        weighted_norm(solve_cgo(small_potential, _momentum(small_potential.grid, t)).v, spec) for t in (2.0, 8.0)
    ]
    assert norms[1] < norms[0]


def test_zero_potential_gives_zero_correction(small_grid):
    solution = solve_cgo(Potential.zero(small_grid, 3.0), _momentum(small_grid, 2.0))
    assert solution.iterations == 0
    assert not np.any(solution.v.samples)


def test_rejects_real_z(small_potential):
    with pytest.raises(RealZError):
        solve_cgo(small_potential, ComplexMomentum.on_grid(small_potential.grid, 1.0))


def test_iteration_cap_raises(small_potential):
    with pytest.raises(NonConvergenceError) as info:
        solve_cgo(small_potential, _momentum(small_potential.grid, 0.5), tol=1e-30, max_iter=1)
    assert info.value.iterations >= 1


def test_overflow_guard(small_grid):
    def solution(t):
        rho = ComplexMomentum.on_grid(small_grid, 1j * t)
        return CGOSolution(rho, ComplexField.zeros(small_grid), 0.0, 0)

    with pytest.raises(OverflowGuardError):
        solution(15.0).eigenfunction("box")
    inner = solution(15.0).eigenfunction("inner")
    assert not np.any(inner.samples[~inner_mask(small_grid)])
    with pytest.raises(OverflowGuardError):
        solution(25.0).eigenfunction("inner")


def test_eigenfunction_of_free_solution(small_grid):
    rho = ComplexMomentum.on_grid(small_grid, 0.5j, (1.0, 0.0))
    u = CGOSolution(rho, ComplexField.zeros(small_grid), 0.0, 0).eigenfunction()
    np.testing.assert_allclose(u.samples, small_grid.plane_phase(rho.rho))


def test_inner_mask_counts():
    assert inner_mask(make_grid(4.0, 16)).sum() == 9**3


def test_indicator_near_one_for_weak_potential(small_grid):
    weak = Potential.from_descriptor(GaussianDescriptor(amplitude=0.01, sigma=1.0), small_grid, 3.0)
    value = exceptional_indicator(weak, ComplexMomentum.on_grid(small_grid, 1j, (0.5, 0.0)), probes=1, seed=2)
    assert 0.9 <= value <= 1.1


def test_indicator_edge_cases(small_grid, small_potential):
    assert exceptional_indicator(Potential.zero(small_grid, 3.0), ComplexMomentum.on_grid(small_grid, 1j)) == 1.0
    with pytest.raises(RealZError):
        exceptional_indicator(small_potential, ComplexMomentum.on_grid(small_grid, 2.0))


def test_default_weight_gamma():
    assert default_weight_gamma(3.0) == 0.25
    assert default_weight_gamma(0.4) == pytest.approx(0.1)


def test_scan_frame_and_worker_determinism(small_potential):
    z = [0.5j, 1.0 + 2j]
    perp = [(0.0, 0.0), (0.5, 0.0)]
    serial = exceptional_scan(small_potential, z, perp, probes=1, seed=9, workers=1)
    threaded = exceptional_scan(small_potential, z, perp, probes=1, seed=9, workers=2)
    assert np.array_equal(serial.indicators, threaded.indicators)
    frame = serial.frame()
    assert list(frame.columns) == ["re_z", "im_z", "rho_perp_1", "rho_perp_2", "indicator", "flagged"]
    assert len(frame) == 4
    assert frame["im_z"].tolist() == [0.5, 0.5, 2.0, 2.0]
    assert not frame["flagged"].any()


def test_scan_rejects_real_samples(small_potential):
    with pytest.raises(RealZError):
        exceptional_scan(small_potential, [1j, 2.0], [(0.0, 0.0)])


def test_amplitude_sweep(small_potential):
    rho = ComplexMomentum.on_grid(small_potential.grid, 1j, (0.5, 0.0))
    sweep = amplitude_sweep(small_potential, rho, [0.0, 1.0, 4.0], probes=1, seed=4, workers=1)
    assert [factor for factor, _ in sweep] == [0.0, 1.0, 4.0]
    assert sweep[0][1] == 1.0
    assert all(value > 0 for _, value in sweep)


@pytest.mark.parametrize("z", [0.5j, -2j, 1.0 + 1.5j])
@pytest.mark.parametrize(
    "descriptor",
    [
        GaussianDescriptor(amplitude=0.1, sigma=0.5),
        GaussianDescriptor(amplitude=-0.2, sigma=0.4, center=(0.3, -0.2, 0.1)),
    ],
)
def test_cgo_matches_dense_solve(z, descriptor):
    grid = make_grid(2.0, 8)
    V = Potential.from_descriptor(descriptor, grid, 1.0)
    rho = ComplexMomentum.on_grid(grid, z, (0.7, 0.2))
    G = dense_green(grid, rho)
    potential = V.values.ravel()
    expected = np.linalg.solve(np.eye(G.shape[0]) + G * potential[None, :], -G @ potential)
    v = solve_cgo(V, rho, tol=1e-10).v.vector()
    assert np.linalg.norm(v - expected) <= 1e-8 * np.linalg.norm(expected)
