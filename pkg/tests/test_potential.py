import numpy as np
import pytest

from cgorecon.descriptors import GaussianDescriptor, PlaneWaveDescriptor
from cgorecon.fields import ComplexField, make_grid
from cgorecon.potential import Potential
from cgorecon.utils import frame_for_direction


def test_rejects_complex_samples(small_grid):
    samples = np.full(small_grid.shape, 1j)
    with pytest.raises(ValueError):
        Potential(ComplexField(small_grid, samples), 3.0)


def test_rejects_plane_wave_descriptor(small_grid):
    with pytest.raises(ValueError):
        Potential.from_descriptor(PlaneWaveDescriptor(rho_real=(1.0, 0.0, 0.0)), small_grid, 3.0)


def test_rejects_non_positive_decay(small_grid, gaussian):
    with pytest.raises(ValueError):
        Potential.from_descriptor(gaussian, small_grid, 0.0)


def test_fourier_matches_closed_form(gaussian):
    V = Potential.from_descriptor(gaussian, make_grid(8.0, 32), 3.0)
    for zeta in ([0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [1.0, -1.0, 0.5]):
        assert V.fourier(np.array(zeta)) == pytest.approx(gaussian.fourier(np.array(zeta)), abs=1e-10)


def test_resample_to_rotated_frame(small_potential):
    grid = small_potential.grid.with_frame(frame_for_direction([1.0, 1.0, 0.0]))
    rotated = small_potential.resample(grid)
    assert rotated.grid == grid
    assert np.max(rotated.values) == pytest.approx(np.max(small_potential.values))
    assert small_potential.resample(small_potential.grid) is small_potential


def test_zero_potential(small_grid):
    zero = Potential.zero(small_grid, 3.0)
    assert zero.is_zero
    assert zero.resample(make_grid(2.0, 8)).is_zero


def test_scaled_keeps_descriptor(small_potential):
    half = small_potential.scaled(0.5)
    assert half.descriptor.amplitude == pytest.approx(0.05)
    np.testing.assert_allclose(half.values, 0.5 * small_potential.values)


def test_decay_bound_is_finite(small_potential):
    # sup of 0.1 exp(-r^2/2 + 3r) sits at r = 3
    assert small_potential.decay_bound() <= 0.1 * np.exp(4.5) + 1e-12
    assert small_potential.decay_bound() > 0.0


def test_difference(small_potential):
    other = Potential.from_descriptor(GaussianDescriptor(amplitude=0.05, sigma=1.0), small_potential.grid, 3.0)
    np.testing.assert_allclose(small_potential.difference(other).samples.real, 0.5 * small_potential.values)
