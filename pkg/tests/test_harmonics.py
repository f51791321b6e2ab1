import numpy as np
import pytest

from cgorecon.errors import QuadratureOrderError
from cgorecon.harmonics import (
    SphereQuadrature,
    SphericalHarmonicCoeffs,
    degrees,
    harmonic_count,
    harmonic_index,
    sph_matrix,
    to_angles,
)


def test_index_order():
    assert harmonic_index(1) == [(0, 0), (1, -1), (1, 0), (1, 1)]
    assert harmonic_count(3) == 16
    assert degrees(2).tolist() == [0, 1, 1, 1, 2, 2, 2, 2, 2]


def test_quadrature_weights_sum_to_sphere_area():
    quadrature = SphereQuadrature.for_degree(2)
    assert quadrature.integrate(np.ones_like(quadrature.weights)) == pytest.approx(4 * np.pi)
    np.testing.assert_allclose(np.linalg.norm(quadrature.directions, axis=-1), 1.0)


def test_harmonics_are_orthonormal():
    quadrature = SphereQuadrature.for_degree(3)
    Y = sph_matrix(3, quadrature.polar, quadrature.azimuth)
    gram = (Y * quadrature.weights) @ np.conj(Y).T
    np.testing.assert_allclose(gram, np.eye(16), atol=1e-12)


def test_project_recovers_coefficients(rng):
    coeffs = SphericalHarmonicCoeffs(1.0, 2, rng.standard_normal(9) + 1j * rng.standard_normal(9))
    quadrature = SphereQuadrature.for_degree(2)
    projected = quadrature.project(coeffs.evaluate(quadrature.directions), 2, 1.0)
    np.testing.assert_allclose(projected.coeffs, coeffs.coeffs, atol=1e-12)


def test_conjugate_matches_pointwise_conjugation(rng):
    coeffs = SphericalHarmonicCoeffs(1.0, 3, rng.standard_normal(16) + 1j * rng.standard_normal(16))
    quadrature = SphereQuadrature.for_degree(3)
    projected = quadrature.project(np.conj(coeffs.evaluate(quadrature.directions)), 3, 1.0)
    np.testing.assert_allclose(coeffs.conjugate().coeffs, projected.coeffs, atol=1e-12)


def test_quadrature_order_floor():
    with pytest.raises(QuadratureOrderError):
        SphereQuadrature.for_degree(3, order=6)
    assert SphereQuadrature.for_degree(3).order == 8


def test_coefficient_validation():
    with pytest.raises(ValueError):
        SphericalHarmonicCoeffs(1.0, 1, np.zeros(3))
    with pytest.raises(ValueError):
        SphericalHarmonicCoeffs(1.0, 0, [np.nan])


def test_unit_inner_and_resize():
    a = SphericalHarmonicCoeffs.unit(1.0, 2, 1, -1)
    assert a.coeffs[1] == 1.0
    assert a.inner(a) == 1.0
    assert a.inner(SphericalHarmonicCoeffs.unit(1.0, 2, 1, 1)) == 0.0
    assert a.resized(1).coeffs.tolist() == [0, 1, 0, 0]
    assert a.resized(3).coeffs.size == 16
    assert SphericalHarmonicCoeffs.unit(1.0, 2, 2, 0).resized(1).inner(SphericalHarmonicCoeffs.zeros(1.0, 1)) == 0


def test_angles():
    polar, azimuth = to_angles(np.array([[0.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -1.0]]))
    np.testing.assert_allclose(polar, [0.0, np.pi / 2, np.pi])
    assert azimuth[1] == pytest.approx(np.pi / 2)
