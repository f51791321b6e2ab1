"""
Spherical harmonic bookkeeping on the unit sphere: (k, m) ordering, coefficient
vectors and product Gauss-Legendre x trapezoid quadrature.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from .errors import QuadratureOrderError


def harmonic_index(k_max: int) -> list[tuple[int, int]]:
    """(k, m) pairs in lexicographic order, k in [0, k_max], m in [-k, k]."""
    return [(k, m) for k in range(k_max + 1) for m in range(-k, k + 1)]


def harmonic_count(k_max: int) -> int:
    return (k_max + 1) ** 2


def degrees(k_max: int) -> np.ndarray:
    return np.array([k for k, _ in harmonic_index(k_max)])


def to_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar and azimuth angles of (..., 3) points; the origin maps to the north pole."""
    points = np.asarray(points, dtype=float)
    radius = np.linalg.norm(points, axis=-1)
    safe = np.where(radius > 0, radius, 1.0)
    polar = np.arccos(np.clip(points[..., 2] / safe, -1.0, 1.0))
    azimuth = np.arctan2(points[..., 1], points[..., 0])
    return polar, azimuth


def sph_matrix(k_max: int, polar: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
    """Y_km at the given angles, shape ((k_max+1)^2, *angles.shape)."""
    polar = np.asarray(polar)
    out = np.empty((harmonic_count(k_max), *polar.shape), dtype=complex)
    for i, (k, m) in enumerate(harmonic_index(k_max)):
        out[i] = special.sph_harm_y(k, m, polar, azimuth)
    return out


def conjugation_map(k_max: int) -> np.ndarray:
    """Real matrix P with coeffs(conj g) = P conj(coeffs(g)): a_km -> (-1)^m a_k,-m."""
    index = {km: i for i, km in enumerate(harmonic_index(k_max))}
    P = np.zeros((len(index), len(index)))
    for (k, m), i in index.items():
        P[i, index[(k, -m)]] = (-1.0) ** m
    return P


@dataclass(frozen=True, eq=False)
class SphericalHarmonicCoeffs:
    energy: float
    k_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.size != harmonic_count(self.k_max):
            raise ValueError(f"Expected {harmonic_count(self.k_max)} coefficients for k_max={self.k_max}, got {coeffs.size}.")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("Harmonic coefficients must be finite.")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def unit(cls, energy: float, k_max: int, k: int, m: int) -> "SphericalHarmonicCoeffs":
        coeffs = np.zeros(harmonic_count(k_max), dtype=complex)
        coeffs[harmonic_index(k_max).index((k, m))] = 1.0
        return cls(energy, k_max, coeffs)

    @classmethod
    def zeros(cls, energy: float, k_max: int) -> "SphericalHarmonicCoeffs":
        return cls(energy, k_max, np.zeros(harmonic_count(k_max), dtype=complex))

    def like(self, coeffs: np.ndarray) -> "SphericalHarmonicCoeffs":
        return SphericalHarmonicCoeffs(self.energy, self.k_max, coeffs)

    def conjugate(self) -> "SphericalHarmonicCoeffs":
        """Coefficients of the pointwise conjugate function."""
        return self.like(conjugation_map(self.k_max) @ np.conj(self.coeffs))

    def inner(self, other: "SphericalHarmonicCoeffs") -> complex:
        """<f, g> = int f conj(g) over the sphere."""
        n = min(self.coeffs.size, other.coeffs.size)
        return complex(np.sum(self.coeffs[:n] * np.conj(other.coeffs[:n])))

    def resized(self, k_max: int) -> "SphericalHarmonicCoeffs":
        """Truncated or zero-padded to another maximum degree."""
        coeffs = np.zeros(harmonic_count(k_max), dtype=complex)
        n = min(coeffs.size, self.coeffs.size)
        coeffs[:n] = self.coeffs[:n]
        return SphericalHarmonicCoeffs(self.energy, k_max, coeffs)

    def evaluate(self, directions: np.ndarray) -> np.ndarray:
        polar, azimuth = to_angles(directions)
        return np.tensordot(self.coeffs, sph_matrix(self.k_max, polar, azimuth), axes=1)


@dataclass(frozen=True)
class SphereQuadrature:
    """
    Gauss-Legendre in cos(polar) x uniform trapezoid in azimuth; exact for
    polynomials of degree <= order on the sphere.
    """

    order: int

    @classmethod
    def for_degree(cls, k_max: int, order: int | None = None) -> "SphereQuadrature":
        minimum = 2 * k_max + 2
        order = minimum if order is None else int(order)
        if order < minimum:
            raise QuadratureOrderError(f"Quadrature order {order} is below 2*k_max+2 = {minimum}.")
        return cls(order)

    @cached_property
    def _nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.order // 2
        x, weights = np.polynomial.legendre.leggauss(n + 1)
        azimuth = np.linspace(0.0, 2.0 * np.pi, 2 * n + 2, endpoint=False)
        polar = np.repeat(np.arccos(x), azimuth.size)
        azimuth = np.tile(azimuth, x.size)
        weights = np.repeat(weights, 2 * n + 2) * np.pi / (n + 1)  # sum == 4 pi
        return polar, azimuth, weights

    @property
    def polar(self) -> np.ndarray:
        return self._nodes[0]

    @property
    def azimuth(self) -> np.ndarray:
        return self._nodes[1]

    @property
    def weights(self) -> np.ndarray:
        return self._nodes[2]

    @property
    def directions(self) -> np.ndarray:
        polar, azimuth, _ = self._nodes
        return np.column_stack((np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar)))

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))

    def project(self, values: np.ndarray, k_max: int, energy: float) -> SphericalHarmonicCoeffs:
        """a_km = int values conj(Y_km), exact for band-limited values."""
        Y = sph_matrix(k_max, self.polar, self.azimuth)
        return SphericalHarmonicCoeffs(energy, k_max, np.conj(Y) @ (self.weights * values))
