"""
Periodic sampling grids, fixed-convention discrete Fourier transforms,
weighted norms and field sampling.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np

from .config import MIN_POINTS_PER_AXIS, ORTHONORMAL_TOL
from .descriptors import DESCRIPTOR_TYPES
from .errors import FrameError, GridMismatchError, OddGridError, UnknownDescriptorError
from .utils import pairwise_sum

Domain = Literal["position", "shifted_dual", "standard_dual"]


@dataclass(frozen=True)
class Grid:
    """
    Box [-L, L)^3 sampled at N nodes per axis. Axis 0 runs along frame[0] (nu),
    axis 1 along frame[1] (mu), axis 2 along frame[2] (e3).
    """

    half_width: float
    points_per_axis: int
    frame: tuple[tuple[float, float, float], ...] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def dual_spacing(self) -> float:
        return np.pi / self.half_width

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.points_per_axis
        return (n, n, n)

    @cached_property
    def basis(self) -> np.ndarray:
        basis = np.array(self.frame, dtype=float)
        basis.flags.writeable = False
        return basis

    @property
    def nu(self) -> np.ndarray:
        return self.basis[0]

    def axis_nodes(self) -> np.ndarray:
        """Node coordinates -L + j*h along any axis."""
        return -self.half_width + np.arange(self.points_per_axis) * self.spacing

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Frame coordinates as three broadcastable arrays of shapes (N,1,1), (1,N,1), (1,1,N)."""
        a = self.axis_nodes()
        return a[:, None, None], a[None, :, None], a[None, None, :]

    def dual_axes(self, shifted: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Centered dual lattice; axis 0 carries the half shift when `shifted`."""
        k = np.arange(-self.points_per_axis // 2, self.points_per_axis // 2, dtype=float)
        xi_par = self.dual_spacing * (k + 0.5) if shifted else self.dual_spacing * k
        xi = self.dual_spacing * k
        return xi_par[:, None, None], xi[None, :, None], xi[None, None, :]

    def node_coordinates(self) -> np.ndarray:
        """Frame coordinates, shape (N, N, N, 3)."""
        a0, a1, a2 = np.broadcast_arrays(*self.axes())
        return np.stack([a0, a1, a2], axis=-1)

    def physical_coordinates(self) -> np.ndarray:
        """Nodes rotated into R^3: w = a0*nu + a1*mu + a2*e3, shape (N, N, N, 3)."""
        return self.node_coordinates() @ self.basis

    def node(self, i: int, j: int, k: int) -> np.ndarray:
        a = self.axis_nodes()
        return np.array([a[i], a[j], a[k]]) @ self.basis

    def radius(self) -> np.ndarray:
        a0, a1, a2 = self.axes()
        return np.sqrt(a0**2 + a1**2 + a2**2)

    def bracket(self) -> np.ndarray:
        """<w> = (1 + |w|^2)^(1/2) at every node."""
        a0, a1, a2 = self.axes()
        return np.sqrt(1.0 + a0**2 + a1**2 + a2**2)

    def plane_phase(self, vector: np.ndarray) -> np.ndarray:
        """exp(i vector.w) at every node for a (possibly complex) physical 3-vector."""
        v = self.basis @ np.asarray(vector)
        a0, a1, a2 = self.axes()
        return np.exp(1j * (v[0] * a0 + v[1] * a1 + v[2] * a2))

    def to_frame(self, vector: np.ndarray) -> np.ndarray:
        """Components of a physical vector along (nu, mu, e3)."""
        return self.basis @ np.asarray(vector)

    def with_frame(self, frame: np.ndarray) -> "Grid":
        return make_grid(self.half_width, self.points_per_axis, frame)

    def subsample(self) -> "Grid | None":
        """Every other node (spacing 2h); None when the coarse grid would be invalid."""
        half = self.points_per_axis // 2
        if half % 2 or half < MIN_POINTS_PER_AXIS:
            return None
        return Grid(self.half_width, half, self.frame)


def make_grid(half_width: float, points_per_axis: int, frame: np.ndarray | None = None) -> Grid:
    if not half_width > 0:
        raise ValueError(f"Half width must be positive, got {half_width}.")
    if points_per_axis % 2:
        raise OddGridError(f"Points per axis must be even, got {points_per_axis}.")
    if points_per_axis < MIN_POINTS_PER_AXIS:
        raise OddGridError(f"Points per axis must be at least {MIN_POINTS_PER_AXIS}, got {points_per_axis}.")
    basis = np.eye(3) if frame is None else np.asarray(frame, dtype=float)
    if basis.shape != (3, 3) or not np.all(np.isfinite(basis)):
        raise FrameError(f"Frame must be a finite 3x3 array, got shape {basis.shape}.")
    deviation = np.max(np.abs(basis @ basis.T - np.eye(3)))
    if deviation > ORTHONORMAL_TOL:
        raise FrameError(f"Frame is not orthonormal (max deviation {deviation:.3e}).")
    return Grid(float(half_width), int(points_per_axis), tuple(tuple(float(x) for x in row) for row in basis))


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    samples: np.ndarray
    domain: Domain = "position"

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=complex)
        if samples.shape != self.grid.shape:
            raise GridMismatchError(f"Samples of shape {samples.shape} do not fit grid {self.grid.shape}.")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Field samples must be finite.")
        if samples is self.samples:
            samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @classmethod
    def zeros(cls, grid: Grid) -> "ComplexField":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def like(self, samples: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, samples, self.domain)

    def vector(self) -> np.ndarray:
        """Row-major flattening, nu-axis slowest."""
        return self.samples.reshape(-1)

    def conj(self) -> "ComplexField":
        return self.like(np.conj(self.samples))

    def require_grid(self, other: "ComplexField | Grid") -> None:
        grid = other if isinstance(other, Grid) else other.grid
        if grid != self.grid:
            raise GridMismatchError("Fields live on different grids.")

    def __add__(self, other: "ComplexField") -> "ComplexField":
        self.require_grid(other)
        return self.like(self.samples + other.samples)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        self.require_grid(other)
        return self.like(self.samples - other.samples)

    def __mul__(self, factor) -> "ComplexField":
        if isinstance(factor, ComplexField):
            self.require_grid(factor)
            return self.like(self.samples * factor.samples)
        return self.like(self.samples * factor)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        return weighted_norm(self, WeightedNormSpec(0.0))


@dataclass(frozen=True)
class WeightedNormSpec:
    """norm(f; gamma) is the L2 norm of exp(-gamma <w>) f."""

    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise ValueError(f"Weight exponent must be finite, got {self.gamma}.")


# --- TRANSFORMS ---


@lru_cache(maxsize=32)
def _transform_tables(grid: Grid, shifted: bool) -> tuple[np.ndarray, np.ndarray]:
    n = grid.points_per_axis
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    signs = sign[:, None, None] * sign[None, :, None] * sign[None, None, :]
    if shifted:
        modulation = np.exp(-0.5j * grid.dual_spacing * grid.axis_nodes())[:, None, None]
    else:
        modulation = np.ones((1, 1, 1), dtype=complex)
    signs.flags.writeable = False
    modulation.flags.writeable = False
    return signs, modulation


def forward_array(grid: Grid, samples: np.ndarray, shifted: bool = True) -> np.ndarray:
    """f^(xi) = h^3 sum_w f(w) exp(-i xi.w), returned in centered dual order."""
    signs, modulation = _transform_tables(grid, shifted)
    spectrum = np.fft.fftn(samples * modulation)
    spectrum *= signs
    return np.fft.fftshift(spectrum) * grid.cell_volume


def inverse_array(grid: Grid, spectrum: np.ndarray, shifted: bool = True) -> np.ndarray:
    signs, modulation = _transform_tables(grid, shifted)
    samples = np.fft.ifftn(np.fft.ifftshift(spectrum) * signs)
    return samples * np.conj(modulation) / grid.cell_volume


def forward_transform(f: ComplexField, shifted: bool = True) -> ComplexField:
    if f.domain != "position":
        raise ValueError(f"Forward transform expects a position-space field, got {f.domain}.")
    domain = "shifted_dual" if shifted else "standard_dual"
    return ComplexField(f.grid, forward_array(f.grid, f.samples, shifted), domain)


def inverse_transform(f_hat: ComplexField) -> ComplexField:
    if f_hat.domain == "position":
        raise ValueError("Inverse transform expects a dual-space field.")
    shifted = f_hat.domain == "shifted_dual"
    return ComplexField(f_hat.grid, inverse_array(f_hat.grid, f_hat.samples, shifted))


# --- NORMS AND SAMPLING ---


def weighted_norm(f: ComplexField, spec: WeightedNormSpec) -> float:
    values = f.samples
    if spec.gamma != 0.0:
        values = values * np.exp(-spec.gamma * f.grid.bracket())
    return float(np.sqrt(f.grid.cell_volume * pairwise_sum(np.abs(values) ** 2)))


def sample_function(descriptor, grid: Grid) -> ComplexField:
    if not isinstance(descriptor, DESCRIPTOR_TYPES):
        raise UnknownDescriptorError(f"Cannot sample object of type {type(descriptor).__name__}.")
    values = descriptor.evaluate(grid.physical_coordinates())
    logging.debug(f"Sampled {descriptor.kind} descriptor on {grid.points_per_axis}^3 grid")
    return ComplexField(grid, values)


def random_field(grid: Grid, rng: np.random.Generator, band_fraction: float = 1.0) -> ComplexField:
    """
    Gaussian random samples; with band_fraction < 1 the top of the shifted
    spectrum along every axis is zeroed.
    """
    samples = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if band_fraction < 1.0:
        n = grid.points_per_axis
        k = np.abs(np.arange(-n // 2, n // 2) + 0.5)
        keep = k <= band_fraction * n / 2
        mask = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]
        samples = inverse_array(grid, forward_array(grid, samples) * mask)
    return ComplexField(grid, samples)
