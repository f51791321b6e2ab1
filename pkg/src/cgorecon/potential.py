from dataclasses import dataclass

import numpy as np

from .descriptors import parse_descriptor
from .fields import ComplexField, Grid, sample_function
from .utils import pairwise_sum

DESCRIPTOR_MATCH_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Potential:
    """Real potential sampled on a grid, decaying like exp(-gamma0 |w|)."""

    field: ComplexField
    gamma0: float
    descriptor: object | None = None

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError(f"Decay rate gamma0 must be positive, got {self.gamma0}.")
        if np.any(self.field.samples.imag != 0.0):
            raise ValueError("Potential samples must be real.")
        if self.descriptor is not None:
            reference = sample_function(self.descriptor, self.grid).samples
            mismatch = np.max(np.abs(reference - self.field.samples))
            scale = max(1.0, float(np.max(np.abs(reference))))
            if mismatch > DESCRIPTOR_MATCH_TOL * scale:
                raise ValueError(f"Potential samples deviate from descriptor by {mismatch:.3e}.")

    @classmethod
    def from_descriptor(cls, descriptor, grid: Grid, gamma0: float) -> "Potential":
        descriptor = parse_descriptor(descriptor)
        values = sample_function(descriptor, grid).samples
        if np.any(np.abs(values.imag) > 0):
            raise ValueError(f"Descriptor kind '{descriptor.kind}' is not real-valued.")
        return cls(ComplexField(grid, values.real.astype(complex)), gamma0, descriptor)

    @classmethod
    def zero(cls, grid: Grid, gamma0: float) -> "Potential":
        return cls(ComplexField.zeros(grid), gamma0)

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.samples.real

    @property
    def is_zero(self) -> bool:
        return not np.any(self.field.samples)

    def resample(self, grid: Grid) -> "Potential":
        """Same potential on another grid (same or rotated frame)."""
        if grid == self.grid:
            return self
        if self.is_zero:
            return Potential.zero(grid, self.gamma0)
        if self.descriptor is None:
            raise ValueError("Resampling a potential requires its closed-form descriptor.")
        return Potential.from_descriptor(self.descriptor, grid, self.gamma0)

    def scaled(self, factor: float) -> "Potential":
        descriptor = None if self.descriptor is None else self.descriptor.scaled(factor)
        return Potential(self.field * float(factor), self.gamma0, descriptor)

    def translated(self, shift) -> "Potential":
        """V(w - shift) on the same grid."""
        if self.descriptor is None:
            raise ValueError("Translating a potential requires its closed-form descriptor.")
        shift = tuple(np.asarray(shift, dtype=float).tolist())
        return Potential.from_descriptor(self.descriptor.translated(shift), self.grid, self.gamma0)

    def difference(self, other: "Potential") -> ComplexField:
        return self.field - other.field

    def fourier(self, zeta: np.ndarray) -> complex:
        """Grid quadrature of int V(w) exp(i zeta.w) dw."""
        integrand = self.grid.plane_phase(np.asarray(zeta, dtype=float)) * self.values
        return complex(self.grid.cell_volume * pairwise_sum(integrand))

    def decay_bound(self) -> float:
        """sup |V(w)| exp(gamma0 |w|) over the grid."""
        return float(np.max(np.abs(self.values) * np.exp(self.gamma0 * self.grid.radius())))

    def weighted_sup(self, gamma: float) -> float:
        """sup |V(w)| exp(2 gamma <w>), the multiplier bound between the weighted spaces."""
        return float(np.max(np.abs(self.values) * np.exp(2.0 * gamma * self.grid.bracket())))
