"""
Closed-form function descriptors: the only way potentials and test functions
enter the package from configuration.
"""

from __future__ import annotations

from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from .errors import UnknownDescriptorError

Vector3 = tuple[float, float, float]


class _Descriptor(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Complex values at `points` of shape (..., 3)."""
        raise NotImplementedError

    def scaled(self, factor: float) -> Descriptor:
        raise NotImplementedError

    def translated(self, shift: Vector3) -> Descriptor:
        raise NotImplementedError

    def fourier(self, zeta: np.ndarray) -> np.ndarray:
        """Closed-form transform  V^(zeta) = int V(w) exp(i zeta.w) dw  for zeta (..., 3)."""
        raise ValueError(f"Descriptor kind '{self.kind}' has no closed-form transform.")


class GaussianDescriptor(_Descriptor):
    kind: Literal["gaussian"] = "gaussian"
    amplitude: float
    sigma: float = Field(gt=0)
    center: Vector3 = (0.0, 0.0, 0.0)

    def evaluate(self, points):
        d2 = np.sum((points - np.asarray(self.center)) ** 2, axis=-1)
        return (self.amplitude * np.exp(-d2 / (2.0 * self.sigma**2))).astype(complex)

    def scaled(self, factor):
        return self.model_copy(update={"amplitude": self.amplitude * factor})

    def translated(self, shift):
        return self.model_copy(update={"center": tuple(np.add(self.center, shift).tolist())})

    def fourier(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        s = self.sigma
        magnitude = self.amplitude * (2.0 * np.pi) ** 1.5 * s**3
        return magnitude * np.exp(-0.5 * s**2 * np.sum(zeta**2, axis=-1)) * np.exp(
            1j * (zeta @ np.asarray(self.center))
        )


class ExponentialBumpDescriptor(_Descriptor):
    """A exp(-gamma0 <w - r0>) with <x> = (1 + |x|^2)^(1/2); r0 is the centre."""

    kind: Literal["exponential_bump"] = "exponential_bump"
    amplitude: float
    gamma0: float = Field(gt=0)
    center: Vector3 = (0.0, 0.0, 0.0)

    def evaluate(self, points):
        d2 = np.sum((points - np.asarray(self.center)) ** 2, axis=-1)
        return (self.amplitude * np.exp(-self.gamma0 * np.sqrt(1.0 + d2))).astype(complex)

    def scaled(self, factor):
        return self.model_copy(update={"amplitude": self.amplitude * factor})

    def translated(self, shift):
        return self.model_copy(update={"center": tuple(np.add(self.center, shift).tolist())})


class PlaneWaveDescriptor(_Descriptor):
    """amplitude * exp(i rho.w) for complex rho = rho_real + i rho_imag."""

    kind: Literal["plane_wave"] = "plane_wave"
    rho_real: Vector3
    rho_imag: Vector3 = (0.0, 0.0, 0.0)
    amplitude: float = 1.0

    @property
    def rho(self) -> np.ndarray:
        return np.asarray(self.rho_real) + 1j * np.asarray(self.rho_imag)

    def evaluate(self, points):
        return self.amplitude * np.exp(1j * (points @ self.rho))

    def scaled(self, factor):
        return self.model_copy(update={"amplitude": self.amplitude * factor})

    def translated(self, shift):
        phase = np.exp(-1j * (np.asarray(shift) @ self.rho))
        if abs(phase.imag) > 0:
            raise ValueError("Translating a plane wave introduces a complex amplitude.")
        return self.model_copy(update={"amplitude": self.amplitude * float(phase.real)})


class SumDescriptor(_Descriptor):
    kind: Literal["sum"] = "sum"
    terms: list[Descriptor] = Field(min_length=1)

    def evaluate(self, points):
        total = self.terms[0].evaluate(points)
        for term in self.terms[1:]:
            total = total + term.evaluate(points)
        return total

    def scaled(self, factor):
        return SumDescriptor(terms=[t.scaled(factor) for t in self.terms])

    def translated(self, shift):
        return SumDescriptor(terms=[t.translated(shift) for t in self.terms])

    def fourier(self, zeta):
        total = self.terms[0].fourier(zeta)
        for term in self.terms[1:]:
            total = total + term.fourier(zeta)
        return total


Descriptor = Annotated[
    GaussianDescriptor | ExponentialBumpDescriptor | PlaneWaveDescriptor | SumDescriptor,
    Field(discriminator="kind"),
]
SumDescriptor.model_rebuild()

_ADAPTER = TypeAdapter(Descriptor)
DESCRIPTOR_TYPES = (GaussianDescriptor, ExponentialBumpDescriptor, PlaneWaveDescriptor, SumDescriptor)


def parse_descriptor(data) -> Descriptor:
    """Validates a mapping (or an existing descriptor) into a descriptor model."""
    if isinstance(data, DESCRIPTOR_TYPES):
        return data
    if isinstance(data, dict) and data.get("kind") not in {"gaussian", "exponential_bump", "plane_wave", "sum"}:
        raise UnknownDescriptorError(f"Unknown descriptor kind: {data.get('kind')!r}")
    try:
        return _ADAPTER.validate_python(data)
    except ValidationError as e:
        if "union_tag_invalid" in str(e):
            raise UnknownDescriptorError(str(e)) from e
        raise
