"""
The operators P0(rho) = Delta + 2 rho.D and its right inverse G0(rho) as
spectral multipliers on the half-shifted dual lattice, plus probes of the
norm decay and z-analyticity of G0.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
import pandas as pd

from .config import POWER_ITERATIONS, PROBE_SEED
from .errors import EmptySweepError, FrameError, GridMismatchError, RealZError, StepTooLargeError
from .fields import ComplexField, Grid, forward_array, inverse_array
from .parallel import map_bounded
from .potential import Potential
from .utils import rng_for

MOMENTUM_TOL = 1e-12
ENERGY_TOL = 1e-10
FRAME_ALIGN_TOL = 1e-10


@dataclass(frozen=True)
class ComplexMomentum:
    """rho = z nu + rho_perp with nu a unit vector and rho_perp a real vector perpendicular to it."""

    nu: tuple[float, float, float]
    z: complex
    rho_perp: tuple[float, float, float]
    energy: float | None = None

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        perp = np.asarray(self.rho_perp, dtype=float)
        if abs(np.linalg.norm(nu) - 1.0) > MOMENTUM_TOL:
            raise FrameError(f"nu must be a unit vector, |nu| = {np.linalg.norm(nu)!r}.")
        if abs(nu @ perp) > MOMENTUM_TOL * max(1.0, np.linalg.norm(perp)):
            raise FrameError(f"rho_perp is not perpendicular to nu (dot = {nu @ perp:.3e}).")
        object.__setattr__(self, "z", complex(self.z))
        if self.energy is not None:
            defect = abs(self.dot_self() - self.energy)
            if defect > ENERGY_TOL * max(1.0, abs(self.energy)):
                raise ValueError(f"rho.rho deviates from the energy {self.energy} by {defect:.3e}.")

    @classmethod
    def on_grid(
        cls, grid: Grid, z: complex, perp: tuple[float, float] = (0.0, 0.0), energy: float | None = None
    ) -> "ComplexMomentum":
        """nu is the grid's first axis; `perp` are components along the other two."""
        basis = grid.basis
        rho_perp = perp[0] * basis[1] + perp[1] * basis[2]
        return cls(tuple(basis[0]), complex(z), tuple(rho_perp), energy)

    @property
    def rho(self) -> np.ndarray:
        return self.z * np.asarray(self.nu) + np.asarray(self.rho_perp)

    @property
    def rho_perp_norm(self) -> float:
        return float(np.linalg.norm(self.rho_perp))

    @property
    def magnitude(self) -> float:
        """|rho| = (sum |rho_i|^2)^(1/2)."""
        return float(np.sqrt(np.sum(np.abs(self.rho) ** 2)))

    def dot_self(self) -> complex:
        """Bilinear rho.rho = z^2 + |rho_perp|^2."""
        return self.z**2 + float(np.dot(self.rho_perp, self.rho_perp))

    def perp_components(self, grid: Grid) -> tuple[float, float]:
        """rho_perp along the grid's second and third axes, checking nu is the first."""
        if np.max(np.abs(grid.nu - np.asarray(self.nu))) > FRAME_ALIGN_TOL:
            raise GridMismatchError("Momentum direction nu is not the grid's first axis.")
        q = grid.to_frame(self.rho_perp)
        return float(q[1]), float(q[2])


def symbol_F(xi_par, xi_perp, z: complex, rho_perp):
    """F = xi_par^2 + 2 z xi_par + |xi_perp|^2 - |rho_perp|^2 with Im F = 2 Im z xi_par exactly."""
    xi_par = np.asarray(xi_par, dtype=float)
    xi_perp_sq = np.sum(np.asarray(xi_perp, dtype=float) ** 2, axis=-1)
    rho_sq = float(np.sum(np.asarray(rho_perp, dtype=float) ** 2))
    z = complex(z)
    values = np.empty(np.broadcast_shapes(xi_par.shape, np.shape(xi_perp_sq)), dtype=complex)
    values.real = xi_par**2 + 2.0 * z.real * xi_par + xi_perp_sq - rho_sq
    values.imag = 2.0 * z.imag * xi_par
    return values[()] if values.ndim == 0 else values


@dataclass(frozen=True)
class SymbolSlice:
    grid: Grid
    values: np.ndarray


@lru_cache(maxsize=64)
def _symbol_on_lattice(grid: Grid, z: complex, rho_perp_sq: float) -> np.ndarray:
    d0, d1, d2 = grid.dual_axes(shifted=True)
    values = np.empty(grid.shape, dtype=complex)
    values.real = d0**2 + 2.0 * z.real * d0 + d1**2 + d2**2 - rho_perp_sq
    values.imag = np.broadcast_to(2.0 * z.imag * d0, grid.shape)
    values.flags.writeable = False
    return values


def symbol_slice(grid: Grid, rho: ComplexMomentum) -> SymbolSlice:
    q1, q2 = rho.perp_components(grid)
    return SymbolSlice(grid, _symbol_on_lattice(grid, rho.z, q1 * q1 + q2 * q2))


class FaddeevOperator:
    """
    Precomputed multipliers for one (grid, rho). G0 acts as
    exp(-i rho_perp.w) F_s^-1 [ F^-1 F_s( exp(i rho_perp.w) f ) ] on the
    half-shifted lattice.
    """

    def __init__(self, grid: Grid, rho: ComplexMomentum):
        self.grid = grid
        self.rho = rho
        q1, q2 = rho.perp_components(grid)
        _, a1, a2 = grid.axes()
        self.twist = np.exp(1j * (q1 * a1 + q2 * a2))
        self.symbol = _symbol_on_lattice(grid, rho.z, q1 * q1 + q2 * q2)
        self._q = (q1, q2)

    def _twisted(self, samples: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
        spectrum = forward_array(self.grid, samples * self.twist)
        return inverse_array(self.grid, spectrum * multiplier) * np.conj(self.twist)

    def green(self, samples: np.ndarray) -> np.ndarray:
        if self.rho.z.imag == 0:
            raise RealZError("G0 needs Im z != 0; use the free resolvent on the real axis.")
        return self._twisted(samples, 1.0 / self.symbol)

    def green_adjoint(self, samples: np.ndarray) -> np.ndarray:
        if self.rho.z.imag == 0:
            raise RealZError("G0 needs Im z != 0; use the free resolvent on the real axis.")
        return self._twisted(samples, 1.0 / np.conj(self.symbol))

    def laplace(self, samples: np.ndarray, lattice: Literal["standard", "twisted"] = "standard") -> np.ndarray:
        if lattice == "twisted":
            return self._twisted(samples, self.symbol)
        d0, d1, d2 = self.grid.dual_axes(shifted=False)
        q1, q2 = self._q
        multiplier = d0**2 + d1**2 + d2**2 + 2.0 * (self.rho.z * d0 + q1 * d1 + q2 * d2)
        spectrum = forward_array(self.grid, samples, shifted=False)
        return inverse_array(self.grid, spectrum * multiplier, shifted=False)


def apply_P0(
    rho: ComplexMomentum, f: ComplexField, lattice: Literal["standard", "twisted"] = "standard"
) -> ComplexField:
    """
    F^-1[(|xi|^2 + 2 rho.xi) f^]. The twisted lattice is the one G0 uses, on
    which P0 and G0 are exact inverses.
    """
    return f.like(FaddeevOperator(f.grid, rho).laplace(f.samples, lattice))


def apply_G0(rho: ComplexMomentum, f: ComplexField) -> ComplexField:
    return f.like(FaddeevOperator(f.grid, rho).green(f.samples))


def apply_G0_adjoint(rho: ComplexMomentum, f: ComplexField) -> ComplexField:
    return f.like(FaddeevOperator(f.grid, rho).green_adjoint(f.samples))


def singular_set_distance(grid: Grid, rho_perp) -> float:
    """Distance from the dual lattice to {xi_par = 0, |xi_perp| = |rho_perp|}; never depends on z."""
    radius = float(np.linalg.norm(rho_perp))
    d0, d1, d2 = grid.dual_axes(shifted=True)
    ring = np.sqrt(d1**2 + d2**2) - radius
    return float(np.sqrt(np.min(d0**2) + np.min(ring**2)))


def dense_green(grid: Grid, rho: ComplexMomentum) -> np.ndarray:
    """
    G0 as an explicit N^3 x N^3 matrix built from DFT matrices on the
    half-shifted lattice. Only meant for small grids.
    """
    n = grid.points_per_axis
    a = grid.axis_nodes()
    d0, d1, d2 = (d.ravel() for d in grid.dual_axes(shifted=True))
    A0, A1, A2 = (np.exp(-1j * np.outer(d, a)) for d in (d0, d1, d2))
    forward = grid.cell_volume * np.kron(A0, np.kron(A1, A2))
    inverse = forward.conj().T / (n**3 * grid.cell_volume**2)
    q1, q2 = rho.perp_components(grid)
    _, x1, x2 = grid.axes()
    twist = np.broadcast_to(np.exp(1j * (q1 * x1 + q2 * x2)), grid.shape).ravel()
    xi0, xi1, xi2 = d0[:, None, None], d1[None, :, None], d2[None, None, :]
    symbol = xi0**2 + 2 * rho.z * xi0 + xi1**2 + xi2**2 - (q1 * q1 + q2 * q2)
    return (np.conj(twist)[:, None] * inverse) @ ((1.0 / symbol.ravel())[:, None] * forward * twist[None, :])


# --- PROBES ---


@dataclass(frozen=True)
class NormSample:
    rho_abs: float
    estimate: float
    z: complex
    rho_perp_1: float
    rho_perp_2: float


def _weighted_norm_estimate(
    grid: Grid, rho: ComplexMomentum, gamma_in: float, gamma_out: float, trials: int, rng: np.random.Generator
) -> float:
    operator = FaddeevOperator(grid, rho)
    bracket = grid.bracket()
    weight_in = np.exp(-gamma_in * bracket)
    weight_out = np.exp(-gamma_out * bracket)
    best = 0.0
    for _ in range(trials):
        x = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        x /= np.linalg.norm(x)
        for _ in range(POWER_ITERATIONS):
            y = weight_out * operator.green(weight_in * x)
            x = weight_in * operator.green_adjoint(weight_out * y)
            x /= np.linalg.norm(x)
        estimate = np.linalg.norm(weight_out * operator.green(weight_in * x))
        best = max(best, float(estimate))
    return best


def norm_decay_probe(
    grid: Grid,
    momenta: list[ComplexMomentum],
    gamma_in: float = 0.25,
    gamma_out: float | None = None,
    trials: int = 2,
    seed: int = PROBE_SEED,
    workers: int | None = None,
) -> list[NormSample]:
    """
    Power-iteration estimate of the norm of G0(rho) from exp(-gamma<w>)L2 to
    exp(gamma<w>)L2 at every sweep point, seeded per point.
    """
    if not momenta:
        raise EmptySweepError("Norm decay probe needs at least one momentum.")
    gamma_out = gamma_in if gamma_out is None else gamma_out

    def probe(indexed: tuple[int, ComplexMomentum]) -> NormSample:
        index, rho = indexed
        q1, q2 = rho.perp_components(grid)
        estimate = _weighted_norm_estimate(grid, rho, gamma_in, gamma_out, trials, rng_for(seed, "probe", index))
        logging.info(f"|rho| = {rho.magnitude:.4g}: weighted norm of G0 ~ {estimate:.6g}")
        return NormSample(rho.magnitude, estimate, rho.z, q1, q2)

    return map_bounded(probe, list(enumerate(momenta)), workers, desc="Norm probe")


def norm_sweep_frame(samples: list[NormSample]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "re_z": [s.z.real for s in samples],
            "im_z": [s.z.imag for s in samples],
            "rho_perp_1": [s.rho_perp_1 for s in samples],
            "rho_perp_2": [s.rho_perp_2 for s in samples],
            "norm_estimate": [s.estimate for s in samples],
        },
        columns=["re_z", "im_z", "rho_perp_1", "rho_perp_2", "norm_estimate"],
    )


def analyticity_probe(
    V: Potential,
    z0: complex,
    rho_perp: tuple[float, float],
    delta: float,
    probes: int = 4,
    seed: int = PROBE_SEED,
) -> float:
    """
    Central-difference Cauchy-Riemann residual |dm/dx + i dm/dy| / |m'| of
    m(z) = <g, V G0(z nu + rho_perp) h>, maximized over random (g, h).
    Analytic m gives delta^2 |m'''| / 3 / |m'|.
    """
    z0 = complex(z0)
    if z0.imag == 0:
        raise RealZError("Analyticity probe needs Im z0 != 0.")
    if not 0 < delta < abs(z0.imag) / 4:
        raise StepTooLargeError(f"Step {delta} must lie in (0, |Im z0|/4 = {abs(z0.imag) / 4}).")
    if V.is_zero:
        return 0.0

    grid = V.grid
    rng = rng_for(seed, "analyticity")
    pairs = [
        (
            rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape),
            rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape),
        )
        for _ in range(probes)
    ]
    stencil = [z0 + delta, z0 - delta, z0 + 1j * delta, z0 - 1j * delta]
    operators = [FaddeevOperator(grid, ComplexMomentum.on_grid(grid, z, rho_perp)) for z in stencil]

    worst = 0.0
    for g, h in pairs:
        m = [np.vdot(g, V.values * op.green(h)) for op in operators]
        dx = (m[0] - m[1]) / (2.0 * delta)
        dy = (m[2] - m[3]) / (2.0 * delta)
        scale = abs(dx)
        residual = abs(dx + 1j * dy)
        if scale == 0.0:
            continue
        worst = max(worst, residual / scale)
    logging.info(f"Cauchy-Riemann residual at z0 = {z0}, delta = {delta}: {worst:.3e}")
    return worst
