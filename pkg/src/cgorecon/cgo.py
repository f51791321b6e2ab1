"""
Complex geometrical optics solutions u = exp(i rho.w)(1 + v) of (Delta + V - lambda)u = 0
and the invertibility indicator used to map the exceptional set.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import pandas as pd

from . import krylov
from .config import (
    CGO_MAX_ITER,
    CGO_TIGHTEN_ROUNDS,
    CGO_TOL,
    EXCEPTIONAL_THRESHOLD,
    INDICATOR_ITERATIONS,
    OVERFLOW_EXPONENT,
    PROBE_SEED,
    WEIGHT_GAMMA_CAP,
)
from .errors import NonConvergenceError, OverflowGuardError, RealZError, ScheduleOverflowError
from .faddeev import ComplexMomentum, FaddeevOperator
from .fields import ComplexField
from .parallel import map_bounded
from .potential import Potential
from .utils import pairwise_sum, rng_for

INDICATOR_SOLVE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CGOSolution:
    rho: ComplexMomentum
    v: ComplexField
    residual: float
    iterations: int
    indicator: float = math.nan

    def eigenfunction(self, region: Literal["box", "inner"] = "box") -> ComplexField:
        """
        u = exp(i rho.w)(1 + v), zeroed outside the inner half-box when
        region="inner". Refuses growth beyond exp(OVERFLOW_EXPONENT).
        """
        grid = self.v.grid
        reach = grid.half_width / 2 if region == "inner" else grid.half_width
        exponent = abs(self.rho.z.imag) * reach
        if exponent > OVERFLOW_EXPONENT:
            raise OverflowGuardError(
                f"|Im z| * extent = {exponent:.1f} exceeds the overflow guard {OVERFLOW_EXPONENT}."
            )
        u = grid.plane_phase(self.rho.rho) * (1.0 + self.v.samples)
        if region == "inner":
            u = u * inner_mask(grid)
        return self.v.like(u)


def inner_mask(grid) -> np.ndarray:
    """Indicator of the inner half-box |a_i| <= L/2 in frame coordinates."""
    inside = np.abs(grid.axis_nodes()) <= grid.half_width / 2
    return inside[:, None, None] & inside[None, :, None] & inside[None, None, :]


def check_schedule_growth(t_max: float, half_width: float) -> None:
    """|Im rho| = t must keep exp(t |w|) within the overflow guard on the inner half-box."""
    exponent = t_max * half_width / 2
    if exponent > OVERFLOW_EXPONENT:
        raise ScheduleOverflowError(
            f"t = {t_max} on L = {half_width} gives t L/2 = {exponent:.1f} above the overflow guard {OVERFLOW_EXPONENT}."
        )


def _relative_pde_residual(operator: FaddeevOperator, potential: np.ndarray, v: np.ndarray) -> float:
    defect = operator.laplace(v, "twisted") + potential * v + potential
    return float(np.sqrt(pairwise_sum(np.abs(defect) ** 2) / pairwise_sum(potential**2)))


def solve_cgo(
    V: Potential,
    rho: ComplexMomentum,
    tol: float = CGO_TOL,
    max_iter: int = CGO_MAX_ITER,
    indicator_probes: int = 0,
    seed: int = PROBE_SEED,
) -> CGOSolution:
    """
    Solves (Id + G0 V) v = -G0 V by GMRES. The reported residual is the
    relative residual of (Delta + 2 rho.D + V) v + V on the lattice G0 uses.
    """
    if rho.z.imag == 0:
        raise RealZError("CGO solutions need Im z != 0.")
    if not tol > 0:
        raise ValueError(f"Tolerance must be positive, got {tol}.")
    grid = V.grid
    indicator = exceptional_indicator(V, rho, indicator_probes, seed) if indicator_probes else math.nan
    if V.is_zero:
        return CGOSolution(rho, ComplexField.zeros(grid), 0.0, 0, indicator)

    operator = FaddeevOperator(grid, rho)
    potential = V.values
    system = krylov.operator_from(grid.shape, lambda x: x + operator.green(potential * x))
    rhs = -operator.green(potential.astype(complex)).ravel()

    x = np.zeros_like(rhs)
    krylov_tol = tol
    iterations = 0
    residual = math.inf
    for round_index in range(CGO_TIGHTEN_ROUNDS + 1):
        x, info, used = krylov.solve(system, rhs, krylov_tol, max_iter - iterations, x0=x)
        iterations += used
        residual = _relative_pde_residual(operator, potential, x.reshape(grid.shape))
        if residual <= tol:
            break
        if info != 0 or iterations >= max_iter:
            raise NonConvergenceError(
                f"CGO solve stalled at residual {residual:.3e} after {iterations} iterations (z = {rho.z}).",
                iterations=iterations,
                residual=residual,
            )
        krylov_tol = max(krylov_tol * min(0.1, 0.5 * tol / residual), 1e-15)
        logging.debug(f"PDE residual {residual:.3e} above {tol:.1e}; tightening Krylov tolerance to {krylov_tol:.1e}")
    else:
        raise NonConvergenceError(
            f"CGO PDE residual {residual:.3e} still above {tol:.1e} after {CGO_TIGHTEN_ROUNDS} tightening rounds.",
            iterations=iterations,
            residual=residual,
        )

    logging.info(f"CGO solve z = {rho.z:.4g}: {iterations} iterations, residual {residual:.2e}")
    return CGOSolution(rho, ComplexField(grid, x.reshape(grid.shape)), residual, iterations, indicator)


# --- EXCEPTIONAL SET ---


def default_weight_gamma(gamma0: float) -> float:
    return min(WEIGHT_GAMMA_CAP, gamma0 / 4.0)


def exceptional_indicator(
    V: Potential,
    rho: ComplexMomentum,
    probes: int = 2,
    seed: int = PROBE_SEED,
    gamma: float | None = None,
    iterations: int = INDICATOR_ITERATIONS,
) -> float:
    """
    Smallest-singular-value estimate of Id + V G0 on exp(gamma<w>)L2, by
    randomized inverse power iteration. A failed inner solve reports 0.
    """
    if rho.z.imag == 0:
        raise RealZError("Exceptional indicator needs Im z != 0.")
    if V.is_zero:
        return 1.0
    grid = V.grid
    gamma = default_weight_gamma(V.gamma0) if gamma is None else gamma
    operator = FaddeevOperator(grid, rho)
    bracket = grid.bracket()
    shrink = np.exp(-gamma * bracket)
    weighted_potential = np.exp(gamma * bracket) * V.values

    forward = krylov.operator_from(grid.shape, lambda x: x + weighted_potential * operator.green(shrink * x))
    adjoint = krylov.operator_from(
        grid.shape, lambda y: y + shrink * operator.green_adjoint(weighted_potential * y)
    )

    def inverse(system, b):
        x, info, _ = krylov.solve(system, b, INDICATOR_SOLVE_TOL, CGO_MAX_ITER)
        if info != 0:
            raise NonConvergenceError("Indicator inner solve did not converge.")
        return x

    rng = rng_for(seed, "indicator")
    smallest = math.inf
    try:
        for _ in range(max(1, probes)):
            x = rng.standard_normal(grid.shape).ravel() + 1j * rng.standard_normal(grid.shape).ravel()
            x /= np.linalg.norm(x)
            for _ in range(iterations):
                x = inverse(adjoint, inverse(forward, x))
                x /= np.linalg.norm(x)
            smallest = min(smallest, 1.0 / float(np.linalg.norm(inverse(forward, x))))
    except NonConvergenceError:
        logging.warning(f"Indicator probing failed at z = {rho.z}; reporting 0")
        return 0.0
    return smallest


@dataclass(frozen=True, eq=False)
class ExceptionalScan:
    points: list[tuple[complex, float, float]]
    indicators: np.ndarray
    threshold: float
    gamma: float
    flagged: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "flagged", np.asarray(self.indicators) < self.threshold)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "re_z": [z.real for z, _, _ in self.points],
                "im_z": [z.imag for z, _, _ in self.points],
                "rho_perp_1": [p1 for _, p1, _ in self.points],
                "rho_perp_2": [p2 for _, _, p2 in self.points],
                "indicator": np.asarray(self.indicators, dtype=float),
                "flagged": np.asarray(self.flagged, dtype=bool),
            },
            columns=["re_z", "im_z", "rho_perp_1", "rho_perp_2", "indicator", "flagged"],
        )


def exceptional_scan(
    V: Potential,
    z_samples: list[complex],
    perp_samples: list[tuple[float, float]],
    threshold: float = EXCEPTIONAL_THRESHOLD,
    probes: int = 2,
    seed: int = PROBE_SEED,
    workers: int | None = None,
) -> ExceptionalScan:
    z_samples = [complex(z) for z in z_samples]
    if any(z.imag == 0 for z in z_samples):
        raise RealZError("Every scan sample needs Im z != 0.")
    points = [(z, float(p[0]), float(p[1])) for z, p in itertools.product(z_samples, perp_samples)]

    def indicator_at(indexed):
        index, (z, p1, p2) = indexed
        rho = ComplexMomentum.on_grid(V.grid, z, (p1, p2))
        return exceptional_indicator(V, rho, probes, int(rng_for(seed, "indicator", index).integers(2**32)))

    indicators = np.array(map_bounded(indicator_at, list(enumerate(points)), workers, desc="Exceptional scan"))
    scan = ExceptionalScan(points, indicators, threshold, default_weight_gamma(V.gamma0))
    if scan.flagged.any():
        logging.warning(f"{int(scan.flagged.sum())} of {len(points)} scan points flagged below {threshold:g}")
    return scan


def amplitude_sweep(
    V: Potential,
    rho: ComplexMomentum,
    factors: list[float],
    probes: int = 2,
    seed: int = PROBE_SEED,
    workers: int | None = None,
) -> list[tuple[float, float]]:
    """Indicator of c*V for each amplification factor c, in input order."""

    def indicator_for(factor: float) -> tuple[float, float]:
        return float(factor), exceptional_indicator(V.scaled(factor), rho, probes, seed)

    return map_bounded(indicator_for, list(factors), workers, desc="Amplitude sweep")
