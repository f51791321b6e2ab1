"""
Property suite behind `cgo-recon verify`. Every check runs at the scenario's
resolution (the dense-oracle check uses its own 8^3 grid) and reports a
measured value against a fixed threshold.
"""

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from pydantic import BaseModel

from .cgo import default_weight_gamma, exceptional_scan, solve_cgo
from .config import UNITARITY_TOL
from .descriptors import GaussianDescriptor
from .errors import CGOReconError
from .faddeev import ComplexMomentum, FaddeevOperator, analyticity_probe, apply_G0, dense_green, norm_decay_probe
from .fields import ComplexField, Grid, WeightedNormSpec, make_grid, random_field, weighted_norm
from .harmonics import SphericalHarmonicCoeffs, harmonic_count
from .potential import Potential
from .recon import (
    ShellPoint,
    ShellRecovery,
    lowfreq_complete,
    pairing_integral,
    recover_fourier,
    rho_param,
    shell_points,
    shell_scan,
    translation_phase_error,
    uniqueness_experiment,
)
from .scattering import (
    boundary_pairing,
    born_matrix,
    poisson_basis,
    poisson_wavefield,
    projection_residual,
    resolvent,
    scattering_matrix,
)
from .scenario import Scenario
from .utils import frame_for_direction, rng_for

MULTIPLIER_TOL = 1e-8
DENSE_TOL = 1e-8
NORM_RATIO_MAX = 0.5
CR_RATIO_RANGE = (3.0, 5.0)
CR_ABSOLUTE_MAX = 1e-5
IDENTITY_TOL = 1e-10
BORN_RATIO_TOL = 0.02
BORN_SCALE = 1e-3
BORN_LINEARITY_TOL = 0.05
PAIRING_TOL = 1e-4
# S-matrix entries carry the unitarity-level discretization error
PAIRING_SMATRIX_TOL = 10 * UNITARITY_TOL
SHELL_TOL = 0.05
COMPLETION_EXACT_TOL = 0.03
COMPLETION_NOISY_TOL = 0.10
UNIQUENESS_FACTOR = 0.9
TRANSLATION_SHIFT = (0.5, 0.0, 0.0)
ISOTROPY_TOL = 0.02
DENSITY_DEGREES = (2, 4, 8)
PAIRING_FIT_DEGREE = 6
MONOTONE_SLACK = 1e-12


class CheckResult(BaseModel):
    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    detail: str = ""


class VerifyReport(BaseModel):
    scenario: str
    seed: int
    half_width: float
    points_per_axis: int
    checks: list[CheckResult]
    elapsed_seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def _result(name: str, value: float, threshold: float, passed: bool | None = None, detail: str = "") -> CheckResult:
    value = float(value)
    if passed is None:
        passed = math.isfinite(value) and value <= threshold
    return CheckResult(
        name=name, passed=bool(passed), value=value if math.isfinite(value) else None, threshold=threshold, detail=detail
    )


def _strictly_decreasing(values: list[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:], strict=False))


def _is_radial(descriptor) -> bool:
    return descriptor.kind in ("gaussian", "exponential_bump") and not any(getattr(descriptor, "center", (1.0,)))


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.ravel(a) - np.ravel(b)) / max(np.linalg.norm(np.ravel(b)), np.finfo(float).tiny))


@dataclass
class SuiteContext:
    scenario: Scenario
    workers: int

    @cached_property
    def grid(self) -> Grid:
        return self.scenario.build_grid()

    @cached_property
    def V(self) -> Potential:
        return self.scenario.potentials(self.grid)[0]

    @cached_property
    def zero(self) -> Potential:
        return Potential.zero(self.grid, self.scenario.gamma0)

    @property
    def seed(self) -> int:
        return self.scenario.seed

    @cached_property
    def zeta(self) -> np.ndarray:
        """First scenario zeta, otherwise the middle of the shell along the first axis."""
        if self.scenario.zeta_samples:
            return self.scenario.zetas[0]
        lower, upper = self.scenario.shell_bounds()
        return np.array([(lower + upper) / 2.0, 0.0, 0.0])

    def exact_transform(self, zeta: np.ndarray) -> complex:
        try:
            return complex(self.scenario.potential.fourier(np.asarray(zeta, dtype=float)))
        except ValueError:
            return self.V.fourier(zeta)


# --- CHECKS ---


def check_multiplier(ctx: SuiteContext) -> list[CheckResult]:
    grid = ctx.grid
    momenta = [ComplexMomentum.on_grid(grid, z, (1.0, 0.0)) for z in (0.5j, -0.5j, 2j, -2j, 1 + 2j)]
    worst = 0.0
    for index, rho in enumerate(momenta):
        operator = FaddeevOperator(grid, rho)
        rng = rng_for(ctx.seed, "verify", 1, index)
        for _ in range(ctx.scenario.verify.multiplier_fields):
            f = random_field(grid, rng, band_fraction=0.5).samples
            worst = max(worst, _relative(operator.laplace(operator.green(f), "twisted"), f))
    return [_result("multiplier_identity", worst, MULTIPLIER_TOL)]


DENSE_MOMENTA = (0.5j, -0.5j, 2j, -2j, 1.0 + 1.5j)
DENSE_POTENTIALS = (
    GaussianDescriptor(amplitude=0.1, sigma=0.5),
    GaussianDescriptor(amplitude=-0.2, sigma=0.4, center=(0.3, -0.2, 0.1)),
)


def check_dense_oracle(ctx: SuiteContext) -> list[CheckResult]:
    grid = make_grid(2.0, 8)
    rng = rng_for(ctx.seed, "verify", 2)
    green_error = cgo_error = 0.0
    for z in DENSE_MOMENTA:
        rho = ComplexMomentum.on_grid(grid, z, (0.7, 0.2))
        G = dense_green(grid, rho)
        f = random_field(grid, rng)
        green_error = max(green_error, _relative(apply_G0(rho, f).samples, G @ f.vector()))
        for descriptor in DENSE_POTENTIALS:
            V = Potential.from_descriptor(descriptor, grid, 1.0)
            potential = V.values.ravel()
            dense_v = np.linalg.solve(np.eye(G.shape[0]) + G * potential[None, :], -G @ potential)
            cgo_error = max(cgo_error, _relative(solve_cgo(V, rho, tol=1e-12).v.samples, dense_v))

    V = Potential.from_descriptor(DENSE_POTENTIALS[0], grid, 1.0)
    v, v_prime = random_field(grid, rng), random_field(grid, rng)
    zeta = np.array([1.0, 0.5, -0.3])
    brute = 0j
    for i, j, k in np.ndindex(grid.shape):
        phase = np.exp(1j * zeta @ grid.node(i, j, k))
        brute += phase * V.values[i, j, k] * (1 + v.samples[i, j, k]) * (1 + v_prime.samples[i, j, k])
    brute *= grid.cell_volume
    pairing_error = abs(pairing_integral(V.field, v, v_prime, zeta).value - brute) / abs(brute)

    return [
        _result("dense_green", green_error, DENSE_TOL, detail=f"{len(DENSE_MOMENTA)} momenta"),
        _result("dense_cgo", cgo_error, DENSE_TOL, detail=f"{len(DENSE_MOMENTA)} momenta x {len(DENSE_POTENTIALS)} potentials"),
        _result("dense_pairing", pairing_error, DENSE_TOL),
    ]


def check_norm_decay(ctx: SuiteContext) -> list[CheckResult]:
    magnitudes = (5.0, 10.0, 20.0, 40.0)
    momenta = [ComplexMomentum.on_grid(ctx.grid, 1j * m, (1.0, 0.0)) for m in magnitudes]
    samples = norm_decay_probe(ctx.grid, momenta, seed=ctx.seed, workers=ctx.workers)
    estimates = [s.estimate for s in samples]
    ratio = estimates[3] / estimates[1]
    return [
        _result(
            "norm_decay",
            ratio,
            NORM_RATIO_MAX,
            passed=_strictly_decreasing(estimates) and ratio <= NORM_RATIO_MAX,
            detail=f"estimates {estimates}",
        )
    ]


def check_analyticity(ctx: SuiteContext) -> list[CheckResult]:
    coarse = analyticity_probe(ctx.V, 1.0 + 2.0j, (0.5, 0.0), 2e-3, seed=ctx.seed)
    fine = analyticity_probe(ctx.V, 1.0 + 2.0j, (0.5, 0.0), 1e-3, seed=ctx.seed)
    ratio = coarse / fine if fine > 0 else math.inf
    low, high = CR_RATIO_RANGE
    return [
        _result("analyticity_order", ratio, high, passed=low <= ratio <= high, detail=f"residuals {coarse:.3e}, {fine:.3e}"),
        _result("analyticity_residual", fine, CR_ABSOLUTE_MAX),
    ]


def _zeta_setup(ctx: SuiteContext) -> tuple[Grid, Potential]:
    grid = ctx.grid.with_frame(frame_for_direction(ctx.zeta))
    return grid, ctx.V.resample(grid)


def check_cgo_decay(ctx: SuiteContext) -> list[CheckResult]:
    grid, V = _zeta_setup(ctx)
    spec = WeightedNormSpec(default_weight_gamma(V.gamma0))
    solver = ctx.scenario.solver
    norms = []
    for t in ctx.scenario.t_schedule:
        rho, _ = rho_param(ctx.zeta, ctx.scenario.energy, t, grid.basis[0], grid.basis[1])
        norms.append(weighted_norm(solve_cgo(V, rho, solver.cgo_tol, solver.cgo_max_iter).v, spec))
    return [
        _result("cgo_decay", norms[-1] / norms[0], 1.0, passed=_strictly_decreasing(norms), detail=f"norms {norms}")
    ]


def check_scattering(ctx: SuiteContext) -> list[CheckResult]:
    scenario = ctx.scenario
    energy, k_max = scenario.energy, scenario.k_max
    identity = np.eye(harmonic_count(k_max))

    S_zero = scattering_matrix(ctx.zero, energy, k_max, workers=ctx.workers)
    S = scattering_matrix(ctx.V, energy, k_max, workers=ctx.workers)
    results = [
        _result("scattering_identity", np.max(np.abs(S_zero.matrix - identity)), IDENTITY_TOL),
        _result("unitarity", S.unitarity_defect, UNITARITY_TOL),
    ]

    if scenario.verify.refine_points:
        fine = make_grid(scenario.grid.half_width, scenario.verify.refine_points)
        V_fine = Potential.from_descriptor(scenario.potential, fine, scenario.gamma0)
        refined = scattering_matrix(V_fine, energy, k_max, workers=ctx.workers).unitarity_defect
        results.append(
            _result(
                "unitarity_refinement",
                refined,
                S.unitarity_defect,
                passed=refined < S.unitarity_defect,
                detail=f"N={scenario.grid.points_per_axis}: {S.unitarity_defect:.3e}, N={fine.points_per_axis}: {refined:.3e}",
            )
        )

    weak = ctx.V.scaled(BORN_SCALE)
    K = scattering_matrix(weak, energy, k_max, workers=ctx.workers).matrix - identity
    B = born_matrix(weak.descriptor, energy, k_max)
    significant = np.abs(B) >= 1e-2 * np.max(np.abs(B))
    worst = float(np.max(np.abs(K[significant] / B[significant] - 1.0)))
    results.append(_result("born_ratio", worst, BORN_RATIO_TOL))
    K_double = scattering_matrix(weak.scaled(2.0), energy, k_max, workers=ctx.workers).matrix - identity
    growth = float(np.linalg.norm(K_double) / np.linalg.norm(K))
    results.append(
        _result("born_linearity", abs(growth / 2.0 - 1.0), BORN_LINEARITY_TOL, detail=f"norm ratio {growth:.4f} on doubling")
    )
    return results


def _pairing_defect(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1.0)


def check_boundary_pairing(ctx: SuiteContext) -> list[CheckResult]:
    energy, grid, V = ctx.scenario.energy, ctx.grid, ctx.V
    source = GaussianDescriptor(amplitude=1.0, sigma=0.7, center=(0.3, 0.0, 0.0))
    sink = GaussianDescriptor(amplitude=1.0, sigma=0.7, center=(0.0, -0.4, 0.2))
    f1 = ComplexField(grid, source.evaluate(grid.physical_coordinates()))
    f2 = ComplexField(grid, sink.evaluate(grid.physical_coordinates()))

    outgoing = resolvent(V, energy, 1, f1).with_asymptotics(energy, PAIRING_FIT_DEGREE)
    incoming = resolvent(V, energy, -1, f2).with_asymptotics(energy, PAIRING_FIT_DEGREE)
    g = SphericalHarmonicCoeffs(energy, 1, [1.0, 0.5j, 0.0, -0.25])
    wave = poisson_wavefield(V, energy, g, sign=1, k_max=PAIRING_FIT_DEGREE)

    worst = 0.0
    for first, second in ((outgoing, incoming), (wave, incoming), (outgoing, wave)):
        lhs, rhs = boundary_pairing(first, second, energy)
        worst = max(worst, _pairing_defect(lhs, rhs))
    return [_result("boundary_pairing", worst, PAIRING_TOL)]


def check_shell_recovery(ctx: SuiteContext) -> list[CheckResult]:
    scenario, solver = ctx.scenario, ctx.scenario.solver
    shell = shell_scan(
        ctx.V,
        ctx.zero,
        scenario.energy,
        scenario.shell.n_dirs,
        scenario.shell.n_radii,
        scenario.t_schedule[-1],
        gamma0=scenario.gamma0,
        tol=solver.cgo_tol,
        max_iter=solver.cgo_max_iter,
        workers=ctx.workers,
    )
    rows = shell.successful()
    errors = [abs(p.estimate - ctx.exact_transform(p.zeta)) / abs(ctx.exact_transform(p.zeta)) for p in rows]
    worst = max(errors, default=math.inf)
    failures = len(shell.points) - len(rows)

    recovery = recover_fourier(
        ctx.V, ctx.zero, scenario.energy, ctx.zeta, scenario.t_schedule, solver.cgo_tol, solver.cgo_max_iter
    )
    exact = ctx.exact_transform(ctx.zeta)
    trend = [abs(s.value - exact) for s in recovery.samples]
    results = [
        _result("shell_recovery", worst, SHELL_TOL, passed=failures == 0 and worst <= SHELL_TOL, detail=f"{failures} failed points"),
        _result("reference_point", abs(recovery.estimate - exact) / abs(exact), SHELL_TOL, detail=f"zeta {ctx.zeta.tolist()}"),
        _result(
            "t_convergence",
            trend[-1],
            trend[0],
            passed=len(trend) < 2 or _strictly_decreasing(trend),
            detail=f"errors {trend}",
        ),
    ]
    if _is_radial(scenario.potential):
        results.append(_result("shell_isotropy", shell.angular_spread(), ISOTROPY_TOL))
    return results


def check_completion(ctx: SuiteContext) -> list[CheckResult]:
    scenario = ctx.scenario
    zetas = shell_points(scenario.energy, scenario.gamma0, scenario.shell.n_dirs, 3)
    exact = np.array([ctx.exact_transform(z) for z in zetas])
    rng = rng_for(ctx.seed, "noise")
    noise = scenario.verify.noise_level * (rng.standard_normal(len(zetas)) + 1j * rng.standard_normal(len(zetas)))
    noise /= np.sqrt(2.0)
    bounds = scenario.shell_bounds()
    origin = ctx.exact_transform(np.zeros(3))
    spec = scenario.completion

    def completed_at_origin(values: np.ndarray) -> complex:
        shell = ShellRecovery([ShellPoint(tuple(z.tolist()), v, 0.0, 0.0) for z, v in zip(zetas, values, strict=True)], bounds)
        completion = lowfreq_complete(
            shell, scenario.gamma0, reg_weight=spec.reg_weight, n_basis=spec.n_basis, angular_degree=spec.angular_degree
        )
        return completion.value_at(np.zeros(3))

    exact_error = abs(completed_at_origin(exact) - origin) / abs(origin)
    noisy_error = abs(completed_at_origin(exact * (1.0 + noise)) - origin) / abs(origin)
    return [
        _result("completion_exact", exact_error, COMPLETION_EXACT_TOL),
        _result("completion_noisy", noisy_error, COMPLETION_NOISY_TOL),
    ]


def check_uniqueness(ctx: SuiteContext) -> list[CheckResult]:
    config = ctx.scenario.experiment_config(ctx.workers)
    energy = ctx.scenario.energy
    scaled = uniqueness_experiment(ctx.V, ctx.V.scaled(UNIQUENESS_FACTOR), energy, config)
    same = uniqueness_experiment(ctx.V, ctx.V, energy, config)
    baseline = same.s_equal and same.pairing_equal and same.shell_equal
    smatrix_defect = scaled.pairing_vs_smatrix / (2.0 * scaled.pairing_discrepancy + 1.0)

    moved = ctx.V.translated(TRANSLATION_SHIFT)
    translated = uniqueness_experiment(ctx.V, moved, energy, config)
    modulus_gap = max(
        (abs(abs(ctx.V.fourier(np.asarray(row.zeta))) - abs(moved.fourier(np.asarray(row.zeta)))) for row in translated.shell),
        default=math.inf,
    )
    modulus_scale = max((abs(ctx.V.fourier(np.asarray(row.zeta))) for row in translated.shell), default=1.0)
    phase_error = translation_phase_error(translated, ctx.V, TRANSLATION_SHIFT)
    return [
        _result(
            "translation_phase",
            phase_error,
            SHELL_TOL,
            passed=phase_error <= SHELL_TOL and not translated.s_equal and modulus_gap <= SHELL_TOL * modulus_scale,
            detail=f"|S - S'| = {translated.s_discrepancy:.3e}, modulus gap {modulus_gap:.2e}",
        ),
        _result("uniqueness_discrimination", scaled.shell_relative_error, SHELL_TOL, passed=scaled.shell_relative_error <= SHELL_TOL and not scaled.s_equal),
        _result(
            "uniqueness_baseline",
            max(same.s_discrepancy, same.pairing_discrepancy, same.shell_discrepancy),
            same.baseline_relative,
            passed=baseline,
        ),
        _result("smatrix_pairing", smatrix_defect, PAIRING_SMATRIX_TOL),
    ]


def check_density(ctx: SuiteContext) -> list[CheckResult]:
    grid, V = _zeta_setup(ctx)
    scenario = ctx.scenario
    rho, _ = rho_param(ctx.zeta, scenario.energy, scenario.t_schedule[0], grid.basis[0], grid.basis[1])
    target = solve_cgo(V, rho, scenario.solver.cgo_tol, scenario.solver.cgo_max_iter).eigenfunction("inner")
    basis = poisson_basis(V, scenario.energy, max(DENSITY_DEGREES), ctx.workers)
    residuals = [projection_residual(target, basis, k, V.gamma0 / 2.0).residual for k in DENSITY_DEGREES]
    monotone = all(b <= a + MONOTONE_SLACK for a, b in zip(residuals, residuals[1:], strict=False))
    return [_result("density_trend", residuals[-1], residuals[0], passed=monotone, detail=f"residuals {residuals}")]


def check_reproducibility(ctx: SuiteContext) -> list[CheckResult]:
    scenario = ctx.scenario
    z = [complex(0.5, 1.0), complex(0.0, 2.0)]

    def outputs(workers: int) -> tuple[np.ndarray, np.ndarray]:
        scan = exceptional_scan(ctx.V, z, [(0.5, 0.0)], probes=1, seed=ctx.seed, workers=workers)
        shell = shell_scan(
            ctx.V, ctx.zero, scenario.energy, 2, 1, scenario.t_schedule[0], gamma0=scenario.gamma0, workers=workers
        )
        return scan.indicators, np.array([p.estimate for p in shell.points])

    serial = outputs(1)
    parallel = outputs(max(2, ctx.workers))
    identical = all(np.array_equal(a, b) for a, b in zip(serial, parallel, strict=True))
    return [_result("reproducibility", 0.0 if identical else 1.0, 0.0, passed=identical)]


CHECKS: dict[str, Callable[[SuiteContext], list[CheckResult]]] = {
    "multiplier": check_multiplier,
    "dense_oracle": check_dense_oracle,
    "norm_decay": check_norm_decay,
    "analyticity": check_analyticity,
    "cgo_decay": check_cgo_decay,
    "scattering": check_scattering,
    "boundary_pairing": check_boundary_pairing,
    "shell_recovery": check_shell_recovery,
    "completion": check_completion,
    "uniqueness": check_uniqueness,
    "density": check_density,
    "reproducibility": check_reproducibility,
}


def run_suite(scenario: Scenario, only: list[str] | None = None, workers: int | None = None) -> VerifyReport:
    """Runs the selected checks in registry order; a check that raises is recorded as failed."""
    names = list(CHECKS) if not only else only
    unknown = sorted(set(names) - set(CHECKS))
    if unknown:
        raise ValueError(f"Unknown checks {unknown}; available: {', '.join(CHECKS)}.")
    ctx = SuiteContext(scenario, workers or scenario.solver.workers)
    started = time.perf_counter()
    results: list[CheckResult] = []
    for name in (n for n in CHECKS if n in names):
        logging.info(f"Running check '{name}'...")
        try:
            outcome = CHECKS[name](ctx)
        except (CGOReconError, RuntimeError, ValueError) as e:
            logging.error(f"Check '{name}' raised: {e}", exc_info=True)
            outcome = [CheckResult(name=name, passed=False, detail=f"{type(e).__name__}: {e}")]
        for result in outcome:
            level = logging.INFO if result.passed else logging.WARNING
            logging.log(level, f"{result.name}: {'PASS' if result.passed else 'FAIL'} (value {result.value}, threshold {result.threshold})")
        results.extend(outcome)
    return VerifyReport(
        scenario=scenario.name,
        seed=scenario.seed,
        half_width=scenario.grid.half_width,
        points_per_axis=scenario.grid.points_per_axis,
        checks=results,
        elapsed_seconds=time.perf_counter() - started,
    )
