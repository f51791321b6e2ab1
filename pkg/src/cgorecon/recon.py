"""
Shell reconstruction of the Fourier transform of V - V' from CGO pairings,
low-frequency completion, and the S-matrix / Fourier uniqueness experiment.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from .cgo import check_schedule_growth, exceptional_indicator, solve_cgo
from .config import (
    CGO_MAX_ITER,
    CGO_TOL,
    COMPLETION_BASIS_SIZE,
    COMPLETION_REG_WEIGHT,
    EXCEPTIONAL_THRESHOLD,
    ORTHONORMAL_TOL,
    PROBE_SEED,
)
from .errors import (
    EmptySweepError,
    FrameError,
    NonConvergenceError,
    RegularizationError,
    ShellBoundError,
    SubcriticalTError,
)
from .faddeev import ComplexMomentum
from .fields import ComplexField, Grid
from .harmonics import SphericalHarmonicCoeffs, conjugation_map, harmonic_count, harmonic_index, sph_matrix, to_angles
from .parallel import map_bounded
from .potential import Potential
from .scattering import poisson, scattering_matrix, scattering_pairing, wavenumber
from .utils import fibonacci_directions, frame_for_direction, pairwise_sum

# A new completion atom must at least shrink the residual by this factor
ATOM_ACCEPT_RATIO = 0.5
EXACT_FIT_TOL = 1e-12
BASELINE_RELATIVE = 1e-10


def shell_bounds(energy: float, gamma0: float) -> tuple[float, float]:
    """2 sqrt(lambda) < |zeta| < sqrt(4 lambda + gamma0^2)."""
    return 2.0 * np.sqrt(energy), float(np.sqrt(4.0 * energy + gamma0**2))


def critical_t(radius: float, energy: float) -> float:
    """Admissible t at |zeta| = radius must exceed this."""
    return float(np.sqrt(max(radius * radius / 4.0 - energy, 0.0)))


def rho_param(
    zeta: np.ndarray, energy: float, t: float, nu: np.ndarray, mu: np.ndarray
) -> tuple[ComplexMomentum, ComplexMomentum]:
    """
    rho = zeta/2 + s mu + i t nu and rho' = zeta/2 - s mu - i t nu with
    s = (t^2 - |zeta|^2/4 + lambda)^(1/2), so rho + rho' = zeta and
    rho.rho = rho'.rho' = lambda.
    """
    zeta = np.asarray(zeta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=float)
    scale = max(1.0, float(np.linalg.norm(zeta)))
    gram = np.array([[nu @ nu, nu @ mu], [mu @ nu, mu @ mu]])
    if np.max(np.abs(gram - np.eye(2))) > ORTHONORMAL_TOL:
        raise FrameError("nu and mu must be orthonormal.")
    if abs(zeta @ nu) > ORTHONORMAL_TOL * scale or abs(zeta @ mu) > ORTHONORMAL_TOL * scale:
        raise FrameError("zeta must be perpendicular to nu and mu.")
    s_squared = t * t - (zeta @ zeta) / 4.0 + energy
    if s_squared <= 0:
        raise SubcriticalTError(f"t = {t} needs t^2 > |zeta|^2/4 - lambda = {(zeta @ zeta) / 4.0 - energy}.")
    s = np.sqrt(s_squared)
    rho = ComplexMomentum(tuple(nu), 1j * t, tuple(zeta / 2.0 + s * mu), energy)
    rho_prime = ComplexMomentum(tuple(nu), -1j * t, tuple(zeta / 2.0 - s * mu), energy)
    return rho, rho_prime


@dataclass(frozen=True)
class PairingSample:
    zeta: tuple[float, float, float]
    t: float | None
    value: complex
    quadrature_error: float


def _pairing_sum(grid: Grid, zeta: np.ndarray, vdiff: np.ndarray, v: np.ndarray, v_prime: np.ndarray) -> complex:
    integrand = grid.plane_phase(zeta) * vdiff * (1.0 + v) * (1.0 + v_prime)
    return complex(grid.cell_volume * pairwise_sum(integrand))


def pairing_integral(
    vdiff: ComplexField, v: ComplexField, v_prime: ComplexField, zeta: np.ndarray, t: float | None = None
) -> PairingSample:
    """
    h^3 sum exp(i zeta.w)(V - V')(1 + v)(1 + v'); the error estimate compares
    with the same sum on every other node.
    """
    vdiff.require_grid(v)
    vdiff.require_grid(v_prime)
    grid = vdiff.grid
    zeta = np.asarray(zeta, dtype=float)
    value = _pairing_sum(grid, zeta, vdiff.samples, v.samples, v_prime.samples)
    coarse = grid.subsample()
    if coarse is None:
        error = float("nan")
    else:
        pick = (slice(None, None, 2),) * 3
        coarse_value = _pairing_sum(coarse, zeta, vdiff.samples[pick], v.samples[pick], v_prime.samples[pick])
        error = abs(value - coarse_value)
    return PairingSample(tuple(zeta.tolist()), t, value, error)


# --- RECOVERY ---


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    zeta: tuple[float, float, float]
    samples: list[PairingSample]
    flagged_t: list[float] = field(default_factory=list)

    @property
    def estimate(self) -> complex:
        return self.samples[-1].value

    @property
    def t_values(self) -> list[float]:
        return [s.t for s in self.samples]

    def table(self) -> pd.DataFrame:
        final = self.estimate
        return pd.DataFrame(
            {
                "t": [s.t for s in self.samples],
                "re": [s.value.real for s in self.samples],
                "im": [s.value.imag for s in self.samples],
                "abs_diff_to_final": [abs(s.value - final) for s in self.samples],
                "quadrature_error": [s.quadrature_error for s in self.samples],
            },
            columns=["t", "re", "im", "abs_diff_to_final", "quadrature_error"],
        )


def _recovery_grid(grid: Grid, zeta: np.ndarray, frame: np.ndarray | None) -> Grid:
    frame = frame_for_direction(zeta) if frame is None else np.asarray(frame, dtype=float)
    if np.array_equal(grid.basis, frame):
        return grid
    return grid.with_frame(frame)


def recover_fourier(
    V: Potential,
    V_prime: Potential,
    energy: float,
    zeta: np.ndarray,
    t_schedule: list[float],
    tol: float = CGO_TOL,
    max_iter: int = CGO_MAX_ITER,
    grid_frame: np.ndarray | None = None,
    mu_sign: float = 1.0,
    screen: bool = False,
    seed: int = PROBE_SEED,
) -> RecoveryResult:
    """
    Pairing of CGO solutions for V at rho(t) and V' at rho'(t) along an
    increasing t schedule; the last sample is the estimate of (V - V')^(zeta).
    The grid is rotated so its first two axes are nu and mu (mu flipped with
    mu_sign = -1).
    """
    zeta = np.asarray(zeta, dtype=float)
    lower = 2.0 * np.sqrt(energy)
    if not np.linalg.norm(zeta) > lower:
        raise ShellBoundError(f"|zeta| = {np.linalg.norm(zeta)} must exceed 2 sqrt(lambda) = {lower}.")
    if not t_schedule or any(b <= a for a, b in zip(t_schedule, t_schedule[1:], strict=False)):
        raise ValueError(f"t schedule must be nonempty and strictly increasing, got {t_schedule}.")
    check_schedule_growth(t_schedule[-1], V.grid.half_width)

    grid = _recovery_grid(V.grid, zeta, grid_frame)
    V, V_prime = V.resample(grid), V_prime.resample(grid)
    nu, mu = grid.basis[0], mu_sign * grid.basis[1]
    vdiff = V.difference(V_prime)
    identical = not np.any(vdiff.samples)
    zero = ComplexField.zeros(grid)

    samples, flagged = [], []
    for t in t_schedule:
        rho, rho_prime = rho_param(zeta, energy, t, nu, mu)
        if identical:
            samples.append(pairing_integral(vdiff, zero, zero, zeta, t))
            continue
        if screen:
            indicator = min(exceptional_indicator(V, rho, seed=seed), exceptional_indicator(V_prime, rho_prime, seed=seed))
            if indicator < EXCEPTIONAL_THRESHOLD:
                logging.warning(f"t = {t} at zeta = {zeta} is near the exceptional set (indicator {indicator:.2e})")
                flagged.append(t)
        try:
            v = solve_cgo(V, rho, tol, max_iter).v
            v_prime = solve_cgo(V_prime, rho_prime, tol, max_iter).v
        except NonConvergenceError as e:
            raise NonConvergenceError(f"{e} [t = {t}]", e.iterations, e.residual, t) from e
        samples.append(pairing_integral(vdiff, v, v_prime, zeta, t))
    result = RecoveryResult(tuple(zeta.tolist()), samples, flagged)
    logging.info(f"Recovered (V - V')^ at zeta = {zeta}: {result.estimate:.6g}")
    return result


@dataclass(frozen=True)
class ShellPoint:
    zeta: tuple[float, float, float]
    estimate: complex
    t: float
    err: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True, eq=False)
class ShellRecovery:
    points: list[ShellPoint]
    bounds: tuple[float, float]

    def successful(self) -> list[ShellPoint]:
        return [p for p in self.points if p.ok]

    def frame(self) -> pd.DataFrame:
        rows = self.successful()
        return pd.DataFrame(
            {
                "zeta1": [p.zeta[0] for p in rows],
                "zeta2": [p.zeta[1] for p in rows],
                "zeta3": [p.zeta[2] for p in rows],
                "abs_zeta": [float(np.linalg.norm(p.zeta)) for p in rows],
                "t": [p.t for p in rows],
                "re": [p.estimate.real for p in rows],
                "im": [p.estimate.imag for p in rows],
                "err": [p.err for p in rows],
            },
            columns=["zeta1", "zeta2", "zeta3", "abs_zeta", "t", "re", "im", "err"],
        )

    def symmetry_defect(self) -> float:
        """max |V^(-zeta) - conj V^(zeta)| over sampled antipodal pairs (0 when none)."""
        rows = self.successful()
        zetas = np.array([p.zeta for p in rows]).reshape(-1, 3)
        worst = 0.0
        for i, p in enumerate(rows):
            match = np.flatnonzero(np.all(np.abs(zetas + zetas[i]) <= 1e-12 * max(1.0, np.linalg.norm(p.zeta)), axis=1))
            for j in match:
                worst = max(worst, abs(rows[j].estimate - np.conj(p.estimate)))
        return worst

    def angular_spread(self) -> float:
        """Largest std / |mean| of the estimates over directions sharing a radius."""
        groups: dict[float, list[complex]] = {}
        for p in self.successful():
            groups.setdefault(round(float(np.linalg.norm(p.zeta)), 9), []).append(p.estimate)
        worst = 0.0
        for values in groups.values():
            if len(values) < 2:
                continue
            values = np.asarray(values, dtype=complex)
            mean = abs(np.mean(values))
            if mean == 0:
                return float("inf")
            worst = max(worst, float(np.std(values)) / mean)
        return worst


def shell_points(energy: float, gamma0: float, n_dirs: int, n_radii: int) -> list[np.ndarray]:
    """Fibonacci directions times radii spaced strictly inside the shell."""
    lower, upper = shell_bounds(energy, gamma0)
    radii = lower + (upper - lower) * np.arange(1, n_radii + 1) / (n_radii + 1)
    return [radius * direction for direction in fibonacci_directions(n_dirs) for radius in radii]


def shell_scan(
    V: Potential,
    V_prime: Potential,
    energy: float,
    n_dirs: int,
    n_radii: int,
    t: float,
    gamma0: float | None = None,
    antipodal: bool = False,
    tol: float = CGO_TOL,
    max_iter: int = CGO_MAX_ITER,
    workers: int | None = None,
) -> ShellRecovery:
    """
    recover_fourier at every shell sample. With `antipodal`, -zeta is added
    right after zeta on the same grid frame with mu flipped.
    """
    gamma0 = min(V.gamma0, V_prime.gamma0) if gamma0 is None else gamma0
    bounds = shell_bounds(energy, gamma0)
    check_schedule_growth(t, V.grid.half_width)
    zetas = shell_points(energy, gamma0, n_dirs, n_radii)
    if not zetas:
        raise EmptySweepError("Shell scan needs n_dirs >= 1 and n_radii >= 1.")
    widest = max(float(np.linalg.norm(zeta)) for zeta in zetas)
    if not t > critical_t(widest, energy):
        raise SubcriticalTError(
            f"t = {t} needs t > {critical_t(widest, energy):.4g} at the outer shell samples |zeta| = {widest:.4g}."
        )
    jobs = []
    for zeta in zetas:
        frame = frame_for_direction(zeta)
        jobs.append((zeta, frame, 1.0))
        if antipodal:
            jobs.append((-zeta, frame, -1.0))

    def recover(job) -> ShellPoint:
        zeta, frame, mu_sign = job
        try:
            result = recover_fourier(V, V_prime, energy, zeta, [t], tol, max_iter, grid_frame=frame, mu_sign=mu_sign)
        except (NonConvergenceError, ValueError) as e:
            logging.warning(f"Shell point zeta = {zeta} failed: {e}")
            return ShellPoint(tuple(zeta.tolist()), complex("nan"), t, float("nan"), str(e))
        sample = result.samples[-1]
        return ShellPoint(tuple(zeta.tolist()), sample.value, t, sample.quadrature_error)

    points = map_bounded(recover, jobs, workers, desc="Shell scan")
    return ShellRecovery(points, bounds)


# --- LOW-FREQUENCY COMPLETION ---


def completion_widths(n_basis: int) -> np.ndarray:
    """Gaussian widths alpha_j = 2^(j - n_basis/2); alpha = 1 is always present."""
    return 2.0 ** (np.arange(n_basis) - n_basis // 2)


def _completion_design(zetas: np.ndarray, widths: np.ndarray, angular_degree: int) -> np.ndarray:
    zetas = np.asarray(zetas, dtype=float).reshape(-1, 3)
    radius = np.linalg.norm(zetas, axis=-1)
    gaussians = np.exp(-0.5 * widths[None, :] * radius[:, None] ** 2)
    if angular_degree == 0:
        return gaussians.astype(complex)
    polar, azimuth = to_angles(zetas)
    Y = sph_matrix(angular_degree, polar, azimuth).T
    solid = radius[:, None] ** np.array([k for k, _ in harmonic_index(angular_degree)])[None, :] * Y
    return (gaussians[:, :, None] * solid[:, None, :]).reshape(zetas.shape[0], -1)


@dataclass(frozen=True, eq=False)
class Completion:
    points: np.ndarray
    values: np.ndarray
    coefficients: np.ndarray
    widths: np.ndarray
    angular_degree: int
    fit_residual: float
    selected: list[int]
    reg_weight: float

    def value_at(self, zeta: np.ndarray) -> complex | np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        design = _completion_design(zeta.reshape(-1, 3), self.widths, self.angular_degree)
        values = design @ self.coefficients
        return complex(values[0]) if zeta.ndim == 1 else values

    def frame(self) -> pd.DataFrame:
        columns = {
            "zeta_abs": np.linalg.norm(self.points, axis=-1),
            "re": self.values.real,
            "im": self.values.imag,
        }
        if self.angular_degree:
            columns = {"zeta1": self.points[:, 0], "zeta2": self.points[:, 1], "zeta3": self.points[:, 2], **columns}
        return pd.DataFrame(columns, columns=list(columns))


def _regularized_fit(design: np.ndarray, data: np.ndarray, reg_weight: float) -> np.ndarray:
    """argmin |A c - y|^2 + reg_weight |A|_2^2 |c|^2 via the stacked least-squares system."""
    penalty = np.sqrt(reg_weight) * np.linalg.norm(design, 2)
    stacked = np.vstack([design, penalty * np.eye(design.shape[1])])
    rhs = np.concatenate([data, np.zeros(design.shape[1], dtype=complex)])
    coefficients, *_ = np.linalg.lstsq(stacked, rhs, rcond=None)
    return coefficients


def lowfreq_complete(
    shell: ShellRecovery,
    gamma0: float,
    ball_radius: float | None = None,
    reg_weight: float = COMPLETION_REG_WEIGHT,
    n_basis: int = COMPLETION_BASIS_SIZE,
    angular_degree: int = 0,
    ball_points: int = 17,
) -> Completion:
    """
    Extends shell samples of V^ to the ball |zeta| <= ball_radius with Gaussian
    (times solid harmonic) atoms. Atoms are added greedily by correlation and
    kept only while each one at least halves the residual; the coefficients
    on the kept atoms are Tikhonov-regularized least squares.
    """
    if not reg_weight > 0:
        raise RegularizationError(f"Completion needs a positive regularization weight, got {reg_weight}.")
    rows = shell.successful()
    if not rows:
        raise EmptySweepError("Low-frequency completion needs at least one shell sample.")
    zetas = np.array([p.zeta for p in rows])
    data = np.array([p.estimate for p in rows], dtype=complex)
    widths = completion_widths(n_basis)
    design = _completion_design(zetas, widths, angular_degree)
    coefficients = np.zeros(design.shape[1], dtype=complex)
    norm = np.linalg.norm(data)

    selected: list[int] = []
    residual = data
    if norm > 0:
        column_norms = np.linalg.norm(design, axis=0)
        usable = column_norms > 0
        while len(selected) < design.shape[1]:
            scores = np.where(usable, np.abs(design.conj().T @ residual) / np.where(usable, column_norms, 1.0), -1.0)
            scores[selected] = -1.0
            candidate = int(np.argmax(scores))
            if scores[candidate] <= 0:
                break
            trial = selected + [candidate]
            fitted = _regularized_fit(design[:, trial], data, reg_weight)
            trial_residual = data - design[:, trial] @ fitted
            if selected and np.linalg.norm(trial_residual) > ATOM_ACCEPT_RATIO * np.linalg.norm(residual):
                break
            selected, residual = trial, trial_residual
            coefficients[:] = 0
            coefficients[selected] = fitted
            if np.linalg.norm(residual) <= EXACT_FIT_TOL * norm:
                break
    fit_residual = 0.0 if norm == 0 else float(np.linalg.norm(residual) / norm)

    ball_radius = shell.bounds[0] if ball_radius is None else ball_radius
    radii = np.linspace(0.0, ball_radius, ball_points)
    directions = np.array([[0.0, 0.0, 1.0]]) if angular_degree == 0 else fibonacci_directions(12)
    points = np.array([r * d for d in directions for r in radii])
    values = _completion_design(points, widths, angular_degree) @ coefficients
    logging.info(f"Completion kept {len(selected)} atoms, shell fit residual {fit_residual:.2e}")
    return Completion(points, values, coefficients, widths, angular_degree, fit_residual, selected, reg_weight)


# --- UNIQUENESS EXPERIMENT ---


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k_max: int = Field(default=2, ge=0)
    test_degree: int = Field(default=1, ge=0)
    n_dirs: int = Field(default=8, ge=1)
    n_radii: int = Field(default=1, ge=1)
    t: float = Field(default=8.0, gt=0)
    gamma0: float | None = None
    antipodal: bool = False
    cgo_tol: float = CGO_TOL
    cgo_max_iter: int = CGO_MAX_ITER
    workers: int | None = None
    seed: int = 0


class ShellComparison(BaseModel):
    zeta: tuple[float, float, float]
    estimate: tuple[float, float]
    direct: tuple[float, float]


class UniquenessReport(BaseModel):
    energy: float
    config: ExperimentConfig
    s_discrepancy: float
    s_scale: float
    s_equal: bool
    unitarity_defects: tuple[float, float]
    pairing_discrepancy: float
    pairing_scale: float
    pairing_equal: bool
    pairing_vs_smatrix: float
    shell_discrepancy: float
    shell_direct_max: float
    shell_relative_error: float
    shell_equal: bool
    shell_failures: int
    consistent: bool
    baseline_relative: float = BASELINE_RELATIVE
    shell: list[ShellComparison] = []


def _pairing_matrix(V: Potential, V_prime: Potential, energy: float, degree: int) -> np.ndarray:
    """int (V - V') P_+ Y_a P'_+ Y_b over the box for all test harmonics a, b."""
    n = harmonic_count(degree)
    units = [SphericalHarmonicCoeffs(energy, degree, np.eye(n)[i]) for i in range(n)]
    fields = [poisson(V, energy, g).samples for g in units]
    fields_prime = fields if V_prime is V else [poisson(V_prime, energy, g).samples for g in units]
    vdiff = V.values - V_prime.values
    h3 = V.grid.cell_volume
    return np.array([[h3 * pairwise_sum(vdiff * a * b) for b in fields_prime] for a in fields])


def uniqueness_experiment(
    V: Potential, V_prime: Potential, energy: float, config: ExperimentConfig | None = None
) -> UniquenessReport:
    """
    Compares S-matrices, the box pairings int (V - V') P_+ Y_a P'_+ Y_b and the
    shell reconstruction of (V - V')^ against its direct grid transform.
    """
    config = config or ExperimentConfig()
    V_prime = V_prime.resample(V.grid)
    wavenumber(energy)

    S = scattering_matrix(V, energy, config.k_max, workers=config.workers)
    S_prime = S if V_prime is V else scattering_matrix(V_prime, energy, config.k_max, workers=config.workers)
    s_discrepancy = float(np.linalg.norm(S.matrix - S_prime.matrix))
    s_scale = float(np.linalg.norm(S.matrix))

    degree = min(config.test_degree, config.k_max)
    pairings = _pairing_matrix(V, V_prime, energy, degree)
    n = harmonic_count(degree)
    P = conjugation_map(config.k_max)
    predicted = np.array(
        [
            [
                scattering_pairing(
                    S,
                    S_prime,
                    SphericalHarmonicCoeffs(energy, config.k_max, np.eye(harmonic_count(config.k_max))[a]),
                    SphericalHarmonicCoeffs(energy, config.k_max, P[:, b]),
                )
                for b in range(n)
            ]
            for a in range(n)
        ]
    )
    pairing_discrepancy = float(np.max(np.abs(pairings)))
    pairing_scale = float(
        V.grid.cell_volume * np.sum(np.abs(V.values) + np.abs(V_prime.values)) * (2.0 * wavenumber(energy)) ** 2
    )

    shell = shell_scan(
        V,
        V_prime,
        energy,
        config.n_dirs,
        config.n_radii,
        config.t,
        gamma0=config.gamma0,
        antipodal=config.antipodal,
        tol=config.cgo_tol,
        max_iter=config.cgo_max_iter,
        workers=config.workers,
    )
    rows = shell.successful()
    estimates = np.array([p.estimate for p in rows], dtype=complex)
    direct = np.array([V.fourier(p.zeta) - V_prime.fourier(p.zeta) for p in rows], dtype=complex)
    transform_scale = max((abs(V.fourier(p.zeta)) for p in rows), default=0.0)
    shell_discrepancy = float(np.max(np.abs(estimates), initial=0.0))
    direct_max = float(np.max(np.abs(direct), initial=0.0))
    if direct_max > 0:
        relative_error = float(np.max(np.abs(estimates - direct) / np.maximum(np.abs(direct), 1e-12 * direct_max)))
    else:
        relative_error = 0.0 if shell_discrepancy == 0 else float("inf")

    s_equal = s_discrepancy <= BASELINE_RELATIVE * s_scale
    pairing_equal = pairing_discrepancy <= BASELINE_RELATIVE * pairing_scale
    shell_equal = shell_discrepancy <= BASELINE_RELATIVE * transform_scale
    report = UniquenessReport(
        energy=energy,
        config=config,
        s_discrepancy=s_discrepancy,
        s_scale=s_scale,
        s_equal=s_equal,
        unitarity_defects=(S.unitarity_defect, S_prime.unitarity_defect),
        pairing_discrepancy=pairing_discrepancy,
        pairing_scale=pairing_scale,
        pairing_equal=pairing_equal,
        pairing_vs_smatrix=float(np.max(np.abs(pairings - predicted))),
        shell_discrepancy=shell_discrepancy,
        shell_direct_max=direct_max,
        shell_relative_error=relative_error,
        shell_equal=shell_equal,
        shell_failures=len(shell.points) - len(rows),
        consistent=(s_equal == shell_equal),
        shell=[
            ShellComparison(zeta=p.zeta, estimate=(e.real, e.imag), direct=(d.real, d.imag))
            for p, e, d in zip(rows, estimates, direct, strict=True)
        ],
    )
    logging.info(
        f"Uniqueness: |S - S'| = {s_discrepancy:.3e}, max pairing = {pairing_discrepancy:.3e}, "
        f"shell discrepancy = {shell_discrepancy:.3e} (relative error {relative_error:.2e})"
    )
    return report


def translation_phase_error(report: UniquenessReport, V: Potential, shift) -> float:
    """
    For V' = V(. - shift) the shell estimates are V^(zeta) (1 - exp(i zeta.shift)),
    so 1 - estimate / V^(zeta) recovers the phase. Returns the worst deviation.
    """
    shift = np.asarray(shift, dtype=float)
    worst = 0.0
    for row in report.shell:
        zeta = np.asarray(row.zeta)
        recovered = 1.0 - complex(*row.estimate) / V.fourier(zeta)
        worst = max(worst, abs(recovered - np.exp(1j * (zeta @ shift))))
    return worst if report.shell else float("inf")
