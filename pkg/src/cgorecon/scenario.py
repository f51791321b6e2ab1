"""
Scenario files: one TOML or JSON document per batch run. Unknown keys are
errors; every module precondition is checked before any compute starts.
"""

import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    CGO_MAX_ITER,
    CGO_TOL,
    COMPLETION_BASIS_SIZE,
    COMPLETION_REG_WEIGHT,
    DEFAULT_WORKERS,
    EXCEPTIONAL_THRESHOLD,
    LS_MAX_ITER,
    LS_TOL,
    OUTPUT_ROOT,
)
from .descriptors import Descriptor, PlaneWaveDescriptor, SumDescriptor
from .errors import EmptySweepError, RealZError, ScenarioError, ShellBoundError, SubcriticalTError
from .fields import Grid, make_grid
from .potential import Potential
from .cgo import check_schedule_growth
from .recon import ExperimentConfig, critical_t, shell_points
from .utils import complex_pair, frame_for_direction, parse_complex

Vector3 = tuple[float, float, float]
SUBCOMMANDS = ("forward", "cgo", "scan-exceptional", "recover", "uniqueness", "verify")
ECHO_NAME = "scenario.json"


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSpec(_Spec):
    half_width: float = Field(default=8.0, gt=0)  # box is [-L, L)^3, length units
    points_per_axis: int = 48

    def build(self, frame: np.ndarray | None = None) -> Grid:
        return make_grid(self.half_width, self.points_per_axis, frame)


class SolverSpec(_Spec):
    cgo_tol: float = Field(default=CGO_TOL, gt=0)
    cgo_max_iter: int = Field(default=CGO_MAX_ITER, gt=0)
    ls_tol: float = Field(default=LS_TOL, gt=0)
    ls_max_iter: int = Field(default=LS_MAX_ITER, gt=0)
    workers: int = Field(default=DEFAULT_WORKERS, ge=1)


class ShellSpec(_Spec):
    n_dirs: int = Field(default=24, ge=1)
    n_radii: int = Field(default=1, ge=1)
    antipodal: bool = False


class CompletionSpec(_Spec):
    n_basis: int = Field(default=COMPLETION_BASIS_SIZE, ge=1)
    reg_weight: float = Field(default=COMPLETION_REG_WEIGHT, gt=0)
    angular_degree: int = Field(default=0, ge=0)
    ball_radius: float | None = Field(default=None, gt=0)
    ball_points: int = Field(default=17, ge=2)


class ScanSpec(_Spec):
    """Exceptional-set scan: z samples as [re, im] pairs (or "a+bj" strings), rho_perp as 2-vectors."""

    z_samples: list[tuple[float, float]] = [(0.0, 0.5), (0.0, 1.0), (0.0, 2.0), (0.0, 4.0)]
    rho_perp: list[tuple[float, float]] = [(0.0, 0.0), (1.0, 0.0)]
    threshold: float = Field(default=EXCEPTIONAL_THRESHOLD, gt=0)
    probes: int = Field(default=2, ge=1)
    amplitude_factors: list[float] = []

    @field_validator("z_samples", mode="before")
    @classmethod
    def _complex_pairs(cls, value):
        if not isinstance(value, list):
            return value
        return [complex_pair(parse_complex(item, complex("nan"))) for item in value]

    def complex_z(self) -> list[complex]:
        return [complex(re, im) for re, im in self.z_samples]


class VerifySpec(_Spec):
    multiplier_fields: int = Field(default=50, ge=1)
    refine_points: int | None = 64  # second resolution for the unitarity trend; None skips it
    noise_level: float = Field(default=0.01, ge=0)


class Scenario(_Spec):
    name: str = "scenario"
    grid: GridSpec = GridSpec()
    potential: Descriptor
    potential_prime: Descriptor | None = None
    energy: float = Field(default=1.0, gt=0)  # lambda = k^2
    gamma0: float = Field(default=3.0, gt=0)  # decay rate, bounds the shell from above
    k_max: int = Field(default=2, ge=0)
    t_schedule: list[float] = Field(default=[2.0, 4.0, 8.0], min_length=1)
    zeta_samples: list[Vector3] = []
    shell: ShellSpec = ShellSpec()
    solver: SolverSpec = SolverSpec()
    completion: CompletionSpec = CompletionSpec()
    scan: ScanSpec = ScanSpec()
    verify: VerifySpec = VerifySpec()
    seed: int = Field(default=0, ge=0, lt=2**64)
    output_dir: Path | None = None

    @model_validator(mode="after")
    def _check_shape(self) -> "Scenario":
        if any(t <= 0 for t in self.t_schedule):
            raise ValueError(f"t_schedule entries must be positive, got {self.t_schedule}.")
        if any(b <= a for a, b in zip(self.t_schedule, self.t_schedule[1:], strict=False)):
            raise ValueError(f"t_schedule must be strictly increasing, got {self.t_schedule}.")
        for label, descriptor in (("potential", self.potential), ("potential_prime", self.potential_prime)):
            if descriptor is not None and _is_complex(descriptor):
                raise ValueError(f"{label} must be real-valued; plane waves are test functions only.")
        return self

    @property
    def zetas(self) -> list[np.ndarray]:
        return [np.asarray(z, dtype=float) for z in self.zeta_samples]

    def build_grid(self, frame: np.ndarray | None = None) -> Grid:
        return self.grid.build(frame)

    def potentials(self, grid: Grid | None = None) -> tuple[Potential, Potential]:
        """(V, V') on the scenario grid; V' defaults to zero."""
        grid = self.build_grid() if grid is None else grid
        V = Potential.from_descriptor(self.potential, grid, self.gamma0)
        if self.potential_prime is None:
            return V, Potential.zero(grid, self.gamma0)
        return V, Potential.from_descriptor(self.potential_prime, grid, self.gamma0)

    def shell_bounds(self) -> tuple[float, float]:
        return 2.0 * np.sqrt(self.energy), float(np.sqrt(4.0 * self.energy + self.gamma0**2))

    def zeta_frame(self) -> np.ndarray:
        """Frame whose first two axes are perpendicular to the first zeta sample (identity without one)."""
        if not self.zeta_samples or not np.any(self.zeta_samples[0]):
            return np.eye(3)
        return frame_for_direction(self.zetas[0])

    def with_overrides(self, out: Path | None = None, workers: int | None = None, seed: int | None = None) -> "Scenario":
        data = self.model_dump()
        if out is not None:
            data["output_dir"] = Path(out)
        if workers is not None:
            data["solver"]["workers"] = workers
        if seed is not None:
            data["seed"] = seed
        return Scenario.model_validate(data)

    def output_path(self) -> Path:
        return self.output_dir if self.output_dir is not None else OUTPUT_ROOT / self.name

    def experiment_config(self, workers: int | None = None) -> ExperimentConfig:
        """Uniqueness experiment settings: shell spec, last t of the schedule, CGO tolerances."""
        return ExperimentConfig(
            k_max=self.k_max,
            n_dirs=self.shell.n_dirs,
            n_radii=self.shell.n_radii,
            t=self.t_schedule[-1],
            gamma0=self.gamma0,
            antipodal=self.shell.antipodal,
            cgo_tol=self.solver.cgo_tol,
            cgo_max_iter=self.solver.cgo_max_iter,
            workers=workers or self.solver.workers,
            seed=self.seed,
        )


def _is_complex(descriptor) -> bool:
    if isinstance(descriptor, PlaneWaveDescriptor):
        return True
    if isinstance(descriptor, SumDescriptor):
        return any(_is_complex(term) for term in descriptor.terms)
    return False


def load_scenario(path: Path) -> Scenario:
    """Parses a .toml or .json scenario; pydantic reports bad or unknown keys with their path."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".toml":
        data = tomllib.loads(text)
    elif path.suffix == ".json":
        data = json.loads(text)
    else:
        raise ScenarioError(f"Scenario files must be .toml or .json, got '{path.name}'.")
    scenario = Scenario.model_validate(data)
    logging.info(f"Loaded scenario '{scenario.name}' from {path}")
    return scenario


def normalized(scenario: Scenario) -> dict:
    return scenario.model_dump(mode="json")


def echo_scenario(scenario: Scenario, out_dir: Path) -> Path:
    """Writes the normalized scenario next to the run's artifacts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / ECHO_NAME
    path.write_text(json.dumps(normalized(scenario), indent=2, sort_keys=True))
    return path


def check_preconditions(scenario: Scenario, subcommand: str) -> None:
    """Raises the owning module's precondition error before any compute."""
    if subcommand not in SUBCOMMANDS:
        raise ScenarioError(f"Unknown subcommand '{subcommand}'; expected one of {', '.join(SUBCOMMANDS)}.")
    scenario.build_grid()
    lower, upper = scenario.shell_bounds()

    if subcommand in ("recover", "uniqueness", "verify"):
        check_schedule_growth(scenario.t_schedule[-1], scenario.grid.half_width)
        for zeta in scenario.zetas:
            radius = float(np.linalg.norm(zeta))
            if not lower < radius < upper:
                raise ShellBoundError(f"|zeta| = {radius} lies outside the open shell ({lower}, {upper}).")
            if scenario.t_schedule[0] ** 2 <= radius**2 / 4.0 - scenario.energy:
                raise SubcriticalTError(
                    f"t = {scenario.t_schedule[0]} needs t^2 > |zeta|^2/4 - lambda at zeta = {tuple(zeta)}."
                )

    if subcommand in ("uniqueness", "verify") or (subcommand == "recover" and not scenario.zeta_samples):
        # verify reruns a small shell scan at the first t; the pipelines use the last
        t = scenario.t_schedule[0] if subcommand == "verify" else scenario.t_schedule[-1]
        zetas = shell_points(scenario.energy, scenario.gamma0, scenario.shell.n_dirs, scenario.shell.n_radii)
        widest = max(float(np.linalg.norm(zeta)) for zeta in zetas)
        if not t > critical_t(widest, scenario.energy):
            raise SubcriticalTError(
                f"Shell scan at t = {t} needs t > {critical_t(widest, scenario.energy):.4g} for |zeta| = {widest:.4g}."
            )

    if subcommand == "scan-exceptional":
        z = scenario.scan.complex_z()
        if not z or not scenario.scan.rho_perp:
            raise EmptySweepError("Exceptional scan needs z samples and rho_perp samples.")
        if any(not np.isfinite(v) or v.imag == 0 for v in z):
            raise RealZError("Every scan z sample needs a finite value with Im z != 0.")
