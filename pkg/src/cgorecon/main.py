import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from . import config
from .acceptance import CHECKS, run_suite
from .cgo import amplitude_sweep, default_weight_gamma, exceptional_scan, solve_cgo
from .errors import NonConvergenceError
from .faddeev import ComplexMomentum, norm_decay_probe
from .field_io import write_field_file
from .fields import WeightedNormSpec, weighted_norm
from .plotdata import emit_plotdata
from .recon import (
    RecoveryResult,
    ShellPoint,
    ShellRecovery,
    lowfreq_complete,
    recover_fourier,
    rho_param,
    shell_scan,
    uniqueness_experiment,
)
from .scattering import scattering_matrix, write_smatrix
from .scenario import SUBCOMMANDS, Scenario, check_preconditions, echo_scenario, load_scenario
from .utils import complex_pair

UTC = timezone.utc  # datetime.UTC is Python 3.11+

logging.basicConfig(level=config.LOG_LEVEL, format="%(asctime)s - %(levelname)s - %(message)s")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# --- LOGGING SETUP ---
# One JSON line per run, on the console and in logs/runs.log
run_logger = logging.getLogger("run_log")
run_logger.setLevel(logging.INFO)
run_logger.propagate = False

console_handler = logging.StreamHandler()
console_handler.setFormatter(logging.Formatter("%(message)s"))
run_logger.addHandler(console_handler)

file_handler = logging.FileHandler(config.RUN_LOG_FILE)
file_handler.setFormatter(logging.Formatter("%(message)s"))
run_logger.addHandler(file_handler)


# --- SUBCOMMANDS ---


def run_forward(scenario: Scenario, out_dir: Path, args: argparse.Namespace) -> int:
    V, V_prime = scenario.potentials()
    solver = scenario.solver
    targets = [("smatrix", V)]
    if scenario.potential_prime is not None:
        targets.append(("smatrix_prime", V_prime))
    for name, potential in targets:
        S = scattering_matrix(potential, scenario.energy, scenario.k_max, solver.ls_tol, solver.ls_max_iter, solver.workers)
        write_smatrix(out_dir / f"{name}.cgos", S)
        emit_plotdata(S, out_dir, name)
        if S.unitarity_defect > S.tol_unitarity:
            logging.warning(f"{name}: unitarity defect {S.unitarity_defect:.2e} exceeds {S.tol_unitarity:.0e}")
    return EXIT_OK


def run_cgo(scenario: Scenario, out_dir: Path, args: argparse.Namespace) -> int:
    grid = scenario.build_grid(scenario.zeta_frame())
    V, _ = scenario.potentials(grid)
    zeta = scenario.zetas[0] if scenario.zeta_samples else np.zeros(3)
    spec = WeightedNormSpec(default_weight_gamma(scenario.gamma0))
    momenta: list[ComplexMomentum] = []
    rows = []
    for index, t in enumerate(scenario.t_schedule):
        rho, _ = rho_param(zeta, scenario.energy, t, grid.basis[0], grid.basis[1])
        solution = solve_cgo(
            V, rho, scenario.solver.cgo_tol, scenario.solver.cgo_max_iter, scenario.scan.probes, scenario.seed
        )
        q1, q2 = rho.perp_components(grid)
        meta = {
            "t": t,
            "z": complex_pair(rho.z),
            "rho_perp": [q1, q2],
            "frame": grid.basis.tolist(),
            "residual": solution.residual,
            "iterations": solution.iterations,
            "indicator": solution.indicator,
        }
        write_field_file(out_dir / f"cgo_{index}.cgof", solution.v, meta)
        row = {k: meta[k] for k in ("t", "residual", "iterations", "indicator")}
        rows.append({**row, "weighted_norm": weighted_norm(solution.v, spec)})
        momenta.append(rho)
    emit_plotdata(pd.DataFrame(rows, columns=["t", "residual", "iterations", "indicator", "weighted_norm"]), out_dir, "cgo")
    samples = norm_decay_probe(grid, momenta, spec.gamma, seed=scenario.seed, workers=scenario.solver.workers)
    emit_plotdata(samples, out_dir, "norm_sweep")
    return EXIT_OK


def run_scan(scenario: Scenario, out_dir: Path, args: argparse.Namespace) -> int:
    V, _ = scenario.potentials()
    spec = scenario.scan
    z_samples = spec.complex_z()
    scan = exceptional_scan(V, z_samples, spec.rho_perp, spec.threshold, spec.probes, scenario.seed, scenario.solver.workers)
    emit_plotdata(scan, out_dir, "exceptional_scan")
    if spec.amplitude_factors:
        rho = ComplexMomentum.on_grid(V.grid, z_samples[0], spec.rho_perp[0])
        sweep = amplitude_sweep(V, rho, spec.amplitude_factors, spec.probes, scenario.seed, scenario.solver.workers)
        emit_plotdata(pd.DataFrame(sweep, columns=["factor", "indicator"]), out_dir, "amplitude_sweep")
    return EXIT_OK


def _recover_samples(scenario: Scenario, V, V_prime) -> list[tuple[RecoveryResult, ShellPoint]]:
    """Full t-schedule at each scenario zeta; convergence tables go next to the shell CSV."""
    points = []
    for zeta in scenario.zetas:
        result = recover_fourier(
            V,
            V_prime,
            scenario.energy,
            zeta,
            scenario.t_schedule,
            scenario.solver.cgo_tol,
            scenario.solver.cgo_max_iter,
            screen=True,
            seed=scenario.seed,
        )
        last = result.samples[-1]
        points.append((result, ShellPoint(result.zeta, last.value, last.t, last.quadrature_error)))
    return points


def run_recover(scenario: Scenario, out_dir: Path, args: argparse.Namespace) -> int:
    V, V_prime = scenario.potentials()
    solver = scenario.solver
    if scenario.zeta_samples:
        recovered = _recover_samples(scenario, V, V_prime)
        for index, (result, _) in enumerate(recovered):
            emit_plotdata(result, out_dir, f"convergence_{index}")
        shell = ShellRecovery([point for _, point in recovered], scenario.shell_bounds())
    else:
        shell = shell_scan(
            V,
            V_prime,
            scenario.energy,
            scenario.shell.n_dirs,
            scenario.shell.n_radii,
            scenario.t_schedule[-1],
            gamma0=scenario.gamma0,
            antipodal=scenario.shell.antipodal,
            tol=solver.cgo_tol,
            max_iter=solver.cgo_max_iter,
            workers=solver.workers,
        )
    emit_plotdata(shell, out_dir, "shell")
    if not shell.successful():
        raise NonConvergenceError(f"All {len(shell.points)} shell points failed.")
    if scenario.shell.antipodal:
        logging.info(f"Conjugate-symmetry defect over antipodal pairs: {shell.symmetry_defect():.3e}")

    spec = scenario.completion
    completion = lowfreq_complete(
        shell,
        scenario.gamma0,
        ball_radius=spec.ball_radius,
        reg_weight=spec.reg_weight,
        n_basis=spec.n_basis,
        angular_degree=spec.angular_degree,
        ball_points=spec.ball_points,
    )
    emit_plotdata(completion, out_dir, "completion")
    logging.info(f"Completed transform at zeta = 0: {completion.value_at(np.zeros(3)):.6g}")
    return EXIT_OK


def run_uniqueness(scenario: Scenario, out_dir: Path, args: argparse.Namespace) -> int:
    V, V_prime = scenario.potentials()
    report = uniqueness_experiment(V, V_prime, scenario.energy, scenario.experiment_config())
    emit_plotdata(report, out_dir, "uniqueness")
    verdict = "equal" if report.s_equal else "different"
    logging.info(f"S-matrices {verdict}; shell reconstruction {'agrees' if report.consistent else 'DISAGREES'}")
    return EXIT_OK


def run_verify(scenario: Scenario, out_dir: Path, args: argparse.Namespace) -> int:
    report = run_suite(scenario, only=args.check, workers=scenario.solver.workers)
    emit_plotdata(report, out_dir, "verify")
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        logging.error(f"Verification failed: {names}")
        return EXIT_VERIFY_FAILED
    logging.info(f"All {len(report.checks)} checks passed in {report.elapsed_seconds:.1f}s")
    return EXIT_OK


COMMANDS = {
    "forward": run_forward,
    "cgo": run_cgo,
    "scan-exceptional": run_scan,
    "recover": run_recover,
    "uniqueness": run_uniqueness,
    "verify": run_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, required=True, help="Path to a .toml or .json scenario file.")
    common.add_argument("--out", type=Path, default=None, help="Output directory (default: $CGO_OUTPUT_ROOT/<name>).")
    common.add_argument("--workers", type=int, default=None, help="Worker threads for sweeps.")
    common.add_argument("--seed", type=int, default=None, help="Overrides the scenario seed.")

    parser = argparse.ArgumentParser(
        prog="cgo-recon", description="CGO solutions, scattering matrices and shell reconstruction of potentials."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, parents=[common])
        if name == "verify":
            sub.add_argument("--check", action="append", choices=list(CHECKS), help="Run only this check (repeatable).")
    return parser


def _log_run(args: argparse.Namespace, scenario: Scenario | None, status: int, started: datetime) -> None:
    record = {
        "timestamp": started.isoformat(),
        "subcommand": args.command,
        "scenario": None if scenario is None else scenario.name,
        "seed": None if scenario is None else scenario.seed,
        "workers": None if scenario is None else scenario.solver.workers,
        "exit_status": status,
        "elapsed_seconds": (datetime.now(UTC) - started).total_seconds(),
    }
    run_logger.info(json.dumps(record))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = datetime.now(UTC)
    scenario = None
    try:
        scenario = load_scenario(args.scenario).with_overrides(args.out, args.workers, args.seed)
        check_preconditions(scenario, args.command)
        out_dir = scenario.output_path()
        echo_scenario(scenario, out_dir)
        logging.info(f"Running '{args.command}' for scenario '{scenario.name}' into {out_dir}")
        status = COMMANDS[args.command](scenario, out_dir, args)
    except np.linalg.LinAlgError as e:
        logging.error(f"Numerical failure (LinAlgError): {e}", exc_info=True)
        status = EXIT_NUMERICAL
    except (ValueError, OSError) as e:
        logging.error(f"Configuration error: {e}")
        status = EXIT_CONFIG
    except NonConvergenceError as e:
        logging.error(f"Numerical failure: {e} (iterations {e.iterations}, residual {e.residual:.3e}, t {e.t})")
        status = EXIT_NUMERICAL
    except RuntimeError as e:
        logging.error(f"Numerical failure ({type(e).__name__}): {e}", exc_info=True)
        status = EXIT_NUMERICAL
    _log_run(args, scenario, status, started)
    return status


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
