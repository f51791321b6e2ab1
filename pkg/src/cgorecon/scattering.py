"""
Fixed-energy forward scattering for H = Delta + V (Delta the positive
Laplacian): free and perturbed Poisson operators, the free outgoing/incoming
resolvent, Lippmann-Schwinger solves, the scattering matrix and the
boundary-pairing identity.

Asymptotic amplitudes follow  u ~ exp(-i k r) g_minus / r + exp(i k r) g_plus / r,
k = sqrt(lambda).
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import special

from . import krylov
from .cgo import inner_mask
from .config import (
    ANNULUS_INNER,
    ANNULUS_OUTER,
    ASYMPTOTIC_FIT_MARGIN,
    EPS_FACTOR,
    LS_MAX_ITER,
    LS_TOL,
    QUADRATURE_EXTRA_ORDER,
    UNITARITY_TOL,
)
from .descriptors import GaussianDescriptor
from .errors import BadMagicError, GridMismatchError, NonConvergenceError, TruncatedError
from .fields import ComplexField, Grid, forward_array, inverse_array
from .harmonics import (
    SphereQuadrature,
    SphericalHarmonicCoeffs,
    conjugation_map,
    degrees,
    harmonic_count,
    sph_matrix,
    to_angles,
)
from .parallel import map_bounded
from .potential import Potential
from .utils import pairwise_sum

Sign = Literal[1, -1]
SMATRIX_MAGIC = b"CGOS"


def wavenumber(energy: float) -> float:
    if not energy > 0:
        raise ValueError(f"Energy must be positive, got {energy}.")
    return float(np.sqrt(energy))


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"Sign must be +1 or -1, got {sign}.")
    return sign


# --- PARTIAL WAVES ---


def partial_waves(points: np.ndarray, k: float, k_max: int) -> np.ndarray:
    """j_l(k|w|) Y_lm(w^) for every (l, m), shape ((k_max+1)^2, P)."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    radius = np.linalg.norm(points, axis=-1)
    polar, azimuth = to_angles(points)
    radial = np.stack([special.spherical_jn(l, k * radius) for l in range(k_max + 1)])
    return radial[degrees(k_max)] * sph_matrix(k_max, polar, azimuth)


@lru_cache(maxsize=4)
def _grid_partial_waves(grid: Grid, k: float, k_max: int) -> np.ndarray:
    waves = partial_waves(grid.physical_coordinates(), k, k_max)
    waves.flags.writeable = False
    return waves


def _poisson_factor(k: float, k_max: int, sign: int) -> np.ndarray:
    """c 4 pi (-i)^l for the outgoing-free operator, its conjugate for the other sign."""
    phase = (-1j) ** degrees(k_max)
    factor = -2j * k * phase
    return factor if sign == 1 else np.conj(factor)


def free_poisson(
    energy: float,
    g: SphericalHarmonicCoeffs,
    grid: Grid,
    sign: Sign = 1,
    method: Literal["funk_hecke", "quadrature"] = "funk_hecke",
    order: int | None = None,
) -> ComplexField:
    """
    c int exp(-i k w.omega) g(omega) d omega with c = -i k / (2 pi) for sign=+1;
    sign=-1 gives conj(c) int exp(+i k w.omega) g. The Funk-Hecke route sums
    partial waves; the quadrature route integrates directly on the sphere.
    """
    k = wavenumber(energy)
    _check_sign(sign)
    if method == "funk_hecke":
        if order is not None:
            SphereQuadrature.for_degree(g.k_max, order)
        waves = _grid_partial_waves(grid, k, g.k_max)
        samples = (_poisson_factor(k, g.k_max, sign) * g.coeffs) @ waves
        return ComplexField(grid, samples.reshape(grid.shape))

    radius = np.sqrt(3.0) * grid.half_width
    default_order = 2 * g.k_max + 2 + int(np.ceil(k * radius)) + QUADRATURE_EXTRA_ORDER
    quadrature = SphereQuadrature.for_degree(g.k_max, default_order if order is None else order)
    directions = quadrature.directions
    weighted = quadrature.weights * g.evaluate(directions)
    points = grid.physical_coordinates().reshape(-1, 3)
    constant = -1j * k / (2.0 * np.pi)
    if sign == -1:
        constant = np.conj(constant)
    samples = np.zeros(points.shape[0], dtype=complex)
    for start in range(0, directions.shape[0], 64):
        block = directions[start : start + 64]
        samples += np.exp(-1j * sign * k * (points @ block.T)) @ weighted[start : start + 64]
    return ComplexField(grid, (constant * samples).reshape(grid.shape))


def herglotz_columns(grid: Grid, k: float, k_max: int) -> np.ndarray:
    """int exp(i k w.omega) Y_lm(omega) = 4 pi i^l j_l Y_lm, one row per (l, m)."""
    phase = 4.0 * np.pi * (1j) ** degrees(k_max)
    return phase[:, None] * _grid_partial_waves(grid, k, k_max)


# --- FREE RESOLVENT ---


def _truncated_symbol(q: np.ndarray, k: float, cutoff: float) -> np.ndarray:
    """Transform of exp(i k |x|) / (4 pi |x|) restricted to |x| < cutoff."""
    sin_over_q = cutoff * np.sinc(q * cutoff / np.pi)
    numerator = 1.0 - np.exp(1j * k * cutoff) * (np.cos(q * cutoff) - 1j * k * sin_over_q)
    denominator = q**2 - k**2
    near = np.abs(q - k) < 1e-6 * k
    limit = (1j * cutoff - 1j * np.exp(1j * k * cutoff) * np.sin(k * cutoff) / k) / (2.0 * k)
    safe = np.where(near, 1.0, denominator)
    return np.where(near, limit, numerator / safe)


@lru_cache(maxsize=4)
def _truncated_kernel(half_width: float, n: int, k: float) -> np.ndarray:
    """
    Spectrum of the outgoing kernel on the doubled (2N)^3 grid, built from the
    truncated free-space kernel sampled on a 4N grid.
    """
    h = 2.0 * half_width / n
    big = 4 * n
    q1 = 2.0 * np.pi * np.fft.fftfreq(big, d=h)
    q = np.sqrt(q1[:, None, None] ** 2 + q1[None, :, None] ** 2 + q1[None, None, :] ** 2)
    cutoff = 2.0 * np.sqrt(3.0) * half_width
    weights = np.fft.ifftn(_truncated_symbol(q, k, cutoff))
    del q
    offsets = np.arange(-n, n) % big
    small = weights[np.ix_(offsets, offsets, offsets)]
    spectrum = np.fft.fftn(np.fft.ifftshift(small))
    spectrum.flags.writeable = False
    logging.debug(f"Built truncated Helmholtz kernel for N={n}, L={half_width}, k={k:.4g}")
    return spectrum


def _apply_truncated(grid: Grid, k: float, samples: np.ndarray, sign: int) -> np.ndarray:
    spectrum = _truncated_kernel(grid.half_width, grid.points_per_axis, k)
    n = grid.points_per_axis
    padded = np.zeros((2 * n,) * 3, dtype=complex)
    padded[:n, :n, :n] = samples if sign == 1 else np.conj(samples)
    result = np.fft.ifftn(spectrum * np.fft.fftn(padded))[:n, :n, :n]
    return result if sign == 1 else np.conj(result)


def _apply_absorbing(grid: Grid, energy: float, samples: np.ndarray, sign: int, eps: float, extrapolate: bool):
    d0, d1, d2 = grid.dual_axes(shifted=False)
    xi_sq = d0**2 + d1**2 + d2**2
    spectrum = forward_array(grid, samples, shifted=False)

    def damped(width: float) -> np.ndarray:
        return spectrum / (xi_sq - energy - 1j * sign * width)

    multiplied = 2.0 * damped(eps / 2.0) - damped(eps) if extrapolate else damped(eps)
    return inverse_array(grid, multiplied, shifted=False)


def default_eps(energy: float, grid: Grid) -> float:
    return wavenumber(energy) * grid.dual_spacing * EPS_FACTOR


def free_resolvent(
    energy: float,
    sign: Sign,
    f: ComplexField,
    eps: float | None = None,
    method: Literal["absorbing", "truncated"] = "absorbing",
    extrapolate: bool = True,
) -> ComplexField:
    """
    (Delta - (lambda +/- i0))^-1 f; +i0 radiates like exp(+i k |w|).
    `absorbing` damps with eps and extrapolates eps -> 0 once; `truncated`
    convolves with the free kernel cut off beyond the box diameter.
    """
    k = wavenumber(energy)
    _check_sign(sign)
    if method == "truncated":
        return f.like(_apply_truncated(f.grid, k, f.samples, sign))
    eps = default_eps(energy, f.grid) if eps is None else eps
    if not eps > 0:
        raise ValueError(f"Absorption eps must be positive, got {eps}.")
    return f.like(_apply_absorbing(f.grid, energy, f.samples, sign, eps, extrapolate))


# --- LIPPMANN-SCHWINGER ---


class LippmannSchwinger:
    """Solves (Id + R0(lambda +/- i0) V) u = b for one potential, energy and sign."""

    def __init__(self, V: Potential, energy: float, sign: Sign = 1):
        self.V = V
        self.grid = V.grid
        self.energy = energy
        self.k = wavenumber(energy)
        self.sign = _check_sign(sign)
        self.system = krylov.operator_from(self.grid.shape, lambda x: x + self.resolve(V.values * x))

    def resolve(self, samples: np.ndarray) -> np.ndarray:
        return _apply_truncated(self.grid, self.k, samples, self.sign)

    def solve(self, rhs: np.ndarray, tol: float = LS_TOL, max_iter: int = LS_MAX_ITER) -> np.ndarray:
        x, info, iterations = krylov.solve(self.system, np.ravel(rhs), tol, max_iter)
        if info != 0:
            raise NonConvergenceError(
                f"Lippmann-Schwinger solve did not converge in {iterations} iterations (lambda = {self.energy}).",
                iterations=iterations,
            )
        logging.debug(f"Lippmann-Schwinger solve converged in {iterations} iterations")
        return x.reshape(self.grid.shape)

    def residual(self, u: np.ndarray, rhs: np.ndarray) -> float:
        """Relative residual of u + R0(V u) = rhs."""
        defect = u + self.resolve(self.V.values * u) - rhs
        return float(np.linalg.norm(defect) / max(np.linalg.norm(u), np.finfo(float).tiny))


def _resolve_grid(V: Potential, grid: Grid | None) -> Grid:
    if grid is not None and grid != V.grid:
        raise GridMismatchError("Poisson grid differs from the potential's grid.")
    return V.grid


def poisson(
    V: Potential,
    energy: float,
    g: SphericalHarmonicCoeffs,
    grid: Grid | None = None,
    sign: Sign = 1,
    tol: float = LS_TOL,
    max_iter: int = LS_MAX_ITER,
) -> ComplexField:
    """
    P_+ g = u0 - R0(lambda + i0) V u with u0 the free incoming Poisson wave
    (sign=-1: the outgoing counterpart with R0(lambda - i0)).
    """
    grid = _resolve_grid(V, grid)
    u0 = free_poisson(energy, g, grid, sign)
    if V.is_zero:
        return u0
    u = LippmannSchwinger(V, energy, sign).solve(u0.samples, tol, max_iter)
    return ComplexField(grid, u)


def resolvent(
    V: Potential, energy: float, sign: Sign, f: ComplexField, tol: float = LS_TOL, max_iter: int = LS_MAX_ITER
) -> "Wavefield":
    """u = R(lambda +/- i0) f for H = Delta + V, returned with its defect (H - lambda)u = f."""
    f.require_grid(V.grid)
    solver = LippmannSchwinger(V, energy, sign)
    u = solver.solve(solver.resolve(f.samples), tol, max_iter)
    return Wavefield(ComplexField(V.grid, u), defect=f)


# --- ASYMPTOTICS AND PAIRINGS ---


def extract_asymptotics(
    u: ComplexField,
    energy: float,
    k_max: int,
    k_fit: int | None = None,
    annulus: tuple[float, float] = (ANNULUS_INNER, ANNULUS_OUTER),
) -> tuple[SphericalHarmonicCoeffs, SphericalHarmonicCoeffs]:
    """
    (g_minus, g_plus) from a least-squares fit of outgoing and incoming
    spherical Hankel expansions on the annulus r in annulus * L.
    """
    k = wavenumber(energy)
    k_fit = k_max + ASYMPTOTIC_FIT_MARGIN if k_fit is None else k_fit
    grid = u.grid
    radius = grid.radius()
    mask = (radius >= annulus[0] * grid.half_width) & (radius <= annulus[1] * grid.half_width)
    points = grid.node_coordinates()[mask] @ grid.basis
    r = np.linalg.norm(points, axis=-1)
    polar, azimuth = to_angles(points)
    Y = sph_matrix(k_fit, polar, azimuth).T
    ls = degrees(k_fit)
    j = np.stack([special.spherical_jn(l, k * r) for l in range(k_fit + 1)], axis=1)[:, ls]
    y = np.stack([special.spherical_yn(l, k * r) for l in range(k_fit + 1)], axis=1)[:, ls]
    design = np.hstack([(j + 1j * y) * Y, (j - 1j * y) * Y])
    scale = np.linalg.norm(design, axis=0)
    solution, *_ = np.linalg.lstsq(design / scale, u.samples[mask], rcond=None)
    solution = solution / scale
    n = harmonic_count(k_fit)
    outgoing = solution[:n] * (-1j) ** (ls + 1) / k
    incoming = solution[n:] * (1j) ** (ls + 1) / k
    m = harmonic_count(k_max)
    return (
        SphericalHarmonicCoeffs(energy, k_max, incoming[:m]),
        SphericalHarmonicCoeffs(energy, k_max, outgoing[:m]),
    )


@dataclass(frozen=True, eq=False)
class Wavefield:
    """A field with its known defect (H - lambda)u (None for exact eigenfunctions) and amplitudes."""

    field: ComplexField
    defect: ComplexField | None = None
    g_minus: SphericalHarmonicCoeffs | None = None
    g_plus: SphericalHarmonicCoeffs | None = None

    def with_asymptotics(self, energy: float, k_max: int) -> "Wavefield":
        g_minus, g_plus = extract_asymptotics(self.field, energy, k_max)
        return Wavefield(
            self.field,
            self.defect,
            self.g_minus if self.g_minus is not None else g_minus,
            self.g_plus if self.g_plus is not None else g_plus,
        )

    def free_defect(self, V: Potential) -> "Wavefield":
        """The same field with its defect measured against Delta instead of H: (Delta - lambda)u = d - V u."""
        d = np.zeros(self.field.grid.shape, dtype=complex) if self.defect is None else self.defect.samples
        return Wavefield(self.field, self.field.like(d - V.values * self.field.samples), self.g_minus, self.g_plus)


def poisson_wavefield(
    V: Potential, energy: float, g: SphericalHarmonicCoeffs, sign: Sign = 1, k_max: int | None = None
) -> Wavefield:
    """P_+ g with g_minus = g prescribed (sign=-1: P_- g with g_plus = g) and the other side extracted."""
    u = poisson(V, energy, g, sign=sign)
    k_max = g.k_max if k_max is None else k_max
    g_minus, g_plus = extract_asymptotics(u, energy, k_max)
    if sign == 1:
        return Wavefield(u, None, g.resized(k_max), g_plus)
    return Wavefield(u, None, g_minus, g.resized(k_max))


def _box_inner(a: ComplexField | None, b: ComplexField | None) -> complex:
    if a is None or b is None:
        return 0j
    return complex(a.grid.cell_volume * pairwise_sum(a.samples * np.conj(b.samples)))


def boundary_pairing(u_plus: Wavefield, u_minus: Wavefield, energy: float) -> tuple[complex, complex]:
    """
    lhs = <u+, (H-lambda)u-> - <(H-lambda)u+, u-> over the box;
    rhs = 2 i k (<g++, g-+> - <g+-, g-->) over the sphere.
    """
    k = wavenumber(energy)
    lhs = _box_inner(u_plus.field, u_minus.defect) - _box_inner(u_plus.defect, u_minus.field)
    rhs = 2j * k * (u_plus.g_plus.inner(u_minus.g_plus) - u_plus.g_minus.inner(u_minus.g_minus))
    return lhs, rhs


# --- SCATTERING MATRIX ---


@dataclass(frozen=True, eq=False)
class ScatteringMatrixData:
    """
    Physical S = Id + K acting on harmonic coefficients of the incident
    direction density. `boundary_map` gives the g_minus -> g_plus map.
    """

    energy: float
    k_max: int
    matrix: np.ndarray
    unitarity_defect: float
    tol_unitarity: float = UNITARITY_TOL
    calibration: dict = field(default_factory=dict)

    def boundary_map(self) -> np.ndarray:
        return self.matrix * ((-1.0) ** (degrees(self.k_max) + 1))[None, :]

    def adjoint_pair(self) -> np.ndarray:
        """The g_plus -> g_minus map of the conjugate problem: C S_+ C with C coefficient conjugation."""
        P = conjugation_map(self.k_max)
        return P @ np.conj(self.boundary_map()) @ P

    def apply(self, g: SphericalHarmonicCoeffs) -> SphericalHarmonicCoeffs:
        return g.like(self.boundary_map() @ g.resized(self.k_max).coeffs)


def born_matrix(descriptor, energy: float, k_max: int, order: int | None = None) -> np.ndarray:
    """
    First-order K: -(i k / 8 pi^2) int int conj(Y(theta)) V^(k(omega - theta)) Y(omega)
    by sphere quadrature, V^(zeta) = int V exp(i zeta.w).
    """
    k = wavenumber(energy)
    order = 2 * k_max + 2 + QUADRATURE_EXTRA_ORDER if order is None else order
    quadrature = SphereQuadrature.for_degree(k_max, order)
    directions = quadrature.directions
    Y = sph_matrix(k_max, quadrature.polar, quadrature.azimuth) * quadrature.weights
    transfer = k * (directions[None, :, :] - directions[:, None, :])
    transform = descriptor.fourier(transfer)
    return -(1j * k / (8.0 * np.pi**2)) * (np.conj(Y) @ transform @ Y.T)


def _extraction_projector(grid: Grid, k: float, k_max: int) -> np.ndarray:
    """Rows (-i)^l j_l(k|y|) conj(Y_lm(y^)) h^3, projecting V u onto outgoing harmonics."""
    phase = (-1j) ** degrees(k_max)
    return phase[:, None] * np.conj(_grid_partial_waves(grid, k, k_max)) * grid.cell_volume


def _transition_matrix(
    V: Potential, energy: float, k_max: int, born: bool, tol: float, max_iter: int, workers: int | None
) -> np.ndarray:
    grid = V.grid
    k = wavenumber(energy)
    n = harmonic_count(k_max)
    incident = herglotz_columns(grid, k, k_max)
    projector = _extraction_projector(grid, k, k_max)
    solver = LippmannSchwinger(V, energy, 1)

    def column(index: int) -> np.ndarray:
        u0 = incident[index].reshape(grid.shape)
        u = u0 if born else solver.solve(u0, tol, max_iter)
        return projector @ (V.values * u).ravel()

    columns = map_bounded(column, range(n), workers, desc="S-matrix columns")
    return np.column_stack(columns)


@lru_cache(maxsize=8)
def far_field_constant(grid: Grid, energy: float, k_max: int) -> tuple[complex, complex, str]:
    """
    Least-squares fit of kappa so that kappa * (Born-limit extraction) of a
    reference Gaussian equals its analytic Born matrix. Returns (fitted,
    analytic, reference descriptor JSON).
    """
    k = wavenumber(energy)
    sigma = min(max(1.0, 2.0 * grid.spacing), grid.half_width / 4.0)
    reference = GaussianDescriptor(amplitude=1.0, sigma=sigma)
    V_ref = Potential.from_descriptor(reference, grid, gamma0=1.0)
    extracted = _transition_matrix(V_ref, energy, k_max, True, LS_TOL, LS_MAX_ITER, 1)
    analytic = born_matrix(reference, energy, k_max)
    fitted = complex(np.vdot(extracted, analytic) / np.vdot(extracted, extracted))
    return fitted, complex(-1j * k / (2.0 * np.pi)), reference.model_dump_json()


def scattering_matrix(
    V: Potential,
    energy: float,
    k_max: int,
    tol: float = LS_TOL,
    max_iter: int = LS_MAX_ITER,
    workers: int | None = None,
) -> ScatteringMatrixData:
    """S = Id + kappa T with kappa calibrated against an analytic Born matrix."""
    kappa, analytic, reference = far_field_constant(V.grid, energy, k_max)
    identity = np.eye(harmonic_count(k_max), dtype=complex)
    matrix = identity + kappa * _transition_matrix(V, energy, k_max, False, tol, max_iter, workers)
    defect = float(np.linalg.norm(matrix.conj().T @ matrix - identity, 2))
    deviation = abs(kappa - analytic) / abs(analytic)
    logging.info(f"S-matrix k_max={k_max}, lambda={energy}: unitarity defect {defect:.2e}, kappa deviation {deviation:.2e}")
    calibration = {
        "kappa": [kappa.real, kappa.imag],
        "kappa_analytic": [analytic.real, analytic.imag],
        "kappa_relative_deviation": deviation,
        "reference": json.loads(reference),
    }
    return ScatteringMatrixData(energy, k_max, matrix, defect, UNITARITY_TOL, calibration)


def scattering_pairing(
    S: ScatteringMatrixData, S_prime: ScatteringMatrixData, g_plus: SphericalHarmonicCoeffs, g_minus: SphericalHarmonicCoeffs
) -> complex:
    """2 i k (<S_+ g+, g-> - <g+, S'_- g->) for the two-potential pairing."""
    k = wavenumber(S.energy)
    a = g_plus.resized(S.k_max)
    b = g_minus.resized(S.k_max)
    first = a.like(S.boundary_map() @ a.coeffs).inner(b)
    second = a.inner(b.like(S_prime.adjoint_pair() @ b.coeffs))
    return 2j * k * (first - second)


def write_smatrix(path: Path, data: ScatteringMatrixData) -> Path:
    """Magic, u32 header length, JSON header, then the matrix as little-endian complex128."""
    header = json.dumps(
        {
            "energy": data.energy,
            "k_max": data.k_max,
            "ordering": "(k,m) lexicographic, m from -k to k",
            "convention": "physical S = Id + K on incident direction densities",
            "unitarity_defect": data.unitarity_defect,
            "tol_unitarity": data.tol_unitarity,
            "calibration": data.calibration,
        },
        sort_keys=True,
    ).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    block = np.ascontiguousarray(data.matrix, dtype="<c16").tobytes()
    path.write_bytes(SMATRIX_MAGIC + struct.pack("<I", len(header)) + header + block)
    return path


def read_smatrix(path: Path) -> ScatteringMatrixData:
    raw = Path(path).read_bytes()
    if len(raw) < len(SMATRIX_MAGIC):
        raise TruncatedError(f"{path} is shorter than the S-matrix magic.")
    if raw[:4] != SMATRIX_MAGIC:
        raise BadMagicError(f"{path} is not an S-matrix file (magic {raw[:4]!r}).")
    if len(raw) < 8:
        raise TruncatedError(f"{path} ends inside the S-matrix header.")
    (length,) = struct.unpack_from("<I", raw, 4)
    if len(raw) < 8 + length:
        raise TruncatedError(f"{path} ends inside the S-matrix header.")
    header = json.loads(raw[8 : 8 + length])
    n = harmonic_count(header["k_max"])
    expected = 8 + length + 16 * n * n
    if len(raw) < expected:
        raise TruncatedError(f"{path} holds {len(raw)} bytes, expected {expected}.")
    matrix = np.frombuffer(raw, dtype="<c16", count=n * n, offset=8 + length).reshape(n, n).astype(complex)
    return ScatteringMatrixData(
        header["energy"], header["k_max"], matrix, header["unitarity_defect"], header["tol_unitarity"], header["calibration"]
    )


# --- DENSITY ---


@dataclass(frozen=True)
class DensityResult:
    k_max: int
    residual: float
    rank: int
    columns: int


def poisson_basis(V: Potential, energy: float, k_max: int, workers: int | None = None) -> list[ComplexField]:
    """P_+ Y_km for every (k, m) up to k_max, in lexicographic order."""

    def member(index: int) -> ComplexField:
        g = SphericalHarmonicCoeffs(energy, k_max, np.eye(harmonic_count(k_max))[index])
        return poisson(V, energy, g)

    return map_bounded(member, range(harmonic_count(k_max)), workers, desc="Poisson basis")


def projection_residual(
    target: ComplexField, basis: list[ComplexField], k_max: int, gamma_prime: float
) -> DensityResult:
    """
    Relative residual of the weighted least-squares projection of `target` on
    the inner half-box onto the first (k_max+1)^2 basis fields.
    """
    grid = target.grid
    mask = inner_mask(grid)
    weight = np.exp(-gamma_prime * grid.bracket())[mask]
    columns = basis[: harmonic_count(k_max)]
    design = np.column_stack([b.samples[mask] * weight for b in columns])
    rhs = target.samples[mask] * weight
    coefficients, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=1e-12)
    if rank < design.shape[1]:
        logging.warning(f"Projection basis rank {rank} below {design.shape[1]} columns at k_max={k_max}")
    norm = np.linalg.norm(rhs)
    residual = 0.0 if norm == 0 else float(np.linalg.norm(design @ coefficients - rhs) / norm)
    return DensityResult(k_max, residual, int(rank), design.shape[1])


def density_residual(
    V: Potential,
    energy: float,
    target,
    k_max: int,
    gamma_prime: float | None = None,
    basis: list[ComplexField] | None = None,
    workers: int | None = None,
) -> DensityResult:
    """
    How well span{P_+ Y_km : k <= k_max} reproduces a CGO eigenfunction (or any
    field) on the inner half-box in the exp(gamma' <w>) weighted norm.
    """
    gamma_prime = V.gamma0 / 2.0 if gamma_prime is None else gamma_prime
    field_ = target.eigenfunction("inner") if hasattr(target, "eigenfunction") else target
    field_.require_grid(V.grid)
    if basis is None or len(basis) < harmonic_count(k_max):
        basis = poisson_basis(V, energy, k_max, workers)
    return projection_residual(field_, basis, k_max, gamma_prime)
