"""Steady-state branch enumeration and stability classification.

For each translational occupation n_y the librational fixed-point equation
is a cubic with a closed-form solution; substituting each real non-negative
root into the translational equation leaves a one-dimensional residual in
n_y which is scanned on a dense hybrid linear/log grid and polished by
bisection.  This is exhaustive and derivative-free, which keeps it robust
next to folds where Newton iterations stall.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, PreconditionError
from .model import (
    SolverParams,
    jacobian,
    nonlinear_detunings,
    occupation_roots_grid,
    occupation_roots_scalar,
    reduce_params,
    steady_residuals,
)
from .physics import ModeParams

STABLE = "stable"
UNSTABLE = "unstable"
MARGINAL = "marginal"

MARGINAL_TOL = 1e-9  # |max Re eig| below this (solver units) counts as marginal
DEDUP_RTOL = 1e-8
RESIDUAL_TOL = 1e-10
DEFAULT_GRID_POINTS = 4096
MAX_DOUBLINGS = 12


@dataclass(frozen=True)
class DriveConfig:
    """Drive amplitudes and effective detunings for both modes.

    ``units_mode`` is "si" (rad/s) or "normalized" (multiples of the
    librational trap frequency).
    """

    omega_1: float
    omega_2: float
    delta_1: float
    delta_2: float
    units_mode: str = "si"

    def __post_init__(self):
        if self.omega_1 < 0 or self.omega_2 < 0:
            raise DomainError("drive amplitudes must be non-negative")
        if self.units_mode not in ("si", "normalized"):
            raise DomainError(f"units_mode must be 'si' or 'normalized', got {self.units_mode!r}")


@dataclass(frozen=True)
class SteadyBranch:
    """One root of the coupled fixed-point system."""

    n_theta: float
    n_y: float
    beta_theta: complex
    beta_y: complex
    stability: str
    jacobian_eigenvalues: tuple[complex, ...]
    residual: float


@dataclass(frozen=True)
class BranchSolveResult:
    """Branches sorted by (n_theta, n_y), plus any resolution warnings."""

    branches: tuple[SteadyBranch, ...]
    warnings: tuple[str, ...] = ()

    def __iter__(self):
        return iter(self.branches)

    def __len__(self):
        return len(self.branches)

    def __getitem__(self, i):
        return self.branches[i]

    def stable(self) -> tuple[SteadyBranch, ...]:
        return tuple(b for b in self.branches if b.stability == STABLE)


@dataclass(frozen=True)
class AxisSpec:
    """One swept drive parameter: name in {omega_1, omega_2, delta_1, delta_2}."""

    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in ("omega_1", "omega_2", "delta_1", "delta_2"):
            raise ConfigurationError(f"unknown sweep axis {self.name!r}")
        if self.count < 1:
            raise ConfigurationError("axis count must be >= 1")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class MultistabilityMap:
    """Row-major grid of branch lists over two swept parameters."""

    axis_1: AxisSpec
    axis_2: AxisSpec
    values_1: np.ndarray
    values_2: np.ndarray
    cells: tuple[tuple[SteadyBranch, ...], ...]
    warnings: tuple[str, ...] = ()

    def branch_counts(self) -> np.ndarray:
        counts = np.fromiter((len(c) for c in self.cells), dtype=np.int64)
        return counts.reshape(self.values_1.size, self.values_2.size)

    def cell(self, i: int, j: int) -> tuple[SteadyBranch, ...]:
        return self.cells[i * self.values_2.size + j]


def _classify_from_eigs(eigs: np.ndarray) -> str:
    top = float(np.max(eigs.real))
    if abs(top) < MARGINAL_TOL:
        return MARGINAL
    return STABLE if top < 0 else UNSTABLE


def _recover_betas(p: SolverParams, n_theta: float, n_y: float):
    dnl_1, dnl_2 = nonlinear_detunings(p, n_theta, n_y)
    bt = 0.0j if p.omega_1 == 0.0 else (-0.5j * p.omega_1) / (0.5 * p.gamma_theta + 1j * dnl_1)
    by = 0.0j if p.omega_2 == 0.0 else (-0.5j * p.omega_2) / (0.5 * p.gamma_y + 1j * dnl_2)
    return complex(bt), complex(by)


def _make_branch(p: SolverParams, n_theta: float, n_y: float) -> SteadyBranch:
    beta_t, beta_y = _recover_betas(p, n_theta, n_y)
    r1, r2 = steady_residuals(p, n_theta, n_y)
    eigs = np.linalg.eigvals(jacobian(p, beta_t, beta_y))
    eigs = eigs[np.lexsort((eigs.imag, eigs.real))]
    return SteadyBranch(
        n_theta=n_theta,
        n_y=n_y,
        beta_theta=beta_t,
        beta_y=beta_y,
        stability=_classify_from_eigs(eigs),
        jacobian_eigenvalues=tuple(complex(e) * p.scale for e in eigs),
        residual=max(r1, r2),
    )


def _theta_roots(p: SolverParams, n_y: float) -> list[float]:
    a = p.delta_1 - 12.0 * p.eta_theta - 4.0 * p.eta_thetay * n_y
    return occupation_roots_scalar(a, 12.0 * p.eta_theta, p.gamma_theta, 0.25 * p.omega_1**2)


def _y_residual(p: SolverParams, n_theta: float, n_y: float) -> float:
    dnl_2 = p.delta_2 - 12.0 * p.eta_y * (n_y + 1.0) - 4.0 * p.eta_thetay * n_theta
    return (0.25 * p.gamma_y**2 + dnl_2 * dnl_2) * n_y - 0.25 * p.omega_2**2


def _scan_grid(n_max: float, points: int) -> np.ndarray:
    lin = np.linspace(0.0, n_max, points // 2 + 1)
    log = np.geomspace(n_max * 1e-15, n_max, points // 2)
    return np.unique(np.concatenate([lin, log]))


def _bisect_root(p: SolverParams, k: int, lo: float, hi: float, g_lo: float) -> float | None:
    """Polish the k-th cubic-branch residual g_k on a sign-change bracket.

    Illinois variant of regula falsi with a bisection fallback; the bracket
    property is kept throughout, so folds inside the interval degrade speed,
    never correctness.
    """

    def g_at(ny: float) -> float | None:
        roots = _theta_roots(p, ny)
        if k >= len(roots):
            return None
        return _y_residual(p, roots[k], ny)

    g_hi = g_at(hi)
    f_lo, f_hi = g_lo, g_hi
    side = 0
    for _ in range(80):
        if hi - lo <= 1e-13 * max(hi, 1e-12):
            break
        if f_hi is None or f_lo is None or f_hi == f_lo:
            mid = 0.5 * (lo + hi)
        else:
            mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
            if not (lo < mid < hi):
                mid = 0.5 * (lo + hi)
        g_mid = g_at(mid)
        if g_mid is None:
            hi = 0.5 * (lo + hi)  # cubic fold crossed; fall back toward lo
            f_hi = g_at(hi)
            side = 0
            continue
        if g_mid == 0.0:
            return mid
        if (g_mid < 0) == (f_lo is not None and f_lo < 0):
            lo, f_lo = mid, g_mid
            if side == -1 and f_hi is not None:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi = mid, g_mid
            if side == 1 and f_lo is not None:
                f_lo *= 0.5
            side = 1
    return 0.5 * (lo + hi)


def branch_solve(
    mode_params: ModeParams,
    drive: DriveConfig,
    *,
    grid_points: int = DEFAULT_GRID_POINTS,
    n_max: float | None = None,
) -> BranchSolveResult:
    """Enumerate all fixed points (n_theta >= 0, n_y >= 0) of the coupled system.

    Zero drive on both modes returns exactly the origin branch.  A residual
    tolerance failure or an even branch count produces a warning rather than
    silent truncation.
    """
    if mode_params.gamma_theta <= 0 or mode_params.gamma_y <= 0:
        raise PreconditionError("branch solving requires positive damping rates")
    p = reduce_params(mode_params, drive)
    return _branch_solve_reduced(p, grid_points=grid_points, n_max=n_max)


def _branch_solve_reduced(
    p: SolverParams, *, grid_points: int = DEFAULT_GRID_POINTS, n_max: float | None = None
) -> BranchSolveResult:
    warnings: list[str] = []
    if p.omega_1 == 0.0 and p.omega_2 == 0.0:
        return BranchSolveResult(branches=(_make_branch(p, 0.0, 0.0),))

    if n_max is None:
        o = max(p.omega_1, p.omega_2)
        g = min(p.gamma_theta, p.gamma_y)
        n_max = 4.0 * o * o / (g * g)
    pairs: list[tuple[float, float]] = []
    for _ in range(MAX_DOUBLINGS + 1):
        pairs = _scan_for_roots(p, n_max, grid_points)
        if all(ny <= n_max / 10.0 for _, ny in pairs):
            break
        n_max *= 2.0
    else:
        warnings.append("n_y ceiling kept growing; top-decade roots may be unreliable")

    # Deduplicate on both occupations.
    pairs.sort()
    unique: list[tuple[float, float]] = []
    for nt, ny in pairs:
        dup = False
        for ut, uy in unique:
            if _close(nt, ut) and _close(ny, uy):
                dup = True
                break
        if not dup:
            unique.append((nt, ny))

    branches = []
    for nt, ny in unique:
        b = _make_branch(p, nt, ny)
        if b.residual <= RESIDUAL_TOL:
            branches.append(b)
        else:
            warnings.append(
                f"candidate root ({nt:.6g}, {ny:.6g}) rejected with residual {b.residual:.2e}"
            )
    branches.sort(key=lambda b: (b.n_theta, b.n_y))
    if len(branches) % 2 == 0:
        warnings.append(
            f"even branch count ({len(branches)}): a fold pair may be unresolved "
            "at the current scan resolution"
        )
    return BranchSolveResult(branches=tuple(branches), warnings=tuple(warnings))


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= DEDUP_RTOL * max(abs(x), abs(y)) + 1e-15


def _scan_for_roots(p: SolverParams, n_max: float, grid_points: int) -> list[tuple[float, float]]:
    grid = _scan_grid(n_max, grid_points)
    a = p.delta_1 - 12.0 * p.eta_theta - 4.0 * p.eta_thetay * grid
    roots, count = occupation_roots_grid(a, 12.0 * p.eta_theta, p.gamma_theta, 0.25 * p.omega_1**2)
    found: list[tuple[float, float]] = []
    for k in range(3):
        nt_k = roots[:, k]
        valid = ~np.isnan(nt_k) & (nt_k >= -1e-14)
        if not np.any(valid):
            continue
        nt_k = np.where(valid, np.maximum(nt_k, 0.0), np.nan)
        dnl_2 = p.delta_2 - 12.0 * p.eta_y * (grid + 1.0) - 4.0 * p.eta_thetay * nt_k
        g = (0.25 * p.gamma_y**2 + dnl_2 * dnl_2) * grid - 0.25 * p.omega_2**2
        # Exact zeros at grid nodes (e.g. zero translational drive at n_y = 0).
        zero_hits = valid & (g == 0.0)
        for i in np.nonzero(zero_hits)[0]:
            found.append((float(nt_k[i]), float(grid[i])))
        # Sign changes within runs of constant root count (continuous g_k).
        ok = valid[:-1] & valid[1:] & (count[:-1] == count[1:])
        flips = ok & ((g[:-1] < 0) != (g[1:] < 0)) & (g[:-1] != 0.0) & (g[1:] != 0.0)
        for i in np.nonzero(flips)[0]:
            ny = _bisect_root(p, k, float(grid[i]), float(grid[i + 1]), float(g[i]))
            if ny is None:
                continue
            th = _theta_roots(p, ny)
            if k < len(th):
                found.append((th[k], ny))
    return found


def classify_stability(
    branch: SteadyBranch, mode_params: ModeParams, drive: DriveConfig
) -> tuple[str, tuple[complex, ...]]:
    """Classify a converged branch by the eigenvalues of the 4x4 flow Jacobian."""
    p = reduce_params(mode_params, drive)
    r1, r2 = steady_residuals(p, branch.n_theta, branch.n_y)
    if max(r1, r2) > 100 * RESIDUAL_TOL:
        raise PreconditionError(
            f"branch residual {max(r1, r2):.2e} too large for stability classification"
        )
    eigs = np.linalg.eigvals(jacobian(p, branch.beta_theta, branch.beta_y))
    eigs = eigs[np.lexsort((eigs.imag, eigs.real))]
    return _classify_from_eigs(eigs), tuple(complex(e) * p.scale for e in eigs)


# --- parameter-plane sweeps -------------------------------------------------


def _apply_axis(drive: DriveConfig, name: str, value: float) -> DriveConfig:
    kwargs = {
        "omega_1": drive.omega_1,
        "omega_2": drive.omega_2,
        "delta_1": drive.delta_1,
        "delta_2": drive.delta_2,
        "units_mode": drive.units_mode,
    }
    kwargs[name] = value
    return DriveConfig(**kwargs)


def _sweep_cell(job) -> tuple[tuple[SteadyBranch, ...], tuple[str, ...]]:
    p, grid_points = job
    result = _branch_solve_reduced(p, grid_points=grid_points)
    return result.branches, result.warnings


def sweep(
    mode_params: ModeParams,
    drive: DriveConfig,
    axis_1: AxisSpec,
    axis_2: AxisSpec,
    *,
    workers: int = 1,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> MultistabilityMap:
    """Branch-solve every cell of a 2-D drive-parameter grid (row-major).

    Output ordering is deterministic and independent of the worker count.
    """
    if axis_1.count < 1 or axis_2.count < 1:
        raise ConfigurationError("sweep axes must have at least one point")
    v1 = axis_1.values()
    v2 = axis_2.values()
    jobs = []
    for x1 in v1:
        for x2 in v2:
            d = _apply_axis(_apply_axis(drive, axis_1.name, float(x1)), axis_2.name, float(x2))
            jobs.append((reduce_params(mode_params, d), grid_points))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_sweep_cell, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        raw = [_sweep_cell(j) for j in jobs]

    cells = []
    warnings: list[str] = []
    for idx, (branches, cell_warnings) in enumerate(raw):
        if cell_warnings:
            i, j = divmod(idx, v2.size)
            warnings.extend(f"cell ({i},{j}): {w}" for w in cell_warnings)
        cells.append(branches)
    return MultistabilityMap(
        axis_1=axis_1,
        axis_2=axis_2,
        values_1=v1,
        values_2=v2,
        cells=tuple(cells),
        warnings=tuple(warnings),
    )
