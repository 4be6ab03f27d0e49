"""Semiclassical amplitude dynamics and fixed-point settling.

Trajectories integrate the two coupled complex amplitude equations with an
adaptive embedded Runge-Kutta pair; ``settle`` runs until the flow residual
drops below tolerance and matches the endpoint against the enumerated
steady-state branches.

Times are seconds when the drive is in SI units, multiples of the inverse
librational trap frequency in normalized mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IntegrationError
from .model import flow, flow_residual, reduce_params
from .ode import integrate_adaptive
from .physics import ModeParams
from .steady import BranchSolveResult, DriveConfig, branch_solve

MATCH_RTOL = 1e-6


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    beta_theta: np.ndarray
    beta_y: np.ndarray
    converged: bool
    matched_branch: int | None = None


@dataclass(frozen=True)
class SettleResult:
    beta_theta: complex
    beta_y: complex
    residual: float
    converged: bool
    matched_branch: int | None
    branches: BranchSolveResult


def _rhs(p):
    def rhs(_t, y):
        f_t, f_y = flow(p, complex(y[0]), complex(y[1]))
        return np.array([f_t, f_y])

    return rhs


def integrate(
    mode_params: ModeParams,
    drive: DriveConfig,
    beta0_theta: complex,
    beta0_y: complex,
    t_span: tuple[float, float],
    rel_tol: float = 1e-9,
    *,
    samples: int = 512,
    fixed_step: float | None = None,
) -> Trajectory:
    """Integrate the amplitude equations over t_span with dense sampling."""
    if not (1e-12 <= rel_tol <= 1e-3):
        raise DomainError("rel_tol must lie in [1e-12, 1e-3]")
    p = reduce_params(mode_params, drive)
    scale = p.scale if drive.units_mode == "si" else 1.0
    t0, t1 = t_span
    if t1 <= t0:
        raise DomainError("t_span must be increasing")
    t_eval = np.linspace(t0 * scale, t1 * scale, samples)
    y0 = np.array([beta0_theta, beta0_y], dtype=complex)
    try:
        ts, ys, _ = integrate_adaptive(
            _rhs(p),
            t0 * scale,
            y0,
            t1 * scale,
            rtol=rel_tol,
            atol=rel_tol * 1e-2,
            t_eval=t_eval,
            fixed_step=None if fixed_step is None else fixed_step * scale,
        )
    except IntegrationError as exc:
        t_part, y_part = exc.partial
        raise IntegrationError(
            str(exc),
            partial=Trajectory(
                times=np.asarray(t_part)[: len(y_part)] / scale,
                beta_theta=np.asarray(y_part)[:, 0] if len(y_part) else np.array([]),
                beta_y=np.asarray(y_part)[:, 1] if len(y_part) else np.array([]),
                converged=False,
            ),
        ) from exc
    bt = ys[:, 0]
    by = ys[:, 1]
    converged = flow_residual(p, complex(bt[-1]), complex(by[-1])) <= 1e-8
    return Trajectory(
        times=ts / scale,
        beta_theta=bt,
        beta_y=by,
        converged=converged,
    )


def settle(
    mode_params: ModeParams,
    drive: DriveConfig,
    beta0: tuple[complex, complex],
    max_time: float,
    *,
    residual_tol: float = 1e-9,
    rel_tol: float = 1e-10,
    branches: BranchSolveResult | None = None,
) -> SettleResult:
    """Integrate until the fixed-point residual drops below tolerance.

    The endpoint is matched to the nearest enumerated branch (relative
    occupation distance below 1e-6) or reported unmatched.  Non-convergence
    within max_time is reported, not raised.
    """
    p = reduce_params(mode_params, drive)
    scale = p.scale if drive.units_mode == "si" else 1.0
    horizon = max_time * scale
    gamma_min = max(min(p.gamma_theta, p.gamma_y), 1e-300)
    chunk = min(horizon, 20.0 / gamma_min)
    y = np.array(list(beta0), dtype=complex)
    t = 0.0
    rhs = _rhs(p)
    converged = False
    while t < horizon:
        t_next = min(t + chunk, horizon)
        _, _, y = integrate_adaptive(rhs, t, y, t_next, rtol=rel_tol, atol=rel_tol * 1e-2)
        t = t_next
        if flow_residual(p, complex(y[0]), complex(y[1])) <= residual_tol:
            converged = True
            break
    res = flow_residual(p, complex(y[0]), complex(y[1]))
    if branches is None:
        branches = branch_solve(mode_params, drive)
    matched = None
    if converged:
        nt, ny = abs(y[0]) ** 2, abs(y[1]) ** 2
        best = None
        for i, b in enumerate(branches):
            d = max(
                abs(nt - b.n_theta) / max(abs(b.n_theta), abs(nt), 1e-12),
                abs(ny - b.n_y) / max(abs(b.n_y), abs(ny), 1e-12),
            )
            if d < MATCH_RTOL and (best is None or d < best[1]):
                best = (i, d)
        matched = best[0] if best else None
    return SettleResult(
        beta_theta=complex(y[0]),
        beta_y=complex(y[1]),
        residual=res,
        converged=converged,
        matched_branch=matched,
        branches=branches,
    )
