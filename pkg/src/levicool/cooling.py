"""Synthetic cooling of the translational mode through the librational one.

At a stable operating point the cross-Kerr coupling acts as a beam-splitter
exchange between the modes.  Adiabatic elimination leaves rate equations for
the two occupations whose fixed point is available in closed form; feedback
enters as extra damping on the librational mode.

All rates (delta, gamma_fb, eta_tilde) are in the same units as the rates
stored in the given ModeParams (rad/s for derived parameters).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DomainError, PreconditionError
from .ode import integrate_adaptive
from .physics import Environment, ModeParams, TrapBeam, derive_mode_params
from .steady import STABLE, BranchSolveResult, DriveConfig, SteadyBranch, branch_solve


@dataclass(frozen=True)
class CoolingConfig:
    """Operating point and knobs for the occupation rate equations."""

    delta: float
    branch: SteadyBranch
    nbar_theta: float
    nbar_y: float
    gamma_fb: float = 0.0

    def __post_init__(self):
        if self.gamma_fb < 0:
            raise DomainError("feedback rate must be non-negative")
        if self.nbar_theta < 0 or self.nbar_y < 0:
            raise DomainError("bath occupations must be non-negative")


@dataclass(frozen=True)
class CoolingResult:
    eta_tilde: float
    n_theta_out: float
    n_y_out: float
    xi: float


def effective_detunings(
    mode_params: ModeParams, drive: DriveConfig, branch: SteadyBranch
) -> tuple[float, float, float]:
    """Amplitude-shifted detunings of the linearized dynamics and their mismatch.

    Returned in the units of ``mode_params`` rates (the drive is converted
    when given in normalized units).
    """
    if branch.stability != STABLE:
        raise PreconditionError("effective detunings are defined at a stable branch")
    scale = mode_params.omega_theta if drive.units_mode == "normalized" else 1.0
    d1 = drive.delta_1 * scale
    d2 = drive.delta_2 * scale
    nt = abs(branch.beta_theta) ** 2
    ny = abs(branch.beta_y) ** 2
    eff1 = d1 - 24.0 * mode_params.eta_theta * nt - 4.0 * mode_params.eta_thetay * (ny + 1.0)
    eff2 = d2 - 24.0 * mode_params.eta_y * ny - 4.0 * mode_params.eta_thetay * (nt + 1.0)
    return eff1, eff2, eff1 - eff2


def eta_tilde(
    mode_params: ModeParams,
    branch: SteadyBranch,
    delta: float,
    gamma_fb: float = 0.0,
) -> float:
    """Incoherent exchange rate of the eliminated beam-splitter coupling.

    Even in delta and maximal at delta = 0; feedback adds to the librational
    damping everywhere it appears.
    """
    g_t = mode_params.gamma_theta + gamma_fb
    g_sum = g_t + mode_params.gamma_y
    k = mode_params.eta_thetay**2 * branch.n_theta * branch.n_y
    return 32.0 * g_sum * k / (g_sum * g_sum + 4.0 * delta * delta)


def _exchange_ratio(gamma_t: float, gamma_y: float, delta: float, k: float) -> float:
    """Fraction of the bath-occupation gap transferred out of the y mode."""
    g_sum = gamma_t + gamma_y
    d = g_sum * g_sum + 4.0 * delta * delta
    denom = gamma_t * gamma_y * d + 64.0 * g_sum * g_sum * k
    if denom == 0.0:
        return 0.0
    return 64.0 * gamma_t * g_sum * k / denom


def steady_occupations(mode_params: ModeParams, config: CoolingConfig) -> CoolingResult:
    """Closed-form steady occupations of the coupled rate equations."""
    gamma_t = mode_params.gamma_theta + config.gamma_fb
    gamma_y = mode_params.gamma_y
    k = mode_params.eta_thetay**2 * config.branch.n_theta * config.branch.n_y
    r = _exchange_ratio(gamma_t, gamma_y, config.delta, k)
    gap = config.nbar_y - config.nbar_theta
    n_y = config.nbar_y - r * gap
    n_theta = config.nbar_theta + (gamma_y / gamma_t) * r * gap if gamma_t > 0 else config.nbar_theta
    xi = n_y / config.nbar_y if config.nbar_y > 0 else 1.0
    return CoolingResult(
        eta_tilde=eta_tilde(mode_params, config.branch, config.delta, config.gamma_fb),
        n_theta_out=n_theta,
        n_y_out=n_y,
        xi=xi,
    )


def feedback_occupation(mode_params: ModeParams, config: CoolingConfig) -> CoolingResult:
    """Steady occupations with feedback damping on the librational mode.

    The operating amplitudes are taken unchanged by the fluctuation-level
    feedback; at gamma_fb = 0 this reduces exactly to steady_occupations.
    """
    return steady_occupations(mode_params, config)


def occupancy_dynamics(
    mode_params: ModeParams,
    config: CoolingConfig,
    n_theta0: float,
    n_y0: float,
    t_span: tuple[float, float],
    *,
    samples: int = 256,
    rel_tol: float = 1e-10,
):
    """Integrate the coupled occupation rate equations.

    Returns (times, n_theta(t), n_y(t)).  The equations preserve
    non-negativity; negative excursions are asserted against, never clipped.
    """
    if n_theta0 < 0 or n_y0 < 0:
        raise DomainError("initial occupations must be non-negative")
    et = eta_tilde(mode_params, config.branch, config.delta, config.gamma_fb)
    gamma_t = mode_params.gamma_theta + config.gamma_fb
    gamma_y = mode_params.gamma_y
    nb_t, nb_y = config.nbar_theta, config.nbar_y

    def rhs(_t, n):
        nt, ny = n
        dny = -((1.0 + nb_y) * gamma_y + 2.0 * et * (1.0 + nt)) * ny + (
            nb_y * gamma_y + 2.0 * et * nt
        ) * (1.0 + ny)
        dnt = -((1.0 + nb_t) * gamma_t + 2.0 * et * (1.0 + ny)) * nt + (
            nb_t * gamma_t + 2.0 * et * ny
        ) * (1.0 + nt)
        return np.array([dnt, dny])

    t0, t1 = t_span
    t_eval = np.linspace(t0, t1, samples)
    _, ys, _ = integrate_adaptive(
        rhs,
        t0,
        np.array([n_theta0, n_y0], dtype=float),
        t1,
        rtol=rel_tol,
        atol=rel_tol * 1e-2,
        t_eval=t_eval,
    )
    assert np.all(ys >= -1e-9), "occupation rate equations produced negative occupations"
    return t_eval, ys[:, 0], ys[:, 1]


def tms_coupling(
    mode_params: ModeParams, branch: SteadyBranch, phase: float
) -> tuple[float, float]:
    """Two-mode-squeezing coupling strength at the operating point, with phase."""
    g = 4.0 * mode_params.eta_thetay * abs(branch.beta_theta * branch.beta_y)
    return g, phase


# --- operating-branch selection and parameter-axis sweeps --------------------


def select_operating_branch(
    branches: BranchSolveResult, policy: str = "lowest"
) -> SteadyBranch | None:
    """Pick the stable operating branch: lowest/highest total occupation, or
    the attractor reached from the origin ('settled' is resolved by callers)."""
    stable = branches.stable()
    if not stable:
        return None
    if policy == "lowest":
        return min(stable, key=lambda b: b.n_theta + b.n_y)
    if policy == "highest":
        return max(stable, key=lambda b: b.n_theta + b.n_y)
    raise ConfigurationError(f"unknown branch policy {policy!r}")


COOLING_COLUMNS = (
    "axis_value",
    "pressure_pa",
    "delta",
    "gamma_fb",
    "eta_tilde",
    "n_theta_out",
    "n_y_out",
    "xi",
)

COOLING_AXES = ("delta", "pressure", "omega_1", "omega_2", "gamma_fb")


@dataclass(frozen=True)
class CoolingSweepRow:
    axis_value: float
    pressure_pa: float
    delta: float
    gamma_fb: float
    eta_tilde: float
    n_theta_out: float
    n_y_out: float
    xi: float
    no_stable_branch: bool = False


def cooling_sweep(
    geometry,
    beam: TrapBeam,
    environment: Environment,
    drive: DriveConfig,
    axis: str,
    values,
    *,
    delta: float = 0.0,
    gamma_fb: float = 0.0,
    overrides: dict | None = None,
    paper_formula_thetay: bool = False,
    branch_policy: str = "lowest",
) -> list[CoolingSweepRow]:
    """Cooling figures of merit along one swept axis.

    Pressure sweeps re-derive the damping rates and re-solve the operating
    branch per point; drive-amplitude sweeps re-solve the branch; delta and
    gamma_fb sweeps keep the branch fixed.  Points without a stable branch
    are emitted as NaN rows flagged ``no_stable_branch``.
    """
    if axis not in COOLING_AXES:
        raise ConfigurationError(f"unknown cooling sweep axis {axis!r}")
    rows: list[CoolingSweepRow] = []
    base_mp = derive_mode_params(
        geometry,
        beam,
        environment,
        paper_formula_thetay=paper_formula_thetay,
        overrides=overrides,
    )

    def solve_point(mp: ModeParams, drv: DriveConfig) -> SteadyBranch | None:
        return select_operating_branch(branch_solve(mp, drv), branch_policy)

    fixed_branch = None
    if axis in ("delta", "gamma_fb"):
        fixed_branch = solve_point(base_mp, drive)

    for value in np.asarray(values, dtype=float):
        mp = base_mp
        drv = drive
        d = delta
        g_fb = gamma_fb
        pressure = environment.pressure
        if axis == "delta":
            d = value
            branch = fixed_branch
        elif axis == "gamma_fb":
            g_fb = value
            branch = fixed_branch
        elif axis == "pressure":
            pressure = value
            env = replace(environment, pressure=float(value))
            ov = dict(overrides or {})
            ov.pop("gamma_theta", None)
            ov.pop("gamma_y", None)
            mp = derive_mode_params(
                geometry,
                beam,
                env,
                paper_formula_thetay=paper_formula_thetay,
                overrides=ov or None,
            )
            branch = solve_point(mp, drv)
        else:
            drv = _with_drive(drive, axis, float(value))
            branch = solve_point(mp, drv)

        if branch is None:
            rows.append(
                CoolingSweepRow(
                    axis_value=float(value),
                    pressure_pa=pressure,
                    delta=d,
                    gamma_fb=g_fb,
                    eta_tilde=math.nan,
                    n_theta_out=math.nan,
                    n_y_out=math.nan,
                    xi=math.nan,
                    no_stable_branch=True,
                )
            )
            continue
        cfg = CoolingConfig(
            delta=d,
            branch=branch,
            nbar_theta=mp.nbar_theta,
            nbar_y=mp.nbar_y,
            gamma_fb=g_fb,
        )
        res = feedback_occupation(mp, cfg) if g_fb > 0 else steady_occupations(mp, cfg)
        rows.append(
            CoolingSweepRow(
                axis_value=float(value),
                pressure_pa=pressure,
                delta=d,
                gamma_fb=g_fb,
                eta_tilde=res.eta_tilde,
                n_theta_out=res.n_theta_out,
                n_y_out=res.n_y_out,
                xi=res.xi,
            )
        )
    return rows


def _with_drive(drive: DriveConfig, name: str, value: float) -> DriveConfig:
    kwargs = {
        "omega_1": drive.omega_1,
        "omega_2": drive.omega_2,
        "delta_1": drive.delta_1,
        "delta_2": drive.delta_2,
        "units_mode": drive.units_mode,
    }
    kwargs[name] = value
    return DriveConfig(**kwargs)
