"""Shared mean-field model: reduced parameters, flow, Jacobian, cubic roots.

The two complex mode amplitudes obey

    d beta_t/dt = -(gamma_t/2 + i Dnl_t) beta_t - i Omega_1/2
    d beta_y/dt = -(gamma_y/2 + i Dnl_y) beta_y - i Omega_2/2

with the amplitude-dependent detunings

    Dnl_t = delta_1 - 12 eta_t (|beta_t|^2 + 1) - 4 eta_ty |beta_y|^2
    Dnl_y = delta_2 - 12 eta_y (|beta_y|^2 + 1) - 4 eta_ty |beta_t|^2

so that fixed-point occupations n = |beta|^2 solve

    (gamma^2/4 + Dnl^2) n = Omega^2/4        (one equation per mode).

All quantities here are in solver units: everything divided by the
librational trap frequency, which conditions the numbers and makes the
"normalized" drive convention the native one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .physics import ModeParams


@dataclass(frozen=True)
class SolverParams:
    """Rates, nonlinearities, and drive in solver units; ``scale`` converts back."""

    gamma_theta: float
    gamma_y: float
    eta_theta: float
    eta_y: float
    eta_thetay: float
    delta_1: float
    delta_2: float
    omega_1: float
    omega_2: float
    scale: float  # rad/s per solver unit


def reduce_params(mode_params: ModeParams, drive) -> SolverParams:
    """Combine ModeParams (SI) and a DriveConfig into solver units."""
    scale = mode_params.omega_theta
    if scale <= 0:
        scale = mode_params.omega_y if mode_params.omega_y > 0 else 1.0
    if drive.units_mode == "normalized":
        d1, d2 = drive.delta_1, drive.delta_2
        o1, o2 = drive.omega_1, drive.omega_2
    elif drive.units_mode == "si":
        d1, d2 = drive.delta_1 / scale, drive.delta_2 / scale
        o1, o2 = drive.omega_1 / scale, drive.omega_2 / scale
    else:
        raise DomainError(f"unknown units_mode {drive.units_mode!r}")
    return SolverParams(
        gamma_theta=mode_params.gamma_theta / scale,
        gamma_y=mode_params.gamma_y / scale,
        eta_theta=mode_params.eta_theta / scale,
        eta_y=mode_params.eta_y / scale,
        eta_thetay=mode_params.eta_thetay / scale,
        delta_1=d1,
        delta_2=d2,
        omega_1=o1,
        omega_2=o2,
        scale=scale,
    )


def nonlinear_detunings(p: SolverParams, n_theta, n_y):
    dnl_1 = p.delta_1 - 12.0 * p.eta_theta * (n_theta + 1.0) - 4.0 * p.eta_thetay * n_y
    dnl_2 = p.delta_2 - 12.0 * p.eta_y * (n_y + 1.0) - 4.0 * p.eta_thetay * n_theta
    return dnl_1, dnl_2


def flow(p: SolverParams, beta_theta: complex, beta_y: complex) -> tuple[complex, complex]:
    """Right-hand side of the amplitude equations."""
    nt = (beta_theta.real * beta_theta.real + beta_theta.imag * beta_theta.imag)
    ny = (beta_y.real * beta_y.real + beta_y.imag * beta_y.imag)
    dnl_1, dnl_2 = nonlinear_detunings(p, nt, ny)
    f_t = -(0.5 * p.gamma_theta + 1j * dnl_1) * beta_theta - 0.5j * p.omega_1
    f_y = -(0.5 * p.gamma_y + 1j * dnl_2) * beta_y - 0.5j * p.omega_2
    return f_t, f_y


def flow_residual(p: SolverParams, beta_theta: complex, beta_y: complex) -> float:
    """Relative size of the flow at a point; ~0 at fixed points.

    The unit amplitude floor in the scale lets undriven decay toward the
    origin register as converged once |beta| is negligible.
    """
    f_t, f_y = flow(p, beta_theta, beta_y)
    nt = abs(beta_theta)
    ny = abs(beta_y)
    dnl_1, dnl_2 = nonlinear_detunings(p, nt * nt, ny * ny)
    s_t = (0.5 * p.gamma_theta + abs(dnl_1)) * (nt + 1.0) + 0.5 * p.omega_1 + 1e-300
    s_y = (0.5 * p.gamma_y + abs(dnl_2)) * (ny + 1.0) + 0.5 * p.omega_2 + 1e-300
    return max(abs(f_t) / s_t, abs(f_y) / s_y)


def jacobian(p: SolverParams, beta_theta: complex, beta_y: complex) -> np.ndarray:
    """Real 4x4 Jacobian of the flow in (Re bt, Im bt, Re by, Im by).

    Built from the Wirtinger derivatives of each complex component; the
    softening quartic terms contribute +12i eta |beta|^2 diagonal shifts and
    the cross-Kerr contributes the off-diagonal 4i eta_ty blocks.
    """
    nt = abs(beta_theta) ** 2
    ny = abs(beta_y) ** 2
    dnl_1, dnl_2 = nonlinear_detunings(p, nt, ny)

    # d f_t / d(bt, bt*), d f_t / d(by, by*)
    a_t = -(0.5 * p.gamma_theta + 1j * dnl_1) + 12j * p.eta_theta * nt
    b_t = 12j * p.eta_theta * beta_theta * beta_theta
    c_t = 4j * p.eta_thetay * beta_theta * np.conj(beta_y)
    d_t = 4j * p.eta_thetay * beta_theta * beta_y
    a_y = -(0.5 * p.gamma_y + 1j * dnl_2) + 12j * p.eta_y * ny
    b_y = 12j * p.eta_y * beta_y * beta_y
    c_y = 4j * p.eta_thetay * beta_y * np.conj(beta_theta)
    d_y = 4j * p.eta_thetay * beta_y * beta_theta

    J = np.empty((4, 4))

    def fill(row, fz, fzbar_x, fz_other, fzbar_other, col_self, col_other):
        # df/dx = f_z + f_zbar ; df/dy = i (f_z - f_zbar)
        dfdx = fz + fzbar_x
        dfdy = 1j * (fz - fzbar_x)
        J[row, col_self] = dfdx.real
        J[row, col_self + 1] = dfdy.real
        J[row + 1, col_self] = dfdx.imag
        J[row + 1, col_self + 1] = dfdy.imag
        dfdx_o = fz_other + fzbar_other
        dfdy_o = 1j * (fz_other - fzbar_other)
        J[row, col_other] = dfdx_o.real
        J[row, col_other + 1] = dfdy_o.real
        J[row + 1, col_other] = dfdx_o.imag
        J[row + 1, col_other + 1] = dfdy_o.imag

    fill(0, a_t, b_t, c_t, d_t, 0, 2)
    fill(2, a_y, b_y, c_y, d_y, 2, 0)
    return J


def steady_residuals(p: SolverParams, n_theta, n_y):
    """Relative residuals of the two fixed-point occupation equations."""
    dnl_1, dnl_2 = nonlinear_detunings(p, n_theta, n_y)
    lhs1 = (0.25 * p.gamma_theta**2 + dnl_1 * dnl_1) * n_theta
    lhs2 = (0.25 * p.gamma_y**2 + dnl_2 * dnl_2) * n_y
    rhs1 = 0.25 * p.omega_1**2
    rhs2 = 0.25 * p.omega_2**2
    s1 = lhs1 + rhs1 + 1e-300
    s2 = lhs2 + rhs2 + 1e-300
    return abs(lhs1 - rhs1) / s1, abs(lhs2 - rhs2) / s2


# ---------------------------------------------------------------------------
# Occupation cubic: for fixed n_other, each fixed-point equation is
#   (gamma^2/4 + (a - b n)^2) n = rhs,   a = delta - 12 eta - 4 eta_ty n_other,
#   b = 12 eta,
# i.e. b^2 n^3 - 2 a b n^2 + (a^2 + gamma^2/4) n - rhs = 0.
# ---------------------------------------------------------------------------


def cubic_coefficients(a, b: float, gamma: float, rhs: float):
    return b * b, -2.0 * a * b, a * a + 0.25 * gamma * gamma, -rhs


def occupation_roots_scalar(a: float, b: float, gamma: float, rhs: float) -> list[float]:
    """All real non-negative occupation roots at one grid point, ascending."""
    c3, c2, c1, c0 = cubic_coefficients(a, b, gamma, rhs)
    if c3 == 0.0:
        # Linear mode: single Lorentzian root.
        if c1 == 0.0:
            return [0.0] if c0 == 0.0 else []
        root = -c0 / c1
        return [root] if root >= 0.0 else []
    p2 = c2 / c3
    p1 = c1 / c3
    p0 = c0 / c3
    roots = _monic_cubic_roots(p2, p1, p0)
    out = []
    for r in roots:
        r = _newton_polish(r, p2, p1, p0)
        if r >= -1e-14 * max(1.0, abs(r)):
            out.append(max(r, 0.0))
    out.sort()
    return out


def _monic_cubic_roots(p2: float, p1: float, p0: float) -> list[float]:
    """Real roots of x^3 + p2 x^2 + p1 x + p0, by trig/Cardano split."""
    shift = p2 / 3.0
    P = p1 - p2 * shift
    Q = p0 - shift * (p1 - 2.0 * shift * shift)
    # Q = 2 p2^3/27 - p2 p1/3 + p0, rewritten to limit cancellation
    if P == 0.0 and Q == 0.0:
        return [-shift]
    disc = -4.0 * P * P * P - 27.0 * Q * Q
    if disc > 0.0:
        m = 2.0 * math.sqrt(-P / 3.0)
        arg = 3.0 * Q / (P * m)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        return [
            m * math.cos(phi) - shift,
            m * math.cos(phi - 2.0 * math.pi / 3.0) - shift,
            m * math.cos(phi - 4.0 * math.pi / 3.0) - shift,
        ]
    w = -0.5 * Q + math.sqrt(max(0.25 * Q * Q + P * P * P / 27.0, 0.0))
    if w == 0.0:
        u = -math.copysign(abs(0.5 * Q) ** (1.0 / 3.0), Q)
        return [u + u - shift] if u != 0.0 else [-shift]
    u = math.copysign(abs(w) ** (1.0 / 3.0), w)
    return [u - P / (3.0 * u) - shift]


def _newton_polish(x: float, p2: float, p1: float, p0: float, iters: int = 3) -> float:
    for _ in range(iters):
        f = ((x + p2) * x + p1) * x + p0
        df = (3.0 * x + 2.0 * p2) * x + p1
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) <= 1e-16 * (abs(x) + 1e-300):
            break
    return x


def occupation_roots_grid(a, b: float, gamma: float, rhs: float):
    """Vectorized real-root solve of the occupation cubic over an array of ``a``.

    Returns (roots, count): roots has shape (len(a), 3), ascending, NaN padded;
    count is the number of real roots (1 or 3) before any sign filtering.
    """
    a = np.asarray(a, dtype=float)
    if b == 0.0:
        root = rhs / (a * a + 0.25 * gamma * gamma)
        roots = np.full(a.shape + (3,), np.nan)
        roots[..., 0] = root
        return roots, np.ones(a.shape, dtype=np.int64)
    c1 = (a * a + 0.25 * gamma * gamma) / (b * b)
    c2 = -2.0 * a / b
    c0 = np.full_like(a, -rhs / (b * b))
    shift = c2 / 3.0
    P = c1 - c2 * shift
    Q = c0 - shift * (c1 - 2.0 * shift * shift)
    disc = -4.0 * P**3 - 27.0 * Q**2
    three = disc > 0.0

    roots = np.full(a.shape + (3,), np.nan)
    # Three-real-root branch (trig form).
    if np.any(three):
        Pt = P[three]
        Qt = Q[three]
        st = shift[three]
        m = 2.0 * np.sqrt(-Pt / 3.0)
        arg = np.clip(3.0 * Qt / (Pt * m), -1.0, 1.0)
        phi = np.arccos(arg) / 3.0
        r0 = m * np.cos(phi) - st
        r1 = m * np.cos(phi - 2.0 * np.pi / 3.0) - st
        r2 = m * np.cos(phi - 4.0 * np.pi / 3.0) - st
        roots[three, 0] = r0
        roots[three, 1] = r1
        roots[three, 2] = r2
    # Single-real-root branch (Cardano).
    single = ~three
    if np.any(single):
        Ps = P[single]
        Qs = Q[single]
        ss = shift[single]
        w = -0.5 * Qs + np.sqrt(np.maximum(0.25 * Qs**2 + Ps**3 / 27.0, 0.0))
        u = np.where(w == 0.0, 0.0, np.sign(w) * np.abs(w) ** (1.0 / 3.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(u == 0.0, -ss, u - Ps / (3.0 * np.where(u == 0.0, 1.0, u)) - ss)
        roots[single, 0] = r

    # Two Newton sweeps clean up the closed-form roundoff.
    for _ in range(2):
        x = roots
        with np.errstate(invalid="ignore"):
            f = ((x + c2[..., None]) * x + c1[..., None]) * x + c0[..., None]
            df = (3.0 * x + 2.0 * c2[..., None]) * x + c1[..., None]
            step = np.where(np.abs(df) > 0, f / np.where(df == 0, 1.0, df), 0.0)
            roots = x - np.where(np.isnan(x), 0.0, step)
    roots = np.sort(roots, axis=-1)  # NaNs sort to the end
    count = np.where(three, 3, 1).astype(np.int64)
    return roots, count
