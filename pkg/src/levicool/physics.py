"""Physical parameters of a levitated ellipsoid in a Gaussian optical trap.

Everything downstream (steady states, dynamics, cooling) consumes the
``ModeParams`` bundle produced here.  The chain of closed forms:

    geometry -> volume, mass, rotational inertia
    geometry -> depolarization factors -> effective susceptibilities
    beam     -> focal intensity, trap depth
    both     -> trap frequencies (librational theta, translational y)
    both     -> quartic / sextic / octic coefficients of the expanded potential
    gas      -> damping rates (linear in pressure, sqrt in temperature)
    gas      -> thermal bath occupations (Bose-Einstein)

All rates and frequencies are stored as angular frequencies (rad/s).
Values quoted in cycles/s must be multiplied by 2*pi before they get here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR
from scipy.constants import k as K_BOLTZMANN

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ParticleGeometry:
    """Prolate ellipsoid: long semi-axis r_a along the trap polarization, r_b = r_c."""

    r_a: float
    r_b: float
    density: float
    relative_permittivity: float

    def __post_init__(self):
        if not (self.r_a > 0 and self.r_b > 0):
            raise DomainError("semi-axes must be positive")
        if self.density <= 0:
            raise DomainError("density must be positive")
        if self.relative_permittivity <= 1:
            raise DomainError("relative permittivity must exceed 1")
        if self.r_a < self.r_b:
            raise DomainError(
                "prolate convention requires r_a >= r_b "
                f"(got r_a={self.r_a:g}, r_b={self.r_b:g})"
            )

    @property
    def aspect_ratio(self) -> float:
        return self.r_a / self.r_b


@dataclass(frozen=True)
class TrapBeam:
    """Trapping laser: optical power and focal waist."""

    power: float
    waist: float

    def __post_init__(self):
        if self.power <= 0:
            raise DomainError("beam power must be positive")
        if self.waist <= 0:
            raise DomainError("beam waist must be positive")


@dataclass(frozen=True)
class DampingReference:
    """Measured damping pair anchoring the pressure/temperature scaling law."""

    gamma_theta: float  # rad/s
    gamma_y: float  # rad/s
    pressure: float  # Pa
    temperature: float  # K

    def __post_init__(self):
        if self.gamma_theta <= 0 or self.gamma_y <= 0:
            raise DomainError("reference damping rates must be positive")
        if self.pressure <= 0 or self.temperature <= 0:
            raise DomainError("reference pressure and temperature must be positive")


# 137.2 Hz / 47 Hz at 1 mPa and 300 K, converted to angular rates.
DEFAULT_DAMPING_REFERENCE = DampingReference(
    gamma_theta=TWO_PI * 137.2,
    gamma_y=TWO_PI * 47.0,
    pressure=1e-3,
    temperature=300.0,
)


@dataclass(frozen=True)
class Environment:
    """Residual gas conditions plus the damping anchor point."""

    pressure: float
    temperature: float
    damping_reference: DampingReference | None = DEFAULT_DAMPING_REFERENCE

    def __post_init__(self):
        if self.pressure < 0:
            raise DomainError("pressure must be non-negative")
        if self.temperature <= 0:
            raise DomainError("temperature must be positive")


@dataclass(frozen=True)
class OpticalResponse:
    """Shape-dependent dielectric response along and across the long axis."""

    kappa_x: float
    kappa_y: float
    kappa_xy: float
    L_a: float
    L_b: float


@dataclass(frozen=True)
class ModeParams:
    """Every derived quantity of the two-mode model, in SI (rates in rad/s)."""

    mass: float
    volume: float
    inertia: float
    intensity_0: float
    u0_mag: float
    omega_theta: float
    omega_y: float
    eta_theta: float
    eta_y: float
    eta_thetay: float
    eta_1: float
    eta_2: float
    eta_3: float
    gamma_theta: float
    gamma_y: float
    nbar_theta: float
    nbar_y: float
    librationally_untrapped: bool = False


def depolarization_factors(aspect_ratio: float) -> tuple[float, float]:
    """Depolarization factors (L_a, L_b) of a prolate spheroid.

    Closed form in the eccentricity e = sqrt(1 - (b/a)^2); a power series
    takes over near the sphere where the closed form cancels catastrophically.
    L_a + 2 L_b = 1 holds by construction.
    """
    if aspect_ratio < 1:
        raise DomainError("aspect ratio must be >= 1 for a prolate spheroid")
    if math.isinf(aspect_ratio):
        return 0.0, 0.5
    if aspect_ratio > 1e6:
        # Needle asymptote; the closed form loses e to rounding here.
        L_a = (math.log(2.0 * aspect_ratio) - 1.0) / (aspect_ratio * aspect_ratio)
        return L_a, 0.5 * (1.0 - L_a)
    e2 = 1.0 - 1.0 / (aspect_ratio * aspect_ratio)
    if e2 <= 0.0:
        return 1.0 / 3.0, 1.0 / 3.0
    if e2 < 0.01:
        # (1-e^2) * sum_{k>=1} e^{2(k-1)} / (2k+1), truncation error < 1e-22
        acc = 0.0
        for k in range(10, 0, -1):
            acc = acc * e2 + 1.0 / (2 * k + 1)
        L_a = (1.0 - e2) * acc
    else:
        e = math.sqrt(e2)
        L_a = ((1.0 - e2) / (e2 * e)) * (math.atanh(e) - e)
    return L_a, 0.5 * (1.0 - L_a)


def susceptibilities(geometry: ParticleGeometry) -> OpticalResponse:
    """Effective susceptibilities kappa_i = (eps_r - 1)/(1 + L_i (eps_r - 1))."""
    L_a, L_b = depolarization_factors(geometry.aspect_ratio)
    chi = geometry.relative_permittivity - 1.0
    kappa_x = chi / (1.0 + L_a * chi)
    kappa_y = chi / (1.0 + L_b * chi)
    return OpticalResponse(
        kappa_x=kappa_x,
        kappa_y=kappa_y,
        kappa_xy=kappa_x - kappa_y,
        L_a=L_a,
        L_b=L_b,
    )


def gas_damping(environment: Environment, mode: str) -> float:
    """Gas damping rate (rad/s): gamma_ref * (P/P_ref) * sqrt(T/T_ref).

    P = 0 returns 0 (collisionless limit).
    """
    if mode not in ("theta", "y"):
        raise DomainError(f"mode must be 'theta' or 'y', got {mode!r}")
    if environment.pressure == 0.0:
        return 0.0
    ref = environment.damping_reference
    if ref is None:
        raise ConfigurationError(
            "no damping reference available and no explicit rates supplied"
        )
    base = ref.gamma_theta if mode == "theta" else ref.gamma_y
    return (
        base
        * (environment.pressure / ref.pressure)
        * math.sqrt(environment.temperature / ref.temperature)
    )


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation 1 / (exp(hbar*omega / kB*T) - 1)."""
    if omega <= 0:
        raise DomainError("thermal occupation needs omega > 0")
    if temperature <= 0:
        raise DomainError("thermal occupation needs temperature > 0")
    x = HBAR * omega / (K_BOLTZMANN * temperature)
    return 1.0 / math.expm1(x)


# ModeParams fields that may be pinned to externally supplied values instead
# of the geometric closed forms (reference operating points, measured rates).
OVERRIDABLE_FIELDS = (
    "kappa_x",
    "kappa_y",
    "omega_theta",
    "omega_y",
    "eta_theta",
    "eta_y",
    "eta_thetay",
    "eta_1",
    "eta_2",
    "eta_3",
    "gamma_theta",
    "gamma_y",
    "nbar_theta",
    "nbar_y",
)


def derive_mode_params(
    geometry: ParticleGeometry,
    beam: TrapBeam,
    environment: Environment,
    *,
    paper_formula_thetay: bool = False,
    overrides: dict[str, float] | None = None,
) -> ModeParams:
    """Derive the full parameter bundle from geometry, beam, and gas inputs.

    ``overrides`` pins any of OVERRIDABLE_FIELDS to a supplied value
    (rad/s for rates); the remaining quantities are still derived, using the
    overridden values where they enter (e.g. pinned kappas feed the trap
    frequencies, pinned frequencies feed the zero-point cross couplings).

    ``paper_formula_thetay`` switches the cross coupling eta_thetay to the
    published printed expression, which carries an extra length factor; it is
    provided for comparison only.
    """
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(OVERRIDABLE_FIELDS)
    if unknown:
        raise ConfigurationError(f"unknown override fields: {sorted(unknown)}")

    r_a, r_b = geometry.r_a, geometry.r_b
    w0 = beam.waist
    volume = 4.0 * math.pi * r_a * r_b * r_b / 3.0
    mass = geometry.density * volume
    inertia = 4.0 * math.pi * geometry.density * r_a * r_b**2 * (r_a**2 + r_b**2) / 15.0
    intensity_0 = 2.0 * beam.power / (math.pi * w0 * w0)
    u0_mag = volume * intensity_0 / (2.0 * SPEED_OF_LIGHT)

    optics = susceptibilities(geometry)
    kappa_x = overrides.get("kappa_x", optics.kappa_x)
    kappa_y = overrides.get("kappa_y", optics.kappa_y)
    kappa_xy = kappa_x - kappa_y

    omega_y = overrides.get("omega_y", math.sqrt(4.0 * u0_mag * kappa_x / (mass * w0 * w0)))
    untrapped = kappa_xy <= 0.0
    if "omega_theta" in overrides:
        omega_theta = overrides["omega_theta"]
        untrapped = omega_theta == 0.0
    else:
        omega_theta = 0.0 if untrapped else math.sqrt(2.0 * u0_mag * kappa_xy / inertia)

    eta_theta = overrides.get("eta_theta", HBAR / (24.0 * inertia))
    eta_y = overrides.get("eta_y", HBAR / (8.0 * mass * w0 * w0))

    # Zero-point amplitudes squared; degenerate (untrapped) case handled below.
    if untrapped:
        eta_thetay = eta_1 = eta_2 = eta_3 = 0.0
    else:
        th2 = HBAR / (2.0 * inertia * omega_theta)
        y2 = HBAR / (2.0 * mass * omega_y)
        if paper_formula_thetay:
            # Printed form; dimensionally inconsistent (extra length), kept verbatim.
            eta_thetay = (HBAR / (4.0 * w0 * inertia)) * math.sqrt(
                (r_a**2 + r_b**2) ** 2 * kappa_xy / (10.0 * kappa_x)
            )
        else:
            eta_thetay = u0_mag * (2.0 * kappa_xy / w0**2) * th2 * y2 / HBAR
        eta_1 = u0_mag * (2.0 * kappa_xy / w0**4) * th2 * y2 * y2 / HBAR
        eta_2 = u0_mag * (2.0 * kappa_xy / (3.0 * w0**2)) * th2 * th2 * y2 / HBAR
        eta_3 = u0_mag * (2.0 * kappa_xy / (3.0 * w0**4)) * th2 * th2 * y2 * y2 / HBAR
    eta_thetay = overrides.get("eta_thetay", eta_thetay)
    eta_1 = overrides.get("eta_1", eta_1)
    eta_2 = overrides.get("eta_2", eta_2)
    eta_3 = overrides.get("eta_3", eta_3)

    gamma_theta = overrides.get("gamma_theta", None)
    gamma_y = overrides.get("gamma_y", None)
    if gamma_theta is None:
        gamma_theta = gas_damping(environment, "theta")
    if gamma_y is None:
        gamma_y = gas_damping(environment, "y")

    if "nbar_theta" in overrides:
        nbar_theta = overrides["nbar_theta"]
    elif untrapped or omega_theta <= 0:
        nbar_theta = math.inf
    else:
        nbar_theta = thermal_occupation(omega_theta, environment.temperature)
    nbar_y = overrides.get(
        "nbar_y", thermal_occupation(omega_y, environment.temperature)
    )

    return ModeParams(
        mass=mass,
        volume=volume,
        inertia=inertia,
        intensity_0=intensity_0,
        u0_mag=u0_mag,
        omega_theta=omega_theta,
        omega_y=omega_y,
        eta_theta=eta_theta,
        eta_y=eta_y,
        eta_thetay=eta_thetay,
        eta_1=eta_1,
        eta_2=eta_2,
        eta_3=eta_3,
        gamma_theta=gamma_theta,
        gamma_y=gamma_y,
        nbar_theta=nbar_theta,
        nbar_y=nbar_y,
        librationally_untrapped=untrapped,
    )


COEFFICIENT_COLUMNS = (
    "r_b_m",
    "eta_theta",
    "eta_y",
    "eta_thetay",
    "eta_1",
    "eta_2",
    "eta_3",
)


def coefficient_sweep(
    geometry: ParticleGeometry,
    beam: TrapBeam,
    r_b_values,
    *,
    paper_formula_thetay: bool = False,
) -> np.ndarray:
    """Nonlinear coefficients versus short axis, columns as COEFFICIENT_COLUMNS.

    Used for the coefficient-hierarchy check: the sextic and octic terms must
    sit far below every quartic one across the physical shape range.
    """
    r_b_values = np.asarray(r_b_values, dtype=float)
    if np.any(r_b_values <= 0):
        raise DomainError("r_b values must be positive")
    if np.any(r_b_values > geometry.r_a):
        raise DomainError("r_b values must not exceed r_a (prolate convention)")
    env = Environment(pressure=0.0, temperature=300.0)
    rows = np.empty((r_b_values.size, len(COEFFICIENT_COLUMNS)))
    for i, r_b in enumerate(r_b_values):
        geo = replace(geometry, r_b=float(r_b))
        mp = derive_mode_params(
            geo, beam, env, paper_formula_thetay=paper_formula_thetay
        )
        rows[i] = (
            r_b,
            mp.eta_theta,
            mp.eta_y,
            mp.eta_thetay,
            mp.eta_1,
            mp.eta_2,
            mp.eta_3,
        )
    return rows
