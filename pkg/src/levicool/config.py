"""Run configuration: schema, defaults, validation, and hashing.

The config is a single YAML document.  Every dimensional key carries its
unit in the name; drive and detuning values switch between rad/s and
multiples of the librational trap frequency with ``units_mode``.  Unknown
keys are rejected with their full path so typos never pass silently.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import ConfigurationError
from .physics import (
    DampingReference,
    Environment,
    ParticleGeometry,
    TrapBeam,
    TWO_PI,
)

# Default physical scene: 50 x 25 nm fused-silica ellipsoid, 0.1 W / 0.6 um
# beam, 1 mPa residual gas at room temperature.
_DEFAULTS: dict[str, Any] = {
    "particle": {
        "r_a_m": 50e-9,
        "r_b_m": 25e-9,
        "density_kg_m3": 2200.0,
        "relative_permittivity": 2.1,
    },
    "beam": {"power_w": 0.1, "waist_m": 0.6e-6},
    "environment": {
        "pressure_pa": 1e-3,
        "temperature_k": 300.0,
        "damping_reference": {
            "gamma_theta_hz": 137.2,
            "gamma_y_hz": 47.0,
            "pressure_pa": 1e-3,
            "temperature_k": 300.0,
        },
    },
    "overrides": {},
    "units_mode": "normalized",
    "drive": {"omega_1": 0.05, "omega_2": 0.025, "delta_1": 0.01, "delta_2": 1.385e-3},
    "sweep": {
        "axis_1": {"name": "omega_1", "start": 1e-3, "stop": 0.15, "count": 40},
        "axis_2": {"name": "omega_2", "start": 1e-3, "stop": 0.15, "count": 40},
    },
    "dynamics": {
        "beta0_theta_re": 0.0,
        "beta0_theta_im": 0.0,
        "beta0_y_re": 0.0,
        "beta0_y_im": 0.0,
        "t_final": 2e5,
        "samples": 512,
        "rel_tol": 1e-9,
    },
    "coefficients": {"r_b_min_m": 5e-9, "r_b_max_m": 50e-9, "count": 46},
    "cooling": {
        "delta": 0.0,
        "gamma_fb": 0.0,
        "branch_policy": "lowest",
        "pressures_pa": [1e-3],
        "axis": {"name": "delta", "start": -7e-4, "stop": 7e-4, "count": 81, "log": False},
    },
    "oracle": {"truncation": [10, 10]},
    "workers": 1,
}

_OVERRIDE_KEYS = {
    "kappa_x": "kappa_x",
    "kappa_y": "kappa_y",
    "omega_theta_rad_s": "omega_theta",
    "omega_y_rad_s": "omega_y",
    "eta_theta_rad_s": "eta_theta",
    "eta_y_rad_s": "eta_y",
    "eta_thetay_rad_s": "eta_thetay",
    "eta_1_rad_s": "eta_1",
    "eta_2_rad_s": "eta_2",
    "eta_3_rad_s": "eta_3",
    "gamma_theta_rad_s": "gamma_theta",
    "gamma_y_rad_s": "gamma_y",
    "nbar_theta": "nbar_theta",
    "nbar_y": "nbar_y",
}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration with defaults resolved."""

    geometry: ParticleGeometry
    beam: TrapBeam
    environment: Environment
    overrides: dict[str, float]
    units_mode: str
    drive: dict[str, float]
    sweep: dict[str, Any]
    dynamics: dict[str, Any]
    coefficients: dict[str, Any]
    cooling: dict[str, Any]
    oracle: dict[str, Any]
    workers: int
    resolved: dict[str, Any] = field(repr=False)

    def config_hash(self) -> str:
        canonical = json.dumps(self.resolved, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _merge(defaults: Any, user: Any, path: str) -> Any:
    if isinstance(defaults, dict):
        if user is None:
            return {k: _merge(v, None, f"{path}.{k}") for k, v in defaults.items()}
        if not isinstance(user, dict):
            raise ConfigurationError(f"{path or 'document'}: expected a mapping")
        merged = {}
        allowed = set(defaults)
        # overrides and damping_reference accept their own key sets / null.
        if path == ".overrides":
            return _check_overrides(user)
        for key in user:
            if key not in allowed:
                raise ConfigurationError(f"unknown key {path}.{key}".lstrip("."))
        for key, dval in defaults.items():
            if key == "damping_reference" and key in user and user[key] is None:
                merged[key] = None
                continue
            merged[key] = _merge(dval, user.get(key), f"{path}.{key}")
        return merged
    if user is None:
        return defaults
    if isinstance(defaults, bool):
        if not isinstance(user, bool):
            raise ConfigurationError(f"{path}: expected a boolean")
        return user
    if isinstance(defaults, (int, float)):
        # YAML 1.1 reads unsigned exponents like 2.0e4 as strings; coerce.
        if isinstance(user, str):
            try:
                user = float(user)
            except ValueError:
                raise ConfigurationError(f"{path}: expected a number") from None
        if isinstance(user, bool) or not isinstance(user, (int, float)):
            raise ConfigurationError(f"{path}: expected a number")
        if isinstance(defaults, int):
            if isinstance(user, float) and not user.is_integer():
                raise ConfigurationError(f"{path}: expected an integer")
            return int(user)
        return float(user)
    if isinstance(defaults, str):
        if not isinstance(user, str):
            raise ConfigurationError(f"{path}: expected a string")
        return user
    if isinstance(defaults, list):
        if not isinstance(user, list):
            raise ConfigurationError(f"{path}: expected a list")
        return user
    raise ConfigurationError(f"{path}: unsupported value type")


def _check_overrides(user: dict) -> dict:
    out = {}
    for key, value in user.items():
        if key not in _OVERRIDE_KEYS:
            raise ConfigurationError(f"unknown key overrides.{key}")
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                raise ConfigurationError(f"overrides.{key}: expected a number") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"overrides.{key}: expected a number")
        out[key] = float(value)
    return out


def parse_config(document: str | None) -> RunConfig:
    """Parse and validate a YAML config document (None or empty -> defaults)."""
    if document is None or document.strip() == "":
        user = {}
    else:
        try:
            user = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"invalid YAML: {exc}") from exc
        if user is None:
            user = {}
        if not isinstance(user, dict):
            raise ConfigurationError("document: expected a mapping at top level")
    resolved = _merge(_DEFAULTS, user, "")
    if resolved["units_mode"] not in ("si", "normalized"):
        raise ConfigurationError("units_mode: must be 'si' or 'normalized'")
    if not isinstance(resolved["workers"], int) or resolved["workers"] < 1:
        raise ConfigurationError("workers: must be a positive integer")

    par = resolved["particle"]
    geometry = ParticleGeometry(
        r_a=par["r_a_m"],
        r_b=par["r_b_m"],
        density=par["density_kg_m3"],
        relative_permittivity=par["relative_permittivity"],
    )
    beam = TrapBeam(power=resolved["beam"]["power_w"], waist=resolved["beam"]["waist_m"])
    env_block = resolved["environment"]
    ref_block = env_block["damping_reference"]
    if ref_block is None:
        reference = None
    else:
        reference = DampingReference(
            gamma_theta=TWO_PI * ref_block["gamma_theta_hz"],
            gamma_y=TWO_PI * ref_block["gamma_y_hz"],
            pressure=ref_block["pressure_pa"],
            temperature=ref_block["temperature_k"],
        )
    environment = Environment(
        pressure=env_block["pressure_pa"],
        temperature=env_block["temperature_k"],
        damping_reference=reference,
    )
    overrides = {_OVERRIDE_KEYS[k]: v for k, v in resolved["overrides"].items()}

    cooling = resolved["cooling"]
    if cooling["axis"]["name"] not in ("delta", "pressure", "omega_1", "omega_2", "gamma_fb"):
        raise ConfigurationError("cooling.axis.name: unknown axis")
    if cooling["branch_policy"] not in ("lowest", "highest"):
        raise ConfigurationError("cooling.branch_policy: must be 'lowest' or 'highest'")
    for ax in ("axis_1", "axis_2"):
        if resolved["sweep"][ax]["count"] < 1:
            raise ConfigurationError(f"sweep.{ax}.count: must be >= 1")
    trunc = resolved["oracle"]["truncation"]
    if (
        not isinstance(trunc, list)
        or len(trunc) != 2
        or any(not isinstance(t, int) or t < 4 for t in trunc)
    ):
        raise ConfigurationError("oracle.truncation: expected two integers >= 4")

    return RunConfig(
        geometry=geometry,
        beam=beam,
        environment=environment,
        overrides=overrides,
        units_mode=resolved["units_mode"],
        drive=dict(resolved["drive"]),
        sweep=resolved["sweep"],
        dynamics=resolved["dynamics"],
        coefficients=resolved["coefficients"],
        cooling=cooling,
        oracle=resolved["oracle"],
        workers=resolved["workers"],
        resolved=resolved,
    )
