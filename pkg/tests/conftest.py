import numpy as np
import pytest

from levicool import DriveConfig, Environment, ParticleGeometry, TrapBeam, branch_solve, derive_mode_params
from levicool.oracle import toy_mode_params


@pytest.fixture(scope="session")
def default_geometry():
    return ParticleGeometry(r_a=50e-9, r_b=25e-9, density=2200.0, relative_permittivity=2.1)


@pytest.fixture(scope="session")
def default_beam():
    return TrapBeam(power=0.1, waist=0.6e-6)


@pytest.fixture(scope="session")
def default_environment():
    return Environment(pressure=1e-3, temperature=300.0)


@pytest.fixture(scope="session")
def default_mode_params(default_geometry, default_beam, default_environment):
    return derive_mode_params(default_geometry, default_beam, default_environment)


def random_fold_config(rng):
    """Toy two-mode system drawn inside both single-mode fold windows.

    Drive amplitudes sit at the geometric mean of each mode's fold edges so
    the solved system generically carries several coexisting branches.
    """
    gt, gy = rng.uniform(0.05, 0.15, 2)
    et, ey = rng.uniform(0.01, 0.03, 2)
    exy = rng.uniform(0.1, 0.5) * np.sqrt(et * ey)
    d1, d2 = rng.uniform(0.4, 0.7, 2)
    a1, a2 = d1 - 12 * et, d2 - 12 * ey
    lmax1 = (2 * a1 / 3) ** 2 * a1 / (36 * et)
    lmin1 = gt**2 / 4 * a1 / (12 * et)
    lmax2 = (2 * a2 / 3) ** 2 * a2 / (36 * ey)
    lmin2 = gy**2 / 4 * a2 / (12 * ey)
    o1 = 2 * np.sqrt(np.sqrt(lmin1 * lmax1))
    o2 = 2 * np.sqrt(np.sqrt(lmin2 * lmax2))
    mp = toy_mode_params(
        gamma_theta=gt, gamma_y=gy, eta_theta=et, eta_y=ey, eta_thetay=exy
    )
    drive = DriveConfig(omega_1=o1, omega_2=o2, delta_1=d1, delta_2=d2, units_mode="si")
    return mp, drive


def fold_configs(seed, count, min_branches=3):
    """Deterministic list of (mode_params, drive, branches) with folds present."""
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    while len(out) < count and attempts < 20 * count:
        attempts += 1
        mp, drive = random_fold_config(rng)
        res = branch_solve(mp, drive)
        if len(res) >= min_branches and not res.warnings:
            out.append((mp, drive, res))
    return out
