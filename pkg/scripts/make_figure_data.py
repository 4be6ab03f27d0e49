#!/usr/bin/env python3
"""Produce the full set of figure-analog CSVs with the default scene.

Writes into --out (default out/figure_data):
  coefficients.csv   nonlinear coefficients vs short axis (log-line figure)
  sweep.csv          branch map over both drive amplitudes, red-red detuning
  sweep_blue.csv     the same grid with both drives blue-detuned (single branch)
  trajectory.csv     one settling amplitude trajectory
  cooling.csv        cooling ratio vs detuning mismatch, several pressures

Heavier than the test suite: the sweeps run 60x60 cells.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

import levicool as lc
from levicool import cooling as cooling_mod
from levicool.cli import _write_csv
from levicool.steady import AxisSpec, DriveConfig, sweep


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/figure_data")
    parser.add_argument("--cells", type=int, default=60, help="sweep grid edge")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    geo = lc.ParticleGeometry(50e-9, 25e-9, 2200.0, 2.1)
    beam = lc.TrapBeam(0.1, 0.6e-6)
    env = lc.Environment(1e-3, 300.0)
    mp = lc.derive_mode_params(geo, beam, env)
    ratio = mp.omega_y / mp.omega_theta

    r_b = np.linspace(5e-9, 50e-9, 91)
    table = lc.coefficient_sweep(geo, beam, r_b)
    _write_csv(out / "coefficients.csv", "figure-data", lc.physics.COEFFICIENT_COLUMNS, table)
    print(f"wrote {out/'coefficients.csv'}")

    n = args.cells
    sweep_header = ("axis1", "axis2", "branch_count", "branch_idx", "n_theta", "n_y", "stability")
    for name, d1, d2, top in (
        ("sweep.csv", 0.01, 0.01 * ratio, 0.15),
        ("sweep_blue.csv", -0.1, -0.1, 0.5),
    ):
        drive = DriveConfig(0.0, 0.0, d1, d2, units_mode="normalized")
        m = sweep(
            mp,
            drive,
            AxisSpec("omega_1", top / n, top, n),
            AxisSpec("omega_2", top / n, top, n),
            workers=args.workers,
        )
        rows = []
        for i, x1 in enumerate(m.values_1):
            for j, x2 in enumerate(m.values_2):
                cell = m.cell(i, j)
                for idx, b in enumerate(cell):
                    rows.append((x1, x2, len(cell), idx, b.n_theta, b.n_y, b.stability))
        _write_csv(out / name, "figure-data", sweep_header, rows)
        print(f"wrote {out/name} (max branches {m.branch_counts().max()})")

    drive = DriveConfig(0.08, 0.05, 0.01, 0.01 * ratio, units_mode="normalized")
    traj = lc.integrate(mp, drive, 0j, 0j, (0.0, 3e5), rel_tol=1e-9, samples=600)
    _write_csv(
        out / "trajectory.csv",
        "figure-data",
        ("t", "re_beta_theta", "im_beta_theta", "re_beta_y", "im_beta_y"),
        zip(
            traj.times,
            traj.beta_theta.real,
            traj.beta_theta.imag,
            traj.beta_y.real,
            traj.beta_y.imag,
        ),
    )
    print(f"wrote {out/'trajectory.csv'}")

    deltas = np.linspace(-6e-4, 6e-4, 81)
    drive = DriveConfig(0.1, 0.01, 1e-3, 1e-3 * ratio, units_mode="normalized")
    rows = []
    for p in (1e-3, 1e-4, 1e-5, 1e-6):
        envp = lc.Environment(p, 300.0)
        for dn, r in zip(
            deltas,
            cooling_mod.cooling_sweep(
                geo, beam, envp, drive, "delta", deltas * mp.omega_theta
            ),
        ):
            rows.append(
                (dn, r.pressure_pa, r.delta, r.gamma_fb, r.eta_tilde, r.n_theta_out, r.n_y_out, r.xi)
            )
    _write_csv(out / "cooling.csv", "figure-data", cooling_mod.COOLING_COLUMNS, rows)
    print(f"wrote {out/'cooling.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
