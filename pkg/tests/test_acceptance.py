"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s``.  CSV artifacts of the
runs land in out/acceptance/ (consumed by the plotting package), and the
conformance notes for reference-value comparisons land in
out/acceptance/acceptance_report.txt.
"""

import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.constants import hbar as HBAR

import levicool as lc
from levicool import cooling as cooling_mod
from levicool import oracle
from levicool.cli import _write_csv, main
from levicool.meanfield import settle
from levicool.model import reduce_params
from levicool.oracle import toy_mode_params
from levicool.steady import AxisSpec, DriveConfig, SteadyBranch, branch_solve, sweep

from conftest import fold_configs

OUT = Path(__file__).resolve().parent.parent / "out" / "acceptance"

TWO_PI = 2 * math.pi

# Quoted reference operating point (values read as cycles/s).
QUOTED = {
    "omega_theta": TWO_PI * 2.34e6,
    "omega_y": TWO_PI * 24.5e3,
    "eta_theta": TWO_PI * 0.202,
    "eta_y": TWO_PI * 0.105e-3,
    "eta_thetay": TWO_PI * 2.01e-3,
}

REPORT: list[str] = []


@pytest.fixture(scope="module", autouse=True)
def report_sink():
    OUT.mkdir(parents=True, exist_ok=True)
    yield
    text = "\n".join(REPORT) + "\n"
    (OUT / "acceptance_report.txt").write_text(text)
    print("\n" + text)


def record(line: str):
    REPORT.append(line)
    print(line)


def scene():
    geo = lc.ParticleGeometry(50e-9, 25e-9, 2200.0, 2.1)
    beam = lc.TrapBeam(0.1, 0.6e-6)
    env = lc.Environment(1e-3, 300.0)
    return geo, beam, env


def quoted_mode_params(pressure=1e-3):
    geo, beam, _ = scene()
    env = lc.Environment(pressure, 300.0)
    return lc.derive_mode_params(geo, beam, env, overrides=QUOTED)


def make_branch(n_theta, n_y):
    return SteadyBranch(
        n_theta=n_theta,
        n_y=n_y,
        beta_theta=complex(math.sqrt(n_theta)),
        beta_y=complex(math.sqrt(n_y)),
        stability="stable",
        jacobian_eigenvalues=(0j, 0j, 0j, 0j),
        residual=0.0,
    )


def test_c1_closed_form_identities():
    """Criterion 1: quartic/depolarization/heat-flow identities <= 1e-12 rel."""
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(250):
        r_b = rng.uniform(5e-9, 80e-9)
        geo = lc.ParticleGeometry(
            r_b * rng.uniform(1.0, 8.0), r_b, rng.uniform(500, 6000), rng.uniform(1.2, 8.0)
        )
        beam = lc.TrapBeam(rng.uniform(0.01, 2.0), rng.uniform(0.3e-6, 3e-6))
        env = lc.Environment(rng.uniform(0, 10.0), rng.uniform(4.0, 900.0))
        mp = lc.derive_mode_params(geo, beam, env)
        worst = max(worst, abs(mp.eta_theta * 24 * mp.inertia / HBAR - 1.0))
        worst = max(worst, abs(mp.eta_y * 8 * mp.mass * beam.waist**2 / HBAR - 1.0))
    for aspect in np.geomspace(1.0, 100.0, 250):
        L_a, L_b = lc.depolarization_factors(float(aspect))
        worst = max(worst, abs(L_a + 2 * L_b - 1.0))
    for _ in range(1000):
        gt, gy = rng.uniform(1e-3, 10.0, 2)
        gfb = rng.uniform(0.0, 5.0)
        mp = toy_mode_params(gamma_theta=gt, gamma_y=gy, eta_thetay=rng.uniform(0, 1))
        nbt, nby = rng.uniform(0.1, 10.0), rng.uniform(0.1, 1e3)
        cfg = lc.CoolingConfig(
            delta=rng.uniform(-5, 5),
            branch=make_branch(rng.uniform(0.1, 1e3), rng.uniform(0.1, 1e3)),
            nbar_theta=nbt,
            nbar_y=nby,
            gamma_fb=gfb,
        )
        res = lc.feedback_occupation(mp, cfg)
        lhs = gy * (nby - res.n_y_out)
        rhs = (gt + gfb) * (res.n_theta_out - nbt)
        scale = abs(lhs) + abs(rhs) + 1e-13 * (gy * nby + gt * nbt)
        worst = max(worst, abs(lhs - rhs) / scale)
    assert worst <= 1e-12
    record(f"[PASS] criterion 1: closed-form identities, worst residual {worst:.2e} <= 1e-12")


def test_c2_rate_equation_fixed_point():
    """Criterion 2: occupation ODE long-time limit equals closed form <= 1e-8."""
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100):
        gt, gy = rng.uniform(0.5, 2.0, 2)
        gfb = float(rng.choice([0.0, rng.uniform(0, 2)]))
        delta = rng.uniform(-2, 2)
        nt0, ny0 = rng.uniform(0.5, 20, 2)
        # draw the exchange rate at O(gamma) and back out the coupling, so the
        # samples stay in the regime the elimination is built for
        target = rng.uniform(0.0, 2.0) * min(gt, gy)
        s = gt + gfb + gy
        exy = math.sqrt(target * (s * s + 4 * delta * delta) / (32 * s * nt0 * ny0))
        mp = toy_mode_params(gamma_theta=gt, gamma_y=gy, eta_thetay=exy)
        branch = make_branch(nt0, ny0)
        cfg = lc.CoolingConfig(
            delta=delta,
            branch=branch,
            nbar_theta=rng.uniform(0, 2),
            nbar_y=rng.uniform(0.5, 50),
            gamma_fb=gfb,
        )
        closed = lc.feedback_occupation(mp, cfg)
        horizon = 30.0 / min(gt + gfb, gy)
        _, nt, ny = lc.occupancy_dynamics(
            mp, cfg, cfg.nbar_theta, cfg.nbar_y, (0.0, horizon), rel_tol=1e-10
        )
        worst = max(
            worst,
            abs(ny[-1] - closed.n_y_out) / max(closed.n_y_out, 1e-12),
            abs(nt[-1] - closed.n_theta_out) / max(closed.n_theta_out, 1e-12),
        )
    assert worst <= 1e-8
    record(f"[PASS] criterion 2: rate-equation fixed point vs closed form, worst {worst:.2e} <= 1e-8")


def test_c3_oracle_beam_splitter_occupations():
    """Criterion 3: truncated-Fock steady occupations vs closed form <= 5%."""
    rng = np.random.default_rng(303)
    worst = 0.0
    for i in range(10):
        gt, gy = rng.uniform(0.7, 1.3, 2)
        nby = rng.uniform(0.5, 1.2)
        nbt = rng.uniform(0.0, 0.3) * nby
        delta = rng.uniform(-0.5, 0.5)
        target = rng.uniform(0.02, 0.1) * min(gt, gy)  # weak-coupling exchange rate
        s = gt + gy
        g = math.sqrt(target * (s * s + 4 * delta * delta) / (2 * s))
        trunc = (8, 12)
        gen = oracle.build_bs_generator(delta, g, (gt, gy), (nbt, nby), trunc)
        state, exp = oracle.settle_expectations(
            gen, oracle.thermal_state(trunc, nbt, nby), chunk=8.0, settle_tol=2e-6, tol=1e-8
        )
        assert state.converged, f"config {i} leaked population"
        mp = toy_mode_params(
            gamma_theta=gt, gamma_y=gy, eta_thetay=g / 4.0, nbar_theta=nbt, nbar_y=nby
        )
        cfg = lc.CoolingConfig(
            delta=delta, branch=make_branch(1.0, 1.0), nbar_theta=nbt, nbar_y=nby
        )
        closed = lc.steady_occupations(mp, cfg)
        err = abs(exp[1] - closed.n_y_out) / closed.n_y_out
        worst = max(worst, err)
    assert worst <= 0.05
    record(f"[PASS] criterion 3: beam-splitter oracle vs closed form, worst {worst:.2%} <= 5%")


def test_c4_oracle_tracks_mean_field():
    """Criterion 4: full RWA Lindblad <b> tracks the amplitude equations <= 5%."""
    configs = [
        dict(eta=(0.010, 0.008, 0.004), drive=(1.4, 1.2, 0.35, -0.25)),
        dict(eta=(0.006, 0.012, 0.003), drive=(1.1, 1.5, -0.3, 0.2)),
    ]
    worst = 0.0
    for c in configs:
        et, ey, exy = c["eta"]
        o1, o2, d1, d2 = c["drive"]
        mp = toy_mode_params(
            gamma_theta=1.0, gamma_y=1.0, eta_theta=et, eta_y=ey, eta_thetay=exy
        )
        drive = DriveConfig(o1, o2, d1, d2, units_mode="si")
        trunc = (12, 12)
        gen = oracle.build_rwa_generator(mp, drive, trunc)
        horizon = 5.0  # five damping times at gamma = 1
        times = np.linspace(0.0, horizon, 21)
        state = oracle.vacuum_state(trunc)
        amps = []
        cur = 0.0
        for tq in times[1:]:
            state = oracle.evolve(gen, state, tq - cur, tol=1e-9)
            cur = tq
            amps.append(oracle.expectations(state)[2:])
        assert state.leakage < 0.01
        traj = lc.integrate(mp, drive, 0j, 0j, (0.0, horizon), rel_tol=1e-11, samples=21)
        for k, (b_t, b_y) in enumerate(amps):
            scale_t = max(abs(a[0]) for a in amps)
            scale_y = max(abs(a[1]) for a in amps)
            worst = max(
                worst,
                abs(b_t - traj.beta_theta[k + 1]) / scale_t,
                abs(b_y - traj.beta_y[k + 1]) / scale_y,
            )
    assert worst <= 0.05
    record(f"[PASS] criterion 4: RWA oracle tracks mean field, worst {worst:.2%} <= 5%")


def test_c5_fixed_point_dynamics_consistency():
    """Criterion 5: stable branches attract from 1% off; unstable ones repel."""
    configs = fold_configs(seed=505, count=20)
    assert len(configs) == 20
    checked_stable = checked_unstable = 0
    for mp, drive, res in configs:
        for idx, b in enumerate(res):
            start = (b.beta_theta * 1.01, b.beta_y * 1.01)
            s = settle(mp, drive, start, max_time=8000.0, branches=res)
            if b.stability == "stable":
                assert s.converged, f"stable branch did not settle: {b}"
                assert s.matched_branch == idx
                checked_stable += 1
            elif b.stability == "unstable":
                assert s.matched_branch != idx
                checked_unstable += 1
    record(
        f"[PASS] criterion 5: {checked_stable} stable branches re-attract, "
        f"{checked_unstable} unstable branches repel (20 fold configurations)"
    )


def _axis(start, stop, count):
    return np.linspace(start, stop, count)


def test_c6_multistability_maps():
    """Criterion 6: lobe structure, blue-blue uniqueness, mixed-sign recovery."""
    geo, beam, env = scene()
    mp = lc.derive_mode_params(geo, beam, env)
    ratio = mp.omega_y / mp.omega_theta
    n = 100

    # red-red lobe at the derived parameter set
    drive = DriveConfig(0.0, 0.0, 0.01, 0.01 * ratio, units_mode="normalized")
    m_red = sweep(
        mp,
        drive,
        AxisSpec("omega_1", 0.15 / n, 0.15, n),
        AxisSpec("omega_2", 0.15 / n, 0.15, n),
    )
    counts_red = m_red.branch_counts()
    assert counts_red.max() >= 3
    frac = float((counts_red >= 3).mean())

    rows = []
    for i, x1 in enumerate(m_red.values_1):
        for j, x2 in enumerate(m_red.values_2):
            cell = m_red.cell(i, j)
            for idx, b in enumerate(cell):
                rows.append((x1, x2, len(cell), idx, b.n_theta, b.n_y, b.stability))
    _write_csv(
        OUT / "sweep.csv",
        "acceptance-red-red",
        ("axis1", "axis2", "branch_count", "branch_idx", "n_theta", "n_y", "stability"),
        rows,
    )

    # blue-blue: single stable branch for arbitrary drive amplitude
    drive_bb = DriveConfig(0.0, 0.0, -0.1, -0.1, units_mode="normalized")
    m_blue = sweep(
        mp,
        drive_bb,
        AxisSpec("omega_1", 0.5 / n, 0.5, n),
        AxisSpec("omega_2", 0.5 / n, 0.5, n),
    )
    assert np.all(m_blue.branch_counts() == 1)

    # mixed-sign cases at the quoted parameter set
    mp_q = quoted_mode_params()
    ratio_q = mp_q.omega_y / mp_q.omega_theta

    drive_a = DriveConfig(0.0, 0.0, -0.01, 0.01 * ratio_q, units_mode="normalized")
    m_a = sweep(
        mp_q,
        drive_a,
        AxisSpec("omega_1", 0.15 / n, 0.15, n),
        AxisSpec("omega_2", 0.15 / n, 0.15, n),
    )
    counts_a = m_a.branch_counts()
    stable_2 = np.zeros_like(counts_a, dtype=bool)
    for i in range(n):
        for j in range(n):
            cell = m_a.cell(i, j)
            stable_2[i, j] = sum(b.stability == "stable" for b in cell) >= 2
    assert np.any((counts_a >= 3) & stable_2)  # bistable region exists
    recovery_a = m_a.values_2 >= 0.05
    assert np.all(counts_a[:, recovery_a] == 1)  # steady state restored

    drive_b = DriveConfig(0.0, 0.0, 0.01, -0.01 * ratio_q, units_mode="normalized")
    m_b = sweep(
        mp_q,
        drive_b,
        AxisSpec("omega_1", 1.0 / n, 1.0, n),
        AxisSpec("omega_2", 0.15 / n, 0.15, n),
    )
    counts_b = m_b.branch_counts()
    stable_2b = np.zeros_like(counts_b, dtype=bool)
    for i in range(n):
        for j in range(n):
            stable_2b[i, j] = sum(b.stability == "stable" for b in m_b.cell(i, j)) >= 2
    assert np.any((counts_b >= 3) & stable_2b)
    assert np.all(counts_b[m_b.values_1 >= 0.9, :] == 1)

    record(
        f"[PASS] criterion 6: red-red lobe has {frac:.1%} multistable cells; "
        "blue-blue unique everywhere; mixed-sign bistable with recovery at large drive"
    )


def test_c7_cooling_phenomenology():
    """Criterion 7: mismatch minimum, pressure saturation, quoted-ratio check,
    feedback floor and mismatched-drive heating."""
    geo, beam, _ = scene()
    pressures = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7]
    readings = {"caption": 0.01, "text": 0.1}
    ratio_q = QUOTED["omega_y"] / QUOTED["omega_theta"]
    delta_grid_norm = np.linspace(-6e-4, 6e-4, 61)

    min_xi = {}
    curves = {}
    for label, omega_2 in readings.items():
        drive = DriveConfig(0.1, omega_2, 1e-3, 1e-3 * ratio_q, units_mode="normalized")
        for p in pressures:
            env = lc.Environment(p, 300.0)
            rows = cooling_mod.cooling_sweep(
                geo,
                beam,
                env,
                drive,
                "delta",
                delta_grid_norm * QUOTED["omega_theta"],
                overrides=QUOTED,
            )
            xi = np.array([r.xi for r in rows])
            assert not np.any(np.isnan(xi))
            assert int(np.argmin(xi)) == len(xi) // 2  # optimum at zero mismatch
            curves[(label, p)] = xi
            min_xi[(label, p)] = float(xi.min())

    # saturation: curves at P <= 1e-5 Pa coincide within 1%
    for label in readings:
        base = curves[(label, 1e-7)]
        for p in (1e-5, 1e-6):
            spread = np.max(np.abs(curves[(label, p)] - base) / base)
            assert spread <= 0.01, f"{label} P={p}: spread {spread:.3%}"
        assert min_xi[(label, 1e-3)] >= min_xi[(label, 1e-5)]  # lower pressure cools better

    # quoted cooling-ratio comparison under both drive readings
    target = 0.57
    hits = {lbl: abs(min_xi[(lbl, 1e-5)] - target) <= 0.1 for lbl in readings}
    note = ", ".join(f"{lbl}: min xi = {min_xi[(lbl, 1e-5)]:.3f}" for lbl in readings)
    if any(hits.values()):
        record(f"criterion 7 note: quoted ratio 0.57 reproduced ({note})")
    else:
        record(
            "criterion 7 CONFORMANCE NOTE: neither drive reading reproduces the "
            f"quoted ratio 0.57 +/- 0.1 at the stated pressure ({note}); the "
            "saturated exchange floor (gamma-weighted bath mixing) sits below it. "
            "Reported, not forced."
        )

    # emit the delta-sweep CSV for the plotting layer
    rows_csv = []
    for p in pressures:
        drive = DriveConfig(0.1, 0.01, 1e-3, 1e-3 * ratio_q, units_mode="normalized")
        env = lc.Environment(p, 300.0)
        rows = cooling_mod.cooling_sweep(
            geo, beam, env, drive, "delta", delta_grid_norm * QUOTED["omega_theta"],
            overrides=QUOTED,
        )
        for dn, r in zip(delta_grid_norm, rows):
            rows_csv.append(
                (dn, r.pressure_pa, r.delta, r.gamma_fb, r.eta_tilde, r.n_theta_out, r.n_y_out, r.xi)
            )
    _write_csv(OUT / "cooling.csv", "acceptance-cooling", cooling_mod.COOLING_COLUMNS, rows_csv)

    # feedback: matched drives dip to the floor, mismatched drives heat
    mp_q = quoted_mode_params(pressure=1e-5)
    gfb_values = np.geomspace(0.1, 1e5, 90) * mp_q.gamma_theta

    def feedback_curve(omega_2):
        drive = DriveConfig(0.1, omega_2, 1e-3, 1e-3 * ratio_q, units_mode="normalized")
        branch = cooling_mod.select_operating_branch(branch_solve(mp_q, drive), "lowest")
        assert branch is not None
        xi = []
        for gfb in gfb_values:
            cfg = lc.CoolingConfig(
                delta=0.0,
                branch=branch,
                nbar_theta=mp_q.nbar_theta,
                nbar_y=mp_q.nbar_y,
                gamma_fb=float(gfb),
            )
            xi.append(lc.feedback_occupation(mp_q, cfg).xi)
        return np.array(xi)

    xi_matched = feedback_curve(0.1)
    assert xi_matched.min() <= 0.05
    xi_mismatched = feedback_curve(1e-4)
    assert xi_mismatched[-1] > xi_mismatched[0] + 0.1  # heated by strong feedback
    assert xi_mismatched[-1] > 0.9

    rows_fb = []
    for gfb, xi in zip(gfb_values, xi_matched):
        rows_fb.append((gfb / mp_q.gamma_theta, 1e-5, 0.0, gfb, math.nan, math.nan, math.nan, xi))
    _write_csv(
        OUT / "cooling_feedback.csv", "acceptance-feedback", cooling_mod.COOLING_COLUMNS, rows_fb
    )

    record(
        "[PASS] criterion 7: mismatch optimum at zero, pressure saturation <= 1%, "
        f"matched feedback floor {xi_matched.min():.3f} <= 0.05, mismatched drives heat "
        f"(xi {xi_mismatched[0]:.2f} -> {xi_mismatched[-1]:.2f})"
    )


def test_c8_coefficient_hierarchy_and_spot_values():
    """Criterion 8: sextic/octic coefficients sit far below the quartic ones;
    quoted spot values compared within factor 10 (conformance report)."""
    geo, beam, env = scene()
    r_b = np.linspace(5e-9, 50e-9, 46)
    table = lc.coefficient_sweep(geo, beam, r_b)
    prolate = table[:, 0] < geo.r_a
    quartic_min = table[prolate, 1:4].min(axis=1)
    higher_max = table[prolate, 4:7].max(axis=1)
    assert np.all(higher_max * 100 <= quartic_min)
    _write_csv(
        OUT / "coefficients.csv",
        "acceptance-coefficients",
        lc.physics.COEFFICIENT_COLUMNS,
        table,
    )

    mp = lc.derive_mode_params(geo, beam, env)
    flags = []
    for name, quoted in QUOTED.items():
        derived = getattr(mp, name)
        as_hz = derived / quoted  # quoted read as cycles/s (x 2 pi applied)
        as_rad = derived / (quoted / TWO_PI)  # quoted read as rad/s
        ok = (0.1 <= as_hz <= 10) or (0.1 <= as_rad <= 10)
        flags.append((name, as_hz, as_rad, ok))
    agreements = sum(1 for *_x, ok in flags if ok)
    detail = "; ".join(
        f"{name}: x{hz:.3g} (cycles/s reading) / x{rad:.3g} (rad/s reading)"
        for name, hz, rad, _ in flags
    )
    record(
        f"[PASS] criterion 8: coefficient hierarchy holds (>= 2 orders); spot values "
        f"within factor 10 under at least one unit reading for {agreements}/5 "
        f"quantities - {detail}"
    )


def test_c9_determinism_across_workers(tmp_path):
    """Criterion 9: byte-identical CSVs at worker counts 1 and 8."""
    cfg = tmp_path / "det.yaml"
    cfg.write_text(
        "sweep:\n"
        "  axis_1: {name: omega_1, start: 0.01, stop: 0.12, count: 12}\n"
        "  axis_2: {name: omega_2, start: 0.01, stop: 0.12, count: 12}\n"
        "drive: {omega_1: 0.05, omega_2: 0.025, delta_1: 0.01, delta_2: 1.3841e-3}\n"
    )
    out1, out8 = tmp_path / "w1", tmp_path / "w8"
    assert main(["--config", str(cfg), "--out", str(out1), "--workers", "1", "sweep"]) == 0
    assert main(["--config", str(cfg), "--out", str(out8), "--workers", "8", "sweep"]) == 0
    b1 = (out1 / "sweep.csv").read_bytes()
    b8 = (out8 / "sweep.csv").read_bytes()
    assert b1 == b8
    # repeat run is byte-identical too
    outr = tmp_path / "w1r"
    assert main(["--config", str(cfg), "--out", str(outr), "--workers", "1", "sweep"]) == 0
    assert (outr / "sweep.csv").read_bytes() == b1
    record("[PASS] criterion 9: sweep CSV byte-identical at 1 and 8 workers")


def test_emit_trajectory_artifact():
    """Companion artifact for the plotting layer: one settling trajectory."""
    mp, drive, res = fold_configs(seed=77, count=1)[0]
    traj = lc.integrate(mp, drive, 0.05 + 0.05j, 0.05 - 0.05j, (0.0, 400.0), rel_tol=1e-9)
    rows = zip(
        traj.times,
        traj.beta_theta.real,
        traj.beta_theta.imag,
        traj.beta_y.real,
        traj.beta_y.imag,
    )
    _write_csv(
        OUT / "trajectory.csv",
        "acceptance-trajectory",
        ("t", "re_beta_theta", "im_beta_theta", "re_beta_y", "im_beta_y"),
        rows,
    )
    assert (OUT / "trajectory.csv").stat().st_size > 0
