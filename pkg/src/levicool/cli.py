"""Command-line entry point: config ingestion, dispatch, CSV/report emission.

Subcommands
-----------
derive    parameter bundle report plus the coefficient-hierarchy CSV
steady    branch enumeration at a single drive point (text report)
sweep     multistability map over two drive axes (CSV)
dynamics  one amplitude trajectory (CSV)
cooling   cooling figures of merit along a swept axis (CSV)
oracle    truncated-Fock validation report (text)

Exit codes: 0 success, 2 config schema violation, 3 physical invariant
violation, 4 numerical non-convergence, 5 unwritable output path.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import cooling as cooling_mod
from . import meanfield, oracle, physics, steady
from .config import RunConfig, parse_config
from .errors import (
    ConfigurationError,
    DomainError,
    IntegrationError,
    OracleError,
    PreconditionError,
)
from .physics import TWO_PI

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_INVARIANT = 3
EXIT_NUMERICS = 4
EXIT_OUTPUT = 5

# Commonly quoted reference operating point for this particle/beam, used
# only for the conformance comparison table (value, display unit).
REFERENCE_VALUES = {
    "omega_theta": (2.34e6, "Hz"),
    "omega_y": (24.5e3, "Hz"),
    "eta_theta": (0.202, "Hz"),
    "eta_y": (0.105e-3, "Hz"),
    "eta_thetay": (2.01e-3, "Hz"),
}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, config_hash: str, header: tuple[str, ...], rows) -> None:
    lines = [f"# config_sha256={config_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (int, float)) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _drive_from_config(cfg: RunConfig) -> steady.DriveConfig:
    return steady.DriveConfig(
        omega_1=cfg.drive["omega_1"],
        omega_2=cfg.drive["omega_2"],
        delta_1=cfg.drive["delta_1"],
        delta_2=cfg.drive["delta_2"],
        units_mode=cfg.units_mode,
    )


def _mode_params(cfg: RunConfig, paper_formula: bool) -> physics.ModeParams:
    return physics.derive_mode_params(
        cfg.geometry,
        cfg.beam,
        cfg.environment,
        paper_formula_thetay=paper_formula,
        overrides=cfg.overrides or None,
    )


def _comparison_table(mp: physics.ModeParams) -> list[str]:
    lines = [
        "reference-value comparison (flag: within factor 10 of derived)",
        f"{'quantity':<12} {'derived rad/s':>14} {'as cycles/s':>12} {'flag':>6} "
        f"{'as rad/s':>12} {'flag':>6}",
    ]
    for name, (value, _unit) in REFERENCE_VALUES.items():
        derived = getattr(mp, name)
        as_hz = value * TWO_PI
        as_rad = value

        def flag(ref):
            if derived == 0.0 or ref == 0.0:
                return "n/a"
            ratio = derived / ref
            return "agree" if 0.1 <= ratio <= 10.0 else "DIFFER"

        lines.append(
            f"{name:<12} {derived:>14.6g} {as_hz:>12.6g} {flag(as_hz):>6} "
            f"{as_rad:>12.6g} {flag(as_rad):>6}"
        )
    return lines


def _cmd_derive(cfg: RunConfig, out: Path, paper_formula: bool) -> int:
    mp = _mode_params(cfg, paper_formula)
    coeff = cfg.coefficients
    r_b = np.linspace(coeff["r_b_min_m"], coeff["r_b_max_m"], coeff["count"])
    table = physics.coefficient_sweep(
        cfg.geometry, cfg.beam, r_b, paper_formula_thetay=paper_formula
    )
    _write_csv(
        out / "coefficients.csv",
        cfg.config_hash(),
        physics.COEFFICIENT_COLUMNS,
        table,
    )

    lines = ["derived mode parameters (SI, rates in rad/s)"]
    for name in (
        "mass",
        "volume",
        "inertia",
        "intensity_0",
        "u0_mag",
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
    ):
        lines.append(f"{name} = {_fmt(getattr(mp, name))}")
    lines.append(f"librationally_untrapped = {mp.librationally_untrapped}")
    lines.append("")
    lines.extend(_comparison_table(mp))
    if mp.omega_y > 0:
        ratio = mp.omega_theta / mp.omega_y
        lines.append("")
        lines.append(
            f"frequency ratio omega_theta/omega_y = {ratio:.4g} "
            "(reference quote implies ~95.5; known internal tension, reported not forced)"
        )
    (out / "mode_params.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _branch_report(result: steady.BranchSolveResult, units_mode: str) -> list[str]:
    lines = [f"branches found: {len(result)} (units_mode={units_mode})"]
    for i, b in enumerate(result):
        lines.append(f"branch {i}:")
        lines.append(f"  n_theta = {_fmt(b.n_theta)}")
        lines.append(f"  n_y = {_fmt(b.n_y)}")
        lines.append(f"  beta_theta = {_fmt(b.beta_theta.real)} {b.beta_theta.imag:+.17g}j")
        lines.append(f"  beta_y = {_fmt(b.beta_y.real)} {b.beta_y.imag:+.17g}j")
        lines.append(f"  stability = {b.stability}")
        eigs = ", ".join(f"{e.real:.6g}{e.imag:+.6g}j" for e in b.jacobian_eigenvalues)
        lines.append(f"  eigenvalues = [{eigs}]")
        lines.append(f"  residual = {b.residual:.3e}")
    for w in result.warnings:
        lines.append(f"warning: {w}")
    return lines


def _cmd_steady(cfg: RunConfig, out: Path, paper_formula: bool) -> int:
    mp = _mode_params(cfg, paper_formula)
    result = steady.branch_solve(mp, _drive_from_config(cfg))
    (out / "branches.txt").write_text("\n".join(_branch_report(result, cfg.units_mode)) + "\n")
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig, out: Path, paper_formula: bool, workers: int) -> int:
    mp = _mode_params(cfg, paper_formula)
    drive = _drive_from_config(cfg)
    ax1 = steady.AxisSpec(**cfg.sweep["axis_1"])
    ax2 = steady.AxisSpec(**cfg.sweep["axis_2"])
    result = steady.sweep(mp, drive, ax1, ax2, workers=workers)
    rows = []
    for i, x1 in enumerate(result.values_1):
        for j, x2 in enumerate(result.values_2):
            cell = result.cell(i, j)
            for idx, b in enumerate(cell):
                rows.append((x1, x2, len(cell), idx, b.n_theta, b.n_y, b.stability))
    _write_csv(
        out / "sweep.csv",
        cfg.config_hash(),
        ("axis1", "axis2", "branch_count", "branch_idx", "n_theta", "n_y", "stability"),
        rows,
    )
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _cmd_dynamics(cfg: RunConfig, out: Path, paper_formula: bool) -> int:
    mp = _mode_params(cfg, paper_formula)
    dyn = cfg.dynamics
    traj = meanfield.integrate(
        mp,
        _drive_from_config(cfg),
        complex(dyn["beta0_theta_re"], dyn["beta0_theta_im"]),
        complex(dyn["beta0_y_re"], dyn["beta0_y_im"]),
        (0.0, dyn["t_final"]),
        rel_tol=dyn["rel_tol"],
        samples=int(dyn["samples"]),
    )
    rows = zip(
        traj.times,
        traj.beta_theta.real,
        traj.beta_theta.imag,
        traj.beta_y.real,
        traj.beta_y.imag,
    )
    _write_csv(
        out / "trajectory.csv",
        cfg.config_hash(),
        ("t", "re_beta_theta", "im_beta_theta", "re_beta_y", "im_beta_y"),
        rows,
    )
    return EXIT_OK


def _cmd_cooling(cfg: RunConfig, out: Path, paper_formula: bool) -> int:
    cool = cfg.cooling
    drive = _drive_from_config(cfg)
    mp = _mode_params(cfg, paper_formula)
    scale = mp.omega_theta if cfg.units_mode == "normalized" else 1.0
    delta = cool["delta"] * scale
    gamma_fb = cool["gamma_fb"] * mp.gamma_theta if cfg.units_mode == "normalized" else cool["gamma_fb"]
    axis = cool["axis"]
    if axis["log"]:
        values = np.geomspace(axis["start"], axis["stop"], axis["count"])
    else:
        values = np.linspace(axis["start"], axis["stop"], axis["count"])
    axis_values = values
    if cfg.units_mode == "normalized":
        if axis["name"] == "delta":
            values = values * mp.omega_theta
        elif axis["name"] == "gamma_fb":
            values = values * mp.gamma_theta
        # omega_1/omega_2 axes stay normalized (DriveConfig is normalized);
        # pressure is always in Pa.

    all_rows = []
    pressures = cool["pressures_pa"] if axis["name"] != "pressure" else [cfg.environment.pressure]
    from dataclasses import replace as _replace

    for p_pa in pressures:
        env = _replace(cfg.environment, pressure=float(p_pa))
        rows = cooling_mod.cooling_sweep(
            cfg.geometry,
            cfg.beam,
            env,
            drive,
            axis["name"],
            values,
            delta=delta,
            gamma_fb=gamma_fb,
            overrides=cfg.overrides or None,
            paper_formula_thetay=paper_formula,
            branch_policy=cool["branch_policy"],
        )
        for axis_value, row in zip(axis_values, rows):
            if row.no_stable_branch:
                print(
                    f"warning: no stable branch at {axis['name']}={axis_value:g}, "
                    f"P={row.pressure_pa:g} Pa",
                    file=sys.stderr,
                )
            all_rows.append(
                (
                    axis_value,
                    row.pressure_pa,
                    row.delta,
                    row.gamma_fb,
                    row.eta_tilde,
                    row.n_theta_out,
                    row.n_y_out,
                    row.xi,
                )
            )
    _write_csv(out / "cooling.csv", cfg.config_hash(), cooling_mod.COOLING_COLUMNS, all_rows)
    return EXIT_OK


def _cmd_oracle(cfg: RunConfig, out: Path, seed: int) -> int:
    rng = np.random.default_rng(seed)
    trunc = tuple(cfg.oracle["truncation"])
    lines = [f"truncated-Fock validation (truncation {trunc}, seed {seed})"]
    ok = True

    # Damped Fock state: mean occupation decays at exactly gamma.
    gamma = 1.0
    gen = oracle.build_bs_generator(0.0, 0.0, (gamma, gamma), (0.0, 0.0), trunc)
    state = oracle.fock_state(trunc, 1, 0)
    t = 1.3
    final = oracle.evolve(gen, state, t, tol=1e-10)
    n_t = oracle.expectations(final)[0]
    err = abs(n_t - math.exp(-gamma * t))
    lines.append(f"single-quantum decay: |<n>-exp(-gt)| = {err:.2e} (tol 1e-8)")
    ok &= err <= 1e-8

    # Thermalization toward the bath occupation (tail fits the truncation).
    nbar = 0.3
    gen = oracle.build_bs_generator(0.0, 0.0, (1.0, 1.0), (0.2, nbar), trunc)
    final, exp = oracle.settle_expectations(
        gen, oracle.vacuum_state(trunc), chunk=6.0, settle_tol=1e-6, tol=1e-9
    )
    err = abs(exp[1] - nbar) / nbar
    lines.append(f"thermalization: relative <n_y> error = {err:.2e} (tol 2e-3)")
    ok &= err <= 2e-3

    # Excitation exchange conserves total occupation without damping.
    g = 0.4 + 0.4 * rng.random()
    gen = oracle.build_bs_generator(0.0, g, (0.0, 0.0), (0.0, 0.0), trunc)
    state = oracle.fock_state(trunc, 2, 0)
    final = oracle.evolve(gen, state, 2.0, tol=1e-10)
    exp = oracle.expectations(final)
    err = abs(exp[0] + exp[1] - 2.0)
    lines.append(f"exchange conservation: |n_t+n_y-2| = {err:.2e} (tol 1e-8)")
    ok &= err <= 1e-8

    # Steady-state excitation balance between the two baths.
    gen = oracle.build_bs_generator(
        0.0, 0.25, (1.0, 0.8), (0.1, nbar), trunc
    )
    final, exp = oracle.settle_expectations(
        gen, oracle.thermal_state(trunc, 0.1, nbar), chunk=8.0, settle_tol=1e-6, tol=1e-9
    )
    balance = abs(1.0 * (exp[0] - 0.1) - 0.8 * (nbar - exp[1]))
    lines.append(f"steady heat-flow balance: residual = {balance:.2e} (tol 1e-3)")
    ok &= balance <= 1e-3
    lines.append(f"final-state leakage = {final.leakage:.2e}, converged = {final.converged}")
    ok &= final.converged

    lines.append("overall: " + ("pass" if ok else "FAIL"))
    (out / "oracle_report.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_NUMERICS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levicool",
        description="Coupled librational-translational trap dynamics and synthetic cooling",
    )
    parser.add_argument("--config", type=str, default=None, help="YAML config path")
    parser.add_argument("--out", type=str, default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=None, help="sweep worker count")
    parser.add_argument(
        "--units", choices=["si", "normalized"], default=None, help="override units_mode"
    )
    parser.add_argument(
        "--paper-formula",
        action="store_true",
        help="use the literature printed form of the cross coupling coefficient "
        "(dimensionally inconsistent; comparison only)",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    parser.add_argument(
        "command",
        choices=["derive", "steady", "sweep", "dynamics", "cooling", "oracle"],
    )
    return parser


def execute(args) -> int:
    try:
        document = None
        if args.config is not None:
            document = Path(args.config).read_text()
        cfg = parse_config(document)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except DomainError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    if args.units is not None:
        resolved = dict(cfg.resolved)
        resolved["units_mode"] = args.units
        import json as _json

        cfg = parse_config(_json.dumps(resolved))
    workers = args.workers if args.workers is not None else cfg.workers

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"output path not writable: {exc}", file=sys.stderr)
        return EXIT_OUTPUT

    try:
        if args.command == "derive":
            return _cmd_derive(cfg, out, args.paper_formula)
        if args.command == "steady":
            return _cmd_steady(cfg, out, args.paper_formula)
        if args.command == "sweep":
            return _cmd_sweep(cfg, out, args.paper_formula, workers)
        if args.command == "dynamics":
            return _cmd_dynamics(cfg, out, args.paper_formula)
        if args.command == "cooling":
            return _cmd_cooling(cfg, out, args.paper_formula)
        if args.command == "oracle":
            return _cmd_oracle(cfg, out, args.seed)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (DomainError, PreconditionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (IntegrationError, OracleError) as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except OSError as exc:
        print(f"output failure: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    raise AssertionError("unreachable")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
