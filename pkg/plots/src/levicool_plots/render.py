"""Render figure analogs from levicool CSV outputs.

Four kinds, matched to the CSV schemas the simulator emits:

  coeff_lines     nonlinear coefficients vs short axis, log scale
  branch_heatmap  branch count and occupation extrema over a drive plane
  cooling_curves  cooling ratio vs swept axis, one line per pressure
  trajectory      amplitude components vs time

Rendering is deterministic: fixed figure size, dpi, and fonts, and PNG
metadata is stripped, so re-rendering identical inputs is byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMAS = {
    "coeff_lines": (
        "r_b_m",
        "eta_theta",
        "eta_y",
        "eta_thetay",
        "eta_1",
        "eta_2",
        "eta_3",
    ),
    "branch_heatmap": (
        "axis1",
        "axis2",
        "branch_count",
        "branch_idx",
        "n_theta",
        "n_y",
        "stability",
    ),
    "cooling_curves": (
        "axis_value",
        "pressure_pa",
        "delta",
        "gamma_fb",
        "eta_tilde",
        "n_theta_out",
        "n_y_out",
        "xi",
    ),
    "trajectory": ("t", "re_beta_theta", "im_beta_theta", "re_beta_y", "im_beta_y"),
}

FIGSIZE = (8.0, 5.0)
DPI = 150


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class PlotSpec:
    csv_path: Path
    kind: str
    out_path: Path

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(f"unknown plot kind {self.kind!r}; choose from {sorted(SCHEMAS)}")


def read_table(path: Path, kind: str):
    """Parse a simulator CSV, checking the header against the kind's schema."""
    expected = SCHEMAS[kind]
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty table")
    header = tuple(rows[0])
    if header != expected:
        raise SchemaError(
            f"{path}: column mismatch for kind {kind!r}\n"
            f"  expected: {','.join(expected)}\n"
            f"  found:    {','.join(header)}"
        )
    columns: dict[str, list] = {name: [] for name in header}
    for row in rows[1:]:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row with {len(row)} fields, expected {len(header)}")
        for name, value in zip(header, row):
            columns[name].append(value)
    numeric = {}
    for name, values in columns.items():
        if name == "stability":
            numeric[name] = np.array(values)
        else:
            numeric[name] = np.array([float(v) for v in values])
    return numeric


def _positive_masked(x, y):
    mask = y > 0
    return x[mask], y[mask]


def _plot_coeff_lines(table, ax_all):
    ax = ax_all[0]
    r_nm = table["r_b_m"] * 1e9
    styles = {
        "eta_theta": "-",
        "eta_y": "-",
        "eta_thetay": "-",
        "eta_1": "--",
        "eta_2": "--",
        "eta_3": ":",
    }
    for name, style in styles.items():
        x, y = _positive_masked(r_nm, table[name])
        if x.size:
            ax.plot(x, y, style, label=name)
    ax.set_yscale("log")
    ax.set_xlabel("short semi-axis (nm)")
    ax.set_ylabel("coefficient (rad/s)")
    ax.set_title("nonlinear coefficient hierarchy")
    ax.legend(fontsize=8, ncol=2)


def _grid_from_rows(table, value_col, reducer):
    x1 = np.unique(table["axis1"])
    x2 = np.unique(table["axis2"])
    grid = np.full((x1.size, x2.size), np.nan)
    i1 = np.searchsorted(x1, table["axis1"])
    i2 = np.searchsorted(x2, table["axis2"])
    values = table[value_col]
    for a, b, v in zip(i1, i2, values):
        cur = grid[a, b]
        grid[a, b] = v if np.isnan(cur) else reducer(cur, v)
    return x1, x2, grid


def _plot_branch_heatmap(table, ax_all):
    panels = [
        ("branch_count", max, "branch count", None),
        ("n_y", min, "min n_y", "log"),
        ("n_y", max, "max n_y", "log"),
    ]
    for ax, (col, red, title, scale) in zip(ax_all, panels):
        x1, x2, grid = _grid_from_rows(table, col, red)
        data = grid.T
        norm = None
        if scale == "log":
            positive = data[np.isfinite(data) & (data > 0)]
            if positive.size:
                norm = matplotlib.colors.LogNorm(vmin=positive.min(), vmax=positive.max())
                data = np.where(data > 0, data, np.nan)
        im = ax.pcolormesh(x1, x2, data, shading="nearest", norm=norm)
        ax.set_title(title)
        ax.set_xlabel("axis1")
        ax.set_ylabel("axis2")
        plt.colorbar(im, ax=ax, fraction=0.046)


def _plot_cooling_curves(table, ax_all):
    ax = ax_all[0]
    pressures = np.unique(table["pressure_pa"])
    for p in pressures:
        mask = table["pressure_pa"] == p
        order = np.argsort(table["axis_value"][mask])
        ax.plot(
            table["axis_value"][mask][order],
            table["xi"][mask][order],
            label=f"P = {p:g} Pa",
        )
    ax.set_xlabel("swept value")
    ax.set_ylabel("cooling ratio")
    ax.set_title("cooling ratio along the sweep")
    ax.legend(fontsize=8)


def _plot_trajectory(table, ax_all):
    ax = ax_all[0]
    t = table["t"]
    for col in ("re_beta_theta", "im_beta_theta", "re_beta_y", "im_beta_y"):
        ax.plot(t, table[col], label=col)
    ax.set_xlabel("time")
    ax.set_ylabel("amplitude")
    ax.set_title("mean-field trajectory")
    ax.legend(fontsize=8)


RENDERERS = {
    "coeff_lines": (_plot_coeff_lines, 1),
    "branch_heatmap": (_plot_branch_heatmap, 3),
    "cooling_curves": (_plot_cooling_curves, 1),
    "trajectory": (_plot_trajectory, 1),
}


def render(spec: PlotSpec) -> Path:
    """Render the CSV to a PNG; deterministic for identical inputs."""
    table = read_table(spec.csv_path, spec.kind)
    fn, n_axes = RENDERERS[spec.kind]
    width = FIGSIZE[0] * (1.0 if n_axes == 1 else 1.9)
    fig, axes = plt.subplots(1, n_axes, figsize=(width, FIGSIZE[1]))
    try:
        fn(table, [axes] if n_axes == 1 else list(axes))
        fig.tight_layout()
        spec.out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.out_path, dpi=DPI, metadata={"Software": None})
    finally:
        plt.close(fig)
    return spec.out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render a levicool CSV to a PNG figure"
    )
    parser.add_argument("--csv", required=True, help="input CSV path")
    parser.add_argument("--kind", required=True, choices=sorted(SCHEMAS))
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(csv_path=Path(args.csv), kind=args.kind, out_path=Path(args.out))
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
