"""Figure renderers for the solver's CSV outputs.

Strictly file-driven: only the published column schemas are consumed, never
solver internals.  Rendering is headless (Agg) and deterministic: identical
inputs produce byte-identical PNGs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIELD_COLUMNS = ["x", "y", "re_u", "im_u", "abs_u", "masked"]
DENSITY_COLUMNS = ["t", "arc", "rho_re", "rho_im", "mu_re", "mu_im", "is_buffer"]
SWEEP_COLUMNS = ["b", "R_L", "T_L", "T_L_prime", "ReA", "ImA", "ReB", "ImB",
                 "ReC", "ImC", "n_iter", "wall_s"]
INTERFACE_COLUMNS = ["t", "x", "y"]

KINDS = ("field", "densities", "convergence", "sweep")


class SchemaError(ValueError):
    pass


@dataclass
class FigureSpec:
    """What to render: input files, figure kind, ranges, output path."""

    kind: str
    input_path: str
    output_path: str
    interface_path: str | None = None
    component: str = "re"  # field plots: re | abs
    xlim: tuple | None = None
    ylim: tuple | None = None
    clim: tuple | None = None
    dpi: int = 130


def _read_csv(path, expected_columns=None, prefix_ok=False):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file (no header row)") from None
        rows = [row for row in reader if row]
    if expected_columns is not None:
        ok = header[: len(expected_columns)] == expected_columns if prefix_ok \
            else header == expected_columns
        if not ok:
            raise SchemaError(
                f"{path}: unexpected columns {header}; expected "
                f"{expected_columns}{' (as prefix)' if prefix_ok else ''} -- "
                "was this file produced by the edgewave CLI?")
    if not rows:
        raise SchemaError(f"{path}: table has a header but no data rows")
    return header, np.array([[float(v) for v in row] for row in rows])


def _save(fig, spec: FigureSpec):
    fig.savefig(spec.output_path, dpi=spec.dpi,
                metadata={"Software": "edgewave-viz"})
    plt.close(fig)


def plot_field(spec: FigureSpec) -> str:
    """Heatmap of the field with the interface overlaid; masked points render
    as gaps."""
    _, data = _read_csv(spec.input_path, FIELD_COLUMNS)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if xs.size * ys.size != data.shape[0]:
        raise SchemaError(f"{spec.input_path}: rows do not form a full x-y grid")
    col = {"re": 2, "im": 3, "abs": 4}.get(spec.component)
    if col is None:
        raise SchemaError(f"unknown field component '{spec.component}'")
    order = np.lexsort((data[:, 1], data[:, 0]))
    data = data[order]
    grid = data[:, col].reshape(xs.size, ys.size)
    mask = data[:, 5].reshape(xs.size, ys.size) > 0
    grid = np.where(mask, np.nan, grid)

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    cmap = plt.get_cmap("RdBu_r" if spec.component != "abs" else "viridis").copy()
    cmap.set_bad(color="white")
    vmin, vmax = (spec.clim if spec.clim else (None, None))
    mesh = ax.pcolormesh(xs, ys, grid.T, cmap=cmap, vmin=vmin, vmax=vmax,
                         shading="nearest")
    fig.colorbar(mesh, ax=ax, label={"re": "Re u", "im": "Im u", "abs": "|u|"}[spec.component])
    if spec.interface_path:
        _, iface = _read_csv(spec.interface_path, INTERFACE_COLUMNS)
        ax.plot(iface[:, 1], iface[:, 2], color="black", lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    ax.set_title("field")
    _save(fig, spec)
    return spec.output_path


def plot_densities(spec: FigureSpec) -> str:
    """|rho| and |mu| along the interface; rho decays while mu keeps
    oscillating at O(1) through the buffers."""
    _, data = _read_csv(spec.input_path, DENSITY_COLUMNS)
    t = data[:, 0]
    rho = np.hypot(data[:, 2], data[:, 3])
    mu = np.hypot(data[:, 4], data[:, 5])
    fig, axes = plt.subplots(2, 1, figsize=(7.2, 4.8), sharex=True)
    axes[0].plot(t, data[:, 4], lw=0.8, label="Re mu")
    axes[0].plot(t, mu, lw=0.8, label="|mu|")
    axes[0].set_ylabel("mu")
    axes[0].legend(loc="upper right", fontsize=8)
    axes[1].plot(t, data[:, 2], lw=0.8, label="Re rho")
    axes[1].plot(t, rho, lw=0.8, label="|rho|")
    axes[1].set_ylabel("rho")
    axes[1].set_xlabel("t")
    axes[1].legend(loc="upper right", fontsize=8)
    buf = data[:, 6] > 0
    for ax in axes:
        if np.any(buf):
            core_lo, core_hi = t[~buf][0], t[~buf][-1]
            ax.axvline(core_lo, color="gray", lw=0.6, ls="--")
            ax.axvline(core_hi, color="gray", lw=0.6, ls="--")
    if spec.xlim:
        axes[1].set_xlim(*spec.xlim)
    axes[0].set_title("densities")
    _save(fig, spec)
    return spec.output_path


def plot_convergence(spec: FigureSpec) -> str:
    """Error ladder on log axes (n_c or tau on the x axis)."""
    header, data = _read_csv(spec.input_path)
    if len(header) < 2 or header[1] != "max_rel_err" or header[0] not in ("n_c", "tau"):
        raise SchemaError(
            f"{spec.input_path}: expected columns (n_c|tau, max_rel_err, ...), "
            f"got {header}")
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    floor = 1e-300
    ax.loglog(data[:, 0], np.maximum(data[:, 1], floor), "o-", lw=1.0)
    for j in range(2, data.shape[1]):
        ax.loglog(data[:, 0], np.maximum(data[:, j], floor), ".--", lw=0.6,
                  alpha=0.6, label=header[j])
    ax.set_xlabel(header[0])
    ax.set_ylabel("relative error")
    ax.grid(True, which="both", alpha=0.3)
    if data.shape[1] > 2:
        ax.legend(fontsize=7)
    ax.set_title("convergence")
    _save(fig, spec)
    return spec.output_path


def plot_sweep(spec: FigureSpec) -> str:
    """R_L (and the direct transmission estimate) as a function of b."""
    _, data = _read_csv(spec.input_path, SWEEP_COLUMNS)
    fig, ax = plt.subplots(figsize=(5.8, 4.0))
    ax.plot(data[:, 0], data[:, 1], "o-", lw=1.2, label="R_L")
    ax.plot(data[:, 0], data[:, 3], ".--", lw=0.8, alpha=0.7, label="T_L'")
    ax.set_xlabel("b")
    ax.set_ylabel("coefficient")
    ax.set_ylim(-0.05, 1.1)
    ax.grid(True, alpha=0.3)
    ax.legend()
    ax.set_title("reflection sweep")
    _save(fig, spec)
    return spec.output_path


RENDERERS = {
    "field": plot_field,
    "densities": plot_densities,
    "convergence": plot_convergence,
    "sweep": plot_sweep,
}


def render(spec: FigureSpec) -> str:
    if spec.kind not in RENDERERS:
        raise SchemaError(f"unknown figure kind '{spec.kind}'; choose from {KINDS}")
    return RENDERERS[spec.kind](spec)
