"""SVG figures from CSV tables (matplotlib, non-interactive backend)."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed hash salt and no date stamp keep the SVG output byte-reproducible
matplotlib.rcParams["svg.hashsalt"] = "vibqed"
_SVG_META = {"Date": None, "Creator": None}


class PlotError(ValueError):
    pass


@dataclass
class PlotSpec:
    kind: str  # "line" or "heatmap"
    x: str
    y: list[str] = field(default_factory=list)  # line: series; heatmap: [y column]
    z: str | None = None  # heatmap value column
    contour: str | None = None  # heatmap: column drawn as contours
    levels: list[float] = field(default_factory=lambda: [0.90, 0.95])
    xlabel: str | None = None
    ylabel: str | None = None
    title: str | None = None
    output: str | None = None
    logy: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> PlotSpec:
        if not isinstance(d, dict):
            raise PlotError("plot spec must be a mapping")
        kind = d.get("kind", "line")
        if kind not in ("line", "heatmap"):
            raise PlotError(f"unknown plot kind {kind!r}")
        if "x" not in d:
            raise PlotError("plot spec needs an 'x' column")
        y = d.get("y", [])
        y = [y] if isinstance(y, str) else list(y)
        return cls(
            kind,
            d["x"],
            y,
            d.get("z"),
            d.get("contour"),
            list(d.get("levels", [0.90, 0.95])),
            d.get("xlabel"),
            d.get("ylabel"),
            d.get("title"),
            d.get("output"),
            bool(d.get("logy", False)),
        )


def read_table(path: str | Path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotError(f"{path} is empty") from None
        rows = [r for r in reader if r]
    cols: dict[str, list] = {h: [] for h in header}
    for r in rows:
        for h, v in zip(header, r):
            cols[h].append(v)
    out = {}
    for h, vals in cols.items():
        try:
            out[h] = np.array([float(v) if v != "" else np.nan for v in vals])
        except ValueError:
            out[h] = np.array(vals, dtype=object)
    return out


def _require(table: dict, names):
    missing = [n for n in names if n and n not in table]
    if missing:
        raise PlotError(f"missing column(s): {', '.join(missing)}")
    if not table or len(next(iter(table.values()))) == 0:
        raise PlotError("table has no data rows")


def _frequency_label(name: str) -> str:
    labels = {
        "omega_c": r"$\omega_c/\omega_0$",
        "nu": r"$\nu/\omega_0$",
        "eta_g": r"$\eta g/\omega_0$",
        "time": r"$\omega_0 t$",
        "gap": r"splitting $/\omega_0$",
    }
    return labels.get(name, name)


def emit_plot(table: dict[str, np.ndarray] | str | Path, spec: PlotSpec | dict, output: str | Path | None = None) -> Path:
    """Render a line plot or heatmap to SVG; raises PlotError (and writes nothing) on bad input."""
    if isinstance(spec, dict):
        spec = PlotSpec.from_dict(spec)
    if not isinstance(table, dict):
        table = read_table(table)
    out = Path(output or spec.output or "plot.svg")
    if spec.kind == "line":
        if not spec.y:
            raise PlotError("line plot needs at least one y column")
        _require(table, [spec.x, *spec.y])
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        x = table[spec.x]
        for name in spec.y:
            ax.plot(x, table[name], lw=1.2, label=name, gid=f"series_{name}")
        if len(spec.y) > 1:
            ax.legend(fontsize=8, frameon=False)
        if spec.logy:
            ax.set_yscale("log")
        ax.set_xlabel(spec.xlabel or _frequency_label(spec.x))
        ax.set_ylabel(spec.ylabel or (_frequency_label(spec.y[0]) if len(spec.y) == 1 else "value"))
    else:
        if not spec.y or not spec.z:
            raise PlotError("heatmap needs y and z columns")
        _require(table, [spec.x, spec.y[0], spec.z, spec.contour])
        xs = np.unique(table[spec.x])
        ys = np.unique(table[spec.y[0]])
        grid = np.full((len(ys), len(xs)), np.nan)
        cgrid = np.full_like(grid, np.nan)
        ix = np.searchsorted(xs, table[spec.x])
        iy = np.searchsorted(ys, table[spec.y[0]])
        grid[iy, ix] = table[spec.z]
        if spec.contour:
            cgrid[iy, ix] = table[spec.contour]
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        mesh = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=_frequency_label(spec.z))
        if spec.contour and len(xs) > 1 and len(ys) > 1 and np.isfinite(cgrid).any():
            styles = ["--", ":", "-."]
            cs = ax.contour(xs, ys, cgrid, levels=sorted(spec.levels), colors="white",
                            linestyles=[styles[i % 3] for i in range(len(spec.levels))], linewidths=1.0)
            ax.clabel(cs, fmt="%.2f", fontsize=7)
        ax.set_xlabel(spec.xlabel or _frequency_label(spec.x))
        ax.set_ylabel(spec.ylabel or _frequency_label(spec.y[0]))
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return out
