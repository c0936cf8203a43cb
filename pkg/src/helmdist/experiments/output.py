"""CSV tables and SVG plots."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..fields import ScalarField  # noqa: E402
from .sweep import RateFit, SweepTable  # noqa: E402

SWEEP_HEADER = ("a", "spacing", "sup_error", "beta", "scaled_log_beta", "iterations", "wall_time")

# fixed ids inside the SVG so repeated runs give identical files
plt.rcParams["svg.hashsalt"] = "helmdist"


class OutputError(OSError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _open(path, mode="w"):
    path = Path(path)
    try:
        return open(path, mode, newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_csv(table: SweepTable, path, timings: bool = True) -> None:
    """Write the sweep table; ``timings=False`` leaves wall_time blank for reproducible files."""
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in table.rows:
            w.writerow([_fmt(r.a), _fmt(r.spacing), _fmt(r.sup_error), _fmt(r.beta),
                        _fmt(r.scaled_log_beta), _fmt(r.iterations),
                        _fmt(r.wall_time) if timings else ""])


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_transform_csv(computed: ScalarField, oracle: ScalarField, path, mask=None) -> None:
    """One row per node (or per masked node): ``x[,y],computed,oracle,error``."""
    grid = computed.grid
    coords = grid.coords().reshape(-1, grid.dim)
    c = computed.values.ravel()
    o = oracle.values.ravel()
    keep = np.ones(len(c), dtype=bool) if mask is None else mask.values.ravel()
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"][: grid.dim] + ["computed", "oracle", "error"])
        for p, cv, ov in zip(coords[keep], c[keep], o[keep]):
            w.writerow([repr(float(x)) for x in p] + [_fmt(cv), _fmt(ov), _fmt(cv - ov)])


def emit_fits(fits: Sequence[RateFit], path) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "value", "r2", "r2_centered", "coefficient", "rows"])
        for f in fits:
            w.writerow([f.model, _fmt(f.value), _fmt(f.r2), _fmt(f.r2_centered), _fmt(f.coefficient), f.n])


@dataclass(frozen=True)
class Line:
    x: np.ndarray
    y: np.ndarray
    label: str
    style: str = "-"


@dataclass(frozen=True)
class Heatmap:
    field: ScalarField
    label: str = ""
    contours: tuple = (0.0,)


def _save(fig, path):
    try:
        fig.savefig(Path(path), format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)


def emit_svg(series, path, title: str = "", xlabel: str = "x", ylabel: str = "") -> None:
    """Line plot of ``Line`` items, or a heatmap with contours for a ``Heatmap``."""
    if isinstance(series, Heatmap):
        _heatmap(series, path, title)
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in series:
        ax.plot(s.x, s.y, s.style, label=s.label, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def _heatmap(hm: Heatmap, path, title):
    grid = hm.field.grid
    if grid.dim != 2:
        raise ValueError("heatmaps need a 2D field")
    x, y = grid.axes
    v = np.ma.masked_invalid(hm.field.values.T)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    # an embedded raster keeps the file small on fine grids
    im = ax.imshow(v, origin="lower", extent=(x[0], x[-1], y[0], y[-1]), cmap="RdBu_r",
                   interpolation="nearest")
    fig.colorbar(im, ax=ax, label=hm.label)
    levels = sorted(c for c in hm.contours if v.min() < c < v.max())
    if levels:
        ax.contour(x, y, v, levels=levels, colors="k", linewidths=0.8)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def emit_rate_svg(table: SweepTable, path, fits: Sequence[RateFit] = ()) -> None:
    a = table.column("a")
    err = table.column("sup_error")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(a, err, "o-", label="sup error")
    for f in fits:
        if f.model == "power":
            ax.loglog(a, f.coefficient * a ** f.value, "--", label=f"C a^{f.value:.3f}")
        elif f.model == "sqrtlog":
            ax.loglog(a, f.value * np.sqrt(a) * np.log(1 / a), ":", label=f"{f.value:.3f} sqrt(a) log(1/a)")
    ax.set_xlabel("a")
    ax.set_ylabel("sup error")
    ax.set_title(table.name)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
