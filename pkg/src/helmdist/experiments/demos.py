"""Shipped single-a reproductions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .. import analytic
from ..fields import Grid, ScalarField
from ..geometry import Box
from ..solver import SolverConfig, assemble, solve
from ..sources import Custom
from .config import CaseSpec, load_case
from .output import Heatmap, Line, emit_svg, emit_transform_csv
from .sweep import run_case

CONFIGS = {
    "example1d": "example1d.toml",
    "indicator1d": "indicator1d.toml",
    "disk2d": "disk2d.toml",
    "signed1d": "signed1d.toml",
    "signed2d": "signed2d.toml",
    "two-material": "two_material.toml",
}

DEMO_A = {
    "example1d": 1e-4,
    "varadhan1d": 1e-2,
    "disk2d": 1e-3,
    "signed1d": 1e-4,
    "signed2d": 1e-3,
    "two-material": 1e-3,
}

DEMOS = tuple(DEMO_A)


def config_path(name: str) -> Path:
    return Path(str(resources.files("helmdist.experiments") / "configs" / CONFIGS[name]))


def shipped_case(name: str) -> CaseSpec:
    return load_case(config_path(name))


@dataclass
class DemoReport:
    name: str
    a: float
    metrics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"demo {self.name} (a={self.a:g})"]
        out += [f"  {k}: {v:.6g}" if isinstance(v, float) else f"  {k}: {v}" for k, v in self.metrics.items()]
        out += [f"  wrote {p}" for p in self.files]
        return out


def run_demo(name: str, out_dir=".", a: float | None = None) -> DemoReport:
    if name not in DEMO_A:
        raise KeyError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    a = DEMO_A[name] if a is None else a
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if name == "varadhan1d":
        return _varadhan(a, out_dir)
    if name == "example1d":
        return _example1d(a, out_dir)
    return _generic(name, a, out_dir)


def _varadhan(a: float, out_dir: Path) -> DemoReport:
    # f = 0 falls outside the admissible sources; it is run here only to
    # compare the discrete operator with the closed form
    omega = Box((-1.0,), (1.0,))
    grid = Grid.with_spacing((-1.0,), (1.0,), math.sqrt(a) / 8)
    zero = Custom(lambda p: np.zeros(p.shape[:-1]), zeta=None, bound=0.0)
    res = solve(assemble(omega, grid, a, zero, 1.0), SolverConfig(a))
    x = grid.axes[0]
    exact = analytic.varadhan_1d(x, 1.0, a)
    rep = DemoReport("varadhan1d", a)
    rep.metrics["nodes"] = grid.size
    rep.metrics["max nodal error"] = float(np.max(np.abs(res.u.values - exact)))
    dist = -math.sqrt(a) * np.log(res.u.values)
    rep.metrics["sup |-sqrt(a) log u - (1-|x|)|"] = float(np.max(np.abs(dist - (1 - np.abs(x)))))
    csv_path = out_dir / "varadhan1d.csv"
    emit_transform_csv(res.u, ScalarField(grid, exact), csv_path)
    svg_path = out_dir / "varadhan1d.svg"
    emit_svg([Line(x, res.u.values, "discrete"), Line(x, exact, "closed form", "--")], svg_path,
             title=f"f = 0, g = 1, a = {a:g}", ylabel="u")
    rep.files += [str(csv_path), str(svg_path)]
    return rep


def _example1d(a: float, out_dir: Path) -> DemoReport:
    case = shipped_case("example1d")
    run = run_case(case, a)
    src = case.source
    h, k, zeta = src.h, src.k, src.zeta
    x = run.grid.axes[0]
    inside = run.region.values
    closed = -math.sqrt(a) * analytic.example1d_log_solution(x[inside], h, k, 1.0, zeta, a)
    target = k - np.abs(x[inside])
    discrete = run.transform.distance.values[inside]
    rep = DemoReport("example1d", a)
    rep.metrics["sup error, discrete"] = run.sup_error
    rep.metrics["sup error, closed form"] = float(np.max(np.abs(closed - target)))
    rep.metrics["max |discrete - closed form|"] = float(np.max(np.abs(discrete - closed)))
    rep.metrics["beta"] = run.transform.beta
    csv_path = out_dir / "example1d.csv"
    emit_transform_csv(run.transform.distance, run.oracle, csv_path, run.region)
    svg_path = out_dir / "example1d.svg"
    emit_svg([Line(x[inside], discrete, "-sqrt(a) log u (discrete)"),
              Line(x[inside], closed, "-sqrt(a) log u (closed form)", ":"),
              Line(x[inside], target, "k - |x|", "--")],
             svg_path, title=f"h=1, k=2/3, alpha=1, zeta={zeta:g}, a={a:g}", ylabel="distance")
    rep.files += [str(csv_path), str(svg_path)]
    return rep


def _generic(name: str, a: float, out_dir: Path) -> DemoReport:
    case = shipped_case(name).with_a([a])
    run = run_case(case, a)
    rep = DemoReport(name, a)
    rep.metrics["nodes"] = run.grid.size
    rep.metrics["sup error"] = run.sup_error
    rep.metrics["beta"] = run.transform.beta
    rep.metrics["sqrt(a) log beta"] = run.transform.scaled_log_beta
    rep.metrics["excluded nodes"] = run.transform.excluded
    csv_path = out_dir / f"{name}.csv"
    emit_transform_csv(run.transform.distance, run.oracle, csv_path, run.region)
    svg_path = out_dir / f"{name}.svg"
    label = "U_a" if case.transform == "signed" else "-sqrt(a) log u"
    if run.grid.dim == 1:
        x = run.grid.axes[0]
        sel = run.region.values & run.transform.validity.values
        emit_svg([Line(x[sel], run.transform.distance.values[sel], label, "."),
                  Line(x, run.oracle.values, "exact", "--")], svg_path, title=f"{name}, a={a:g}")
    else:
        shown = np.where(run.transform.validity.values, run.transform.distance.values, np.nan)
        emit_svg(Heatmap(ScalarField(run.grid, shown), label, (0.0, 0.1, 0.2)), svg_path,
                 title=f"{name}, a={a:g}")
    rep.files += [str(csv_path), str(svg_path)]
    return rep
