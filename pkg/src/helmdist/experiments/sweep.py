"""Convergence sweeps over a and rate fits of the sup error."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import HelmdistError, InsufficientRows
from ..fields import Grid, Mask, ScalarField
from ..geometry import (brute_force_distance_field, exact_distance_field, inside_mask,
                        omega_star_mask, rasterize_interface)
from ..solver import SolverConfig, assemble, solve
from ..transform import TransformResult, distance_field, signed_distance_field, sup_error
from .config import CaseSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaseRun:
    """Everything produced by one (case, a) solve."""

    a: float
    grid: Grid
    u: ScalarField
    transform: TransformResult
    oracle: ScalarField
    region: Mask
    sup_error: float
    iterations: int
    residual: float
    wall_time: float
    u_complement: Optional[ScalarField] = None


def oracle_field(case: CaseSpec, grid: Grid) -> ScalarField:
    signed = case.transform == "signed"
    shape = case.domain.shape
    if case.oracle == "exact":
        return exact_distance_field(shape, grid, signed=signed)
    d = brute_force_distance_field(rasterize_interface(shape, grid), grid)
    if signed:
        return ScalarField(grid, np.where(inside_mask(shape, grid).values, -d.values, d.values))
    return d


def run_case(case: CaseSpec, a: float) -> CaseRun:
    """assemble, solve, transform and compare against the oracle at one a."""
    start = time.perf_counter()
    grid = case.domain.grid(case.spacing_for(a))
    cfg = SolverConfig(a, tol=case.tol, method=case.method)
    system = assemble(case.domain, grid, a, case.source, case.boundary)
    result = solve(system, cfg)
    interface = rasterize_interface(case.domain.shape, grid)
    inside = inside_mask(case.domain.shape, grid)
    iterations = result.iterations
    comp = None
    if case.transform == "distance":
        region = inside
        tr = distance_field(result.u, a, region, interface)
    else:
        c_star = case.effective_c_star
        comp_result = solve(system.complement(c_star), cfg)
        comp = comp_result.u
        iterations += comp_result.iterations
        region = omega_star_mask(case.domain, grid)
        tr = signed_distance_field(result.u, a, c_star, inside, region, comp, interface)
    oracle = oracle_field(case, grid)
    err = sup_error(tr.distance, oracle, region & tr.validity)
    elapsed = time.perf_counter() - start
    log.info("%s a=%g nodes=%d err=%.4g beta=%.3g (%.2fs)", case.name, a, grid.size, err, tr.beta, elapsed)
    return CaseRun(a, grid, result.u, tr, oracle, region, err, iterations, result.residual, elapsed, comp)


@dataclass(frozen=True)
class SweepRow:
    a: float
    spacing: float
    sup_error: float
    beta: float
    scaled_log_beta: float
    iterations: int
    wall_time: float
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepTable:
    rows: tuple = ()
    name: str = "case"

    def successful(self) -> list:
        return [r for r in self.rows if r.ok and math.isfinite(r.sup_error)]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.successful()], dtype=float)

    def trend_inversions(self) -> list:
        """Indices i where the error grows from ``rows[i]`` to the smaller-a ``rows[i+1]``."""
        err = self.column("sup_error")
        return [i for i in range(len(err) - 1) if err[i + 1] > err[i]]


def _row(case: CaseSpec, a: float) -> SweepRow:
    spacing = case.domain.grid(case.spacing_for(a)).h
    try:
        run = run_case(case, a)
    except HelmdistError as exc:
        log.warning("%s a=%g failed: %s", case.name, a, exc)
        nan = float("nan")
        return SweepRow(a, spacing, nan, nan, nan, 0, nan, f"{type(exc).__name__}: {exc}")
    t = run.transform
    return SweepRow(a, spacing, run.sup_error, t.beta, t.scaled_log_beta, run.iterations, run.wall_time)


def run_sweep(case: CaseSpec, workers: int = 1) -> SweepTable:
    """One row per a in ``case.a_list``; rows that raise are kept with their error."""
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda a: _row(case, a), case.a_list))
    else:
        rows = [_row(case, a) for a in case.a_list]
    return SweepTable(tuple(rows), case.name)


@dataclass(frozen=True)
class RateFit:
    """Least-squares rate fit.

    ``model="power"``: ``log err = log C + p log a``; ``value`` is p.
    ``model="sqrtlog"``: ``err = C sqrt(a) log(1/a)`` through the origin;
    ``value`` is C and ``r2`` is the uncentered coefficient of
    determination (the natural one for a fit without intercept).
    ``r2_centered`` is reported alongside for comparison.
    """

    model: str
    value: float
    r2: float
    r2_centered: float
    coefficient: float
    n: int


def _r2(y, pred, centered=True):
    ss_res = float(np.sum((y - pred) ** 2))
    ref = y - y.mean() if centered else y
    ss_tot = float(np.sum(ref ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else -math.inf
    return 1.0 - ss_res / ss_tot


def fit_rate(table: SweepTable, model: str = "power") -> RateFit:
    rows = table.successful()
    if len(rows) < 3:
        raise InsufficientRows(f"need at least 3 successful rows, got {len(rows)}")
    a = np.array([r.a for r in rows])
    err = np.array([r.sup_error for r in rows])
    if model == "power":
        if np.any(err <= 0):
            raise ValueError("power fit needs positive errors")
        x, y = np.log(a), np.log(err)
        design = np.column_stack([x, np.ones_like(x)])
        (slope, icpt), *_ = np.linalg.lstsq(design, y, rcond=None)
        pred = slope * x + icpt
        r2 = _r2(y, pred)
        return RateFit("power", float(slope), r2, r2, float(math.exp(icpt)), len(rows))
    if model == "sqrtlog":
        x = np.sqrt(a) * np.log(1 / a)
        c = float(x @ err / (x @ x))
        pred = c * x
        return RateFit("sqrtlog", c, _r2(err, pred, centered=False), _r2(err, pred), c, len(rows))
    raise ValueError(f"unknown model {model!r}")
