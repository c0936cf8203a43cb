import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helmdist.analytic import varadhan_1d
from helmdist.errors import ConfigError, GridTooCoarse, NoConvergence
from helmdist.fields import Grid
from helmdist.geometry import Ball, Box, DesignDomain, Interval
from helmdist.solver import SolverConfig, assemble, residual_norm, solve, verify_bounds
from helmdist.sources import CallableBoundary, Custom, IndicatorComplement

ZERO = Custom(lambda p: np.zeros(p.shape[:-1]), bound=0.0)


def dense_reference(grid, a, fvals, gvals):
    """Loop-assembled dense system over all nodes, Dirichlet rows as identity."""
    shape = grid.shape
    n = grid.size
    idx = np.arange(n).reshape(shape)
    A = np.zeros((n, n))
    b = np.zeros(n)
    bnd = grid.boundary_mask()
    for node in np.ndindex(*shape):
        i = idx[node]
        if bnd[node]:
            A[i, i] = 1.0
            b[i] = gvals[node]
            continue
        A[i, i] = 1.0
        b[i] = fvals[node]
        for axis, h in enumerate(grid.spacing):
            c = a / h ** 2
            A[i, i] += 2 * c
            for step in (-1, 1):
                nb = list(node)
                nb[axis] += step
                A[i, idx[tuple(nb)]] -= c
    return np.linalg.solve(A, b).reshape(shape)


def test_matches_dense_reference_1d():
    grid = Grid((41,), (-1.0,), (1.0,))
    a = 0.05
    f = Custom(lambda p: np.cos(3 * p[..., 0]) ** 2, bound=1.0)
    g = CallableBoundary(lambda p: 1.5 + p[..., 0])
    res = solve(assemble(Box((-1.0,), (1.0,)), grid, a, f, g), SolverConfig(a))
    pts = grid.coords()
    gvals = np.where(grid.boundary_mask(), 1.5 + pts[..., 0], 0.0)
    ref = dense_reference(grid, a, f.values(pts), gvals)
    assert np.max(np.abs(res.u.values - ref)) < 1e-13


@pytest.mark.parametrize("method", ["direct", "cg"])
def test_matches_dense_reference_2d(method):
    grid = Grid((17, 13), (-1.0, 0.0), (1.0, 1.0))
    a = 0.3
    f = Custom(lambda p: 1 + np.sin(p[..., 0] * p[..., 1]), bound=2.0)
    g = CallableBoundary(lambda p: 2 + p[..., 0] - p[..., 1])
    res = solve(assemble(Box((-1.0, 0.0), (1.0, 1.0)), grid, a, f, g), SolverConfig(a, method=method))
    pts = grid.coords()
    gvals = np.where(grid.boundary_mask(), 2 + pts[..., 0] - pts[..., 1], 0.0)
    ref = dense_reference(grid, a, f.values(pts), gvals)
    assert np.max(np.abs(res.u.values - ref)) < (1e-13 if method == "direct" else 1e-8)


def test_varadhan_second_order():
    errs = []
    for factor in (1 / 8, 1 / 16, 1 / 32):
        a = 0.01
        grid = Grid.with_spacing((-1.0,), (1.0,), factor * math.sqrt(a))
        res = solve(assemble(Box((-1.0,), (1.0,)), grid, a, ZERO, 1.0), SolverConfig(a))
        errs.append(np.max(np.abs(res.u.values - varadhan_1d(grid.axes[0], 1.0, a))))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.8 < r < 4.2 for r in ratios)


def test_grid_too_coarse_and_cover_checks():
    dom = DesignDomain(Box((-1.0,), (1.0,)), Interval(0.0, 0.5))
    f = IndicatorComplement(dom.shape)
    with pytest.raises(GridTooCoarse):
        assemble(dom, Grid.with_spacing((-1.0,), (1.0,), 0.03), 0.01, f)
    assemble(dom, Grid.with_spacing((-1.0,), (1.0,), 0.025), 0.01, f)
    with pytest.raises(ConfigError):
        assemble(dom, Grid.with_spacing((-1.0,), (0.9,), 0.01), 0.01, f)


def test_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(1e-9)
    with pytest.raises(ConfigError):
        SolverConfig(2.0)
    with pytest.raises(ConfigError):
        SolverConfig(0.1, method="gmres")
    with pytest.raises(ConfigError):
        SolverConfig(0.1, tol=1e-2)


def test_negative_data_rejected():
    grid = Grid((21,), (-1.0,), (1.0,))
    with pytest.raises(ConfigError):
        assemble(Box((-1.0,), (1.0,)), grid, 0.1, Custom(lambda p: p[..., 0], bound=1.0))
    with pytest.raises(ConfigError):
        assemble(Box((-1.0,), (1.0,)), grid, 0.1, ZERO, CallableBoundary(lambda p: p[..., 0]))


def test_cg_reports_no_convergence():
    grid = Grid((41, 41), (-1.0, -1.0), (1.0, 1.0))
    sys_ = assemble(Box((-1.0, -1.0), (1.0, 1.0)), grid, 0.1, ZERO, 1.0)
    with pytest.raises(NoConvergence):
        solve(sys_, SolverConfig(0.1, method="cg", max_iter=2))


def test_config_a_must_match_system():
    grid = Grid((41,), (-1.0,), (1.0,))
    sys_ = assemble(Box((-1.0,), (1.0,)), grid, 0.05, ZERO, 1.0)
    with pytest.raises(ConfigError):
        solve(sys_, SolverConfig(0.06))


def test_complement_solution_sums_to_c_star():
    dom = DesignDomain(Box((-1.0, -1.0), (1.0, 1.0)), Ball((0.0, 0.0), 0.5))
    a = 4e-3
    grid = dom.grid(math.sqrt(a) / 4)
    sys_ = assemble(dom, grid, a, IndicatorComplement(dom.shape, 1.0), 1.0)
    cfg = SolverConfig(a)
    u = solve(sys_, cfg).u.values
    v = solve(sys_.complement(1.0), cfg).u.values
    assert np.max(np.abs(u + v - 1.0)) < 1e-12
    with pytest.raises(ConfigError):
        sys_.complement(0.5)


def test_residual_norm_of_solution_is_tiny():
    grid = Grid((101,), (-1.0,), (1.0,))
    sys_ = assemble(Box((-1.0,), (1.0,)), grid, 0.01, IndicatorComplement(Interval(0.0, 0.3)), 1.0)
    res = solve(sys_, SolverConfig(0.01))
    assert residual_norm(sys_, res.u) < 1e-13
    assert res.bounds.passed


def _random_case(seed, dim):
    rng = np.random.default_rng(seed)
    a = float(10 ** rng.uniform(-3, -1))
    n = int(math.ceil(2 / (math.sqrt(a) / 4))) + 1 if dim == 1 else 41
    if dim == 2:
        a = float(10 ** rng.uniform(-1.3, 0))
    grid = Grid((n,) * dim, (-1.0,) * dim, (1.0,) * dim)
    k = rng.uniform(0.5, 3.0, size=dim)
    amp = rng.uniform(0.1, 2.0)
    f = Custom(lambda p: amp * np.sin(np.sum(k * p, axis=-1)) ** 2, bound=amp)
    g0 = rng.uniform(0.1, 2.0)
    g = CallableBoundary(lambda p: g0 * (1.5 + np.cos(np.sum(p, axis=-1))))
    return grid, a, f, g


@given(seed=st.integers(0, 10 ** 6), dim=st.sampled_from([1, 2]))
def test_maximum_principle(seed, dim):
    grid, a, f, g = _random_case(seed, dim)
    res = solve(assemble(Box(grid.lo, grid.hi), grid, a, f, g), SolverConfig(a))
    rep = verify_bounds(res, f, g, tol=1e-12)
    assert rep.passed
    assert rep.min_interior > 0 and rep.max_u <= rep.M * (1 + 1e-12)


@given(seed=st.integers(0, 10 ** 6), dim=st.sampled_from([1, 2]), bump=st.floats(0.0, 1.0))
def test_data_monotonicity(seed, dim, bump):
    grid, a, f, g = _random_case(seed, dim)
    f2 = Custom(lambda p: f.values(p) + bump * np.exp(-np.sum(p * p, axis=-1)), bound=f.bound + bump)
    g2 = CallableBoundary(lambda p: g.values(p) + bump)
    box = Box(grid.lo, grid.hi)
    u1 = solve(assemble(box, grid, a, f, g), SolverConfig(a)).u.values
    u2 = solve(assemble(box, grid, a, f2, g2), SolverConfig(a)).u.values
    assert np.all(u2 >= u1 - 1e-14 * np.abs(u1).max())
