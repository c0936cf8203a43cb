import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from helmdist.analytic import varadhan_1d
from helmdist.errors import BranchDomainViolation, EmptyInterface, EmptyRegion, NonPositiveSolution
from helmdist.fields import Grid, Mask, ScalarField
from helmdist.geometry import (Ball, Box, DesignDomain, Interval, exact_distance_field, inside_mask,
                               omega_star_mask, rasterize_interface)
from helmdist.solver import SolverConfig, assemble, solve
from helmdist.sources import IndicatorComplement, PowerLaw1D
from helmdist.transform import beta_diagnostic, distance_field, signed_distance_field, sup_error

G1 = Grid((21,), (-1.0,), (1.0,))
ALL = Mask(G1, np.ones(21, dtype=bool))


def test_unit_field_gives_zero_distance():
    tr = distance_field(ScalarField(G1, np.ones(21)), 0.01, ALL)
    assert np.all(tr.distance.values == 0.0) and tr.beta == 1.0 and tr.scaled_log_beta == 0.0


def test_varadhan_transform_at_centre():
    a = 1e-4
    grid = Grid((2001,), (-1.0,), (1.0,))
    u = ScalarField(grid, varadhan_1d(grid.axes[0], 1.0, a))
    tr = distance_field(u, a, Mask(grid, np.ones(grid.shape, dtype=bool)))
    assert tr.distance.values[1000] == pytest.approx(1.0 - math.sqrt(a) * math.log(2), abs=1e-12)


def test_underflow_nodes_are_excluded():
    vals = np.full(21, 0.5)
    vals[3] = 1e-310
    tr = distance_field(ScalarField(G1, vals), 0.01, ALL, Mask(G1, np.arange(21) == 0))
    assert tr.excluded == 1 and not tr.validity.values[3] and np.isnan(tr.distance.values[3])


def test_distance_errors():
    with pytest.raises(NonPositiveSolution):
        distance_field(ScalarField(G1, np.zeros(21)), 0.01, ALL)
    with pytest.raises(EmptyRegion):
        distance_field(ScalarField(G1, np.ones(21)), 0.01, Mask(G1, np.zeros(21, dtype=bool)))
    with pytest.raises(EmptyInterface):
        beta_diagnostic(ScalarField(G1, np.ones(21)), Mask(G1, np.zeros(21, dtype=bool)), 0.01)


def test_beta_constant_interface():
    band = Mask(G1, np.abs(G1.axes[0]) > 0.8)
    b = beta_diagnostic(ScalarField(G1, np.full(21, 0.25)), band, 0.04)
    assert b.beta == 0.25 and b.scaled_log == pytest.approx(0.2 * math.log(0.25))


def test_sup_error_values():
    oracle = ScalarField(G1, np.linspace(0, 1, 21))
    assert sup_error(oracle, oracle, ALL) == 0.0
    bumped = oracle.values.copy()
    bumped[7] += 0.1
    assert sup_error(ScalarField(G1, bumped), oracle, ALL) == pytest.approx(0.1)
    with pytest.raises(EmptyRegion):
        sup_error(oracle, oracle, Mask(G1, np.zeros(21, dtype=bool)))


positive = arrays(np.float64, 21, elements=st.floats(1e-200, 10.0))


@given(u1=positive, scale=arrays(np.float64, 21, elements=st.floats(1.0, 1e3)), a=st.floats(1e-6, 1.0))
def test_transform_is_monotone(u1, scale, a):
    u2 = u1 * scale
    d1 = distance_field(ScalarField(G1, u1), a, ALL).distance.values
    d2 = distance_field(ScalarField(G1, u2), a, ALL).distance.values
    assert np.all(d1 >= d2)


def test_signed_branch_violation():
    grid = Grid((21,), (-1.0,), (1.0,))
    inside = Mask(grid, np.abs(grid.axes[0]) <= 0.5)
    star = Mask(grid, np.abs(grid.axes[0]) <= 0.75)
    u = np.full(21, 0.5)
    u[17] = 1.5
    with pytest.raises(BranchDomainViolation):
        signed_distance_field(ScalarField(grid, u), 0.01, 1.0, inside, star)


def _signed_disk(a):
    dom = DesignDomain(Box((-1.0, -1.0), (1.0, 1.0)), Ball((0.0, 0.0), 0.5))
    grid = dom.grid(math.sqrt(a) / 8)
    sys_ = assemble(dom, grid, a, IndicatorComplement(dom.shape, 1.0), 1.0)
    cfg = SolverConfig(a)
    u = solve(sys_, cfg).u
    comp = solve(sys_.complement(1.0), cfg).u
    inside = inside_mask(dom.shape, grid)
    star = omega_star_mask(dom, grid)
    tr = signed_distance_field(u, a, 1.0, inside, star, comp, rasterize_interface(dom.shape, grid))
    return dom, grid, tr, u, comp


def test_signed_field_signs_and_interface():
    a = 4e-3
    dom, grid, tr, u, comp = _signed_disk(a)
    d = exact_distance_field(dom.shape, grid, signed=True).values
    v = tr.distance.values
    valid = tr.validity.values
    far_in = valid & (d < -2 * grid.h)
    far_out = valid & (d > 2 * grid.h)
    assert np.all(v[far_in] < 0) and np.all(v[far_out] > 0)
    band = rasterize_interface(dom.shape, grid).values & valid
    assert np.max(np.abs(v[band])) <= math.sqrt(a) * abs(math.log(tr.beta)) + 2 * grid.h
    assert tr.excluded == 0


def test_signed_complement_matches_direct_difference():
    a = 4e-3
    dom, grid, tr, u, comp = _signed_disk(a)
    # where C* - u is not small the two routes agree
    plain = signed_distance_field(u, a, 1.0, inside_mask(dom.shape, grid), omega_star_mask(dom, grid))
    both = tr.validity.values & plain.validity.values & (comp.values > 1e-6)
    assert np.allclose(plain.distance.values[both], tr.distance.values[both], rtol=0, atol=1e-9)


def test_beta_scaling_toward_zero():
    dom = DesignDomain(Box((-1.0,), (1.0,)), Interval(0.0, 2 / 3))
    vals = []
    for a in (1e-2, 1e-3, 1e-4, 1e-5):
        grid = dom.grid(math.sqrt(a) / 8)
        u = solve(assemble(dom, grid, a, IndicatorComplement(dom.shape), 1.0), SolverConfig(a)).u
        vals.append(beta_diagnostic(u, rasterize_interface(dom.shape, grid), a).scaled_log)
    mags = np.abs(vals)
    assert np.all(np.diff(mags) < 0) and mags[-1] < 0.01


@pytest.mark.parametrize("kind", ["indicator", "power"])
def test_one_sided_lower_bound(kind):
    # computed - exact >= -C sqrt(a) log(1/a) on the closed set; the undershoot
    # stays at discretization level, so a small C covers every a
    dom = DesignDomain(Box((-1.0,), (1.0,)), Interval(0.0, 2 / 3))
    f = IndicatorComplement(dom.shape) if kind == "indicator" else PowerLaw1D(2 / 3, 2.0)
    for a in (1e-2, 1e-3, 1e-4, 1e-5):
        grid = dom.grid(math.sqrt(a) / 8)
        u = solve(assemble(dom, grid, a, f, 1.0), SolverConfig(a)).u
        inside = inside_mask(dom.shape, grid)
        diff = distance_field(u, a, inside).distance.values - exact_distance_field(dom.shape, grid).values
        assert np.min(diff[inside.values]) >= -0.05 * math.sqrt(a) * math.log(1 / a)
