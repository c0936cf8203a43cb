import numpy as np
import pytest

from helmdist.errors import ConfigError
from helmdist.geometry import Ball, Interval
from helmdist.sources import (CallableBoundary, ConstantBoundary, Custom, IndicatorComplement, PowerLaw1D,
                              PowerLawBall, estimate_zeta, evaluate_source, mean_condition_scan)

EPS = [0.1, 0.05, 0.02, 0.01]


def test_indicator_vanishes_on_closed_shape():
    f = IndicatorComplement(Interval(0.0, 0.5), 2.0)
    assert evaluate_source(f, [0.0, 0.5, -0.5, 0.51]).tolist() == [0.0, 0.0, 0.0, 2.0]
    assert f.zeta == 0.0 and f.sup() == 2.0
    with pytest.raises(ConfigError):
        IndicatorComplement(Interval(0.0, 0.5), 0.0)


def test_power_law_ball_values():
    f = PowerLawBall(Ball((0.0, 0.0), 1.0), zeta=2.0)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.5]])
    assert f.values(pts).tolist() == [0.0, 0.0, 9.0, 1.25 ** 2]
    # scaled ball: ((|x-c|/r)^2 - 1)^zeta
    g = PowerLawBall(Ball((1.0, 0.0), 0.5), zeta=1.0)
    assert g.values(np.array([[2.0, 0.0]])) == pytest.approx([3.0])


def test_power_law_1d_zero_exponent_keeps_zero_set():
    f = PowerLaw1D(2 / 3, zeta=0.0)
    x = np.array([[0.0], [2 / 3], [0.7], [-1.0]])
    assert f.values(x).tolist() == [0.0, 0.0, 1.0, 1.0]
    assert PowerLaw1D(0.5, 2.0).sup() == 0.25
    with pytest.raises(ConfigError):
        PowerLaw1D(1.0, 2.0, h=1.0)


def test_custom_and_boundary_specs():
    f = Custom(lambda p: p[..., 0] ** 2, bound=1.0)
    assert f.values(np.array([[0.5], [-1.0]])).tolist() == [0.25, 1.0]
    with pytest.raises(ConfigError):
        Custom(lambda p: p[..., 0]).sup()
    assert ConstantBoundary(2.0).values(np.zeros((3, 2))).tolist() == [2.0, 2.0, 2.0]
    assert CallableBoundary(lambda p: p[..., 1]).values(np.array([[0.0, 3.0]])).tolist() == [3.0]
    with pytest.raises(ConfigError):
        ConstantBoundary(-1.0)


@pytest.mark.parametrize("c", [1.0, 3.0])
@pytest.mark.parametrize("shape", [Interval(0.0, 2 / 3), Ball((0.0, 0.0), 1.0)], ids=["1d", "2d"])
def test_indicator_mean_condition_near_half(c, shape):
    rep = mean_condition_scan(IndicatorComplement(shape, c), shape, 0.0, 1, EPS)
    assert 0.4 * c <= rep.inf <= rep.sup <= 0.6 * c
    assert rep.passes


@pytest.mark.parametrize("zeta", [1.0, 2.0])
@pytest.mark.parametrize("p", [1, 2])
def test_power_law_ball_mean_condition(zeta, p):
    b = Ball((0.0, 0.0), 1.0)
    rep = mean_condition_scan(PowerLawBall(b, zeta), b, zeta, p, EPS, boundary_samples=16)
    assert rep.passes and rep.inf > 0


def test_wrong_zeta_fails_mean_condition():
    b = Ball((0.0, 0.0), 1.0)
    rep = mean_condition_scan(PowerLawBall(b, 2.0), b, 0.0, 1, EPS, boundary_samples=16)
    assert not rep.passes


@pytest.mark.parametrize("zeta", [0.0, 1.0, 2.0])
def test_estimate_zeta(zeta):
    b = Ball((0.0, 0.0), 1.0)
    assert estimate_zeta(PowerLawBall(b, zeta), b, EPS, boundary_samples=16) == pytest.approx(zeta, abs=0.15)
    s = Interval(0.0, 2 / 3)
    assert estimate_zeta(PowerLaw1D(2 / 3, zeta), s, EPS) == pytest.approx(zeta, abs=0.15)


def test_estimate_zeta_needs_a_decade():
    s = Interval(0.0, 0.5)
    with pytest.raises(ValueError):
        estimate_zeta(IndicatorComplement(s), s, [0.1, 0.08, 0.06, 0.05])


def test_scan_argument_checks():
    s = Interval(0.0, 0.5)
    with pytest.raises(ValueError):
        mean_condition_scan(IndicatorComplement(s), s, 0.0, 3, EPS)
    with pytest.raises(ValueError):
        mean_condition_scan(IndicatorComplement(s), s, -1.0, 1, EPS)
