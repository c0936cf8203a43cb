"""Source terms f and boundary data g, and the small-ball mean condition on f."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .fields import Grid, ScalarField, volume_mean
from .geometry import Ball, Interval, Shape, as_points, _result


class SourceSpec:
    """Nonnegative source f vanishing exactly on the closed set ``shape``."""

    shape: Optional[Shape]
    zeta: Optional[float]

    def values(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sup(self) -> float:
        """Upper bound of f on the design domain (may be estimated by sampling)."""
        raise NotImplementedError


@dataclass(frozen=True)
class IndicatorComplement(SourceSpec):
    """``f = c`` outside the closed shape, 0 inside."""

    shape: Shape
    amplitude: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise ConfigError(f"amplitude must be positive and finite, got {self.amplitude}")

    @property
    def zeta(self):
        return 0.0

    def values(self, points):
        return np.where(self.shape.contains(points), 0.0, self.amplitude)

    def sup(self):
        return self.amplitude


@dataclass(frozen=True)
class PowerLawBall(SourceSpec):
    """``f = [(|x - c|^2 / r^2 - 1) v 0]^zeta``; the unit ball gives ``[(|x|^2-1) v 0]^zeta``."""

    shape: Ball
    zeta: float = 1.0
    # only used by sup(): f is evaluated up to this distance from the centre
    extent: float = 2.0

    def __post_init__(self):
        if not isinstance(self.shape, Ball):
            raise ConfigError("PowerLawBall needs a Ball shape")
        if not (np.isfinite(self.zeta) and self.zeta >= 0):
            raise ConfigError(f"zeta must be finite and >= 0, got {self.zeta}")

    def values(self, points):
        r2 = np.sum((points - np.asarray(self.shape.center)) ** 2, axis=-1) / self.shape.radius ** 2
        outside = r2 > 1.0
        return np.where(outside, np.where(outside, r2 - 1.0, 1.0) ** self.zeta, 0.0)

    def sup(self):
        return float(max((self.extent / self.shape.radius) ** 2 - 1.0, 0.0) ** self.zeta)


@dataclass(frozen=True)
class PowerLaw1D(SourceSpec):
    """``f(x) = (|x| - k)^zeta`` for ``|x| > k`` and 0 otherwise, on ``(-h, h)``."""

    k: float
    zeta: float = 2.0
    h: float = 1.0

    def __post_init__(self):
        if not 0 < self.k < self.h:
            raise ConfigError(f"need 0 < k < h, got k={self.k}, h={self.h}")
        if not (np.isfinite(self.zeta) and self.zeta >= 0):
            raise ConfigError(f"zeta must be finite and >= 0, got {self.zeta}")

    @property
    def shape(self):
        return Interval(0.0, self.k)

    def values(self, points):
        t = np.abs(points[..., 0]) - self.k
        pos = t > 0
        return np.where(pos, np.where(pos, t, 1.0) ** self.zeta, 0.0)

    def sup(self):
        return float((self.h - self.k) ** self.zeta)


@dataclass(frozen=True)
class Custom(SourceSpec):
    """User callable ``func(points) -> values`` with points shaped ``(..., N)``."""

    func: Callable[[np.ndarray], np.ndarray]
    zeta: Optional[float] = None
    shape: Optional[Shape] = None
    bound: Optional[float] = None

    def values(self, points):
        return np.asarray(self.func(points), dtype=float) * np.ones(points.shape[:-1])

    def sup(self):
        if self.bound is None:
            raise ConfigError("Custom source needs an explicit bound for sup()")
        return float(self.bound)


class BoundarySpec:
    def values(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantBoundary(BoundarySpec):
    value: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value >= 0):
            raise ConfigError(f"boundary value must be finite and >= 0, got {self.value}")

    def values(self, points):
        return np.full(points.shape[:-1], float(self.value))


@dataclass(frozen=True)
class CallableBoundary(BoundarySpec):
    func: Callable[[np.ndarray], np.ndarray]

    def values(self, points):
        return np.asarray(self.func(points), dtype=float) * np.ones(points.shape[:-1])


def evaluate_source(spec: SourceSpec, x):
    """Value of f at ``x`` (a point, or an array of points)."""
    dim = spec.shape.dim if spec.shape is not None else np.shape(x)[-1] if np.ndim(x) else 1
    p, out = as_points(x, dim)
    return _result(spec.values(p), out)


@dataclass(frozen=True)
class MeanConditionReport:
    """Extremes of ``eps^(-zeta p) m_eps^y(f^p)`` over the scanned (eps, y) pairs."""

    inf: float
    sup: float
    values: np.ndarray
    eps: tuple
    max_ratio: float = 3.0

    @property
    def ratio(self) -> float:
        return self.sup / self.inf if self.inf > 0 else np.inf

    @property
    def passes(self) -> bool:
        return bool(self.inf > 0 and np.isfinite(self.sup) and self.ratio <= self.max_ratio)


def _local_mean(spec: SourceSpec, y: np.ndarray, eps: float, p: int, resolution: int) -> float:
    # grid centred on y with `resolution` spacings per radius; a 3% margin
    # keeps the ball inside the extents
    half = eps * (1 + 0.03)
    n = 2 * int(np.ceil(resolution * half / eps)) + 1
    grid = Grid((n,) * len(y), tuple(y - half), tuple(y + half))
    vals = spec.values(grid.coords()) ** p
    return volume_mean(ScalarField(grid, vals), y, eps)


def _sample_points(shape: Shape, boundary_samples: int) -> np.ndarray:
    if boundary_samples < 16:
        raise ValueError("need at least 16 boundary samples")
    return shape.boundary_samples(boundary_samples)


def _default_resolution(dim: int) -> int:
    return 64 if dim == 1 else 24


def mean_condition_scan(spec: SourceSpec, shape: Shape, zeta: float, p: int,
                        eps_list: Sequence[float], boundary_samples: int = 64,
                        resolution: int | None = None, max_ratio: float = 3.0) -> MeanConditionReport:
    """Scan ``eps^(-zeta p) * m_eps^y(f^p)`` over ``eps_list`` and boundary points y.

    The condition holds when the infimum is positive and the sup/inf ratio
    stays bounded; ``passes`` uses ``ratio <= max_ratio`` as "bounded".
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    resolution = resolution or _default_resolution(shape.dim)
    ys = _sample_points(shape, boundary_samples)
    eps_list = tuple(float(e) for e in eps_list)
    vals = np.array([[e ** (-zeta * p) * _local_mean(spec, y, e, p, resolution) for y in ys] for e in eps_list])
    return MeanConditionReport(float(vals.min()), float(vals.max()), vals, eps_list, max_ratio)


def estimate_zeta(spec: SourceSpec, shape: Shape, eps_list: Sequence[float],
                  boundary_samples: int = 64, resolution: int | None = None) -> float:
    """Mean over boundary samples of the log-log slope of ``m_eps(f)`` against eps."""
    eps = np.unique(np.asarray(eps_list, dtype=float))
    if len(eps) < 4 or eps.max() / eps.min() < 10 * (1 - 1e-12):
        raise ValueError("need at least 4 distinct eps values spanning a decade")
    resolution = resolution or _default_resolution(shape.dim)
    ys = _sample_points(shape, boundary_samples)
    logs = np.log(eps)
    slopes = []
    for y in ys:
        means = np.array([_local_mean(spec, y, e, 1, resolution) for e in eps])
        if np.any(means <= 0):
            raise ValueError(f"source mean vanishes near boundary point {y}")
        slopes.append(np.polyfit(logs, np.log(means), 1)[0])
    return float(np.mean(slopes))
