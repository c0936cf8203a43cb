"""Analytic shapes with exact (signed) distance oracles.

Points are arrays whose last axis holds the coordinates.  For 1D shapes a
bare float or a 1-d array of abscissae is also accepted.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInterface, GeometryError
from .fields import Grid, Mask, ScalarField


def as_points(x, dim: int) -> tuple[np.ndarray, tuple]:
    """Return ``(points, out_shape)`` with points shaped ``(..., dim)``."""
    p = np.asarray(x, dtype=float)
    if dim == 1 and (p.ndim == 0 or p.shape[-1] != 1):
        return p[..., None], p.shape
    if p.shape[-1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got shape {p.shape}")
    return p, p.shape[:-1]


def _result(values: np.ndarray, shape: tuple):
    values = np.reshape(values, shape)
    return float(values) if values.ndim == 0 else values


def _radial(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((points - center) ** 2, axis=-1))


class Shape:
    """Closed set A with a closed-form distance to its boundary."""

    dim: int

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boundary_samples(self, n: int) -> np.ndarray:
        """Points on the boundary, uniform in the natural parametrization."""
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def curvature_radius(self) -> float:
        """Smallest radius of curvature of the boundary (inf for flat/point pieces)."""
        raise NotImplementedError

    def gap_to_box(self, box: "Box") -> float:
        """Distance from the shape to the boundary of ``box`` (negative if it sticks out)."""
        lo, hi = self.bounds()
        return float(min(np.min(lo - np.asarray(box.lo)), np.min(np.asarray(box.hi) - hi)))


@dataclass(frozen=True)
class Interval(Shape):
    center: float
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise GeometryError(f"half_width must be positive, got {self.half_width}")

    dim = 1

    def boundary_distance(self, points):
        t = np.abs(points[..., 0] - self.center)
        return np.abs(self.half_width - t)

    def contains(self, points):
        return np.abs(points[..., 0] - self.center) <= self.half_width

    def boundary_samples(self, n=2):
        return np.array([[self.center - self.half_width], [self.center + self.half_width]])

    def bounds(self):
        return (np.array([self.center - self.half_width]), np.array([self.center + self.half_width]))

    @property
    def curvature_radius(self):
        return math.inf


@dataclass(frozen=True)
class Ball(Shape):
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise GeometryError(f"radius must be positive, got {self.radius}")

    @property
    def dim(self):
        return len(self.center)

    def boundary_distance(self, points):
        return np.abs(_radial(points, np.asarray(self.center)) - self.radius)

    def contains(self, points):
        return _radial(points, np.asarray(self.center)) <= self.radius

    def boundary_samples(self, n=64):
        c = np.asarray(self.center)
        if self.dim == 1:
            return np.array([c - self.radius, c + self.radius])
        theta = 2 * math.pi * np.arange(n) / n
        return c + self.radius * np.column_stack([np.cos(theta), np.sin(theta)])

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    @property
    def curvature_radius(self):
        return math.inf if self.dim == 1 else self.radius


@dataclass(frozen=True)
class Annulus(Shape):
    center: Tuple[float, ...]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not 0 < self.r_inner < self.r_outer:
            raise GeometryError(f"need 0 < r_inner < r_outer, got {self.r_inner}, {self.r_outer}")

    @property
    def dim(self):
        return len(self.center)

    def boundary_distance(self, points):
        r = _radial(points, np.asarray(self.center))
        return np.minimum(np.abs(r - self.r_inner), np.abs(r - self.r_outer))

    def contains(self, points):
        r = _radial(points, np.asarray(self.center))
        return (r >= self.r_inner) & (r <= self.r_outer)

    def boundary_samples(self, n=64):
        c = np.asarray(self.center)
        if self.dim == 1:
            return np.array([c - self.r_outer, c - self.r_inner, c + self.r_inner, c + self.r_outer])
        # split samples in proportion to circumference
        n_in = max(1, int(round(n * self.r_inner / (self.r_inner + self.r_outer))))
        parts = []
        for r, m in ((self.r_inner, n_in), (self.r_outer, max(1, n - n_in))):
            theta = 2 * math.pi * np.arange(m) / m
            parts.append(c + r * np.column_stack([np.cos(theta), np.sin(theta)]))
        return np.vstack(parts)

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.r_outer, c + self.r_outer

    @property
    def curvature_radius(self):
        # the hole must hold the tangent exterior balls
        return self.r_inner


@dataclass(frozen=True)
class Box(Shape):
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(l >= h for l, h in zip(lo, hi)):
            raise GeometryError(f"invalid box lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def boundary_distance(self, points):
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        inner = np.minimum(points - lo, hi - points).min(axis=-1)
        outside = np.maximum(np.maximum(lo - points, points - hi), 0.0)
        outer = np.sqrt(np.sum(outside ** 2, axis=-1))
        return np.where(inner >= 0, inner, outer)

    def contains(self, points):
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((points >= lo) & (points <= hi), axis=-1)

    def boundary_samples(self, n=64):
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if self.dim == 1:
            return np.array([lo, hi])
        w, h = hi - lo
        t = (np.arange(n) + 0.5) / n * 2 * (w + h)
        pts = []
        for s in t:
            if s < w:
                pts.append([lo[0] + s, lo[1]])
            elif s < w + h:
                pts.append([hi[0], lo[1] + s - w])
            elif s < 2 * w + h:
                pts.append([hi[0] - (s - w - h), hi[1]])
            else:
                pts.append([lo[0], hi[1] - (s - 2 * w - h)])
        return np.array(pts)

    def bounds(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    @property
    def curvature_radius(self):
        return 0.0 if self.dim > 1 else math.inf


@dataclass(frozen=True)
class Union(Shape):
    members: Tuple[Shape, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise GeometryError("a union needs at least one member")
        if len({m.dim for m in members}) != 1:
            raise GeometryError("union members must share a dimension")
        object.__setattr__(self, "members", members)
        for s, t in itertools.combinations(members, 2):
            if _sampled_gap(s, t) <= 0:
                raise GeometryError(f"union members {s} and {t} overlap or touch")

    @property
    def dim(self):
        return self.members[0].dim

    def boundary_distance(self, points):
        return np.min([m.boundary_distance(points) for m in self.members], axis=0)

    def contains(self, points):
        return np.any([m.contains(points) for m in self.members], axis=0)

    def boundary_samples(self, n=64):
        per = max(1, n // len(self.members))
        return np.vstack([m.boundary_samples(per) for m in self.members])

    def bounds(self):
        los, his = zip(*(m.bounds() for m in self.members))
        return np.min(los, axis=0), np.max(his, axis=0)

    @property
    def curvature_radius(self):
        return min(m.curvature_radius for m in self.members)

    def gap_to_box(self, box):
        return min(m.gap_to_box(box) for m in self.members)


def _sampled_gap(s: Shape, t: Shape, n: int = 512) -> float:
    """Sampled minimum distance between two shapes; <= 0 if they intersect."""
    ps, pt = s.boundary_samples(n), t.boundary_samples(n)
    if np.any(t.contains(ps)) or np.any(s.contains(pt)):
        return 0.0
    return float(min(t.boundary_distance(ps).min(), s.boundary_distance(pt).min()))


@dataclass(frozen=True)
class DesignDomain:
    """Box-shaped design domain ``omega`` holding the zero set ``shape`` of f."""

    omega: Box
    shape: Shape

    def __post_init__(self):
        if self.omega.dim != self.shape.dim:
            raise GeometryError("domain and shape dimensions differ")
        if self.gap <= 0:
            raise GeometryError(f"shape must lie strictly inside the domain (gap {self.gap:.3g})")

    @property
    def dim(self) -> int:
        return self.omega.dim

    @property
    def gap(self) -> float:
        """d(A, boundary of omega), closed form per shape variant."""
        return self.shape.gap_to_box(self.omega)

    def grid(self, spacing: float) -> Grid:
        return Grid.with_spacing(self.omega.lo, self.omega.hi, spacing)


def exact_distance(shape: Shape, x):
    """Distance from ``x`` to the boundary of ``shape``."""
    p, out = as_points(x, shape.dim)
    return _result(shape.boundary_distance(p), out)


def exact_signed_distance(shape: Shape, x):
    """Signed distance: negative inside the closed shape, positive outside."""
    p, out = as_points(x, shape.dim)
    d = shape.boundary_distance(p)
    return _result(np.where(shape.contains(p), -d, d), out)


def rasterize_interface(shape: Shape, grid: Grid) -> Mask:
    """Nodes within one grid spacing of the shape boundary."""
    d = shape.boundary_distance(grid.coords())
    band = d <= grid.h
    if not band.any():
        raise EmptyInterface(f"no grid node within {grid.h} of the interface")
    return Mask(grid, band)


def inside_mask(shape: Shape, grid: Grid) -> Mask:
    """Rasterized closure of the shape."""
    return Mask(grid, shape.contains(grid.coords()))


def omega_star_mask(domain: DesignDomain, grid: Grid) -> Mask:
    """Nodes at least as close to the interface as to the domain boundary."""
    pts = grid.coords()
    return Mask(grid, domain.shape.boundary_distance(pts) <= domain.omega.boundary_distance(pts))


def brute_force_distance_field(interface: Mask, grid: Grid, chunk: int = 2_000_000) -> ScalarField:
    """Distance from every node to the nearest interface node.

    Exhaustive minimum for small problems; large ones use an exact k-d tree
    nearest-neighbour query instead.
    """
    targets = interface.points()
    if len(targets) == 0:
        raise EmptyInterface("interface node set is empty")
    pts = grid.coords().reshape(-1, grid.dim)
    if len(targets) * len(pts) <= 50_000_000:
        out = np.empty(len(pts))
        step = max(1, chunk // len(targets))
        for start in range(0, len(pts), step):
            block = pts[start:start + step]
            diff = block[:, None, :] - targets[None, :, :]
            out[start:start + step] = np.sqrt(np.min(np.sum(diff * diff, axis=-1), axis=1))
    else:
        out, _ = cKDTree(targets).query(pts)
    return ScalarField(grid, out.reshape(grid.shape))


def exact_distance_field(shape: Shape, grid: Grid, signed: bool = False) -> ScalarField:
    f = exact_signed_distance if signed else exact_distance
    return ScalarField(grid, f(shape, grid.coords()))
