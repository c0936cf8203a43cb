"""Uniform 1D/2D grids, nodal fields and ball/sphere means.

Nodal arrays use ``indexing="ij"``: ``values[i, j]`` lives at
``(grid.axes[0][i], grid.axes[1][j])``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .errors import BallOutsideGrid, BallUnresolved, SphereOutsideGrid

_EXTENT_SLACK = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform lattice on the box ``[lo_0, hi_0] x ... `` (N = 1 or 2)."""

    counts: tuple[int, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if not (len(counts) == len(lo) == len(hi)):
            raise ValueError("counts, lo and hi must have the same length")
        if len(counts) not in (1, 2):
            raise ValueError(f"only 1D and 2D grids are supported, got N={len(counts)}")
        if min(counts) < 3:
            raise ValueError(f"need at least 3 nodes per axis, got {counts}")
        if any(l >= h for l, h in zip(lo, hi)):
            raise ValueError(f"empty extent: lo={lo}, hi={hi}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def with_spacing(cls, lo, hi, spacing: float) -> "Grid":
        """Smallest grid on ``[lo, hi]`` whose spacing does not exceed ``spacing``."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        # the 1e-9 guard keeps exact multiples from gaining a spurious node
        counts = [max(3, int(math.ceil((h - l) / spacing - 1e-9)) + 1) for l, h in zip(lo, hi)]
        return cls(tuple(counts), tuple(lo), tuple(hi))

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((h - l) / (n - 1) for l, h, n in zip(self.lo, self.hi, self.counts))

    @property
    def h(self) -> float:
        """Largest per-axis spacing."""
        return max(self.spacing)

    @property
    def axes(self) -> list[np.ndarray]:
        return [np.linspace(l, h, n) for l, h, n in zip(self.lo, self.hi, self.counts)]

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``grid.shape + (N,)``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            index = [slice(None)] * self.dim
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask

    def contains_box(self, lo, hi) -> bool:
        lo = np.atleast_1d(lo)
        hi = np.atleast_1d(hi)
        return bool(
            np.all(lo >= np.asarray(self.lo) - _EXTENT_SLACK)
            and np.all(hi <= np.asarray(self.hi) + _EXTENT_SLACK)
        )


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True)
class Mask:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=bool)
        if values.shape != self.grid.shape:
            raise ValueError(f"mask shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    def __and__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.values & other.values)

    def __or__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.values | other.values)

    def __invert__(self) -> "Mask":
        return Mask(self.grid, ~self.values)

    @property
    def count(self) -> int:
        return int(self.values.sum())

    def points(self) -> np.ndarray:
        """Coordinates of the selected nodes, shape ``(count, N)``."""
        return self.grid.coords()[self.values]


# A set of grid nodes (e.g. the rasterized interface) is a boolean mask.
NodeSet = Mask


def _center(center, dim: int) -> np.ndarray:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.shape != (dim,):
        raise ValueError(f"center must have {dim} coordinates, got {c.shape}")
    return c


def _spline(field: ScalarField) -> CubicSpline:
    # not-a-knot end conditions reproduce cubics exactly
    return CubicSpline(field.grid.axes[0], field.values)


def _bilinear(field: ScalarField) -> RegularGridInterpolator:
    return RegularGridInterpolator(tuple(field.grid.axes), field.values, method="linear")


def _check_ball(grid: Grid, c: np.ndarray, radius: float):
    if not grid.contains_box(c - radius, c + radius):
        raise BallOutsideGrid(f"ball B({c.tolist()}, {radius}) leaves the grid {grid.lo}-{grid.hi}")


def volume_mean(field: ScalarField, center, radius: float, rule: str | None = None) -> float:
    """Average of ``field`` over the closed ball ``B(center, radius)``.

    ``rule="nodes"`` averages the nodes inside the ball (midpoint rule);
    ``rule="interp"`` integrates the cubic-spline interpolant exactly and
    is only available in 1D.  The default is ``"interp"`` in 1D and
    ``"nodes"`` in 2D.
    """
    grid = field.grid
    c = _center(center, grid.dim)
    if radius < 2 * grid.h:
        raise BallUnresolved(f"radius {radius} is below two grid spacings ({2 * grid.h})")
    _check_ball(grid, c, radius)
    if rule is None:
        rule = "interp" if grid.dim == 1 else "nodes"

    offsets = grid.coords() - c
    inside = np.einsum("...i,...i->...", offsets, offsets) <= radius * radius * (1 + 1e-12)
    count = int(inside.sum())
    if count < 3 ** grid.dim:
        raise BallUnresolved(f"only {count} nodes inside the ball (need {3 ** grid.dim})")

    if rule == "nodes":
        return float(field.values[inside].mean())
    if rule == "interp":
        if grid.dim != 1:
            raise ValueError("rule='interp' is only implemented for 1D fields")
        lo, hi = c[0] - radius, c[0] + radius
        return float(_spline(field).integrate(lo, hi) / (2 * radius))
    raise ValueError(f"unknown quadrature rule {rule!r}")


def surface_mean(field: ScalarField, center, radius: float) -> float:
    """Average of ``field`` over the sphere ``|x - center| = radius``.

    In 1D this is ``(F(y + r) + F(y - r)) / 2`` with spline interpolation;
    in 2D the circle is sampled at ``max(16, ceil(2 pi r / h))`` equally
    spaced angles and the field is interpolated bilinearly.
    """
    grid = field.grid
    c = _center(center, grid.dim)
    if not grid.contains_box(c - radius, c + radius):
        raise SphereOutsideGrid(f"sphere S({c.tolist()}, {radius}) leaves the grid")
    if radius == 0.0:
        pts = c[None, :]
    elif grid.dim == 1:
        pts = np.array([[c[0] - radius], [c[0] + radius]])
    else:
        m = max(16, int(math.ceil(2 * math.pi * radius / grid.h)))
        theta = 2 * math.pi * np.arange(m) / m
        pts = c + radius * np.column_stack([np.cos(theta), np.sin(theta)])
        # keep rounding from pushing samples a hair outside the grid
        pts = np.clip(pts, grid.lo, grid.hi)
    if grid.dim == 1:
        vals = _spline(field)(pts[:, 0])
    else:
        vals = _bilinear(field)(pts)
    return float(np.mean(vals))


def simpson(values: np.ndarray, step: float) -> float:
    """Composite Simpson sum for equally spaced samples (odd count)."""
    n = len(values) - 1
    if n < 2 or n % 2:
        raise ValueError("Simpson's rule needs an even number of panels")
    return float(step / 3 * (values[0] + values[-1] + 4 * values[1:-1:2].sum() + 2 * values[2:-1:2].sum()))


def verify_mean_relation(field: ScalarField, center, radius: float, panels: int = 64,
                         rule: str | None = None) -> float:
    """Residual between the volume mean and the radial integral of sphere means.

    Returns ``|m_r - (N / r^N) * int_0^r t^(N-1) S_t dt|`` with the radial
    integral evaluated by composite Simpson on ``panels`` panels.
    """
    if panels < 64 or panels % 2:
        raise ValueError("panels must be even and at least 64")
    n = field.grid.dim
    vm = volume_mean(field, center, radius, rule=rule)
    t = np.linspace(0.0, radius, panels + 1)
    s = np.array([surface_mean(field, center, r) for r in t])
    integral = simpson(t ** (n - 1) * s, radius / panels)
    return abs(vm - n / radius ** n * integral)


def write_field_csv(field: ScalarField, path, name: str = "value") -> None:
    """Write one row per node: ``x[,y],value``."""
    grid = field.grid
    coords = grid.coords().reshape(-1, grid.dim)
    labels = ["x", "y"][: grid.dim]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(labels + [name])
        for point, value in zip(coords, field.values.ravel()):
            writer.writerow([repr(float(p)) for p in point] + [repr(float(value))])


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_field_csv`: returns ``(coords, values)``."""
    data = np.genfromtxt(Path(path), delimiter=",", names=True)
    names = data.dtype.names
    coords = np.column_stack([data[n] for n in names[:-1]])
    return coords, np.asarray(data[names[-1]])


def field_from_function(grid: Grid, func) -> ScalarField:
    """Sample ``func(points)`` (points shaped ``(..., N)``) at every node."""
    return ScalarField(grid, np.asarray(func(grid.coords()), dtype=float))

