"""Finite-difference solver for ``-a Lap u + u = f`` with Dirichlet data on a box.

The operator is the 3-point (1D) or 5-point (2D) Laplacian scaled by ``a``
plus the identity, restricted to interior nodes.  It is a symmetric
M-matrix, so with nonnegative data every elimination step adds nonnegative
quantities and the direct solves keep the relative accuracy of each nodal
value.  That matters here: the log transform reads values as small as
``exp(-d / sqrt(a))``, far below any norm-wise residual tolerance.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded

from .errors import ConfigError, GridTooCoarse, NoConvergence
from .fields import Grid, ScalarField
from .geometry import Box, DesignDomain
from .sources import BoundarySpec, ConstantBoundary, SourceSpec

log = logging.getLogger(__name__)

A_MIN = 1e-8
A_MAX = 1.0
# boundary layer sqrt(a) must span at least this many cells
MIN_CELLS_PER_LAYER = 4


@dataclass(frozen=True)
class SolverConfig:
    a: float
    tol: float = 1e-10
    max_iter: int = 20000
    method: str = "direct"
    grid: Grid | None = None

    def __post_init__(self):
        if not A_MIN <= self.a <= A_MAX:
            raise ConfigError(f"a={self.a} outside the supported range [{A_MIN}, {A_MAX}]")
        if not 0 < self.tol <= 1e-4:
            raise ConfigError(f"tolerance {self.tol} outside (0, 1e-4]")
        if self.method not in ("direct", "cg"):
            raise ConfigError(f"unknown method {self.method!r}")


class HelmholtzOperator:
    """``(-a Lap_h + I)`` on the interior nodes of ``grid``; factorized on demand."""

    def __init__(self, grid: Grid, a: float):
        self.grid = grid
        self.a = a
        self.interior_shape = tuple(n - 2 for n in grid.counts)
        self.coupling = tuple(a / h ** 2 for h in grid.spacing)
        self.matrix = self._build()
        self._lu = None
        self._lock = threading.Lock()

    def _build(self) -> sp.csr_matrix:
        blocks = []
        for m, c in zip(self.interior_shape, self.coupling):
            off = -c * np.ones(m - 1)
            blocks.append(sp.diags([off, 2 * c * np.ones(m), off], [-1, 0, 1], format="csr"))
        if self.grid.dim == 1:
            lap = blocks[0]
        else:
            mx, my = self.interior_shape
            lap = sp.kron(blocks[0], sp.identity(my)) + sp.kron(sp.identity(mx), blocks[1])
        return (lap + sp.identity(lap.shape[0])).tocsr()

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def banded(self) -> np.ndarray:
        """LAPACK banded storage of the 1D tridiagonal operator."""
        c = self.coupling[0]
        m = self.interior_shape[0]
        ab = np.zeros((3, m))
        ab[0, 1:] = -c
        ab[1, :] = 1 + 2 * c
        ab[2, :-1] = -c
        return ab

    def solve_direct(self, rhs: np.ndarray) -> np.ndarray:
        if self.grid.dim == 1:
            # no pivoting happens: the matrix is strictly diagonally dominant
            return solve_banded((1, 1), self.banded(), rhs)
        with self._lock:
            if self._lu is None:
                # symmetric ordering + no pivoting keeps every Schur complement an M-matrix
                self._lu = spla.splu(
                    self.matrix.tocsc(),
                    permc_spec="MMD_AT_PLUS_A",
                    diag_pivot_thresh=0.0,
                    options={"SymmetricMode": True},
                )
            lu = self._lu
        return lu.solve(rhs)


@dataclass(frozen=True)
class DiscreteSystem:
    operator: HelmholtzOperator
    source: np.ndarray = field(repr=False)
    boundary_values: np.ndarray = field(repr=False)
    f_sup: float
    g_sup: float

    @property
    def grid(self) -> Grid:
        return self.operator.grid

    @property
    def a(self) -> float:
        return self.operator.a

    @property
    def matrix(self) -> sp.csr_matrix:
        return self.operator.matrix

    @property
    def M(self) -> float:
        return max(self.f_sup, self.g_sup)

    @cached_property
    def rhs(self) -> np.ndarray:
        """Interior source plus the Dirichlet lift of the boundary values."""
        grid = self.grid
        rhs = self.source[tuple(slice(1, -1) for _ in range(grid.dim))].copy()
        for axis, c in enumerate(self.operator.coupling):
            src = [slice(1, -1)] * grid.dim
            dst = [slice(None)] * grid.dim
            for end in (0, -1):
                src[axis] = dst[axis] = end
                rhs[tuple(dst)] += c * self.boundary_values[tuple(src)]
        return rhs.ravel()

    def complement(self, c_star: float) -> "DiscreteSystem":
        """System for ``C* - u``: source ``C* - f`` and boundary ``C* - g``.

        Shares the operator (and its factorization) with ``self``.
        """
        on_boundary = self.grid.boundary_mask()
        g = np.where(on_boundary, c_star - self.boundary_values, 0.0)
        if c_star < self.M:
            raise ConfigError(f"C*={c_star} must dominate both f and g (M={self.M})")
        return DiscreteSystem(self.operator, c_star - self.source, g, c_star, float(g[on_boundary].max()))


def _check_cover(omega: Box, grid: Grid):
    if grid.dim != omega.dim:
        raise ConfigError("grid and domain dimensions differ")
    if not (np.allclose(grid.lo, omega.lo, rtol=0, atol=1e-12) and np.allclose(grid.hi, omega.hi, rtol=0, atol=1e-12)):
        raise ConfigError(f"grid {grid.lo}-{grid.hi} must cover the domain {omega.lo}-{omega.hi} exactly")


def assemble(domain: DesignDomain | Box, grid: Grid, a: float, f: SourceSpec,
             g: BoundarySpec | float = 1.0) -> DiscreteSystem:
    """Assemble the Dirichlet problem ``-a Lap u + u = f``, ``u = g`` on the box.

    Raises GridTooCoarse when the spacing exceeds ``sqrt(a) / 4``.
    """
    omega = domain.omega if isinstance(domain, DesignDomain) else domain
    _check_cover(omega, grid)
    if not a > 0:
        raise ConfigError(f"a must be positive, got {a}")
    if grid.h > math.sqrt(a) / MIN_CELLS_PER_LAYER * (1 + 1e-12):
        raise GridTooCoarse(
            f"spacing {grid.h:.3g} exceeds sqrt(a)/{MIN_CELLS_PER_LAYER} = {math.sqrt(a) / MIN_CELLS_PER_LAYER:.3g}"
        )
    if not isinstance(g, BoundarySpec):
        g = ConstantBoundary(float(g))

    op = HelmholtzOperator(grid, a)
    pts = grid.coords()
    fvals = np.asarray(f.values(pts), dtype=float)
    if np.any(fvals < 0) or not np.all(np.isfinite(fvals)):
        raise ConfigError("source must be finite and nonnegative at every node")
    on_boundary = grid.boundary_mask()
    gfull = np.zeros(grid.shape)
    gfull[on_boundary] = g.values(pts[on_boundary])
    if np.any(gfull < 0) or not np.all(np.isfinite(gfull)):
        raise ConfigError("boundary data must be finite and nonnegative")

    g_sup = float(gfull[on_boundary].max())
    f_sup = float(fvals.max())
    return DiscreteSystem(op, fvals, gfull, f_sup, g_sup)


@dataclass(frozen=True)
class BoundReport:
    min_u: float
    max_u: float
    min_interior: float
    M: float
    tol: float

    @property
    def passed(self) -> bool:
        slack = self.tol * self.M
        return bool(self.min_interior > 0 and self.min_u > -slack and self.max_u <= self.M + slack)


@dataclass(frozen=True)
class SolveResult:
    u: ScalarField
    iterations: int
    residual: float
    bounds: BoundReport
    method: str


def _full_field(system: DiscreteSystem, interior: np.ndarray) -> ScalarField:
    grid = system.grid
    values = system.boundary_values.copy()
    values[tuple(slice(1, -1) for _ in range(grid.dim))] = interior.reshape(system.operator.interior_shape)
    return ScalarField(grid, values)


def _bounds(u: np.ndarray, grid: Grid, M: float, tol: float) -> BoundReport:
    inner = u[tuple(slice(1, -1) for _ in range(grid.dim))]
    return BoundReport(float(u.min()), float(u.max()), float(inner.min()), M, tol)


def conjugate_gradient(matrix, rhs, tol=1e-10, max_iter=20000, x0=None):
    """Jacobi-preconditioned CG; returns ``(x, iterations, relative_residual)``."""
    inv_diag = 1.0 / matrix.diagonal()
    x = np.zeros_like(rhs) if x0 is None else x0.copy()
    r = rhs - matrix @ x
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0:
        return x, 0, 0.0
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    res = np.linalg.norm(r) / bnorm
    for it in range(1, max_iter + 1):
        if res <= tol:
            return x, it - 1, res
        q = matrix @ p
        alpha = rz / (p @ q)
        x += alpha * p
        r -= alpha * q
        res = np.linalg.norm(r) / bnorm
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    if res <= tol:
        return x, max_iter, res
    raise NoConvergence(max_iter, res)


def solve(system: DiscreteSystem, config: SolverConfig) -> SolveResult:
    """Solve the assembled system.

    ``method="direct"`` uses tridiagonal elimination in 1D and a sparse LU
    (symmetric ordering, no pivoting) in 2D.  ``method="cg"`` runs Jacobi
    preconditioned conjugate gradients to the relative residual ``tol``.
    """
    if not math.isclose(config.a, system.a, rel_tol=1e-12):
        raise ConfigError(f"config a={config.a} differs from the assembled a={system.a}")
    if config.method == "direct":
        x = system.operator.solve_direct(system.rhs)
        iterations = 1
    else:
        x, iterations, _ = conjugate_gradient(system.matrix, system.rhs, config.tol, config.max_iter)
    res = residual_norm(system, x)
    if res > config.tol:
        raise NoConvergence(iterations, res)
    u = _full_field(system, x)
    log.debug("solved n=%d a=%g method=%s res=%.2e", system.operator.size, system.a, config.method, res)
    return SolveResult(u, iterations, res, _bounds(u.values, system.grid, system.M, config.tol), config.method)


def residual_norm(system: DiscreteSystem, u) -> float:
    """``||A u - b|| / ||b||`` over interior nodes (``u`` full field or interior vector)."""
    if isinstance(u, ScalarField):
        u = u.values[tuple(slice(1, -1) for _ in range(u.grid.dim))].ravel()
    u = np.asarray(u, dtype=float).ravel()
    r = np.linalg.norm(system.matrix @ u - system.rhs)
    b = np.linalg.norm(system.rhs)
    return float(r / b) if b > 0 else float(r)


def verify_bounds(result: SolveResult, f: SourceSpec, g: BoundarySpec | float, tol: float | None = None) -> BoundReport:
    """Check ``0 < u <= M = max(sup f, sup g)`` on the solved field.

    Strict positivity is demanded on interior nodes only; the other two
    bounds allow a slack of ``tol * M``.
    """
    grid = result.u.grid
    pts = grid.coords()
    if not isinstance(g, BoundarySpec):
        g = ConstantBoundary(float(g))
    on_boundary = grid.boundary_mask()
    M = max(float(np.max(f.values(pts))), float(np.max(g.values(pts[on_boundary]))))
    return _bounds(result.u.values, grid, M, result.bounds.tol if tol is None else tol)
