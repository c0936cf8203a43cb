"""Log transforms turning screened Poisson solutions into (signed) distances.

Sign convention: the signed field approximates the signed distance that is
negative inside the closed shape A and positive outside.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BranchDomainViolation, EmptyInterface, EmptyRegion, NonPositiveSolution
from .fields import Mask, ScalarField

log = logging.getLogger(__name__)

# nodal values below this are treated as underflowed and excluded
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class TransformResult:
    distance: ScalarField
    validity: Mask
    beta: float
    scaled_log_beta: float
    c_star: Optional[float] = None
    excluded: int = 0

    @property
    def excluded_fraction(self) -> float:
        total = self.validity.count + self.excluded
        return self.excluded / total if total else 0.0


@dataclass(frozen=True)
class BetaDiagnostic:
    beta: float
    scaled_log: float


def beta_diagnostic(u: ScalarField, interface: Mask, a: float) -> BetaDiagnostic:
    """Minimum of ``u`` over the interface band and ``sqrt(a) log`` of it."""
    if interface.count == 0:
        raise EmptyInterface("interface node set is empty")
    beta = float(u.values[interface.values].min())
    if not beta > 0:
        raise NonPositiveSolution(f"u reaches {beta:.3e} on the interface")
    return BetaDiagnostic(beta, math.sqrt(a) * math.log(beta))


def distance_field(u: ScalarField, a: float, region: Mask, interface: Mask | None = None) -> TransformResult:
    """``-sqrt(a) log u`` on ``region`` (NaN elsewhere).

    ``interface`` defaults to the nodes of ``region`` with a neighbour
    outside it and feeds the beta diagnostic.
    """
    vals = u.values[region.values]
    if vals.size == 0:
        raise EmptyRegion("transform region is empty")
    if np.any(vals <= 0):
        raise NonPositiveSolution(f"{int(np.sum(vals <= 0))} region nodes have u <= 0")
    ok = region.values & (u.values >= UNDERFLOW)
    excluded = int(region.count - ok.sum())
    if excluded:
        log.warning("%d nodes excluded for underflow", excluded)
    out = np.full(u.grid.shape, np.nan)
    out[ok] = -math.sqrt(a) * np.log(u.values[ok])
    if interface is None:
        interface = _edge(region)
    beta = beta_diagnostic(u, interface, a)
    return TransformResult(ScalarField(u.grid, out), Mask(u.grid, ok), beta.beta, beta.scaled_log, None, excluded)


def _edge(region: Mask) -> Mask:
    """Region nodes with at least one axis neighbour outside the region."""
    v = region.values
    edge = np.zeros_like(v)
    for axis in range(v.ndim):
        for shift in (1, -1):
            nb = np.roll(v, shift, axis=axis)
            # grid ends have no outside neighbour along this axis
            idx = [slice(None)] * v.ndim
            idx[axis] = 0 if shift == 1 else -1
            nb[tuple(idx)] = True
            edge |= v & ~nb
    if not edge.any():
        edge = v.copy()
    return Mask(region.grid, edge)


def signed_distance_field(u: ScalarField, a: float, c_star: float, region_A: Mask,
                          region_omega_star: Mask, u_complement: ScalarField | None = None,
                          interface: Mask | None = None) -> TransformResult:
    """Two-branch transform: ``sqrt(a) log u`` on A, ``-sqrt(a) log(C* - u)`` outside.

    ``u`` solves the problem with source ``C*`` outside A.  ``C* - u`` is
    read from ``u_complement`` when given (a separate solve with data
    ``C* - f``, ``C* - g``), which avoids cancellation where u is close to
    C*.  Validity is restricted to ``region_omega_star``.
    """
    s = math.sqrt(a)
    inside = region_A.values
    outside = ~inside
    if np.any(u.values[inside] <= 0):
        raise NonPositiveSolution("u <= 0 inside A")
    comp = c_star - u.values if u_complement is None else u_complement.values
    # C* - u may vanish on the box boundary when g = C*; those nodes lie
    # outside the trusted region, so only zeros inside it are violations
    trusted = outside & region_omega_star.values
    bad = int(np.sum(comp[outside] < 0) + np.sum(comp[trusted] == 0))
    if bad:
        raise BranchDomainViolation(f"u >= C*={c_star} at {bad} exterior nodes")

    out = np.full(u.grid.shape, np.nan)
    good_in = inside & (u.values >= UNDERFLOW)
    good_out = outside & (comp >= UNDERFLOW)
    out[good_in] = s * np.log(u.values[good_in])
    out[good_out] = -s * np.log(comp[good_out])
    valid = region_omega_star.values & (good_in | good_out)
    excluded = int(region_omega_star.count - valid.sum())
    if interface is None:
        interface = _edge(region_A)
    beta = beta_diagnostic(u, interface, a)
    return TransformResult(ScalarField(u.grid, out), Mask(u.grid, valid), beta.beta, beta.scaled_log,
                           float(c_star), excluded)


def sup_error(computed: ScalarField, oracle: ScalarField, region: Mask) -> float:
    """``max |computed - oracle|`` over ``region``."""
    if computed.grid != oracle.grid or computed.grid != region.grid:
        raise ValueError("fields live on different grids")
    sel = region.values & np.isfinite(computed.values) & np.isfinite(oracle.values)
    if not sel.any():
        raise EmptyRegion("no valid nodes in the error region")
    return float(np.max(np.abs(computed.values[sel] - oracle.values[sel])))


def error_field(computed: ScalarField, oracle: ScalarField) -> ScalarField:
    return ScalarField(computed.grid, computed.values - oracle.values)
