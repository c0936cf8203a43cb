"""TOML case files.

Layout::

    [domain]    lo = [-1.0], hi = [1.0]
    [shape]     kind = "interval" | "ball" | "annulus" | "box" | "union" + its parameters
    [source]    kind = "indicator" (amplitude) | "power" (zeta)
    [boundary]  value = 1.0
    [sweep]     a = [...], spacing_factor = 0.125 | spacing = <fixed>,
                oracle = "exact" | "brute-force", transform = "distance" | "signed",
                c_star, method, tol, name

Unknown sections or keys raise ConfigError.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError, GeometryError
from ..geometry import Annulus, Ball, Box, DesignDomain, Interval, Shape, Union
from ..solver import A_MAX, A_MIN, MIN_CELLS_PER_LAYER
from ..sources import (BoundarySpec, ConstantBoundary, IndicatorComplement, PowerLaw1D,
                       PowerLawBall, SourceSpec)

DEFAULT_SPACING_FACTOR = 1 / 8


@dataclass(frozen=True)
class CaseSpec:
    """Everything needed to run one sweep.

    ``spacing_factor`` ties the grid to a (spacing = factor * sqrt(a));
    ``spacing`` fixes it instead.  ``tau`` only parametrizes the comparison
    model ``a^(1/2 - tau)`` in reports and never enters the solve.
    """

    domain: DesignDomain
    source: SourceSpec
    boundary: BoundarySpec
    a_list: tuple
    spacing_factor: Optional[float] = DEFAULT_SPACING_FACTOR
    spacing: Optional[float] = None
    oracle: str = "exact"
    transform: str = "distance"
    c_star: Optional[float] = None
    method: str = "direct"
    tol: float = 1e-10
    name: str = "case"
    tau: float = 0.0

    def __post_init__(self):
        a = tuple(float(v) for v in self.a_list)
        object.__setattr__(self, "a_list", a)
        if not a:
            raise ConfigError("a-list is empty")
        if any(x <= y for x, y in zip(a, a[1:])):
            raise ConfigError(f"a-list must be strictly decreasing, got {a}")
        if any(not A_MIN <= v <= A_MAX for v in a):
            raise ConfigError(f"every a must lie in [{A_MIN}, {A_MAX}]")
        if (self.spacing is None) == (self.spacing_factor is None):
            raise ConfigError("give exactly one of spacing_factor and spacing")
        limit = 1 / MIN_CELLS_PER_LAYER
        if self.spacing_factor is not None and not 0 < self.spacing_factor <= limit:
            raise ConfigError(f"spacing_factor must lie in (0, {limit}]")
        if self.spacing is not None and self.spacing > math.sqrt(min(a)) * limit:
            raise ConfigError(f"fixed spacing {self.spacing} does not resolve a={min(a)}")
        if self.oracle not in ("exact", "brute-force"):
            raise ConfigError(f"unknown oracle {self.oracle!r}")
        if self.transform not in ("distance", "signed"):
            raise ConfigError(f"unknown transform {self.transform!r}")
        if self.method not in ("direct", "cg"):
            raise ConfigError(f"unknown method {self.method!r}")
        if not 0 <= self.tau < 0.5:
            raise ConfigError("tau must lie in [0, 1/2)")
        if self.transform == "signed":
            if not isinstance(self.source, IndicatorComplement):
                raise ConfigError("the signed transform needs an indicator source")
            g_sup = _boundary_sup(self.boundary)
            c = self.effective_c_star
            if c < g_sup or not math.isclose(c, self.source.amplitude, rel_tol=1e-12):
                raise ConfigError(f"C*={c} must equal the indicator amplitude and be >= sup g = {g_sup}")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def effective_c_star(self) -> float:
        if self.c_star is not None:
            return float(self.c_star)
        return max(_boundary_sup(self.boundary), self.source.sup())

    def spacing_for(self, a: float) -> float:
        return self.spacing if self.spacing is not None else self.spacing_factor * math.sqrt(a)

    def with_a(self, a_list) -> "CaseSpec":
        return replace(self, a_list=tuple(a_list))


def _boundary_sup(boundary: BoundarySpec) -> float:
    if isinstance(boundary, ConstantBoundary):
        return boundary.value
    raise ConfigError("only constant boundary data is supported in case files")


_SECTIONS = {
    "domain": {"lo", "hi"},
    "shape": {"kind", "center", "half_width", "radius", "r_inner", "r_outer", "lo", "hi", "members"},
    "source": {"kind", "amplitude", "zeta"},
    "boundary": {"value"},
    "sweep": {"a", "spacing_factor", "spacing", "oracle", "transform", "c_star", "method", "tol", "name", "tau"},
}

_SHAPE_KEYS = {
    "interval": {"center", "half_width"},
    "ball": {"center", "radius"},
    "annulus": {"center", "r_inner", "r_outer"},
    "box": {"lo", "hi"},
    "union": {"members"},
}


def _vec(v, key):
    if isinstance(v, (int, float)):
        return (float(v),)
    try:
        return tuple(float(x) for x in v)
    except TypeError as exc:
        raise ConfigError(f"{key} must be a number or a list of numbers") from exc


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"[{where}] is missing {key!r}")
    return table[key]


def parse_shape(table: dict, where: str = "shape") -> Shape:
    kind = _need(table, "kind", where)
    if kind not in _SHAPE_KEYS:
        raise ConfigError(f"unknown shape kind {kind!r}")
    extra = set(table) - _SHAPE_KEYS[kind] - {"kind"}
    if extra:
        raise ConfigError(f"[{where}] keys {sorted(extra)} do not apply to kind {kind!r}")
    try:
        if kind == "interval":
            return Interval(float(_need(table, "center", where)), float(_need(table, "half_width", where)))
        if kind == "ball":
            return Ball(_vec(_need(table, "center", where), "center"), float(_need(table, "radius", where)))
        if kind == "annulus":
            return Annulus(_vec(_need(table, "center", where), "center"),
                           float(_need(table, "r_inner", where)), float(_need(table, "r_outer", where)))
        if kind == "box":
            return Box(_vec(_need(table, "lo", where), "lo"), _vec(_need(table, "hi", where), "hi"))
        members = _need(table, "members", where)
        if not isinstance(members, list) or not members:
            raise ConfigError("union members must be a nonempty list of tables")
        return Union(tuple(parse_shape(m, f"{where}.members") for m in members))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise GeometryError(f"bad [{where}] parameters: {exc}") from exc


def _parse_source(table: dict, domain: DesignDomain) -> SourceSpec:
    kind = _need(table, "kind", "source")
    if kind == "indicator":
        if "zeta" in table:
            raise ConfigError("an indicator source has zeta = 0; drop the key")
        return IndicatorComplement(domain.shape, float(table.get("amplitude", 1.0)))
    if kind == "power":
        if "amplitude" in table:
            raise ConfigError("power sources take no amplitude")
        zeta = float(_need(table, "zeta", "source"))
        shape = domain.shape
        if isinstance(shape, Interval):
            lo, hi = domain.omega.lo[0], domain.omega.hi[0]
            if shape.center != 0 or lo != -hi:
                raise ConfigError("power sources in 1D need a symmetric domain and interval centred at 0")
            return PowerLaw1D(shape.half_width, zeta, hi)
        if isinstance(shape, Ball):
            far = max(abs(c) for c in domain.omega.lo + domain.omega.hi)
            return PowerLawBall(shape, zeta, extent=math.sqrt(domain.dim) * far + max(abs(c) for c in shape.center))
        raise ConfigError("power sources are defined for interval and ball shapes")
    raise ConfigError(f"unknown source kind {kind!r}")


def parse_case(doc: dict) -> CaseSpec:
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    for name, keys in _SECTIONS.items():
        table = doc.get(name, {})
        if not isinstance(table, dict):
            raise ConfigError(f"[{name}] must be a table")
        bad = set(table) - keys
        if bad:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
    for required in ("domain", "shape", "source", "sweep"):
        if required not in doc:
            raise ConfigError(f"missing section [{required}]")

    dom = doc["domain"]
    omega = Box(_vec(_need(dom, "lo", "domain"), "lo"), _vec(_need(dom, "hi", "domain"), "hi"))
    domain = DesignDomain(omega, parse_shape(doc["shape"]))
    source = _parse_source(doc["source"], domain)
    boundary = ConstantBoundary(float(doc.get("boundary", {}).get("value", 1.0)))

    sw = doc["sweep"]
    a_list = _vec(_need(sw, "a", "sweep"), "a")
    spacing = sw.get("spacing")
    factor = sw.get("spacing_factor", None if spacing is not None else DEFAULT_SPACING_FACTOR)
    return CaseSpec(
        domain=domain,
        source=source,
        boundary=boundary,
        a_list=a_list,
        spacing_factor=None if factor is None else float(factor),
        spacing=None if spacing is None else float(spacing),
        oracle=sw.get("oracle", "exact"),
        transform=sw.get("transform", "distance"),
        c_star=sw.get("c_star"),
        method=sw.get("method", "direct"),
        tol=float(sw.get("tol", 1e-10)),
        name=str(sw.get("name", "case")),
        tau=float(sw.get("tau", 0.0)),
    )


def load_case(path) -> CaseSpec:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_case(doc)


def loads_case(text: str) -> CaseSpec:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from exc
    return parse_case(doc)
