"""Closed forms and quadrature oracles for the screened Poisson problem.

Everything exponential is evaluated in log-space: arguments such as
``h / sqrt(a)`` reach the hundreds and raw ``cosh`` overflows.  The
identity used throughout is ``log cosh s = |s| + log1p(exp(-2|s|)) - log 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LossOfPrecision, QuadratureTolExceeded

LOG2 = math.log(2.0)


def log_cosh(s):
    s = np.abs(s)
    return s + np.log1p(np.exp(-2 * s)) - LOG2


@dataclass(frozen=True)
class Quadrature:
    """Composite Simpson rule with panel doubling until two estimates agree.

    ``truncation`` caps semi-infinite integrals whose integrand decays like
    ``exp(-t)``.
    """

    panels: int = 512
    truncation: float = 40.0
    rtol: float = 1e-12
    atol: float = 1e-300
    max_panels: int = 1 << 18

    def __post_init__(self):
        if self.panels < 16 or self.panels % 2:
            raise ValueError("panel count must be even and >= 16")

    def integrate(self, func, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        n = self.panels
        prev = _simpson(func, lo, hi, n)
        while n < self.max_panels:
            n *= 2
            cur = _simpson(func, lo, hi, n)
            if abs(cur - prev) <= self.rtol * abs(cur) + self.atol:
                return cur
            prev = cur
        raise QuadratureTolExceeded(f"Simpson on [{lo}, {hi}] did not settle within {self.max_panels} panels")


def _simpson(func, lo, hi, n):
    t = np.linspace(lo, hi, n + 1)
    y = func(t)
    step = (hi - lo) / n
    return float(step / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


DEFAULT_QUADRATURE = Quadrature()


# -- Varadhan's homogeneous problem -------------------------------------------------

def log_varadhan_1d(x, h: float, a: float):
    """log of ``cosh(x / sqrt a) / cosh(h / sqrt a)``."""
    s = math.sqrt(a)
    return log_cosh(np.asarray(x, dtype=float) / s) - log_cosh(h / s)


def varadhan_1d(x, h: float, a: float):
    """Solution of ``-a q'' + q = 0`` on ``(-h, h)`` with ``q(+-h) = 1``."""
    out = np.exp(log_varadhan_1d(x, h, a))
    return float(out) if np.ndim(out) == 0 else out


# -- Example: f = (|x| - k)^zeta outside (-k, k) --------------------------------------

def _moment(base: float, slope: float, zeta: float, upper: float, bracket, q: Quadrature) -> float:
    """``int_0^upper (base + slope w)^zeta e^{-w} bracket(w) dw`` with tail truncation."""
    if upper <= 0:
        return 0.0
    top = min(upper, q.truncation + 2 * zeta + 8.0)

    def integrand(w):
        t = np.maximum(base + slope * w, 0.0)
        powr = t ** zeta if zeta != 0 else np.ones_like(t)
        return powr * np.exp(-w) * bracket(w)

    if zeta != int(zeta):
        # a root of base + slope w at an endpoint makes the integrand
        # non-smooth there; w = v^2 (or upper - v^2) restores Simpson's order
        if base == 0.0:
            return q.integrate(lambda v: 2 * v * integrand(v * v), 0.0, math.sqrt(top))
        if slope < 0 and top == upper:
            return q.integrate(lambda v: 2 * v * integrand(upper - v * v), 0.0, math.sqrt(upper))
    return q.integrate(integrand, 0.0, top)


def log_gamma_a(h: float, k: float, alpha: float, zeta: float, a: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """log of the coefficient ``u_a(0)`` of the 1D power-law example."""
    return float(_log_example1d(0.0, h, k, alpha, zeta, a, q))


def gamma_a(h: float, k: float, alpha: float, zeta: float, a: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """``(alpha + a^{-1/2} int_0^h f(y) sinh((h - y)/sqrt a) dy) / cosh(h / sqrt a)``."""
    _check_example(h, k, alpha, zeta, a)
    return math.exp(log_gamma_a(h, k, alpha, zeta, a, q))


def _check_example(h, k, alpha, zeta, a):
    if not 0 < k < h:
        raise ValueError(f"need 0 < k < h, got k={k}, h={h}")
    if alpha <= 0 or a <= 0 or zeta < 0:
        raise ValueError("need alpha > 0, a > 0 and zeta >= 0")


def _log_example1d(x: float, h: float, k: float, alpha: float, zeta: float, a: float, q: Quadrature) -> float:
    # Green's-function form: u = alpha cosh(x/s)/cosh(h/s)
    #   + (1/s) [sinh((h-x)/s) int_k^x f cosh(y/s) dy + cosh(x/s) int_{max(x,k)}^h f sinh((h-y)/s) dy] / cosh(h/s)
    # Every term is nonnegative, so no cancellation; each is reduced to a
    # damped moment integral times an explicit exponential.
    s = math.sqrt(a)
    x = abs(x)
    den = math.log1p(math.exp(-2 * h / s))
    terms = [math.log(alpha) + log_cosh(x / s) - log_cosh(h / s)]

    if x > k:
        # (1/s) int_k^x (y-k)^zeta cosh(y/s) dy, substitute w = (x - y)/s
        upper = (x - k) / s
        m2 = _moment(x - k, -s, zeta, upper, lambda w: 1.0 + np.exp(-2 * (x / s - w)), q)
        if m2 > 0:
            lead = math.log1p(-math.exp(-2 * (h - x) / s)) if h > x else -math.inf
            terms.append(lead - den + math.log(m2 / 2))

    y0 = max(x, k)
    if y0 < h:
        # (1/s) int_{y0}^h (y-k)^zeta sinh((h-y)/s) dy, substitute w = (y - y0)/s
        upper = (h - y0) / s
        m3 = _moment(y0 - k, s, zeta, upper, lambda w: -np.expm1(-2 * (upper - w)), q)
        if m3 > 0:
            lead = (x - y0) / s + math.log1p(math.exp(-2 * x / s)) - den
            terms.append(lead + math.log(m3 / 2))

    return float(np.logaddexp.reduce(terms))


def example1d_log_solution(x, h: float, k: float, alpha: float, zeta: float, a: float,
                           q: Quadrature = DEFAULT_QUADRATURE):
    """log u_a(x) for ``-a u'' + u = f`` on ``(-h, h)``, ``u(+-h) = alpha``, ``f = (|x|-k)_+^zeta``."""
    _check_example(h, k, alpha, zeta, a)
    xs = np.abs(np.asarray(x, dtype=float))
    if np.any(xs > h * (1 + 1e-12)):
        raise ValueError("x must lie in [-h, h]")
    flat = np.minimum(xs.ravel(), h)
    out = np.empty_like(flat)
    inner = flat <= k
    if inner.any():
        # on [-k, k] the integral term vanishes: u = gamma_a cosh(x / sqrt a)
        out[inner] = log_gamma_a(h, k, alpha, zeta, a, q) + log_cosh(flat[inner] / math.sqrt(a))
    for i in np.flatnonzero(~inner):
        out[i] = _log_example1d(flat[i], h, k, alpha, zeta, a, q)
    out = out.reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def example1d_solution(x, h: float, k: float, alpha: float, zeta: float, a: float,
                       q: Quadrature = DEFAULT_QUADRATURE):
    """Closed-form solution of the 1D power-law example (see example1d_log_solution)."""
    out = np.exp(example1d_log_solution(x, h, k, alpha, zeta, a, q))
    return float(out) if np.ndim(out) == 0 else out


def example1d_solution_direct(x: float, h: float, k: float, alpha: float, zeta: float, a: float,
                              q: Quadrature = DEFAULT_QUADRATURE, max_cancellation: float = 1e-8) -> float:
    """``gamma_a cosh(x/s) - (1/s) int_0^x f(y) sinh((x-y)/s) dy`` evaluated as written.

    ``e^{x/s}`` is factored out of both terms before subtracting; raises
    LossOfPrecision when the difference is smaller than ``max_cancellation``
    times the leading term.
    """
    _check_example(h, k, alpha, zeta, a)
    s = math.sqrt(a)
    x = abs(x)
    lg = log_gamma_a(h, k, alpha, zeta, a, q)
    # both terms carry exp(x/s); compare the cofactors
    first = math.exp(lg + math.log1p(math.exp(-2 * x / s)) - LOG2)
    if x <= k:
        return first * math.exp(x / s) if x / s < 700 else math.exp(lg + log_cosh(x / s))
    upper = (x - k) / s
    m = _moment(0.0, s, zeta, upper, lambda w: -np.expm1(-2 * (upper - w)), q)
    # (1/s) int_k^x (y-k)^zeta sinh((x-y)/s) dy = e^{(x-k)/s} * m / 2 with w = (y - k)/s
    second = math.exp(-k / s) * m / 2
    diff = first - second
    if diff <= max_cancellation * first:
        raise LossOfPrecision(f"cancellation at x={x}: {diff:.3e} vs {first:.3e}")
    return diff * math.exp(x / s)


# -- mean value property of a Delta h = h -----------------------------------------------

def _half_angle_integral(log_weight, s: float, q: Quadrature) -> float:
    """log of ``int_0^pi cosh(s cos t) w(t) dt`` for weights symmetric about pi/2."""
    # symmetric about pi/2, so integrate over [0, pi/2] where cos >= 0 and double
    def integrand(t):
        c = np.cos(t)
        return np.exp(s * (c - 1) + log_weight(t)) * (1 + np.exp(-2 * s * c)) / 2

    return s + math.log(2 * q.integrate(integrand, 0.0, math.pi / 2))


def _sin_power(p: float):
    def w(t):
        with np.errstate(divide="ignore"):
            return p * np.log(np.sin(t)) if p else np.zeros_like(t)
    return w


def mean_value_kernel(N: int, eta: float, a: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Factor kappa with ``h(y) = kappa * S_eta^y(h)`` for every solution of ``a Lap h = h``."""
    if N < 1 or eta <= 0 or a <= 0:
        raise ValueError("need N >= 1, eta > 0, a > 0")
    s = eta / math.sqrt(a)
    if N == 1:
        return math.exp(-log_cosh(s))
    w = _sin_power(N - 2)
    num = math.log(2 * q.integrate(lambda t: np.exp(w(t)), 0.0, math.pi / 2))
    return math.exp(num - _half_angle_integral(w, s, q))


def log_bessel_I(nu: float, r: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """log I_nu(r) from the Poisson integral ``(r/2)^nu / (G(1/2) G(nu+1/2)) int cosh(r cos t) sin^{2 nu} t dt``."""
    if nu < 0 or r < 0:
        raise ValueError("need nu >= 0 and r >= 0")
    if r == 0:
        return 0.0 if nu == 0 else -math.inf
    log_norm = nu * math.log(r / 2) - math.lgamma(0.5) - math.lgamma(nu + 0.5)
    return log_norm + _half_angle_integral(_sin_power(2 * nu), r, q)


def bessel_I(nu: float, r: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Modified Bessel function of the first kind, I_nu(r), nu >= 0."""
    return math.exp(log_bessel_I(nu, r, q))


def mean_value_via_bessel(N: int, eta: float, a: float, mean: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Centre value ``(mu eta / 2)^nu S / (Gamma(1 + nu) I_nu(mu eta))`` with ``mu = a^{-1/2}``, ``nu = (N-2)/2``."""
    if N == 1:
        return mean * mean_value_kernel(1, eta, a, q)
    nu = (N - 2) / 2
    z = eta / math.sqrt(a)
    log_k = nu * math.log(z / 2) - math.lgamma(1 + nu) - log_bessel_I(nu, z, q)
    return mean * math.exp(log_k)


# -- exterior comparison solution --------------------------------------------------------

def log_exterior_solution(N: int, a: float, beta: float, dist: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    s = math.sqrt(a)
    if dist < s * (1 - 1e-12):
        raise ValueError(f"dist={dist} lies inside the tangent ball of radius sqrt(a)={s}")
    if beta <= 0:
        raise ValueError("beta must be positive")
    rho = dist / s
    if N == 1:
        return math.log(beta) - rho
    return math.log(beta) + _log_k_integral(N, rho, q) - _log_k_integral(N, 1.0, q)


def _log_k_integral(N: int, rho: float, q: Quadrature) -> float:
    """log of ``int_0^inf exp(-rho cosh t) sinh^{N-2} t dt``."""
    # after factoring e^{-rho}, the integrand is below 1e-18 of its scale
    # once rho (cosh t - 1) exceeds log(1e18) plus the sinh growth
    p = N - 2
    cut = -math.log(1e-18)
    top = math.acosh(1 + cut / rho)
    for _ in range(50):
        grown = math.acosh(1 + (cut + p * top) / rho)
        if grown <= top + 1e-12:
            break
        top = grown

    def integrand(t):
        with np.errstate(divide="ignore"):
            lw = p * np.log(np.sinh(t)) if p else np.zeros_like(t)
        return np.exp(-rho * (np.cosh(t) - 1) + lw)

    scale = np.max(integrand(np.linspace(0, top, 257)))
    if integrand(np.array([top]))[0] > 1e-16 * max(scale, 1e-300):
        raise QuadratureTolExceeded(f"tail of the t-integral not negligible at T={top}")
    return -rho + math.log(q.integrate(integrand, 0.0, top))


def exterior_solution(N: int, a: float, beta: float, dist: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Decaying solution outside a ball of radius sqrt(a), equal to beta on it (N >= 2).

    For N = 1 the formula ``beta exp(-dist / sqrt a)`` is kept verbatim.
    """
    return math.exp(log_exterior_solution(N, a, beta, dist, q))
