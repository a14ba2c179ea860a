"""Closed-form bound curves and exact laws for overlay against Monte Carlo data.

Constants that the theorems leave non-explicit (``C0``, ``C``, ``C1``) are plain
parameters defaulting to 1. Probability-type bounds are returned raw and may
exceed 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

__all__ = [
    "GammaNonpositive",
    "BoundCurve",
    "expectation_bound_thm11",
    "thm11_correction",
    "tail_thm14",
    "tail_thm15",
    "tail_thm16",
    "tail_thm18",
    "gumbel_recentring",
    "gumbel_cdf",
    "GUMBEL_MEDIAN",
    "gammainc_lower",
    "log_gammainc_lower",
    "ginibre_radius_cdf",
    "log_ginibre_radius_cdf",
    "block_ginibre_radius_cdf",
    "cramer_rate",
    "norm_bound_eq15",
    "curve",
    "CURVE_NAMES",
]

GUMBEL_MEDIAN = -math.log(math.log(2.0))


class GammaNonpositive(ValueError):
    pass


def _positive_t(t: float) -> float:
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return float(t)


# convergence and tail bounds ------------------------------------------------


def thm11_correction(sigma: float, sigma_star: float, n: float, eps: float, C: float = 1.0) -> float:
    """The multiplicative correction ``1 + C * sqrt(L) / sqrt((sigma/sigma_star)^2 + L)``."""
    L = 6.0 * math.log(n) / math.log1p(eps)
    return 1.0 + C * math.sqrt(L) / math.sqrt((sigma / sigma_star) ** 2 + L)


def expectation_bound_thm11(sigma: float, sigma_star: float, n: float, eps: float, C: float = 1.0) -> float:
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    if sigma_star <= 0:
        raise ValueError("sigma_star must be positive")
    if sigma / sigma_star > n:
        raise ValueError("requires sigma / sigma_star <= n")
    lead = (1.0 + eps) * (sigma + 6.0 * sigma_star / math.sqrt(math.log1p(eps)) * math.sqrt(math.log(n)))
    return lead * thm11_correction(sigma, sigma_star, n, eps, C)


def tail_thm14(t: float, n: float, C0: float = 1.0, C: float = 1.0) -> float:
    """Bound on P(rho >= sigma_hat (1 + t sigma_star))."""
    return C0 * n * math.exp(-C * _positive_t(t))


def tail_thm15(t: float, n: float, C0: float = 1.0, C1: float = 1.0) -> float:
    """Bound on P(rho >= sqrt(rho(S)) + t / sqrt(n)) for flat profiles."""
    return C0 * n * n * math.exp(-C1 * _positive_t(t))


def tail_thm16(t: float, sigma_star: float, C0: float = 1.0) -> float:
    """Large-deviation bound on P(rho >= 1 + t), Gaussian doubly stochastic case."""
    t = _positive_t(t)
    return (1.0 + t**-3) * math.exp(-C0 * min(t * t, t**3) / sigma_star**2)


def tail_thm18(t: float, q: float) -> float:
    """P(rho(L) >= 1 + t/p) <= q exp(-2t) for the product linearization; constant free."""
    return q * math.exp(-2.0 * _positive_t(t))


def norm_bound_eq15(sigma: float, sigma_star: float, n: float, eps: float) -> float:
    """Operator-norm comparison bound, with ``sigma`` standing in for both row and column terms."""
    if not (0.0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 1/2)")
    return (1.0 + eps) * 2.0 * sigma + 5.0 * (1.0 + eps) / math.sqrt(math.log1p(eps)) * sigma_star * math.sqrt(
        math.log(n)
    )


# edge fluctuations ----------------------------------------------------------


def gumbel_recentring(n: float) -> tuple[float, float, float]:
    """``(gamma_n, location, scale)`` with ``G = (rho - location) / scale``."""
    gamma_n = math.log(n) - 2.0 * math.log(math.log(n)) - math.log(2.0 * math.pi)
    if not gamma_n > 0:
        raise GammaNonpositive(f"gamma_n = {gamma_n:.6f} <= 0 at n={n}; the recentring needs n >= ~160")
    return gamma_n, 1.0 + math.sqrt(gamma_n / (4.0 * n)), 1.0 / math.sqrt(4.0 * n * gamma_n)


def gumbel_cdf(x: float) -> float:
    return math.exp(-math.exp(-x))


# regularized incomplete gamma -------------------------------------------------

_ITMAX = 10_000
_TINY = 1e-300


def _series_log_p(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k))
    term = 1.0
    total = 1.0
    ap = a
    for _ in range(_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * 1e-17:
            break
    return a * math.log(x) - x - math.lgamma(a + 1.0) + math.log(total)


def _cf_q(a: float, x: float) -> float:
    # modified Lentz continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(a * math.log(x) - x - math.lgamma(a)) * h


def log_gammainc_lower(a: float, x: float) -> float:
    """log of the regularized lower incomplete gamma function P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return -math.inf
    if x < a + 1.0:
        return _series_log_p(a, x)
    return math.log1p(-_cf_q(a, x))


def gammainc_lower(a: float, x: float) -> float:
    return math.exp(log_gammainc_lower(a, x))


def log_ginibre_radius_cdf(n: int, a: float) -> float:
    """log P(rho(G_n) <= a) = sum_{m=1}^{n} log P(Gamma(m, 1) <= n a^2)."""
    if n < 1:
        raise ValueError("n must be positive")
    if not a > 0:
        raise ValueError("a must be positive")
    x = n * a * a
    return math.fsum(log_gammainc_lower(float(m), x) for m in range(1, n + 1))


def ginibre_radius_cdf(n: int, a: float) -> float:
    """Exact CDF of the spectral radius of the n x n complex Ginibre matrix."""
    if math.isinf(a):
        return 1.0
    return math.exp(log_ginibre_radius_cdf(n, a))


def block_ginibre_radius_cdf(d: int, blocks: int, a: float) -> float:
    """CDF of rho for ``blocks`` independent d x d Ginibre blocks on the diagonal."""
    return math.exp(blocks * log_ginibre_radius_cdf(d, a))


def cramer_rate(x: float) -> float:
    """Cramér rate ``x - 1 - log x`` of a rate-one exponential mean."""
    if not x > 0:
        raise ValueError("x must be positive")
    return x - 1.0 - math.log(x)


# named curves ----------------------------------------------------------------


@dataclass(frozen=True)
class BoundCurve:
    name: str
    params: dict
    fn: Callable[[float], float] = field(repr=False, compare=False)

    def evaluate(self, t: float) -> float:
        return self.fn(t)

    def tabulate(self, ts) -> list[tuple[float, float]]:
        return [(float(t), self.fn(float(t))) for t in ts]


CURVE_NAMES = ("thm11", "thm14", "thm15", "thm16", "thm18", "eq15", "ginibre_cdf", "cramer")


def curve(name: str, **p) -> BoundCurve:
    """Build a named curve; the free variable ``t`` is documented per name.

    thm11/eq15: t is n. ginibre_cdf: t is the radius a. cramer: t is x.
    thm14/15/16/18: t is the deviation parameter.
    """
    g = p.get
    if name == "thm11":
        fn = lambda t: expectation_bound_thm11(g("sigma", 1.0), g("sigma_star"), t, g("eps", 0.1), g("C", 1.0))
    elif name == "thm14":
        fn = lambda t: tail_thm14(t, g("n"), g("C0", 1.0), g("C", 1.0))
    elif name == "thm15":
        fn = lambda t: tail_thm15(t, g("n"), g("C0", 1.0), g("C1", 1.0))
    elif name == "thm16":
        fn = lambda t: tail_thm16(t, g("sigma_star"), g("C0", 1.0))
    elif name == "thm18":
        fn = lambda t: tail_thm18(t, g("q"))
    elif name == "eq15":
        fn = lambda t: norm_bound_eq15(g("sigma", 1.0), g("sigma_star"), t, g("eps", 0.1))
    elif name == "ginibre_cdf":
        fn = lambda t: ginibre_radius_cdf(int(g("n")), t)
    elif name == "cramer":
        fn = cramer_rate
    else:
        raise ValueError(f"unknown curve {name!r}; expected one of {', '.join(CURVE_NAMES)}")
    return BoundCurve(name, dict(p), fn)
