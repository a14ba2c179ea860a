"""Standardized entry distributions and their exact mixed moments.

Every law has mean zero and unit second absolute moment. Spec strings:
``real-gaussian``, ``complex-gaussian``, ``rademacher``, ``laplace``,
``pareto:<alpha>`` (2 < alpha < 4) and ``bernoulli:<p>`` (0 < p < 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .rng import nb_next, nb_uniform

__all__ = ["EntryLaw", "parse_law", "mixed_moment", "abs_moment", "draw", "draw_many", "Stream", "ALL_LAW_SPECS"]

KINDS = ("real-gaussian", "complex-gaussian", "rademacher", "laplace", "pareto", "bernoulli")
_CODES = {k: i for i, k in enumerate(KINDS)}

# one representative per kind, used by tests and acceptance sweeps
ALL_LAW_SPECS = ("real-gaussian", "complex-gaussian", "rademacher", "laplace", "pareto:2.5", "bernoulli:0.05")

_TWO_PI = 2.0 * math.pi
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class EntryLaw:
    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in _CODES:
            raise ValueError(f"unknown entry law {self.kind!r}")
        if self.kind == "pareto" and not (2.0 < self.param < 4.0):
            raise ValueError(f"pareto alpha must lie in (2, 4), got {self.param}")
        if self.kind == "bernoulli" and not (0.0 < self.param < 1.0):
            raise ValueError(f"bernoulli p must lie in (0, 1), got {self.param}")

    @property
    def code(self) -> int:
        return _CODES[self.kind]

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex-gaussian"

    @property
    def is_symmetric(self) -> bool:
        if self.kind == "bernoulli":
            return self.param == 0.5
        return True

    @property
    def tail_class(self) -> str:
        if self.kind == "laplace":
            return "subexponential"
        if self.kind == "pareto":
            return "heavy"
        return "subgaussian"

    @property
    def pareto_scale(self) -> float:
        """Lower cutoff x_m giving unit variance for the symmetric Pareto law."""
        return math.sqrt((self.param - 2.0) / self.param)

    @property
    def spec(self) -> str:
        if self.kind in ("pareto", "bernoulli"):
            return f"{self.kind}:{self.param:g}"
        return self.kind

    def __str__(self) -> str:
        return self.spec


def parse_law(spec) -> EntryLaw:
    if isinstance(spec, EntryLaw):
        return spec
    text = str(spec).strip().lower()
    name, _, arg = text.partition(":")
    if name in ("pareto", "bernoulli"):
        if not arg:
            raise ValueError(f"law {name!r} needs a parameter, e.g. '{name}:0.5'")
        return EntryLaw(name, float(arg))
    if arg:
        raise ValueError(f"law {name!r} takes no parameter")
    return EntryLaw(name)


def _real_moment(law: EntryLaw, k: int) -> float:
    """E[x^k] for a real-valued law."""
    if k == 0:
        return 1.0
    if law.kind == "pareto" and k >= law.param:
        return math.inf
    if law.kind == "bernoulli":
        p = law.param
        s = math.sqrt(p * (1.0 - p))
        return p * ((1.0 - p) / s) ** k + (1.0 - p) * (-p / s) ** k
    if k % 2 == 1:
        return 0.0
    if law.kind == "real-gaussian":
        return float(math.prod(range(k - 1, 0, -2)))
    if law.kind == "rademacher":
        return 1.0
    if law.kind == "laplace":
        return math.factorial(k) * 2.0 ** (-k / 2)
    if law.kind == "pareto":
        a = law.param
        return a * law.pareto_scale**k / (a - k)
    raise AssertionError(law.kind)


def mixed_moment(law, a: int, b: int) -> float:
    """Exact E[x^a conj(x)^b]; ``math.inf`` when the moment diverges."""
    law = parse_law(law)
    if a < 0 or b < 0:
        raise ValueError("moment orders must be nonnegative")
    if law.kind == "complex-gaussian":
        return float(math.factorial(a)) if a == b else 0.0
    return _real_moment(law, a + b)


def abs_moment(law, m: float) -> float:
    """E|x|^m for real m >= 0."""
    law = parse_law(law)
    if m == 0:
        return 1.0
    if law.kind == "complex-gaussian":
        return math.gamma(1.0 + m / 2.0)
    if law.kind == "real-gaussian":
        return 2.0 ** (m / 2.0) * math.gamma((m + 1.0) / 2.0) / math.sqrt(math.pi)
    if law.kind == "rademacher":
        return 1.0
    if law.kind == "laplace":
        return math.gamma(m + 1.0) * 2.0 ** (-m / 2.0)
    if law.kind == "pareto":
        if m >= law.param:
            return math.inf
        return law.param * law.pareto_scale**m / (law.param - m)
    p = law.param
    s = math.sqrt(p * (1.0 - p))
    return p * ((1.0 - p) / s) ** m + (1.0 - p) * (p / s) ** m


# sampling ----------------------------------------------------------------


@nb.njit(cache=True, nogil=True)
def nb_draw(code, param, state):
    """One variate of law ``code``; consumes the stream in ``state``."""
    if code == 0:
        u1 = nb_uniform(state)
        u2 = nb_uniform(state)
        return complex(np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2), 0.0)
    if code == 1:
        u1 = nb_uniform(state)
        u2 = nb_uniform(state)
        r = np.sqrt(-2.0 * np.log(u1)) * _INV_SQRT2
        th = _TWO_PI * u2
        return complex(r * np.cos(th), r * np.sin(th))
    if code == 2:
        return complex(1.0 if (nb_next(state) >> np.uint64(63)) == 0 else -1.0, 0.0)
    if code == 3:
        sgn = 1.0 if (nb_next(state) >> np.uint64(63)) == 0 else -1.0
        return complex(-sgn * np.log(nb_uniform(state)) * _INV_SQRT2, 0.0)
    if code == 4:
        sgn = 1.0 if (nb_next(state) >> np.uint64(63)) == 0 else -1.0
        xm = np.sqrt((param - 2.0) / param)
        return complex(sgn * xm * nb_uniform(state) ** (-1.0 / param), 0.0)
    # centered, standardized Bernoulli
    s = np.sqrt(param * (1.0 - param))
    if nb_uniform(state) <= param:
        return complex((1.0 - param) / s, 0.0)
    return complex(-param / s, 0.0)


@nb.njit(cache=True, nogil=True)
def _draw_many(code, param, state, count):
    out = np.empty(count, dtype=np.complex128)
    for k in range(count):
        out[k] = nb_draw(code, param, state)
    return out


class Stream:
    """Caller-owned RNG state: one 64-bit SplitMix64 counter."""

    __slots__ = ("state",)

    def __init__(self, key: int):
        self.state = np.array([key & ((1 << 64) - 1)], dtype=np.uint64)

    @property
    def key(self) -> int:
        return int(self.state[0])


def draw(law, rng_state: Stream) -> complex:
    """One variate; real laws return a zero imaginary part."""
    law = parse_law(law)
    return complex(nb_draw(law.code, float(law.param), rng_state.state))


def draw_many(law, rng_state: Stream, count: int) -> np.ndarray:
    """``count`` consecutive variates from the same stream as repeated :func:`draw`."""
    law = parse_law(law)
    return _draw_many(law.code, float(law.param), rng_state.state, int(count))
