"""Scalar reduction of the matrix Dyson equation for doubly stochastic profiles.

For the Hermitization of ``A - z`` with a doubly stochastic Gaussian profile the
resolvent of the free model is ``[[a, b], [conj(b), a]]`` (blockwise constant),
where ``b = -a z / (a + v)`` and ``a`` solves the cubic

    a^3 + 2 v a^2 + (1 + v^2 - |z|^2) a + v = 0.

The predictions are exact only for doubly stochastic profiles with
``E[a_ii^2] = 0``; nothing here checks that about a user profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import eig

__all__ = [
    "MDESolution",
    "Degenerate",
    "BranchAmbiguity",
    "cubic_residual",
    "solve_cubic",
    "herglotz_root",
    "support_indicator",
    "sufficient_condition",
    "sigma_min_lower",
    "hermitization",
    "hermitization_gap",
    "scan",
    "V_WINDOW",
]

V_WINDOW = 1.0 / 3.0
IMAG_TOL = 1e-9


class Degenerate(ValueError):
    pass


class BranchAmbiguity(RuntimeError):
    pass


@dataclass(frozen=True)
class MDESolution:
    z: complex
    v: complex
    a: complex
    b: complex
    residual: float
    branch: str


def _coeffs(tau: float, v: complex):
    return 2.0 * v, 1.0 + v * v - tau, v


def cubic_residual(a: complex, z: complex, v: complex, *, scaled: bool = False) -> float:
    """|p(a)|, or with ``scaled`` divided by the sum of the term magnitudes."""
    c2, c1, c0 = _coeffs(abs(z) ** 2, v)
    r = abs(((a + c2) * a + c1) * a + c0)
    if scaled:
        m = abs(a)
        den = m**3 + abs(c2) * m * m + abs(c1) * m + abs(c0)
        return r / den if den > 0 else r
    return r


def _polish(a: complex, c2, c1, c0) -> complex:
    best = a
    best_r = abs(((a + c2) * a + c1) * a + c0)
    for _ in range(4):
        f = ((a + c2) * a + c1) * a + c0
        df = (3.0 * a + 2.0 * c2) * a + c1
        if df == 0:
            break
        a = a - f / df
        r = abs(((a + c2) * a + c1) * a + c0)
        if r < best_r:
            best, best_r = a, r
        else:
            break
    return best


def _branch(a: complex, v: complex) -> str:
    if abs(a.imag) <= IMAG_TOL:
        return "real"
    if v.imag > 0:
        return "herglotz" if a.imag > 0 else "lower"
    return "upper" if a.imag > 0 else "lower"


def _make(z: complex, v: complex, a: complex) -> MDESolution:
    if a + v == 0:
        # removable root a = -v (z = 0: the cubic factors as (a + v)(a^2 + v a + 1))
        b = 0j if z == 0 else complex(math.nan, math.nan)
        branch = "removable"
    else:
        b = -a * z / (a + v)
        branch = _branch(a, v)
    return MDESolution(z, v, a, b, cubic_residual(a, z, v), branch)


def solve_cubic(z: complex, v: complex) -> list[MDESolution]:
    """All three roots, from the eigenvalues of the companion matrix."""
    z = complex(z)
    v = complex(v)
    if z == 0 and v == 0:
        raise Degenerate("z = 0 and v = 0 simultaneously")
    c2, c1, c0 = _coeffs(abs(z) ** 2, v)
    comp = np.array([[-c2, -c1, -c0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], dtype=np.complex128)
    roots = eig.eigenvalues(comp, engine="native")
    return [_make(z, v, _polish(complex(r), c2, c1, c0)) for r in roots]


def herglotz_root(z: complex, v: complex, *, steps: int = 48, tol: float = 1e-10) -> MDESolution:
    """The root with ``Im a > 0`` for ``Im v > 0``.

    The branch is tracked by continuity from ``v + i`` down to ``v``.
    """
    z = complex(z)
    v = complex(v)
    if not v.imag > 0:
        raise ValueError("herglotz_root needs Im v > 0")
    path = v.real + 1j * (v.imag + np.linspace(1.0, 0.0, steps + 1) ** 2)
    start = solve_cubic(z, path[0])
    current = max(start, key=lambda s: s.a.imag).a
    for w in path[1:]:
        sols = solve_cubic(z, complex(w))
        current = min(sols, key=lambda s: abs(s.a - current)).a
    sols = solve_cubic(z, v)
    upper = [s for s in sols if s.a.imag > tol]
    if len(upper) > 1:
        raise BranchAmbiguity(f"{len(upper)} roots with Im a > {tol:g} at z={z}, v={v}")
    tracked = min(sols, key=lambda s: abs(s.a - current))
    if upper and tracked is not upper[0]:
        tracked = upper[0]
    if tracked.branch not in ("herglotz", "real"):
        raise BranchAmbiguity(f"tracked root left the upper half plane at z={z}, v={v}")
    return MDESolution(z, v, tracked.a, tracked.b, tracked.residual, "herglotz")


def support_indicator(z: complex, v: float, *, imag_tol: float = IMAG_TOL, sep_tol: float = 1e-7) -> bool:
    """True when the cubic at real ``v`` has three distinct real roots.

    That places ``v`` outside the spectrum of the free Hermitization. Only the
    window ``|v| < 1/3`` is analyzed; outside it a ValueError is raised.
    """
    v = float(np.real(v))
    if not abs(v) < V_WINDOW:
        raise ValueError(f"|v| = {abs(v):g} is outside the analyzed window |v| < 1/3")
    roots = [s.a for s in solve_cubic(z, v)]
    if any(abs(r.imag) > imag_tol for r in roots):
        return False
    re = sorted(r.real for r in roots)
    scale = 1.0 + max(abs(x) for x in re)
    return (re[1] - re[0]) > sep_tol * scale and (re[2] - re[1]) > sep_tol * scale


def sufficient_condition(z: complex, v: float) -> bool:
    """``|z|^2 - 1 - v^2 > 9 |v|^(2/3)``, which forces three real roots."""
    return abs(z) ** 2 - 1.0 - v * v > 9.0 * abs(v) ** (2.0 / 3.0)


def sigma_min_lower(z: complex) -> float:
    """Lower bound ``min(1/3, ((|z|^2 - 1)/10)^(3/2))`` on sigma_min of the free Hermitization."""
    tau = abs(z) ** 2
    if not tau > 1.0:
        raise ValueError("sigma_min_lower needs |z| > 1")
    return min(1.0 / 3.0, ((tau - 1.0) / 10.0) ** 1.5)


def hermitization(a: np.ndarray, z: complex) -> np.ndarray:
    """The 2n x 2n self-adjoint matrix ``[[0, A - z], [(A - z)*, 0]]``."""
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    m = a - complex(z) * np.eye(n)
    y = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    y[:n, n:] = m
    y[n:, :n] = m.conj().T
    return y


def hermitization_gap(a: np.ndarray, z: complex, v: float) -> float:
    """sigma_min(Y_z - v): distance from real ``v`` to the spectrum ``{±sigma_i(A - z)}``."""
    a = np.asarray(a, dtype=np.complex128)
    sv = np.linalg.svd(a - complex(z) * np.eye(a.shape[0]), compute_uv=False)
    return float(min(np.min(np.abs(sv - v)), np.min(np.abs(sv + v))))


def scan(z_moduli, vs) -> list[dict]:
    """Rows ``(|z|, v, root re/im x3, indicator)`` over a grid; indicator is None outside the window."""
    rows = []
    for r in z_moduli:
        for v in vs:
            sols = solve_cubic(float(r), float(v))
            row = {"abs_z": float(r), "v": float(v)}
            for k, s in enumerate(sols, 1):
                row[f"root{k}_re"] = s.a.real
                row[f"root{k}_im"] = s.a.imag
            row["indicator"] = support_indicator(float(r), float(v)) if abs(v) < V_WINDOW else None
            rows.append(row)
    return rows
