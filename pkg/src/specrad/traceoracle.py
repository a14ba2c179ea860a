"""Exact and Monte Carlo evaluation of E Tr(A^p (A*)^p) = E ||A^p||_F^2.

The exact mode enumerates every index cycle ``(i_0, ..., i_{2p-1})``. The first
``p`` factors are entries ``a[i_t, i_{t+1}]`` and the last ``p`` are conjugated
entries ``conj(a[i_{t+1}, i_t])`` (indices mod 2p). Factors sharing an entry
position are grouped, and each group contributes ``b_ij^(#) * E[x^u conj(x)^c]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .entrylaws import mixed_moment, parse_law
from .profiles import VarianceProfile
from .rng import SeedPath
from .sampler import matrix_from_key

__all__ = [
    "MomentEstimate",
    "SizeGuard",
    "InfiniteMoment",
    "trace_moment_exact",
    "trace_moment_mc",
    "frobenius_power",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 10**7


class SizeGuard(ValueError):
    pass


class InfiniteMoment(ArithmeticError):
    pass


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    std_error: float
    mode: str
    p: int
    trials: int

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "mode": self.mode, "p": self.p, "trials": self.trials}


@nb.njit(cache=True, nogil=True)
def _enumerate(b, table, p):
    n = b.shape[0]
    L = 2 * p
    idx = np.zeros(L, dtype=np.int64)
    rows = np.empty(L, dtype=np.int64)
    cols = np.empty(L, dtype=np.int64)
    conj = np.empty(L, dtype=np.bool_)
    used = np.zeros(L, dtype=np.bool_)
    total = 0.0
    n_tuples = n**L
    for _ in range(n_tuples):
        # factor positions for this cycle
        weight = 1.0
        for t in range(L):
            nxt = idx[(t + 1) % L]
            if t < p:
                rows[t] = idx[t]
                cols[t] = nxt
                conj[t] = False
            else:
                rows[t] = nxt
                cols[t] = idx[t]
                conj[t] = True
            weight *= b[rows[t], cols[t]]
            if weight == 0.0:
                break
        if weight != 0.0:
            for t in range(L):
                used[t] = False
            for t in range(L):
                if used[t]:
                    continue
                u = 0
                c = 0
                for r in range(t, L):
                    if not used[r] and rows[r] == rows[t] and cols[r] == cols[t]:
                        used[r] = True
                        if conj[r]:
                            c += 1
                        else:
                            u += 1
                weight *= table[u, c]
                if weight == 0.0:
                    break
            total += weight
        # odometer increment
        k = L - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < n:
                break
            idx[k] = 0
            k -= 1
    return total


def trace_moment_exact(prof: VarianceProfile, law, p: int, *, strict: bool = False) -> MomentEstimate:
    """Exact expectation by brute-force enumeration of ``n^(2p)`` index cycles.

    A required moment that diverges gives ``value = inf``, or raises
    :class:`InfiniteMoment` when ``strict``.
    """
    law = parse_law(law)
    if p < 1:
        raise ValueError("p must be a positive integer")
    n = prof.n
    if n ** (2 * p) > ENUMERATION_CAP:
        raise SizeGuard(f"n^(2p) = {n}^{2 * p} exceeds the enumeration cap {ENUMERATION_CAP}")
    L = 2 * p
    table = np.empty((L + 1, L + 1))
    for u in range(L + 1):
        for c in range(L + 1):
            table[u, c] = mixed_moment(law, u, c)
    value = float(_enumerate(prof.b, table, p))
    if math.isnan(value) or math.isinf(value):
        if strict:
            raise InfiniteMoment(f"{law.spec} lacks a moment needed at p={p}")
        value = math.inf
    return MomentEstimate(value, 0.0, "exact", p, 0)


def frobenius_power(a: np.ndarray, p: int) -> float:
    """``||A^p||_F^2``, equal to Tr(A^p (A*)^p)."""
    m = a
    for _ in range(p - 1):
        m = m @ a
    return float(np.vdot(m, m).real)


def trace_moment_mc(
    prof: VarianceProfile,
    law,
    p: int,
    trials: int,
    seed_path: SeedPath,
) -> MomentEstimate:
    """Mean and standard error of ``||A^p||_F^2`` over seeded trials.

    Trial ``k`` uses ``SeedPath(master_seed, experiment_id, trial_index + k)``.
    """
    law = parse_law(law)
    if trials < 2:
        raise ValueError("need at least 2 trials")
    vals = np.empty(trials)
    for k in range(trials):
        sp = SeedPath(seed_path.master_seed, seed_path.experiment_id, seed_path.trial_index + k)
        vals[k] = frobenius_power(matrix_from_key(prof, law, sp.key()), p)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials))
    return MomentEstimate(mean, se, "monte_carlo", p, trials)
