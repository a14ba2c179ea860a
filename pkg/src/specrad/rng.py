"""Counter-based splittable random streams.

Keys are 64-bit integers derived by hashing a seed path
``(master_seed, experiment_id, trial_index, i, j)`` through the SplitMix64
finalizer. Each key seeds a SplitMix64 stream (state advances by the golden
gamma, output is the finalizer of the state), so every matrix entry has its own
stream and a matrix is identical whatever order or worker fills it.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numba as nb
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_U1 = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def combine(key: int, x: int) -> int:
    """Derive a child key from ``key`` and a nonnegative integer label."""
    return mix64((key ^ mix64((x + 1) * GOLDEN)) + GOLDEN)


def hash_label(label: str) -> int:
    """Stable 64-bit hash of a text label (independent of PYTHONHASHSEED)."""
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class SeedPath:
    master_seed: int
    experiment_id: str
    trial_index: int

    def key(self) -> int:
        k = combine(mix64(self.master_seed & MASK64), hash_label(self.experiment_id))
        return combine(k, self.trial_index)

    def split(self) -> tuple[int, int]:
        k = self.key()
        return k >> 32, k & 0xFFFFFFFF


def entry_key(trial_key: int, i: int, j: int) -> int:
    return combine(combine(trial_key, i), j)


class SplitMix64:
    """Small-state generator; the reference (pure Python) stream.

    The numba kernels in :mod:`specrad.sampler` reproduce this stream exactly.
    """

    __slots__ = ("state",)

    def __init__(self, key: int):
        self.state = key & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        """Uniform on (0, 1]; never 0 so logarithms are safe."""
        return ((self.next_u64() >> 11) + 1) * _INV53


# numba twins -----------------------------------------------------------------


@nb.njit(cache=True, inline="always")
def nb_mix64(z):
    z = (z ^ (z >> _U30)) * _U_M1
    z = (z ^ (z >> _U27)) * _U_M2
    return z ^ (z >> _U31)


@nb.njit(cache=True, inline="always")
def nb_combine(key, x):
    return nb_mix64((key ^ nb_mix64((x + _U1) * _U_GOLDEN)) + _U_GOLDEN)


@nb.njit(cache=True, inline="always")
def nb_next(state):
    """Advance ``state`` (a length-1 uint64 array) and return one 64-bit output."""
    state[0] = state[0] + _U_GOLDEN
    return nb_mix64(state[0])


@nb.njit(cache=True, inline="always")
def nb_uniform(state):
    return (np.float64(nb_next(state) >> _U11) + 1.0) * _INV53
