"""Deterministic realizations ``A = (b_ij x_ij)`` of a variance profile.

Entry ``(i, j)`` draws from its own stream keyed by
``(master_seed, experiment_id, trial_index, i, j)``, so a sample does not depend
on fill order or on how trials are spread over workers.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numba as nb
import numpy as np

from .entrylaws import EntryLaw, nb_draw, parse_law
from .profiles import VarianceProfile
from .rng import SeedPath, nb_combine

__all__ = ["MatrixSample", "SeedPath", "sample", "matrix_from_key", "write_dump", "read_dump", "DUMP_MAGIC"]

DUMP_MAGIC = b"SRLB"
DUMP_VERSION = 1
FLAG_REAL_LAW = 1


@dataclass(frozen=True, eq=False)
class MatrixSample:
    a: np.ndarray
    seed_path: SeedPath

    @property
    def n(self) -> int:
        return self.a.shape[0]


@nb.njit(cache=True, nogil=True)
def _fill(b, code, param, trial_key, column_major):
    n = b.shape[0]
    a = np.zeros((n, n), dtype=np.complex128)
    state = np.empty(1, dtype=np.uint64)
    for outer in range(n):
        for inner in range(n):
            if column_major:
                i = inner
                j = outer
            else:
                i = outer
                j = inner
            bij = b[i, j]
            if bij == 0.0:
                continue
            state[0] = nb_combine(nb_combine(trial_key, np.uint64(i)), np.uint64(j))
            a[i, j] = bij * nb_draw(code, param, state)
    return a


def matrix_from_key(prof: VarianceProfile, law: EntryLaw, trial_key: int, *, column_major: bool = False) -> np.ndarray:
    law = parse_law(law)
    return _fill(prof.b, law.code, float(law.param), np.uint64(trial_key), column_major)


def sample(prof: VarianceProfile, law, seed_path: SeedPath, *, column_major: bool = False) -> MatrixSample:
    """One realization; ``a_ij`` is exactly zero wherever ``s_ij`` is."""
    a = matrix_from_key(prof, parse_law(law), seed_path.key(), column_major=column_major)
    return MatrixSample(a, seed_path)


def write_dump(path, a: np.ndarray, *, flags: int = 0) -> None:
    """Binary dump: 16-byte header then 2n^2 little-endian doubles (re, im interleaved, row-major)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    n = a.shape[0]
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC + struct.pack("<III", DUMP_VERSION, n, flags))
        fh.write(a.astype("<c16").tobytes())


def read_dump(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != DUMP_MAGIC:
            raise ValueError(f"{path}: not an SRLB matrix dump")
        version, n, flags = struct.unpack("<III", header[4:])
        if version != DUMP_VERSION:
            raise ValueError(f"{path}: unsupported dump version {version}")
        body = fh.read()
    if len(body) != 16 * n * n:
        raise ValueError(f"{path}: expected {16 * n * n} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<c16").reshape(n, n).astype(np.complex128), flags
