"""Variance profiles and their structural parameters.

A variance profile is the matrix ``S = (s_ij)`` of entry variances
``s_ij = b_ij**2`` of a random matrix ``A = (b_ij x_ij)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import eig

__all__ = [
    "VarianceProfile",
    "ProfileParams",
    "MAX_N",
    "make_homogeneous",
    "make_block_band",
    "make_periodic_band",
    "make_hetero_block",
    "make_product_linearization",
    "make_nilpotent_superdiag",
    "make_diag_block_ginibre",
    "make_perturbed_regular",
    "params",
    "ltc_sequence",
    "is_doubly_stochastic",
    "build_profile",
    "PROFILE_KINDS",
]

MAX_N = 4096


@dataclass(frozen=True, eq=False)
class VarianceProfile:
    s: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 1:
            raise ValueError(f"variance profile must be a nonempty square grid, got shape {s.shape}")
        if s.shape[0] > MAX_N:
            raise ValueError(f"n={s.shape[0]} exceeds the profile size cap {MAX_N}")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ValueError("variances must be finite and nonnegative")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @property
    def b(self) -> np.ndarray:
        """Entry standard deviations ``b_ij = sqrt(s_ij)``."""
        return np.sqrt(self.s)

    def __eq__(self, other):
        if not isinstance(other, VarianceProfile):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.s, other.s)

    def to_json(self) -> str:
        # json encodes floats with repr(), the shortest round-trip decimal form
        doc = {"label": self.label, "n": self.n, "format": "dense", "rows": self.s.tolist()}
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "VarianceProfile":
        doc = json.loads(text)
        if doc.get("format") != "dense":
            raise ValueError(f"unsupported profile format {doc.get('format')!r}")
        prof = cls(np.array(doc["rows"], dtype=np.float64), doc.get("label", "custom"))
        if prof.n != doc["n"]:
            raise ValueError(f"declared n={doc['n']} does not match {prof.n} rows")
        return prof


@dataclass(frozen=True)
class ProfileParams:
    sigma_star: float
    sigma: float
    rho_S: float
    ltc_sequence: list[tuple[int, float]]
    ltc_sigma_hat: float
    ltc_constant: float | None
    flatness: tuple[float, float] | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "sigma_star": self.sigma_star,
            "sigma": self.sigma,
            "rho_S": self.rho_S,
            "ltc_sequence": [[k, m] for k, m in self.ltc_sequence],
            "ltc_sigma_hat": self.ltc_sigma_hat,
            "ltc_constant": self.ltc_constant,
            "flatness": list(self.flatness) if self.flatness is not None else None,
        }


# constructors ----------------------------------------------------------------


def make_homogeneous(n: int) -> VarianceProfile:
    if n < 1:
        raise ValueError("n must be positive")
    return VarianceProfile(np.full((n, n), 1.0 / n), f"homogeneous(n={n})")


def make_block_band(m: int, b: int, v: float) -> VarianceProfile:
    """Cyclic block-tridiagonal pattern: blocks (I, I-1), (I, I), (I, I+1) mod m."""
    if m < 3:
        raise ValueError("block band needs m >= 3 blocks")
    if b < 1 or v <= 0:
        raise ValueError("block size must be positive and v > 0")
    blk = np.zeros((m, m))
    for i in range(m):
        for d in (-1, 0, 1):
            blk[i, (i + d) % m] = 1.0
    s = np.kron(blk, np.ones((b, b))) * v
    return VarianceProfile(s, f"block_band(m={m},b={b},v={v:g})")


def make_periodic_band(n: int, d: int, v: float) -> VarianceProfile:
    if d % 2 == 0 or d < 1:
        raise ValueError(f"bandwidth must be a positive odd integer, got {d}")
    if d > n:
        raise ValueError(f"bandwidth {d} exceeds n={n}")
    half = (d - 1) // 2
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    mask = (dist <= half) | (dist >= n - half)
    s = np.where(mask, float(v), 0.0)
    return VarianceProfile(s, f"periodic_band(n={n},d={d},v={v:g})")


def make_hetero_block(half_n: int, lambda1: float, lambda2: float) -> VarianceProfile:
    h = int(half_n)
    if h < 1:
        raise ValueError("half_n must be positive")
    s = np.zeros((2 * h, 2 * h))
    s[:h, h:] = lambda1**2 / h
    s[h:, :h] = lambda2**2 / h
    return VarianceProfile(s, f"hetero_block(half_n={h},l1={lambda1:g},l2={lambda2:g})")


def make_product_linearization(p: int, q: int) -> VarianceProfile:
    """Block-cyclic pattern: X_2..X_p on the block superdiagonal, X_1 bottom-left."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    blk = np.zeros((p, p))
    for k in range(p - 1):
        blk[k, k + 1] = 1.0
    blk[p - 1, 0] = 1.0
    s = np.kron(blk, np.full((q, q), 1.0 / q))
    return VarianceProfile(s, f"product(p={p},q={q})")


def product_blocks(a: np.ndarray, p: int, q: int) -> list[np.ndarray]:
    """Extract ``[X_1, ..., X_p]`` from a matrix with the product-linearization pattern."""
    xs = [a[(p - 1) * q :, :q]]
    for k in range(2, p + 1):
        xs.append(a[(k - 2) * q : (k - 1) * q, (k - 1) * q : k * q])
    return xs


def make_nilpotent_superdiag(n: int) -> VarianceProfile:
    if n < 2:
        raise ValueError("nilpotent profile needs n >= 2")
    return VarianceProfile(np.eye(n, k=1), f"nilpotent(n={n})")


def make_diag_block_ginibre(n: int, d: int) -> VarianceProfile:
    if d < 1 or n % d != 0:
        raise ValueError(f"block size {d} must divide n={n}")
    s = np.kron(np.eye(n // d), np.full((d, d), 1.0 / d))
    return VarianceProfile(s, f"diag_block(n={n},d={d})")


def make_perturbed_regular(n: int, c_exp: float, d_exp: float, D: float) -> VarianceProfile:
    """Circulant regular digraph profile plus a perturbation concentrated on row 1."""
    if not (0.0 < c_exp < 1.0) or not (0.0 < d_exp <= c_exp):
        raise ValueError("need 0 < d_exp <= c_exp < 1")
    if D < 0:
        raise ValueError("D must be nonnegative")
    r = int(math.floor(n**c_exp))
    if r < 1:
        raise ValueError(f"floor(n^c_exp) = {r} < 1")
    s = np.zeros((n, n))
    for i in range(n):
        for step in range(1, r + 1):
            s[i, (i + step) % n] += 1.0 / r
    k = int(math.floor(n**d_exp))
    if k > n - 1:
        raise ValueError(f"{k} perturbation entries cannot avoid the diagonal of row 1 (n={n})")
    if D > 0:
        s[0, 1 : k + 1] += D * n ** (-c_exp)
    return VarianceProfile(s, f"perturbed(n={n},c={c_exp:g},d={d_exp:g},D={D:g})")


# parameters ------------------------------------------------------------------


def ltc_sequence(prof: VarianceProfile, K: int) -> list[tuple[int, float]]:
    """``(k, m_k)`` for k = 1..K, with m_k the larger of the max row sums of S^k and (S^t)^k.

    Uses repeated matrix-vector products against the all-ones vector.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    s = prof.s
    r = np.ones(prof.n)
    c = np.ones(prof.n)
    out = []
    for k in range(1, K + 1):
        r = s @ r
        c = s.T @ c
        out.append((k, float(max(r.max(), c.max()))))
    return out


def params(prof: VarianceProfile, K: int = 8) -> ProfileParams:
    s = prof.s
    sigma_star = float(np.sqrt(s.max()))
    sigma = float(np.sqrt(max(s.sum(axis=1).max(), s.sum(axis=0).max())))
    rho_S = eig.spectral_radius(s)
    seq = ltc_sequence(prof, K)
    sigma_hat = min(m ** (1.0 / (2 * k)) for k, m in seq)
    if sigma_hat > 0:
        c_k = max(m / sigma_hat ** (2 * k) for k, m in seq)
    else:
        c_k = None
    n = prof.n
    return ProfileParams(
        sigma_star=sigma_star,
        sigma=sigma,
        rho_S=rho_S,
        ltc_sequence=seq,
        ltc_sigma_hat=float(sigma_hat),
        ltc_constant=c_k,
        flatness=(float(n * s.min()), float(n * s.max())),
    )


def is_doubly_stochastic(prof: VarianceProfile, tol: float = 1e-12) -> bool:
    s = prof.s
    return bool(s.sum(axis=1).max() <= 1.0 + tol and s.sum(axis=0).max() <= 1.0 + tol)


# spec-driven construction ---------------------------------------------------

PROFILE_KINDS = (
    "homogeneous",
    "block_band",
    "periodic_band",
    "hetero_block",
    "product",
    "nilpotent",
    "diag_block",
    "perturbed",
)


def _need_divisible(n: int, k: int, what: str) -> int:
    if k < 1 or n % k:
        raise ValueError(f"n={n} is not a multiple of {what}={k}")
    return n // k


def build_profile(spec: dict, n: int) -> VarianceProfile:
    """Construct a profile of dimension ``n`` from a ``{"kind": ..., ...}`` mapping.

    Kind-specific keys (defaults give unit row sums where possible):

    * ``block_band``: ``b`` (block size), ``v`` (default ``1/(3b)``)
    * ``periodic_band``: ``d`` (odd bandwidth), ``v`` (default ``1/d``)
    * ``hetero_block``: ``lambda1``, ``lambda2``
    * ``product``: ``p`` (number of blocks); ``q = n/p``
    * ``diag_block``: ``d`` (block size)
    * ``perturbed``: ``c_exp``, ``d_exp``, ``D``
    """
    kind = spec.get("kind", "homogeneous").replace("-", "_")
    if kind == "homogeneous":
        return make_homogeneous(n)
    if kind == "block_band":
        b = int(spec.get("b", 1))
        m = _need_divisible(n, b, "b")
        return make_block_band(m, b, float(spec.get("v", 1.0 / (3 * b))))
    if kind == "periodic_band":
        d = int(spec.get("d", 3))
        return make_periodic_band(n, d, float(spec.get("v", 1.0 / d)))
    if kind == "hetero_block":
        if n % 2:
            raise ValueError("hetero_block needs even n")
        return make_hetero_block(n // 2, float(spec.get("lambda1", 1.0)), float(spec.get("lambda2", 1.0)))
    if kind == "product":
        p = int(spec.get("p", 1))
        q = _need_divisible(n, p, "p")
        return make_product_linearization(p, q)
    if kind == "nilpotent":
        return make_nilpotent_superdiag(n)
    if kind == "diag_block":
        return make_diag_block_ginibre(n, int(spec.get("d", n)))
    if kind == "perturbed":
        return make_perturbed_regular(
            n, float(spec.get("c_exp", 0.5)), float(spec.get("d_exp", 0.5)), float(spec.get("D", 1.0))
        )
    raise ValueError(f"unknown profile kind {kind!r}; expected one of {', '.join(PROFILE_KINDS)}")
