"""Dense non-symmetric eigenvalues, norms and extreme singular values.

The native engine is a complex single-shift QR algorithm:

1. diagonal balancing (radix-2 Parlett-Reinsch scaling, no permutations),
2. Householder reduction to upper Hessenberg form,
3. implicit single-shift QR sweeps with Wilkinson shifts and deflation on
   ``|h[k, k-1]| <= eps * (|h[k-1, k-1]| + |h[k, k]|)``.

Every input is promoted to ``complex128`` so there is one code path and no
real-Schur 2x2 bookkeeping. Large matrices are routed to LAPACK (``zgeev``
through :func:`numpy.linalg.eigvals`) by the ``"auto"`` engine; the native
kernel is always available with ``engine="native"``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

__all__ = [
    "NonConvergence",
    "SizeCapExceeded",
    "SpectralReport",
    "eigenvalues",
    "spectral_report",
    "spectral_radius",
    "operator_norm",
    "smallest_singular",
    "NATIVE_MAX_N",
    "SVD_MAX_N",
]

NATIVE_MAX_N = 256
SVD_MAX_N = 512

_EPS = np.finfo(np.float64).eps
_SAFMIN = np.finfo(np.float64).tiny


class NonConvergence(RuntimeError):
    """QR iteration budget exhausted; ``report`` holds the partial spectrum."""

    def __init__(self, report: "SpectralReport"):
        super().__init__(
            f"QR iteration did not converge after {report.iterations} sweeps (n={len(report.eigenvalues)})"
        )
        self.report = report


class SizeCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    rho: float
    op_norm: float
    iterations: int
    converged: bool
    engine: str = "native"
    sigma_min: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": int(len(self.eigenvalues)),
            "rho": self.rho,
            "op_norm": self.op_norm,
            "sigma_min": self.sigma_min,
            "iterations": self.iterations,
            "converged": self.converged,
            "engine": self.engine,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
        }


# --------------------------------------------------------------------------
# numba kernels


@nb.njit(cache=True, nogil=True)
def _balance(h):
    n = h.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    for _sweep in range(100):
        done = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += abs(h[j, i])
                    r += abs(h[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g and f < 1e150:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g and f > 1e-150:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                g = 1.0 / f
                for j in range(n):
                    h[i, j] *= g
                for j in range(n):
                    h[j, i] *= f
        if done:
            break


@nb.njit(cache=True, nogil=True)
def _hessenberg(h):
    n = h.shape[0]
    v = np.empty(n, dtype=np.complex128)
    w = np.empty(n, dtype=np.complex128)
    for k in range(n - 2):
        m = n - k - 1
        # work with the column scaled to unit max so squares cannot underflow
        scale = 0.0
        for i in range(k + 1, n):
            scale = max(scale, abs(h[i, k]))
        if scale == 0.0:
            continue
        tail = 0.0
        for i in range(k + 2, n):
            e = h[i, k] / scale
            tail += e.real * e.real + e.imag * e.imag
        if tail == 0.0:
            continue
        x0 = h[k + 1, k] / scale
        ax0 = abs(x0)
        xnorm = np.sqrt(ax0 * ax0 + tail)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -phase * xnorm
        v[0] = x0 - alpha
        for i in range(1, m):
            v[i] = h[k + 1 + i, k] / scale
        vnorm2 = abs(v[0]) ** 2 + tail
        alpha *= scale
        beta = 2.0 / vnorm2
        # left: rows k+1.., columns k+1.. (column k is set explicitly)
        for j in range(k + 1, n):
            w[j] = 0.0
        for i in range(m):
            cv = np.conj(v[i])
            row = k + 1 + i
            for j in range(k + 1, n):
                w[j] += cv * h[row, j]
        for i in range(m):
            bv = beta * v[i]
            row = k + 1 + i
            for j in range(k + 1, n):
                h[row, j] -= bv * w[j]
        h[k + 1, k] = alpha
        for i in range(k + 2, n):
            h[i, k] = 0.0
        # right: all rows, columns k+1..
        for i in range(n):
            s = 0.0 + 0.0j
            for l in range(m):
                s += h[i, k + 1 + l] * v[l]
            s *= beta
            for l in range(m):
                h[i, k + 1 + l] -= s * np.conj(v[l])


@nb.njit(cache=True, nogil=True)
def _wilkinson(a, b, c, d):
    # scale so products of tiny (graded) entries do not underflow
    s = max(abs(a), abs(b), abs(c), abs(d))
    if s == 0.0:
        return d
    return s * _wilkinson_unit(a / s, b / s, c / s, d / s)


@nb.njit(cache=True, nogil=True)
def _wilkinson_unit(a, b, c, d):
    p = 0.5 * (a - d)
    bc = b * c
    disc = np.sqrt(p * p + bc)
    if (p.real * disc.real + p.imag * disc.imag) < 0.0:
        disc = -disc
    den = p + disc
    if den == 0.0:
        return d
    return d - bc / den


@nb.njit(cache=True, nogil=True)
def _hqr(h, eps, safmin, budget):
    """Eigenvalues of upper Hessenberg ``h`` (destroyed). Returns (w, sweeps, ok)."""
    n = h.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    smlnum = safmin * (n / eps)
    ihi = n - 1
    its = 0
    total = 0
    ok = True
    while ihi >= 0:
        l = 0
        for k in range(ihi, 0, -1):
            hk = abs(h[k, k - 1])
            if hk <= smlnum:
                h[k, k - 1] = 0.0
                l = k
                break
            if hk <= eps * (abs(h[k - 1, k - 1]) + abs(h[k, k])):
                h[k, k - 1] = 0.0
                l = k
                break
        if l == ihi:
            w[ihi] = h[ihi, ihi]
            ihi -= 1
            its = 0
            continue
        if total >= budget:
            ok = False
            for i in range(ihi + 1):
                w[i] = h[i, i]
            break
        its += 1
        total += 1
        if its % 10 == 0:
            # exceptional shift
            mu = h[ihi, ihi] + 0.75 * abs(h[ihi, ihi - 1].real)
        else:
            mu = _wilkinson(h[ihi - 1, ihi - 1], h[ihi - 1, ihi], h[ihi, ihi - 1], h[ihi, ihi])
        x = h[l, l] - mu
        y = h[l + 1, l]
        for k in range(l, ihi):
            if k > l:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            ax = abs(x)
            ay = abs(y)
            if ay == 0.0:
                continue
            if ax == 0.0:
                c = 0.0
                s = np.conj(y) / ay
                r = ay + 0.0j
            else:
                nrm = np.hypot(ax, ay)
                ph = x / ax
                c = ax / nrm
                s = ph * np.conj(y) / nrm
                r = ph * nrm
            jlo = k - 1 if k > l else l
            if k > l:
                h[k, k - 1] = r
                h[k + 1, k - 1] = 0.0
                jlo = k
            for j in range(jlo, ihi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = c * t1 + s * t2
                h[k + 1, j] = -np.conj(s) * t1 + c * t2
            cs = np.conj(s)
            ihigh = k + 2 if k + 2 < ihi else ihi
            for i in range(l, ihigh + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = c * t1 + cs * t2
                h[i, k + 1] = -s * t1 + c * t2
    return w, total, ok


@nb.njit(cache=True, nogil=True)
def _native_eigvals(a, balance, eps, safmin, budget):
    h = a.copy()
    if balance:
        _balance(h)
    _hessenberg(h)
    return _hqr(h, eps, safmin, budget)


# --------------------------------------------------------------------------
# public API


def _as_square(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _resolve_engine(engine: str, n: int) -> str:
    if engine == "auto":
        return "native" if n <= NATIVE_MAX_N else "lapack"
    if engine not in ("native", "lapack"):
        raise ValueError(f"unknown engine {engine!r}")
    return engine


def _eig_raw(a: np.ndarray, balance: bool, engine: str):
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.complex128), 0, True, "native"
    engine = _resolve_engine(engine, n)
    if engine == "lapack":
        return np.linalg.eigvals(a).astype(np.complex128), 0, True, "lapack"
    w, sweeps, ok = _native_eigvals(a, balance, _EPS, _SAFMIN, 40 * n)
    return w, int(sweeps), bool(ok), "native"


def eigenvalues(a, *, balance: bool = True, engine: str = "auto") -> np.ndarray:
    """All ``n`` eigenvalues of a dense square matrix.

    Raises :class:`NonConvergence` (carrying the partial spectrum) when
    the native QR sweep budget of ``40 * n`` is exhausted.
    """
    a = _as_square(a)
    w, sweeps, ok, used = _eig_raw(a, balance, engine)
    if not ok:
        rho = float(np.max(np.abs(w))) if len(w) else 0.0
        raise NonConvergence(SpectralReport(w, rho, float("nan"), sweeps, False, used))
    return w


def _max_modulus(w: np.ndarray) -> float:
    if len(w) == 0:
        return 0.0
    # argmax returns the first occurrence, which fixes tie-breaking
    return float(np.abs(w[int(np.argmax(np.abs(w)))]))


def spectral_radius(a, *, balance: bool = True, engine: str = "auto") -> float:
    return _max_modulus(eigenvalues(a, balance=balance, engine=engine))


def _start_vector(n: int) -> np.ndarray:
    # fixed deterministic start; avoids accidental orthogonality to the top singular vector
    k = np.arange(1, n + 1, dtype=np.float64)
    return (1.0 + 0.5 * np.sin(k * 1.618033988749895)) + 0.25j * np.cos(k * 2.718281828459045)


def operator_norm(a, *, rtol: float = 1e-10, max_iter: int | None = None) -> float:
    """Largest singular value via power iteration on ``A A*``.

    Stops when the Rayleigh quotient changes by at most ``rtol`` relative on two
    consecutive steps; falls back to a Hermitian eigensolve of ``A A*`` after
    ``10 n`` iterations.
    """
    a = _as_square(a)
    n = a.shape[0]
    if n == 0 or not np.any(a):
        return 0.0
    if max_iter is None:
        max_iter = 10 * n
    ah = a.conj().T
    x = _start_vector(n)
    x /= np.linalg.norm(x)
    theta_old = -1.0
    hits = 0
    for _ in range(max_iter):
        y = a @ (ah @ x)
        theta = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny
        if theta_old > 0 and abs(theta - theta_old) <= rtol * theta:
            hits += 1
            if hits >= 2:
                return float(np.sqrt(theta))
        else:
            hits = 0
        theta_old = theta
    lam = np.linalg.eigvalsh(a @ ah)
    return float(np.sqrt(max(lam[-1], 0.0)))


def smallest_singular(a, z: complex = 0.0, *, cap: int = SVD_MAX_N) -> float:
    """Smallest singular value of ``A - z I`` (LAPACK bidiagonal SVD)."""
    a = _as_square(a)
    n = a.shape[0]
    if n > cap:
        raise SizeCapExceeded(f"n={n} exceeds the singular-value size cap {cap}")
    if n == 0:
        return 0.0
    m = a - complex(z) * np.eye(n, dtype=np.complex128)
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def spectral_report(
    a,
    *,
    balance: bool = True,
    engine: str = "auto",
    with_op_norm: bool = True,
    z: complex | None = None,
) -> SpectralReport:
    """Eigenvalues, ρ(A), ‖A‖ and optionally σ_min(A − zI) for one matrix.

    Never raises on non-convergence; the flag is carried in the report.
    """
    a = _as_square(a)
    w, sweeps, ok, used = _eig_raw(a, balance, engine)
    op = operator_norm(a) if with_op_norm else float("nan")
    smin = smallest_singular(a, z) if z is not None else None
    return SpectralReport(w, _max_modulus(w), op, sweeps, ok, used, smin)
