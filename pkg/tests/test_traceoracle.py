import math

import numpy as np
import pytest

from specrad.entrylaws import ALL_LAW_SPECS, abs_moment, mixed_moment, parse_law
from specrad.profiles import (
    VarianceProfile,
    make_hetero_block,
    make_homogeneous,
    make_nilpotent_superdiag,
    make_periodic_band,
    make_product_linearization,
    product_blocks,
)
from specrad.rng import SeedPath
from specrad.sampler import sample
from specrad.traceoracle import InfiniteMoment, SizeGuard, frobenius_power, trace_moment_exact, trace_moment_mc


def test_p1_sums_variances_for_all_laws():
    s = np.random.default_rng(0).uniform(size=(4, 4))
    prof = VarianceProfile(s)
    for law in ALL_LAW_SPECS:
        assert trace_moment_exact(prof, law, 1).value == pytest.approx(s.sum(), abs=1e-12)
    assert trace_moment_exact(make_homogeneous(5), "laplace", 1).value == pytest.approx(5.0, abs=1e-12)


def test_nilpotent_is_zero():
    for law in ALL_LAW_SPECS:
        assert trace_moment_exact(make_nilpotent_superdiag(3), law, 3).value == 0.0
    est = trace_moment_mc(make_nilpotent_superdiag(4), "complex-gaussian", 4, 10, SeedPath(0, "nil", 0))
    assert est.value == 0.0 and est.std_error == 0.0


def test_ginibre_closed_forms():
    # complex Ginibre: n + 1/n at p = 2 and n + 5/n at p = 3 (genus expansion)
    for n in (2, 3, 4):
        prof = make_homogeneous(n)
        assert trace_moment_exact(prof, "complex-gaussian", 2).value == pytest.approx(n + 1 / n, rel=1e-12)
        assert trace_moment_exact(prof, "complex-gaussian", 3).value == pytest.approx(n + 5 / n, rel=1e-12)


def test_p2_matches_independent_formula():
    # E||A^2||_F^2 via a direct sum over (i, k, j) and (i, l, j) with Wick grouping done by hand
    s = np.random.default_rng(3).uniform(size=(3, 3))
    prof = VarianceProfile(s)
    for law in ("complex-gaussian", "real-gaussian", "rademacher", "bernoulli:0.05"):
        n = 3
        total = 0.0
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        # E[a_ik a_kj conj(a_il) conj(a_lj)]
                        pos = [((i, k), 0), ((k, j), 0), ((i, l), 1), ((l, j), 1)]
                        groups = {}
                        for p, c in pos:
                            u, v = groups.get(p, (0, 0))
                            groups[p] = (u + (c == 0), v + (c == 1))
                        val = 1.0
                        for (r, cc), (u, v) in groups.items():
                            val *= s[r, cc] ** ((u + v) / 2) * mixed_moment(law, u, v)
                        total += val
        assert trace_moment_exact(prof, law, 2).value == pytest.approx(total, rel=1e-12)


def test_exact_matches_mc_small_configs():
    # the 4 SE check needs a finite-variance estimator, i.e. finite moments of order 4p
    profs = [make_homogeneous(2), make_periodic_band(3, 3, 0.3), make_hetero_block(2, 1.5, 0.7), make_homogeneous(4)]
    for prof in profs:
        for law in ALL_LAW_SPECS:
            for p in (1, 2, 3):
                if not math.isfinite(abs_moment(law, 4 * p)):
                    continue
                ex = trace_moment_exact(prof, law, p).value
                # Laplace products are strongly skewed; its sample SE is only trustworthy with more trials
                trials = 100_000 if parse_law(law).tail_class == "subexponential" else 10_000
                mc = trace_moment_mc(prof, law, p, trials, SeedPath(11, f"{prof.label}-{law}", 0))
                assert abs(mc.value - ex) <= 4 * mc.std_error + 1e-12 * ex, (prof.label, law, p, ex, mc)


def test_divergent_moments():
    prof = make_homogeneous(2)
    est = trace_moment_exact(prof, "pareto:2.5", 2)
    assert math.isinf(est.value)
    with pytest.raises(InfiniteMoment):
        trace_moment_exact(prof, "pareto:2.5", 2, strict=True)
    # second moments only: finite at p = 1
    assert trace_moment_exact(prof, "pareto:2.5", 1).value == pytest.approx(2.0)


def test_size_guard():
    with pytest.raises(SizeGuard):
        trace_moment_exact(make_homogeneous(16), "complex-gaussian", 3)
    with pytest.raises(ValueError):
        trace_moment_exact(make_homogeneous(2), "complex-gaussian", 0)


def test_law_invariance_at_p1():
    prof = make_periodic_band(4, 3, 0.25)
    vals = {trace_moment_exact(prof, law, 1).value for law in ALL_LAW_SPECS}
    assert max(vals) - min(vals) <= 1e-14


def test_monotone_in_p_at_n32():
    vals = [trace_moment_mc(make_homogeneous(32), "complex-gaussian", p, 400, SeedPath(2, "mono", 0)).value
            for p in (1, 2, 3)]
    assert vals[0] <= vals[1] <= vals[2]


def test_envelope_n32():
    n = 32
    est = trace_moment_mc(make_homogeneous(n), "complex-gaussian", 3, 20000, SeedPath(8, "envelope", 0))
    assert n <= est.value <= 2 * n
    assert est.value == pytest.approx(n + 5 / n, abs=4 * est.std_error)


def test_product_linearization_block_trace():
    # E||X_1...X_p||_F^2 = q for the block the index cycle starts in; the full trace carries p such blocks
    p, q = 5, 4
    prof = make_product_linearization(p, q)
    blocks, full = [], []
    for t in range(3000):
        a = sample(prof, "complex-gaussian", SeedPath(4, "pl-trace", t)).a
        xs = product_blocks(a, p, q)
        m = xs[0]
        for x in xs[1:]:
            m = m @ x
        blocks.append(np.vdot(m, m).real)
        full.append(frobenius_power(a, p))
    blocks, full = np.array(blocks), np.array(full)
    mean, se = blocks.mean(), blocks.std(ddof=1) / np.sqrt(blocks.size)
    assert mean <= q * (1 + 5 * se / mean)
    fm, fse = full.mean(), full.std(ddof=1) / np.sqrt(full.size)
    assert abs(fm - p * q) <= 4 * fse


def test_frobenius_identity():
    a = (np.random.default_rng(1).standard_normal((6, 6)) + 0j)
    for p in (1, 2, 3):
        ap = np.linalg.matrix_power(a, p)
        assert frobenius_power(a, p) == pytest.approx(np.trace(ap @ ap.conj().T).real, rel=1e-12)


def test_mc_requires_two_trials():
    with pytest.raises(ValueError):
        trace_moment_mc(make_homogeneous(2), "rademacher", 1, 1, SeedPath(0, "x", 0))
