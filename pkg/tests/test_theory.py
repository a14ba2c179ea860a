import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings, strategies as st

from specrad import theory


def test_frozen_values():
    g, loc, scale = theory.gumbel_recentring(1000)
    assert g == pytest.approx(1.204588, abs=1e-6)
    assert loc == pytest.approx(1 + math.sqrt(g / 4000))
    assert scale == pytest.approx(1 / math.sqrt(4000 * g))
    assert theory.ginibre_radius_cdf(1, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)
    assert theory.cramer_rate(2.0) == pytest.approx(0.306853, abs=1e-6)
    assert theory.tail_thm18(2, 6) == pytest.approx(0.1098938, abs=1e-7)
    assert theory.GUMBEL_MEDIAN == pytest.approx(0.3665129, abs=1e-7)


def test_gumbel_recentring_small_n():
    with pytest.raises(theory.GammaNonpositive):
        theory.gumbel_recentring(100)


@settings(max_examples=200)
@given(st.floats(0.5, 400), st.floats(1e-3, 800))
def test_gammainc_matches_scipy(a, x):
    ref = sc.gammainc(a, x)
    ours = theory.gammainc_lower(a, x)
    if ref > 1e-250:
        assert ours == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_log_gammainc_deep_tail():
    # tiny P(a, x) must keep its relative accuracy in log space
    a, x = 150.0, 10.0
    assert theory.log_gammainc_lower(a, x) == pytest.approx(math.log(sc.gammainc(a, x)), rel=1e-12)
    assert theory.log_gammainc_lower(2.0, 0.0) == -math.inf


def test_ginibre_cdf_against_scipy_product():
    for n in (2, 5, 16, 64):
        for a in (0.6, 0.9, 1.0, 1.2):
            ref = np.prod([sc.gammainc(m, n * a * a) for m in range(1, n + 1)])
            assert theory.ginibre_radius_cdf(n, a) == pytest.approx(ref, rel=1e-10)


def test_ginibre_cdf_is_distribution():
    xs = np.linspace(0.05, 3.0, 60)
    F = [theory.ginibre_radius_cdf(16, a) for a in xs]
    assert all(b >= a for a, b in zip(F, F[1:]))
    assert F[0] < 1e-12 and F[-1] == pytest.approx(1.0)
    assert theory.ginibre_radius_cdf(16, math.inf) == 1.0


def test_block_cdf_is_power():
    assert theory.block_ginibre_radius_cdf(4, 4, 1.1) == pytest.approx(theory.ginibre_radius_cdf(4, 1.1) ** 4)


def test_expectation_correction_decreases():
    c = [theory.thm11_correction(1.0, 1 / math.sqrt(n), n, 0.1) for n in (1e2, 1e4, 1e6)]
    assert c[0] > c[1] > c[2]
    b = theory.expectation_bound_thm11(1.0, 0.1, 100, 0.1)
    assert b > 1.0
    with pytest.raises(ValueError):
        theory.expectation_bound_thm11(1.0, 0.1, 100, 0.0)


def test_tail_curves_decay_and_validate():
    for fn in (lambda t: theory.tail_thm14(t, 100), lambda t: theory.tail_thm15(t, 100),
               lambda t: theory.tail_thm16(t, 0.1), lambda t: theory.tail_thm18(t, 6)):
        vals = [fn(t) for t in (0.5, 1, 2, 4, 8)]
        assert all(b <= a for a, b in zip(vals, vals[1:])) and vals[-1] < vals[0]
        with pytest.raises(ValueError):
            fn(0.0)


def test_norm_bound_domain():
    assert theory.norm_bound_eq15(1.0, 0.1, 100, 0.25) > 2.0
    with pytest.raises(ValueError):
        theory.norm_bound_eq15(1.0, 0.1, 100, 0.5)


def test_cramer_rate():
    assert theory.cramer_rate(1.0) == 0.0
    with pytest.raises(ValueError):
        theory.cramer_rate(0.0)


def test_named_curves():
    c = theory.curve("thm18", q=6)
    assert c.evaluate(2.0) == pytest.approx(6 * math.exp(-4))
    assert c.tabulate([1, 2])[1][1] == pytest.approx(6 * math.exp(-4))
    assert theory.curve("ginibre_cdf", n=1).evaluate(1.0) == pytest.approx(1 - math.exp(-1))
    for name in theory.CURVE_NAMES:
        assert theory.curve(name, n=100, q=6, sigma_star=0.1).name == name
    with pytest.raises(ValueError):
        theory.curve("nope")
