import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specrad import profiles as P


def test_homogeneous():
    assert np.array_equal(P.make_homogeneous(1).s, [[1.0]])
    s = P.make_homogeneous(4).s
    assert np.all(s == 0.25)
    pr = P.params(P.make_homogeneous(100))
    assert pr.sigma == pytest.approx(1.0)
    assert pr.sigma_star == pytest.approx(0.1)
    assert pr.rho_S == pytest.approx(1.0, abs=1e-12)


def test_block_band():
    assert np.array_equal(P.make_block_band(3, 1, 1.0).s, np.ones((3, 3)))
    s = P.make_block_band(4, 2, 1 / 6).s
    assert np.allclose(s.sum(axis=1), 1.0)
    s = P.make_block_band(4, 2, 1.0).s
    blk = np.arange(8) // 2
    dist = np.abs(blk[:, None] - blk[None, :])
    dist = np.minimum(dist, 4 - dist)
    assert np.all((s == 0) == (dist >= 2))
    with pytest.raises(ValueError):
        P.make_block_band(2, 2, 1.0)


def test_periodic_band():
    assert np.allclose(P.make_periodic_band(5, 5, 0.2).s, 0.2)
    s = P.make_periodic_band(8, 3, 1 / 3).s
    assert np.all(np.count_nonzero(s, axis=1) == 3)
    assert np.allclose(s.sum(axis=1), 1.0)
    assert np.array_equal(P.make_periodic_band(8, 1, 1.0).s, np.eye(8))
    with pytest.raises(ValueError):
        P.make_periodic_band(8, 4, 0.25)


def test_hetero_block():
    assert np.allclose(P.make_hetero_block(2, 1, 1).s, [[0, 0, .5, .5], [0, 0, .5, .5], [.5, .5, 0, 0], [.5, .5, 0, 0]])
    assert np.array_equal(P.make_hetero_block(1, 2, 3).s, [[0, 4], [9, 0]])
    pr = P.params(P.make_hetero_block(4, 4, 1), K=8)
    assert pr.sigma == pytest.approx(4.0)
    assert dict(pr.ltc_sequence)[2] ** 0.25 == pytest.approx(2.0, abs=1e-12)
    assert pr.ltc_sigma_hat == pytest.approx(2.0, abs=1e-9)


def test_product_linearization():
    assert np.array_equal(P.make_product_linearization(2, 1).s, [[0, 1], [1, 0]])
    s = P.make_product_linearization(3, 2).s
    assert np.allclose(s.sum(axis=1), 1.0)
    assert np.all(np.count_nonzero(s, axis=1) == 2)
    assert np.allclose(s[s > 0], 0.5)
    assert np.allclose(P.make_product_linearization(1, 2).s, 0.5)


def test_product_blocks_extraction():
    p, q = 3, 2
    a = np.arange(36.0).reshape(6, 6)
    x1, x2, x3 = P.product_blocks(a, p, q)
    assert np.array_equal(x1, a[4:, :2])
    assert np.array_equal(x2, a[0:2, 2:4])
    assert np.array_equal(x3, a[2:4, 4:6])


def test_nilpotent():
    assert np.array_equal(P.make_nilpotent_superdiag(2).s, [[0, 1], [0, 0]])
    pr = P.params(P.make_nilpotent_superdiag(4), K=4)
    assert pr.rho_S == 0.0
    assert [m for _, m in pr.ltc_sequence] == [1.0, 1.0, 1.0, 0.0]
    assert pr.ltc_sigma_hat == 0.0
    assert pr.ltc_constant is None


def test_diag_block():
    assert np.allclose(P.make_diag_block_ginibre(5, 5).s, P.make_homogeneous(5).s)
    assert np.array_equal(P.make_diag_block_ginibre(4, 2).s, np.kron(np.eye(2), np.full((2, 2), 0.5)))
    pr = P.params(P.make_diag_block_ginibre(6, 2))
    assert pr.sigma == pytest.approx(1.0)
    assert pr.rho_S == pytest.approx(1.0)
    with pytest.raises(ValueError):
        P.make_diag_block_ginibre(6, 4)


def test_perturbed_regular():
    base = P.make_perturbed_regular(16, 0.5, 0.5, 0.0)
    assert np.allclose(base.s.sum(axis=1), 1.0)
    assert np.allclose(base.s.sum(axis=0), 1.0)
    pert = P.make_perturbed_regular(16, 0.5, 0.5, 2.0)
    # four entries of row 0 gain 2 / 4 each
    assert pert.s.sum(axis=1)[0] == pytest.approx(1.0 + 4 * 2.0 / 4)
    assert np.allclose(pert.s.sum(axis=1)[1:], 1.0)
    assert np.all(np.diag(pert.s) == 0)
    assert np.array_equal(P.make_perturbed_regular(16, 0.5, 0.25, 0.0).s, base.s)
    with pytest.raises(ValueError):
        P.make_perturbed_regular(4, 0.9, 0.9999, 1.0)


def test_params_examples():
    pr = P.params(P.make_periodic_band(8, 3, 1 / 3))
    assert pr.sigma == pytest.approx(1.0)
    assert pr.ltc_sigma_hat == pytest.approx(1.0)
    assert pr.flatness == (0.0, pytest.approx(8 / 3))
    flat = P.params(P.make_homogeneous(10)).flatness
    assert flat == (pytest.approx(1.0), pytest.approx(1.0))


def test_ltc_sequence_matches_matrix_powers():
    prof = P.make_perturbed_regular(30, 0.5, 0.3, 3.0)
    s = prof.s
    for k, m in P.ltc_sequence(prof, 5):
        sk = np.linalg.matrix_power(s, k)
        ref = max(sk.sum(axis=1).max(), sk.sum(axis=0).max())
        assert m == pytest.approx(ref, rel=1e-12)


def test_doubly_stochastic():
    assert P.is_doubly_stochastic(P.make_homogeneous(4))
    assert P.is_doubly_stochastic(P.make_nilpotent_superdiag(4))
    assert not P.is_doubly_stochastic(P.make_hetero_block(3, 2, 1))


def test_validation():
    with pytest.raises(ValueError):
        P.VarianceProfile(np.array([[1.0, -0.1], [0, 0]]))
    with pytest.raises(ValueError):
        P.VarianceProfile(np.ones((2, 3)))
    with pytest.raises(ValueError):
        P.VarianceProfile(np.array([[np.nan]]))
    prof = P.make_homogeneous(3)
    with pytest.raises(ValueError):
        prof.s[0, 0] = 2.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31))
def test_json_round_trip_exact(n, seed):
    s = np.random.default_rng(seed).exponential(size=(n, n)) / 3.0
    prof = P.VarianceProfile(s, "random")
    back = P.VarianceProfile.from_json(prof.to_json())
    assert back == prof
    assert json.loads(prof.to_json())["format"] == "dense"


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**31))
def test_chain_sqrt_rho_le_ltc_le_sigma(n, seed):
    s = np.random.default_rng(seed).uniform(size=(n, n))
    s[s < 0.4] = 0.0
    pr = P.params(P.VarianceProfile(s))
    assert math.sqrt(pr.rho_S) <= pr.ltc_sigma_hat + 1e-9
    assert pr.ltc_sigma_hat <= pr.sigma + 1e-9
    assert pr.sigma_star <= pr.sigma + 1e-12


def test_build_profile_dispatch():
    assert P.build_profile({"kind": "block-band", "b": 2}, 8).s.shape == (8, 8)
    assert P.build_profile({"kind": "product", "p": 4}, 12) == P.make_product_linearization(4, 3)
    with pytest.raises(ValueError):
        P.build_profile({"kind": "bogus"}, 4)
    with pytest.raises(ValueError):
        P.build_profile({"kind": "product", "p": 5}, 12)
