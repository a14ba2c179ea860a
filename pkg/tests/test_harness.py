import json
import math

import numpy as np
import pytest

from specrad import harness
from specrad.harness import ExperimentConfig, ks_statistic, run, wilson_interval
from specrad.theory import ginibre_radius_cdf


def test_wilson_examples():
    lo, hi = wilson_interval(0, 100, 0.95)
    assert lo == 0.0 and hi == pytest.approx(0.0370, abs=1e-4)
    lo, hi = wilson_interval(50, 100, 0.95)
    assert (lo + hi) / 2 == pytest.approx(0.5, abs=1e-12)
    assert hi - lo == pytest.approx(0.19, abs=0.005)
    assert wilson_interval(100, 100)[1] == 1.0
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


def test_wilson_against_statsmodels_formula():
    # closed form written out independently
    for k, m in ((3, 40), (17, 90), (199, 200)):
        z = 1.959963984540054
        p = k / m
        c = (p + z * z / (2 * m)) / (1 + z * z / m)
        h = z * math.sqrt(p * (1 - p) / m + z * z / (4 * m * m)) / (1 + z * z / m)
        lo, hi = wilson_interval(k, m)
        assert lo == pytest.approx(c - h, rel=1e-12) and hi == pytest.approx(c + h, rel=1e-12)


def test_ks_examples():
    assert ks_statistic([0.0], lambda x: 0.5) == 0.5
    assert ks_statistic([0.3, 1.2, 7.0], lambda x: 0.0) == 1.0
    with pytest.raises(ValueError):
        ks_statistic([], lambda x: 0.0)


def test_ks_matches_scipy():
    from scipy import stats

    x = np.random.default_rng(0).normal(size=500)
    assert ks_statistic(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, rel=1e-12)


def test_ks_self_sample_below_critical():
    hits = 0
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = rng.exponential(size=4000)
        hits += ks_statistic(x, lambda t: 1 - math.exp(-t)) <= 1.63 / math.sqrt(4000)
    assert hits >= 48


def base(**kw):
    doc = dict(kind="diag_block_exact", profile={"kind": "diag_block", "d": 4}, law="complex-gaussian",
               n_list=[8], trials=40, master_seed=3, experiment_id="t", a_grid=[0.5, 1.0, 1.5])
    doc.update(kw)
    return ExperimentConfig(**doc)


def test_config_validation():
    with pytest.raises(ValueError):
        base(kind="nope")
    with pytest.raises(ValueError):
        base(trials=0)
    with pytest.raises(ValueError):
        base(t_grid=[1.0, 1.0])
    with pytest.raises(ValueError):
        base(experiment_id="")
    with pytest.raises(ValueError):
        base(law="cauchy")
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "tail_curve", "bogus": 1})


def test_config_json_round_trip(tmp_path):
    cfg = base()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(path) == cfg


def test_seed_paths_and_rows():
    res = run(base(n_list=[8, 12], trials=5))
    assert [r.trial for r in res.rows] == list(range(10))
    from specrad.rng import SeedPath

    assert (res.rows[0].seed_hi, res.rows[0].seed_lo) == SeedPath(3, "t", 0).split()
    text = res.csv_text().splitlines()
    assert text[0] == harness.CSV_HEADER
    assert len(text) == 11 and text[1].startswith("t,diag_block_exact,8,0,")


def test_reproducible_and_worker_independent(tmp_path):
    cfg = base(kind="product_linearization", profile={"kind": "product", "p": 3}, n_list=[12], t_grid=[1.0, 2.0])
    a = run(cfg)
    cfg.worker_count = 4
    b = run(cfg)
    a.write(tmp_path / "a")
    b.write(tmp_path / "b")
    assert (tmp_path / "a/results.csv").read_bytes() == (tmp_path / "b/results.csv").read_bytes()
    summary = json.loads((tmp_path / "a/summary.json").read_text())
    assert summary["rows"] == 40 and "wall_clock_seconds" in summary


def test_flagged_rows_fail_campaign(monkeypatch):
    from specrad import eig

    real = eig.spectral_radius
    calls = {"k": 0}

    def flaky(a, **kw):
        calls["k"] += 1
        if calls["k"] % 10 == 0:
            raise eig.NonConvergence(eig.SpectralReport(np.zeros(2), 0.0, float("nan"), 1, False))
        return real(a, **kw)

    monkeypatch.setattr(eig, "spectral_radius", flaky)
    res = run(base(trials=30))
    assert res.flagged == 3
    assert all(r.flag == "NonConvergence" for r in res.rows if not r.ok)
    assert not res.verdicts["flagged rows <= 1%"]
    assert not res.passed


def test_diag_block_ks_small():
    res = run(base(profile={"kind": "diag_block", "d": 8}, trials=600))
    agg = res.aggregates["n=8"]
    assert agg["ks"] < 0.08
    assert res.overlays["n=8"]["exact_cdf"][1] == pytest.approx(ginibre_radius_cdf(8, 1.0))


def test_product_identity_and_bound():
    res = run(base(kind="product_linearization", profile={"kind": "product", "p": 5}, n_list=[20], trials=200,
                   t_grid=[1.0, 2.0, 4.0]))
    assert res.passed
    assert res.aggregates["n=20"]["identity_max_rel_err"] < 1e-8


def test_gumbel_requires_large_n():
    from specrad.theory import GammaNonpositive

    with pytest.raises(GammaNonpositive):
        run(base(kind="gumbel_fit", profile={"kind": "homogeneous"}, n_list=[64]))


def test_gumbel_small_campaign():
    res = run(base(kind="gumbel_fit", profile={"kind": "homogeneous"}, n_list=[200], trials=60))
    agg = res.aggregates["n=200"]
    assert np.isnan(res.rows[0].op_norm)
    assert {"median", "iqr", "ks", "gamma_n"} <= set(agg)


def test_moment_check_rows():
    res = run(base(kind="moment_check", profile={"kind": "homogeneous"}, n_list=[3], trials=400, p_list=[1, 2]))
    assert len(res.rows) == 800
    assert res.aggregates["n=3,p=1"]["exact"] == pytest.approx(3.0)
    assert res.verdicts["n=3,p=2: MC within 4 SE of exact"]


def test_mde_sanity_and_convergence_and_tail():
    res = run(base(kind="mde_sanity", profile={"kind": "homogeneous"}, n_list=[60], trials=10,
                   options={"z": 2.0}))
    assert res.passed
    res = run(base(kind="convergence_sweep", profile={"kind": "periodic_band", "d": 9}, n_list=[30, 60], trials=10))
    assert res.passed and res.aggregates["n=60"]["sigma"] == pytest.approx(1.0)
    res = run(base(kind="tail_curve", profile={"kind": "homogeneous"}, n_list=[40], trials=40, t_grid=[0.5, 1, 2]))
    assert len(res.aggregates["n=40"]["flat"]) == 3
    assert res.overlays["n=40"]["thm15"][0] == pytest.approx(1600 * math.exp(-0.5))


def test_heavy_tail_uses_calibration():
    cal = harness.load_calibration()
    assert 0 < cal["min_bounded_fraction"] <= 1 and cal["separation_factor"] == 1.3
    res = run(base(kind="heavy_tail_compare", profile={"kind": "homogeneous"}, law="pareto:2.5", n_list=[64],
                   trials=20))
    assert res.overlays["n=64"]["min_bounded_fraction"] == cal["min_bounded_fraction"]
