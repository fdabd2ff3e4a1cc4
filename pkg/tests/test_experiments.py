import math

import numpy as np
import pytest
from scipy import integrate, stats

from qerasure import bounds, experiments as ex, states
from qerasure.errors import InsufficientPoints
from qerasure.sampling import SeededStream, haar_pure, random_state


def test_visibility_analytic_values():
    assert ex.avg_visibility_analytic(1) == pytest.approx(math.pi / 4, rel=1e-14)
    assert ex.avg_visibility_analytic(2) == pytest.approx(3 * math.pi / 16, rel=1e-14)
    vals = [ex.avg_visibility_analytic(k) for k in range(1, 400)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # large K: ~ sqrt(pi / K) / 2, no overflow
    assert ex.avg_visibility_analytic(10**6) == pytest.approx(math.sqrt(math.pi / 1e6) / 2, rel=1e-5)
    with pytest.raises(ValueError):
        ex.avg_visibility_analytic(0)


def test_visibility_analytic_vs_mc_large_k():
    rec = ex.mc_avg_visibility(50, 20000, SeededStream(1))
    assert abs(rec.mean - ex.avg_visibility_analytic(50)) < 4 * rec.stderr


def test_k1_coherence_by_quadrature():
    # two-qubit case: C = 2 sqrt(s (1 - s)) with s = p0 ~ Beta(2, 2)
    val, _ = integrate.quad(lambda s: 2 * math.sqrt(s * (1 - s)) * 6 * s * (1 - s), 0, 1, epsabs=1e-13)
    assert val == pytest.approx(ex.avg_coherence_k1_analytic(), abs=1e-10)


def test_k1_coherence_over_haar_two_qubit_states():
    vals = [bounds.coherence_bound(random_state((2, 2, 1), SeededStream(2, i))) for i in range(4000)]
    se = np.std(vals) / math.sqrt(len(vals))
    assert abs(np.mean(vals) - 9 * math.pi / 32) < 4 * se


def test_mc_dc1_near_analytic():
    rec = ex.mc_avg_coherence(1, 20000, SeededStream(3))
    assert abs(rec.mean_C - 9 * math.pi / 32) < 3 * rec.stderr
    assert rec.env_dim == 2 and rec.n == 20000
    assert rec.avg_V_analytic == pytest.approx(3 * math.pi / 16)


def test_state_factory_override(bell):
    rec = ex.mc_avg_coherence(1, 200, SeededStream(4), path="tripartite", state_factory=lambda rng: bell)
    assert rec.mean_C == pytest.approx(1)
    assert rec.stderr == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        ex.mc_avg_coherence(1, 200, SeededStream(4), path="bogus")


def test_seed_stability():
    a = ex.mc_avg_coherence(8, 1000, SeededStream(5))
    b = ex.mc_avg_coherence(8, 1000, SeededStream(5))
    assert a == b
    c = ex.mc_avg_coherence(8, 1000, SeededStream(6))
    assert c.mean_C != a.mean_C


def test_fast_and_tripartite_paths_agree():
    fast = ex.sample_coherence_fast(3, 3000, SeededStream(7))
    slow = ex.sample_coherence_tripartite(3, 3000, SeededStream(8))
    assert stats.ks_2samp(fast, slow).pvalue > 1e-3


def test_fast_path_is_the_subfidelity_bound():
    # same draw, evaluated both ways
    rng = SeededStream(9).generator()
    vals = ex.sample_coherence_fast(2, 5, rng)
    assert np.all((vals >= 0) & (vals <= 1 + 1e-12))
    for dc in (1, 2, 5):
        s = random_state((2, 2, dc), SeededStream(10, dc))
        assert bounds.coherence_bound_subfidelity(s) == pytest.approx(bounds.coherence_bound(s), abs=1e-9)


def test_summarize_band():
    s = ex.summarize(np.arange(101, dtype=float), band=(0.1, 0.9))
    assert s.mean == 50 and s.band_low == pytest.approx(10) and s.band_high == pytest.approx(90)
    assert s.n == 101


def test_fit_exact_line():
    x = np.array([0.1, 0.2, 0.3, 0.4])
    c, err, res = ex.fit_through_origin(x, 2 * x, np.full(4, 0.01))
    assert c == pytest.approx(2, rel=1e-14)
    np.testing.assert_allclose(res, 0, atol=1e-15)
    assert err == pytest.approx(0.01 / math.sqrt(np.sum(x * x)))
    a, b = ex.fit_affine(x, 2 * x + 0.5, np.full(4, 0.01))
    assert (a, b) == (pytest.approx(2), pytest.approx(0.5))
    with pytest.raises(InsufficientPoints):
        ex.fit_through_origin(x[:2], x[:2], [1, 1])


def test_fit_constant_c_with_runner():
    def runner(dc, samples, stream):
        v = ex.avg_visibility_analytic(2 * dc)
        return ex.PointRecord(dc, 2 * dc, 1.944 * v, 1e-4, 0, 0, samples, v)

    fit = ex.fit_constant_c(ex.SweepConfig((10, 20, 40)), runner=runner)
    assert fit.c_hat == pytest.approx(1.944, rel=1e-12)
    assert fit.k_range == (10, 40)
    with pytest.raises(InsufficientPoints):
        ex.fit_constant_c(ex.SweepConfig((10, 20)), runner=runner)
    with pytest.raises(ValueError):
        ex.fit_constant_c(ex.SweepConfig((5, 20, 40)), runner=runner)


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        ex.SweepConfig((2, 1))
    with pytest.raises(ValueError):
        ex.SweepConfig((1, 2), samples_per_point=50)
    with pytest.raises(ValueError):
        ex.SweepConfig((1,), percentile_band=(0.8, 0.2))


def test_sweep_deterministic_and_decreasing():
    cfg = ex.SweepConfig((1, 2, 4), samples_per_point=4000, master_seed=11)
    r1, r2 = ex.sweep(cfg), ex.sweep(cfg, threads=3)
    assert r1.to_csv() == r2.to_csv()
    means = [p.mean_C for p in r1.points]
    assert means[0] > means[1] > means[2]
    assert not r1.failed


def test_sweep_csv_roundtrip():
    res = ex.sweep(ex.SweepConfig((1, 3), samples_per_point=200, master_seed=1))
    text = res.to_csv()
    assert text.splitlines()[0] == ",".join(ex.CSV_COLUMNS)
    rows = ex.read_sweep_csv(text)
    assert [r["dC"] for r in rows] == [1, 3]
    assert rows[0]["mean_C"] == res.points[0].mean_C  # lossless floats


def test_ratio_stabilizes():
    ratios = []
    for i, dc in enumerate((10, 50, 100)):
        rec = ex.mc_avg_coherence(dc, 3000, SeededStream(12, i))
        ratios.append(rec.mean_C / rec.avg_V_analytic)
    assert max(ratios) / min(ratios) < 1.04
    assert 1.85 < ratios[-1] < 2.0
