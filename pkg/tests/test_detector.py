import numpy as np
import pytest

from mmpad.detector import (
    DetectorConfig,
    estimate_period,
    fit_budget,
    interpolate_scores,
    proxy_cost,
    run_detector,
    score,
)
from mmpad.errors import ParameterError, WindowError
from mmpad.io import TimeSeries
from mmpad.oracles import brute_force_pipeline
from mmpad.synth import SynthConfig, generate, uniforms


def direct_acf_peak(x, max_lag):
    """Independent ACF evaluation; returns (lags, acf values)."""
    x = np.asarray(x, dtype=float)
    centered = x - x.mean()
    denom = float((centered**2).sum())
    acf = [1.0]
    for lag in range(1, max_lag + 1):
        acf.append(float((centered[:-lag] * centered[lag:]).sum()) / denom)
    return np.asarray(acf)


class TestEstimatePeriod:
    def test_sine_period_recovered(self):
        t = np.arange(2000)
        x = np.sin(2 * np.pi * t / 50)
        got = estimate_period(x)
        acf = direct_acf_peak(x, 400)
        interior = np.arange(4, 400)
        peaks = interior[
            (acf[interior] > acf[interior - 1]) & (acf[interior] > acf[interior + 1])
        ]
        expected = int(peaks[np.argmax(acf[peaks])])
        assert abs(got - 50) <= 1
        assert got == expected

    def test_white_noise_falls_back(self):
        noise = uniforms(99, 2000) - 0.5
        assert estimate_period(noise) == 125

    def test_long_period_out_of_range(self):
        t = np.arange(2000)
        assert estimate_period(np.sin(2 * np.pi * t / 400)) == 125

    def test_too_short_series_warns(self):
        with pytest.warns(UserWarning):
            assert estimate_period(np.arange(5.0)) == 125

    def test_constant_series(self):
        assert estimate_period(np.full(100, 3.0)) == 125


class TestFitBudget:
    def test_under_budget_is_noop(self):
        ts = generate(SynthConfig(n=500, d=1, k_anom=1, anomaly_start=0, anomaly_len=0, seed=1))
        fit = fit_budget(ts, 50, budget=1e12)
        assert fit.factor == 1 and fit.series is ts and not fit.over_budget

    def test_two_forced_halvings_reinfer_window(self):
        t = np.arange(100_000)
        x = np.sin(2 * np.pi * t / 64) + 0.01 * (uniforms(5, 100_000) - 0.5)
        ts = TimeSeries(x, ["a"])
        # initial cost ~1e10 > 1e9; after one halving ~2.5e9; after two ~6.2e8
        fit = fit_budget(ts, 64, budget=1e9)
        assert fit.factor == 4
        assert fit.series.n == 25_000
        assert not fit.over_budget
        # after one halving the sine has period 32; the second leaves 16
        assert abs(fit.window - 16) <= 1

    def test_reinferred_window_after_single_halving(self):
        t = np.arange(20_000)
        x = np.sin(2 * np.pi * t / 64)
        ts = TimeSeries(x, ["a"])
        cost0 = proxy_cost(20_000, 64, 1)
        fit = fit_budget(ts, 64, budget=cost0 - 1)
        assert fit.factor == 2
        assert abs(fit.window - 32) <= 1

    def test_over_budget_flag_when_stuck(self):
        ts = generate(SynthConfig(n=400, d=1, k_anom=1, anomaly_start=0, anomaly_len=0,
                                  base_period=150, seed=2))
        fit = fit_budget(ts, 150, budget=10.0)
        assert fit.over_budget

    def test_labels_downsampled_with_series(self):
        ts = generate(SynthConfig(n=4096, d=1, k_anom=1, anomaly_start=100,
                                  anomaly_len=64, base_period=32, seed=3))
        fit = fit_budget(ts, 32, budget=1e5)
        assert fit.series.labels.shape == (fit.series.n,)


class TestInterpolateScores:
    def test_factor_one_identity(self):
        y = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(interpolate_scores(y, 1, 3), y)

    def test_forced_linear_with_tail_hold(self):
        out = interpolate_scores(np.array([0.0, 2.0]), 2, 4)
        np.testing.assert_allclose(out, [0.0, 1.0, 2.0, 2.0])

    def test_anchors_reproduced_exactly(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=25)
        out = interpolate_scores(y, 4, 100)
        np.testing.assert_array_equal(out[::4], y)

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            interpolate_scores(np.zeros(10), 2, 30)


class TestScore:
    def test_univariate_k1_matches_bruteforce(self):
        rng = np.random.default_rng(1)
        ts = TimeSeries(rng.normal(size=400), ["a"])
        cfg = DetectorConfig(window=20, k=1, dim_cutoff=1, budget=None)
        np.testing.assert_allclose(
            score(ts, cfg), brute_force_pipeline(ts, cfg), atol=1e-9
        )

    def test_output_length_and_finiteness(self):
        ts = generate(SynthConfig(n=700, d=2, k_anom=1, anomaly_start=300,
                                  anomaly_len=40, base_period=40, noise_sigma=0.3, seed=4))
        y = score(ts, DetectorConfig(window=40, k=3, dim_cutoff=0.5, budget=None))
        assert y.shape == (700,)
        assert np.isfinite(y).all()

    def test_affine_invariance(self):
        ts = generate(SynthConfig(n=600, d=3, k_anom=1, anomaly_start=250,
                                  anomaly_len=50, base_period=50, noise_sigma=0.4, seed=5))
        cfg = DetectorConfig(window="auto", k=2, dim_cutoff=1, budget=None)
        base = score(ts, cfg)
        transformed = TimeSeries(3.0 * ts.values - 7.0, ts.channel_names, ts.labels)
        np.testing.assert_allclose(score(transformed, cfg), base, atol=1e-6)

    def test_thread_invariance(self):
        ts = generate(SynthConfig(n=900, d=2, k_anom=1, anomaly_start=400,
                                  anomaly_len=60, base_period=60, noise_sigma=0.4, seed=6))
        runs = [
            score(ts, DetectorConfig(window=60, k=4, dim_cutoff=2, budget=None, threads=thr))
            for thr in (1, 2, 8)
        ]
        np.testing.assert_array_equal(runs[0], runs[1])
        np.testing.assert_array_equal(runs[0], runs[2])

    def test_submission_style_configs_run(self):
        uni = generate(SynthConfig(n=400, d=1, k_anom=1, anomaly_start=180,
                                   anomaly_len=30, base_period=30, noise_sigma=0.3, seed=7))
        y = score(uni, DetectorConfig(window=30, k=5, dim_cutoff=1))
        assert y.shape == (400,)
        multi = generate(SynthConfig(n=420, d=8, k_anom=2, anomaly_start=200,
                                     anomaly_len=30, base_period=30, noise_sigma=0.3, seed=8))
        y = score(multi, DetectorConfig(window=30, k=15, dim_cutoff=0.7))
        assert y.shape == (420,)

    def test_series_too_short(self):
        ts = TimeSeries(np.arange(10.0), ["a"])
        with pytest.raises(WindowError, match="too short"):
            score(ts, DetectorConfig(window=8, budget=None))

    def test_budget_path_interpolates_back(self):
        ts = generate(SynthConfig(n=4000, d=1, k_anom=1, anomaly_start=2000,
                                  anomaly_len=64, base_period=64, noise_sigma=0.2, seed=9))
        result = run_detector(ts, DetectorConfig(window=64, k=1, budget=1e6))
        assert result.factor > 1
        assert result.scores.shape == (4000,)
        assert np.isfinite(result.scores).all()

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            DetectorConfig(window=2)
        with pytest.raises(ParameterError):
            DetectorConfig(k=0)
        with pytest.raises(ParameterError):
            DetectorConfig(dim_cutoff=0)
        with pytest.raises(ParameterError):
            DetectorConfig(aggregation="both")
        with pytest.raises(ParameterError):
            DetectorConfig(budget=-1)
