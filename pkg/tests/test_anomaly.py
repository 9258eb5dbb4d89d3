"""
Tests for rolling-baseline anomaly detection and the evidence scorer.
"""

import math

import numpy as np
import pytest
from scipy.stats import norm
from scipy.stats import t as student_t

from conflictlab.detect import AnomalyDetector, LaggedCorrelationScorer, detect_anomaly, flag_series, pearson, z_score
from conflictlab.exceptions import InsufficientHistoryError
from conflictlab.models import Direction, KpiId, KpiSample, KpiWindow
from conflictlab.scenario import DetectionConfig


def _window(index, rlf=(0, 0), loads=(0.0, 0.0)):
    samples = tuple(
        KpiSample(window_end_tick=(index + 1) * 50, cell_id=cell, mean_load=loads[cell], rlf_count=rlf[cell])
        for cell in range(len(rlf))
    )
    return KpiWindow(window_index=index, window_end_tick=(index + 1) * 50, samples=samples)


class TestZScore:
    """Test the z-score helper."""

    def test_values(self):
        assert z_score(8.0, 5.0, 1.0) == 3.0
        assert z_score(2.0, 5.0, 1.5) == 2.0

    def test_zero_std(self):
        assert z_score(5.0, 5.0, 0.0) == 0.0
        assert math.isinf(z_score(6.0, 5.0, 0.0))


class TestFlagSeries:
    """Test the detector on plain series."""

    def test_calibration_on_gaussian_noise(self):
        # A 200-window baseline gets close to the nominal 2 * sf(3) = 0.27% rate.
        # The default 20-window baseline flags about 0.86% of Gaussian samples,
        # since its z-score follows a t-distribution with 19 degrees of freedom.
        values = np.random.default_rng(2024).standard_normal(10_000)
        flags = flag_series(values, baseline_window=200, k=3.0)
        scored = len(values) - 200
        rate = sum(f is not None for f in flags) / scored
        expected = 2 * norm.sf(3.0)
        assert 0.001 <= rate <= 0.006
        assert abs(rate - expected) < 0.003

    def test_calibration_with_default_window(self):
        values = np.random.default_rng(2025).standard_normal(20_000)
        flags = flag_series(values, k=3.0)
        rate = sum(f is not None for f in flags) / (len(values) - 20)
        expected = 2 * student_t.sf(3.0 / math.sqrt(1 + 1 / 20), df=19)
        assert expected == pytest.approx(0.0086, abs=0.0005)
        assert abs(rate - expected) < 0.003
        assert rate > 2 * norm.sf(3.0)

    def test_no_flags_during_warm_up(self):
        flags = flag_series([0.0, 100.0, -100.0, 5.0], baseline_window=20)
        assert flags == [None] * 4

    def test_constant_series(self):
        assert all(f is None for f in flag_series([1.0] * 50, baseline_window=10))

    def test_level_shift_is_adopted(self):
        values = [0.0, 1.0] * 10 + [10.0] * 20
        flags = flag_series(values, baseline_window=20, k=3.0, rebaseline_after=5)
        flagged = [i for i, f in enumerate(flags) if f is not None]
        assert flagged == [20, 21, 22, 23, 24]


class TestAnomalyDetector:
    """Test the per-(cell, KPI) detector."""

    @pytest.fixture
    def detector(self):
        return AnomalyDetector(DetectionConfig(baseline_window=5, monitored_kpis=[KpiId.RLF_COUNT]))

    def _feed(self, detector, series):
        flags = []
        for index, value in enumerate(series):
            flags.append(detector.observe_window(_window(index, rlf=(value, 0))))
        return flags

    def test_degradation_onset_and_improvement(self, detector):
        flags = self._feed(detector, [4, 6, 4, 6, 4, 20, 20, 5, 20, 0])
        assert [len(f) for f in flags] == [0, 0, 0, 0, 0, 1, 1, 0, 1, 1]

        first = flags[5][0]
        assert first.cell_id == 0
        assert first.kpi_id == KpiId.RLF_COUNT
        assert first.direction == Direction.DEGRADATION
        assert first.onset
        assert first.baseline_mean == pytest.approx(4.8)
        assert first.z_score == pytest.approx(15.2 / math.sqrt(1.2))

        assert not flags[6][0].onset
        assert flags[8][0].onset
        assert flags[9][0].direction == Direction.IMPROVEMENT
        assert not flags[9][0].onset

        assert detector.windows_seen == 10
        assert detector.flag_count == 4

    def test_onset_series(self, detector):
        self._feed(detector, [4, 6, 4, 6, 4, 20, 20, 5, 20, 0])
        series = detector.onset_series(0, KpiId.RLF_COUNT, last_window=9, span=10)
        assert series.tolist() == [0, 0, 0, 0, 0, 1, 0, 0, 1, 0]
        assert not detector.onset_series(1, KpiId.RLF_COUNT, 9, 10).any()

    def test_load_judged_on_imbalance(self):
        values = AnomalyDetector.monitored_values(_window(0, loads=(0.9, 0.1)), KpiId.MEAN_LOAD)
        assert values == {0: pytest.approx(0.4), 1: pytest.approx(0.4)}

    def test_detect_anomaly_groups_by_window(self):
        samples = [
            KpiSample(window_end_tick=(i + 1) * 50, cell_id=0, mean_load=0.0, rlf_count=value)
            for i, value in enumerate([4, 6, 4, 6, 4, 20])
        ]
        flags = detect_anomaly(samples, baseline_window=5, kpis=[KpiId.RLF_COUNT])
        assert [(f.window_end_tick, f.cell_id) for f in flags] == [(300, 0)]


class TestScoring:
    """Test the lagged-correlation evidence scorer."""

    def test_pearson(self):
        assert pearson(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 6.0])) == pytest.approx(1.0)
        assert pearson(np.array([1.0, 1.0, 1.0]), np.array([2.0, 4.0, 6.0])) is None

    def test_lagged_match(self):
        actions = np.array([1.0 if t % 10 == 0 else 0.0 for t in range(40)])
        degradations = np.concatenate([[0.0, 0.0], actions[:-2]])
        assert LaggedCorrelationScorer().score(actions, degradations, lag_max=5) == pytest.approx(1.0)

    def test_lag_beyond_max(self):
        actions = np.array([1.0 if t % 10 == 0 else 0.0 for t in range(40)])
        degradations = np.concatenate([[0.0] * 4, actions[:-4]])
        assert LaggedCorrelationScorer().score(actions, degradations, lag_max=2) < 0.6

    def test_constant_series_score_zero(self):
        assert LaggedCorrelationScorer().score(np.ones(20), np.zeros(20), lag_max=3) == 0.0

    def test_insufficient_history(self):
        with pytest.raises(InsufficientHistoryError):
            LaggedCorrelationScorer().score(np.ones(5), np.ones(5), lag_max=5)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            LaggedCorrelationScorer().score(np.ones(20), np.ones(19), lag_max=3)
