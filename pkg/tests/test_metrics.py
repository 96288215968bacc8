import math

import numpy as np
import pytest

from pcbo.errors import InputError
from pcbo.metrics import (
    best_so_far_series,
    cumulative_regret,
    kde,
    log_normalized_regret,
    median_series,
    normalized_regret,
)


class TestNormalizedRegret:
    def test_at_optimum(self):
        assert normalized_regret(10.0, 10.0) == 0.0

    def test_at_zero(self):
        assert normalized_regret(0.0, 3.0) == 1.0

    def test_plain_ratio(self):
        assert normalized_regret(9.0, 10.0) == pytest.approx(0.1, abs=1e-12)

    def test_clamped_on_overshoot_and_negatives(self):
        assert normalized_regret(11.0, 10.0) == 0.0
        assert normalized_regret(-5.0, 10.0) == 1.0

    def test_requires_positive_optimum(self):
        with pytest.raises(InputError):
            normalized_regret(1.0, 0.0)


class TestLogRegret:
    def test_milli(self):
        assert log_normalized_regret(0.999, 1.0) == pytest.approx(-3.0, abs=1e-9)

    def test_floor(self):
        assert log_normalized_regret(1.0, 1.0) == -12.0

    def test_deci(self):
        assert log_normalized_regret(0.9, 1.0) == pytest.approx(-1.0, abs=1e-9)


class TestCumulativeRegret:
    def test_all_optimal(self):
        np.testing.assert_allclose(cumulative_regret([2.0, 2.0, 2.0], 2.0), 0.0)

    def test_running_sum(self):
        np.testing.assert_allclose(
            cumulative_regret([0.5, 0.75], 1.0), [0.5, 0.75])

    def test_single(self):
        np.testing.assert_allclose(cumulative_regret([0.0], 2.0), [2.0])

    def test_non_decreasing(self):
        rng = np.random.default_rng(0)
        values = rng.uniform(0, 1, size=30)
        series = cumulative_regret(values, 1.0)
        assert np.all(np.diff(series) >= 0.0)


class TestBestSoFar:
    def test_running_maximum(self):
        series = best_so_far_series(
            [np.array([5.0]), np.array([8.0, 2.0])], 10.0)
        np.testing.assert_allclose(series.norm_regret, [0.5, 0.2])
        np.testing.assert_allclose(series.best_values, [5.0, 8.0])

    def test_regret_non_increasing(self):
        rng = np.random.default_rng(1)
        batches = [rng.uniform(0, 1, size=4) for _ in range(20)]
        series = best_so_far_series(batches, 1.0)
        assert np.all(np.diff(series.norm_regret) <= 0.0)
        assert np.all(np.diff(series.log10_norm_regret) <= 0.0)

    def test_optimum_in_first_batch_zeroes_series(self):
        series = best_so_far_series([np.array([2.0]), np.array([1.0])], 2.0)
        np.testing.assert_allclose(series.norm_regret, 0.0)
        np.testing.assert_allclose(series.log10_norm_regret, -12.0)

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            best_so_far_series([], 1.0)


class TestMedianSeries:
    def test_identity_on_one(self):
        np.testing.assert_allclose(
            median_series([np.array([1.0, 2.0])]), [1.0, 2.0])

    def test_odd_count(self):
        series = [np.array([1, 1.0]), np.array([3, 3.0]), np.array([2, 2.0])]
        np.testing.assert_allclose(median_series(series), [2.0, 2.0])

    def test_even_count_averages(self):
        series = [np.array([v]) for v in (1.0, 2.0, 3.0, 4.0)]
        np.testing.assert_allclose(median_series(series), [2.5])

    def test_length_mismatch_rejected(self):
        with pytest.raises(InputError):
            median_series([np.array([1.0]), np.array([1.0, 2.0])])


class TestKde:
    def test_single_sample_peak(self):
        grid = np.array([-1.0, 0.0, 1.0])
        density = kde(np.array([0.0]), grid)
        h = 1e-3  # zero-spread bandwidth floor
        assert density[1] == pytest.approx(1 / (h * math.sqrt(2 * math.pi)), rel=1e-9)
        assert density[1] > density[0]

    def test_symmetric_samples(self):
        grid = np.linspace(-3, 3, 61)
        density = kde(np.array([-1.0, 1.0, -0.5, 0.5]), grid)
        np.testing.assert_allclose(density, density[::-1], atol=1e-12)

    def test_integrates_to_one(self):
        rng = np.random.default_rng(2)
        samples = rng.normal(size=50)
        h = 50 ** -0.2 * samples.std()
        grid = np.linspace(samples.min() - 5 * h, samples.max() + 5 * h, 2001)
        density = kde(samples, grid)
        assert np.trapezoid(density, grid) == pytest.approx(1.0, rel=0.01)

    def test_nonnegative(self):
        density = kde(np.array([-2.0, 0.0, 3.0]), np.linspace(-12, 0, 121))
        assert np.all(density >= 0.0)
