import math
from datetime import datetime

import numpy as np
import pytest

from loadmotif import (ConsumerSeries, DataError, DayMatrix,
                       average_daily_profile, counting_zeros,
                       duration_distance, fit_distance_threshold,
                       load_duration_classify, load_duration_curve,
                       simulate_population, zero_count)
from loadmotif.config import build_run_config
from loadmotif.core import clean_series
from loadmotif.pipeline import split_ids, summer_winter


def series_of(values, interval=30):
    return ConsumerSeries(
        consumer_id="C1", start_time=datetime(2021, 1, 1),
        interval_minutes=interval, values=np.asarray(values, float))


class TestCountingZeros:
    def test_all_zero_year_is_positive(self):
        assert counting_zeros(series_of(np.zeros(17520))) == 1

    def test_strictly_positive_is_negative(self, rng):
        assert counting_zeros(series_of(rng.random(17520) + 0.01)) == 0

    def test_threshold_scales_with_length(self):
        # 90 days of half-hourly data: 2000 zeros/year scales to ~493.
        values = np.ones(4320)
        values[:494] = 0.0
        assert counting_zeros(series_of(values)) == 1
        values = np.ones(4320)
        values[:490] = 0.0
        assert counting_zeros(series_of(values)) == 0

    def test_permutation_invariant(self, rng):
        values = rng.random(4320)
        values[rng.choice(4320, 600, replace=False)] = 0.0
        shuffled = values.copy()
        rng.shuffle(shuffled)
        assert counting_zeros(series_of(values)) == counting_zeros(
            series_of(shuffled))

    def test_epsilon_variant(self):
        values = np.full(17520, 1e-6)
        assert counting_zeros(series_of(values)) == 0
        assert counting_zeros(series_of(values), epsilon=1e-3) == 1
        assert zero_count(series_of(values)) == 0
        assert zero_count(series_of(values), epsilon=1e-3) == 17520


class TestAverageDailyProfile:
    def make_days(self, rows):
        return DayMatrix(consumer_id="C1", rows=np.asarray(rows, float),
                         day_index_origin=datetime(2021, 1, 1).date())

    def test_identical_days(self):
        day = np.arange(6.0)
        out = average_daily_profile(self.make_days([day, day, day]))
        assert np.array_equal(out, day)

    def test_two_day_mean(self):
        out = average_daily_profile(
            self.make_days([np.zeros(5), np.full(5, 2.0)]))
        assert np.array_equal(out, np.ones(5))

    def test_output_length(self, rng):
        out = average_daily_profile(self.make_days(rng.random((7, 48))))
        assert out.shape == (48,)

    def test_commutes_with_day_permutation(self, rng):
        rows = rng.random((9, 12))
        perm = rng.permutation(9)
        a = average_daily_profile(self.make_days(rows))
        b = average_daily_profile(self.make_days(rows[perm]))
        assert np.allclose(a, b, rtol=1e-15)


class TestLoadDuration:
    def test_curve_is_sorted_descending(self, rng):
        curve = load_duration_curve(series_of(rng.random(500)), "summer")
        assert np.all(np.diff(curve.sorted_values) <= 0)

    def test_identical_seasons_negative(self, rng):
        values = rng.random(400)
        assert load_duration_classify(series_of(values), series_of(values),
                                      q=100, threshold=0.5) == 0

    def test_uniform_shift_closed_form(self, rng):
        q = 100
        summer = rng.random(700)
        c = 0.75
        dist = duration_distance(
            load_duration_curve(series_of(summer), "summer"),
            load_duration_curve(series_of(summer + c), "winter"), q)
        assert dist == pytest.approx(c * math.sqrt(q), rel=1e-12)

    def test_invariant_under_sample_reorder(self, rng):
        summer, winter = rng.random(300), rng.random(300) * 2
        d1 = duration_distance(load_duration_curve(series_of(summer), "summer"),
                               load_duration_curve(series_of(winter), "winter"))
        rng.shuffle(summer)
        rng.shuffle(winter)
        d2 = duration_distance(load_duration_curve(series_of(summer), "summer"),
                               load_duration_curve(series_of(winter), "winter"))
        assert d1 == d2

    def test_missing_season(self, rng):
        with pytest.raises(DataError):
            load_duration_classify(None, series_of(rng.random(200)))

    def test_too_few_samples(self, rng):
        with pytest.raises(DataError, match="samples"):
            duration_distance(
                load_duration_curve(series_of(rng.random(50)), "summer"),
                load_duration_curve(series_of(rng.random(200)), "winter"),
                q=100)


class TestThresholdFit:
    def test_maximises_f_score(self):
        distances = [0.1, 0.2, 0.9, 1.1, 1.3]
        labels = [0, 0, 1, 1, 1]
        t = fit_distance_threshold(distances, labels)
        assert 0.2 < t < 0.9
        pred = [int(d >= t) for d in distances]
        assert pred == labels

    def test_quantile_count_is_a_knee(self):
        """The default q sits where the sweep has flattened: coarser and
        finer resamplings change the fitted split quality by little."""
        cfg = build_run_config({}, {
            "scenario": "heating", "n_consumers": "60", "days": "10"})
        series, truth = simulate_population(cfg.population_config())
        train_ids, test_ids = split_ids(sorted(truth.entries),
                                        cfg.split_fraction, cfg.split_seed)
        f_scores = {}
        for q in (50, 100, 200):
            dists = {}
            for s in series:
                summer, winter = summer_winter(clean_series(s))
                dists[s.consumer_id] = duration_distance(
                    load_duration_curve(summer, "summer"),
                    load_duration_curve(winter, "winter"), q)
            t = fit_distance_threshold([dists[c] for c in train_ids],
                                       [truth[c].label for c in train_ids])
            tp = fp = fn = 0
            for c in test_ids:
                pred = int(dists[c] >= t)
                actual = truth[c].label
                tp += pred and actual
                fp += pred and not actual
                fn += (not pred) and actual
            f_scores[q] = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
        assert f_scores[100] >= max(f_scores.values()) - 0.05
