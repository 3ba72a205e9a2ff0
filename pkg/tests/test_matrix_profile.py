from datetime import datetime

import numpy as np
import pytest

from loadmotif import ConsumerSeries, DataError, matrix_profile_motif, z_normalize
from loadmotif.motif import znormalized_windows


def series_of(values, interval=30):
    return ConsumerSeries(
        consumer_id="C1",
        start_time=datetime(2021, 1, 1),
        interval_minutes=interval,
        values=np.asarray(values, float),
    )


def test_windows_match_z_normalize(rng):
    values = rng.random(200)
    zw = znormalized_windows(values, 24)
    for i in (0, 57, 176):
        assert np.array_equal(zw[i], z_normalize(values[i : i + 24]))


def test_recovers_planted_pattern(rng):
    m = 24
    noise = 1.0 + 0.2 * rng.standard_normal(600)
    planted = 2.0 + np.sin(np.linspace(0, 3 * np.pi, m))
    noise[50 : 50 + m] = planted
    noise[400 : 400 + m] = planted
    motif = matrix_profile_motif(series_of(noise), m)
    assert motif.source_day_index == 50
    assert np.array_equal(motif.values, planted)
    assert motif.sp_value == 0.0  # identical copies after z-normalisation


def test_constant_series_ties_to_first_window():
    m = 10
    motif = matrix_profile_motif(series_of(np.full(2 * m, 3.0)), m)
    assert motif.source_day_index == 0
    assert np.array_equal(motif.values, np.full(m, 3.0))


def test_overlapping_trivial_match_is_excluded(rng):
    # A period-3 stretch makes windows 10 and 13 exactly equal, but at
    # separation 3 < ceil(8/2) they are a trivial match; the exact pair
    # planted farther apart must win instead.
    m = 8
    values = 5.0 + rng.standard_normal(100)
    values[10:21] = np.tile([9.0, 1.0, 5.0], 4)[:11]
    shape = np.array([9, 1, 8, 2, 7, 3, 6, 4], dtype=float)
    values[40:48] = shape
    values[60:68] = shape
    motif = matrix_profile_motif(series_of(values), m)
    assert motif.sp_value == 0.0
    assert motif.source_day_index == 40


def test_boundary_length_admits_exactly_the_disjoint_pair():
    m = 6
    values = np.arange(2 * m, dtype=float)
    motif = matrix_profile_motif(series_of(values), m)
    assert motif.source_day_index >= 0  # well-posed at n == 2m

    with pytest.raises(DataError, match="too short"):
        matrix_profile_motif(series_of(values[:-1]), m)
