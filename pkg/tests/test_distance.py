import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loadmotif import (MaskSpec, UsageError, build_weight_matrix, dtw,
                       euclidean, kernel_counters, r_dtw,
                       reset_kernel_counters, z_normalize)


def brute_force_warp(x, y, w=None):
    """Independent oracle: minimum path cost over every monotone warping
    path from (0, 0) to (m-1, m-1), by explicit enumeration."""
    m = len(x)

    def cell(i, j):
        scale = 1.0 if w is None else w[i][j]
        return scale * (x[i] - y[j]) ** 2

    best = [math.inf]

    def walk(i, j, cost):
        cost = cost + cell(i, j)
        if i == m - 1 and j == m - 1:
            best[0] = min(best[0], cost)
            return
        if i + 1 < m and j + 1 < m:
            walk(i + 1, j + 1, cost)
        if i + 1 < m:
            walk(i + 1, j, cost)
        if j + 1 < m:
            walk(i, j + 1, cost)

    walk(0, 0, 0.0)
    return math.sqrt(best[0])


small = st.lists(st.floats(-5, 5), min_size=1, max_size=4)
pair = st.integers(1, 4).flatmap(
    lambda m: st.tuples(
        st.lists(st.floats(-5, 5), min_size=m, max_size=m),
        st.lists(st.floats(-5, 5), min_size=m, max_size=m),
    )
)


class TestEuclidean:
    def test_three_four_five(self):
        assert euclidean([0, 0], [3, 4]) == 5.0

    def test_identity(self, rng):
        x = rng.random(7)
        assert euclidean(x, x) == 0.0

    def test_direct_arithmetic(self):
        assert euclidean([1, 2, 3], [2, 4, 6]) == pytest.approx(math.sqrt(14))

    def test_length_mismatch(self):
        with pytest.raises(UsageError):
            euclidean([1, 2], [1, 2, 3])


class TestDtw:
    def test_identity_alignment(self, rng):
        x = rng.random(12)
        assert dtw(x, x) == 0.0

    def test_time_shift_tolerance(self):
        # The pattern shifted by one sample warps to cost zero while the
        # pointwise distance sees a full unit of difference.
        assert dtw([0, 0, 1], [0, 1, 1]) == 0.0
        assert euclidean([0, 0, 1], [0, 1, 1]) == 1.0

    def test_single_cell(self):
        assert dtw([0.0], [3.0]) == 3.0

    def test_against_path_enumeration(self, rng):
        for _ in range(50):
            m = rng.integers(1, 5)
            x, y = rng.normal(size=m), rng.normal(size=m)
            assert dtw(x, y) == pytest.approx(brute_force_warp(x, y), abs=1e-12)

    @given(pair)
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, xy):
        x, y = xy
        assert dtw(x, y) == dtw(y, x)

    @given(pair)
    @settings(max_examples=60, deadline=None)
    def test_never_exceeds_euclidean(self, xy):
        x, y = xy
        assert dtw(x, y) <= euclidean(x, y)

    def test_length_mismatch(self):
        with pytest.raises(UsageError):
            dtw([1.0], [1.0, 2.0])


class TestRdtw:
    def test_all_ones_reduces_to_dtw(self, rng):
        w = np.ones((6, 6))
        for _ in range(20):
            x, y = rng.normal(size=6), rng.normal(size=6)
            assert r_dtw(x, y, w) == dtw(x, y)

    def test_all_zeros(self, rng):
        w = np.zeros((5, 5))
        x, y = rng.normal(size=5), rng.normal(size=5)
        assert r_dtw(x, y, w) == 0.0

    def test_hand_unrolled_two_sample_case(self):
        # w = [0, 1] gives W = [[0, 1], [1, 1]]; the cheap corner cells
        # let the alignment dodge both weighted mismatches entirely.
        w = build_weight_matrix(MaskSpec(1, 2, 2))
        assert np.array_equal(w.entries, [[0, 1], [1, 1]])
        assert r_dtw([5, 1], [0, 1], w) == 0.0

    def test_against_weighted_path_enumeration(self, rng):
        for _ in range(50):
            m = int(rng.integers(1, 5))
            x, y = rng.normal(size=m), rng.normal(size=m)
            w = rng.random((m, m))
            w = (w + w.T) / 2
            assert r_dtw(x, y, w) == pytest.approx(
                brute_force_warp(x, y, w), abs=1e-12)

    def test_monotone_in_weights(self, rng):
        for _ in range(30):
            m = int(rng.integers(2, 6))
            x, y = rng.normal(size=m), rng.normal(size=m)
            w1 = rng.random((m, m))
            w2 = w1 + rng.random((m, m))
            assert r_dtw(x, y, w1) <= r_dtw(x, y, w2)

    def test_symmetry_with_symmetric_weights(self, rng):
        m = 5
        w = rng.random((m, m))
        w = (w + w.T) / 2
        for _ in range(20):
            x, y = rng.normal(size=m), rng.normal(size=m)
            assert r_dtw(x, y, w) == r_dtw(y, x, w)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(UsageError):
            r_dtw([1.0, 2.0], [1.0, 2.0], np.ones((3, 3)))


class TestInstrumentation:
    def test_quadratic_cell_count(self, rng):
        reset_kernel_counters()
        m = 9
        dtw(rng.random(m), rng.random(m))
        assert kernel_counters()["dp_cells"] == m * m
        r_dtw(rng.random(m), rng.random(m), np.ones((m, m)))
        assert kernel_counters()["dp_cells"] == 2 * m * m

    def test_call_counters(self, rng):
        reset_kernel_counters()
        x, y = rng.random(4), rng.random(4)
        dtw(x, y)
        dtw(x, y)
        r_dtw(x, y, np.ones((4, 4)))
        counts = kernel_counters()
        assert counts["dtw_calls"] == 2
        assert counts["r_dtw_calls"] == 1


class TestZNormalize:
    def test_constant_maps_to_zero(self):
        assert np.array_equal(z_normalize([1, 1, 1, 1]), [0, 0, 0, 0])

    def test_population_convention(self):
        assert np.array_equal(z_normalize([0.0, 2.0]), [-1.0, 1.0])

    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=30))
    @settings(max_examples=60, deadline=None)
    def test_zero_mean(self, xs):
        assert np.mean(z_normalize(xs)) == pytest.approx(0.0, abs=1e-9)

    def test_too_short(self):
        with pytest.raises(UsageError):
            z_normalize([1.0])
