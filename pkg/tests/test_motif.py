import math
from datetime import date

import numpy as np
import pytest

from loadmotif import (DataError, DayMatrix, MaskSpec, UsageError,
                       distance_table, extract_motif, kernel_counters,
                       reset_kernel_counters, similarity_profile,
                       update_motif)
from loadmotif.motif import (THRESHOLD_DYNAMIC_MEDIAN, DistanceTable,
                             offdiagonal_distances_of)


def brute_force_profile(d, threshold):
    """Direct transcription of the count / average-distance / profile
    formulas in plain Python floats; the oracle for bitwise checks."""
    n = len(d)
    c_hat, d_hat = [], []
    for i in range(n):
        c, s = 0, 0.0
        for j in range(n):
            if j == i:
                continue
            s += d[i][j]
            if d[i][j] <= threshold:
                c += 1
        c_hat.append(c)
        d_hat.append(s / (n - 1))
    max_d = max(d[i][j] for i in range(n) for j in range(n) if j != i)
    if max_d == 0.0:
        sp = [float(c) for c in c_hat]
    else:
        sp = [c_hat[i] - d_hat[i] / max_d for i in range(n)]
    return sp, c_hat, d_hat, max_d


def day_matrix(rows, cid="C1"):
    return DayMatrix(consumer_id=cid, rows=np.asarray(rows, float),
                     day_index_origin=date(2021, 1, 1))


def random_table(rng, n, scale=5.0):
    d = rng.random((n, n)) * scale
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    return DistanceTable(d=d, threshold=float(rng.random() * scale),
                         mask=MaskSpec(0, 4, 4))


def random_days(rng, n, m):
    return day_matrix(rng.random((n, m)) * 2.0)


class TestDistanceTable:
    def test_identical_rows_all_zero(self):
        days = day_matrix(np.ones((4, 6)))
        table = distance_table(days, MaskSpec(0, 6, 6), 1.0)
        assert np.array_equal(table.d, np.zeros((4, 4)))

    def test_two_clusters_structure(self):
        a = np.zeros(6)
        b = np.full(6, 9.0)
        table = distance_table(day_matrix([a, a, b]), MaskSpec(0, 6, 6), 1.0)
        assert table.d[0, 1] == 0.0
        assert table.d[0, 2] > 0 and table.d[1, 2] > 0
        assert np.array_equal(table.d, table.d.T)

    def test_kernel_call_count_90_days(self, rng):
        reset_kernel_counters()
        days = random_days(rng, 90, 8)
        distance_table(days, MaskSpec(0, 8, 8), 1.0)
        assert kernel_counters()["r_dtw_calls"] == 90 * 89 // 2 == 4005

    def test_insufficient_days(self, rng):
        with pytest.raises(DataError, match="insufficient days"):
            distance_table(random_days(rng, 1, 4), MaskSpec(0, 4, 4), 1.0)

    def test_dynamic_median_mode(self, rng):
        days = random_days(rng, 8, 6)
        table = distance_table(days, MaskSpec(0, 6, 6), 123.0,
                               THRESHOLD_DYNAMIC_MEDIAN)
        assert table.threshold == np.median(offdiagonal_distances_of(table.d))


class TestSimilarityProfile:
    def test_worked_example(self):
        d = np.array([[0, 1, 5], [1, 0, 5], [5, 5, 0]], dtype=float)
        profile = similarity_profile(
            DistanceTable(d=d, threshold=2.0, mask=MaskSpec(0, 4, 4)))
        assert list(profile.c_hat) == [1, 1, 0]
        assert list(profile.d_hat) == [3.0, 3.0, 5.0]
        assert profile.max_d == 5.0
        assert list(profile.sp) == [0.4, 0.4, -1.0]

    def test_identical_days_convention(self):
        n = 5
        profile = similarity_profile(
            DistanceTable(d=np.zeros((n, n)), threshold=1.0,
                          mask=MaskSpec(0, 4, 4)))
        assert list(profile.sp) == [n - 1.0] * n

    def test_zero_threshold_ranks_by_average_distance(self, rng):
        table = random_table(rng, 6)
        table.threshold = 0.0
        profile = similarity_profile(table)
        assert list(profile.c_hat) == [0] * 6
        assert np.argmax(profile.sp) == np.argmin(profile.d_hat)

    def test_matches_brute_force_bitwise(self, rng):
        for _ in range(40):
            table = random_table(rng, int(rng.integers(2, 12)))
            profile = similarity_profile(table)
            sp, c_hat, d_hat, max_d = brute_force_profile(
                table.d.tolist(), table.threshold)
            assert list(profile.sp) == sp
            assert list(profile.c_hat) == c_hat
            assert list(profile.d_hat) == d_hat
            assert profile.max_d == max_d

    def test_decomposition_identity(self, rng):
        table = random_table(rng, 10)
        profile = similarity_profile(table)
        recovered = profile.sp + profile.d_hat / profile.max_d
        assert np.allclose(recovered, profile.c_hat, atol=1e-12)
        positive = profile.d_hat > 0
        assert np.array_equal(np.floor(profile.sp[positive]),
                              profile.c_hat[positive] - 1)

    def test_permutation_equivariance(self, rng):
        table = random_table(rng, 9)
        profile = similarity_profile(table)
        perm = rng.permutation(9)
        permuted = DistanceTable(d=table.d[np.ix_(perm, perm)],
                                 threshold=table.threshold, mask=table.mask)
        profile_p = similarity_profile(permuted)
        # Equal up to summation rounding; the ranking must agree exactly.
        assert np.allclose(profile_p.sp, profile.sp[perm], rtol=1e-12)
        assert np.array_equal(profile_p.c_hat, profile.c_hat[perm])

    def test_saturated_count_ranks_by_average(self, rng):
        days = random_days(rng, 7, 5)
        table = distance_table(days, MaskSpec(0, 5, 5), math.inf)
        profile = similarity_profile(table)
        assert list(profile.c_hat) == [6] * 7
        assert np.array_equal(np.argsort(profile.sp), np.argsort(-profile.d_hat))


class TestExtractMotif:
    def test_tie_breaks_to_smallest_index(self):
        days = day_matrix(np.arange(12.0).reshape(3, 4))
        d = np.array([[0, 1, 5], [1, 0, 5], [5, 5, 0]], dtype=float)
        profile = similarity_profile(
            DistanceTable(d=d, threshold=2.0, mask=MaskSpec(0, 4, 4)))
        motif = extract_motif(days, profile)
        assert motif.source_day_index == 0
        assert motif.sp_value == 0.4

    def test_unique_max(self, rng):
        days = random_days(rng, 9, 4)
        table = random_table(rng, 9)
        profile = similarity_profile(table)
        profile.sp[7] = 99.0
        motif = extract_motif(days, profile)
        assert motif.source_day_index == 7
        assert np.array_equal(motif.values, days.rows[7])

    def test_motif_is_exact_row(self, rng):
        for _ in range(10):
            days = random_days(rng, int(rng.integers(2, 9)), 5)
            table = distance_table(days, MaskSpec(1, 4, 5), 1.0)
            motif = extract_motif(days, similarity_profile(table))
            assert any(np.array_equal(motif.values, row) for row in days.rows)

    def test_length_mismatch(self, rng):
        days = random_days(rng, 4, 4)
        profile = similarity_profile(random_table(rng, 5))
        with pytest.raises(UsageError):
            extract_motif(days, profile)


class TestUpdateMotif:
    def setup_state(self, rng, n, m=6):
        days = random_days(rng, n, m)
        mask = MaskSpec(1, m - 1, m)
        table = distance_table(days, mask, 1.5)
        return days, mask, table, similarity_profile(table)

    def test_duplicate_of_motif_increments_count(self, rng):
        days, mask, table, profile = self.setup_state(rng, 6)
        motif = extract_motif(days, profile)
        before = profile.c_hat[motif.source_day_index]
        _, _, profile2, motif2 = update_motif(
            table, days, profile, days.rows[motif.source_day_index])
        assert profile2.c_hat[motif.source_day_index] == before + 1
        assert motif2.source_day_index == motif.source_day_index

    def test_distant_day_leaves_counts(self, rng):
        days, mask, table, profile = self.setup_state(rng, 5)
        far = np.full(6, 1e6)
        _, _, profile2, _ = update_motif(table, days, profile, far)
        assert np.array_equal(profile2.c_hat[:5], profile.c_hat)

    def test_matches_full_recompute_bitwise(self, rng):
        days, mask, table, profile = self.setup_state(rng, 5)
        for _ in range(15):
            new_day = rng.random(6) * 2.0
            table, days, profile, motif = update_motif(
                table, days, profile, new_day)
            fresh = similarity_profile(
                distance_table(days, mask, table.threshold))
            assert np.array_equal(profile.sp, fresh.sp)
            assert np.array_equal(profile.c_hat, fresh.c_hat)
            assert np.array_equal(profile.d_hat, fresh.d_hat)
            assert motif.source_day_index == extract_motif(
                days, fresh).source_day_index

    def test_costs_exactly_n_kernel_calls(self, rng):
        days, mask, table, profile = self.setup_state(rng, 8)
        reset_kernel_counters()
        update_motif(table, days, profile, rng.random(6))
        assert kernel_counters()["r_dtw_calls"] == 8

    def test_mask_mismatch(self, rng):
        days, mask, table, profile = self.setup_state(rng, 4)
        with pytest.raises(UsageError):
            update_motif(table, days, profile, rng.random(9))

    def test_refuses_dynamic_threshold(self, rng):
        days = random_days(rng, 5, 6)
        mask = MaskSpec(0, 6, 6)
        table = distance_table(days, mask, 0.0, THRESHOLD_DYNAMIC_MEDIAN)
        profile = similarity_profile(table)
        with pytest.raises(UsageError, match="fixed threshold"):
            update_motif(table, days, profile, rng.random(6))
