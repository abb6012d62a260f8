import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cycache import ParameterError, build_placement_matrix, cache_contents

K_T = st.integers(2, 40).flatmap(lambda K: st.tuples(st.just(K), st.integers(1, K - 1)))


class TestBuild:
    def test_reference_matrix(self):
        V = build_placement_matrix(6, 2)
        rows = [V.row_string(p) for p in range(1, 7)]
        assert rows == ["110000", "011000", "001100", "000110", "000011", "100001"]

    def test_single_unit_cache_is_identity(self):
        V = build_placement_matrix(4, 1)
        assert np.array_equal(V.entries, np.eye(4, dtype=np.uint8))

    def test_wraparound_row(self):
        V = build_placement_matrix(8, 2)
        assert V.row_string(1) == "11000000"
        assert V.row_string(8) == "10000001"

    def test_rejects_t_not_below_K(self):
        with pytest.raises(ParameterError):
            build_placement_matrix(4, 4)
        with pytest.raises(ParameterError):
            build_placement_matrix(4, 0)

    def test_entries_are_read_only(self):
        V = build_placement_matrix(5, 2)
        with pytest.raises(ValueError):
            V.entries[0, 0] = 0


class TestCacheContents:
    def test_example_users(self):
        V = build_placement_matrix(6, 2)
        assert cache_contents(V, 1).packet_indices == {1, 6}
        assert cache_contents(V, 2).packet_indices == {1, 2}

    def test_identity_cache(self):
        V = build_placement_matrix(4, 1)
        assert cache_contents(V, 3).packet_indices == {3}

    def test_user_out_of_range(self):
        V = build_placement_matrix(4, 1)
        with pytest.raises(IndexError):
            cache_contents(V, 5)
        with pytest.raises(IndexError):
            cache_contents(V, 0)


class TestInvariants:
    @given(K_T)
    def test_row_and_column_sums_are_t(self, kt):
        K, t = kt
        V = build_placement_matrix(K, t)
        assert np.all(V.entries.sum(axis=0) == t)
        assert np.all(V.entries.sum(axis=1) == t)

    @given(K_T)
    def test_rows_are_circular_shifts(self, kt):
        K, t = kt
        V = build_placement_matrix(K, t)
        for p in range(2, K + 1):
            assert np.array_equal(
                V.entries[p - 1], np.roll(V.entries[p - 2], 1)
            )

    @given(K_T)
    def test_neighbour_caches_differ_by_one_swap(self, kt):
        K, t = kt
        V = build_placement_matrix(K, t)
        for user in range(1, K + 1):
            a = cache_contents(V, user).packet_indices
            b = cache_contents(V, user % K + 1).packet_indices
            assert len(a - b) == 1 and len(b - a) == 1
