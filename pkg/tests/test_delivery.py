import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cycache import (
    PlanConsistencyError,
    SchemeParams,
    build_placement_matrix,
    build_plan,
    index_vectors,
    interference_set,
    mod1,
    shift_check,
    verify_plan,
)

P6 = SchemeParams(K=6, t=2, L=3, alpha=3)

# (j, r) -> (user vector, packet vector) for the 6-user reference network
ROUND1 = {
    1: ((1, 2, 3, 4, 5), (3, 3, 1, 1, 1)),
    2: ((1, 2, 4, 5, 6), (4, 4, 1, 1, 1)),
    3: ((1, 2, 5, 6, 3), (5, 5, 1, 1, 1)),
    4: ((1, 2, 6, 3, 4), (2, 6, 1, 1, 1)),
}
ROUND2 = {
    1: ((2, 3, 4, 5, 6), (4, 4, 2, 2, 2)),
    2: ((2, 3, 5, 6, 1), (5, 5, 2, 2, 2)),
    3: ((2, 3, 6, 1, 4), (6, 6, 2, 2, 2)),
    4: ((2, 3, 1, 4, 5), (3, 1, 2, 2, 2)),
}


def small_configs():
    for K in range(2, 13):
        for t in range(1, K):
            for alpha in range(t, K - t + 1):
                yield K, t, alpha


def make_plan(K, t, alpha):
    params = SchemeParams(K=K, t=t, L=alpha, alpha=alpha)
    return build_plan(params, build_placement_matrix(K, t))


class TestMod1:
    def test_modulus_maps_to_itself(self):
        assert mod1(6, 6) == 6

    def test_wraps_past_modulus(self):
        assert mod1(7, 6) == 1

    def test_identity_below_modulus(self):
        assert mod1(3, 6) == 3

    @given(st.integers(-100, 100), st.integers(1, 50))
    def test_range_and_shift_axioms(self, a, b):
        assert 1 <= mod1(a, b) <= b
        assert mod1(a + b, b) == mod1(a, b)


class TestIndexVectors:
    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_round_one(self, j):
        assert index_vectors(P6, j, 1) == ROUND1[j]

    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_round_two(self, j):
        assert index_vectors(P6, j, 2) == ROUND2[j]

    def test_eight_user_network(self):
        p = SchemeParams(K=8, t=2, L=4, alpha=4)
        assert index_vectors(p, 1, 1) == ((1, 2, 3, 4, 5, 6), (3, 3, 1, 1, 1, 1))

    def test_bad_indices(self):
        with pytest.raises(IndexError):
            index_vectors(P6, 5, 1)
        with pytest.raises(IndexError):
            index_vectors(P6, 1, 7)
        with pytest.raises(IndexError):
            index_vectors(P6, 0, 1)


class TestInterferenceSet:
    def test_first_transmission_sets(self):
        V = build_placement_matrix(6, 2)
        k, p = ROUND1[1]
        expected = [{2, 5}, {1, 5}, {4, 5}, {3, 5}, {3, 4}]
        got = [interference_set(V, k, p, n) for n in range(1, 6)]
        assert got == [frozenset(e) for e in expected]

    def test_inconsistent_vectors_raise(self):
        V = build_placement_matrix(6, 2)
        # all-ones packet vector is not a valid schedule row: position 1
        # sees three non-caching served users instead of alpha-1 = 2
        with pytest.raises(PlanConsistencyError):
            interference_set(V, (1, 2, 3, 4, 5), (1, 1, 1, 1, 1), 1)

    def test_position_out_of_range(self):
        V = build_placement_matrix(6, 2)
        k, p = ROUND1[1]
        with pytest.raises(IndexError):
            interference_set(V, k, p, 6)


class TestBuildPlan:
    def test_transmission_count(self):
        plan = make_plan(6, 2, 3)
        assert len(plan.transmissions) == 24
        assert plan.subpacketization == 30
        assert plan.payload == pytest.approx(1 / 30)

    def test_first_transmission_matches_worked_example(self):
        plan = make_plan(6, 2, 3)
        tx = plan.transmissions[0]
        assert tx.users == (1, 2, 3, 4, 5)
        assert tx.packets == (3, 3, 1, 1, 1)
        assert [s.subpacket for s in tx.streams] == [1, 1, 1, 1, 1]
        assert [sorted(s.suppress_at) for s in tx.streams] == [
            [2, 5],
            [1, 5],
            [4, 5],
            [3, 5],
            [3, 4],
        ]

    def test_subpacket_counter_walks_in_appearance_order(self):
        plan = make_plan(6, 2, 3)
        hits = [
            (tx.slot, s.subpacket)
            for tx in plan.transmissions[:4]
            for s in tx.streams
            if s.user == 3 and s.packet == 1
        ]
        assert hits == [(1, 1), (3, 2), (4, 3)]

    def test_final_counters(self):
        plan = make_plan(6, 2, 3)
        for user in range(1, 7):
            for packet in range(1, 7):
                if plan.caches(packet, user):
                    assert (user, packet) not in plan.counters
                else:
                    assert plan.counters[(user, packet)] == 6

    def test_minimal_network(self):
        plan = make_plan(4, 1, 1)
        assert len(plan.transmissions) == 12
        assert all(len(tx.streams) == 2 for tx in plan.transmissions)

    def test_mismatched_placement_rejected(self):
        from cycache import ParameterError

        with pytest.raises(ParameterError):
            build_plan(P6, build_placement_matrix(8, 2))

    def test_oversized_alpha_rejected(self):
        from cycache import ParameterError

        p = SchemeParams(K=6, t=2, L=5, alpha=5)  # alpha > K - t
        with pytest.raises(ParameterError, match="alpha <= K"):
            build_plan(p, build_placement_matrix(6, 2))


class TestVerifyPlan:
    def test_reference_plan_passes_with_full_coverage(self):
        plan = make_plan(6, 2, 3)
        assert verify_plan(plan).passed
        assert sum(len(tx.streams) for tx in plan.transmissions) == 120

    def test_corrupted_packet_is_caught(self):
        plan = make_plan(6, 2, 3)
        tx = plan.transmissions[0]
        bad_stream = dataclasses.replace(tx.streams[0], packet=4)
        bad_tx = dataclasses.replace(tx, streams=(bad_stream,) + tx.streams[1:])
        bad = dataclasses.replace(
            plan, transmissions=(bad_tx,) + plan.transmissions[1:]
        )
        report = verify_plan(bad)
        assert not report.passed
        assert any("coverage deficit" in v for v in report.violations)

    def test_eight_user_plan_passes(self):
        assert verify_plan(make_plan(8, 2, 4)).passed


class TestShiftCheck:
    def test_reference_plans(self):
        assert shift_check(make_plan(6, 2, 3))
        assert shift_check(make_plan(8, 2, 4))

    def test_permuted_round_fails(self):
        plan = make_plan(6, 2, 3)
        txs = list(plan.transmissions)
        # swap the slots of round 2 (indices 4..7)
        a, b = txs[4], txs[5]
        txs[4] = dataclasses.replace(b, slot=a.slot)
        txs[5] = dataclasses.replace(a, slot=b.slot)
        assert not shift_check(dataclasses.replace(plan, transmissions=tuple(txs)))


class TestStructuralInvariants:
    @pytest.mark.parametrize("K,t,alpha", [(6, 2, 3), (8, 2, 4), (9, 3, 3), (12, 2, 5)])
    def test_distinct_users_and_suppression_budget(self, K, t, alpha):
        plan = make_plan(K, t, alpha)
        for tx in plan.transmissions:
            assert len(set(tx.users)) == t + alpha
            assert sum(len(s.suppress_at) for s in tx.streams) == (t + alpha) * (alpha - 1)

    def test_round_one_structural_split(self):
        for K, t, alpha in [(6, 2, 3), (8, 2, 4), (10, 3, 4)]:
            p = SchemeParams(K=K, t=t, L=alpha, alpha=alpha)
            for j in range(1, K - t + 1):
                k, pv = index_vectors(p, j, 1)
                assert k[:t] == tuple(range(1, t + 1))
                assert pv[t:] == (1,) * alpha

    @given(st.sampled_from(list(small_configs())))
    @settings(max_examples=40, deadline=None)
    def test_random_small_configs_verify(self, cfg):
        K, t, alpha = cfg
        assert verify_plan(make_plan(K, t, alpha)).passed
