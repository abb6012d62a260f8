import numpy as np
import pytest

from cycache import (
    ParameterError,
    SchemeParams,
    apply_phantoms,
    build_placement_matrix,
    build_plan,
    build_scheme_plan,
    elevate_placement,
    filter_phantom_streams,
    grouping_map,
    verify_plan,
    virtual_params,
)
from cycache.params import red_counts


def params(K, t, L, alpha, K_f=0):
    return SchemeParams(K=K, t=t, L=L, alpha=alpha, K_f=K_f)


class TestVirtualParams:
    def test_example_network(self):
        vp = virtual_params(params(8, 2, 5, 4))
        assert (vp.K, vp.t, vp.alpha, vp.L) == (4, 1, 2, 2)
        assert vp.K * (vp.t + vp.alpha) == 12

    def test_coprime_is_identity(self):
        vp = virtual_params(params(6, 2, 3, 3))
        assert (vp.K, vp.t, vp.alpha) == (6, 2, 3)

    def test_large_network(self):
        vp = virtual_params(params(100, 15, 30, 15))
        assert (vp.K, vp.t, vp.alpha) == (20, 3, 3)
        assert vp.K * (vp.t + vp.alpha) == 120


class TestElevatePlacement:
    def test_pairs_share_virtual_cache(self):
        p = params(8, 2, 5, 4)
        gmap = grouping_map(p)
        vp = virtual_params(p)
        cache = elevate_placement(build_placement_matrix(vp.K, vp.t), gmap)
        assert cache.shape == (4, 8)
        for user, packet in [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (6, 3), (7, 4), (8, 4)]:
            assert cache[packet - 1, user - 1] == 1
        assert cache.sum() == 8  # t' = 1 packet per user

    def test_identity_group_keeps_placement(self):
        p = params(6, 2, 3, 3)
        V = build_placement_matrix(6, 2)
        assert np.array_equal(elevate_placement(V, grouping_map(p)), V.entries)

    def test_pairwise_groups_k12(self):
        p = params(12, 2, 4, 4)
        gmap = grouping_map(p)
        assert gmap.phi == 2 and gmap.n_groups == 6
        vp = virtual_params(p)
        cache = elevate_placement(build_placement_matrix(vp.K, vp.t), gmap)
        for g in range(1, 7):
            u1, u2 = gmap.members(g)
            assert np.array_equal(cache[:, u1 - 1], cache[:, u2 - 1])
            assert cache[:, u1 - 1].sum() == vp.t


def red_plan(K, t, L, alpha, K_f=0, policy="skip"):
    return build_scheme_plan(params(K, t, L, alpha, K_f), "RED", policy)


class TestElevatePlan:
    def test_example_first_transmission(self):
        plan = red_plan(8, 2, 5, 4)
        tx = plan.transmissions[0]
        got = [(s.user, s.packet, set(s.suppress_at)) for s in tx.streams]
        assert got == [
            (1, 2, {5, 6, 2}),
            (2, 2, {5, 6, 1}),
            (3, 1, {5, 6, 4}),
            (4, 1, {5, 6, 3}),
            (5, 1, {3, 4, 6}),
            (6, 1, {3, 4, 5}),
        ]

    def test_example_totals_and_checks(self):
        plan = red_plan(8, 2, 5, 4)
        assert len(plan.transmissions) == 12
        assert plan.subpacketization == 12
        assert plan.n_subpackets == 3  # coverage multiplicity t' + alpha'
        assert all(
            len(s.suppress_at) == 3 for tx in plan.transmissions for s in tx.streams
        )
        assert verify_plan(plan).passed

    def test_identity_group_reproduces_base_plan(self):
        p = params(6, 2, 3, 3)
        base = build_plan(p, build_placement_matrix(6, 2))
        red = red_plan(6, 2, 3, 3)
        for tx_a, tx_b in zip(red.transmissions, base.transmissions):
            assert [(s.user, s.packet, s.subpacket, s.suppress_at) for s in tx_a.streams] == [
                (s.user, s.packet, s.subpacket, s.suppress_at) for s in tx_b.streams
            ]

    def test_group_ids_follow_contiguous_rule(self):
        plan = red_plan(8, 2, 5, 4)
        assert plan.groups == (1, 1, 2, 2, 3, 3, 4, 4)
        for tx in plan.transmissions:
            for s in tx.streams:
                assert s.group == (s.user - 1) // 2 + 1

    def test_elevated_suppress_size_identity(self):
        # (alpha/phi - 1) phi + phi - 1 == alpha - 1 for any divisor split
        for K, t, alpha in [(12, 2, 4), (12, 3, 3), (16, 4, 4), (18, 3, 6)]:
            plan = red_plan(K, t, alpha, alpha)
            assert all(
                len(s.suppress_at) == alpha - 1
                for tx in plan.transmissions
                for s in tx.streams
            )
            assert verify_plan(plan).passed


class TestPhantoms:
    def test_gcd_jump_reduces_subpacketization(self):
        scheme = apply_phantoms(params(100, 7, 20, 14, K_f=5))
        assert scheme.effective.K == 105
        assert scheme.effective.phi == 7
        assert scheme.phantoms == frozenset(range(101, 106))
        assert red_counts(105, 7, 14)[0] == 45

    def test_no_phantoms_is_identity(self):
        scheme = apply_phantoms(params(6, 2, 3, 3))
        assert scheme.effective.K == 6
        assert scheme.phantoms == frozenset()

    def test_table_row_with_two_phantoms(self):
        p = params(30, 4, 8, 4, K_f=2)
        assert p.phi == 4
        assert red_counts(p.K_eff, p.t, p.alpha)[0] == 16
        plan = build_scheme_plan(p, "RED")
        assert plan.subpacketization == 16

    def test_real_coverage_survives_filtering(self):
        plan = build_scheme_plan(params(30, 4, 8, 4, K_f=2), "RED")
        assert plan.n_real_users == 30
        report = verify_plan(plan)
        assert report.passed
        # no stream belongs to a phantom and none suppresses at one
        for tx in plan.transmissions:
            for s in tx.streams:
                assert s.user <= 30
                assert all(u <= 30 for u in s.suppress_at)

    def test_empty_slots_skipped_or_kept(self):
        # Two whole groups are phantom, so transmissions serving only those
        # groups lose every stream.
        p = params(4, 2, 2, 2, K_f=4)
        skip = build_scheme_plan(p, "RED", "skip")
        keep = build_scheme_plan(p, "RED", "keep")
        assert len(keep.transmissions) == 12  # virtual K'(K'-t') = 4*3
        assert len(skip.transmissions) == 10
        idle = [tx for tx in keep.transmissions if not tx.streams]
        assert len(idle) == 2
        assert all(tx.idle_streams for tx in idle)
        assert verify_plan(skip).passed
        assert verify_plan(keep).passed

    def test_filter_is_noop_without_phantoms(self):
        base = build_plan(params(6, 2, 3, 3), build_placement_matrix(6, 2))
        assert filter_phantom_streams(base, 6) is base

    def test_bad_policy_rejected(self):
        with pytest.raises(ParameterError):
            build_scheme_plan(params(4, 2, 2, 2, K_f=4), "RED", "drop")
