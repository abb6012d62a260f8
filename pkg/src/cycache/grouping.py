"""User grouping: the RED scheme and phantom-user tuning.

With phi = gcd(K, t, alpha) > 1 the network maps onto a virtual one of
K/phi users (gains t/phi and alpha/phi).  The base scheme runs there and
the result is elevated back: every user of group k' inherits the virtual
user's cache, and each virtual stream expands into phi streams whose
suppress sets combine the other own-group members with the full membership
of every suppressed virtual group, restoring size alpha-1 exactly.

Phantom users are fictitious trailing users K+1 .. K+K_f appended only to
enlarge the gcd; their streams are dropped before beamforming.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from types import MappingProxyType

import numpy as np

from .delivery import StreamDescriptor, Transmission, TransmissionPlan, build_plan
from .errors import ParameterError
from .params import SchemeParams, validate
from .placement import PlacementMatrix, build_placement_matrix

__all__ = [
    "GroupingMap",
    "PhantomScheme",
    "grouping_map",
    "virtual_params",
    "elevate_placement",
    "elevate_plan",
    "apply_phantoms",
    "filter_phantom_streams",
    "build_scheme_plan",
]

SLOT_POLICIES = ("skip", "keep")


@dataclass(frozen=True)
class GroupingMap:
    """Contiguous partition of [K] into K/phi groups of phi users each."""

    K: int
    phi: int

    def __post_init__(self):
        if self.phi < 1 or self.K % self.phi:
            raise ParameterError(f"phi={self.phi} must divide K={self.K}")

    @property
    def n_groups(self) -> int:
        return self.K // self.phi

    def members(self, group: int) -> tuple[int, ...]:
        if not 1 <= group <= self.n_groups:
            raise IndexError(f"group {group} outside [1, {self.n_groups}]")
        lo = self.phi * (group - 1) + 1
        return tuple(range(lo, lo + self.phi))

    def group_of(self, user: int) -> int:
        if not 1 <= user <= self.K:
            raise IndexError(f"user {user} outside [1, {self.K}]")
        return (user - 1) // self.phi + 1


def grouping_map(params: SchemeParams) -> GroupingMap:
    return GroupingMap(K=params.K_eff, phi=params.phi)


def virtual_params(params: SchemeParams) -> SchemeParams:
    """Parameters of the virtual network: (K, t, alpha)/phi with L' = alpha'.

    phi = 1 degenerates to the original parameters (with phantoms already
    folded into K).
    """
    validate(params)
    phi = params.phi
    return SchemeParams(
        K=params.K_eff // phi,
        t=params.t // phi,
        L=params.alpha // phi,
        alpha=params.alpha // phi,
        N=max(params.N, params.K_eff // phi),
        f=params.f,
    )


def elevate_placement(virtual_placement: PlacementMatrix, gmap: GroupingMap) -> np.ndarray:
    """Per-user cache over the original network: column k of group k' copies
    virtual user k''s column.  Shape (K', K)."""
    if virtual_placement.K != gmap.n_groups:
        raise ParameterError(
            f"virtual placement has {virtual_placement.K} users, expected "
            f"{gmap.n_groups} groups"
        )
    cols = [
        virtual_placement.entries[:, gmap.group_of(u) - 1]
        for u in range(1, gmap.K + 1)
    ]
    return np.stack(cols, axis=1).astype(np.uint8)


def elevate_plan(
    virtual_plan: TransmissionPlan,
    gmap: GroupingMap,
    params: SchemeParams,
) -> TransmissionPlan:
    """Expand each virtual stream into one stream per group member.

    The elevated suppress set of user k in group k' is
    (group(k') minus k) union the members of every virtual group in the
    virtual suppress set; its size is (phi-1) + (alpha'-1)phi = alpha-1.
    """
    validate(params)
    alpha = params.alpha
    counters: dict[tuple[int, int], int] = {}
    transmissions = []
    for tx in virtual_plan.transmissions:
        streams = []
        pos = 0
        for vs in tx.streams:
            expanded = set()
            for vg in vs.suppress_at:
                expanded.update(gmap.members(vg))
            own = gmap.members(vs.user)
            for user in own:
                pos += 1
                suppress = (set(own) - {user}) | expanded
                if len(suppress) != alpha - 1:
                    raise ParameterError(
                        f"elevated suppress set has {len(suppress)} members, "
                        f"expected alpha-1 = {alpha - 1}"
                    )
                counters[(user, vs.packet)] = vs.subpacket + 1
                streams.append(
                    StreamDescriptor(
                        position=pos,
                        user=user,
                        packet=vs.packet,
                        subpacket=vs.subpacket,
                        suppress_at=frozenset(suppress),
                        group=vs.user,
                    )
                )
        transmissions.append(
            Transmission(round_index=tx.round_index, slot=tx.slot, streams=tuple(streams))
        )
    cache = np.stack(
        [
            virtual_plan.cache_matrix[:, gmap.group_of(u) - 1]
            for u in range(1, gmap.K + 1)
        ],
        axis=1,
    ).astype(np.uint8)
    return TransmissionPlan(
        params=params,
        cache_matrix=cache,
        transmissions=tuple(transmissions),
        counters=MappingProxyType(counters),
        n_subpackets=virtual_plan.n_subpackets,
        suppress_size=alpha - 1,
        payload=virtual_plan.payload,
        scheme="RED",
        groups=tuple(gmap.group_of(u) for u in range(1, gmap.K + 1)),
    )


@dataclass(frozen=True)
class PhantomScheme:
    """Effective parameters plus the phantom user indices K+1 .. K+K_f."""

    effective: SchemeParams
    phantoms: frozenset[int]


def apply_phantoms(params: SchemeParams) -> PhantomScheme:
    """Fold K_f phantom users into the user count.

    The scheme (placement, grouping, plan) is built over K + K_f users;
    phantoms demand dummy files so construction stays uniform, and their
    streams are filtered out afterwards (:func:`filter_phantom_streams`).
    """
    validate(params)
    effective = replace(
        params, K=params.K_eff, K_f=0, N=max(params.N, params.K_eff)
    )
    phantoms = frozenset(range(params.K + 1, params.K_eff + 1))
    return PhantomScheme(effective=effective, phantoms=phantoms)


def filter_phantom_streams(
    plan: TransmissionPlan, n_real: int, slot_policy: str = "skip"
) -> TransmissionPlan:
    """Drop phantom-owned streams; suppress sets keep only real users.

    A transmission left with zero real streams carries nothing: under the
    default "skip" policy it vanishes from the schedule, under "keep" it
    stays as an idle slot whose original streams are retained solely to
    price its airtime.
    """
    if slot_policy not in SLOT_POLICIES:
        raise ParameterError(f"slot policy must be one of {SLOT_POLICIES}")
    if n_real >= plan.n_users:
        return plan
    transmissions = []
    for tx in plan.transmissions:
        kept = []
        for s in tx.streams:
            if s.user > n_real:
                continue
            kept.append(
                replace(s, suppress_at=frozenset(u for u in s.suppress_at if u <= n_real))
            )
        if kept:
            transmissions.append(replace(tx, streams=tuple(kept)))
        elif slot_policy == "keep":
            transmissions.append(replace(tx, streams=(), idle_streams=tx.streams))
    return replace(
        plan, transmissions=tuple(transmissions), n_real_users=n_real
    )


def build_scheme_plan(
    params: SchemeParams, scheme: str = "LIN", slot_policy: str = "skip"
) -> TransmissionPlan:
    """Full pipeline: phantoms folded in, plan built, phantom streams dropped.

    scheme "LIN" runs the base cyclic scheme over K + K_f users; "RED" runs
    it on the virtual network and elevates the result.
    """
    validate(params)
    ps = apply_phantoms(params)
    effective = ps.effective
    if scheme == "LIN":
        placement = build_placement_matrix(effective.K, effective.t)
        plan = build_plan(effective, placement)
        plan = replace(plan, params=params)
    elif scheme == "RED":
        vparams = virtual_params(effective)
        vplacement = build_placement_matrix(vparams.K, vparams.t)
        vplan = build_plan(vparams, vplacement)
        plan = elevate_plan(vplan, grouping_map(effective), params)
    else:
        raise ParameterError(f"unknown plan scheme {scheme!r} (expected LIN or RED)")
    return filter_phantom_streams(plan, params.K, slot_policy)
