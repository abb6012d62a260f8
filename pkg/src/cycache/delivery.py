"""Delivery plan construction and verification for the cyclic scheme.

Content delivery runs in K rounds of K-t transmissions.  Each transmission
serves t+alpha distinct users, delivering to each exactly one subpacket of
one packet it does not cache; the per-stream suppress set lists the alpha-1
served users at which the stream must be suppressed by beamforming.  Every
user k is assumed to demand file k (distinct worst-case demands), so
subpacket counters key on (user, packet).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import ParameterError, PlanConsistencyError
from .params import SchemeParams, validate
from .placement import PlacementMatrix

__all__ = [
    "StreamDescriptor",
    "Transmission",
    "TransmissionPlan",
    "VerificationReport",
    "mod1",
    "index_vectors",
    "interference_set",
    "build_plan",
    "verify_plan",
    "shift_check",
]


def mod1(a: int, b: int) -> int:
    """Mod with an offset of one: result lies in [1, b] and mod1(b, b) = b."""
    if b < 1:
        raise ParameterError(f"modulus must be positive, got {b}")
    return (a - 1) % b + 1


@dataclass(frozen=True)
class StreamDescriptor:
    """One unicast stream inside a transmission.

    ``suppress_at`` holds the served users at which this stream has to be
    suppressed by the beamformer; every other served user cancels it from
    cache.
    """

    position: int
    user: int
    packet: int
    subpacket: int
    suppress_at: frozenset[int]
    group: int | None = None  # virtual-group id when the plan was elevated


@dataclass(frozen=True)
class Transmission:
    round_index: int
    slot: int
    streams: tuple[StreamDescriptor, ...]
    # Streams retained only to price the slot's airtime when every served
    # user turned out to be a phantom (phantom-slot-policy "keep").
    idle_streams: tuple[StreamDescriptor, ...] = ()

    @property
    def users(self) -> tuple[int, ...]:
        return tuple(s.user for s in self.streams)

    @property
    def packets(self) -> tuple[int, ...]:
        return tuple(s.packet for s in self.streams)


@dataclass(frozen=True)
class TransmissionPlan:
    """A complete, immutable delivery schedule.

    ``cache_matrix`` has one row per packet index and one column per user of
    the network the plan serves (phantoms included); for grouped plans the
    packet index space is the virtual one.  ``counters`` maps
    (user, packet) -> next unused subpacket index after construction.
    """

    params: SchemeParams
    cache_matrix: np.ndarray = field(repr=False)
    transmissions: tuple[Transmission, ...]
    counters: Mapping[tuple[int, int], int] = field(repr=False)
    n_subpackets: int
    suppress_size: int
    payload: float  # fraction of a file carried by one stream
    scheme: str = "LIN"
    groups: tuple[int, ...] | None = None  # user -> virtual group id
    n_real_users: int | None = None  # users above this index are phantoms

    def __post_init__(self):
        self.cache_matrix.setflags(write=False)

    @property
    def n_users(self) -> int:
        return self.cache_matrix.shape[1]

    @property
    def n_packets(self) -> int:
        return self.cache_matrix.shape[0]

    @property
    def real_users(self) -> int:
        return self.n_real_users if self.n_real_users is not None else self.n_users

    @property
    def subpacketization(self) -> int:
        return self.n_packets * self.n_subpackets

    def caches(self, packet: int, user: int) -> bool:
        return bool(self.cache_matrix[packet - 1, user - 1])


def _index_vectors(K: int, t: int, alpha: int, j: int, r: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    k1 = [i for i in range(1, t + 1)]
    k1 += [mod1(i + j - 1, K - t) + t for i in range(1, alpha + 1)]
    p1 = [mod1(t + j - i, K - t) + i for i in range(1, t + 1)]
    p1 += [1] * alpha
    shift = r - 1
    return (
        tuple(mod1(x + shift, K) for x in k1),
        tuple(mod1(x + shift, K) for x in p1),
    )


def index_vectors(params: SchemeParams, j: int, r: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """User and packet index vectors of slot j in round r.

    Round 1 follows the closed-form construction; later rounds add r-1 to
    every entry under mod1(., K), so round 1 is the unshifted one (this is
    what the worked first/second-round vectors require).
    """
    validate(params)
    K, t, alpha = params.K_eff, params.t, params.alpha
    if not 1 <= j <= K - t:
        raise IndexError(f"slot index {j} outside [1, {K - t}]")
    if not 1 <= r <= K:
        raise IndexError(f"round index {r} outside [1, {K}]")
    return _index_vectors(K, t, alpha, j, r)


def interference_set(
    placement: PlacementMatrix,
    k_vec: Iterable[int],
    p_vec: Iterable[int],
    n: int,
) -> frozenset[int]:
    """Served users (other than position n's) that do not cache packet p[n].

    For a well-formed plan the result always has alpha-1 members; any other
    size signals a broken schedule and raises PlanConsistencyError.
    """
    k_vec = tuple(k_vec)
    p_vec = tuple(p_vec)
    if not 1 <= n <= len(k_vec):
        raise IndexError(f"position {n} outside [1, {len(k_vec)}]")
    alpha = len(k_vec) - placement.t
    me = k_vec[n - 1]
    packet = p_vec[n - 1]
    out = frozenset(
        u for u in k_vec if u != me and not placement.caches(packet, u)
    )
    if len(out) != alpha - 1:
        raise PlanConsistencyError(
            f"interference set for position {n} has {len(out)} members, "
            f"expected alpha-1 = {alpha - 1}"
        )
    return out


def build_plan(params: SchemeParams, placement: PlacementMatrix) -> TransmissionPlan:
    """Build the full K(K-t)-transmission plan over ``placement``.

    ``placement`` must be built for (K_eff, t).  Subpacket indices are
    assigned in order of appearance, scanning rounds, slots and stream
    positions; each missing (user, packet) pair ends up using each index in
    [t+alpha] exactly once.
    """
    validate(params)
    K, t, alpha = params.K_eff, params.t, params.alpha
    if alpha > K - t:
        # each transmission serves t+alpha distinct users
        raise ParameterError(
            f"cyclic delivery needs alpha <= K+K_f-t, got alpha={alpha} > {K - t}"
        )
    if placement.K != K or placement.t != t:
        raise ParameterError(
            f"placement built for (K={placement.K}, t={placement.t}) does not "
            f"match params (K_eff={K}, t={t})"
        )
    counters: dict[tuple[int, int], int] = {}
    transmissions = []
    for r in range(1, K + 1):
        for j in range(1, K - t + 1):
            k_vec, p_vec = _index_vectors(K, t, alpha, j, r)
            if len(set(k_vec)) != len(k_vec):
                raise PlanConsistencyError(
                    f"round {r} slot {j}: served users are not distinct: {k_vec}"
                )
            streams = []
            for n in range(1, t + alpha + 1):
                user, packet = k_vec[n - 1], p_vec[n - 1]
                if placement.caches(packet, user):
                    raise PlanConsistencyError(
                        f"round {r} slot {j} position {n}: user {user} "
                        f"already caches packet {packet}"
                    )
                q = counters.get((user, packet), 1)
                counters[(user, packet)] = q + 1
                streams.append(
                    StreamDescriptor(
                        position=n,
                        user=user,
                        packet=packet,
                        subpacket=q,
                        suppress_at=interference_set(placement, k_vec, p_vec, n),
                    )
                )
            transmissions.append(
                Transmission(round_index=r, slot=j, streams=tuple(streams))
            )
    return TransmissionPlan(
        params=params,
        cache_matrix=np.array(placement.entries, dtype=np.uint8),
        transmissions=tuple(transmissions),
        counters=MappingProxyType(counters),
        n_subpackets=t + alpha,
        suppress_size=alpha - 1,
        payload=1.0 / (K * (t + alpha)),
        scheme="LIN",
    )


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.passed


def verify_plan(plan: TransmissionPlan, max_violations: int = 50) -> VerificationReport:
    """Delivery-completeness and decodability audit.

    Checks, for the (real) users of the plan's network:
      a. every missing (packet, user) pair receives exactly ``n_subpackets``
         streams whose subpacket indices are a permutation of
         [1, n_subpackets];
      b. no stream delivers a packet its user already caches;
      c. suppress sets have the declared size (at most that size once
         phantom users have been filtered out);
      d. for every ordered stream pair (a, b) in a transmission, user_a is
         either in b's suppress set or caches b's packet, and served users
         are distinct.
    Violations are collected as data, not raised.
    """
    v: list[str] = []

    def note(msg: str) -> None:
        if len(v) < max_violations:
            v.append(msg)

    V = plan.cache_matrix
    n_real = plan.real_users
    filtered = plan.n_real_users is not None
    coverage: dict[tuple[int, int], list[int]] = {}

    for tx in plan.transmissions:
        where = f"round {tx.round_index} slot {tx.slot}"
        users = tx.users
        if len(set(users)) != len(users):
            note(f"{where}: served users not distinct: {users}")
        for s in tx.streams:
            if V[s.packet - 1, s.user - 1]:
                note(
                    f"{where} position {s.position}: user {s.user} already "
                    f"caches packet {s.packet}"
                )
            if s.user in s.suppress_at:
                note(f"{where} position {s.position}: stream suppressed at its own user")
            if filtered:
                if len(s.suppress_at) > plan.suppress_size:
                    note(
                        f"{where} position {s.position}: suppress set size "
                        f"{len(s.suppress_at)} exceeds {plan.suppress_size}"
                    )
            elif len(s.suppress_at) != plan.suppress_size:
                note(
                    f"{where} position {s.position}: suppress set size "
                    f"{len(s.suppress_at)} != {plan.suppress_size}"
                )
            if s.user <= n_real:
                coverage.setdefault((s.packet, s.user), []).append(s.subpacket)
        for a in tx.streams:
            for b in tx.streams:
                if a is b:
                    continue
                if a.user in b.suppress_at:
                    continue
                if not V[b.packet - 1, a.user - 1]:
                    note(
                        f"{where}: user {a.user} neither caches packet "
                        f"{b.packet} nor appears in the suppress set of "
                        f"position {b.position}"
                    )

    want = list(range(1, plan.n_subpackets + 1))
    for user in range(1, n_real + 1):
        for packet in range(1, plan.n_packets + 1):
            if V[packet - 1, user - 1]:
                if (packet, user) in coverage:
                    note(f"cached pair (packet {packet}, user {user}) was delivered")
                continue
            got = sorted(coverage.pop((packet, user), []))
            if got != want:
                note(
                    f"coverage deficit for (packet {packet}, user {user}): "
                    f"subpackets {got}, expected {want}"
                )
    for packet, user in coverage:
        note(f"stream delivered to out-of-range pair (packet {packet}, user {user})")

    return VerificationReport(passed=not v, violations=tuple(v))


def shift_check(plan: TransmissionPlan) -> bool:
    """True when round r's vectors are the diagonally shifted round r-1 ones.

    Users shift by the group size (1 for ungrouped plans) modulo the user
    count and packets shift by one modulo the packet count.  Only meaningful
    for unfiltered plans where every slot keeps its full stream list.
    """
    by_rj: dict[tuple[int, int], Transmission] = {
        (tx.round_index, tx.slot): tx for tx in plan.transmissions
    }
    user_shift = plan.n_users // plan.n_packets if plan.groups is not None else 1
    rounds = sorted({r for r, _ in by_rj})
    slots = sorted({j for _, j in by_rj})
    for r in rounds:
        if r == rounds[0]:
            continue
        for j in slots:
            cur, prev = by_rj.get((r, j)), by_rj.get((r - 1, j))
            if cur is None or prev is None:
                return False
            if len(cur.streams) != len(prev.streams):
                return False
            for a, b in zip(cur.streams, prev.streams):
                if a.user != mod1(b.user + user_shift, plan.n_users):
                    return False
                if a.packet != mod1(b.packet + 1, plan.n_packets):
                    return False
    return True
