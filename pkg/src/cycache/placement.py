"""Circulant cache placement.

The placement is a K x K binary matrix V: row p describes which users cache
packet p of every file.  Row 1 holds t consecutive ones starting at column 1
and each following row is the previous one circularly shifted right by one
column.  All indices in the public API are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = ["PlacementMatrix", "CacheContents", "build_placement_matrix", "cache_contents"]


@dataclass(frozen=True)
class PlacementMatrix:
    K: int
    t: int
    entries: np.ndarray = field(repr=False)  # (K, K) uint8, [p-1, k-1]

    def __post_init__(self):
        self.entries.setflags(write=False)

    def caches(self, packet: int, user: int) -> bool:
        """True when ``user`` caches ``packet`` (both 1-based)."""
        self._check(packet, user)
        return bool(self.entries[packet - 1, user - 1])

    def row_string(self, packet: int) -> str:
        """Row of 0/1 characters for plan export."""
        self._check(packet, 1)
        return "".join("1" if x else "0" for x in self.entries[packet - 1])

    def _check(self, packet: int, user: int) -> None:
        if not 1 <= packet <= self.K:
            raise IndexError(f"packet index {packet} outside [1, {self.K}]")
        if not 1 <= user <= self.K:
            raise IndexError(f"user index {user} outside [1, {self.K}]")


@dataclass(frozen=True)
class CacheContents:
    """Packet indices cached by one user; subpackets expand as q in [t+alpha]."""

    user: int
    packet_indices: frozenset[int]


def build_placement_matrix(K: int, t: int) -> PlacementMatrix:
    """Build the circulant placement matrix for K users and caching gain t."""
    if not (isinstance(K, int) and isinstance(t, int)):
        raise ParameterError("K and t must be integers")
    if not 1 <= t < K:
        raise ParameterError(f"1 <= t < K required, got t={t}, K={K}")
    entries = np.zeros((K, K), dtype=np.uint8)
    for p in range(K):
        for j in range(t):
            entries[p, (p + j) % K] = 1
    return PlacementMatrix(K=K, t=t, entries=entries)


def cache_contents(placement: PlacementMatrix, user: int) -> CacheContents:
    """Packet indices p with V[p, user] = 1; always exactly t of them."""
    if not 1 <= user <= placement.K:
        raise IndexError(f"user index {user} outside [1, {placement.K}]")
    col = placement.entries[:, user - 1]
    packets = frozenset(int(p + 1) for p in np.flatnonzero(col))
    return CacheContents(user=user, packet_indices=packets)
