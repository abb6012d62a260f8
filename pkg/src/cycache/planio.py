"""Line-oriented plan file format.

A plan file starts with the schema line ``#cycache-plan v1``, followed by
``#key value`` header lines, the cache placement as ``#placement`` rows of
0/1 characters (one per packet index, one column per user), and one
space-separated record per stream:

    round slot position user packet subpacket suppress[,suppress...] [group]

The suppress field is a comma-separated user list ("-" when empty); the
trailing group field is present only for grouped (RED) plans and names the
stream's virtual group.  Records of one transmission are consecutive and
keep construction order, so files diff cleanly.
"""

from __future__ import annotations

from types import MappingProxyType
from typing import Iterable, TextIO

import numpy as np

from .delivery import StreamDescriptor, Transmission, TransmissionPlan
from .errors import PlanFormatError
from .params import SchemeParams

__all__ = ["SCHEMA_LINE", "write_plan", "read_plan", "plan_lines"]

SCHEMA_LINE = "#cycache-plan v1"


def plan_lines(plan: TransmissionPlan) -> Iterable[str]:
    """Render a plan as its file lines (no trailing newlines)."""
    p = plan.params
    yield SCHEMA_LINE
    yield f"#scheme {plan.scheme}"
    yield f"#K {p.K}"
    yield f"#t {p.t}"
    yield f"#L {p.L}"
    yield f"#alpha {p.alpha}"
    yield f"#K_f {p.K_f}"
    yield f"#n_packets {plan.n_packets}"
    yield f"#n_subpackets {plan.n_subpackets}"
    yield f"#transmissions {len(plan.transmissions)}"
    for row in range(plan.n_packets):
        bits = "".join("1" if x else "0" for x in plan.cache_matrix[row])
        yield f"#placement {bits}"
    grouped = plan.groups is not None
    for tx in plan.transmissions:
        for s in tx.streams:
            suppress = ",".join(str(u) for u in sorted(s.suppress_at)) or "-"
            fields = [
                str(tx.round_index),
                str(tx.slot),
                str(s.position),
                str(s.user),
                str(s.packet),
                str(s.subpacket),
                suppress,
            ]
            if grouped:
                fields.append(str(s.group if s.group is not None else 0))
            yield " ".join(fields)


def write_plan(plan: TransmissionPlan, stream: TextIO) -> None:
    for line in plan_lines(plan):
        stream.write(line + "\n")


def _parse_int(token: str, what: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise PlanFormatError(f"{what} is not an integer: {token!r}", lineno) from None


def read_plan(stream: TextIO) -> TransmissionPlan:
    """Parse a plan file back into a TransmissionPlan.

    Raises PlanFormatError naming the offending line on malformed input.
    """
    header: dict[str, str] = {}
    placement_rows: list[str] = []
    records: list[tuple[int, list[str]]] = []
    first = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if first is None:
            first = line
            if line != SCHEMA_LINE:
                raise PlanFormatError(
                    f"expected schema line {SCHEMA_LINE!r}, got {line!r}", lineno
                )
            continue
        if line.startswith("#placement "):
            placement_rows.append(line.split(" ", 1)[1].strip())
            continue
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if len(parts) != 2:
                raise PlanFormatError(f"malformed header line: {line!r}", lineno)
            header[parts[0]] = parts[1].strip()
            continue
        records.append((lineno, line.split()))
    if first is None:
        raise PlanFormatError("empty plan file", 1)

    def need(key: str) -> str:
        if key not in header:
            raise PlanFormatError(f"missing header field #{key}", 1)
        return header[key]

    K = _parse_int(need("K"), "#K", 1)
    t = _parse_int(need("t"), "#t", 1)
    L = _parse_int(need("L"), "#L", 1)
    alpha = _parse_int(need("alpha"), "#alpha", 1)
    K_f = _parse_int(header.get("K_f", "0"), "#K_f", 1)
    n_packets = _parse_int(need("n_packets"), "#n_packets", 1)
    n_subpackets = _parse_int(need("n_subpackets"), "#n_subpackets", 1)
    declared_tx = _parse_int(need("transmissions"), "#transmissions", 1)
    scheme = header.get("scheme", "LIN")
    params = SchemeParams(K=K, t=t, L=L, alpha=alpha, K_f=K_f)

    n_users = K + K_f
    if len(placement_rows) != n_packets:
        raise PlanFormatError(
            f"expected {n_packets} placement rows, found {len(placement_rows)}", 1
        )
    cache = np.zeros((n_packets, n_users), dtype=np.uint8)
    for i, bits in enumerate(placement_rows):
        if len(bits) != n_users or set(bits) - {"0", "1"}:
            raise PlanFormatError(f"bad placement row {bits!r}", 1)
        cache[i] = [1 if c == "1" else 0 for c in bits]

    grouped = scheme == "RED"
    want_fields = 8 if grouped else 7
    counters: dict[tuple[int, int], int] = {}
    transmissions: list[Transmission] = []
    current_key: tuple[int, int] | None = None
    current: list[StreamDescriptor] = []

    def flush() -> None:
        if current_key is not None:
            transmissions.append(
                Transmission(
                    round_index=current_key[0],
                    slot=current_key[1],
                    streams=tuple(current),
                )
            )

    for lineno, fields in records:
        if len(fields) != want_fields:
            raise PlanFormatError(
                f"expected {want_fields} fields, found {len(fields)}", lineno
            )
        r = _parse_int(fields[0], "round", lineno)
        j = _parse_int(fields[1], "slot", lineno)
        pos = _parse_int(fields[2], "position", lineno)
        user = _parse_int(fields[3], "user", lineno)
        packet = _parse_int(fields[4], "packet", lineno)
        q = _parse_int(fields[5], "subpacket", lineno)
        if fields[6] == "-":
            suppress = frozenset()
        else:
            suppress = frozenset(
                _parse_int(u, "suppress user", lineno) for u in fields[6].split(",")
            )
        group = _parse_int(fields[7], "group", lineno) if grouped else None
        if not 1 <= user <= n_users:
            raise PlanFormatError(f"user {user} outside [1, {n_users}]", lineno)
        if not 1 <= packet <= n_packets:
            raise PlanFormatError(f"packet {packet} outside [1, {n_packets}]", lineno)
        key = (r, j)
        if key != current_key:
            flush()
            current_key = key
            current = []
        current.append(
            StreamDescriptor(
                position=pos,
                user=user,
                packet=packet,
                subpacket=q,
                suppress_at=suppress,
                group=group,
            )
        )
        counters[(user, packet)] = max(counters.get((user, packet), 1), q + 1)
    flush()

    if len(transmissions) != declared_tx:
        raise PlanFormatError(
            f"header declares {declared_tx} transmissions, file holds "
            f"{len(transmissions)}",
            records[-1][0] if records else 1,
        )

    groups = None
    if grouped:
        phi = n_users // n_packets
        groups = tuple((u - 1) // phi + 1 for u in range(1, n_users + 1))
    return TransmissionPlan(
        params=params,
        cache_matrix=cache,
        transmissions=tuple(transmissions),
        counters=MappingProxyType(counters),
        n_subpackets=n_subpackets,
        suppress_size=alpha - 1,
        payload=1.0 / (n_packets * n_subpackets),
        scheme=scheme,
        groups=groups,
        n_real_users=K if K_f else None,
    )
