"""Buffer-map gossip: per-peer state tables and session-wide availability."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BufferMapMsg:
    """Snapshot of a peer's cache contents, broadcast inside its session."""

    sender: int
    segments: frozenset[int]
    playhead: int
    issued_at: float


@dataclass
class TableRow:
    segments: frozenset[int]
    playhead: int
    issued_at: float


class StateTable:
    """What one peer knows about its session mates' caches."""

    def __init__(self):
        self.rows: dict[int, TableRow] = {}

    def apply(self, msg: BufferMapMsg) -> None:
        self.rows[msg.sender] = TableRow(msg.segments, msg.playhead, msg.issued_at)

    def drop_stale(self, now: float, max_age: float) -> None:
        dead = [pid for pid, row in self.rows.items() if now - row.issued_at > max_age]
        for pid in dead:
            del self.rows[pid]

    def drop_peer(self, pid: int) -> None:
        self.rows.pop(pid, None)

    def holders(self, seg: int) -> list[int]:
        """Peers believed to hold a segment, in deterministic id order."""
        return sorted(pid for pid, row in self.rows.items() if seg in row.segments)

    def __len__(self) -> int:
        return len(self.rows)


def session_union(table: StateTable, self_cache: set[int]) -> set[int]:
    """All segments known to exist in the session, own cache included."""
    union = set(self_cache)
    for row in table.rows.values():
        union |= row.segments
    return union


def missing_segments(union: set[int], lo: int, hi: int) -> list[int]:
    """Ascending segment ids in [lo, hi] absent from the union."""
    if lo > hi:
        raise ValueError("lo must be <= hi")
    return [s for s in range(lo, hi + 1) if s not in union]
