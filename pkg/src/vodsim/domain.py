"""Core value types: the video, segment caches and playback records.

Segments are plain integers (0-based position within the video). One segment
carries one second of playback by default, so windows expressed in seconds
translate directly to segment counts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


#: Sentinel node id for the media source.
SERVER = -1


class Origin(enum.Enum):
    """How a cached segment got here."""

    LOCAL_STREAM = "stream"
    PREFETCH_PEER = "peer"
    PREFETCH_SHORTCUT = "shortcut"
    SERVER = "server"


@dataclass(frozen=True)
class Video:
    """A single video as a run of fixed-duration segments."""

    segment_count: int
    segment_duration_s: float = 1.0
    streaming_rate_bps: float = 512_000.0

    def __post_init__(self) -> None:
        if self.segment_count < 1:
            raise ValueError("segment_count must be >= 1")
        if self.segment_duration_s <= 0:
            raise ValueError("segment_duration_s must be > 0")
        if self.streaming_rate_bps <= 0:
            raise ValueError("streaming_rate_bps must be > 0")

    @property
    def duration_s(self) -> float:
        return self.segment_count * self.segment_duration_s

    @property
    def segment_bits(self) -> float:
        return self.streaming_rate_bps * self.segment_duration_s

    def valid_segment(self, seg: int) -> bool:
        return 0 <= seg < self.segment_count


@dataclass
class CacheEntry:
    arrival_time: float
    origin: Origin
    consumed: bool = False
    prefetched: bool = False
    # Metrics bookkeeping: each prefetched copy is credited at most once as
    # "played" and once as "used" (played locally or uploaded to a peer).
    counted_played: bool = False
    counted_used: bool = False


class BufferCache:
    """Bounded per-peer segment store.

    Eviction on overflow picks, in order:
      1. the unconsumed prefetched entry with the oldest arrival time,
      2. else the consumed entry farthest behind the playhead,
      3. else the oldest unconsumed streamed entry.
    Streamed-in segments that have not been played yet (the playback runway)
    are therefore protected while anything else is available.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.entries: dict[int, CacheEntry] = {}

    def __contains__(self, seg: int) -> bool:
        return seg in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, seg: int) -> CacheEntry | None:
        return self.entries.get(seg)

    def residents(self) -> set[int]:
        return set(self.entries)

    def insert(
        self,
        seg: int,
        origin: Origin,
        now: float,
        playhead: int = 0,
        consumed: bool = False,
        prefetched: bool = False,
    ) -> int | None:
        """Insert a segment, evicting one victim if the cache is full.

        Re-inserting a resident segment only refreshes its arrival time and
        never evicts. Returns the evicted segment id, if any.
        """
        existing = self.entries.get(seg)
        if existing is not None:
            existing.arrival_time = now
            return None
        victim = None
        if len(self.entries) >= self.capacity:
            victim = self._pick_victim(playhead)
            if victim is not None:
                del self.entries[victim]
        self.entries[seg] = CacheEntry(
            arrival_time=now, origin=origin, consumed=consumed, prefetched=prefetched
        )
        return victim

    def _pick_victim(self, playhead: int) -> int | None:
        stale = [
            (e.arrival_time, s)
            for s, e in self.entries.items()
            if not e.consumed and e.origin is not Origin.LOCAL_STREAM
        ]
        if stale:
            return min(stale)[1]
        consumed = [s for s, e in self.entries.items() if e.consumed]
        if consumed:
            # Farthest behind the playhead; ahead-of-playhead entries sort last.
            return min(consumed, key=lambda s: (-(playhead - s), s))
        runway = [(e.arrival_time, s) for s, e in self.entries.items()]
        return min(runway)[1] if runway else None

    def expire(self, now: float, ttl: float) -> list[int]:
        """Drop unconsumed prefetched entries older than ttl.

        Consumed entries and streamed-in entries never expire.
        """
        if ttl <= 0:
            raise ValueError("ttl must be > 0")
        victims = sorted(
            s
            for s, e in self.entries.items()
            if not e.consumed
            and e.origin is not Origin.LOCAL_STREAM
            and now - e.arrival_time > ttl
        )
        for s in victims:
            del self.entries[s]
        return victims

    def remove(self, seg: int) -> None:
        self.entries.pop(seg, None)


@dataclass
class PlaybackRecord:
    """Ordered list of played segments; duplicates appear after backward seeks."""

    played: list[int] = field(default_factory=list)

    def append(self, seg: int) -> None:
        self.played.append(seg)

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.played)

    def __len__(self) -> int:
        return len(self.played)


def count_forward_seeks(record, min_skip: int = 2) -> int:
    """Count forward jumps in a playback record.

    An adjacent pair (a, b) counts when at least ``min_skip`` segments were
    skipped, i.e. b - a - 1 >= min_skip.
    """
    if min_skip < 1:
        raise ValueError("min_skip must be >= 1")
    seq = list(record.played if isinstance(record, PlaybackRecord) else record)
    return sum(1 for a, b in zip(seq, seq[1:]) if b - a - 1 >= min_skip)
