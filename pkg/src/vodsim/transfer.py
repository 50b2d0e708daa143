"""Provider scoring, selection and bandwidth-constrained transfer timing."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

SCOPE_SESSION = "SESSION"
SCOPE_SHORTCUT = "SHORTCUT"
SCOPE_SERVER = "SERVER"


class TransferHistory:
    """Per-provider ring of per-period received-segment counts.

    A provider's score is the mean of its counts over the last `window`
    periods; periods with no record count as zero, so a cold start scores 0.
    """

    def __init__(self, window: int = 5, period_s: float = 10.0):
        if window < 1 or period_s <= 0:
            raise ValueError("window must be >= 1 and period_s > 0")
        self.window = window
        self.period_s = period_s
        self._rings: dict[int, deque[int]] = {}
        self._ring_period: dict[int, int] = {}

    def _roll(self, provider: int, period: int) -> deque[int]:
        ring = self._rings.get(provider)
        if ring is None:
            ring = deque([0], maxlen=self.window)
            self._rings[provider] = ring
            self._ring_period[provider] = period
            return ring
        behind = period - self._ring_period[provider]
        for _ in range(min(behind, self.window)):
            ring.append(0)
        if behind > 0:
            self._ring_period[provider] = period
        return ring

    def record(self, provider: int, now: float, segments: int = 1) -> None:
        ring = self._roll(provider, int(now // self.period_s))
        ring[-1] += segments

    def counts(self, provider: int, now: float | None = None) -> list[int]:
        if provider not in self._rings:
            return []
        if now is not None:
            self._roll(provider, int(now // self.period_s))
        return list(self._rings[provider])


def score_provider(history: TransferHistory, provider: int, now: float | None = None) -> float:
    """Estimated delivery rate: sum of the last `window` period counts / window."""
    counts = history.counts(provider, now)
    return sum(counts) / history.window


def choose_provider(candidates, history: TransferHistory | None, playheads: dict[int, int],
                    my_playhead: int, latency_ms, now: float | None = None) -> int | None:
    """Best provider by score, then playhead distance, latency, and id.

    Returns None when there is no candidate at all.
    """
    ranked = []
    for pid in candidates:
        score = score_provider(history, pid, now) if history is not None else 0.0
        dist = abs(playheads.get(pid, my_playhead) - my_playhead)
        lat = latency_ms(pid) if callable(latency_ms) else latency_ms.get(pid, 0.0)
        ranked.append((-score, dist, lat, pid))
    if not ranked:
        return None
    return min(ranked)[3]


def transfer_time(segment_bits: float, provider_up_bps: float, requester_down_bps: float,
                  provider_flows: int = 1, requester_flows: int = 1) -> float:
    """Seconds to move one segment at the endpoints' fair-share rates.

    Each endpoint splits its capacity evenly among its concurrent flows; the
    transfer runs at the smaller of the two shares.
    """
    if segment_bits <= 0 or provider_up_bps <= 0 or requester_down_bps <= 0:
        raise ValueError("sizes and rates must be positive")
    if provider_flows < 1 or requester_flows < 1:
        raise ValueError("flow counts must be >= 1")
    rate = min(provider_up_bps / provider_flows, requester_down_bps / requester_flows)
    return segment_bits / rate


class FlowRegistry:
    """Active flow counts per endpoint, for fair-share rate snapshots."""

    def __init__(self):
        self.up: dict[int, int] = {}
        self.down: dict[int, int] = {}

    def start(self, provider: int, requester: int) -> tuple[int, int]:
        self.up[provider] = self.up.get(provider, 0) + 1
        self.down[requester] = self.down.get(requester, 0) + 1
        return self.up[provider], self.down[requester]

    def finish(self, provider: int, requester: int) -> None:
        self.up[provider] -= 1
        self.down[requester] -= 1

    def uploads(self, provider: int) -> int:
        return self.up.get(provider, 0)


@dataclass
class SegmentRequest:
    requester: int
    segment: int
    issued_at: float
    scope: str
    deadline: float
    provider: int | None = None
    purpose: str = "PLAN"            # PLAN | URGENT | SEEK
    seek_time: float | None = None   # original seek instant for SEEK requests
    seek_id: int | None = None
    tiers_left: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.deadline <= self.issued_at:
            raise ValueError("deadline must be after issue time")
