"""The five prefetching policies.

Each planner is a pure function of an explicit view of one peer's state: it
returns the segments to fetch next and never mutates anything. The engine
owns execution, so a plan can be replayed or inspected freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gossip import StateTable, missing_segments, session_union
from .transfer import SCOPE_SESSION, SCOPE_SHORTCUT

STRATEGIES = ("none", "random", "popularity", "mining", "cooperative")


@dataclass(frozen=True)
class PlanTarget:
    segment: int
    scope_hint: str


@dataclass
class PrefetchPlan:
    urgent: list[int] = field(default_factory=list)
    targets: list[PlanTarget] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.urgent and not self.targets


@dataclass(frozen=True)
class PeerView:
    """Read-only slice of peer state handed to the planners."""

    playhead: int
    resident: frozenset[int]     # cached segments
    blocked: frozenset[int]      # cached + in flight + already queued
    segment_count: int
    urgent_window: int


def urgent_window(view: PeerView) -> list[int]:
    """Non-resident segments in the next urgent_window positions, in order."""
    lo = view.playhead + 1
    hi = min(view.playhead + view.urgent_window, view.segment_count - 1)
    return [s for s in range(lo, hi + 1) if s not in view.blocked]


def plan_none(view: PeerView) -> PrefetchPlan:
    """No prefetching: streaming only, empty plan by definition."""
    return PrefetchPlan()


def plan_random(view: PeerView, budget: int, rng) -> PrefetchPlan:
    """Uniformly random non-resident segments, up to budget."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    pool = [s for s in range(view.segment_count) if s not in view.blocked]
    picks = sorted(rng.sample(pool, budget)) if len(pool) > budget else pool
    return PrefetchPlan(
        urgent=urgent_window(view),
        targets=[PlanTarget(s, SCOPE_SESSION) for s in picks],
    )


# ---------------------------------------------------------------------------
# Popularity-aware: a tracker aggregates reported seek targets per epoch and
# pushes the hottest segments to every peer.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PopularityList:
    entries: tuple[tuple[int, int], ...]   # (segment, hits), hits desc / seg asc
    epoch: float = 0.0


class PopularityTracker:
    def __init__(self):
        self.hits: dict[int, int] = {}

    def update(self, seek_targets) -> None:
        for seg in seek_targets:
            self.hits[seg] = self.hits.get(seg, 0) + 1

    def snapshot(self, length: int, epoch: float) -> PopularityList:
        ranked = sorted(self.hits.items(), key=lambda kv: (-kv[1], kv[0]))
        return PopularityList(tuple(ranked[:length]), epoch)

    def reset(self) -> None:
        self.hits.clear()


def tracker_update(tracker: PopularityTracker, seek_targets) -> None:
    tracker.update(seek_targets)


def plan_popularity(view: PeerView, pop_list: PopularityList, budget: int) -> PrefetchPlan:
    """Hottest non-resident listed segments; ties go to the closest one."""
    candidates = [
        (seg, hits) for seg, hits in pop_list.entries if seg not in view.blocked
    ]
    candidates.sort(key=lambda sh: (-sh[1], abs(sh[0] - view.playhead), sh[0]))
    return PrefetchPlan(
        urgent=urgent_window(view),
        targets=[PlanTarget(s, SCOPE_SESSION) for s, _ in candidates[:budget]],
    )


# ---------------------------------------------------------------------------
# History mining: co-occurrence counting over exchanged playback records.
# ---------------------------------------------------------------------------

class MiningModel:
    """Directed co-occurrence counts: antecedent segment -> soon-played segment."""

    def __init__(self, support_threshold: float = 0.0):
        self.co_occurrence: dict[tuple[int, int], int] = {}
        self.support_threshold = support_threshold
        self.histories_seen = 0

    def ingest(self, history, window: int, already_seen: int = 0) -> None:
        """Count pairs (h[i], h[j]) for i < j <= i + window.

        Only pairs whose consequent index is >= already_seen are counted, so
        incremental exchanges of a growing record never double-count.
        """
        if window < 1:
            raise ValueError("window must be >= 1")
        seq = list(history)
        for i in range(len(seq)):
            for j in range(i + 1, min(i + window, len(seq) - 1) + 1):
                if j < already_seen:
                    continue
                key = (seq[i], seq[j])
                self.co_occurrence[key] = self.co_occurrence.get(key, 0) + 1
        self.histories_seen += 1

    def consequents(self, antecedent: int) -> list[tuple[int, int]]:
        floor = self.support_threshold * self.histories_seen
        out = [
            (b, n) for (a, b), n in self.co_occurrence.items()
            if a == antecedent and n >= floor
        ]
        out.sort(key=lambda bn: (-bn[1], bn[0]))
        return out


def mine_update(model: MiningModel, neighbor_history, window: int) -> None:
    """Fold one full neighbour playback record into the model."""
    model.ingest(neighbor_history, window)


def plan_mining(view: PeerView, model: MiningModel, budget: int) -> PrefetchPlan:
    """Segments that usually follow the current one in neighbours' records."""
    picks = [
        b for b, _ in model.consequents(view.playhead)
        if b not in view.blocked and 0 <= b < view.segment_count
    ]
    return PrefetchPlan(
        urgent=urgent_window(view),
        targets=[PlanTarget(s, SCOPE_SESSION) for s in picks[:budget]],
    )


# ---------------------------------------------------------------------------
# Cooperative: fill what the whole session lacks, then densify around the
# playhead from copies the session already has.
# ---------------------------------------------------------------------------

def plan_cooperative(view: PeerView, table: StateTable, horizon: int, budget: int) -> PrefetchPlan:
    """Rare segments first (absent from the whole session, fetched across
    sessions), then nearby segments the session holds but this peer lacks."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    union = session_union(table, set(view.resident))
    hi = min(view.playhead + horizon, view.segment_count - 1)
    rare = [
        s for s in missing_segments(union, view.playhead, hi)
        if s not in view.blocked
    ]
    rare.sort(key=lambda s: (abs(s - view.playhead), s))

    # Fill ahead of the playhead only: that is where playback and forward
    # seeks are going, and behind it the peer's own trail already serves.
    fills = [
        s for s in union
        if view.playhead < s <= hi and s not in view.blocked
    ]
    fills.sort(key=lambda s: (abs(s - view.playhead), s))

    targets = [PlanTarget(s, SCOPE_SHORTCUT) for s in rare]
    targets += [PlanTarget(s, SCOPE_SESSION) for s in fills]
    return PrefetchPlan(urgent=urgent_window(view), targets=targets[:budget])
