"""Reproducible viewer behaviour: arrivals, seeks, pauses and departures.

Traces are generated once per (seed, parameter set) and can be written to a
line-oriented text file so the exact same workload drives every strategy in
a comparison. All event times are absolute simulation seconds, pre-rounded
to microseconds so file round-trips are lossless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import Video
from .util import substream

SEEK = "SEEK"
PAUSE = "PAUSE"
RESUME = "RESUME"
LEAVE = "LEAVE"

#: Forward seeks skip at least this many segments past the next one.
MIN_FORWARD_SKIP = 2


@dataclass(frozen=True)
class TraceEvent:
    time: float
    kind: str
    target: int | None = None


@dataclass
class ViewerTrace:
    peer_id: int
    arrival_time: float
    events: list[TraceEvent] = field(default_factory=list)


@dataclass(frozen=True)
class WorkloadParams:
    peer_count: int = 50
    arrival_rate: float = 0.1          # peers per second (Poisson process)
    seek_rate: float = 1.0 / 120.0     # seeks per second per viewer
    seek_distribution: str = "zipf"    # "uniform" | "zipf"
    zipf_alpha: float = 0.8
    forward_fraction: float = 0.7
    short_session_fraction: float = 0.3
    pause_rate: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.peer_count < 1:
            raise ValueError("peer_count must be >= 1")
        if self.arrival_rate <= 0:
            raise ValueError("arrival_rate must be > 0")
        if self.seek_rate < 0 or self.pause_rate < 0:
            raise ValueError("rates must be >= 0")
        if self.seek_distribution not in ("uniform", "zipf"):
            raise ValueError("seek_distribution must be 'uniform' or 'zipf'")
        if not 0.0 <= self.short_session_fraction <= 1.0:
            raise ValueError("short_session_fraction must lie in [0, 1]")
        if not 0.0 <= self.forward_fraction <= 1.0:
            raise ValueError("forward_fraction must lie in [0, 1]")


def _round6(t: float) -> float:
    return round(t, 6)


class _JumpSampler:
    """Draws a seek target on one side of the playhead.

    Zipf mode ranks candidates by proximity to the playhead, so most jumps
    are short with a heavy tail of long ones; uniform mode picks any
    candidate on the chosen side with equal probability.
    """

    def __init__(self, distribution: str, alpha: float, max_candidates: int):
        self.distribution = distribution
        if distribution == "zipf":
            ranks = np.arange(1, max_candidates + 1, dtype=float)
            self._cum = np.cumsum(ranks ** -alpha)

    def rank(self, rng, candidates: int) -> int:
        """0-based proximity rank among `candidates` options."""
        if candidates <= 0:
            raise ValueError("no candidates")
        if self.distribution == "uniform":
            return rng.randrange(candidates)
        total = self._cum[candidates - 1]
        u = rng.random() * total
        return int(np.searchsorted(self._cum[:candidates], u, side="right"))


def generate_traces(params: WorkloadParams, video: Video) -> list[ViewerTrace]:
    """Deterministic per seed; identical params always rebuild the same traces."""
    params.validate()
    arrivals_rng = substream(params.seed, "workload", "arrivals")
    sampler = _JumpSampler(params.seek_distribution, params.zipf_alpha, video.segment_count)

    t = 0.0
    traces = []
    for pid in range(params.peer_count):
        t += arrivals_rng.expovariate(params.arrival_rate)
        traces.append(_viewer_trace(pid, _round6(t), params, video, sampler))
    return traces


def _viewer_trace(pid: int, arrival: float, params: WorkloadParams,
                  video: Video, sampler: _JumpSampler) -> ViewerTrace:
    rng = substream(params.seed, "workload", "trace", pid)
    seg_s = video.segment_duration_s
    n = video.segment_count

    leave_at = None
    if rng.random() < params.short_session_fraction:
        leave_at = arrival + rng.uniform(30.0, 300.0)

    events: list[TraceEvent] = []
    t = arrival
    playhead = 0.0  # fractional segment position, advances while playing
    paused_until = 0.0

    def position_at(when: float) -> int:
        return min(n - 1, int(playhead + max(0.0, when - t)))

    while True:
        waits = []
        if params.seek_rate > 0:
            waits.append(("seek", rng.expovariate(params.seek_rate)))
        if params.pause_rate > 0:
            waits.append(("pause", rng.expovariate(params.pause_rate)))
        if not waits:
            break
        kind, wait = min(waits, key=lambda kw: kw[1])
        when = t + wait
        playback_end = t + (n - playhead) * seg_s
        if when >= playback_end or (leave_at is not None and when >= leave_at):
            break

        if kind == "pause":
            duration = rng.uniform(5.0, 60.0)
            playhead = position_at(when)
            t = when
            events.append(TraceEvent(_round6(when), PAUSE))
            resume_at = when + duration
            if leave_at is not None and resume_at >= leave_at:
                break
            events.append(TraceEvent(_round6(resume_at), RESUME))
            t = resume_at
            continue

        pos = position_at(when)
        target = _pick_target(rng, sampler, pos, n, params.forward_fraction)
        if target is None:
            t = when
            playhead = pos
            continue
        events.append(TraceEvent(_round6(when), SEEK, target))
        t = when
        playhead = float(target)

    if leave_at is not None:
        events.append(TraceEvent(_round6(leave_at), LEAVE))
    return ViewerTrace(pid, arrival, events)


def _pick_target(rng, sampler: _JumpSampler, pos: int, n: int,
                 forward_fraction: float) -> int | None:
    fwd_first = pos + 1 + MIN_FORWARD_SKIP
    fwd_count = n - fwd_first
    back_count = pos
    go_forward = rng.random() < forward_fraction
    if go_forward and fwd_count <= 0:
        go_forward = False
    if not go_forward and back_count <= 0:
        if fwd_count <= 0:
            return None
        go_forward = True
    if go_forward:
        return fwd_first + sampler.rank(rng, fwd_count)
    return pos - 1 - sampler.rank(rng, back_count)


# ---------------------------------------------------------------------------
# Trace files: one line per viewer, "peer arrival; t KIND [target]; ..."
# ---------------------------------------------------------------------------

def save_traces(traces: list[ViewerTrace], path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_traces(traces))


def dumps_traces(traces: list[ViewerTrace]) -> str:
    lines = []
    for tr in traces:
        parts = ["%d %.6f" % (tr.peer_id, tr.arrival_time)]
        for ev in tr.events:
            if ev.target is None:
                parts.append("%.6f %s" % (ev.time, ev.kind))
            else:
                parts.append("%.6f %s %d" % (ev.time, ev.kind, ev.target))
        lines.append("; ".join(parts))
    return "\n".join(lines) + "\n"


def load_traces(path) -> list[ViewerTrace]:
    with open(path) as fh:
        return parse_traces(fh.read())


def parse_traces(text: str) -> list[ViewerTrace]:
    traces = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        head, *rest = line.split(";")
        pid_s, arrival_s = head.split()
        events = []
        for item in rest:
            fields = item.split()
            if len(fields) == 2:
                events.append(TraceEvent(float(fields[0]), fields[1]))
            elif len(fields) == 3:
                events.append(TraceEvent(float(fields[0]), fields[1], int(fields[2])))
            else:
                raise ValueError("malformed trace event: %r" % (item,))
        traces.append(ViewerTrace(int(pid_s), float(arrival_s), events))
    return traces
