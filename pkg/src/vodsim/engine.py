"""Deterministic discrete-event simulation loop binding all modules.

One run owns all of its state. Every random draw comes from a named
sub-stream of the master seed, so changing the strategy never perturbs the
workload — comparisons across strategies run on identical traces.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

from . import strategies as strat
from .domain import SERVER, BufferCache, Origin, Video
from .gossip import BufferMapMsg, StateTable
from .metrics import (GLOBAL_HIT, REL_HIT, SERVER_FETCH, SHORTCUT_FETCH,
                      MetricsLedger, MetricsReport, build_report)
from .overlay import Overlay, Peer
from .topology import NetworkTopology, TopologyParams, generate_topology
from .transfer import (SCOPE_SERVER, SCOPE_SESSION, SCOPE_SHORTCUT,
                       FlowRegistry, SegmentRequest, TransferHistory,
                       choose_provider, transfer_time)
from .util import substream
from .workload import (LEAVE, PAUSE, RESUME, SEEK, ViewerTrace,
                       WorkloadParams, generate_traces, load_traces)

# Event kinds, processed in (time, sequence) order.
EV_ARRIVAL = "ARRIVAL"
EV_TICK = "PLAYBACK_TICK"
EV_GOSSIP = "GOSSIP_TICK"
EV_PLAN = "PLAN_TICK"
EV_SEEK = "SEEK"
EV_PAUSE = "PAUSE"
EV_RESUME = "RESUME"
EV_TIMEOUT = "REQUEST_TIMEOUT"
EV_COMPLETE = "TRANSFER_COMPLETE"
EV_TRACKER = "TRACKER_TICK"
EV_DEPART = "DEPART"
EV_END = "END"


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__("%s: %s" % (field_name, message))


@dataclass(frozen=True)
class RunConfig:
    strategy: str = "none"
    seed: int = 0
    duration_s: float = 1800.0

    # video
    segment_count: int = 900
    segment_duration_s: float = 1.0
    streaming_rate_bps: float = 512_000.0

    # topology
    as_count: int = 2
    routers_per_as: int = 4
    access_delay_ms_min: float = 5.0
    access_delay_ms_max: float = 10.0
    peer_up_bps: float = 512_000.0
    peer_down_bps: float = 512_000.0
    server_up_bps: float = 20_000_000.0

    # workload
    peer_count: int = 50
    arrival_rate: float = 0.1
    seek_rate: float = 1.0 / 120.0
    seek_distribution: str = "zipf"
    zipf_alpha: float = 0.8
    forward_fraction: float = 0.7
    short_session_fraction: float = 0.3
    pause_rate: float = 0.0
    trace_file: str | None = None

    # strategy machinery
    session_width_s: float = 120.0
    urgent_window_s: float = 20.0
    prefetch_budget: int = 4
    plan_period_s: float = 10.0
    gossip_period_s: float = 10.0
    cache_capacity: int = 120
    prefetch_ttl_s: float = 60.0
    trail_keep: int | None = None       # played segments retained; None = auto
    coop_horizon: int = 60
    mining_window: int = 30
    mining_fanout: int = 4
    mining_support: float = 0.0
    pop_period_s: float = 60.0
    pop_list_length: int = 20
    shortcut_k: int = 5
    shortcut_refresh_s: float = 60.0
    request_timeout_s: float = 2.0
    max_concurrent_fetch: int = 3
    max_uploads: int = 4

    def validate(self) -> None:
        if self.strategy not in strat.STRATEGIES:
            raise ConfigError("strategy", "must be one of %s" % (strat.STRATEGIES,))
        positive = [
            "duration_s", "segment_count", "segment_duration_s", "streaming_rate_bps",
            "as_count", "routers_per_as", "peer_up_bps", "peer_down_bps",
            "server_up_bps", "peer_count", "arrival_rate", "session_width_s",
            "plan_period_s", "gossip_period_s", "cache_capacity", "prefetch_ttl_s",
            "coop_horizon", "mining_window", "pop_period_s", "pop_list_length",
            "shortcut_refresh_s", "request_timeout_s", "max_concurrent_fetch",
            "max_uploads",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(name, "must be > 0")
        non_negative = [
            "seek_rate", "pause_rate", "urgent_window_s", "prefetch_budget",
            "mining_fanout", "mining_support", "shortcut_k",
        ]
        for name in non_negative:
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be >= 0")
        if self.seek_distribution not in ("uniform", "zipf"):
            raise ConfigError("seek_distribution", "must be 'uniform' or 'zipf'")
        for name in ("forward_fraction", "short_session_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(name, "must lie in [0, 1]")
        if self.access_delay_ms_min > self.access_delay_ms_max:
            raise ConfigError("access_delay_ms_min", "must be <= access_delay_ms_max")

    def video(self) -> Video:
        return Video(self.segment_count, self.segment_duration_s, self.streaming_rate_bps)

    def workload_params(self) -> WorkloadParams:
        return WorkloadParams(
            peer_count=self.peer_count,
            arrival_rate=self.arrival_rate,
            seek_rate=self.seek_rate,
            seek_distribution=self.seek_distribution,
            zipf_alpha=self.zipf_alpha,
            forward_fraction=self.forward_fraction,
            short_session_fraction=self.short_session_fraction,
            pause_rate=self.pause_rate,
            seed=self.seed,
        )

    def topology_params(self) -> TopologyParams:
        return TopologyParams(
            as_count=self.as_count,
            routers_per_as=self.routers_per_as,
            peer_count=self.peer_count,
            seed=self.seed,
            access_delay_ms=(self.access_delay_ms_min, self.access_delay_ms_max),
            peer_up_bps=self.peer_up_bps,
            peer_down_bps=self.peer_down_bps,
            server_up_bps=self.server_up_bps,
        )


@dataclass
class _Runtime:
    """Engine-private per-peer scheduling state."""

    peer: Peer
    tick_id: int = 0
    seek_id: int = 0
    waiting_seek: bool = False
    inflight: set[int] = field(default_factory=set)
    queued: set[int] = field(default_factory=set)
    urgent_q: list[int] = field(default_factory=list)
    plan_q: list[tuple[int, str]] = field(default_factory=list)
    active_fetches: int = 0
    pending_report: list[int] = field(default_factory=list)
    pop_list: strat.PopularityList | None = None
    gossip_rounds: int = 0


class Simulation:
    def __init__(self, config: RunConfig, traces: list[ViewerTrace] | None = None,
                 debug: bool = False):
        config.validate()
        self.cfg = config
        self.debug = debug
        self.video = config.video()
        self.topo: NetworkTopology = generate_topology(config.topology_params())
        if traces is not None:
            self.traces = traces
        elif config.trace_file:
            self.traces = load_traces(config.trace_file)
        else:
            self.traces = generate_traces(config.workload_params(), self.video)
        if len(self.traces) > config.peer_count:
            raise ConfigError("peer_count", "fewer peers than traces provided")

        self.overlay = Overlay(config.session_width_s)
        self.ledger = MetricsLedger()
        self.flows = FlowRegistry()
        self.tracker = strat.PopularityTracker()
        self.tables: dict[int, StateTable] = {}
        self.models: dict[int, strat.MiningModel] = {}
        self.rt: dict[int, _Runtime] = {}
        self._mining_seen: dict[tuple[int, int], int] = {}
        self.rng_plan = substream(config.seed, "strategy", config.strategy)
        self.rng_overlay = substream(config.seed, "overlay")

        self.now = 0.0
        self._seq = 0
        self._heap: list[tuple] = []
        self._pending: dict[int, SegmentRequest] = {}
        self._next_rid = 0

        self.lead = 0 if config.strategy == "none" else int(
            round(config.urgent_window_s / config.segment_duration_s))
        if config.trail_keep is not None:
            self.trail_keep = config.trail_keep
        else:
            # Keep enough headroom for the runway, a TTL's worth of budget
            # prefetches and post-seek recovery, so played content is what
            # gets trimmed rather than unplayed prefetches.
            extension = config.prefetch_budget * max(
                1, int(config.prefetch_ttl_s / config.plan_period_s))
            self.trail_keep = max(
                10, config.cache_capacity - 2 * self.lead - extension - 8)
        self.gossips = config.strategy in ("popularity", "mining", "cooperative")

    # -- scheduling ----------------------------------------------------------

    def schedule(self, time: float, kind: str, pid: int = -1, data=None) -> None:
        if time < self.now:
            raise RuntimeError("event scheduled in the past: %s at %f < %f"
                               % (kind, time, self.now))
        heapq.heappush(self._heap, (time, self._seq, kind, pid, data))
        self._seq += 1

    def run(self) -> MetricsReport:
        for trace in self.traces:
            self.schedule(trace.arrival_time, EV_ARRIVAL, trace.peer_id, trace)
        if self.cfg.strategy in ("popularity", "cooperative"):
            period = (self.cfg.pop_period_s if self.cfg.strategy == "popularity"
                      else self.cfg.shortcut_refresh_s)
            self.schedule(period, EV_TRACKER, -1, period)
        self.schedule(self.cfg.duration_s, EV_END)

        handlers = {
            EV_ARRIVAL: self._on_arrival,
            EV_TICK: self._on_tick,
            EV_GOSSIP: self._on_gossip,
            EV_PLAN: self._on_plan,
            EV_SEEK: self._on_seek,
            EV_PAUSE: self._on_pause,
            EV_RESUME: self._on_resume,
            EV_TIMEOUT: self._on_timeout,
            EV_COMPLETE: self._on_complete,
            EV_TRACKER: self._on_tracker,
            EV_DEPART: self._on_depart,
        }
        while self._heap:
            time, _seq, kind, pid, data = heapq.heappop(self._heap)
            if time < self.now:
                raise RuntimeError("clock went backwards")
            self.now = time
            if kind == EV_END:
                break
            handlers[kind](pid, data)
            if self.debug:
                self._check_invariants()
        self._finalize()
        return build_report(self.cfg.strategy, self.cfg.seed, self.ledger)

    # -- arrival / departure -------------------------------------------------

    def _on_arrival(self, pid: int, trace: ViewerTrace) -> None:
        peer = Peer(
            peer_id=pid,
            arrival_time=trace.arrival_time,
            cache=BufferCache(self.cfg.cache_capacity),
            history=TransferHistory(period_s=self.cfg.gossip_period_s),
        )
        self.overlay.assign_session(peer, lambda q: self.topo.path_latency_ms(pid, q))
        rt = _Runtime(peer)
        self.rt[pid] = rt
        if self.gossips:
            self.tables[pid] = StateTable()
        if self.cfg.strategy == "mining":
            self.models[pid] = strat.MiningModel(self.cfg.mining_support)
        if self.cfg.strategy == "cooperative":
            self.overlay.refresh_shortcuts(peer, self.cfg.shortcut_k, self.rng_overlay)

        for ev in trace.events:
            kind = {SEEK: EV_SEEK, PAUSE: EV_PAUSE, RESUME: EV_RESUME, LEAVE: EV_DEPART}[ev.kind]
            self.schedule(ev.time, kind, pid, ev.target)
        self.schedule(self.now, EV_TICK, pid, rt.tick_id)
        if self.gossips:
            self.schedule(self.now + self.cfg.gossip_period_s, EV_GOSSIP, pid)
        if self.cfg.strategy != "none":
            self.schedule(self.now + self.cfg.plan_period_s, EV_PLAN, pid)

    def _on_depart(self, pid: int, _data) -> None:
        rt = self.rt.get(pid)
        if rt is None or rt.peer.departed:
            return
        self.overlay.handle_departure(rt.peer)
        rt.tick_id += 1
        rt.urgent_q.clear()
        rt.plan_q.clear()
        rt.queued.clear()

    # -- playback -------------------------------------------------------------

    def _on_tick(self, pid: int, tick_id: int) -> None:
        rt = self.rt[pid]
        peer = rt.peer
        if peer.departed or rt.tick_id != tick_id or peer.paused or rt.waiting_seek:
            return
        if peer.playhead >= self.video.segment_count:
            self._on_depart(pid, None)
            return
        self._consume(rt, peer.playhead)
        peer.playhead += 1
        self._deliver_lead(rt)
        self._trim_trail(rt)
        self.schedule(self.now + self.cfg.segment_duration_s, EV_TICK, pid, rt.tick_id)

    def _consume(self, rt: _Runtime, seg: int) -> None:
        """Play one segment: from cache when resident, off the stream otherwise."""
        peer = rt.peer
        entry = peer.cache.get(seg)
        if entry is None:
            peer.cache.insert(seg, Origin.LOCAL_STREAM, self.now, peer.playhead,
                              consumed=True)
            self._stream_bytes(peer)
        elif not entry.consumed:
            entry.consumed = True
            if entry.prefetched and not entry.counted_played:
                entry.counted_played = True
                self.ledger.prefetch_played(peer.peer_id)
                if not entry.counted_used:
                    entry.counted_used = True
                    self.ledger.prefetch_used(peer.peer_id)
        peer.record.append(seg)

    def _stream_bytes(self, peer: Peer) -> None:
        if self.overlay.parent_of(peer.peer_id) == SERVER:
            self.ledger.server_bytes += self.video.segment_bits

    def _deliver_lead(self, rt: _Runtime) -> None:
        """The session tree pushes the runway ahead of the playhead, one
        segment per tick, so the urgent window stays resident."""
        if self.lead <= 0:
            return
        peer = rt.peer
        hi = min(peer.playhead + self.lead - 1, self.video.segment_count - 1)
        for seg in range(peer.playhead, hi + 1):
            if seg not in peer.cache and seg not in rt.inflight:
                peer.cache.insert(seg, Origin.LOCAL_STREAM, self.now, peer.playhead)
                self._stream_bytes(peer)
                return

    def _trim_trail(self, rt: _Runtime) -> None:
        peer = rt.peer
        floor = peer.playhead - self.trail_keep
        if floor <= 0:
            return
        stale = [s for s, e in peer.cache.entries.items() if e.consumed and s < floor]
        for seg in stale:
            peer.cache.remove(seg)

    # -- gossip ----------------------------------------------------------------

    def _on_gossip(self, pid: int, _data) -> None:
        rt = self.rt[pid]
        peer = rt.peer
        if peer.departed:
            return
        session = self.overlay.session_of(pid)
        others = self.overlay.live_members(session, excluding=pid)
        if others:
            msg = self.emit_gossip(peer)
            for member in others:
                self.tables[member].apply(msg)
            self.ledger.control(pid, len(others))
            if self.cfg.strategy == "mining" and self.cfg.mining_fanout > 0:
                self._exchange_history(rt, others)
        rt.gossip_rounds += 1
        self.schedule(self.now + self.cfg.gossip_period_s, EV_GOSSIP, pid)

    def emit_gossip(self, peer: Peer) -> BufferMapMsg:
        return BufferMapMsg(
            sender=peer.peer_id,
            segments=frozenset(peer.cache.residents()),
            playhead=peer.playhead,
            issued_at=self.now,
        )

    def _exchange_history(self, rt: _Runtime, others: list[int]) -> None:
        peer = rt.peer
        ranked = sorted(others, key=lambda q: (abs(self.rt[q].peer.playhead - peer.playhead), q))
        recipients = ranked[: self.cfg.mining_fanout]
        record = peer.record.played
        for member in recipients:
            seen = self._mining_seen.get((member, peer.peer_id), 0)
            self.models[member].ingest(record, self.cfg.mining_window, already_seen=seen)
            self._mining_seen[(member, peer.peer_id)] = len(record)
        if recipients:
            self.ledger.control(peer.peer_id, len(recipients))

    # -- planning and prefetch execution ---------------------------------------

    def _on_plan(self, pid: int, _data) -> None:
        rt = self.rt[pid]
        if rt.peer.departed:
            return
        self._do_plan(rt)
        self.schedule(self.now + self.cfg.plan_period_s, EV_PLAN, pid)

    def _do_plan(self, rt: _Runtime) -> None:
        peer = rt.peer
        if peer.playhead >= self.video.segment_count:
            return
        peer.cache.expire(self.now, self.cfg.prefetch_ttl_s)
        table = self.tables.get(peer.peer_id)
        if table is not None:
            table.drop_stale(self.now, 3.0 * self.cfg.gossip_period_s)
        plan = self._build_plan(rt, table)
        rt.urgent_q = [s for s in plan.urgent]
        rt.plan_q = [(t.segment, t.scope_hint) for t in plan.targets]
        rt.queued = set(rt.urgent_q) | {s for s, _ in rt.plan_q}
        self._kick(rt)

    def _build_plan(self, rt: _Runtime, table: StateTable | None) -> strat.PrefetchPlan:
        peer = rt.peer
        resident = frozenset(peer.cache.residents())
        view = strat.PeerView(
            playhead=peer.playhead,
            resident=resident,
            blocked=frozenset(resident | rt.inflight),
            segment_count=self.video.segment_count,
            urgent_window=self.lead,
        )
        name = self.cfg.strategy
        if name == "random":
            return strat.plan_random(view, self.cfg.prefetch_budget, self.rng_plan)
        if name == "popularity":
            pop = rt.pop_list or strat.PopularityList(())
            return strat.plan_popularity(view, pop, self.cfg.prefetch_budget)
        if name == "mining":
            return strat.plan_mining(view, self.models[peer.peer_id], self.cfg.prefetch_budget)
        if name == "cooperative":
            return strat.plan_cooperative(view, table, self.cfg.coop_horizon,
                                          self.cfg.prefetch_budget)
        return strat.plan_none(view)

    def _kick(self, rt: _Runtime) -> None:
        peer = rt.peer
        while rt.active_fetches < self.cfg.max_concurrent_fetch and (rt.urgent_q or rt.plan_q):
            if rt.urgent_q:
                seg, hint, purpose = rt.urgent_q.pop(0), SCOPE_SESSION, "URGENT"
            else:
                (seg, hint), purpose = rt.plan_q.pop(0), "PLAN"
            rt.queued.discard(seg)
            if seg in peer.cache or seg in rt.inflight:
                continue
            tiers = self._tiers(hint)
            req = SegmentRequest(
                requester=peer.peer_id, segment=seg, issued_at=self.now,
                scope=tiers[0], deadline=self.now + self.cfg.request_timeout_s,
                purpose=purpose, tiers_left=list(tiers),
            )
            rt.inflight.add(seg)
            rt.active_fetches += 1
            self._attempt(req)

    def _tiers(self, hint: str) -> list[str]:
        if hint == SCOPE_SHORTCUT:
            return [SCOPE_SHORTCUT, SCOPE_SERVER]
        tiers = [SCOPE_SESSION]
        if self.cfg.strategy == "cooperative":
            tiers.append(SCOPE_SHORTCUT)
        tiers.append(SCOPE_SERVER)
        return tiers

    # -- request routing --------------------------------------------------------

    def _attempt(self, req: SegmentRequest) -> None:
        while req.tiers_left:
            tier = req.tiers_left.pop(0)
            provider = self._pick_provider(req, tier)
            if provider is None:
                continue
            req.scope = tier
            req.provider = provider
            req.issued_at = self.now
            rid = self._next_rid
            self._next_rid += 1
            self._pending[rid] = req
            self.ledger.data(req.requester, 1)  # request message
            if provider == SERVER:
                self._start_transfer(rid, req)
            elif self.rt[provider].peer.departed:
                self.schedule(self.now + self.cfg.request_timeout_s, EV_TIMEOUT, req.requester, rid)
            elif req.segment not in self.rt[provider].peer.cache:
                self.schedule(self.now + self.topo.rtt_s(req.requester, provider),
                              EV_COMPLETE, req.requester, (rid, False))
            else:
                self._start_transfer(rid, req)
            return
        raise RuntimeError("request ran out of tiers")  # SERVER is terminal

    def _pick_provider(self, req: SegmentRequest, tier: str) -> int | None:
        pid = req.requester
        rt = self.rt[pid]
        if tier == SCOPE_SERVER:
            return SERVER
        if tier == SCOPE_SESSION:
            if req.purpose == "SEEK":
                session = self.overlay.session_of(pid)
                cands = [q for q in self.overlay.live_members(session, excluding=pid)
                         if req.segment in self.rt[q].peer.cache]
                playheads = {q: self.rt[q].peer.playhead for q in cands}
            elif self.cfg.strategy in ("popularity", "mining", "cooperative"):
                table = self.tables[pid]
                cands = [q for q in table.holders(req.segment) if q != pid]
                playheads = {q: table.rows[q].playhead for q in cands}
            elif self.cfg.strategy == "random":
                session = self.overlay.session_of(pid)
                members = self.overlay.live_members(session, excluding=pid)
                if not members:
                    return None
                me = rt.peer.playhead
                blind = min(members, key=lambda q: (abs(self.rt[q].peer.playhead - me), q))
                return blind
            else:
                return None
            cands = [q for q in cands if self.flows.uploads(q) < self.cfg.max_uploads]
            return choose_provider(cands, rt.peer.history, playheads, rt.peer.playhead,
                                   lambda q: self.topo.path_latency_ms(pid, q), self.now)
        if tier == SCOPE_SHORTCUT:
            if self.cfg.strategy != "cooperative":
                return None
            holders = [q for q in self.overlay.valid_shortcuts(rt.peer)
                       if req.segment in self.rt[q].peer.cache
                       and self.flows.uploads(q) < self.cfg.max_uploads]
            playheads = {q: self.rt[q].peer.playhead for q in holders}
            return choose_provider(holders, rt.peer.history, playheads, rt.peer.playhead,
                                   lambda q: self.topo.path_latency_ms(pid, q), self.now)
        return None

    def _start_transfer(self, rid: int, req: SegmentRequest) -> None:
        provider = req.provider
        up_flows, down_flows = self.flows.start(provider, req.requester)
        if req.purpose == "SEEK":
            # Interactive recovery preempts background prefetch flows at both
            # endpoints (strict two-level priority).
            up_flows = down_flows = 1
        duration = transfer_time(
            self.video.segment_bits,
            self.topo.up_bps(provider), self.topo.down_bps(req.requester),
            up_flows, down_flows,
        )
        rtt = self.topo.rtt_s(req.requester, provider)
        if provider != SERVER:
            entry = self.rt[provider].peer.cache.get(req.segment)
            if entry is not None and entry.prefetched and not entry.counted_used:
                entry.counted_used = True
                self.ledger.prefetch_used(provider)
        self.schedule(self.now + rtt + duration, EV_COMPLETE, req.requester, (rid, True))

    def _on_timeout(self, _pid: int, rid: int) -> None:
        req = self._pending.pop(rid, None)
        if req is None:
            return
        self._attempt(req)

    def _on_complete(self, _pid: int, data) -> None:
        rid, success = data
        req = self._pending.pop(rid, None)
        if req is None:
            return
        self.ledger.data(req.requester, 1)  # response message
        if not success:
            self._attempt(req)
            return
        if req.provider is not None:
            self.flows.finish(req.provider, req.requester)
        rt = self.rt[req.requester]
        peer = rt.peer
        if req.provider == SERVER:
            self.ledger.server_bytes += self.video.segment_bits
        if req.purpose == "SEEK":
            self._finish_seek(rt, req)
            return
        rt.inflight.discard(req.segment)
        rt.active_fetches -= 1
        if not peer.departed:
            origin = {
                SCOPE_SESSION: Origin.PREFETCH_PEER,
                SCOPE_SHORTCUT: Origin.PREFETCH_SHORTCUT,
                SCOPE_SERVER: Origin.SERVER,
            }[req.scope]
            peer.cache.insert(req.segment, origin, self.now, peer.playhead,
                              prefetched=True)
            self.ledger.prefetched(peer.peer_id)
            if req.provider != SERVER:
                peer.history.record(req.provider, self.now)
            self._kick(rt)

    # -- seeks --------------------------------------------------------------------

    def _on_seek(self, pid: int, target: int) -> None:
        rt = self.rt.get(pid)
        if rt is None or rt.peer.departed:
            return
        peer = rt.peer
        if not self.video.valid_segment(target):
            raise RuntimeError("seek target %d outside video" % target)
        if self.cfg.strategy == "popularity":
            rt.pending_report.append(target)
        rt.seek_id += 1  # supersedes any fetch still pending for an older seek

        entry = peer.cache.get(target)
        if entry is not None and entry.consumed:
            # Still-cached, already-played content: replay, not a prefetch request.
            self.ledger.replay(pid)
            self._resume_at(rt, target)
            return
        if entry is not None:
            self.ledger.seek_outcome(pid, REL_HIT, 0.0)
            self._consume_target(rt, target)
            self._resume_at(rt, target, consumed=True)
            return

        rt.waiting_seek = True
        rt.tick_id += 1  # playback halts until the target arrives
        req = SegmentRequest(
            requester=pid, segment=target, issued_at=self.now,
            scope=SCOPE_SESSION, deadline=self.now + self.cfg.request_timeout_s,
            purpose="SEEK", seek_time=self.now, seek_id=rt.seek_id,
            tiers_left=self._tiers(SCOPE_SESSION),
        )
        self._attempt(req)

    def _consume_target(self, rt: _Runtime, target: int) -> None:
        entry = rt.peer.cache.get(target)
        if entry is not None and not entry.consumed:
            entry.consumed = True
            if entry.prefetched and not entry.counted_played:
                entry.counted_played = True
                self.ledger.prefetch_played(rt.peer.peer_id)
                if not entry.counted_used:
                    entry.counted_used = True
                    self.ledger.prefetch_used(rt.peer.peer_id)

    def _resume_at(self, rt: _Runtime, target: int, consumed: bool = False) -> None:
        peer = rt.peer
        peer.record.append(target)
        peer.playhead = target + 1
        peer.paused = False
        rt.waiting_seek = False
        rt.tick_id += 1
        self.schedule(self.now + self.cfg.segment_duration_s, EV_TICK, peer.peer_id, rt.tick_id)
        if self.cfg.strategy != "none":
            self._do_plan(rt)  # refill the urgent window at the new position

    def _finish_seek(self, rt: _Runtime, req: SegmentRequest) -> None:
        kind = {
            SCOPE_SESSION: GLOBAL_HIT,
            SCOPE_SHORTCUT: SHORTCUT_FETCH,
            SCOPE_SERVER: SERVER_FETCH,
        }[req.scope]
        self.ledger.seek_outcome(req.requester, kind, self.now - req.seek_time)
        peer = rt.peer
        if peer.departed or req.seek_id != rt.seek_id:
            return
        origin = {
            SCOPE_SESSION: Origin.PREFETCH_PEER,
            SCOPE_SHORTCUT: Origin.PREFETCH_SHORTCUT,
            SCOPE_SERVER: Origin.SERVER,
        }[req.scope]
        peer.cache.insert(req.segment, origin, self.now, peer.playhead, consumed=True)
        if req.provider != SERVER and req.provider is not None:
            peer.history.record(req.provider, self.now)
        self._resume_at(rt, req.segment, consumed=True)

    # -- pause / resume --------------------------------------------------------

    def _on_pause(self, pid: int, _data) -> None:
        rt = self.rt[pid]
        if rt.peer.departed:
            return
        rt.peer.paused = True
        rt.tick_id += 1

    def _on_resume(self, pid: int, _data) -> None:
        rt = self.rt[pid]
        peer = rt.peer
        if peer.departed or not peer.paused:
            return
        peer.paused = False
        if not rt.waiting_seek:
            rt.tick_id += 1
            self.schedule(self.now, EV_TICK, pid, rt.tick_id)

    # -- tracker -----------------------------------------------------------------

    def _on_tracker(self, _pid: int, period: float) -> None:
        live = self.overlay.live_peers()
        if self.cfg.strategy == "popularity":
            for pid in live:
                rt = self.rt[pid]
                strat.tracker_update(self.tracker, rt.pending_report)
                rt.pending_report.clear()
                self.ledger.control(pid, 1)       # report to the tracker
            snapshot = self.tracker.snapshot(self.cfg.pop_list_length, self.now)
            for pid in live:
                self.rt[pid].pop_list = snapshot
                self.ledger.control(pid, 1)       # list push to the peer
            self.tracker.reset()
        elif self.cfg.strategy == "cooperative":
            for pid in live:
                self.overlay.refresh_shortcuts(
                    self.rt[pid].peer, self.cfg.shortcut_k, self.rng_overlay)
        self.schedule(self.now + period, EV_TRACKER, -1, period)

    # -- wrap-up -------------------------------------------------------------------

    def _finalize(self) -> None:
        for rid in sorted(self._pending):
            req = self._pending[rid]
            if req.purpose == "SEEK":
                kind = {
                    SCOPE_SESSION: GLOBAL_HIT,
                    SCOPE_SHORTCUT: SHORTCUT_FETCH,
                    SCOPE_SERVER: SERVER_FETCH,
                }[req.scope]
                self.ledger.seek_outcome(req.requester, kind,
                                         self.cfg.duration_s - req.seek_time)
        self._pending.clear()

    def _check_invariants(self) -> None:
        for pid, rt in self.rt.items():
            assert len(rt.peer.cache) <= self.cfg.cache_capacity, "cache overflow"
            if rt.peer.live:
                session = self.overlay.session_of(pid)
                assert session.contains_time(rt.peer.arrival_time), "window violated"
                for q in self.overlay.valid_shortcuts(rt.peer):
                    assert self.overlay.peers[q].session_id != rt.peer.session_id
        for session in self.overlay.sessions.values():
            assert self.overlay.tree_is_acyclic(session), "tree cycle"


def run(config: RunConfig, traces: list[ViewerTrace] | None = None,
        debug: bool = False) -> MetricsReport:
    """Execute one run; identical config and seed give identical reports."""
    return Simulation(config, traces=traces, debug=debug).run()


def _run_one(config: RunConfig) -> MetricsReport:
    return run(config)


def sweep(configs: list[RunConfig], parallelism: int = 1) -> list[MetricsReport]:
    """Run many isolated configs; results arrive in input order regardless of
    the worker count."""
    if parallelism < 1:
        raise ConfigError("parallelism", "must be >= 1")
    for cfg in configs:
        cfg.validate()
    if parallelism == 1 or len(configs) <= 1:
        results = []
        for i, cfg in enumerate(configs):
            try:
                results.append(run(cfg))
            except Exception as exc:
                raise RuntimeError("run %d (%s, seed %d) failed: %s"
                                   % (i, cfg.strategy, cfg.seed, exc)) from exc
        return results
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(_run_one, cfg) for cfg in configs]
        results = []
        for i, fut in enumerate(futures):
            try:
                results.append(fut.result())
            except Exception as exc:
                cfg = configs[i]
                raise RuntimeError("run %d (%s, seed %d) failed: %s"
                                   % (i, cfg.strategy, cfg.seed, exc)) from exc
        return results


def config_variants(base: RunConfig, **overrides) -> RunConfig:
    """Convenience wrapper around dataclasses.replace with validation."""
    cfg = replace(base, **overrides)
    cfg.validate()
    return cfg


CONFIG_FIELDS = tuple(f.name for f in fields(RunConfig))
