"""Run ledger and report generation for the six evaluation quantities."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .util import fmt6

REL_HIT = "RELATIVE_HIT"
GLOBAL_HIT = "GLOBAL_HIT"
SHORTCUT_FETCH = "SHORTCUT_FETCH"
SERVER_FETCH = "SERVER_FETCH"

OUTCOMES = (REL_HIT, GLOBAL_HIT, SHORTCUT_FETCH, SERVER_FETCH)

SUMMARY_HEADER = "strategy,seed,hr_r,hr_g,lat_mean_s,lat_p95_s,util_rel,util_glob,overhead_msgs"
PER_PEER_HEADER = "peer,seeks,rel_hits,glob_hits,shortcut,server,prefetched,played,ctrl_msgs"


@dataclass
class PeerStats:
    seeks: int = 0
    relative_hits: int = 0
    global_hits: int = 0
    shortcut_fetches: int = 0
    server_fetches: int = 0
    replays: int = 0
    seek_latencies: list[float] = field(default_factory=list)
    prefetched_segments: int = 0
    prefetched_played: int = 0
    prefetched_used: int = 0
    control_msgs: int = 0
    data_msgs: int = 0
    stall_s: float = 0.0


class MetricsLedger:
    """Monotone counters, one bucket per peer plus run-level aggregates."""

    def __init__(self):
        self.peers: dict[int, PeerStats] = {}
        self.server_bytes: float = 0.0

    def stats(self, pid: int) -> PeerStats:
        st = self.peers.get(pid)
        if st is None:
            st = PeerStats()
            self.peers[pid] = st
        return st

    def seek_outcome(self, pid: int, kind: str, latency_s: float) -> None:
        st = self.stats(pid)
        st.seeks += 1
        st.seek_latencies.append(latency_s)
        st.stall_s += latency_s
        if kind == REL_HIT:
            st.relative_hits += 1
        elif kind == GLOBAL_HIT:
            st.global_hits += 1
        elif kind == SHORTCUT_FETCH:
            st.shortcut_fetches += 1
        elif kind == SERVER_FETCH:
            st.server_fetches += 1
        else:
            raise ValueError("unknown outcome kind %r" % (kind,))

    def replay(self, pid: int) -> None:
        self.stats(pid).replays += 1

    def control(self, pid: int, n: int = 1) -> None:
        self.stats(pid).control_msgs += n

    def data(self, pid: int, n: int = 1) -> None:
        self.stats(pid).data_msgs += n

    def prefetched(self, pid: int) -> None:
        self.stats(pid).prefetched_segments += 1

    def prefetch_played(self, pid: int) -> None:
        self.stats(pid).prefetched_played += 1

    def prefetch_used(self, pid: int) -> None:
        self.stats(pid).prefetched_used += 1

    # -- derived quantities -------------------------------------------------

    def total(self, attr: str) -> int:
        return sum(getattr(st, attr) for st in self.peers.values())

    def all_latencies(self) -> list[float]:
        out = []
        for pid in sorted(self.peers):
            out.extend(self.peers[pid].seek_latencies)
        return out


def relative_hit_ratio(ledger: MetricsLedger) -> float | None:
    """Fraction of seeks whose target was already cached locally."""
    seeks = ledger.total("seeks")
    if seeks == 0:
        return None
    return ledger.total("relative_hits") / seeks


def global_hit_ratio(ledger: MetricsLedger) -> float | None:
    """Fraction of seeks served by a peer in the same session."""
    seeks = ledger.total("seeks")
    if seeks == 0:
        return None
    return ledger.total("global_hits") / seeks


def utilization_ratios(ledger: MetricsLedger) -> dict[str, float | None]:
    """Relative: mean per-peer played/prefetched over peers that prefetched.
    Global: pooled used/prefetched over the whole run, where "used" means
    played locally or uploaded to another peer at least once.
    """
    per_peer = [
        st.prefetched_played / st.prefetched_segments
        for st in ledger.peers.values()
        if st.prefetched_segments > 0
    ]
    total_prefetched = ledger.total("prefetched_segments")
    out: dict[str, float | None] = {"relative": None, "global": None}
    if per_peer:
        out["relative"] = sum(per_peer) / len(per_peer)
    if total_prefetched > 0:
        out["global"] = ledger.total("prefetched_used") / total_prefetched
    return out


def _percentile(sorted_values: list[float], q: float) -> float | None:
    if not sorted_values:
        return None
    idx = min(len(sorted_values) - 1, max(0, math.ceil(q * len(sorted_values)) - 1))
    return sorted_values[idx]


@dataclass
class PeerRow:
    peer: int
    seeks: int
    rel_hits: int
    glob_hits: int
    shortcut: int
    server: int
    prefetched: int
    played: int
    ctrl_msgs: int


@dataclass
class MetricsReport:
    strategy: str
    seed: int
    seeks: int = 0
    hr_r: float | None = None
    hr_g: float | None = None
    lat_mean_s: float | None = None
    lat_median_s: float | None = None
    lat_p95_s: float | None = None
    util_rel: float | None = None
    util_glob: float | None = None
    overhead_msgs: int = 0
    data_msgs: int = 0
    server_bytes: float = 0.0
    per_peer: list[PeerRow] = field(default_factory=list)
    # (latency sum, seek count) per peer; kept on the report object for
    # analysis but deliberately absent from the CSV exports.
    peer_latency: dict[int, tuple[float, int]] = field(default_factory=dict)

    @property
    def hr_combined(self) -> float | None:
        if self.hr_r is None or self.hr_g is None:
            return None
        return round(self.hr_r + self.hr_g, 6)


def _round_opt(x: float | None) -> float | None:
    return None if x is None else round(x, 6)


def build_report(strategy: str, seed: int, ledger: MetricsLedger) -> MetricsReport:
    lats = sorted(ledger.all_latencies())
    util = utilization_ratios(ledger)
    rows = [
        PeerRow(
            peer=pid,
            seeks=st.seeks,
            rel_hits=st.relative_hits,
            glob_hits=st.global_hits,
            shortcut=st.shortcut_fetches,
            server=st.server_fetches,
            prefetched=st.prefetched_segments,
            played=st.prefetched_played,
            ctrl_msgs=st.control_msgs,
        )
        for pid, st in sorted(ledger.peers.items())
    ]
    n = len(lats)
    return MetricsReport(
        strategy=strategy,
        seed=seed,
        seeks=ledger.total("seeks"),
        hr_r=_round_opt(relative_hit_ratio(ledger)),
        hr_g=_round_opt(global_hit_ratio(ledger)),
        lat_mean_s=_round_opt(sum(lats) / n if n else None),
        lat_median_s=_round_opt(lats[(n - 1) // 2] if n else None),
        lat_p95_s=_round_opt(_percentile(lats, 0.95)),
        util_rel=_round_opt(util["relative"]),
        util_glob=_round_opt(util["global"]),
        overhead_msgs=ledger.total("control_msgs"),
        data_msgs=ledger.total("data_msgs"),
        server_bytes=ledger.server_bytes,
        per_peer=rows,
        peer_latency={
            pid: (sum(st.seek_latencies), len(st.seek_latencies))
            for pid, st in sorted(ledger.peers.items())
        },
    )


# ---------------------------------------------------------------------------
# CSV / JSON export, byte-stable: floats always carry six fractional digits.
# ---------------------------------------------------------------------------

def summary_row(report: MetricsReport) -> str:
    return ",".join([
        report.strategy,
        str(report.seed),
        fmt6(report.hr_r),
        fmt6(report.hr_g),
        fmt6(report.lat_mean_s),
        fmt6(report.lat_p95_s),
        fmt6(report.util_rel),
        fmt6(report.util_glob),
        str(report.overhead_msgs),
    ])


def per_peer_csv(report: MetricsReport) -> str:
    lines = [PER_PEER_HEADER]
    for r in report.per_peer:
        lines.append(",".join(str(v) for v in (
            r.peer, r.seeks, r.rel_hits, r.glob_hits, r.shortcut,
            r.server, r.prefetched, r.played, r.ctrl_msgs)))
    return "\n".join(lines) + "\n"


def export_report(report: MetricsReport, out_dir) -> tuple[Path, Path]:
    """Write summary.csv and per_peer_<strategy>_<seed>.csv under out_dir.

    The summary file gains one row per exported report; rereading both files
    reconstructs the report's exported fields exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = out / "summary.csv"
    if not summary.exists():
        summary.write_text(SUMMARY_HEADER + "\n")
    with open(summary, "a") as fh:
        fh.write(summary_row(report) + "\n")
    per_peer = out / ("per_peer_%s_%d.csv" % (report.strategy, report.seed))
    per_peer.write_text(per_peer_csv(report))
    mirror = out / ("summary_%s_%d.json" % (report.strategy, report.seed))
    mirror.write_text(json.dumps({
        "strategy": report.strategy,
        "seed": report.seed,
        "seeks": report.seeks,
        "hr_r": report.hr_r,
        "hr_g": report.hr_g,
        "hr_r_plus_g": report.hr_combined,
        "lat_mean_s": report.lat_mean_s,
        "lat_median_s": report.lat_median_s,
        "lat_p95_s": report.lat_p95_s,
        "util_rel": report.util_rel,
        "util_glob": report.util_glob,
        "overhead_msgs": report.overhead_msgs,
        "data_msgs": report.data_msgs,
        "server_bytes": report.server_bytes,
    }, indent=2) + "\n")
    return summary, per_peer


def _parse_opt(text: str) -> float | None:
    return None if text == "" else float(text)


def parse_summary(path) -> list[dict]:
    rows = []
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SUMMARY_HEADER:
        raise ValueError("unexpected summary header in %s" % (path,))
    for line in lines[1:]:
        f = line.split(",")
        rows.append({
            "strategy": f[0],
            "seed": int(f[1]),
            "hr_r": _parse_opt(f[2]),
            "hr_g": _parse_opt(f[3]),
            "lat_mean_s": _parse_opt(f[4]),
            "lat_p95_s": _parse_opt(f[5]),
            "util_rel": _parse_opt(f[6]),
            "util_glob": _parse_opt(f[7]),
            "overhead_msgs": int(f[8]),
        })
    return rows


def parse_per_peer(path) -> list[PeerRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != PER_PEER_HEADER:
        raise ValueError("unexpected per-peer header in %s" % (path,))
    return [PeerRow(*(int(v) for v in line.split(","))) for line in lines[1:]]
