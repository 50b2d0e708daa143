"""Simplified transit-stub physical network with latency/bandwidth queries.

Each autonomous system contributes a small ring of transit routers with stub
routers hanging off them; systems are chained by single transit links. Peers
attach to random routers through an access link whose delay is drawn from a
configurable range. The core is assumed uncongested, so bandwidth is a
property of the endpoints only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import SERVER
from .util import substream


@dataclass(frozen=True)
class AccessLink:
    delay_ms: float
    up_bps: float
    down_bps: float


@dataclass(frozen=True)
class TopologyParams:
    as_count: int = 2
    routers_per_as: int = 4
    peer_count: int = 50
    seed: int = 0
    access_delay_ms: tuple[float, float] = (5.0, 10.0)
    core_delay_ms: tuple[float, float] = (1.0, 5.0)
    peer_up_bps: float = 512_000.0
    peer_down_bps: float = 512_000.0
    server_up_bps: float = 20_000_000.0

    def validate(self) -> None:
        if self.as_count < 1 or self.routers_per_as < 1:
            raise ValueError("as_count and routers_per_as must be >= 1")
        if self.peer_count < 1:
            raise ValueError("peer_count must be >= 1")


class NetworkTopology:
    """Immutable after generation; all queries are pure lookups."""

    def __init__(self, params: TopologyParams, access: dict[int, AccessLink],
                 node_router: dict[int, int], edges: list[tuple[int, int, float]],
                 router_count: int):
        self.params = params
        self.access = access          # node id -> access link (peers and SERVER)
        self.node_router = node_router
        self.edges = edges            # core (router, router, delay_ms)
        self.router_count = router_count
        self._dist = self._all_pairs()

    def _all_pairs(self) -> np.ndarray:
        n = self.router_count
        dist = np.full((n, n), np.inf)
        np.fill_diagonal(dist, 0.0)
        for a, b, d in self.edges:
            dist[a, b] = min(dist[a, b], d)
            dist[b, a] = min(dist[b, a], d)
        for k in range(n):
            dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
        return dist

    def path_latency_ms(self, a: int, b: int) -> float:
        """One-way latency between two endpoints (peers or SERVER)."""
        if a not in self.access or b not in self.access:
            raise KeyError("unknown node: %r" % ([n for n in (a, b) if n not in self.access][0],))
        if a == b:
            return 0.0
        core = float(self._dist[self.node_router[a], self.node_router[b]])
        return self.access[a].delay_ms + core + self.access[b].delay_ms

    def rtt_s(self, a: int, b: int) -> float:
        return 2.0 * self.path_latency_ms(a, b) / 1000.0

    def up_bps(self, node: int) -> float:
        return self.access[node].up_bps

    def down_bps(self, node: int) -> float:
        return self.access[node].down_bps

    def dumps(self) -> str:
        """Line-oriented dump: NODE and EDGE records, stable across runs."""
        lines = []
        for node in sorted(self.access):
            link = self.access[node]
            kind = "server" if node == SERVER else "peer"
            lines.append("NODE %d %s %.6f %.0f %.0f" % (
                node, kind, link.delay_ms, link.up_bps, link.down_bps))
        for a, b, d in self.edges:
            lines.append("EDGE %d %d %.6f" % (a, b, d))
        return "\n".join(lines) + "\n"

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


def generate_topology(params: TopologyParams) -> NetworkTopology:
    """Build the transit-stub network; deterministic for a given seed."""
    params.validate()
    rng = substream(params.seed, "topology")

    transit_per_as = max(1, params.routers_per_as // 3)
    edges: list[tuple[int, int, float]] = []
    transit: list[list[int]] = []
    stubs: list[list[int]] = []
    next_router = 0

    def core_delay() -> float:
        lo, hi = params.core_delay_ms
        return round(rng.uniform(lo, hi), 6)

    for _ in range(params.as_count):
        t = list(range(next_router, next_router + transit_per_as))
        next_router += transit_per_as
        s = list(range(next_router, next_router + params.routers_per_as - transit_per_as))
        next_router += len(s)
        transit.append(t)
        stubs.append(s)
        if len(t) == 2:
            edges.append((t[0], t[1], core_delay()))
        elif len(t) > 2:
            for i in range(len(t)):
                edges.append((t[i], t[(i + 1) % len(t)], core_delay()))
        for i, stub in enumerate(s):
            edges.append((stub, t[i % len(t)], core_delay()))

    for k in range(params.as_count - 1):
        edges.append((transit[k][0], transit[k + 1][0], core_delay()))

    access: dict[int, AccessLink] = {}
    node_router: dict[int, int] = {}

    def access_delay() -> float:
        lo, hi = params.access_delay_ms
        return round(rng.uniform(lo, hi), 6)

    # Peers land on random routers, stubs preferred when they exist.
    attach_points = [r for s in stubs for r in s] or [r for t in transit for r in t]
    for pid in range(params.peer_count):
        access[pid] = AccessLink(access_delay(), params.peer_up_bps, params.peer_down_bps)
        node_router[pid] = rng.choice(attach_points)

    access[SERVER] = AccessLink(access_delay(), params.server_up_bps, params.server_up_bps)
    node_router[SERVER] = transit[0][0]

    return NetworkTopology(params, access, node_router, edges, next_router)
