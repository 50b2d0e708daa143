"""Transit-stub generator and latency queries."""

import heapq
import random

import pytest

from vodsim.domain import SERVER
from vodsim.topology import TopologyParams, generate_topology


def test_smallest_topology_is_a_star():
    topo = generate_topology(TopologyParams(as_count=1, routers_per_as=1,
                                            peer_count=1, seed=7))
    assert topo.router_count == 1
    assert topo.node_router[0] == topo.node_router[SERVER] == 0
    lat = topo.path_latency_ms(0, SERVER)
    assert lat == topo.access[0].delay_ms + topo.access[SERVER].delay_ms


def test_same_seed_bit_identical_serialization():
    params = TopologyParams(as_count=2, routers_per_as=4, peer_count=50, seed=1)
    assert generate_topology(params).dumps() == generate_topology(params).dumps()


def test_different_seed_changes_topology():
    a = generate_topology(TopologyParams(peer_count=10, seed=1)).dumps()
    b = generate_topology(TopologyParams(peer_count=10, seed=2)).dumps()
    assert a != b


def test_access_delays_within_default_range():
    topo = generate_topology(TopologyParams(as_count=3, routers_per_as=5,
                                            peer_count=80, seed=3))
    for node, link in topo.access.items():
        assert 5.0 <= link.delay_ms <= 10.0


def test_bandwidth_defaults():
    topo = generate_topology(TopologyParams(peer_count=5, seed=4))
    assert topo.up_bps(SERVER) == 20_000_000.0
    for pid in range(5):
        assert topo.up_bps(pid) == topo.down_bps(pid) == 512_000.0


def test_identity_and_symmetry():
    topo = generate_topology(TopologyParams(as_count=2, routers_per_as=4,
                                            peer_count=12, seed=5))
    for a in list(range(12)) + [SERVER]:
        assert topo.path_latency_ms(a, a) == 0.0
        for b in list(range(12)) + [SERVER]:
            assert topo.path_latency_ms(a, b) == pytest.approx(topo.path_latency_ms(b, a))


def test_unknown_node_raises():
    topo = generate_topology(TopologyParams(peer_count=3, seed=6))
    with pytest.raises(KeyError):
        topo.path_latency_ms(0, 99)


def test_rejects_zero_peers():
    with pytest.raises(ValueError):
        generate_topology(TopologyParams(peer_count=0))


def _dijkstra(edges, n, src):
    adj = {}
    for a, b, d in edges:
        adj.setdefault(a, []).append((b, d))
        adj.setdefault(b, []).append((a, d))
    dist = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, float("inf")):
            continue
        for v, w in adj.get(u, ()):
            nd = d + w
            if nd < dist.get(v, float("inf")):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return [dist.get(i, float("inf")) for i in range(n)]


def test_all_pairs_match_dijkstra_oracle():
    topo = generate_topology(TopologyParams(as_count=3, routers_per_as=4,
                                            peer_count=10, seed=8))
    rng = random.Random(0)
    nodes = list(range(10)) + [SERVER]
    for a in nodes:
        ra = topo.node_router[a]
        oracle = _dijkstra(topo.edges, topo.router_count, ra)
        for b in rng.sample(nodes, 6):
            if a == b:
                continue
            expected = topo.access[a].delay_ms + oracle[topo.node_router[b]] \
                + topo.access[b].delay_ms
            assert topo.path_latency_ms(a, b) == pytest.approx(expected)


def test_every_peer_reaches_server():
    topo = generate_topology(TopologyParams(as_count=4, routers_per_as=6,
                                            peer_count=40, seed=9))
    for pid in range(40):
        assert topo.path_latency_ms(pid, SERVER) < float("inf")


def test_dump_round_trip_format():
    topo = generate_topology(TopologyParams(peer_count=4, seed=10))
    lines = topo.dumps().strip().splitlines()
    kinds = {line.split()[0] for line in lines}
    assert kinds <= {"NODE", "EDGE"}
    node_lines = [l for l in lines if l.startswith("NODE")]
    assert len(node_lines) == 5  # 4 peers + server
