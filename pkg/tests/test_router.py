import itertools
import math
import random

import pytest

from bmlrp import topology
from bmlrp.ascent import build_multilevel
from bmlrp.experiments import delivery_check
from bmlrp.idspace import prefix_len
from bmlrp.levels import edge
from bmlrp.oracle import bfs_distance, f2_network, load_fixture
from bmlrp.router import (ExpansionError, Router, RoutingFailure, bfs_lengths, expand_link,
                          measure_stretch, next_hop, route, sample_pairs)
from bmlrp.topology import GenConfig, PhysicalNetwork


def b(text):
    return int(text, 2)


@pytest.fixture(scope="module")
def f2():
    return f2_network()


@pytest.fixture(scope="module")
def built():
    raw = topology.generate_geometric(GenConfig(200, 12, seed=21))
    return build_multilevel(topology.restrict_largest_component(raw))


def test_next_hop_f2(f2):
    adj = f2.levels[""].table_adjacency(b("11100"))
    assert next_hop(b("11100"), b("01000"), adj, 5) == b("01100")
    adj = f2.levels["0"].table_adjacency(b("01100"))
    nxt = next_hop(b("01100"), b("01000"), adj, 5)
    assert nxt == b("01010") and prefix_len(nxt, b("01000"), 5) == 3


def test_next_hop_prefers_visible_destination():
    adj = {1: [2], 2: [1, 3], 3: [2]}
    assert next_hop(1, 3, adj, 2) == 3
    with pytest.raises(ValueError):
        next_hop(1, 1, adj, 2)


def test_next_hop_tie_breaks():
    # d=0b0000 unseen; 0b0011 and 0b0001 both at distance 1 -> smaller xor wins
    adj = {0b1000: [0b0011, 0b0001], 0b0011: [0b1000], 0b0001: [0b1000]}
    assert next_hop(0b1000, 0b0000, adj, 4) == 0b0001
    # distance beats xor
    adj = {8: [3], 3: [8, 1], 1: [3]}
    assert next_hop(8, 0, adj, 4) == 3


def test_next_hop_failure():
    with pytest.raises(RoutingFailure):
        next_hop(0b1000, 0b0000, {0b1000: [0b1100], 0b1100: [0b1000]}, 4)


def test_route_f2(f2):
    fx = load_fixture("f2")
    want = fx.expected["route"]
    res = route(f2, b(want["src"]), b(want["dst"]))
    assert res.logical_hops == tuple(b(x) for x in want["logical_hops"])
    last = res.segments[-1]
    assert last.depth == 3 and last.table_path == tuple(b(x) for x in want["last_segment"])
    links = fx.network.links
    assert all(edge(u, v) in links for u, v in zip(res.physical_path, res.physical_path[1:]))
    assert res.hop_count == len(res.physical_path) - 1


def test_route_to_self(f2):
    res = route(f2, b("11100"), b("11100"))
    assert res.hop_count == 0 and res.physical_path == (b("11100"),) and res.levels_used == ()


def test_expand_link_levels(built):
    lvl0 = built.levels[""]
    (u, v) = next(iter(sorted(lvl0.links)))
    assert expand_link(built, built.virtual_link("", u, v)) == (u, v)
    for prefix in ("0", "01", "010"):
        for (u, v), real in sorted(built.levels[prefix].links.items()):
            phys = expand_link(built, built.virtual_link(prefix, u, v))
            assert phys[0] == u and phys[-1] == v
            assert all(edge(x, y) in built.physical.links for x, y in zip(phys, phys[1:]))
            if prefix == "0":
                parent = built.levels[""].links
                assert all(edge(x, y) in parent for x, y in zip(real, real[1:]))
    with pytest.raises(ExpansionError):
        Router(built).expand("0", 0, 0)


def test_route_invariants(built):
    rng = random.Random(3)
    nodes = sorted(built.physical.nodes)
    router = Router(built)
    width = built.width
    for _ in range(400):
        s, d = rng.sample(nodes, 2)
        res = router.route(s, d)
        pl = [prefix_len(x, d, width) for x in res.logical_hops]
        assert all(y > x for x, y in zip(pl, pl[1:]))
        assert res.physical_path[0] == s and res.physical_path[-1] == d
        assert all(edge(x, y) in built.physical.links
                   for x, y in zip(res.physical_path, res.physical_path[1:]))
        assert list(res.levels_used) == sorted(set(res.levels_used))


def test_delivery_full_enumeration(built):
    rep = delivery_check(built, seed=0)
    n = len(built.physical.nodes)
    assert rep.pairs_tested == n * (n - 1)
    assert (rep.failures, rep.loop_violations, rep.bad_physical) == (0, 0, 0)


def test_truncated_tables_fail_gracefully(built):
    rep = delivery_check(built, seed=0, direct_only=True)
    assert rep.failures > 0


def test_complete_graph_stretch_one():
    ids = list(range(0, 64, 3))
    net = PhysicalNetwork(6, {x: (0.0, 0.0) for x in ids},
                          {edge(u, v) for u, v in itertools.combinations(ids, 2)})
    rep = measure_stretch(build_multilevel(net), sample_size=10_000)
    assert rep.failures == 0 and len(rep.pairs) == len(ids) * (len(ids) - 1)
    assert rep.mean == rep.median == rep.p95 == 1.0


def test_stretch_at_least_one(built):
    rep = measure_stretch(built, sample_size=2000, seed=5)
    assert rep.failures == 0 and len(rep.pairs) == 2000
    assert all(p.stretch >= 1 for p in rep.pairs)
    assert math.isclose(rep.mean, sum(p.stretch for p in rep.pairs) / 2000)


def test_sample_pairs():
    nodes = list(range(50))
    pairs = sample_pairs(nodes, 500, 9)
    assert len(set(pairs)) == 500 and all(s != d for s, d in pairs)
    assert pairs == sample_pairs(nodes, 500, 9)
    assert pairs != sample_pairs(nodes, 500, 10)
    assert len(sample_pairs(nodes[:5], 100, 0)) == 20
    assert sample_pairs([7], 10, 0) == []


def test_bfs_lengths_match_oracle(built):
    adj = built.physical.adjacency()
    pairs = sample_pairs(list(adj), 300, 1)
    assert bfs_lengths(adj, pairs) == [bfs_distance(adj, s, d) for s, d in pairs]
    split = {1: [2], 2: [1], 3: []}
    assert bfs_lengths(split, [(1, 3), (1, 2)]) == [-1, 1]


def test_missing_level_is_failure(built):
    import copy
    cut = copy.copy(built)
    cut.levels = {p: l for p, l in built.levels.items() if len(p) < 2}
    s, d = next((s, d) for s in sorted(built.physical.nodes) for d in sorted(built.physical.nodes)
                if prefix_len(s, d, built.width) >= 2 and s != d)
    with pytest.raises(RoutingFailure):
        Router(cut).route(s, d)
