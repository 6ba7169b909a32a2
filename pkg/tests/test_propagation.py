import random

import pytest
from hypothesis import given, settings, strategies as st

from bmlrp.idspace import bit_at
from bmlrp.levels import edge, stale_records
from bmlrp.oracle import brute_g_out
from bmlrp.propagation import (LevelNetwork, NeighborGraph, NonConvergenceError, Propagation,
                               build_neighbor_graph, compute_g_out, replay)

from conftest import random_graph


def _prop(ids, edges, width, prefix="", **kw):
    p = Propagation(LevelNetwork(prefix, width, sorted(ids), set(edges)), **kw)
    p.run()
    return p


def test_f3_g_out_paths(f3, f3_prop):
    fx, ids = f3
    label = {v: k for k, v in ids.items()}
    for key, want in fx.expected["g_out"].items():
        a, b = (ids[int(t)] for t in key.split(","))
        g = build_neighbor_graph(a, b, f3_prop.received(a), f3_prop.neighbors(a))
        out = compute_g_out(a, b, g, 0, 5)
        assert sorted([label[x] for x in p] for p in out.paths) == want
        ref_paths, ref_edges = brute_g_out(a, b, g.edges, 0, 5)
        assert out.paths == ref_paths and out.edges == ref_edges


def test_f3_neighbor_graph(f3, f3_prop):
    _, ids = f3
    a, b = ids[4], ids[0]
    g = build_neighbor_graph(a, b, f3_prop.received(a), f3_prop.neighbors(a))
    assert {edge(a, x) for x in f3_prop.neighbors(a)} <= g.edges
    assert g.center == a and g.excluded == b
    with pytest.raises(ValueError):
        build_neighbor_graph(a, ids[11], {}, f3_prop.neighbors(a))


def test_f3_table_of_node_0(f3, f3_prop):
    fx, ids = f3
    label = {v: k for k, v in ids.items()}
    got = sorted(sorted([label[u], label[v]]) for u, v in f3_prop.table_edges(ids[0]))
    assert got == fx.expected["table_0"]


def test_f3_replay_and_monotone(f3_prop):
    assert f3_prop.shrinks == 0
    assert replay(f3_prop.diffs, f3_prop.m) == f3_prop.inbox


def test_single_node():
    p = _prop([5], [], 4)
    assert p.rounds == 1 and p.table_edges(5) == set()


def test_monochrome_sends_nothing():
    # all ids start with 0: no node has an opposite-colour target
    ids = [1, 2, 3, 4, 5, 6]
    star = [(1, x) for x in ids[1:]] + [(2, 3)]
    p = _prop(ids, star, 4)
    assert all(not inbox for inbox in p.inbox)
    assert p.table_edges(2) == {(1, 2), (2, 3)}


def test_star_across_colours():
    # white centre, black leaves: the centre relays every leaf to every other
    ids = [0, 8, 9, 10, 11]
    star = {(0, x) for x in ids[1:]}
    p = _prop(ids, star, 4)
    for x in ids:
        assert p.table_edges(x) == star


def test_non_convergence(f3):
    fx, _ = f3
    net = fx.network
    p = Propagation(LevelNetwork("", 5, sorted(net.nodes), set(net.links)))
    with pytest.raises(NonConvergenceError) as err:
        p.run(max_rounds=1)
    assert err.value.rounds == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(3, 10))
def test_g_out_matches_enumeration(seed, n):
    rng = random.Random(seed)
    ids, edges = random_graph(rng, n, 5, extra=rng.random())
    a = rng.choice(ids)
    nbrs = sorted(x for e in edges for x in e if a in e and x != a)
    b = rng.choice(nbrs)
    out = compute_g_out(a, b, build_neighbor_graph(a, b, {}, nbrs), 0, 5)
    # with an empty inbox only a's own links are known
    ref_paths, ref_edges = brute_g_out(a, b, {edge(a, x) for x in nbrs}, 0, 5)
    assert out.paths == ref_paths and out.edges == ref_edges
    full = frozenset(edges)
    paths, out_edges = brute_g_out(a, b, edges, 0, 5)
    got = compute_g_out(a, b, NeighborGraph(a, b, full), 0, 5)
    assert got.paths == paths and got.edges == out_edges


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 40), st.sampled_from(["", "1", "01"]))
def test_fixed_point_invariants(seed, n, prefix):
    width = 8
    rng = random.Random(seed)
    ids, edges = random_graph(rng, n, width - len(prefix), extra=rng.random() * 2)
    base = int(prefix, 2) << (width - len(prefix)) if prefix else 0
    ids = [base | x for x in ids]
    edges = {edge(base | u, base | v) for u, v in edges}
    p = _prop(ids, edges, width, prefix, record_diffs=True)
    assert p.shrinks == 0
    assert replay(p.diffs, p.m) == p.inbox
    # a further round changes nothing
    assert not p.step()
    depth = len(prefix)
    for x in ids:
        t = p.table_edges(x)
        assert t <= edges
        # every opposite-colour neighbour's link is known
        assert {edge(x, y) for y in p.neighbors(x)} <= t
    assert not stale_records(p.tables(), edges)
    for x in ids:
        assert all(bit_at(y, depth, width) in (0, 1) for e in p.table_edges(x) for y in e)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_remove_link_leaves_no_stale(seed):
    rng = random.Random(seed)
    ids, edges = random_graph(rng, 24, 6, extra=1.5)
    p = _prop(ids, edges, 6)
    u, v = sorted(edges)[rng.randrange(len(edges))]
    p.remove_link(u, v)
    p.run()
    assert not stale_records(p.tables(), edges - {(u, v)})
    assert not p.step()
