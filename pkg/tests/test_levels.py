import pytest
from hypothesis import given, strategies as st

from bmlrp.levels import (EdgeRecord, LevelRef, RoutingTable, TableUpdate, level_members,
                          merge_update, purge_stale, stale_records)
from bmlrp.oracle import load_fixture


def test_level_members_f2():
    net = load_fixture("f2").network
    got = level_members(net.nodes, "01", 5)
    assert got == {x for x in net.nodes if x >> 3 == 0b01}
    assert got and all(format(x, "05b").startswith("01") for x in got)
    assert level_members(net.nodes, "", 5) == set(net.nodes)


@given(st.sets(st.integers(0, 255), max_size=40), st.text("01", max_size=7))
def test_children_partition(nodes, prefix):
    parent = level_members(nodes, prefix, 8)
    zero = level_members(nodes, prefix + "0", 8)
    one = level_members(nodes, prefix + "1", 8)
    assert zero | one == parent and not zero & one


def test_level_ref():
    ref = LevelRef("01")
    assert ref.depth == 2 and ref.child(1) == LevelRef("011")
    assert ref.contains(0b01110, 5) and not ref.contains(0b00110, 5)


def test_edge_record_validation():
    with pytest.raises(ValueError):
        EdgeRecord((1, 2), (1, 3, 2))
    r = EdgeRecord((1, 2), (2, 1, 5))
    assert r.sender == 5 and list(r.hops()) == [(1, 2), (1, 5)]
    assert r.extended(7).path == (2, 1, 5, 7)


def test_merge_update():
    t = RoutingTable(9, LevelRef(), {5}, {EdgeRecord((1, 2), (1, 2, 5))})
    add = EdgeRecord((2, 3), (2, 3, 5))
    out = merge_update(t, TableUpdate(add=frozenset({add}),
                                      remove=frozenset({EdgeRecord((1, 2), (1, 2, 5))})))
    assert out.records == {add}
    assert t.records == {EdgeRecord((1, 2), (1, 2, 5))}  # input untouched
    # removing something absent is ignored
    again = merge_update(out, TableUpdate(remove=frozenset({EdgeRecord((7, 8), (7, 8, 5))})))
    assert again.records == {add}
    with pytest.raises(ValueError):
        TableUpdate(add=frozenset({add}), remove=frozenset({add}))


def test_purge_chain():
    # chain 1-2-3-4, table of node 4 learned via 3; link 1-2 breaks
    t = RoutingTable(4, LevelRef(), {3}, {EdgeRecord((1, 2), (1, 2, 3)),
                                          EdgeRecord((2, 3), (2, 3))})
    out, notices = purge_stale(t, (2, 1))
    assert out.records == {EdgeRecord((2, 3), (2, 3))}
    # the only neighbour is on the record's path, so nothing is forwarded
    assert notices == {}


def test_purge_endpoint_drops_sender():
    t = RoutingTable(2, LevelRef(), {1, 3, 5},
                     {EdgeRecord((3, 4), (3, 4, 3)), EdgeRecord((5, 6), (5, 6, 5)),
                      EdgeRecord((7, 8), (7, 8, 3))})
    out, notices = purge_stale(t, (2, 3))
    assert out.connected_neighbors == {1, 5}
    assert out.records == {EdgeRecord((5, 6), (5, 6, 5))}
    assert set(notices) == {1, 5}
    assert EdgeRecord((3, 4), (3, 4, 3, 2)) in notices[1]


def test_stale_records_scan():
    good = EdgeRecord((1, 2), (1, 2, 3))
    bad = EdgeRecord((1, 2), (1, 2, 9))
    tables = {4: RoutingTable(4, LevelRef(), {3}, {good, bad})}
    links = {(1, 2), (2, 3), (3, 4)}
    assert stale_records(tables, links) == [(4, bad)]


def test_dump_format():
    t = RoutingTable(0, LevelRef(), {1}, {EdgeRecord((1, 2), (1, 2, 1)),
                                          EdgeRecord((0, 3), (3, 0, 1))})
    assert t.dump(3) == ("edge=000-011 path=011,000,001\n"
                         "edge=001-010 path=001,010,001\n")
    assert RoutingTable(0, LevelRef()).dump(3) == ""
    assert t.visible_nodes == {0, 1, 2, 3}
    assert t.adjacency()[0] == {1, 3}
