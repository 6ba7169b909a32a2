"""Brute-force references for property tests.  Exponential; size-capped."""

from __future__ import annotations

import json
from array import array
from collections import deque
from dataclasses import dataclass
from importlib import resources
from typing import Any, Iterable, Mapping

from . import topology
from .idspace import UsageError, bit_at
from .levels import Edge, edge
from .topology import PhysicalNetwork

MAX_G_OUT_NODES = 16
MAX_SELECT_NODES = 12
UNREACHABLE = None


def _adj(edges: Iterable[Edge]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    return adj


def bfs_distance(adj: Mapping[int, Iterable[int]], u: int, v: int) -> int | None:
    if u == v:
        return 0
    seen = {u}
    queue = deque([(u, 0)])
    while queue:
        x, d = queue.popleft()
        for y in adj.get(x, ()):
            if y == v:
                return d + 1
            if y not in seen:
                seen.add(y)
                queue.append((y, d + 1))
    return UNREACHABLE


def all_distances(adj: Mapping[int, Iterable[int]], src: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        for y in adj.get(x, ()):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def brute_connectivity(nodes: Iterable[int], edges: Iterable[Edge]) -> list[set[int]]:
    adj = _adj(edges)
    for u in nodes:
        adj.setdefault(u, set())
    seen: set[int] = set()
    comps = []
    for u in sorted(adj):
        if u not in seen:
            comp = set(all_distances(adj, u))
            seen |= comp
            comps.append(comp)
    return comps


def _simple_paths(adj, start, banned):
    """Every simple path from ``start`` avoiding ``banned`` (length >= 1)."""
    out = []

    def walk(path):
        for y in sorted(adj[path[-1]]):
            if y in banned or y in path:
                continue
            out.append(path + [y])
            walk(path + [y])

    walk([start])
    return out


def brute_g_out(a: int, b: int, edges: Iterable[Edge], level: int, width: int
                ) -> tuple[set[tuple[int, ...]], set[Edge]]:
    """Qualifying paths (starting with b) and forwarded edges, by enumeration."""
    edges = set(edges) | {edge(a, b)}
    adj = _adj(edges)
    if len(adj) > MAX_G_OUT_NODES:
        raise UsageError(f"oracle capped at {MAX_G_OUT_NODES} nodes")
    col = {x: bit_at(x, level, width) for x in adj}
    dist = {x: all_distances(adj, x) for x in adj}
    paths = set()
    for tail in _simple_paths(adj, a, {b}):
        p = [b] + tail
        d, interior = p[-1], p[2:-1]
        if col[d] == col[a] or any(col[c] != col[a] for c in interior):
            continue
        ok = True
        for pos, c in enumerate(p[2:-1], start=2):
            to_d, to_b = len(p) - 1 - pos, pos
            for f in adj:
                if col[f] != col[a] and dist[f].get(c, 1 << 30) < min(to_d, to_b):
                    ok = False
        if ok:
            paths.add(tuple(p))
    out = {edge(x, y) for p in paths for x, y in zip(p, p[1:]) if b not in (x, y)}
    return paths, out


def connect_inside_reference(a: int, nodes: Iterable[int], first_bit: int, width: int) -> set[int]:
    """Recursive transcription of the XOR split, for cross-checking the kernel."""
    found: set[int] = set()

    def rec(ns: set[int], l: int) -> None:
        bit = first_bit + l
        if bit >= width:
            return
        white = {x for x in ns if bit_at(x, bit, width) == 0}
        black = ns - white
        if not white or not black:
            if len(ns) > 1:
                rec(ns, l + 1)
            return
        w, bl = min(((x, y) for x in white for y in black), key=lambda p: (p[0] ^ p[1], p))
        if bit_at(a, bit, width) == 0:
            if w == a:
                found.add(bl)
            rec(white, l + 1)
        else:
            if bl == a:
                found.add(w)
            rec(black, l + 1)

    rec(set(nodes), 0)
    return found


def select_connections_reference(a: int, neighbors: Iterable[int], edges: Iterable[Edge],
                                 level: int, width: int, connect_target: str = "e2"
                                 ) -> set[int]:
    """Literal path enumeration of the connection rule, no pruning."""
    edges = set(edges)
    adj = _adj(edges)
    adj.setdefault(a, set())
    if len(adj) > MAX_SELECT_NODES:
        raise UsageError(f"oracle capped at {MAX_SELECT_NODES} nodes")
    col = {x: bit_at(x, level, width) for x in adj}
    ca = col[a]
    neighbors = set(neighbors)
    targets = {x for x in neighbors if col[x] == ca}
    for w in neighbors:
        if col[w] != ca:
            s = {x for x in adj[w] if col[x] == ca}
            targets |= connect_inside_reference(a, s, level + 1, width)
    dist = {x: all_distances(adj, x) for x in adj}
    blacks = [f for f in adj if col[f] == ca]
    for tail in _simple_paths(adj, a, set()):
        p = [a] + tail[1:]
        if len(p) < 4:  # need a, b, c1, d
            continue
        b, cs, d = p[1], p[2:-1], p[-1]
        if col[d] != ca or col[b] == ca or any(col[c] == ca for c in cs):
            continue
        if any(col[y] == ca for c in cs[:-1] for y in adj[c]):
            continue
        bad = False
        for j, c in enumerate(cs, start=1):
            to_a, to_d = j + 1, len(cs) + 1 - j
            if any(dist[f].get(c, 1 << 30) < min(to_a, to_d) for f in blacks):
                bad = True
        if bad:
            continue
        ck = cs[-1]
        e1s = [x for x in adj[b] if col[x] == ca]
        e2s = [x for x in adj[ck] if col[x] == ca]
        _, e1, e2 = min((x ^ y, x, y) for x in e1s for y in e2s)
        if e1 == a:
            targets.add(d if connect_target == "d" else e2)
    targets.discard(a)
    return targets


# -- fixtures -----------------------------------------------------------------------

FIXTURES = ("f2", "f3", "f4")


@dataclass(frozen=True)
class Fixture:
    name: str
    network: PhysicalNetwork
    expected: dict[str, Any]

    def ids_by_label(self) -> dict[int, int]:
        """Fixture label -> NodeId, for fixtures that carry labels."""
        return {lab: int(bits, 2) for bits, lab in self.expected["labels"].items()}


def _read(name: str) -> str:
    return resources.files("bmlrp").joinpath("fixtures").joinpath(name).read_text()


def load_fixture(name: str) -> Fixture:
    if name not in FIXTURES:
        raise UsageError(f"unknown fixture {name!r}; have {FIXTURES}")
    return Fixture(name, topology.loads(_read(f"{name}.net")), json.loads(_read(f"{name}.json")))


def _lex_shortest(adj: Mapping[int, Iterable[int]], src: int, dst: int) -> tuple[int, ...]:
    dist = all_distances(adj, dst)
    if src not in dist:
        raise UsageError(f"{src} cannot reach {dst}")
    path = [src]
    while path[-1] != dst:
        here = path[-1]
        path.append(min(y for y in adj[here] if dist.get(y, -1) == dist[here] - 1))
    return tuple(path)


def f2_network():
    """The routing fixture as a built network, per-level links from its files.

    Each level link is realized by the lexicographically smallest shortest
    path over the parent level's links.  Routing nodes hold the tables given
    in the golden file; every other member sees its whole level.
    """
    from .ascent import BuildOptions, Level, MultiLevelNetwork

    fx = load_fixture("f2")
    phys = fx.network
    width = phys.width
    nets = {"": phys}
    for prefix, fname in fx.expected["levels"].items():
        nets[prefix] = topology.loads(_read(fname))
    ml = MultiLevelNetwork(phys, BuildOptions())
    for prefix in sorted(nets, key=len):
        net = nets[prefix]
        members = sorted(net.nodes)
        if prefix:
            parent = nets[prefix[:-1]]
            padj = _adj(parent.links)
            links = {e: _lex_shortest(padj, *e) for e in sorted(net.links)}
        else:
            links = {e: e for e in net.links}
        m = len(members)
        index = {x: i for i, x in enumerate(members)}

        def keys(edges):
            return array("q", sorted(min(index[u], index[v]) * m + max(index[u], index[v])
                                     for u, v in edges))

        tables = [keys(net.links) for _ in members]
        for owner, pairs in fx.expected["tables"].get(prefix, {}).items():
            tables[index[int(owner, 2)]] = keys((int(u, 2), int(v, 2)) for u, v in pairs)
        ml.levels[prefix] = Level(prefix, members, links, tables)
    assert all(len(p) <= width for p in ml.levels)
    return ml
