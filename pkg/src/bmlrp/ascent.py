"""Neighbour selection for the next level and the recursive multi-level build."""

from __future__ import annotations

import logging
from array import array
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from . import kernels
from .idspace import UsageError, bit_at
from .levels import Edge, edge
from .propagation import DEFAULT_PATH_CAP, LevelNetwork, NonConvergenceError, Propagation
from .topology import PhysicalNetwork

log = logging.getLogger(__name__)

CONNECT_TARGETS = ("e2", "d")


@dataclass(frozen=True)
class BuildOptions:
    connect_target: str = "e2"
    extra_k: int = 0
    levels_max: int | None = None
    path_cap: int = DEFAULT_PATH_CAP
    keep_tables: bool = True

    def __post_init__(self) -> None:
        if self.connect_target not in CONNECT_TARGETS:
            raise UsageError(f"connect_target must be one of {CONNECT_TARGETS}")
        if self.extra_k < 0:
            raise UsageError("extra_k must be >= 0")


@dataclass(frozen=True)
class VirtualLink:
    u: int
    v: int
    prefix: str
    realization: tuple[int, ...]  # parent-level nodes from u to v

    def oriented(self, start: int) -> tuple[int, ...]:
        return self.realization if start == self.u else self.realization[::-1]


@dataclass
class Level:
    """One built level network.

    ``links`` map each link to its realization one level down (level-0 links
    realize as themselves).  ``tables`` hold each member's converged view as
    edge keys over ``members`` (``i * m + j``, ``i < j``).
    """
    prefix: str
    members: list[int]
    links: dict[Edge, tuple[int, ...]]
    tables: list[array] | None = None
    rounds: int = 0
    capped: int = 0

    @property
    def depth(self) -> int:
        return len(self.prefix)

    def degree(self) -> dict[int, int]:
        deg = dict.fromkeys(self.members, 0)
        for u, v in self.links:
            deg[u] += 1
            deg[v] += 1
        return deg

    def table_adjacency(self, node: int) -> dict[int, list[int]]:
        if self.tables is None:
            raise UsageError(f"level {self.prefix!r} was built without tables")
        ids = self.members
        m = len(ids)
        i = ids.index(node) if m < 64 else _bisect(ids, node)
        adj: dict[int, list[int]] = {node: []}
        for k in self.tables[i]:
            u, v = ids[k // m], ids[k % m]
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        for lst in adj.values():
            lst.sort()
        return adj

    def table_edges(self, node: int) -> set[Edge]:
        return {edge(u, v) for u, vs in self.table_adjacency(node).items() for v in vs}


def _bisect(ids: list[int], x: int) -> int:
    import bisect
    i = bisect.bisect_left(ids, x)
    if i == len(ids) or ids[i] != x:
        raise KeyError(x)
    return i


@dataclass
class MultiLevelNetwork:
    physical: PhysicalNetwork
    options: BuildOptions
    levels: dict[str, Level] = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.physical.width

    def prefixes_at(self, depth: int) -> list[str]:
        return sorted(p for p in self.levels if len(p) == depth)

    def max_depth(self) -> int:
        return max(len(p) for p in self.levels)

    def level_of(self, node: int, depth: int) -> Level:
        w = self.width
        prefix = format(node >> (w - depth), f"0{depth}b") if depth else ""
        return self.levels[prefix]

    def virtual_link(self, prefix: str, u: int, v: int) -> VirtualLink:
        real = self.levels[prefix].links.get(edge(u, v))
        if real is None:
            raise KeyError(f"no link {u}-{v} at level {prefix!r}")
        lo, hi = edge(u, v)
        return VirtualLink(lo, hi, prefix, real)


# -- selection ------------------------------------------------------------------

def connect_inside(a: int, nodes: Iterable[int], level: int, width: int) -> set[int]:
    """XOR-split targets for ``a`` among same-colour ``nodes`` at ``level``.

    Splits use the bits below the colour bit, starting at ``level + 1``.
    """
    nodes = set(nodes)
    if a not in nodes:
        raise UsageError(f"{a} is not among the nodes")
    return set(kernels.active.connect_inside(a, sorted(nodes), level + 1, width))


def _nearest(adj: Mapping[int, Iterable[int]], sources: Iterable[int]) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        u = queue.popleft()
        for w in adj.get(u, ()):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _shortest_path(adj: Mapping[int, Iterable[int]], src: int, dst: int) -> tuple[int, ...] | None:
    """Shortest path, lexicographically smallest among equals."""
    if src == dst:
        return (src,)
    dist = _nearest(adj, [dst])
    if src not in dist:
        return None
    path = [src]
    while path[-1] != dst:
        here = path[-1]
        path.append(min(w for w in adj[here] if dist.get(w, -1) == dist[here] - 1))
    return tuple(path)


def select_connections(a: int, adj: Mapping[int, Iterable[int]], neighbors: Iterable[int],
                       level: int, width: int, connect_target: str = "e2",
                       extra_k: int = 0, cap: int = DEFAULT_PATH_CAP
                       ) -> dict[int, tuple[int, ...]]:
    """Next-level targets of ``a``, each with a realization path from ``a``.

    ``adj`` is a's converged table at ``level``; ``neighbors`` its direct links.
    """
    shift = width - 1 - level
    col = {x: (x >> shift) & 1 for x in adj}
    col.setdefault(a, (a >> shift) & 1)
    ca = col[a]
    chosen: dict[int, tuple[int, ...]] = {}

    def offer(t: int, path: tuple[int, ...]) -> None:
        if t == a:
            return
        old = chosen.get(t)
        if old is None or (len(path), path) < (len(old), old):
            chosen[t] = path

    neighbors = sorted(neighbors)
    same_cache: dict[int, list[int]] = {}

    def same_nbrs(x: int) -> list[int]:
        got = same_cache.get(x)
        if got is None:
            got = same_cache[x] = sorted(y for y in adj.get(x, ()) if col[y] == ca)
        return got

    for x in neighbors:
        if col[x] == ca:
            offer(x, (a, x))

    for w in neighbors:
        if col[w] != ca:
            s = set(same_nbrs(w)) | {a}
            for t in kernels.active.connect_inside(a, sorted(s), level + 1, width):
                offer(t, (a, w, t))

    dist = _nearest(adj, [x for x in adj if col[x] == ca])
    argmin_cache: dict[tuple[int, int], tuple[int, int]] = {}

    def argmin(b: int, ck: int) -> tuple[int, int]:
        hit = argmin_cache.get((b, ck))
        if hit is None:
            _, e1, e2 = min((x ^ y, x, y) for x in same_nbrs(b) for y in same_nbrs(ck))
            hit = argmin_cache[(b, ck)] = (e1, e2)
        return hit

    inf = 1 << 30
    for b in neighbors:
        if col[b] == ca:
            continue
        # Frames: (node, j, kmax, iterator position); path holds a, b, c1..cj.
        path = [a, b]
        on_path = {a, b}
        stack = [(b, 0, inf, 0)]
        while stack:
            u, j, kmax, pos = stack.pop()
            nbrs = sorted(adj.get(u, ()))
            descended = False
            while pos < len(nbrs):
                c = nbrs[pos]
                pos += 1
                if c in on_path or col[c] == ca:
                    continue
                j2 = j + 1
                dc = dist.get(c, inf)
                km = kmax
                if dc < j2 + 1 and dc + j2 - 1 < km:
                    km = dc + j2 - 1
                if same_nbrs(c):
                    # c has a same-colour neighbour, so it must be the last interior node.
                    if j2 <= km:
                        e1, e2 = argmin(b, c)
                        if e1 == a:
                            if connect_target == "e2":
                                offer(e2, (*path, c, e2))
                            else:
                                for d in same_nbrs(c):
                                    if d != a:
                                        offer(d, (*path, c, d))
                    continue
                if j2 + 1 > km or dc > km + 1 - j2 or j2 >= cap:
                    continue
                stack.append((u, j, kmax, pos))
                stack.append((c, j2, km, 0))
                path.append(c)
                on_path.add(c)
                descended = True
                break
            if not descended and u != b:
                path.pop()
                on_path.discard(u)

    if extra_k:
        near = _nearest(adj, [a])
        extra = sorted((near[x], x ^ a, x) for x in near
                       if x != a and col[x] == ca and x not in chosen)
        for _, _, x in extra[:extra_k]:
            p = _shortest_path(adj, a, x)
            if p is not None:
                offer(x, p)
    return chosen


# -- build ------------------------------------------------------------------------

def build_multilevel(physical: PhysicalNetwork, options: BuildOptions | None = None,
                     on_level: Callable[[Level, Propagation], None] | None = None
                     ) -> MultiLevelNetwork:
    """Recursively converge, select and split until levels are singletons."""
    options = options or BuildOptions()
    if not physical.is_connected():
        raise UsageError("physical network is not connected; "
                         "use topology.restrict_largest_component")
    width = physical.width
    result = MultiLevelNetwork(physical, options)
    queue = deque([("", sorted(physical.nodes), {l: l for l in physical.links})])
    while queue:
        prefix, members, links = queue.popleft()
        level = Level(prefix, members, links)
        result.levels[prefix] = level
        depth = len(prefix)
        if len(members) <= 1 or depth >= width:
            if options.keep_tables:
                level.tables = [array("q") for _ in members]
            continue
        net = LevelNetwork(prefix, width, members, set(links))
        prop = Propagation(net, cap=options.path_cap)
        try:
            level.rounds = prop.run()
        except NonConvergenceError:
            raise
        level.capped = prop.capped
        if options.keep_tables:
            level.tables = [array("q", sorted(prop.table_keys(i))) for i in range(prop.m)]
        if on_level is not None:
            on_level(level, prop)
        if options.levels_max is not None and depth >= options.levels_max:
            continue
        child_links = _select_all(prop, depth, width, options)
        for bit in (0, 1):
            sub = [x for x in members if bit_at(x, depth, width) == bit]
            if sub:
                sub_links = {e: p for e, p in child_links.items()
                             if bit_at(e[0], depth, width) == bit}
                queue.append((prefix + str(bit), sub, sub_links))
    return result


def _select_all(prop: Propagation, depth: int, width: int, options: BuildOptions
                ) -> dict[Edge, tuple[int, ...]]:
    links: dict[Edge, tuple[int, ...]] = {}
    for x in prop.ids:
        adj = _adjacency_ids(prop, x)
        chosen = select_connections(x, adj, prop.neighbors(x), depth, width,
                                    options.connect_target, options.extra_k,
                                    options.path_cap)
        for t, path in chosen.items():
            e = edge(x, t)
            oriented = path if path[0] == e[0] else path[::-1]
            old = links.get(e)
            if old is None or (len(oriented), oriented) < (len(old), old):
                links[e] = oriented
    return links


def _adjacency_ids(prop: Propagation, node: int) -> dict[int, list[int]]:
    ids, m = prop.ids, prop.m
    adj: dict[int, list[int]] = {node: []}
    for k in prop.table_keys(prop.index[node]):
        u, v = ids[k // m], ids[k % m]
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    return adj
