"""Greedy prefix routing with recursive source-route expansion.

A packet at ``x`` for ``d`` consults x's table at level ``l(x, d)`` and moves
to a visible node sharing a longer prefix with ``d``.  The table path to that
node is made of level links, each of which expands into a path one level
down, recursively, until only physical links remain.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .ascent import MultiLevelNetwork, VirtualLink, _shortest_path
from .idspace import prefix_len
from .levels import RoutingTable, edge
from .topology import STREAM_PAIRS, substream

BFS_CHUNK = 256


class RoutingFailure(RuntimeError):
    """No visible node improves the common prefix with the destination."""

    def __init__(self, at: int, dest: int, depth: int):
        super().__init__(f"no next hop from {at} towards {dest} at level depth {depth}")
        self.at = at
        self.dest = dest
        self.depth = depth


class ExpansionError(RuntimeError):
    """A link on a route has no recorded realization."""


@dataclass(frozen=True)
class Segment:
    depth: int
    prefix: str
    table_path: tuple[int, ...]
    physical: tuple[int, ...]


@dataclass(frozen=True)
class RouteResult:
    logical_hops: tuple[int, ...]
    physical_path: tuple[int, ...]
    hop_count: int
    levels_used: tuple[int, ...]
    segments: tuple[Segment, ...] = ()


def _bfs(adj: Mapping[int, Iterable[int]], src: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in adj.get(u, ()):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def next_hop(x: int, d: int, table: RoutingTable | Mapping[int, Iterable[int]], width: int,
             dist: Mapping[int, int] | None = None) -> int:
    """Closest visible node with a longer common prefix with ``d`` than ``x``.

    If ``d`` itself is reachable in the table it is returned.  Otherwise the
    candidate nearest to ``x`` in table hops wins, then the smaller XOR to
    ``d``, then the smaller id.
    """
    if x == d:
        raise ValueError("x equals d")
    if dist is None:
        adj = table.adjacency() if isinstance(table, RoutingTable) else table
        dist = _bfs(adj, x)
    if d in dist:
        return d
    p = prefix_len(x, d, width)
    best = None
    for b, h in dist.items():
        if prefix_len(b, d, width) > p:
            key = (h, b ^ d, b)
            if best is None or key < best:
                best = key
    if best is None:
        raise RoutingFailure(x, d, p)
    return best[2]


class Router:
    """Routing over a built network, caching table views and expansions.

    ``direct_only`` truncates every table to the owner's own links; it exists
    to exercise failure reporting.
    """

    def __init__(self, net: MultiLevelNetwork, *, direct_only: bool = False):
        self.net = net
        self.direct_only = direct_only
        self._views: dict[tuple[str, int], tuple[dict, dict]] = {}
        self._expanded: dict[tuple[str, int, int], tuple[int, ...]] = {}

    def view(self, prefix: str, node: int) -> tuple[dict[int, list[int]], dict[int, int]]:
        key = (prefix, node)
        hit = self._views.get(key)
        if hit is None:
            level = self.net.levels[prefix]
            adj = level.table_adjacency(node)
            if self.direct_only:
                adj = {node: adj.get(node, [])}
                for w in adj[node]:
                    adj[w] = [node]
            hit = self._views[key] = (adj, _bfs(adj, node))
        return hit

    def expand(self, prefix: str, u: int, v: int) -> tuple[int, ...]:
        """Physical node sequence realizing the level link ``u - v``."""
        key = (prefix, u, v)
        hit = self._expanded.get(key)
        if hit is not None:
            return hit
        level = self.net.levels.get(prefix)
        real = None if level is None else level.links.get(edge(u, v))
        if real is None:
            raise ExpansionError(f"no link {u}-{v} at level {prefix!r}")
        if not prefix:
            out = (u, v)
        else:
            seq = real if real[0] == u else real[::-1]
            if seq[0] != u or seq[-1] != v:
                raise ExpansionError(f"realization of {u}-{v} at {prefix!r} has wrong ends")
            parts = [u]
            for x, y in zip(seq, seq[1:]):
                parts.extend(self.expand(prefix[:-1], x, y)[1:])
            out = tuple(parts)
        self._expanded[key] = out
        return out

    def route(self, s: int, d: int) -> RouteResult:
        if s == d:
            return RouteResult((s,), (s,), 0, ())
        width = self.net.width
        cur = s
        logical = [s]
        physical = [s]
        depths = []
        segments = []
        while cur != d:
            p = prefix_len(cur, d, width)
            prefix = format(cur >> (width - p), f"0{p}b") if p else ""
            if prefix not in self.net.levels:
                raise RoutingFailure(cur, d, p)
            adj, dist = self.view(prefix, cur)
            b = next_hop(cur, d, adj, width, dist)
            tpath = _shortest_path(adj, cur, b)
            seg = [cur]
            for u, v in zip(tpath, tpath[1:]):
                seg.extend(self.expand(prefix, u, v)[1:])
            physical.extend(seg[1:])
            segments.append(Segment(p, prefix, tpath, tuple(seg)))
            depths.append(p)
            logical.append(b)
            cur = b
        return RouteResult(tuple(logical), tuple(physical), len(physical) - 1,
                           tuple(depths), tuple(segments))


def expand_link(net: MultiLevelNetwork, link: VirtualLink) -> tuple[int, ...]:
    return Router(net).expand(link.prefix, link.u, link.v)


def route(net: MultiLevelNetwork, s: int, d: int) -> RouteResult:
    return Router(net).route(s, d)


# -- stretch ------------------------------------------------------------------------

@dataclass(frozen=True)
class PairResult:
    pair_id: int
    src: int
    dst: int
    hops: int
    bfs: int

    @property
    def stretch(self) -> float:
        return self.hops / self.bfs


@dataclass(frozen=True)
class StretchReport:
    pairs: tuple[PairResult, ...]
    mean: float
    median: float
    p95: float
    mean_hops: float
    failures: int


def sample_pairs(nodes: Sequence[int], sample_size: int, seed: int) -> list[tuple[int, int]]:
    """Distinct ordered pairs: all of them if ``sample_size`` covers the set,
    else a uniform sample without replacement."""
    ids = sorted(nodes)
    n = len(ids)
    total = n * (n - 1)
    if sample_size >= total:
        return [(u, v) for u in ids for v in ids if u != v]
    picks = substream(seed, STREAM_PAIRS).choice(total, size=sample_size, replace=False)
    out = []
    for k in picks.tolist():
        i, j = divmod(k, n - 1)
        if j >= i:
            j += 1
        out.append((ids[i], ids[j]))
    return out


def bfs_lengths(adj: Mapping[int, Iterable[int]], pairs: Sequence[tuple[int, int]]
                ) -> list[int]:
    """Physical shortest-path hop counts for ``pairs`` (-1 if unreachable)."""
    ids = sorted(adj)
    index = {x: i for i, x in enumerate(ids)}
    rows, cols = [], []
    for u, vs in adj.items():
        for v in vs:
            rows.append(index[u])
            cols.append(index[v])
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(ids), len(ids)))
    sources = sorted({index[s] for s, _ in pairs})
    dist: dict[int, np.ndarray] = {}
    for start in range(0, len(sources), BFS_CHUNK):
        chunk = sources[start:start + BFS_CHUNK]
        mat = shortest_path(graph, unweighted=True, directed=False, indices=chunk)
        for row, s in zip(mat, chunk):
            dist[s] = row
    out = []
    for s, t in pairs:
        h = dist[index[s]][index[t]]
        out.append(int(h) if np.isfinite(h) else -1)
    return out


def measure_stretch(net: MultiLevelNetwork, sample_size: int = 10_000, seed: int = 0,
                    router: Router | None = None) -> StretchReport:
    router = router or Router(net)
    pairs = sample_pairs(list(net.physical.nodes), sample_size, seed)
    lengths = bfs_lengths(net.physical.adjacency(), pairs)
    results = []
    failures = 0
    for i, ((s, d), bfs) in enumerate(zip(pairs, lengths)):
        try:
            hops = router.route(s, d).hop_count
        except RoutingFailure:
            failures += 1
            continue
        results.append(PairResult(i, s, d, hops, bfs))
    if not results:
        return StretchReport((), float("nan"), float("nan"), float("nan"), float("nan"), failures)
    stretch = np.array([r.stretch for r in results])
    hops = np.array([r.hops for r in results], dtype=float)
    return StretchReport(tuple(results), float(stretch.mean()), float(np.median(stretch)),
                         float(np.percentile(stretch, 95)), float(hops.mean()), failures)
