"""Route propagation inside one level network, run to a global fixed point.

Every node forwards to each neighbour ``b`` the subgraph of its view that
lies on paths ``b - a - c1 .. ck - d`` where the ``c`` share a's colour, ``d``
has the other colour, and no ``c`` has an opposite-colour node strictly
closer than both ends of the path.  Rounds are synchronous: all nodes
compute from the state at the start of the round and deliveries land at the
barrier.  A node whose inputs did not change is not recomputed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import kernels
from .idspace import bit_at
from .levels import Edge, EdgeRecord, LevelRef, RoutingTable, edge

log = logging.getLogger(__name__)

DEFAULT_PATH_CAP = 32


class NonConvergenceError(RuntimeError):
    def __init__(self, prefix: str, rounds: int, dump: str):
        super().__init__(f"level {prefix!r}: no fixed point after {rounds} rounds\n{dump}")
        self.prefix = prefix
        self.rounds = rounds


# -- single-step API over NodeIds -------------------------------------------

@dataclass(frozen=True)
class NeighborGraph:
    center: int
    excluded: int
    edges: frozenset[Edge]

    @property
    def nodes(self) -> set[int]:
        return {x for e in self.edges for x in e}


@dataclass(frozen=True)
class OutSet:
    center: int
    excluded: int
    paths: frozenset[tuple[int, ...]]
    edges: frozenset[Edge]

    @property
    def nodes(self) -> set[int]:
        return {x for e in self.edges for x in e}


def build_neighbor_graph(a: int, b: int, received: Mapping[int, Iterable[Edge]],
                         neighbors: Iterable[int]) -> NeighborGraph:
    """Merge what ``a`` received from every neighbour but ``b``, plus a's links."""
    neighbors = set(neighbors)
    if b not in neighbors:
        raise ValueError(f"{b} is not a neighbour of {a}")
    edges = {edge(a, x) for x in neighbors}
    for sender, got in received.items():
        if sender != b:
            edges.update(edge(*e) for e in got)
    return NeighborGraph(a, b, frozenset(edges))


def _local(edges: Iterable[Edge]) -> tuple[list[int], dict[int, int]]:
    ids = sorted({x for e in edges for x in e})
    return ids, {x: i for i, x in enumerate(ids)}


def compute_g_out(a: int, b: int, graph: NeighborGraph, level: int, width: int,
                  cap: int = DEFAULT_PATH_CAP) -> OutSet:
    """The qualifying paths and the subgraph a forwards to b (b removed)."""
    ids, idx = _local(graph.edges | {edge(a, b)})
    m = len(ids)
    keys = [idx[u] * m + idx[v] for u, v in graph.edges]
    color = bytes(bit_at(x, level, width) for x in ids)
    found: list[tuple[int, ...]] = []
    out, _ = kernels.py.g_out_edges(keys, m, idx[a], idx[b], color, cap, found)
    paths = frozenset(tuple(ids[i] for i in p) for p in found)
    edges = frozenset(edge(ids[k // m], ids[k % m]) for k in out)
    return OutSet(a, b, paths, edges)


# -- the engine ---------------------------------------------------------------

@dataclass
class LevelNetwork:
    """Members and links of one level network."""
    prefix: str
    width: int
    members: list[int]
    links: set[Edge] = field(default_factory=set)

    @property
    def depth(self) -> int:
        return len(self.prefix)


Message = dict[int, tuple[int, ...]]


class Propagation:
    """Synchronous route propagation over a :class:`LevelNetwork`.

    Nodes are handled by local index (position in the sorted member list), so
    lexicographic order on local paths equals order on NodeId paths.  Edge
    keys are ``u * m + v`` with ``u < v``.
    """

    def __init__(self, net: LevelNetwork, *, cap: int = DEFAULT_PATH_CAP,
                 record_diffs: bool = False, kernel=None):
        self.net = net
        self.ids = sorted(net.members)
        self.index = {x: i for i, x in enumerate(self.ids)}
        self.m = m = len(self.ids)
        self.color = bytes(bit_at(x, net.depth, net.width) for x in self.ids) if m else b""
        self.nbrs: list[list[int]] = [[] for _ in range(m)]
        for u, v in net.links:
            self._link(self.index[u], self.index[v])
        self.cap = cap
        self.kernel = kernel or kernels.active
        # inbox[a][x]: the latest message a holds from neighbour x.
        self.inbox: list[dict[int, Message]] = [{} for _ in range(m)]
        self.rounds = 0
        self.capped = 0
        self.shrinks = 0
        self.record_diffs = record_diffs
        self.diffs: list[list[tuple[int, int, Message, Message]]] = []
        self._dirty = set(range(m))

    def _link(self, i: int, j: int) -> None:
        self.nbrs[i].append(j)
        self.nbrs[j].append(i)
        self.nbrs[i].sort()
        self.nbrs[j].sort()

    def key(self, i: int, j: int) -> int:
        return i * self.m + j if i < j else j * self.m + i

    # -- per-node computation ------------------------------------------------

    def outgoing(self, a: int) -> dict[int, Message]:
        """Messages ``a`` would send to each neighbour given its current inbox."""
        out, capped = self.kernel.node_outgoing(a, self.nbrs[a], self.inbox[a], self.m,
                                                self.color, self.cap)
        self.capped += capped
        return out

    # -- rounds --------------------------------------------------------------

    def step(self) -> bool:
        """One synchronous round; returns True if anything was delivered."""
        pending: list[tuple[int, int, Message]] = []
        for a in sorted(self._dirty):
            for b, msg in self.outgoing(a).items():
                if msg != self.inbox[b].get(a, {}):
                    pending.append((a, b, msg))
        self.rounds += 1
        self._dirty = set()
        if not pending:
            return False
        if self.record_diffs:
            log_round = []
            for a, b, msg in pending:
                old = self.inbox[b].get(a, {})
                added = {k: p for k, p in msg.items() if old.get(k) != p}
                removed = {k: p for k, p in old.items() if msg.get(k) != p}
                log_round.append((a, b, added, removed))
            self.diffs.append(log_round)
        for a, b, msg in pending:
            before = set(self.inbox[b].get(a, {}))
            if before - set(msg) and self._table_shrinks(b, a, msg):
                self.shrinks += 1
            if msg:
                self.inbox[b][a] = msg
            else:
                self.inbox[b].pop(a, None)
            self._dirty.add(b)
        return True

    def _table_shrinks(self, b: int, a: int, msg: Message) -> bool:
        lost = set(self.inbox[b].get(a, {})) - set(msg)
        direct = {self.key(b, x) for x in self.nbrs[b]}
        for k in lost:
            if k in direct:
                continue
            if not any(k in got for x, got in self.inbox[b].items() if x != a):
                return True
        return False

    def run(self, max_rounds: int | None = None) -> int:
        """Iterate rounds to the fixed point; returns the number of rounds."""
        limit = max_rounds if max_rounds is not None else max(4 * self.m, 1)
        start = self.rounds
        while self.step():
            if self.rounds - start >= limit:
                raise NonConvergenceError(self.net.prefix, self.rounds - start,
                                          self.dump_state())
        return self.rounds - start

    # -- topology changes ----------------------------------------------------

    def remove_link(self, u: int, v: int) -> None:
        """Drop a link; both endpoints purge what depended on it."""
        i, j = self.index[u], self.index[v]
        self.nbrs[i].remove(j)
        self.nbrs[j].remove(i)
        self.net.links.discard(edge(u, v))
        broken = self.key(i, j)
        for a, lost in ((i, j), (j, i)):
            self.inbox[a].pop(lost, None)
            for x, msg in list(self.inbox[a].items()):
                stale = [k for k, p in msg.items() if k == broken or _crosses(p, i, j)]
                for k in stale:
                    del msg[k]
                if not msg:
                    del self.inbox[a][x]
            self._dirty.add(a)

    # -- views ---------------------------------------------------------------

    def table_keys(self, a: int) -> set[int]:
        keys = {self.key(a, x) for x in self.nbrs[a]}
        for msg in self.inbox[a].values():
            keys.update(msg)
        return keys

    def table_edges(self, node: int) -> set[Edge]:
        a = self.index[node]
        return {(self.ids[k // self.m], self.ids[k % self.m]) for k in self.table_keys(a)}

    def received(self, node: int) -> dict[int, set[Edge]]:
        a = self.index[node]
        m, ids = self.m, self.ids
        return {ids[x]: {(ids[k // m], ids[k % m]) for k in msg}
                for x, msg in self.inbox[a].items()}

    def neighbors(self, node: int) -> list[int]:
        return [self.ids[j] for j in self.nbrs[self.index[node]]]

    def table(self, node: int) -> RoutingTable:
        a = self.index[node]
        ids, m = self.ids, self.m
        records = set()
        for msg in self.inbox[a].values():
            for k, p in msg.items():
                records.add(EdgeRecord((ids[k // m], ids[k % m]), tuple(ids[x] for x in p)))
        return RoutingTable(node, LevelRef(self.net.prefix),
                            {ids[j] for j in self.nbrs[a]}, records)

    def tables(self) -> dict[int, RoutingTable]:
        return {x: self.table(x) for x in self.ids}

    def dump_state(self, limit: int = 20) -> str:
        lines = []
        for x in self.ids[:limit]:
            lines.append(f"node {x}: {len(self.table_keys(self.index[x]))} edges")
        return "\n".join(lines)


def _crosses(path: Sequence[int], i: int, j: int) -> bool:
    for x, y in zip(path, path[1:]):
        if (x == i and y == j) or (x == j and y == i):
            return True
    return False


def run_to_fixed_point(net: LevelNetwork, **kw) -> Propagation:
    prop = Propagation(net, **kw)
    prop.run()
    return prop


def replay(diffs: Sequence[Sequence[tuple[int, int, Message, Message]]], m: int
           ) -> list[dict[int, Message]]:
    """Rebuild inboxes from a diff log, starting from empty tables."""
    inbox: list[dict[int, Message]] = [{} for _ in range(m)]
    for rnd in diffs:
        for a, b, added, removed in rnd:
            msg = dict(inbox[b].get(a, {}))
            for k in removed:
                msg.pop(k, None)
            msg.update(added)
            if msg:
                inbox[b][a] = msg
            else:
                inbox[b].pop(a, None)
    return inbox
