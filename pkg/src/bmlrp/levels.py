"""Level-network membership and per-node routing tables.

A routing table is one node's view of one level network.  Knowledge of an
edge is stored as an :class:`EdgeRecord`: the edge plus the sequence of nodes
through which that knowledge travelled.  A stored path always starts with the
edge's two endpoints and ends with the neighbour the record was received from;
a node's own links carry no record and are implied by ``connected_neighbors``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .idspace import format_id, has_prefix

log = logging.getLogger(__name__)

Edge = tuple[int, int]


def edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, order=True)
class LevelRef:
    prefix: str = ""

    @property
    def depth(self) -> int:
        return len(self.prefix)

    def child(self, bit: int) -> "LevelRef":
        return LevelRef(self.prefix + str(bit))

    def contains(self, node: int, width: int) -> bool:
        return has_prefix(node, self.prefix, width)


@dataclass(frozen=True, order=True)
class EdgeRecord:
    edge: Edge
    path: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.path) < 2 or edge(self.path[0], self.path[1]) != self.edge:
            raise ValueError(f"path {self.path} does not start with edge {self.edge}")

    @property
    def sender(self) -> int:
        return self.path[-1]

    def hops(self) -> Iterable[Edge]:
        return (edge(u, v) for u, v in zip(self.path, self.path[1:]))

    def uses(self, link: Edge) -> bool:
        return self.edge == link or any(h == link for h in self.hops())

    def extended(self, sender: int) -> "EdgeRecord":
        """The record as it arrives after ``sender`` forwards it."""
        return EdgeRecord(self.edge, self.path + (sender,))


@dataclass(frozen=True)
class TableUpdate:
    add: frozenset[EdgeRecord] = frozenset()
    remove: frozenset[EdgeRecord] = frozenset()

    def __post_init__(self) -> None:
        if self.add & self.remove:
            raise ValueError("update adds and removes the same record")


@dataclass
class RoutingTable:
    owner: int
    level: LevelRef
    connected_neighbors: set[int] = field(default_factory=set)
    records: set[EdgeRecord] = field(default_factory=set)

    def copy(self) -> "RoutingTable":
        return replace(self, connected_neighbors=set(self.connected_neighbors),
                       records=set(self.records))

    @property
    def visible_nodes(self) -> set[int]:
        nodes = {self.owner} | self.connected_neighbors
        for r in self.records:
            nodes.update(r.path)
        return nodes

    @property
    def visible_edges(self) -> set[Edge]:
        edges = {edge(self.owner, x) for x in self.connected_neighbors}
        edges.update(r.edge for r in self.records)
        return edges

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {self.owner: set()}
        for u, v in self.visible_edges:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return adj

    def dump(self, width: int) -> str:
        """One ``edge=<id>-<id> path=<id>,...`` line per record, sorted."""
        lines = []
        for r in sorted(self.records):
            u, v = r.edge
            lines.append(
                f"edge={format_id(u, width)}-{format_id(v, width)} "
                f"path={','.join(format_id(x, width) for x in r.path)}")
        return "\n".join(lines) + ("\n" if lines else "")


def level_members(nodes: Iterable[int], prefix: str, width: int) -> set[int]:
    return {u for u in nodes if has_prefix(u, prefix, width)}


def merge_update(table: RoutingTable, update: TableUpdate) -> RoutingTable:
    out = table.copy()
    for r in update.remove:
        if r in out.records:
            out.records.discard(r)
        else:
            log.debug("node %s: removal of absent record %s ignored", table.owner, r)
    out.records |= update.add
    return out


def purge_stale(table: RoutingTable, broken: Edge
                ) -> tuple[RoutingTable, dict[int, frozenset[EdgeRecord]]]:
    """Drop every record that relies on ``broken``.

    A record relies on the link if it describes it or if its path crosses
    it; when the owner is an endpoint, everything received from the other
    endpoint goes too.  Returns the purged table and, per remaining
    neighbour, the removals to forward (records as that neighbour holds
    them, i.e. extended by the owner).
    """
    broken = edge(*broken)
    out = table.copy()
    lost = None
    if table.owner in broken:
        lost = broken[1] if broken[0] == table.owner else broken[0]
        out.connected_neighbors.discard(lost)
    dropped = {r for r in table.records if r.uses(broken) or r.sender == lost}
    out.records -= dropped
    notices = {
        nb: frozenset(r.extended(table.owner) for r in dropped if nb not in r.path)
        for nb in sorted(out.connected_neighbors)
    }
    return out, {nb: rs for nb, rs in notices.items() if rs}


def stale_records(tables: Mapping[int, RoutingTable], links: set[Edge]) -> list[tuple[int, EdgeRecord]]:
    """Full scan: records whose edge or path uses a link not in ``links``."""
    bad = []
    for owner, t in tables.items():
        for r in t.records:
            if r.edge not in links or any(h not in links for h in r.hops()):
                bad.append((owner, r))
            elif edge(r.sender, owner) not in links:
                bad.append((owner, r))
    return bad
