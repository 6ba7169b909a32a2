"""Physical (level-0) networks: generation, long-range links, persistence."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .idspace import DEFAULT_WIDTH, MAX_WIDTH, UsageError, format_id

# Expected physical degree the default radius aims for.
DEFAULT_TARGET_DEGREE = 8.0
# Degree at which N=1024 networks are connected in >= 95% of seeds (measured).
CONNECTED_TARGET_DEGREE = 14.0

# Substream keys below the master seed.
STREAM_PLACEMENT = 0
STREAM_IDS = 1
STREAM_LONG_RANGE = 2
STREAM_PAIRS = 3

LONG_RANGE_RETRIES = 32

HEADER = "bmlrp-net v1"


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def substream(seed: int, key: int) -> np.random.Generator:
    """Philox generator for one purpose, derived from the 64-bit master seed."""
    ss = np.random.SeedSequence(seed, spawn_key=(key,))
    return np.random.Generator(np.random.Philox(ss))


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass
class PhysicalNetwork:
    width: int
    nodes: dict[int, tuple[float, float]]
    links: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.links = {_pair(u, v) for u, v in self.links}
        for u, v in self.links:
            if u == v:
                raise UsageError(f"self-link on {u}")
            if u not in self.nodes or v not in self.nodes:
                raise UsageError(f"link {u}-{v} references an unknown node")

    def __len__(self) -> int:
        return len(self.nodes)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {u: [] for u in self.nodes}
        for u, v in sorted(self.links):
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def mean_degree(self) -> float:
        return 2 * len(self.links) / len(self.nodes) if self.nodes else 0.0

    def is_connected(self) -> bool:
        return len(components(self.nodes, self.links)) <= 1


@dataclass(frozen=True)
class GenConfig:
    node_count: int
    width_bits: int = DEFAULT_WIDTH
    side: float = 1.0
    radius: float | None = None
    random_link_fraction: float = 0.0
    seed: int = 0

    def resolved_radius(self) -> float:
        if self.radius is not None:
            return self.radius
        return default_radius(self.node_count, self.side)

    def validate(self) -> None:
        if self.node_count < 0:
            raise UsageError("node_count must be non-negative")
        if not 1 <= self.width_bits <= MAX_WIDTH:
            raise UsageError(f"width_bits must be in [1, {MAX_WIDTH}]")
        if self.node_count > (1 << self.width_bits):
            raise UsageError(
                f"{self.node_count} nodes do not fit in a {self.width_bits}-bit space")
        if not 0.0 <= self.random_link_fraction <= 1.0:
            raise UsageError("random_link_fraction must be in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned value")


def default_radius(node_count: int, side: float = 1.0,
                   target_degree: float = DEFAULT_TARGET_DEGREE) -> float:
    """Radius whose expected degree in a square (boundary included) is the target.

    Uses the mean disc/square overlap ``pi r^2 - 8/3 r^3 + r^4 / 2`` for a unit
    square and solves for ``r`` by bisection.
    """
    if node_count < 2:
        return side * math.sqrt(2.0)
    want = target_degree / (node_count - 1)
    if want >= 1.0:
        return side * math.sqrt(2.0)
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = (lo + hi) / 2
        area = math.pi * mid**2 - 8.0 / 3.0 * mid**3 + mid**4 / 2
        lo, hi = (mid, hi) if area < want else (lo, mid)
    return side * (lo + hi) / 2


def _draw_ids(rng: np.random.Generator, count: int, width: int) -> list[int]:
    space = 1 << width
    if width <= 30:
        return [int(x) for x in rng.choice(space, size=count, replace=False)]
    seen: set[int] = set()
    out: list[int] = []
    while len(out) < count:
        x = int(rng.integers(0, space - 1, endpoint=True, dtype=np.uint64))
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def generate_geometric(cfg: GenConfig) -> PhysicalNetwork:
    """Uniform random geometric graph, plus long-range links if configured."""
    cfg.validate()
    n = cfg.node_count
    coords = substream(cfg.seed, STREAM_PLACEMENT).uniform(0.0, cfg.side, size=(n, 2))
    ids = _draw_ids(substream(cfg.seed, STREAM_IDS), n, cfg.width_bits)
    nodes = {ids[k]: (float(coords[k, 0]), float(coords[k, 1])) for k in range(n)}
    links: set[tuple[int, int]] = set()
    if n >= 2:
        tree = cKDTree(coords)
        for i, j in tree.query_pairs(cfg.resolved_radius()):
            links.add(_pair(ids[i], ids[j]))
    net = PhysicalNetwork(cfg.width_bits, nodes, links)
    if cfg.random_link_fraction > 0:
        net = add_random_links(net, cfg.random_link_fraction, cfg.seed)
    return net


def add_random_links(net: PhysicalNetwork, fraction: float, seed: int) -> PhysicalNetwork:
    """Pair ``floor(fraction * N)`` random nodes with random partners.

    Partners are drawn independently of coordinates; a pair that already
    exists is redrawn up to ``LONG_RANGE_RETRIES`` times and then skipped.
    """
    if not 0.0 <= fraction <= 1.0:
        raise UsageError("fraction must be in [0, 1]")
    ids = sorted(net.nodes)
    n = len(ids)
    count = math.floor(fraction * n)
    links = set(net.links)
    if count == 0 or n < 2:
        return PhysicalNetwork(net.width, dict(net.nodes), links)
    rng = substream(seed, STREAM_LONG_RANGE)
    chosen = rng.choice(n, size=count, replace=False)
    for i in chosen:
        for _ in range(LONG_RANGE_RETRIES):
            j = int(rng.integers(0, n - 1))
            if j >= i:
                j += 1
            pair = _pair(ids[int(i)], ids[j])
            if pair not in links:
                links.add(pair)
                break
    return PhysicalNetwork(net.width, dict(net.nodes), links)


def components(nodes: Iterable[int], links: Iterable[tuple[int, int]]) -> list[set[int]]:
    adj: dict[int, list[int]] = {u: [] for u in nodes}
    for u, v in links:
        adj[u].append(v)
        adj[v].append(u)
    seen: set[int] = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    queue.append(v)
        seen |= comp
        comps.append(comp)
    return comps


def restrict_largest_component(net: PhysicalNetwork) -> PhysicalNetwork:
    """Subgraph on the largest component; ties go to the smallest contained id."""
    if not net.nodes:
        raise UsageError("empty network")
    comps = components(net.nodes, net.links)
    best = min(comps, key=lambda c: (-len(c), min(c)))
    return PhysicalNetwork(
        net.width,
        {u: xy for u, xy in net.nodes.items() if u in best},
        {(u, v) for u, v in net.links if u in best},
    )


# -- text format --------------------------------------------------------------

def dumps(net: PhysicalNetwork) -> str:
    w = net.width
    lines = [f"{HEADER} {len(net.nodes)} {w}"]
    for u in sorted(net.nodes):
        x, y = net.nodes[u]
        lines.append(f"{format_id(u, w)} {x!r} {y!r}")
    lines.append("#links")
    for u, v in sorted(net.links):
        lines.append(f"{format_id(u, w)} {format_id(v, w)}")
    return "\n".join(lines) + "\n"


def _parse_id(tok: str, width: int, lineno: int) -> int:
    if len(tok) != width or set(tok) - {"0", "1"}:
        raise ParseError(lineno, f"expected a {width}-bit binary id, got {tok!r}")
    return int(tok, 2)


def loads(text: str) -> PhysicalNetwork:
    lines = text.splitlines()
    if not lines:
        raise ParseError(1, "empty file")
    head = lines[0].split()
    if len(head) != 4 or " ".join(head[:2]) != HEADER:
        raise ParseError(1, f"expected '{HEADER} <N> <n_bits>'")
    try:
        count, width = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError(1, "N and n_bits must be integers") from None
    if len(lines) < count + 2:
        raise ParseError(len(lines), "file truncated")
    nodes: dict[int, tuple[float, float]] = {}
    for lineno in range(2, count + 2):
        parts = lines[lineno - 1].split()
        if len(parts) != 3:
            raise ParseError(lineno, "expected '<id> <x> <y>'")
        u = _parse_id(parts[0], width, lineno)
        if u in nodes:
            raise ParseError(lineno, f"duplicate node {parts[0]}")
        try:
            nodes[u] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise ParseError(lineno, "bad coordinate") from None
    if lines[count + 1].strip() != "#links":
        raise ParseError(count + 2, "expected '#links'")
    links: set[tuple[int, int]] = set()
    for lineno in range(count + 3, len(lines) + 1):
        line = lines[lineno - 1].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(lineno, "expected '<id> <id>'")
        u, v = (_parse_id(p, width, lineno) for p in parts)
        if u == v:
            raise ParseError(lineno, "self-link")
        if u not in nodes or v not in nodes:
            raise ParseError(lineno, "link to an undeclared node")
        links.add(_pair(u, v))
    return PhysicalNetwork(width, nodes, links)


def save(net: PhysicalNetwork, path: str | Path) -> None:
    Path(path).write_text(dumps(net))


def load(path: str | Path) -> PhysicalNetwork:
    return loads(Path(path).read_text())
