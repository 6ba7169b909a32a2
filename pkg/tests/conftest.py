import random

import pytest

from bmlrp.levels import edge
from bmlrp.oracle import load_fixture
from bmlrp.propagation import LevelNetwork, Propagation


def random_graph(rng: random.Random, n: int, width: int, extra: float = 1.0):
    """Connected-ish random graph on ``n`` distinct ids: a random tree plus extra edges."""
    ids = rng.sample(range(1 << width), n)
    edges = set()
    for i in range(1, n):
        edges.add(edge(ids[i], ids[rng.randrange(i)]))
    for _ in range(int(extra * n)):
        u, v = rng.sample(ids, 2)
        edges.add(edge(u, v))
    return ids, edges


def adjacency(edges):
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    return adj


@pytest.fixture(scope="session")
def f3():
    fx = load_fixture("f3")
    return fx, fx.ids_by_label()


@pytest.fixture(scope="session")
def f3_prop(f3):
    fx, _ = f3
    net = fx.network
    prop = Propagation(LevelNetwork("", net.width, sorted(net.nodes), set(net.links)),
                       record_diffs=True)
    prop.run()
    return prop
