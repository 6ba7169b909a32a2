import os
import random
import subprocess
import sys

import pytest

from bmlrp import _kernel_py, kernels
from bmlrp.propagation import LevelNetwork, Propagation

from conftest import random_graph

ext = kernels.ext
needs_ext = pytest.mark.skipif(ext is None, reason="compiled kernels not built")


def _local_case(rng):
    n = rng.randint(3, 30)
    ids, edges = random_graph(rng, n, 6, extra=rng.random() * 2)
    ids.sort()
    idx = {x: i for i, x in enumerate(ids)}
    keys = sorted(min(idx[u], idx[v]) * n + max(idx[u], idx[v]) for u, v in edges)
    color = bytes((x >> 5) & 1 for x in ids)
    return n, keys, color


@needs_ext
def test_g_out_equivalence():
    rng = random.Random(11)
    for _ in range(300):
        n, keys, color = _local_case(rng)
        a = rng.randrange(n)
        b = rng.choice([k % n if k // n == a else k // n for k in keys if a in (k // n, k % n)]
                       or [-1])
        p1, p2 = [], []
        got = ext.g_out_edges(keys, n, a, b, color, 32, p1)
        want = _kernel_py.g_out_edges(keys, n, a, b, color, 32, p2)
        assert got == want and sorted(p1) == sorted(p2)


@needs_ext
def test_connect_inside_equivalence():
    rng = random.Random(12)
    for _ in range(500):
        nodes = sorted(rng.sample(range(64), rng.randint(1, 20)))
        a = rng.choice(nodes)
        first = rng.randint(0, 5)
        assert ext.connect_inside(a, nodes, first, 6) == _kernel_py.connect_inside(a, nodes, first, 6)


@needs_ext
def test_propagation_equivalence():
    rng = random.Random(13)
    for _ in range(5):
        ids, edges = random_graph(rng, 150, 10, extra=1.5)
        runs = []
        for k in (_kernel_py, ext):
            p = Propagation(LevelNetwork("", 10, ids, set(edges)), kernel=k)
            runs.append((p.run(), p.inbox))
        assert runs[0] == runs[1]


def test_pure_switch():
    code = "from bmlrp import kernels; print(kernels.NAME)"
    env = dict(os.environ, BMLRP_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"
    env.pop("BMLRP_PURE")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == ("python" if ext is None else "compiled")
