"""Compare the compiled and pure-Python kernels.

    python bench/bench_kernels.py [--nodes 1024] [--seed 1] [--repeat 3]

Times one level-0 convergence and one full multi-level build per kernel and
checks that both kernels reach identical tables.
"""

import argparse
import time

from bmlrp import kernels
from bmlrp.ascent import BuildOptions
from bmlrp.experiments import make_physical
from bmlrp.propagation import LevelNetwork, Propagation
from bmlrp.topology import GenConfig


def converge(net, kernel):
    prop = Propagation(LevelNetwork("", net.width, sorted(net.nodes), set(net.links)),
                       kernel=kernel)
    t = time.perf_counter()
    prop.run()
    return time.perf_counter() - t, prop


def full_build(net, kernel):
    # The builder always uses kernels.active; swap it for the duration.
    from bmlrp import ascent
    saved = kernels.active
    kernels.active = kernel
    try:
        t = time.perf_counter()
        ascent.build_multilevel(net, BuildOptions(keep_tables=False))
        return time.perf_counter() - t
    finally:
        kernels.active = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=1024)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.ext is None:
        raise SystemExit("compiled kernel not built; run: pip install -e . --no-build-isolation")
    net, info = make_physical(GenConfig(args.nodes, seed=args.seed))
    print(f"N={info.nodes_kept} links={info.links} mean degree={info.mean_degree:.2f}")
    results = {}
    for name, kernel in (("python", kernels.py), ("compiled", kernels.ext)):
        conv = min(converge(net, kernel)[0] for _ in range(args.repeat))
        build = min(full_build(net, kernel) for _ in range(args.repeat))
        results[name] = (conv, build)
        print(f"{name:9s} level-0 convergence {conv:8.3f} s   full build {build:8.3f} s")
    _, a = converge(net, kernels.py)
    _, b = converge(net, kernels.ext)
    assert a.inbox == b.inbox and a.rounds == b.rounds, "kernels disagree"
    py, ext = results["python"], results["compiled"]
    print(f"speedup: convergence x{py[0] / ext[0]:.1f}, build x{py[1] / ext[1]:.1f}; tables identical")


if __name__ == "__main__":
    main()
