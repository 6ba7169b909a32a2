"""Command line: ``bmlrp generate|build|route|degrees|stretch|check``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import experiments as ex
from . import topology
from .ascent import CONNECT_TARGETS, build_multilevel
from .idspace import NodeId, UsageError, format_id
from .router import RoutingFailure, Router


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x)


def _common(p: argparse.ArgumentParser, *, seeds: bool = False) -> None:
    g = p.add_argument_group("network")
    g.add_argument("--nodes", type=int, default=1024, help="node count N (default 1024)")
    g.add_argument("--bits", type=int, default=16, help="id width n (default 16)")
    g.add_argument("--radius", type=float, default=None,
                   help="link radius in units of the square side (default: mean degree 8)")
    g.add_argument("--random-links", type=float, default=0.0, metavar="FRACTION",
                   help="fraction of nodes given one long-range link")
    g.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    g.add_argument("--input", type=Path, help="load the physical network from a file instead")
    b = p.add_argument_group("build")
    b.add_argument("--extra-k", type=int, default=0, help="extra nearest same-colour links")
    b.add_argument("--connect-target", choices=CONNECT_TARGETS, default="e2")
    b.add_argument("--levels-max", type=int, default=None, help="stop splitting at this depth")
    b.add_argument("--out", type=Path, default=Path("."), help="output directory")
    if seeds:
        b.add_argument("--seeds", type=int, default=10, help="repetitions (default 10)")
        b.add_argument("--workers", type=int, default=1, help="parallel builds")


def _config(args, **over) -> ex.ExperimentConfig:
    kw = dict(nodes=args.nodes, bits=args.bits, radius=args.radius,
              random_links=args.random_links, seed=args.seed, extra_k=args.extra_k,
              connect_target=args.connect_target, levels_max=args.levels_max)
    for name in ("seeds", "workers", "sample_size"):
        if hasattr(args, name):
            kw[name] = getattr(args, name)
    kw.update(over)
    return ex.ExperimentConfig(**kw)


def _physical(args, cfg: ex.ExperimentConfig):
    if args.input is not None:
        net = topology.load(args.input)
        if not net.is_connected():
            net = topology.restrict_largest_component(net)
        return net
    net, _ = ex.make_physical(cfg.gen())
    return net


def _parse_node(text: str, width: int) -> int:
    nid = NodeId.parse(text)
    if nid.width != width:
        raise UsageError(f"id {text!r} has width {nid.width}, the network uses {width}")
    return nid.bits


def cmd_generate(args) -> int:
    cfg = _config(args)
    net, info = ex.make_physical(cfg.gen())
    args.out.mkdir(parents=True, exist_ok=True)
    topology.save(net, args.out / "network.net")
    meta = ex.metadata(cfg)
    meta["network"] = info
    ex.write_json(args.out / "summary.json", meta)
    print(f"wrote {args.out / 'network.net'}: {info.nodes_kept} of {info.nodes_generated} nodes, "
          f"{info.links} links, mean degree {info.mean_degree:.2f}")
    return 0


def cmd_build(args) -> int:
    cfg = _config(args)
    net = _physical(args, cfg)
    dump = args.dump_tables
    width = net.width

    def on_level(level, prop):
        if dump is None:
            return
        d = dump / (level.prefix or "root")
        d.mkdir(parents=True, exist_ok=True)
        for node, table in prop.tables().items():
            (d / f"{format_id(node, width)}.txt").write_text(table.dump(width))

    t = time.perf_counter()
    ml = build_multilevel(net, cfg.options(), on_level=on_level)
    levels = []
    for prefix in sorted(ml.levels, key=lambda p: (len(p), p)):
        lv = ml.levels[prefix]
        levels.append({"prefix": prefix, "depth": len(prefix), "members": len(lv.members),
                       "links": len(lv.links), "rounds": lv.rounds, "capped": lv.capped,
                       "avg_degree": 2 * len(lv.links) / len(lv.members)})
    args.out.mkdir(parents=True, exist_ok=True)
    meta = ex.metadata(cfg)
    meta.update(levels=levels, profile=ex.degree_profile(ml), nodes=len(net.nodes),
                seconds=round(time.perf_counter() - t, 3))
    ex.write_json(args.out / "build.json", meta)
    for row in ex.degree_profile(ml):
        print(f"level {row.level:2d}  networks {row.networks:5d}  members {row.members:9.2f}  "
              f"avg degree {row.avg_degree:.3f}")
    print(f"wrote {args.out / 'build.json'}")
    return 0


def cmd_route(args) -> int:
    cfg = _config(args)
    net = _physical(args, cfg)
    width = net.width
    s, d = _parse_node(args.src, width), _parse_node(args.dst, width)
    for x in (s, d):
        if x not in net.nodes:
            raise UsageError(f"{format_id(x, width)} is not in the network")
    ml = build_multilevel(net, cfg.options())
    try:
        res = Router(ml).route(s, d)
    except RoutingFailure as exc:
        print(f"routing failure: {exc}", file=sys.stderr)
        return 1
    fmt = lambda seq: " ".join(format_id(x, width) for x in seq)  # noqa: E731
    print(f"logical hops:  {fmt(res.logical_hops)}")
    print(f"physical path: {fmt(res.physical_path)}")
    print(f"hop count:     {res.hop_count}")
    for seg in res.segments:
        print(f"  level {seg.depth} [{seg.prefix or '-'}]: {fmt(seg.table_path)}"
              f"  ->  {len(seg.physical) - 1} physical hops")
    return 0


def cmd_degrees(args) -> int:
    cfg = _config(args, fractions=args.fractions)
    t = time.perf_counter()
    result = ex.degree_experiment(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "degrees.csv").write_text(ex.degrees_csv(cfg, result.rows))
    meta = ex.metadata(cfg)
    meta["degrees"] = {
        f"{f:g}": {"plateau": ex.plateau([(l, v) for ff, l, v, _ in result.rows if ff == f]),
                   "median_by_level": {str(k): v for k, v in result.medians[f].items()},
                   "failed_seeds": result.failed[f],
                   "networks": result.networks[f]}
        for f in cfg.fractions}
    meta["seconds"] = round(time.perf_counter() - t, 3)
    ex.write_json(args.out / "summary.json", meta)
    for f in cfg.fractions:
        curve = ", ".join(f"{v:.2f}" for ff, _, v, _ in result.rows if ff == f)
        print(f"fraction {f:g}: {curve}")
    print(f"wrote {args.out / 'degrees.csv'}")
    return 0


def cmd_stretch(args) -> int:
    sizes = args.sizes or (args.nodes,)
    cfg = _config(args, sizes=sizes, nodes=max(sizes))
    t = time.perf_counter()
    result = ex.stretch_experiment(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "stretch.csv").write_text(ex.stretch_csv(cfg, result.runs, cfg.bits))
    meta = ex.metadata(cfg)
    first = 0
    runs = []
    for r in result.runs:
        n = len(r.report.pairs)
        runs.append({"nodes": r.nodes, "seed": r.seed, "kept": r.kept,
                     "pair_ids": [first, first + n - 1], "mean": r.report.mean,
                     "median": r.report.median, "p95": r.report.p95,
                     "mean_hops": r.report.mean_hops, "failures": r.report.failures})
        first += n
    meta["stretch"] = {"runs": runs, "slope_log_hops_vs_log_n": result.slope,
                       "per_size": [{"nodes": n, "mean_hops": h, "mean_stretch": s}
                                    for n, h, s in result.per_size]}
    meta["seconds"] = round(time.perf_counter() - t, 3)
    ex.write_json(args.out / "summary.json", meta)
    for n, h, s in result.per_size:
        print(f"N={n:6d}  mean hops {h:8.3f}  mean stretch {s:.3f}")
    print(f"slope of log(mean hops) vs log(N): {result.slope:.3f}")
    print(f"wrote {args.out / 'stretch.csv'}")
    return 0


def cmd_check(args) -> int:
    cfg = _config(args)
    net = _physical(args, cfg)
    ml = build_multilevel(net, cfg.options())
    theorems = ex.theorem_checks(ml)
    delivery = ex.delivery_check(ml, cfg.seed, cfg.sample_size, direct_only=args.truncate_tables)
    args.out.mkdir(parents=True, exist_ok=True)
    meta = ex.metadata(cfg)
    meta.update(nodes=len(net.nodes), theorems=theorems, delivery=delivery,
                truncated_tables=args.truncate_tables)
    ex.write_json(args.out / "check.json", meta)
    print(f"levels checked {theorems.levels_checked}, disconnected "
          f"{len(theorems.disconnected_levels)}, tables without the other colour "
          f"{len(theorems.blind_tables)}")
    print(f"pairs {delivery.pairs_tested}, failures {delivery.failures}, "
          f"loop violations {delivery.loop_violations}, bad paths {delivery.bad_physical}")
    clean = theorems.ok and not (delivery.failures or delivery.loop_violations
                                 or delivery.bad_physical)
    return 0 if clean else 1


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bmlrp", description="Multi-level prefix routing simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random geometric network")
    _common(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("build", help="build all levels, write build.json")
    _common(p)
    p.add_argument("--dump-tables", type=Path, metavar="DIR",
                   help="write every converged table, one file per node per level")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("route", help="route one packet and print its path")
    _common(p)
    p.add_argument("--from", dest="src", required=True, help="source id (binary or 0x<hex>/<w>)")
    p.add_argument("--to", dest="dst", required=True, help="destination id")
    p.set_defaults(fn=cmd_route)

    p = sub.add_parser("degrees", help="average degree per level, write degrees.csv")
    _common(p, seeds=True)
    p.add_argument("--fractions", type=_floats, default=ex.FRACTIONS,
                   help="comma-separated long-range fractions (default 0,0.01,0.05,0.1)")
    p.set_defaults(fn=cmd_degrees)

    p = sub.add_parser("stretch", help="path stretch sweep, write stretch.csv")
    _common(p, seeds=True)
    p.add_argument("--sizes", type=_ints, default=None,
                   help="comma-separated N values (default: --nodes)")
    p.add_argument("--sample-size", type=int, default=ex.SAMPLE_SIZE)
    p.set_defaults(fn=cmd_stretch)

    p = sub.add_parser("check", help="connectivity and delivery checks, write check.json")
    _common(p)
    p.add_argument("--sample-size", type=int, default=ex.SAMPLE_SIZE)
    p.add_argument("--truncate-tables", action="store_true",
                   help="fault injection: keep only each node's own links in its tables")
    p.set_defaults(fn=cmd_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (UsageError, topology.ParseError, ex.ExperimentError) as exc:
        print(f"bmlrp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
