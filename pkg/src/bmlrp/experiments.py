"""Experiment drivers: degree-per-level curves, stretch sweeps, delivery and
connectivity checks, and their CSV/JSON outputs."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .ascent import BuildOptions, MultiLevelNetwork, build_multilevel
from .idspace import UsageError, format_id, prefix_len
from .oracle import brute_connectivity
from .propagation import NonConvergenceError
from .router import RoutingFailure, Router, StretchReport, measure_stretch, sample_pairs
from .topology import (DEFAULT_TARGET_DEGREE, GenConfig, PhysicalNetwork, default_radius,
                       generate_geometric, restrict_largest_component)

log = logging.getLogger(__name__)

FRACTIONS = (0.0, 0.01, 0.05, 0.10)
SIZES = (256, 512, 1024, 2048, 4096)
FULL_ENUMERATION_MAX = 256
SAMPLE_SIZE = 10_000
MAX_FAILED_SEED_SHARE = 0.05


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    nodes: int = 1024
    bits: int = 16
    side: float = 1.0
    radius: float | None = None
    random_links: float = 0.0
    seed: int = 0
    seeds: int = 1
    levels_max: int | None = None
    extra_k: int = 0
    connect_target: str = "e2"
    path_cap: int = 32
    fractions: tuple[float, ...] = FRACTIONS
    sizes: tuple[int, ...] = (1024,)
    sample_size: int = SAMPLE_SIZE
    workers: int = 1

    def __post_init__(self) -> None:
        if self.seeds < 1:
            raise UsageError("seeds must be >= 1")
        if self.sample_size < 1:
            raise UsageError("sample_size must be >= 1")
        self.options()  # validates the build switches

    def seed_list(self) -> list[int]:
        return [self.seed + k for k in range(self.seeds)]

    def options(self, keep_tables: bool = True) -> BuildOptions:
        return BuildOptions(connect_target=self.connect_target, extra_k=self.extra_k,
                            levels_max=self.levels_max, path_cap=self.path_cap,
                            keep_tables=keep_tables)

    def gen(self, nodes: int | None = None, fraction: float | None = None,
            seed: int | None = None) -> GenConfig:
        return GenConfig(node_count=self.nodes if nodes is None else nodes,
                         width_bits=self.bits, side=self.side, radius=self.radius,
                         random_link_fraction=self.random_links if fraction is None else fraction,
                         seed=self.seed if seed is None else seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fractions"] = list(self.fractions)
        d["sizes"] = list(self.sizes)
        del d["workers"]  # does not affect results
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- building -----------------------------------------------------------------------

@dataclass(frozen=True)
class NetworkInfo:
    nodes_generated: int
    nodes_kept: int
    links: int
    radius: float
    mean_degree: float


def make_physical(gen: GenConfig) -> tuple[PhysicalNetwork, NetworkInfo]:
    """Generate and keep the largest component (the theorems need a connected graph)."""
    raw = generate_geometric(gen)
    net = restrict_largest_component(raw) if raw.nodes else raw
    return net, NetworkInfo(len(raw.nodes), len(net.nodes), len(net.links),
                            gen.resolved_radius(), net.mean_degree())


def build(gen: GenConfig, options: BuildOptions
          ) -> tuple[PhysicalNetwork, MultiLevelNetwork, NetworkInfo]:
    net, info = make_physical(gen)
    return net, build_multilevel(net, options), info


# -- degrees ------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelDegree:
    level: int
    avg_degree: float   # mean level-i link count over all nodes
    members: float      # mean size of the non-empty level-i networks
    networks: int


def degree_profile(ml: MultiLevelNetwork) -> list[LevelDegree]:
    """One entry per depth at which some level network has >= 2 members."""
    total = len(ml.physical.nodes)
    out = []
    for depth in range(ml.max_depth() + 1):
        levels = [ml.levels[p] for p in ml.prefixes_at(depth)]
        if not levels or max(len(l.members) for l in levels) < 2:
            continue
        links = sum(len(l.links) for l in levels)
        sizes = [len(l.members) for l in levels]
        out.append(LevelDegree(depth, 2 * links / total, sum(sizes) / len(sizes), len(levels)))
    return out


@dataclass
class DegreeResult:
    rows: list[tuple[float, int, float, float]]       # fraction, level, avg_degree, members
    medians: dict[float, dict[int, float]]
    per_seed: dict[float, dict[int, list[LevelDegree]]]
    failed: dict[float, list[int]] = field(default_factory=dict)
    networks: dict[float, dict[int, NetworkInfo]] = field(default_factory=dict)


def _degree_task(args) -> tuple[float, int, list[LevelDegree] | None, NetworkInfo | None, str]:
    gen, options = args
    try:
        _, ml, info = build(gen, options)
    except NonConvergenceError as exc:
        return gen.random_link_fraction, gen.seed, None, None, str(exc).splitlines()[0]
    return gen.random_link_fraction, gen.seed, degree_profile(ml), info, ""


def _fan_out(fn: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _check_failures(failed: list[int], total: int, what: str) -> None:
    if not failed:
        return
    if len(failed) / total >= MAX_FAILED_SEED_SHARE:
        raise ExperimentError(f"{what}: {len(failed)} of {total} seeds failed to build")
    log.warning("%s: excluding %d failed seed(s): %s", what, len(failed), failed)


def aggregate_degrees(per_seed: dict[float, dict[int, list[LevelDegree]]]
                      ) -> tuple[list[tuple[float, int, float, float]], dict[float, dict[int, float]]]:
    rows = []
    medians: dict[float, dict[int, float]] = {}
    for fraction in sorted(per_seed):
        by_level: dict[int, list[LevelDegree]] = {}
        for seed in sorted(per_seed[fraction]):
            for entry in per_seed[fraction][seed]:
                by_level.setdefault(entry.level, []).append(entry)
        medians[fraction] = {}
        for level in sorted(by_level):
            got = by_level[level]
            rows.append((fraction, level, sum(e.avg_degree for e in got) / len(got),
                         sum(e.members for e in got) / len(got)))
            medians[fraction][level] = statistics.median(e.avg_degree for e in got)
    return rows, medians


def degree_experiment(cfg: ExperimentConfig) -> DegreeResult:
    options = cfg.options(keep_tables=False)
    tasks = [(cfg.gen(fraction=f, seed=s), options) for f in cfg.fractions for s in cfg.seed_list()]
    per_seed: dict[float, dict[int, list[LevelDegree]]] = {f: {} for f in cfg.fractions}
    networks: dict[float, dict[int, NetworkInfo]] = {f: {} for f in cfg.fractions}
    failed: dict[float, list[int]] = {f: [] for f in cfg.fractions}
    for fraction, seed, prof, info, err in sorted(_fan_out(_degree_task, tasks, cfg.workers),
                                                  key=lambda r: (r[0], r[1])):
        if prof is None:
            failed[fraction].append(seed)
            log.warning("fraction %g seed %d: %s", fraction, seed, err)
        else:
            per_seed[fraction][seed] = prof
            networks[fraction][seed] = info
    for f in cfg.fractions:
        _check_failures(failed[f], cfg.seeds, f"degrees at fraction {f:g}")
    rows, medians = aggregate_degrees(per_seed)
    return DegreeResult(rows, medians, per_seed, failed, networks)


def plateau(profile: Sequence[tuple[int, float]]) -> float:
    """Largest average degree above the physical level."""
    above = [d for level, d in profile if level >= 1]
    return max(above) if above else float("nan")


def tail_non_increasing(profile: Sequence[tuple[int, float]], share: float = 1 / 3,
                        slack: float = 0.0) -> bool:
    """Whether the last ``share`` of the populated levels never rises."""
    values = [d for _, d in sorted(profile)]
    start = len(values) - max(2, math.ceil(len(values) * share))
    tail = values[max(start, 0):]
    return all(b <= a + slack for a, b in zip(tail, tail[1:]))


# -- delivery and theorem checks -----------------------------------------------------

@dataclass(frozen=True)
class DeliveryReport:
    pairs_tested: int
    failures: int
    loop_violations: int
    bad_physical: int


def delivery_check(ml: MultiLevelNetwork, seed: int = 0, sample_size: int = SAMPLE_SIZE,
                   direct_only: bool = False, router: Router | None = None) -> DeliveryReport:
    """Route every pair (N <= 256) or a uniform sample; count failures."""
    n = len(ml.physical.nodes)
    size = n * (n - 1) if n <= FULL_ENUMERATION_MAX else sample_size
    pairs = sample_pairs(list(ml.physical.nodes), size, seed) if n >= 2 else []
    router = router or Router(ml, direct_only=direct_only)
    links = ml.physical.links
    width = ml.width
    failures = loops = bad = 0
    for s, d in pairs:
        try:
            res = router.route(s, d)
        except RoutingFailure:
            failures += 1
            continue
        pl = [prefix_len(x, d, width) for x in res.logical_hops]
        if any(b <= a for a, b in zip(pl, pl[1:])):
            loops += 1
        path = res.physical_path
        if path[0] != s or path[-1] != d or any(
                (min(u, v), max(u, v)) not in links for u, v in zip(path, path[1:])):
            bad += 1
    return DeliveryReport(len(pairs), failures, loops, bad)


@dataclass(frozen=True)
class TheoremReport:
    levels_checked: int
    disconnected_levels: list[str]
    blind_tables: list[tuple[str, int]]   # (prefix, node) with no opposite colour in view

    @property
    def ok(self) -> bool:
        return not self.disconnected_levels and not self.blind_tables


def theorem_checks(ml: MultiLevelNetwork) -> TheoremReport:
    """Every level network is connected; every table in a two-colour level
    network shows at least one node of the other colour."""
    width = ml.width
    disconnected = []
    blind = []
    checked = 0
    for prefix in sorted(ml.levels, key=lambda p: (len(p), p)):
        level = ml.levels[prefix]
        if len(level.members) < 2:
            continue
        checked += 1
        if len(brute_connectivity(level.members, level.links)) > 1:
            disconnected.append(prefix)
        depth = len(prefix)
        if depth >= width or level.tables is None:
            continue
        shift = width - 1 - depth
        colours = {(x >> shift) & 1 for x in level.members}
        if len(colours) < 2:
            continue
        for x in level.members:
            mine = (x >> shift) & 1
            if not any((y >> shift) & 1 != mine for y in level.table_adjacency(x)):
                blind.append((prefix, x))
    return TheoremReport(checked, disconnected, blind)


# -- stretch ------------------------------------------------------------------------

@dataclass(frozen=True)
class StretchRun:
    nodes: int              # requested N
    seed: int
    kept: int               # nodes in the largest component
    report: StretchReport
    delivery: DeliveryReport | None = None


@dataclass
class StretchResult:
    runs: list[StretchRun]
    slope: float
    intercept: float
    per_size: list[tuple[int, float, float]]   # N, mean_hops, mean_stretch
    failed: dict[int, list[int]] = field(default_factory=dict)


def fit_slope(ns: Iterable[float], hops: Iterable[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log(hops) against log(N)."""
    x = np.log(np.asarray(list(ns), dtype=float))
    y = np.log(np.asarray(list(hops), dtype=float))
    if len(x) < 2 or np.ptp(x) == 0:
        return float("nan"), float("nan")
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def stretch_run(cfg: ExperimentConfig, nodes: int, seed: int, with_delivery: bool = False,
                ml: MultiLevelNetwork | None = None) -> StretchRun:
    if ml is None:
        _, ml, _ = build(cfg.gen(nodes=nodes, seed=seed), cfg.options())
    router = Router(ml)
    report = measure_stretch(ml, cfg.sample_size, seed, router)
    delivery = delivery_check(ml, seed, cfg.sample_size, router=router) if with_delivery else None
    return StretchRun(nodes, seed, len(ml.physical.nodes), report, delivery)


def _stretch_task(args):
    cfg, nodes, seed, with_delivery = args
    try:
        return stretch_run(cfg, nodes, seed, with_delivery)
    except NonConvergenceError as exc:
        return (nodes, seed, str(exc).splitlines()[0])


def summarize_stretch(runs: Sequence[StretchRun]) -> StretchResult:
    per_size = []
    for n in sorted({r.nodes for r in runs}):
        got = [r for r in runs if r.nodes == n]
        per_size.append((n, sum(r.report.mean_hops for r in got) / len(got),
                         sum(r.report.mean for r in got) / len(got)))
    slope, intercept = fit_slope([r.nodes for r in runs], [r.report.mean_hops for r in runs])
    return StretchResult(sorted(runs, key=lambda r: (r.nodes, r.seed)), slope, intercept, per_size)


def stretch_experiment(cfg: ExperimentConfig, with_delivery: bool = False) -> StretchResult:
    tasks = [(cfg, n, s, with_delivery) for n in cfg.sizes for s in cfg.seed_list()]
    runs = []
    failed: dict[int, list[int]] = {n: [] for n in cfg.sizes}
    for out in _fan_out(_stretch_task, tasks, cfg.workers):
        if isinstance(out, tuple):
            failed[out[0]].append(out[1])
            log.warning("N=%d seed %d: %s", *out)
        else:
            runs.append(out)
    for n in cfg.sizes:
        _check_failures(failed[n], cfg.seeds, f"stretch at N={n}")
    result = summarize_stretch(runs)
    result.failed = failed
    return result


# -- output -------------------------------------------------------------------------

def _header(cfg: ExperimentConfig) -> str:
    return f"# config={cfg.config_hash()} seed={cfg.seed}\n"


def degrees_csv(cfg: ExperimentConfig, rows: Sequence[tuple[float, int, float, float]]) -> str:
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fraction", "level", "avg_degree", "members"])
    for fraction, level, deg, members in rows:
        w.writerow([f"{fraction:g}", level, f"{deg:.6f}", f"{members:.3f}"])
    return buf.getvalue()


def stretch_csv(cfg: ExperimentConfig, runs: Sequence[StretchRun], width: int) -> str:
    """Pair rows of every run; ``pair_id`` counts across runs in (N, seed) order."""
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pair_id", "src", "dst", "hops", "bfs", "stretch"])
    k = 0
    for run in runs:
        for p in run.report.pairs:
            w.writerow([k, format_id(p.src, width), format_id(p.dst, width), p.hops, p.bfs,
                        f"{p.stretch:.6f}"])
            k += 1
    return buf.getvalue()


def csv_body(text: str) -> str:
    """The CSV without its provenance comment line."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def metadata(cfg: ExperimentConfig) -> dict:
    return {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "seeds": cfg.seed_list(),
        "kernel": kernels.NAME,
        "radius": {
            "value_at_nodes": cfg.radius if cfg.radius is not None
            else default_radius(cfg.nodes, cfg.side),
            "rule": "given" if cfg.radius is not None
            else f"expected physical degree {DEFAULT_TARGET_DEGREE:g} in the square",
            "note": "connectivity radius is not given by the source; experiments keep the "
                    "largest component",
        },
    }


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")
