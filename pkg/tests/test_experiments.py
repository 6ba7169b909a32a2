import json
import math

import numpy as np
import pytest

from bmlrp import cli, topology
from bmlrp import experiments as ex
from bmlrp.ascent import build_multilevel
from bmlrp.idspace import UsageError
from bmlrp.topology import PhysicalNetwork


def test_profile_two_nodes():
    net = PhysicalNetwork(4, {0b0001: (0.0, 0.0), 0b1001: (0.1, 0.0)}, {(0b0001, 0b1001)})
    prof = ex.degree_profile(build_multilevel(net))
    # level 1 holds two singletons (degree 0) and is not a populated level
    assert [(r.level, r.avg_degree, r.members, r.networks) for r in prof] == [(0, 1.0, 2.0, 1)]


def test_members_halve():
    _, ml, _ = ex.build(ex.ExperimentConfig(nodes=1024).gen(seed=2), ex.ExperimentConfig().options(False))
    prof = ex.degree_profile(ml)
    for a, b in zip(prof, prof[1:]):
        if b.members >= 64:
            assert abs(b.members / a.members - 0.5) <= 0.1, (a, b)
    assert prof[0].members == len(ml.physical.nodes)
    # average degree at level 0 is the physical mean degree
    assert math.isclose(prof[0].avg_degree, ml.physical.mean_degree())


def test_plateau_and_tail():
    prof = [(0, 8.0), (1, 6.0), (2, 5.0), (3, 5.5), (4, 4.0), (5, 2.0), (6, 1.0)]
    assert ex.plateau(prof) == 6.0
    assert ex.tail_non_increasing(prof)
    assert not ex.tail_non_increasing(prof + [(7, 1.5)])
    assert math.isnan(ex.plateau([(0, 3.0)]))


def test_fit_slope():
    ns = [256, 512, 1024, 2048]
    slope, icpt = ex.fit_slope(ns, [3 * n ** 0.5 for n in ns])
    assert math.isclose(slope, 0.5) and math.isclose(icpt, math.log(3))
    assert math.isnan(ex.fit_slope([10, 10], [1, 2])[0])


def test_config():
    cfg = ex.ExperimentConfig(seed=4, seeds=3)
    assert cfg.seed_list() == [4, 5, 6]
    assert cfg.config_hash() == ex.ExperimentConfig(seed=4, seeds=3, workers=4).config_hash()
    assert cfg.config_hash() != ex.ExperimentConfig(seed=5, seeds=3).config_hash()
    for bad in (dict(seeds=0), dict(sample_size=0), dict(connect_target="q")):
        with pytest.raises(UsageError):
            ex.ExperimentConfig(**bad)


def test_degree_csv_deterministic():
    cfg = ex.ExperimentConfig(nodes=128, seeds=2, fractions=(0.0, 0.1))
    first = ex.degrees_csv(cfg, ex.degree_experiment(cfg).rows)
    second = ex.degrees_csv(cfg, ex.degree_experiment(cfg).rows)
    assert first == second
    lines = first.splitlines()
    assert lines[0] == f"# config={cfg.config_hash()} seed=0"
    assert lines[1] == "fraction,level,avg_degree,members"
    assert lines[2].startswith("0,0,")
    assert any(l.startswith("0.1,") for l in lines)
    assert ex.csv_body(first) == "\n".join(lines[1:]) + "\n"


def test_stretch_experiment_small():
    cfg = ex.ExperimentConfig(sizes=(64, 128), seeds=2, sample_size=300)
    res = ex.stretch_experiment(cfg, with_delivery=True)
    assert len(res.runs) == 4 and [n for n, _, _ in res.per_size] == [64, 128]
    assert np.isfinite(res.slope)
    for r in res.runs:
        assert r.delivery.failures == 0 and r.delivery.loop_violations == 0
        assert all(p.stretch >= 1 for p in r.report.pairs)
    text = ex.stretch_csv(cfg, res.runs, cfg.bits)
    assert text.splitlines()[1] == "pair_id,src,dst,hops,bfs,stretch"
    ids = [int(l.split(",")[0]) for l in text.splitlines()[2:]]
    assert ids == list(range(len(ids)))
    assert ex.stretch_csv(cfg, ex.stretch_experiment(cfg).runs, cfg.bits) == text


def test_delivery_single_node():
    net = PhysicalNetwork(4, {3: (0.0, 0.0)}, set())
    rep = ex.delivery_check(build_multilevel(net))
    assert rep.pairs_tested == 0 and rep.failures == 0


def test_theorem_checks_clean():
    _, ml, _ = ex.build(ex.ExperimentConfig(nodes=150).gen(seed=1), ex.ExperimentConfig().options())
    rep = ex.theorem_checks(ml)
    assert rep.ok and rep.levels_checked > 10


def test_failed_seed_share():
    ex._check_failures([], 10, "x")
    with pytest.raises(ex.ExperimentError):
        ex._check_failures([1], 10, "x")
    ex._check_failures([1], 40, "x")  # 2.5 % is excluded with a warning


# -- command line -------------------------------------------------------------------

def test_cli_generate_build_route(tmp_path, capsys):
    out = tmp_path / "g"
    assert cli.main(["generate", "--nodes", "60", "--bits", "8", "--seed", "3",
                     "--out", str(out)]) == 0
    net = topology.load(out / "network.net")
    assert json.loads((out / "summary.json").read_text())["network"]["nodes_kept"] == len(net.nodes)
    dump = tmp_path / "tables"
    assert cli.main(["build", "--input", str(out / "network.net"), "--out", str(tmp_path / "b"),
                     "--dump-tables", str(dump)]) == 0
    summary = json.loads((tmp_path / "b" / "build.json").read_text())
    assert summary["levels"][0]["prefix"] == "" and summary["levels"][0]["members"] == len(net.nodes)
    assert (dump / "root").is_dir()
    s, d = sorted(net.nodes)[:2]
    capsys.readouterr()
    assert cli.main(["route", "--input", str(out / "network.net"),
                     "--from", format(s, "08b"), "--to", format(d, "08b")]) == 0
    text = capsys.readouterr().out
    assert "logical hops" in text and "physical path" in text


def test_cli_degrees_stretch_check(tmp_path):
    assert cli.main(["degrees", "--nodes", "100", "--seeds", "2", "--fractions", "0,0.05",
                     "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "degrees.csv").read_text().splitlines()
    assert rows[1] == "fraction,level,avg_degree,members"
    assert cli.main(["stretch", "--sizes", "64,96", "--seeds", "1", "--sample-size", "200",
                     "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "summary.json").read_text())
    assert "config_hash" in meta and len(meta["stretch"]["per_size"]) == 2
    assert cli.main(["check", "--nodes", "80", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "check.json").read_text())["delivery"]["failures"] == 0
    assert cli.main(["check", "--nodes", "80", "--truncate-tables", "--out", str(tmp_path)]) == 1


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.net"
    bad.write_text("nonsense\n")
    assert cli.main(["build", "--input", str(bad)]) == 2
    assert cli.main(["route", "--nodes", "30", "--from", "0101", "--to", "0110"]) == 2
    assert "error" in capsys.readouterr().err
