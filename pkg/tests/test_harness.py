import csv
import json

import numpy as np
import pytest

from diskmatch import harness
from diskmatch.geometry import Disk
from diskmatch.graph import Matching
from diskmatch.harness import (ALGORITHMS, ConfigError, InstanceSpec, dumps_instance,
                               generate_instance, load_instance, load_matching, loads_instance,
                               parse_config, run, save_instance, scaling_slopes)

from oracles import disk_matching_size, pairs_bruteforce, random_unit, rng_for


class TestInstanceSpec:
    @pytest.mark.parametrize("kw", [
        dict(kind="nope", n=1),
        dict(kind="uniform-unit", n=-1),
        dict(kind="uniform-unit", n=1, box_side=0),
        dict(kind="uniform-mixed-radius", n=1, radius_range=(2, 1)),
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            InstanceSpec(**kw)

    def test_empty(self):
        assert generate_instance(InstanceSpec("uniform-unit", 0)) == []

    def test_single_tower(self):
        disks = generate_instance(InstanceSpec("stacked-towers", 100, groups=1, seed=3))
        assert len(disks) == 100
        assert len({(d.cx, d.cy) for d in disks}) == 1
        assert all(d.r == 1.0 for d in disks)

    @pytest.mark.parametrize("kind", harness.KINDS)
    def test_deterministic(self, kind):
        rr = (1.0, 1.0) if kind == "uniform-unit" else (0.5, 1.5)
        spec = InstanceSpec(kind, 80, box_side=12, radius_range=rr, seed=9, groups=4)
        assert generate_instance(spec) == generate_instance(spec)
        assert len(generate_instance(spec)) == 80

    def test_kinds_respect_radius(self):
        spec = InstanceSpec("uniform-mixed-radius", 500, box_side=20, radius_range=(0.5, 2), seed=1)
        rs = [d.r for d in generate_instance(spec)]
        assert 0.5 <= min(rs) and max(rs) <= 2

    def test_density_target(self):
        spec = InstanceSpec("uniform-unit", 2000, density_target=6, seed=2)
        disks = generate_instance(spec)
        assert len(disks) == 2000

    def test_planted_25_pairs(self):
        spec = InstanceSpec("planted-matching", 50, groups=25, gap=10, seed=4)
        disks = generate_instance(spec)
        assert disk_matching_size(disks) == 25

    @pytest.mark.parametrize("seed", range(5))
    def test_planted_pairs_isolated(self, seed):
        spec = InstanceSpec("planted-matching", 400, groups=10, gap=10, seed=seed)
        disks = generate_instance(spec)
        assert len(disks) == 400
        assert disk_matching_size(disks) >= 10


class TestFiles:
    def test_load_text(self):
        assert loads_instance("0 0 1\n2 0 1\n") == [Disk(0, 0, 1), Disk(2, 0, 1)]

    def test_comments_and_blanks(self):
        text = "# header\n\n  1 2 3  # trailing\n\t4 5 6\n"
        assert loads_instance(text) == [Disk(1, 2, 3), Disk(4, 5, 6)]

    @pytest.mark.parametrize("text, line", [("0 0 -1\n", 1), ("0 0 1\n0 0\n", 2),
                                            ("0 0 1\n1 x 1\n", 2), ("0 0 1 4\n", 1),
                                            ("0 0 0\n", 1), ("nan 0 1\n", 1)])
    def test_malformed(self, text, line):
        with pytest.raises(ConfigError, match=f"f.txt:{line}"):
            loads_instance(text, "f.txt")

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(60)
        disks = [Disk(x, y, r) for x, y, r in zip(rng.normal(0, 1e3, 10_000), rng.normal(0, 1e-3, 10_000),
                                                   rng.uniform(1e-6, 1e4, 10_000))]
        path = tmp_path / "inst.txt"
        save_instance(disks, path)
        assert load_instance(path) == disks
        assert dumps_instance(load_instance(path)) == path.read_text()

    def test_matching_file(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# i j\n0 3\n2 1\n")
        assert load_matching(path) == Matching([(0, 3), (1, 2)])
        path.write_text("0 1\n1 2\n")
        with pytest.raises(ConfigError):
            load_matching(path)
        path.write_text("0 a\n")
        with pytest.raises(ConfigError, match=":1"):
            load_matching(path)


class TestRun:
    def test_exact_pair(self):
        rep, m = run("exact-oracle", [Disk(0, 0, 1), Disk(1, 0, 1)])
        assert rep.size == 1 and rep.passed and rep.valid
        assert m == Matching([(0, 1)])

    def test_sweep_disjoint(self):
        rep, _ = run("greedy-sweep", [Disk(3 * i, 0, 1) for i in range(5)], oracle=True)
        assert rep.size == 0 and rep.passed and rep.k_opt == 0

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError, match="unknown algorithm"):
            run("quantum", [])

    def test_missing_eps(self):
        with pytest.raises(ValueError, match="needs"):
            run("approx-unit", [Disk(0, 0, 1)])

    @pytest.mark.parametrize("alg", sorted(ALGORITHMS))
    def test_every_algorithm(self, alg):
        disks = random_unit(70, 9, rng_for(61))
        eps = 0.5 if ALGORITHMS[alg].needs_eps else None
        rep, _ = run(alg, disks, eps, seed=1, oracle=True)
        assert rep.valid
        assert rep.passed, rep
        row = rep.row()
        assert row["algorithm"] == alg and row["n"] == 70

    @pytest.mark.parametrize("seed", range(200))
    def test_approx_unit_with_oracle(self, seed):
        disks = random_unit(60, 8, rng_for(62, seed))
        rep, _ = run("approx-unit", disks, 0.2, seed, oracle=True)
        assert rep.passed

    def test_reports_invalid_matching(self, monkeypatch):
        bad = harness._Algo(lambda disks: Matching([(0, 1)]))
        monkeypatch.setitem(ALGORITHMS, "broken", bad)
        rep, _ = run("broken", [Disk(0, 0, 1), Disk(5, 0, 1)])
        assert not rep.valid and not rep.passed
        assert "disjoint" in rep.note

    def test_reports_non_maximal_greedy(self, monkeypatch):
        lazy = harness._Algo(lambda disks: Matching())
        monkeypatch.setitem(ALGORITHMS, "greedy-sweep", lazy)
        rep, _ = run("greedy-sweep", [Disk(0, 0, 1), Disk(1, 0, 1)])
        assert not rep.passed and rep.note == "matching is not maximal"

    def test_graph_and_density_checks(self):
        disks = random_unit(50, 6, rng_for(63))
        rep, g = run("build-graph", disks, oracle=True)
        assert rep.passed and rep.size == len(pairs_bruteforce(disks)) == g.m
        rep, lam = run("density", disks, oracle=True)
        assert rep.passed and rep.size == lam


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


SMALL = {"runs": [
    {"algorithm": "greedy-unit", "instance": {"kind": "uniform-unit", "area_per_disk": 3.0},
     "n": [300, 900], "repetitions": 2, "seed": 5},
    {"algorithm": "approx-unit", "instance": {"kind": "uniform-unit", "box_side": 12},
     "n": [100], "eps": 0.5, "oracle": True},
]}


class TestBenchmark:
    def test_empty_config(self, tmp_path):
        cfg = write(tmp_path, "c.json", "")
        out = harness.benchmark(cfg, tmp_path / "o.csv", tmp_path / "o.json")
        assert out == {"runs": [], "slopes": {}}
        assert (tmp_path / "o.csv").read_text().strip() == ",".join(harness.CSV_FIELDS)

    def test_rows_and_summary(self, tmp_path):
        cfg = write(tmp_path, "c.json", SMALL)
        out = harness.benchmark(cfg, tmp_path / "o.csv", tmp_path / "o.json")
        rows = list(csv.DictReader(open(tmp_path / "o.csv")))
        assert len(rows) == 5
        assert [r["algorithm"] for r in rows] == ["approx-unit"] + ["greedy-unit"] * 4
        assert rows[0]["reference"] != ""
        assert set(out["slopes"]) == {"greedy-unit"}
        summary = json.loads((tmp_path / "o.json").read_text())
        assert summary["runs"][0]["algorithm"] == "approx-unit"

    def test_deterministic_modulo_time(self, tmp_path):
        cfg = write(tmp_path, "c.json", SMALL)
        a = harness.benchmark(cfg)["runs"]
        b = harness.benchmark(cfg, threads=2)["runs"]
        strip = lambda rows: [{k: v for k, v in r.items() if k != "time"} for r in rows]
        assert strip(a) == strip(b)

    @pytest.mark.parametrize("text, where", [
        ('{"runs": [{"algorithm": "x"', "c.json:1:"),
        ('{"runs": {}}', "runs must be a list"),
        ('{"runs": [{"algorithm": "greedy-unit", "n": [1]}]}', "runs[0]: missing key 'instance'"),
        ('{"runs": [{"algorithm": "zzz", "instance": {}, "n": [1]}]}', "runs[0].algorithm"),
        ('{"runs": [{"algorithm": "approx-unit", "instance": {"kind": "uniform-unit"}, "n": [1]}]}',
         "runs[0].eps"),
        ('{"runs": [{"algorithm": "greedy-unit", "instance": {"kind": "uniform-unit"}, "n": [-1]}]}',
         "runs[0].n"),
        ('{"runs": [{"algorithm": "greedy-unit", "instance": {"kind": "blob"}, "n": [1]}]}',
         "runs[0].instance.kind"),
        ('{"runs": [{"algorithm": "greedy-unit", "instance": {"kind": "uniform-unit", "colour": 1}, "n": [1]}]}',
         "runs[0].instance"),
        ('[1, 2]', "top level"),
    ])
    def test_parse_errors(self, text, where):
        with pytest.raises(ConfigError) as info:
            parse_config(text, "c.json")
        assert where in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            harness.benchmark(tmp_path / "absent.json")

    def test_slopes(self):
        rows = [{"algorithm": "a", "n": n, "time": 1e-6 * n ** 1.5} for n in (10, 100, 1000)]
        rows += [{"algorithm": "b", "n": 10, "time": 1.0}]
        slopes = scaling_slopes(rows)
        assert slopes["a"] == pytest.approx(1.5)
        assert "b" not in slopes

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv("DISKMATCH_THREADS", "3")
        assert harness.thread_count() == 3
        monkeypatch.setenv("DISKMATCH_THREADS", "many")
        with pytest.raises(ConfigError):
            harness.thread_count()
