"""Instance generation, file I/O, algorithm dispatch and benchmarking."""

from __future__ import annotations

import csv
import gc
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .estimators import estimate_disk_matching_size, estimate_unit_matching_size
from .general import (TooBig, bipartite_geom_matching, random_coloring_matching,
                      small_matching_exact)
from .geometry import Disk, union_diameter_bounds
from .graph import (IntersectionGraph, Matching, brute_force_pairs,
                    build_intersection_graph, check_matching, density,
                    density_exact, greedy_matching_sweep, leftovers_independent)
from .matching import exact_maximum_matching, maximum_matching_size
from .unit import approx_unit_matching, approx_unit_matching_bounded_diam, greedy_unit

KINDS = ("uniform-unit", "uniform-mixed-radius", "clustered", "stacked-towers", "planted-matching")


class ConfigError(ValueError):
    """Bad benchmark configuration or instance file; message names the location."""


# --- instances ----------------------------------------------------------------

@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for a random instance.

    ``groups`` is the number of clusters, tower points or planted pairs
    (depending on ``kind``) and ``gap`` the empty margin kept around each
    planted pair.
    """

    kind: str
    n: int
    box_side: float = 10.0
    radius_range: tuple[float, float] = (1.0, 1.0)
    density_target: int | None = None
    seed: int = 0
    groups: int = 1
    gap: float = 10.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if not self.box_side > 0:
            raise ValueError(f"box_side must be positive, got {self.box_side}")
        lo, hi = self.radius_range
        if not 0 < lo <= hi:
            raise ValueError(f"radius_range must satisfy 0 < r_min <= r_max, got {self.radius_range}")
        if self.groups < 1:
            raise ValueError(f"groups must be >= 1, got {self.groups}")
        if self.gap < 0:
            raise ValueError(f"gap must be >= 0, got {self.gap}")
        if self.density_target is not None and self.density_target < 1:
            raise ValueError(f"density_target must be >= 1, got {self.density_target}")
        if self.kind == "uniform-unit" and self.radius_range != (1.0, 1.0):
            raise ValueError("uniform-unit instances have radius 1")
        if self.kind == "planted-matching" and self.n < 2 * self.groups:
            raise ValueError(f"planted-matching needs n >= 2 * groups, got n={self.n}, groups={self.groups}")


def _box_for_density(n: int, r: float, target: int) -> float:
    # mean count of equal disks meeting a given one is about 1 + n * pi * (2r)^2 / A
    area = n * math.pi * 4.0 * r * r / max(target - 1.0, 0.5)
    return math.sqrt(max(area, 1e-9))


def generate_instance(spec: InstanceSpec) -> list[Disk]:
    """Disks for ``spec``; deterministic in ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    lo, hi = spec.radius_range
    if n == 0:
        return []
    box = spec.box_side
    if spec.density_target is not None and spec.kind in ("uniform-unit", "uniform-mixed-radius"):
        box = _box_for_density(n, math.sqrt(lo * hi), spec.density_target)
    if spec.kind == "uniform-unit":
        xy = rng.uniform(0.0, box, size=(n, 2))
        return [Disk(x, y, 1.0) for x, y in xy.tolist()]
    if spec.kind == "uniform-mixed-radius":
        xy = rng.uniform(0.0, box, size=(n, 2))
        r = np.exp(rng.uniform(math.log(lo), math.log(hi), size=n)) if hi > lo else np.full(n, lo)
        return [Disk(x, y, rr) for (x, y), rr in zip(xy.tolist(), r.tolist())]
    if spec.kind == "clustered":
        centers = rng.uniform(0.0, box, size=(spec.groups, 2))
        which = rng.integers(0, spec.groups, size=n)
        sd = box / (4.0 * math.sqrt(spec.groups))
        xy = centers[which] + rng.normal(0.0, sd, size=(n, 2))
        r = rng.uniform(lo, hi, size=n)
        return [Disk(x, y, rr) for (x, y), rr in zip(xy.tolist(), r.tolist())]
    if spec.kind == "stacked-towers":
        if spec.groups == 1:
            pts = np.array([[box / 2.0, box / 2.0]])
        else:
            pts = rng.uniform(0.0, box, size=(spec.groups, 2))
        return [Disk(pts[i % spec.groups][0], pts[i % spec.groups][1], lo) for i in range(n)]
    return _planted(spec, rng)


def _planted(spec: InstanceSpec, rng: np.random.Generator) -> list[Disk]:
    """Isolated intersecting pairs, plus tiny pendant disks on their outer arcs.

    Pair ``(A, B)`` has centers ``1.5 r`` apart.  Extra disks are pairwise
    disjoint, each touching only its host, placed on the arc of ``A`` (or
    ``B``) facing away from the partner.  Pairs sit on a grid with ``gap`` of
    clearance, so no two groups interact.
    """
    r = spec.radius_range[0]
    k = spec.groups
    extra = spec.n - 2 * k
    cols = math.ceil(math.sqrt(k))
    pitch = 5.0 * r + spec.gap
    hosts_per = [0] * (2 * k)
    for t in range(extra):
        hosts_per[t % (2 * k)] += 1
    out: list[Disk] = []
    leaves: list[Disk] = []
    for p in range(k):
        ox = (p % cols) * pitch + float(rng.uniform(0.0, 0.1 * r))
        oy = (p // cols) * pitch + float(rng.uniform(0.0, 0.1 * r))
        a = (ox, oy)
        b = (ox + 1.5 * r, oy)
        out.append(Disk(a[0], a[1], r))
        out.append(Disk(b[0], b[1], r))
        for h, (host, mid) in enumerate(((a, math.pi), (b, 0.0))):
            m = hosts_per[2 * p + h]
            if not m:
                continue
            span = 0.8 * math.pi
            step = span / m
            rho = min(0.3 * r, 0.5 * r * math.sin(step / 2.0))
            for t in range(m):
                ang = mid - span / 2.0 + (t + 0.5) * step
                dist = r + 0.5 * rho
                leaves.append(Disk(host[0] + dist * math.cos(ang), host[1] + dist * math.sin(ang), rho))
    return out + leaves


def save_instance(disks: Sequence[Disk], path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_instance(disks))


def dumps_instance(disks: Sequence[Disk]) -> str:
    buf = io.StringIO()
    buf.write("# cx cy r\n")
    for d in disks:
        buf.write(f"{d.cx!r} {d.cy!r} {d.r!r}\n")
    return buf.getvalue()


def loads_instance(text: str, source: str = "<string>") -> list[Disk]:
    disks = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 3:
            raise ConfigError(f"{source}:{lineno}: expected 'cx cy r', got {line.strip()!r}")
        try:
            cx, cy, r = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: not a number in {line.strip()!r}") from None
        try:
            disks.append(Disk(cx, cy, r))
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return disks


def load_instance(path: str | os.PathLike) -> list[Disk]:
    with open(path) as fh:
        return loads_instance(fh.read(), str(path))


def load_matching(path: str | os.PathLike) -> Matching:
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 'i j', got {line.strip()!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: not an integer in {line.strip()!r}") from None
    try:
        return Matching(edges)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def dumps_matching(m: Matching) -> str:
    return "".join(f"{a} {b}\n" for a, b in m)


# --- runs ---------------------------------------------------------------------

@dataclass
class RunReport:
    algorithm: str
    instance: str
    n: int
    size: int | float | None
    k_opt: int | None
    eps: float | None
    wall_time: float
    seed: int | None
    passed: bool
    valid: bool = True
    note: str = ""

    def row(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class _Algo:
    fn: Callable[..., Any]
    needs_eps: bool = False
    seeded: bool = False
    kind: str = "matching"  # matching | estimate | graph | density | exact
    unit_only: bool = False


def _split_halves(disks):
    h = (len(disks) + 1) // 2
    return disks[:h], disks[h:]


def _bipartite(disks, eps):
    d1, d2 = _split_halves(disks)
    return bipartite_geom_matching(d1, d2, eps)


def _diam(disks, eps):
    _, hi = union_diameter_bounds(disks)
    return approx_unit_matching_bounded_diam(disks, eps, max(hi, 1e-9))


def _small(disks):
    return small_matching_exact(disks)


def _exact(disks):
    return exact_maximum_matching(build_intersection_graph(disks))


ALGORITHMS: dict[str, _Algo] = {
    "greedy-unit": _Algo(greedy_unit, unit_only=True),
    "greedy-sweep": _Algo(greedy_matching_sweep),
    "approx-unit": _Algo(approx_unit_matching, needs_eps=True, unit_only=True),
    "approx-unit-diam": _Algo(_diam, needs_eps=True, unit_only=True),
    "bipartite": _Algo(_bipartite, needs_eps=True),
    "color-coding": _Algo(random_coloring_matching, needs_eps=True, seeded=True),
    "small-exact": _Algo(_small, kind="exact"),
    "exact-oracle": _Algo(_exact, kind="exact"),
    "estimate-unit": _Algo(estimate_unit_matching_size, needs_eps=True, seeded=True,
                           kind="estimate", unit_only=True),
    "estimate-separator": _Algo(estimate_disk_matching_size, needs_eps=True, seeded=True,
                                kind="estimate"),
    "build-graph": _Algo(build_intersection_graph, kind="graph"),
    "density": _Algo(density, kind="density"),
}


def _call(algo: _Algo, disks, eps, seed):
    args: list[Any] = [disks]
    if algo.needs_eps:
        args.append(eps)
    if algo.seeded:
        args.append(np.random.default_rng(seed))
    return algo.fn(*args)


def _timed(fn, *args):
    enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        t0 = time.perf_counter()
        out = fn(*args)
        return out, time.perf_counter() - t0
    finally:
        if enabled:
            gc.enable()


def run(algorithm: str, disks: Sequence[Disk], eps: float | None = None, seed: int | None = None,
        oracle: bool = False, instance: str = "") -> tuple[RunReport, Any]:
    """Run one algorithm, audit its output and compare with the oracle if asked.

    Returns the report together with the raw result (matching, estimate,
    graph, ...).  Matchings are always re-validated edge by edge.
    """
    algo = ALGORITHMS.get(algorithm)
    if algo is None:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
    if algo.needs_eps and eps is None:
        raise ValueError(f"algorithm {algorithm!r} needs --eps")
    if eps is not None and not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    disks = list(disks)
    n = len(disks)
    result, elapsed = _timed(_call, algo, disks, eps, seed)
    valid = True
    passed = True
    note = ""
    size: int | float | None
    k_opt: int | None = None
    if algo.kind == "graph":
        size = result.m
        if oracle:
            k_opt = len(brute_force_pairs(disks))
            passed = set(result.edges()) == brute_force_pairs(disks)
    elif algo.kind == "density":
        size = int(result)
        if oracle:
            k_opt = density_exact(disks) if disks else 0
            passed = size == k_opt
    elif algo.kind == "estimate":
        size = float(result)
        if oracle:
            k_opt = maximum_matching_size(build_intersection_graph(disks))
            passed = size <= (1.0 + eps) * k_opt + 1e-9
    else:
        if isinstance(result, TooBig):
            size = None
            note = f"too big: greedy {result.greedy_size} > cap {result.cap}"
        else:
            size = len(result)
            m = result
            if algorithm == "bipartite":
                h = (n + 1) // 2
                valid = all((a < h) != (b < h) for a, b in m)
                note = "sides: first half vs second half"
            try:
                check_matching(disks, m)
            except ValueError as exc:
                valid = False
                note = str(exc)
            if algorithm in ("greedy-unit", "greedy-sweep") and valid:
                valid = leftovers_independent(disks, m)
                if not valid:
                    note = "matching is not maximal"
            if oracle and valid:
                if algorithm == "bipartite":
                    k_opt = _bipartite_opt(disks)
                else:
                    k_opt = maximum_matching_size(build_intersection_graph(disks))
                passed = _bound_holds(algorithm, size, k_opt, eps)
        passed = passed and valid
    return RunReport(algorithm, instance, n, size, k_opt, eps, elapsed, seed, passed, valid, note), result


def _bipartite_opt(disks) -> int:
    h = (len(disks) + 1) // 2
    g = build_intersection_graph(disks)
    cross = IntersectionGraph.from_edges(g.n, [(a, b) for a, b in g.edges() if (a < h) != (b < h)])
    return maximum_matching_size(cross)


def _bound_holds(algorithm: str, size: float, k_opt: float, eps: float | None) -> bool:
    if algorithm in ("greedy-unit", "greedy-sweep"):
        return size >= math.ceil(k_opt / 2)
    if algorithm in ("exact-oracle", "small-exact"):
        return size == k_opt
    return size >= math.ceil((1.0 - eps) * k_opt - 1e-9)


# --- benchmark ----------------------------------------------------------------

CSV_FIELDS = ("algorithm", "n", "eps", "seed", "repetition", "time", "size", "reference")


def _require(obj, key, typ, where):
    if key not in obj:
        raise ConfigError(f"{where}: missing key {key!r}")
    val = obj[key]
    if not isinstance(val, typ) or isinstance(val, bool) and typ is not bool:
        raise ConfigError(f"{where}.{key}: expected {getattr(typ, '__name__', typ)}, got {val!r}")
    return val


def parse_config(text: str, source: str = "<config>") -> list[dict[str, Any]]:
    """Validate a benchmark config and return its run entries.

    Layout::

        {"runs": [{"algorithm": "greedy-unit",
                   "instance": {"kind": "uniform-unit", "area_per_disk": 3.0},
                   "n": [10000, 100000], "eps": 0.5, "repetitions": 3,
                   "seed": 0, "oracle": false}]}
    """
    if not text.strip():
        return []
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}: top level must be an object")
    runs = cfg.get("runs", [])
    if not isinstance(runs, list):
        raise ConfigError(f"{source}: runs must be a list")
    out = []
    for k, entry in enumerate(runs):
        where = f"{source}: runs[{k}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: expected an object")
        alg = _require(entry, "algorithm", str, where)
        if alg not in ALGORITHMS:
            raise ConfigError(f"{where}.algorithm: unknown algorithm {alg!r}")
        inst = _require(entry, "instance", dict, where)
        ns = _require(entry, "n", list, where)
        if not ns or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in ns):
            raise ConfigError(f"{where}.n: expected a non-empty list of non-negative integers")
        eps = entry.get("eps")
        if ALGORITHMS[alg].needs_eps and eps is None:
            raise ConfigError(f"{where}.eps: algorithm {alg!r} needs eps")
        if eps is not None and not (isinstance(eps, (int, float)) and 0 < eps < 1):
            raise ConfigError(f"{where}.eps: must lie in (0, 1), got {eps!r}")
        reps = entry.get("repetitions", 1)
        if not isinstance(reps, int) or reps < 1:
            raise ConfigError(f"{where}.repetitions: must be a positive integer")
        kind = inst.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"{where}.instance.kind: unknown kind {kind!r}")
        try:
            _spec_for(inst, 1, 0)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.instance: {exc}") from None
        out.append({
            "algorithm": alg,
            "instance": dict(inst),
            "n": list(ns),
            "eps": None if eps is None else float(eps),
            "repetitions": reps,
            "seed": int(entry.get("seed", 0)),
            "oracle": bool(entry.get("oracle", False)),
            "warmup": bool(entry.get("warmup", True)),
        })
    return out


def _spec_for(inst: dict[str, Any], n: int, seed: int) -> InstanceSpec:
    opts = dict(inst)
    kind = opts.pop("kind")
    area = opts.pop("area_per_disk", None)
    if "radius_range" in opts:
        opts["radius_range"] = tuple(float(v) for v in opts["radius_range"])
    if area is not None:
        if not area > 0:
            raise ValueError("area_per_disk must be positive")
        opts["box_side"] = math.sqrt(max(n, 1) * float(area))
    allowed = {"box_side", "radius_range", "density_target", "groups", "gap"}
    extra = set(opts) - allowed
    if extra:
        raise ValueError(f"unknown instance options {sorted(extra)}")
    return InstanceSpec(kind=kind, n=n, seed=seed, **opts)


def _bench_job(job: tuple[dict[str, Any], int]) -> list[dict[str, Any]]:
    entry, n = job
    seed = entry["seed"]
    spec = _spec_for(entry["instance"], n, seed)
    disks = generate_instance(spec)
    alg = entry["algorithm"]
    eps = entry["eps"]
    algo = ALGORITHMS[alg]
    if entry["warmup"]:
        _call(algo, disks, eps, seed)
    rows = []
    ref = None
    if entry["oracle"]:
        ref, _ = run(alg, disks, eps, seed, oracle=True)
    for rep in range(entry["repetitions"]):
        result, elapsed = _timed(_call, algo, disks, eps, seed)
        rows.append({
            "algorithm": alg,
            "n": n,
            "eps": "" if eps is None else eps,
            "seed": seed,
            "repetition": rep,
            "time": elapsed,
            "size": _size_of(result),
            "reference": "" if ref is None or ref.k_opt is None else ref.k_opt,
        })
    return rows


def _size_of(result) -> Any:
    if isinstance(result, TooBig):
        return ""
    if isinstance(result, IntersectionGraph):
        return result.m
    if isinstance(result, (int, float)):
        return result
    return len(result)


def scaling_slopes(rows: Sequence[dict[str, Any]]) -> dict[str, float]:
    """Least-squares slope of log(median time) against log(n), per algorithm."""
    times: dict[str, dict[int, list[float]]] = {}
    for r in rows:
        times.setdefault(r["algorithm"], {}).setdefault(int(r["n"]), []).append(float(r["time"]))
    out = {}
    for alg, by_n in sorted(times.items()):
        ns = sorted(v for v in by_n if v > 0)
        if len(ns) < 2:
            continue
        med = [max(statistics.median(by_n[v]), 1e-9) for v in ns]
        slope = np.polyfit(np.log(ns), np.log(med), 1)[0]
        out[alg] = float(slope)
    return out


def thread_count() -> int:
    raw = os.environ.get("DISKMATCH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"DISKMATCH_THREADS must be an integer, got {raw!r}") from None


def benchmark(config_path: str | os.PathLike, out_csv: str | os.PathLike | None = None,
              out_json: str | os.PathLike | None = None, threads: int | None = None,
              ) -> dict[str, Any]:
    """Run every (entry, n) job in the config; write the CSV and JSON summary.

    Rows are sorted by (algorithm, n, seed, repetition) so reruns produce the
    same file apart from the time column.
    """
    path = Path(config_path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    entries = parse_config(text, str(path))
    jobs = [(e, n) for e in entries for n in e["n"]]
    workers = thread_count() if threads is None else max(1, threads)
    rows: list[dict[str, Any]] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_bench_job, jobs):
                rows.extend(part)
    else:
        for job in jobs:
            rows.extend(_bench_job(job))
    rows.sort(key=lambda r: (r["algorithm"], r["n"], r["seed"], r["repetition"]))
    summary = {"runs": rows, "slopes": scaling_slopes(rows)}
    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            wr.writeheader()
            wr.writerows(rows)
    if out_json is not None:
        with open(out_json, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


__all__ = [
    "ALGORITHMS",
    "CSV_FIELDS",
    "ConfigError",
    "InstanceSpec",
    "KINDS",
    "RunReport",
    "benchmark",
    "dumps_instance",
    "dumps_matching",
    "generate_instance",
    "load_instance",
    "load_matching",
    "loads_instance",
    "parse_config",
    "run",
    "save_instance",
    "scaling_slopes",
    "thread_count",
]
