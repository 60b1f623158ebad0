"""Command line: ``diskmatch {gen,run,bench,verify}``.

Exit status is 0 on success, 1 when a validation or bound check fails and 2
for usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from . import harness
from .graph import Matching, build_intersection_graph, check_matching
from .matching import maximum_matching_size

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diskmatch", description="Matchings in disk intersection graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--kind", required=True, choices=harness.KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--box-side", type=float, default=10.0)
    g.add_argument("--r-min", type=float, default=1.0)
    g.add_argument("--r-max", type=float, default=None)
    g.add_argument("--density", type=int, default=None, help="target density (uniform kinds)")
    g.add_argument("--groups", type=int, default=1, help="clusters, towers or planted pairs")
    g.add_argument("--gap", type=float, default=10.0, help="clearance around planted pairs")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="-", help="output file ('-' for stdout)")

    r = sub.add_parser("run", help="run one algorithm on an instance file")
    r.add_argument("algorithm", choices=sorted(harness.ALGORITHMS))
    r.add_argument("instance")
    r.add_argument("--eps", type=float, default=None)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--oracle", action="store_true", help="compare with the exact optimum")
    r.add_argument("--out", default="-", help="report file ('-' for stdout)")
    r.add_argument("--format", choices=("csv", "json"), default="json")
    r.add_argument("--matching-out", default=None, help="also write the matching, one 'i j' per line")

    b = sub.add_parser("bench", help="run a benchmark config")
    b.add_argument("config")
    b.add_argument("--out", default="bench.csv", help="CSV output path")
    b.add_argument("--summary", default=None, help="JSON summary path (default: <out>.json)")
    b.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="what to echo on stdout")

    v = sub.add_parser("verify", help="check a matching file against an instance")
    v.add_argument("instance")
    v.add_argument("matching")
    v.add_argument("--oracle", action="store_true", help="also require the matching to be maximum")
    v.add_argument("--format", choices=("csv", "json"), default="json")
    return p


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _format_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows if len(rows) != 1 else rows[0], indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else [])
    wr.writeheader()
    wr.writerows(rows)
    return buf.getvalue()


def _cmd_gen(a) -> int:
    r_max = a.r_min if a.r_max is None else a.r_max
    spec = harness.InstanceSpec(kind=a.kind, n=a.n, box_side=a.box_side, radius_range=(a.r_min, r_max),
                                density_target=a.density, seed=a.seed, groups=a.groups, gap=a.gap)
    _emit(harness.dumps_instance(harness.generate_instance(spec)), a.out)
    return EXIT_OK


def _cmd_run(a) -> int:
    disks = harness.load_instance(a.instance)
    report, result = harness.run(a.algorithm, disks, a.eps, a.seed, oracle=a.oracle, instance=a.instance)
    _emit(_format_rows([report.row()], a.format), a.out)
    if a.matching_out and isinstance(result, Matching):
        with open(a.matching_out, "w") as fh:
            fh.write(harness.dumps_matching(result))
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_bench(a) -> int:
    summary_path = a.summary or f"{a.out}.json"
    summary = harness.benchmark(a.config, a.out, summary_path)
    if a.format == "json":
        sys.stdout.write(json.dumps(summary["slopes"], indent=2, sort_keys=True) + "\n")
    else:
        for alg, slope in summary["slopes"].items():
            sys.stdout.write(f"{alg},{slope:.4f}\n")
    return EXIT_OK


def _cmd_verify(a) -> int:
    disks = harness.load_instance(a.instance)
    m = harness.load_matching(a.matching)
    row = {"instance": a.instance, "matching": a.matching, "size": len(m), "valid": True,
           "k_opt": None, "passed": True, "note": ""}
    try:
        check_matching(disks, m)
    except ValueError as exc:
        row.update(valid=False, passed=False, note=str(exc))
    if a.oracle and row["valid"]:
        k = maximum_matching_size(build_intersection_graph(disks))
        row["k_opt"] = k
        row["passed"] = len(m) == k
    sys.stdout.write(_format_rows([row], a.format))
    return EXIT_OK if row["passed"] else EXIT_FAIL


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    handlers = {"gen": _cmd_gen, "run": _cmd_run, "bench": _cmd_bench, "verify": _cmd_verify}
    try:
        return handlers[a.command](a)
    except harness.ConfigError as exc:
        print(f"diskmatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"diskmatch: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
