"""Command-line front end.

Every output document embeds the tool version and the full run config and
no timestamps, so identical invocations write identical bytes.  Exit codes:
0 success, 1 check or certificate failure, 2 budget exhausted, 3 invalid input.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import CertificateError, DomainError, LarglabError, StructuralError, UnsupportedError
from .io import dumps, family_from_json, family_hash, family_to_json, read_json, stamp, write_json
from .larg import LargGraph, build_larg, correct_join_prob, parallel_join_hits
from .matcher import back_and_forth
from .reports import calibration_table, join_table, rows_to_csv, separation_table
from .sampling import FamilySpec, sample_family
from .structure import check_transverse, crossing_partition, ic_profile

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _config(args) -> dict:
    # destinations and worker counts do not affect results
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "jobs", "out", "report")}


def _emit(args, doc: dict, rows: list | None = None) -> None:
    """Write ``doc`` (or ``rows`` as CSV) to ``--out``, else to stdout."""
    if args.format == "csv" and rows is not None:
        text = rows_to_csv(rows)
    else:
        text = dumps(doc)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_family(path):
    return family_from_json(read_json(path))


# -- subcommands ----------------------------------------------------------------------


def cmd_sample(args) -> int:
    spec = FamilySpec(args.kind, args.n, args.seed, args.depth if args.kind == "bm" else None, args.poisson_mean)
    fam = sample_family(spec)
    _emit(args, family_to_json(fam, _config(args)))
    print(f"sampled {args.n} {args.kind} functions (seed {args.seed})", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    fam = _load_family(args.family)
    rep = check_transverse(fam, mode=args.mode)
    doc = {"meta": stamp(_config(args)), "family": family_hash(fam), "report": rep.as_dict()}
    if args.report:
        write_json(args.report, doc)
    if args.out:
        write_json(args.out, doc)
    if not args.report and not args.out:
        sys.stdout.write(dumps(doc))
    for v in rep.violations[:5]:
        print(f"violation: {v.kind} ids={list(v.ids)} x={v.x}", file=sys.stderr)
    print(
        f"{'transverse' if rep.ok else 'NOT transverse'}: {len(rep.violations)} violations, "
        f"{len(rep.advisories)} advisories",
        file=sys.stderr,
    )
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_partition(args) -> int:
    fam = _load_family(args.family)
    fs = list(fam.functions)
    if args.ids:
        fs = [fam.functions[i] for i in args.ids]
    meta = stamp(_config(args))
    try:
        part = crossing_partition(fs)
    except StructuralError as exc:
        _emit(args, {"meta": meta, "error": str(exc), "witness": exc.witness})
        print(f"partition failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(args, {"meta": meta, "partition": part.as_dict()})
    print(f"{len(part.cells)} cells, {len(part.closed_cells)} closed", file=sys.stderr)
    return EXIT_OK


def cmd_larg(args) -> int:
    fam = _load_family(args.family)
    g = build_larg(fam, args.p, args.seed, strict=not args.lenient, family_ref=family_hash(fam))
    doc = g.as_dict()
    doc["meta"] = stamp(_config(args))
    _emit(args, doc)
    print(f"{len(g.vertices)} vertices, {len(g.edges)} edges", file=sys.stderr)
    return EXIT_OK


def _load_graph(path, fam) -> LargGraph:
    g = LargGraph.from_dict(read_json(path))
    if g.family and g.family != family_hash(fam):
        raise DomainError(f"graph {path} was built on a different family")
    return g


def cmd_match(args) -> int:
    V, W = _load_family(args.left), _load_family(args.right)
    G1, G2 = _load_graph(args.graph_left, V), _load_graph(args.graph_right, W)
    tr = back_and_forth(
        V, W, G1, G2, args.steps, args.mode, args.budget, args.eps0, args.require_window, args.max_depth
    )
    doc = tr.as_dict()
    doc["meta"] = stamp(_config(args))
    _emit(args, doc)
    print(f"{tr.status}: {len(tr.pairs)} pairs after {len(tr.steps)} steps {tr.message}".rstrip(), file=sys.stderr)
    if tr.status == "accepted":
        return EXIT_OK
    return EXIT_BUDGET if tr.status == "exhausted" else EXIT_FAIL


def cmd_ic_profile(args) -> int:
    fam = _load_family(args.family)
    i, j = args.pair
    prof = ic_profile(fam.functions[i], fam.functions[j], args.depths)
    rows = [{"f": i, "g": j, "depth": d, "count": c} for d, c in prof.counts]
    _emit(args, {"meta": stamp(_config(args)), "rows": rows}, rows)
    return EXIT_OK


def cmd_join_prob(args) -> int:
    value = correct_join_prob(args.k, args.l, args.p)
    row = {"k": args.k, "l": args.l, "p": args.p, "expected": value}
    if args.trials:
        near = [True] * (args.k + args.l)
        wanted = [True] * args.k + [False] * args.l
        import numpy as np

        hits = parallel_join_hits(np.array(near, bool), np.array(wanted, bool), args.p, args.seed, args.trials, args.jobs)
        row.update(trials=args.trials, frequency=hits / args.trials)
    print(repr(value))
    if args.out:
        _emit(args, {"meta": stamp(_config(args)), "rows": [row]}, [row])
    return EXIT_OK


def cmd_report(args) -> int:
    if args.table == "join":
        rows = join_table(args.p, args.seed, args.trials, jobs=args.jobs)
    elif args.table == "calibration":
        rows = calibration_table(args.seed, args.paths, args.depth)
    else:
        rows = separation_table(args.seed, args.pairs, tuple(args.depths))
    _emit(args, {"meta": stamp(_config(args)), "table": args.table, "rows": rows}, rows)
    print(f"{args.table}: {len(rows)} rows", file=sys.stderr)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for Monte Carlo work")

    ap = _Parser(prog="larglab", description="Local area random graphs on function spaces.")
    ap.add_argument("--version", action="version", version=f"larglab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[common], help="sample a function family")
    p.add_argument("--kind", choices=("pl", "poly", "bm"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, default=12, help="dyadic depth for Brownian paths")
    p.add_argument("--poisson-mean", type=float, default=1.0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("check", parents=[common], help="transversality check")
    p.add_argument("--family", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--mode", choices=("exact", "tolerant"), default="exact")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("partition", parents=[common], help="crossing partition of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--ids", type=int, nargs="*", default=None, help="restrict to these members")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("larg", parents=[common], help="build a local area random graph")
    p.add_argument("--family", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--lenient", action="store_true", help="flag ambiguous distances instead of failing")
    p.set_defaults(func=cmd_larg)

    p = sub.add_parser("match", parents=[common], help="back-and-forth matching of two graphs")
    p.add_argument("--left", required=True)
    p.add_argument("--graph-left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--graph-right", required=True)
    p.add_argument("--mode", choices=("sd", "icd"), default="sd")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--eps0", type=float, default=0.25)
    p.add_argument("--require-window", action="store_true")
    p.add_argument("--max-depth", type=int, default=None, help="overrides LARGLAB_MAX_DEPTH")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("ic-profile", parents=[common], help="crossing counts across resolutions")
    p.add_argument("--family", required=True)
    p.add_argument("--pair", type=int, nargs=2, default=(0, 1))
    p.add_argument("--depths", type=int, nargs="+", default=[6, 8, 10, 12])
    p.set_defaults(func=cmd_ic_profile)

    p = sub.add_parser("join-prob", parents=[common], help="probability of a correct join")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=0, help="also estimate by Monte Carlo")
    p.set_defaults(func=cmd_join_prob)

    p = sub.add_parser("report", parents=[common], help="Monte Carlo tables")
    p.add_argument("table", choices=("join", "calibration", "separation"))
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--depths", type=int, nargs="+", default=[6, 8, 10, 12, 14])
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CertificateError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        if exc.state is not None:
            print(dumps(exc.state), file=sys.stderr, end="")
        return EXIT_FAIL
    except StructuralError as exc:
        print(f"structural failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (DomainError, UnsupportedError, IndexError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LarglabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
