"""Command-line entry point: ``icdgp <command> ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..problems import PROBLEMS, generate_dataset, get_problem, write_dataset
from ..vm import ConfigurationError
from ..vm.instructions import catalog_markdown
from .config import load_config, parse_seeds
from .matrix import HarnessIOError, run_matrix, workers_from_env
from .stats import SuccessTable, cumulative_success_curve, curves_csv, read_aggregate


def _generate_data(args) -> int:
    problem = get_problem(args.problem)
    ds = generate_dataset(problem, args.seed, args.train_size, args.test_size)
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_dataset(ds, out)
    except OSError as exc:
        raise HarnessIOError(f"cannot write {out}: {exc.strerror or exc}") from exc
    print(f"wrote {len(ds.train)} train and {len(ds.test)} test cases to {out}")
    return 0


def _progress(summary: dict) -> None:
    if summary["status"] == "ok":
        print(f"{summary['arm']} seed {summary['seed']}: {summary['outcome']} "
              f"gen={summary['generations']} executions={summary['executions']}", flush=True)
    else:
        print(f"{summary['arm']} seed {summary['seed']}: FAILED {summary['error']}", flush=True)


def _run(args) -> int:
    configs = [load_config(p) for p in args.configs]
    if args.seeds is not None:
        seeds = parse_seeds(args.seeds)
        configs = [c.with_seeds(seeds) for c in configs]
    workers = args.workers or workers_from_env()
    report = run_matrix(configs, args.out, workers=workers, progress=None if args.quiet else _progress)
    print(f"{len(report.completed)} run(s) completed, {len(report.skipped)} already done, "
          f"{len(report.failed)} failed; aggregate: {report.aggregate}")
    return 0 if report.ok else 1


def _stats(args) -> int:
    rows = read_aggregate(args.aggregate)
    table = SuccessTable.from_rows(rows)
    print(table.format())
    if args.compare:
        a, b = args.compare
        res = table.compare(a, b)
        verdict = "significant" if res.significant else "not significant"
        print(f"\n{a} vs {b}: chi2={res.statistic:.6g} p={res.p_value:.6g} ({verdict} at 0.05)")
    return 0


def _curves(args) -> int:
    text = curves_csv(cumulative_success_curve(read_aggregate(args.aggregate)))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _catalog(args) -> int:
    sys.stdout.write(catalog_markdown())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icdgp", description="Counterexample-driven PushGP experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-data", help="write a problem's train/test dataset as JSONL")
    g.add_argument("problem", help=f"one of {', '.join(sorted(PROBLEMS))}")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--train-size", type=int)
    g.add_argument("--test-size", type=int)
    g.set_defaults(func=_generate_data)

    r = sub.add_parser("run", help="run experiment arms over a range of seeds")
    r.add_argument("configs", nargs="+", help="INI config files, one per arm")
    r.add_argument("--seeds", help="e.g. 0..9 or 1,3,5 (overrides the config)")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--workers", type=int, help="parallel runs (default: $ICDGP_WORKERS or 1)")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=_run)

    s = sub.add_parser("stats", help="success table and chi-square comparison")
    s.add_argument("aggregate")
    s.add_argument("--compare", nargs=2, metavar=("ARM_A", "ARM_B"))
    s.set_defaults(func=_stats)

    c = sub.add_parser("curves", help="cumulative success series as CSV")
    c.add_argument("aggregate")
    c.add_argument("--out")
    c.set_defaults(func=_curves)

    k = sub.add_parser("catalog", help="print the instruction catalog")
    k.set_defaults(func=_catalog)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, OSError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"icdgp: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
