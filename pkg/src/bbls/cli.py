"""Command-line interface: ``bbls {list,eval,run,verify,bench}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .functions import build_problem, optimal_value
from .harness import OPTIMIZERS, run_experiment
from .suite import DIMENSIONS, SuiteConfig, load_config, parse_int_list, suite_iter
from .verify import median_eval_time, run_checks


class UsageError(Exception):
    pass


def _config_from_args(args) -> tuple[SuiteConfig, float | None]:
    budget = None
    if getattr(args, "config", None):
        config, budget = load_config(args.config)
    else:
        config = SuiteConfig()
    changes = {}
    if args.dimensions:
        changes["dimensions"] = parse_int_list(args.dimensions)
    if args.functions:
        changes["function_ids"] = parse_int_list(args.functions)
    if args.instances:
        changes["instances"] = parse_int_list(args.instances)
    if changes:
        merged = dict(
            dimensions=config.dimensions,
            function_ids=config.function_ids,
            instances=config.instances,
        )
        merged.update(changes)
        config = SuiteConfig(**merged)
    return config, budget


def cmd_list(args) -> int:
    config, _ = _config_from_args(args)
    for index, d in enumerate(suite_iter(config)):
        f_opt = optimal_value(d.function_id, d.dimension, d.instance)
        if args.jsonl:
            record = dict(index=index, fid=d.function_id, name=d.name, group=d.group, n=d.dimension, instance=d.instance, f_opt=f_opt)
            print(json.dumps(record))
        else:
            print(f"{index}\t{d.function_id}\t{d.name}\t{d.group}\t{d.dimension}\t{d.instance}\t{f_opt:.17g}")
    return 0


def _single(text: str | None, what: str, default: int | None = None) -> int:
    if text is None:
        if default is None:
            raise UsageError(f"--{what} is required")
        return default
    values = parse_int_list(text)
    if len(values) != 1:
        raise UsageError(f"--{what} takes exactly one value for eval")
    return values[0]


def cmd_eval(args) -> int:
    fid = _single(args.functions, "functions")
    n = _single(args.dimensions, "dimensions")
    instance = _single(args.instances, "instances", default=1)
    SuiteConfig(dimensions=(n,), function_ids=(fid,), instances=(instance,))
    problem = build_problem(fid, n, instance)
    if args.print_xopt:
        print(" ".join(f"{v:.17g}" for v in problem.x_opt))
        return 0
    if args.point_file:
        values = Path(args.point_file).read_text().split()
    else:
        values = args.point
    try:
        x = np.array([float(v) for v in values])
    except ValueError as exc:
        raise UsageError(f"bad point coordinate: {exc}") from None
    if x.shape != (n,):
        raise UsageError(f"point has {x.size} coordinates, problem dimension is {n}")
    print(f"{problem(x):.17g}")
    return 0


def cmd_run(args) -> int:
    if args.optimizer not in OPTIMIZERS:
        raise UsageError(f"unknown optimizer {args.optimizer!r}; choose from {', '.join(sorted(OPTIMIZERS))}")
    config, file_budget = _config_from_args(args)
    budget = args.budget_multiplier if args.budget_multiplier is not None else file_budget
    if budget is None:
        raise UsageError("--budget-multiplier is required (or budget_multiplier in --config)")
    records = run_experiment(config, args.optimizer, budget, args.output, workers=args.workers, seed=args.seed)
    hits = sum(len(r.first_hit) for r in records)
    total = sum(len(r.precisions) for r in records)
    solved = sum(r.solved for r in records)
    print(f"problems run: {len(records)}")
    print(f"targets hit: {hits}/{total}")
    print(f"problems solved to final target: {solved}/{len(records)}")
    return 0


def cmd_verify(args) -> int:
    failed = 0
    for result in run_checks(args.level):
        status = "PASS" if result.passed else "FAIL"
        failed += not result.passed
        print(f"{status}  {result.name}: {result.detail}")
    return 1 if failed else 0


def cmd_bench(args) -> int:
    dims = parse_int_list(args.dimensions) if args.dimensions else (40, 640)
    fid = _single(args.functions, "functions", default=10)
    times = [median_eval_time(fid, n, args.evaluations) for n in dims]
    print(f"# f{fid} median seconds per evaluation over {args.evaluations} evaluations")
    print("n\tseconds\tratio\tlinear\tquadratic")
    base_n, base_t = dims[0], times[0]
    for n, t in zip(dims, times):
        print(f"{n}\t{t:.3e}\t{t / base_t:.2f}\t{n / base_n:.2f}\t{(n / base_n) ** 2:.2f}")
    return 0


def _add_suite_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dimensions", help=f"comma-separated dimensions from {DIMENSIONS}")
    p.add_argument("--functions", help="comma-separated function ids (1-24, ranges like 1-5 allowed)")
    p.add_argument("--instances", help="comma-separated instance numbers (default 1-15)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbls", description="Large-scale black-box optimization benchmark suite.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="print the problem catalogue")
    _add_suite_flags(p)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--jsonl", action="store_true", help="one JSON record per line")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("eval", help="evaluate one point")
    _add_suite_flags(p)
    p.add_argument("--point-file", help="file with whitespace-separated coordinates")
    p.add_argument("--print-xopt", action="store_true", help="print the optimum location instead")
    p.add_argument("point", nargs="*", help="coordinates")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="benchmark a baseline optimizer")
    _add_suite_flags(p)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--optimizer", required=True, help=f"one of {', '.join(OPTIMIZERS)}")
    p.add_argument("--budget-multiplier", type=float, help="evaluations per dimension")
    p.add_argument("--output", required=True, help="result file path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the structural self-checks")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time f10 evaluations across dimensions")
    p.add_argument("--dimensions", help="comma-separated dimensions, first one is the baseline (default 40,640)")
    p.add_argument("--functions", help="function id to time (default 10)")
    p.add_argument("--evaluations", type=int, default=10_000)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"bbls {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
