"""Command line: ``usosink {gen,solve,duel,verify,count,bench}``.

Exit status is 0 on success, 1 when a verification or audit fails and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import harness
from .harness import ADVERSARIES, CLASSES, SOLVERS, ExperimentConfig, UsageError
from .influence import NotRealizableError
from .solvers import InconsistentInstanceError, NotDecomposableError
from .uso import dump_instance, instance_from_dict

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usosink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt: str = "json") -> None:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default=fmt)

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--class", dest="instance_class", choices=CLASSES, default="general")
    common(p)

    p = sub.add_parser("solve", help="find the sink of an instance file")
    p.add_argument("instance")
    p.add_argument("--solver", choices=SOLVERS, default="jump-antipodal")
    p.add_argument("--transcript", action="store_true", help="include the query transcript")
    common(p)

    p = sub.add_parser("duel", help="run a solver against an adaptive adversary")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--solver", choices=SOLVERS, default="naive-recover")
    p.add_argument("--adversary", choices=ADVERSARIES, default="general-adversary")
    p.add_argument("--trials", type=int, default=1)
    common(p)

    p = sub.add_parser("verify", help="brute-force checks on an instance file or all small instances")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("instance", nargs="?")
    group.add_argument("--exhaustive", type=int, metavar="N")
    common(p)

    p = sub.add_parser("count", help="enumerate branchings and legal DIGs")
    p.add_argument("--n", type=int, required=True)
    common(p)

    p = sub.add_parser("bench", help="query counts over a range of n")
    size = p.add_mutually_exclusive_group(required=True)
    size.add_argument("--n", type=int)
    size.add_argument("--n-range", help="A..B, a comma list, or empty")
    p.add_argument("--class", dest="instance_class", choices=CLASSES, default="general")
    p.add_argument("--solver", choices=SOLVERS, default="jump-antipodal")
    p.add_argument("--adversary", choices=ADVERSARIES)
    p.add_argument("--trials", type=int, default=10)
    common(p, fmt="csv")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    n_values: list[int] = []
    if getattr(args, "n_range", None) is not None:
        try:
            n_values = harness.parse_n_range(args.n_range)
        except ValueError:
            raise UsageError(f"bad --n-range {args.n_range!r}") from None
    elif getattr(args, "n", None) is not None:
        n_values = [args.n]
    if any(n < 1 for n in n_values):
        raise UsageError("n must be positive")
    trials = getattr(args, "trials", 1)
    if trials < 1:
        raise UsageError("--trials must be positive")
    return ExperimentConfig(
        command=args.command,
        n=getattr(args, "n", None),
        n_values=n_values,
        instance_class=getattr(args, "instance_class", "general"),
        solver=getattr(args, "solver", "jump-antipodal"),
        adversary=getattr(args, "adversary", None),
        trials=trials,
        seed=args.seed,
        out=args.out,
        fmt=args.fmt,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def _load(path: str) -> dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None


def cmd_gen(cfg: ExperimentConfig) -> int:
    u = harness.generate_instance(cfg.instance_class, cfg.n, cfg.seed)
    _emit(dump_instance(u), cfg.out)
    return EXIT_OK


def cmd_solve(cfg: ExperimentConfig, path: str, with_transcript: bool) -> int:
    try:
        u = instance_from_dict(_load(path))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        outcome = harness.solve_instance(u, cfg.solver, cfg.seed)
    except (NotRealizableError, NotDecomposableError, InconsistentInstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(_json(outcome.to_dict(with_transcript)), cfg.out)
    return EXIT_OK if outcome.verified else EXIT_FAIL


def cmd_duel(cfg: ExperimentConfig) -> int:
    results = [harness.run_duel(cfg.solver, cfg.adversary, cfg.n, cfg.seed + t) for t in range(cfg.trials)]
    data = results[0].to_dict() if len(results) == 1 else [r.to_dict() for r in results]
    _emit(_json(data), cfg.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_verify(cfg: ExperimentConfig, path: str | None, exhaustive: int | None) -> int:
    if exhaustive is not None:
        report = harness.verify_exhaustive(exhaustive)
    else:
        try:
            report = harness.verify_instance_data(_load(path))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    _emit(_json(report.to_dict()), cfg.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_count(cfg: ExperimentConfig) -> int:
    report = harness.count_report(cfg.n)
    _emit(_json(report), cfg.out)
    return EXIT_OK if report["formula_matches"] else EXIT_FAIL


def cmd_bench(cfg: ExperimentConfig) -> int:
    try:
        rows = harness.run_bench(cfg)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if cfg.fmt == "csv":
        _emit(harness.bench_to_csv(rows), cfg.out)
    else:
        _emit(_json([vars(r) for r in rows]), cfg.out)
    return EXIT_OK if all(r.bound_respected for r in rows) else EXIT_FAIL


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "gen":
            return cmd_gen(cfg)
        if args.command == "solve":
            return cmd_solve(cfg, args.instance, args.transcript)
        if args.command == "duel":
            return cmd_duel(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.instance, args.exhaustive)
        if args.command == "count":
            return cmd_count(cfg)
        return cmd_bench(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
