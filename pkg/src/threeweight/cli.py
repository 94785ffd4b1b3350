"""Command-line entry point: ``threeweight solve`` and ``threeweight bench``.

Exit status: 0 when every run converged and verified, 1 when a run hit the
iteration cap, 2 on unreadable input or bad flags, 3 on a certainty
contradiction, 4 when a converged run failed verification.  With several
runs the worst status wins.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .bench import KINDS, MODES, Params, Status
from .packing import PackingError
from .sudoku import SudokuError

USAGE_ERROR = 2


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("kind", choices=KINDS)
    common.add_argument("path", help="instance file (bench also takes a directory or a .list file)")
    common.add_argument("--rho0", type=_positive_float, default=None, help="standard weight (default 1)")
    common.add_argument("--alpha", type=_positive_float, default=None,
                        help="step size (default: rho0 for sudoku, 0.01 for packing)")
    common.add_argument("--alpha-equals-rho", action="store_true", help="force alpha = rho0")
    common.add_argument("--tol", type=_positive_float, default=None,
                        help="residual tolerance (default 1e-8 for sudoku, 1e-11 for packing)")
    common.add_argument("--max-iters", type=_positive_int, default=1_000_000)
    common.add_argument("--seed", type=int, default=0, help="seed (first seed for bench)")
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="threeweight", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[common], help="solve one instance")
    solve.add_argument("--mode", choices=MODES, default="three-weight")
    solve.add_argument("--out", default=None,
                       help="solution file (default: <instance>.solution in the current directory)")

    sweep = sub.add_parser("bench", parents=[common], help="seed x mode sweep with CSV report")
    sweep.add_argument("--mode", choices=MODES, action="append", default=None,
                       help="repeatable; default single and three-weight")
    sweep.add_argument("--seeds", type=_positive_int, default=5, help="number of seeds per instance")
    sweep.add_argument("--out", default=".", help="directory for bench.csv and summary.txt")
    return parser


def _params(args) -> Params:
    params = Params.for_kind(args.kind, rho0=args.rho0, alpha=args.alpha, tol=args.tol,
                             max_iters=args.max_iters, threads=args.threads)
    if args.alpha_equals_rho:
        params.alpha = params.rho0
    return params


def cmd_solve(args) -> int:
    instance = bench.load(args.kind, args.path)
    outcome = bench.run_one(args.kind, instance, args.mode, args.seed, _params(args))
    rec = outcome.record
    if outcome.report is not None:
        out = Path(args.out or f"{Path(args.path).stem}.solution")
        out.write_text(bench.format_solution(args.kind, instance, outcome.report.solution))
    print(f"{rec.instance} mode={rec.mode} seed={rec.seed} iterations={rec.iterations} "
          f"converged={rec.converged} residual={rec.residual:.3e} status={outcome.status.name.lower()}")
    if outcome.message:
        print(outcome.message, file=sys.stderr)
    return int(outcome.status)


def cmd_bench(args) -> int:
    paths = bench.instance_paths(args.kind, args.path)
    instances = [bench.load(args.kind, p) for p in paths]
    modes = args.mode or ["single", "three-weight"]
    seeds = range(args.seed, args.seed + args.seeds)
    outcomes = bench.sweep(args.kind, instances, modes, seeds, _params(args), workers=args.threads)
    records = [o.record for o in outcomes]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bench.csv", "w", newline="") as fh:
        bench.write_csv(records, fh)

    classes = {inst.name: bench.instance_class(args.kind, inst) for inst in instances}
    lines = [f"{'instance':<20} {'mode':<13} {'conv':>5} {'median iters':>13}"]
    lines += [f"{i:<20} {m:<13} {c:>5} {it:>13.1f}" for i, m, c, it in bench.iteration_table(records)]
    summary = bench.aggregate(records, classes)
    if summary:
        lines += ["", bench.format_summary(summary)]
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    print(text, end="")
    return max((int(o.status) for o in outcomes), default=int(Status.SOLVED))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = cmd_solve if args.command == "solve" else cmd_bench
    try:
        return handler(args)
    except (OSError, SudokuError, PackingError, ValueError) as exc:
        print(f"threeweight: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
