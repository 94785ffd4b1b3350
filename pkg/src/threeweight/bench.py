"""Seed sweeps, paired speedups and the CSV report format."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

from . import packing, sudoku
from .dc import solve_dc
from .engine import Mode, RunReport, Solver, SolverConfig
from .graph import CertaintyContradiction

CSV_VERSION = 1
CSV_HEADER = f"# threeweight-bench v{CSV_VERSION}"
CSV_COLUMNS = ("instance", "mode", "seed", "iterations", "converged", "residual", "wall_time_s")

MODES = ("single", "three-weight", "dc")
KINDS = ("sudoku", "packing")
EXTENSIONS = {"sudoku": ".sudoku", "packing": ".packing"}

# per-kind parameter defaults; packing follows the usual small-step setup
DEFAULTS = {
    "sudoku": {"rho0": 1.0, "alpha": None, "tol": 1e-8},
    "packing": {"rho0": 1.0, "alpha": 0.01, "tol": 1e-11},
}


class Status(IntEnum):
    """Outcome of one run; the value doubles as the CLI exit status."""

    SOLVED = 0
    ITERATION_CAP = 1
    CONTRADICTION = 3
    INVALID = 4


@dataclass
class BenchmarkRecord:
    instance: str
    mode: str
    seed: int
    iterations: int
    converged: bool
    residual: float
    wall_time_s: float
    speedup: float | None = None

    def __eq__(self, other):
        if not isinstance(other, BenchmarkRecord):
            return NotImplemented
        mine, theirs = self._key(), other._key()
        return mine == theirs

    def _key(self):
        # NaN residuals (contradictions) must compare equal to themselves
        res = "nan" if math.isnan(self.residual) else self.residual
        return (self.instance, self.mode, self.seed, self.iterations, self.converged,
                res, self.wall_time_s, self.speedup)


@dataclass
class RunOutcome:
    record: BenchmarkRecord
    status: Status
    report: RunReport | None = None
    message: str = ""


@dataclass
class Params:
    rho0: float = 1.0
    alpha: float | None = None
    tol: float = 1e-8
    max_iters: int = 1_000_000
    threads: int = 1

    @classmethod
    def for_kind(cls, kind: str, **overrides) -> Params:
        values = dict(DEFAULTS[kind])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def config(self, mode: str, seed: int) -> SolverConfig:
        alpha = self.rho0 if self.alpha is None else self.alpha
        engine_mode = Mode.THREE_WEIGHT if mode == "three-weight" else Mode.SINGLE_WEIGHT
        return SolverConfig(rho0=self.rho0, alpha=alpha, tol=self.tol,
                            max_iters=self.max_iters, mode=engine_mode, seed=seed)


# ---------------------------------------------------------------------------
# single runs


def load(kind: str, path) -> sudoku.SudokuInstance | packing.PackingInstance:
    if kind == "sudoku":
        return sudoku.read_puzzle(path)
    if kind == "packing":
        return packing.read_instance(path)
    raise ValueError(f"unknown problem kind {kind!r}")


def _encode(kind, instance, seed):
    if kind == "sudoku":
        prob = sudoku.encode(instance)
    else:
        prob = packing.encode(instance, seed)
    return prob.graph, prob.priors


def _verify(kind, instance, solution) -> bool:
    if kind == "sudoku":
        return sudoku.verify(instance, solution)
    return packing.verify(instance, solution)


def run_one(kind: str, instance, mode: str, seed: int, params: Params) -> RunOutcome:
    """Encode, solve and verify one (instance, mode, seed) triple."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    graph, priors = _encode(kind, instance, seed)
    start = time.perf_counter()
    report = None
    try:
        if mode == "dc":
            report = solve_dc(graph, seed=seed, tol=params.tol, max_iters=params.max_iters,
                              priors=priors, rho0=params.rho0)
        else:
            with Solver(graph, params.config(mode, seed), priors, threads=params.threads) as solver:
                try:
                    report = solver.run()
                except CertaintyContradiction as exc:
                    elapsed = time.perf_counter() - start
                    record = BenchmarkRecord(instance.name, mode, seed, solver.state.iteration,
                                             False, math.nan, elapsed)
                    return RunOutcome(record, Status.CONTRADICTION, None, str(exc))
    except CertaintyContradiction as exc:
        elapsed = time.perf_counter() - start
        record = BenchmarkRecord(instance.name, mode, seed, 0, False, math.nan, elapsed)
        return RunOutcome(record, Status.CONTRADICTION, None, str(exc))
    elapsed = time.perf_counter() - start

    record = BenchmarkRecord(instance.name, mode, seed, report.iterations, report.converged,
                             float(report.final_residual), elapsed)
    if not report.converged:
        status = Status.ITERATION_CAP
    elif _verify(kind, instance, report.solution):
        status = Status.SOLVED
    else:
        status = Status.INVALID
    return RunOutcome(record, status, report)


def format_solution(kind: str, instance, solution) -> str:
    if kind == "sudoku":
        return sudoku.format_grid(sudoku.decode(instance, solution))
    return packing.format_solution(instance, solution)


# ---------------------------------------------------------------------------
# sweeps


def instance_paths(kind: str, target) -> list[Path]:
    """Instance files named by ``target``: a directory, a ``.list`` file, or one instance.

    Paths inside a list file are relative to the list file; blank lines and
    ``#`` comments are skipped.
    """
    target = Path(target)
    if target.is_dir():
        paths = sorted(target.rglob("*" + EXTENSIONS[kind]))
    elif target.suffix == ".list":
        paths = []
        for line in target.read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                paths.append(target.parent / line)
    else:
        paths = [target]
    if not paths:
        raise FileNotFoundError(f"no {kind} instances under {target}")
    return paths


def instance_class(kind: str, instance) -> str:
    """Aggregation class: grid size (plus difficulty when labelled) or circle count."""
    if kind == "sudoku":
        label = f"{instance.n}x{instance.n}"
        difficulty = instance.meta.get("difficulty")
        return f"{label}/{difficulty}" if difficulty else label
    return f"n={instance.n}"


def sweep(kind: str, instances: Sequence, modes: Sequence[str], seeds: Iterable[int],
          params: Params, workers: int = 1) -> list[RunOutcome]:
    """Run every instance x seed x mode combination, one run per worker."""
    jobs = [(inst, mode, seed) for inst in instances for seed in seeds for mode in modes]
    run_params = replace(params, threads=1) if workers > 1 else params

    def run(job):
        inst, mode, seed = job
        return run_one(kind, inst, mode, seed, run_params)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(job) for job in jobs]
    pair_speedups([o.record for o in outcomes])
    return outcomes


def pair_speedups(records: Iterable[BenchmarkRecord]) -> list[BenchmarkRecord]:
    """Attach ``iterations_single / iterations_three`` to each three-weight record in place.

    A speedup exists only when both runs of an (instance, seed) pair
    converged.  Single and DC records never carry one.
    """
    records = list(records)
    single = {(r.instance, r.seed): r for r in records if r.mode == "single"}
    for r in records:
        r.speedup = None
        if r.mode != "three-weight" or not r.converged:
            continue
        base = single.get((r.instance, r.seed))
        if base is not None and base.converged and r.iterations > 0:
            r.speedup = base.iterations / r.iterations
    return records


@dataclass
class Summary:
    trials: int
    median: float
    improved_pct: float
    min: float
    max: float


def aggregate(records: Iterable[BenchmarkRecord], classes: dict[str, str] | None = None,
              threshold: float = 2.0) -> dict[str, Summary]:
    """Per-class speedup statistics over the records that carry a speedup.

    ``classes`` maps instance id to class label; instances missing from it
    (or all of them, when it is omitted) fall under ``"all"``.
    """
    groups: dict[str, list[float]] = defaultdict(list)
    for r in records:
        if r.speedup is None:
            continue
        label = (classes or {}).get(r.instance, "all")
        groups[label].append(r.speedup)
    out = {}
    for label in sorted(groups):
        values = groups[label]
        improved = sum(v > threshold for v in values)
        out[label] = Summary(len(values), statistics.median(values),
                             100.0 * improved / len(values), min(values), max(values))
    return out


def iteration_table(records: Iterable[BenchmarkRecord]) -> list[tuple[str, str, int, float]]:
    """``(instance, mode, converged runs, median iterations)`` rows, for growth-with-n studies."""
    groups: dict[tuple[str, str], list[int]] = {}
    for r in records:
        its = groups.setdefault((r.instance, r.mode), [])
        if r.converged:
            its.append(r.iterations)
    return [
        (inst, mode, len(its), statistics.median(its) if its else math.nan)
        for (inst, mode), its in groups.items()
    ]


def format_summary(summary: dict[str, Summary]) -> str:
    lines = [f"{'class':<16} {'trials':>6} {'median':>8} {'%>2x':>7} {'min':>7} {'max':>7}"]
    for label, s in summary.items():
        lines.append(f"{label:<16} {s.trials:>6} {s.median:>8.3f} {s.improved_pct:>6.1f}% "
                     f"{s.min:>7.3f} {s.max:>7.3f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# CSV


def write_csv(records: Iterable[BenchmarkRecord], fh) -> None:
    fh.write(CSV_HEADER + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.instance, r.mode, r.seed, r.iterations, int(r.converged),
                         repr(float(r.residual)), repr(float(r.wall_time_s))])


def dumps(records: Iterable[BenchmarkRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def loads(text: str) -> list[BenchmarkRecord]:
    """Parse a report written by :func:`write_csv`; speedups are re-derived by pairing."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"not a v{CSV_VERSION} benchmark report")
    reader = csv.reader(lines[1:])
    if tuple(next(reader, ())) != CSV_COLUMNS:
        raise ValueError("unexpected CSV columns")
    records = [
        BenchmarkRecord(row[0], row[1], int(row[2]), int(row[3]), row[4] == "1",
                        float(row[5]), float(row[6]))
        for row in reader if row
    ]
    return pair_speedups(records)
