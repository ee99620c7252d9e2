"""Runtime measurement: evaluation counting, first hits, baselines and experiments.

The runtime on a target ``f_opt + precision`` is the number of evaluations
until ``f(x) <= f_opt + precision`` held for the first time. An unsolved
target has no runtime; the run's evaluation count bounds it from below.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .functions import Problem, ProblemDescriptor, build_problem
from .prng import RngState, mix64
from .suite import SUITE_NAME, SuiteConfig, TargetSet, default_targets, suite_iter

logger = logging.getLogger(__name__)

RESTART_PATIENCE = 50  # evaluations per dimension without improvement before a restart
MIN_IMPROVEMENT = 1e-12


@dataclass
class RunRecord:
    descriptor: ProblemDescriptor
    f_opt: float
    precisions: tuple[float, ...]
    evaluations: int = 0
    best_f: float = math.inf
    first_hit: dict[float, int] = field(default_factory=dict)
    restarts: int = 0

    @property
    def solved(self) -> bool:
        return len(self.first_hit) == len(self.precisions)


@dataclass(frozen=True)
class Budget:
    max_evaluations: int

    def __post_init__(self):
        if self.max_evaluations < 0:
            raise ValueError(f"budget must be non-negative, got {self.max_evaluations}")

    @classmethod
    def from_multiplier(cls, multiplier: float, n: int) -> "Budget":
        return cls(int(multiplier * n))


class ObservedProblem:
    """A problem whose every evaluation is counted and checked against the targets."""

    def __init__(self, problem: Problem, targets: TargetSet | None = None):
        self.problem = problem
        self.targets = targets if targets is not None else default_targets(problem.f_opt)
        self._target_values = self.targets.targets
        self._next = 0
        self.record = RunRecord(problem.descriptor, problem.f_opt, self.targets.precisions)

    @property
    def dimension(self) -> int:
        return self.problem.dimension

    @property
    def all_hit(self) -> bool:
        return self._next == len(self._target_values)

    def __call__(self, x) -> float:
        f = self.problem(x)
        rec = self.record
        rec.evaluations += 1
        if f < rec.best_f:
            rec.best_f = f
        # targets are decreasing, so hits happen in order
        while self._next < len(self._target_values) and f <= self._target_values[self._next]:
            rec.first_hit[self.targets.precisions[self._next]] = rec.evaluations
            self._next += 1
        return f


def observe(problem: Problem, targets: TargetSet | None = None) -> ObservedProblem:
    return ObservedProblem(problem, targets)


def runtime_to_target(record: RunRecord, precision: float) -> int | None:
    """First-hit evaluation count, or None if the target was never reached.

    For an unsolved target ``record.evaluations`` is a lower bound on the runtime.
    """
    if precision not in record.precisions:
        raise ValueError(f"precision {precision!r} is not in the record's target set")
    return record.first_hit.get(precision)


def _uniform_point(rng: RngState, n: int, half_width: float) -> np.ndarray:
    return np.array([half_width * (2.0 * rng.next_uniform() - 1.0) for _ in range(n)])


def random_search(problem: ObservedProblem, budget: Budget, rng: RngState) -> RunRecord:
    """Uniform sampling in ``[-5, 5]^n``; stops early once the last target is hit."""
    n = problem.dimension
    for _ in range(budget.max_evaluations):
        if problem.all_hit:
            break
        problem(_uniform_point(rng, n, 5.0))
    return problem.record


def one_plus_one_es(problem: ObservedProblem, budget: Budget, rng: RngState) -> RunRecord:
    """(1+1)-ES with isotropic Gaussian mutations and the 1/5th success rule.

    A success multiplies the step size by ``exp(1/sqrt(n+1))``, a failure by
    ``exp(-1/(4 sqrt(n+1)))``. The run restarts from a fresh uniform point
    in ``[-4, 4]^n`` after ``50 n`` evaluations without an improvement of at
    least 1e-12.
    """
    n = problem.dimension
    up = math.exp(1.0 / math.sqrt(n + 1.0))
    down = math.exp(-0.25 / math.sqrt(n + 1.0))
    patience = RESTART_PATIENCE * n
    remaining = budget.max_evaluations
    first_start = True
    while remaining > 0 and not problem.all_hit:
        if not first_start:
            problem.record.restarts += 1
        first_start = False
        x = _uniform_point(rng, n, 4.0)
        fx = problem(x)
        remaining -= 1
        sigma = 2.0
        run_best = fx
        stale = 0
        while remaining > 0 and not problem.all_hit and stale < patience:
            y = x + sigma * np.array(rng.gaussians(n))
            fy = problem(y)
            remaining -= 1
            if fy <= fx:
                if fy < fx:
                    sigma *= up
                else:
                    sigma *= down
                x, fx = y, fy
            else:
                sigma *= down
            if fx < run_best - MIN_IMPROVEMENT:
                run_best = fx
                stale = 0
            else:
                stale += 1
    return problem.record


OPTIMIZERS: dict[str, Callable[[ObservedProblem, Budget, RngState], RunRecord]] = {
    "random-search": random_search,
    "one-plus-one-es": one_plus_one_es,
}


def name_hash(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")


def problem_seed(optimizer: str, index: int, seed: int = 0) -> int:
    return mix64(name_hash(optimizer), index, seed)


def format_record(record: RunRecord) -> str:
    d = record.descriptor
    fields = [
        str(d.function_id),
        str(d.dimension),
        str(d.instance),
        str(record.evaluations),
        f"{record.best_f - record.f_opt:.17g}",
        str(record.restarts),
    ]
    fields += [f"{p:.17g}:{record.first_hit[p]}" for p in record.precisions if p in record.first_hit]
    return " ".join(fields)


def parse_record_line(line: str) -> dict:
    parts = line.split()
    hits = {}
    for token in parts[6:]:
        p, h = token.split(":")
        hits[float(p)] = int(h)
    return {
        "function_id": int(parts[0]),
        "dimension": int(parts[1]),
        "instance": int(parts[2]),
        "evaluations": int(parts[3]),
        "best_delta": float(parts[4]),
        "restarts": int(parts[5]),
        "first_hit": hits,
    }


COLUMNS = "# fid n instance evaluations best_f-f_opt restarts precision:first_hit..."


def run_problem(descriptor: ProblemDescriptor, index: int, optimizer: str, budget_multiplier: float, seed: int = 0) -> RunRecord:
    problem = build_problem(descriptor.function_id, descriptor.dimension, descriptor.instance)
    observed = observe(problem)
    budget = Budget.from_multiplier(budget_multiplier, descriptor.dimension)
    rng = RngState(problem_seed(optimizer, index, seed))
    return OPTIMIZERS[optimizer](observed, budget, rng)


def run_experiment(
    config: SuiteConfig,
    optimizer: str,
    budget_multiplier: float,
    output_path: str | os.PathLike,
    workers: int = 1,
    seed: int = 0,
) -> list[RunRecord]:
    """Run ``optimizer`` on every problem of ``config`` and write one line per problem.

    The data goes to ``<output>.partial`` first and is renamed on success; a
    failed run leaves the ``.partial`` file ending in a ``# PARTIAL`` line.
    """
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; choose from {sorted(OPTIMIZERS)}")
    if budget_multiplier <= 0:
        raise ValueError("budget multiplier must be positive")
    output_path = Path(output_path)
    partial = output_path.with_name(output_path.name + ".partial")
    descriptors = list(suite_iter(config))
    records: list[RunRecord] = []

    def task(item):
        index, d = item
        return run_problem(d, index, optimizer, budget_multiplier, seed)

    with open(partial, "w") as fh:
        fh.write(
            f"# suite={SUITE_NAME} optimizer={optimizer} budget_multiplier={budget_multiplier:g} "
            f"timestamp={time.strftime('%Y-%m-%dT%H:%M:%S')}\n"
        )
        fh.write(COLUMNS + "\n")
        try:
            with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
                # map yields in submission order, so the file is independent of scheduling
                for record in pool.map(task, enumerate(descriptors)):
                    fh.write(format_record(record) + "\n")
                    records.append(record)
        except BaseException:
            fh.write("# PARTIAL\n")
            raise
    os.replace(partial, output_path)
    logger.info("wrote %d records to %s", len(records), output_path)
    return records


def read_results(path: str | os.PathLike) -> tuple[str, list[dict]]:
    header = ""
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# suite="):
            header = line
        elif line and not line.startswith("#"):
            rows.append(parse_record_line(line))
    return header, rows
