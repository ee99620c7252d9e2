"""Structural self-checks run by ``bbls verify`` and the per-evaluation timing used by ``bbls bench``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .functions import FUNCTIONS, build_problem
from .prng import RngState, mix64
from .structured_ops import (
    SwapParams,
    generate_block_diagonal,
    generate_rotation,
    swap_distance_stats,
    truncated_uniform_swaps,
)

ROTATIONAL_FIDS = (6, 7, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 21, 22, 23, 24)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _sizes(level: str, quick, full):
    return quick if level == "quick" else full


def check_orthogonality(level: str) -> CheckResult:
    seeds = _sizes(level, 5, 20)
    worst = 0.0
    for n in (8, 40, 100):
        for seed in range(seeds):
            B = generate_block_diagonal(RngState(mix64(1, n, seed)), n)
            for block in B.blocks:
                worst = max(worst, np.abs(block @ block.T - np.eye(len(block))).max())
    for n in (4, 8, 16):
        for seed in range(seeds):
            rngs = [RngState(mix64(2, n, seed, k)) for k in range(3)]
            R = generate_rotation(*rngs, n).to_dense()
            worst = max(worst, np.abs(R @ R.T - np.eye(n)).max())
    return CheckResult("orthogonality", worst <= 1e-9, f"max |B B^T - I| = {worst:.3g}")


def check_permutations(level: str) -> CheckResult:
    trials = _sizes(level, 500, 10_000)
    rng = RngState(12345)
    for _ in range(trials):
        n = rng.uniform_int(1, 64)
        params = SwapParams(rng.uniform_int(0, n), rng.uniform_int(0, n))
        swaps: list[int] = []
        p = truncated_uniform_swaps(rng, n, params, on_swap=lambda i, j: swaps.append(abs(i - j)))
        if sorted(p.forward) != list(range(1, n + 1)):
            return CheckResult("permutation validity", False, f"not a bijection for n={n}")
        if swaps and max(swaps) > params.r_s:
            return CheckResult("permutation validity", False, f"swap beyond r_s={params.r_s}")
    return CheckResult("permutation validity", True, f"{trials} random permutations")


def check_dense_equivalence(level: str) -> CheckResult:
    points = _sizes(level, 20, 100)
    worst = 0.0
    for n in (4, 8, 16):
        X = np.random.default_rng(n).uniform(-5, 5, (points, n))
        for fid in ROTATIONAL_FIDS:
            structured = build_problem(fid, n, 1)
            dense = build_problem(fid, n, 1, dense=True)
            a, b = structured(X), dense(X)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))))
    return CheckResult("dense-oracle equivalence", worst <= 1e-9, f"max relative error {worst:.3g}")


def check_moved_fraction(level: str) -> CheckResult:
    reps = _sizes(level, 10, 100)
    means = {}
    for n in (20, 40, 80, 160, 320, 640):
        rng = RngState(mix64(3, n))
        params = SwapParams.for_dimension(n)
        means[n] = sum(truncated_uniform_swaps(rng, n, params).moved_fraction() for _ in range(reps)) / reps
    # n=20 settles near 0.947 in the long run, so it gets a looser floor
    ok = all(m >= (0.93 if n == 20 else 0.95) for n, m in means.items())
    detail = ", ".join(f"n={n}: {m:.4f}" for n, m in means.items())
    return CheckResult("moved fraction", ok, f"mean moved fraction {detail}")


def check_swap_distance(level: str) -> CheckResult:
    samples = _sizes(level, 20_000, 100_000)
    r_s, n = 10, 100
    params = SwapParams(n, r_s)
    interior = swap_distance_stats(samples, n, params, RngState(7), first_index=50).mean
    edge_index = 1 + round((math.sqrt(2) - 1) * r_s)
    edge = swap_distance_stats(samples, n, params, RngState(8), first_index=edge_index).mean
    want_interior = r_s / 2 + 0.5
    want_edge = (math.sqrt(2) - 1) * r_s + 0.5
    ok = abs(interior / want_interior - 1) <= 0.05 and abs(edge / want_edge - 1) <= 0.05
    return CheckResult(
        "swap-distance bounds", ok, f"interior {interior:.3f} (~{want_interior:.3f}), asymmetric {edge:.3f} (~{want_edge:.3f})"
    )


def check_optimum(level: str) -> CheckResult:
    points = _sizes(level, 1000, 100_000)
    dims = _sizes(level, (4, 20), (4, 8, 20, 40))
    worst_gap, worst_below = 0.0, 0.0
    for n in dims:
        rng = np.random.default_rng(n)
        for fid in FUNCTIONS:
            p = build_problem(fid, n, 1)
            gap = abs(p(p.x_opt) - p.f_opt) / max(1.0, abs(p.f_opt))
            worst_gap = max(worst_gap, gap)
            for chunk in range(0, points, 20_000):
                X = rng.uniform(-5, 5, (min(20_000, points - chunk), n))
                worst_below = min(worst_below, float(np.min(p(X) - p.f_opt)))
    ok = worst_gap <= 1e-8 and worst_below >= -1e-8
    return CheckResult("optimum consistency", ok, f"max |f(x_opt)-f_opt| {worst_gap:.3g}, min f-f_opt {worst_below:.3g}")


CHECKS: list[Callable[[str], CheckResult]] = [
    check_orthogonality,
    check_permutations,
    check_dense_equivalence,
    check_moved_fraction,
    check_swap_distance,
    check_optimum,
]


def run_checks(level: str = "quick") -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    return [check(level) for check in CHECKS]


def median_eval_time(fid: int, n: int, evaluations: int = 10_000, instance: int = 1) -> float:
    """Median wall time of single-point evaluations, in seconds."""
    problem = build_problem(fid, n, instance)
    points = np.random.default_rng(n).uniform(-5, 5, (64, n))
    for x in points[:8]:
        problem(x)
    times = np.empty(evaluations)
    for k in range(evaluations):
        x = points[k % len(points)]
        t0 = time.perf_counter()
        problem(x)
        times[k] = time.perf_counter() - t0
    return float(np.median(times))
