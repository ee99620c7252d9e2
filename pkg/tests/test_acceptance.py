"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from bbls.functions import FUNCTIONS, build_problem, distinct_axes
from bbls.harness import RunRecord, observe, run_experiment, runtime_to_target
from bbls.prng import RngState, Role, derive_seed, mix64
from bbls.structured_ops import (
    SwapParams,
    block_sizes,
    generate_block_diagonal,
    generate_rotation,
    swap_distance_stats,
    truncated_uniform_swaps,
)
from bbls.suite import SuiteConfig, TargetSet
from bbls.transforms import gamma
from bbls.verify import ROTATIONAL_FIDS, median_eval_time
from dense_reference import reference_value


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, passed: bool, detail: str, seconds: float | None = None):
        timing = f" [{seconds:.1f}s]" if seconds is not None else ""
        with capsys.disabled():
            print(f"\nCRITERION {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}{timing}")
        assert passed, detail

    return emit


def test_criterion_01_moved_fraction(report):
    t0 = time.perf_counter()
    means = {}
    for n in (20, 40, 80, 160, 320, 640):
        params = SwapParams.for_dimension(n)
        # the left permutations that f10 uses for instances 1..100
        fractions = [
            truncated_uniform_swaps(RngState(derive_seed(10, n, inst, Role.PERM_P11)), n, params).moved_fraction()
            for inst in range(1, 101)
        ]
        means[n] = float(np.mean(fractions))
    elapsed = time.perf_counter() - t0
    ok = all(m >= 0.95 for m in means.values()) and elapsed < 10
    detail = ", ".join(f"n={n}: {m:.4f}" for n, m in means.items())
    report(1, "moved-variable proportion >= 0.95", ok, detail, elapsed)


def test_criterion_02_swap_distance(report):
    t0 = time.perf_counter()
    n, r_s = 100, 10
    params = SwapParams(n, r_s)
    total = 100_000
    interior = swap_distance_stats(total, n, params, RngState(mix64(2, 50)), first_index=50).mean
    # asymmetric first indices i = 1..r_s share the swap budget; the closed form is the smallest of their means
    asym = {
        i: swap_distance_stats(total // r_s, n, params, RngState(mix64(2, i)), first_index=i).mean
        for i in range(1, r_s + 1)
    }
    elapsed = time.perf_counter() - t0
    want_interior = r_s / 2 + 0.5
    want_asym = (math.sqrt(2) - 1) * r_s + 0.5
    low = min(asym.values())
    ok = (
        abs(interior / want_interior - 1) <= 0.05
        and abs(low / want_asym - 1) <= 0.05
        and elapsed < 5
    )
    detail = (
        f"interior {interior:.3f} vs {want_interior:.3f}; asymmetric minimum {low:.3f} at i={min(asym, key=asym.get)} "
        f"vs {want_asym:.3f}; edge i=1 gives {asym[1]:.3f}"
    )
    report(2, "swap-distance bounds within 5%", ok, detail, elapsed)


def test_criterion_03_orthogonality(report):
    worst_block = 0.0
    for n in (8, 40, 100):
        for seed in range(20):
            B = generate_block_diagonal(RngState(mix64(3, n, seed)), n)
            assert sum(B.block_sizes) == n
            worst_block = max(worst_block, max(np.abs(b @ b.T - np.eye(len(b))).max() for b in B.blocks))
    worst_rot = 0.0
    for n in range(2, 17):
        for seed in range(5):
            R = generate_rotation(*(RngState(mix64(4, n, seed, k)) for k in range(3)), n).to_dense()
            worst_rot = max(worst_rot, np.abs(R @ R.T - np.eye(n)).max())
    ok = worst_block <= 1e-9 and worst_rot <= 1e-9
    report(3, "orthogonality", ok, f"max |BB^T-I| {worst_block:.2e}, max |RR^T-I| (n<=16) {worst_rot:.2e}")


def test_criterion_04_dense_oracle(report):
    worst, where = 0.0, None
    for n in (4, 8, 16):
        X = np.random.default_rng(mix64(5, n)).uniform(-5, 5, (100, n))
        for fid in ROTATIONAL_FIDS:
            p = build_problem(fid, n, 1)
            got = p(X)
            want = np.array([reference_value(p, x) for x in X])
            err = float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want))))
            if err > worst:
                worst, where = err, (fid, n)
    report(4, "dense-oracle equivalence <= 1e-9 relative", worst <= 1e-9, f"max relative error {worst:.2e} at (fid, n)={where}")


def test_criterion_05_optimum_consistency(report):
    t0 = time.perf_counter()
    worst_gap, worst_below = 0.0, math.inf
    for n in (4, 8, 20, 40):
        rng = np.random.default_rng(mix64(6, n))
        for fid in FUNCTIONS:
            p = build_problem(fid, n, 1)
            # x_opt is y_1 for f21/f22 and the point with z = 1 for f19
            worst_gap = max(worst_gap, abs(p(p.x_opt) - p.f_opt) / max(1.0, abs(p.f_opt)))
            for _ in range(5):
                X = rng.uniform(-5, 5, (20_000, n))
                worst_below = min(worst_below, float(np.min(p(X) - p.f_opt)))
    ok = worst_gap <= 1e-8 and worst_below >= -1e-8
    detail = f"max |f(x_opt)-f_opt|/max(1,|f_opt|) {worst_gap:.2e}; min f-f_opt over 1e5 points {worst_below:.3g}"
    report(5, "optimum consistency", ok, detail, time.perf_counter() - t0)


def test_criterion_06_linear_cost(report):
    t0 = time.perf_counter()
    t40 = median_eval_time(10, 40, 10_000)
    t640 = median_eval_time(10, 640, 10_000)
    ratio = t640 / t40
    storage = {fid: build_problem(fid, 640, 1).matrix_storage for fid in FUNCTIONS}
    bound = 2 * (16 * 40 * 40 + 2 * 640)  # two rotations of 16 blocks plus permutations
    elapsed = time.perf_counter() - t0
    ok = ratio <= 40 and max(storage.values()) <= bound and elapsed < 60
    detail = (
        f"f10 median {t40:.2e}s at n=40, {t640:.2e}s at n=640, ratio {ratio:.1f}; "
        f"max matrix storage {max(storage.values())} <= {bound} (dense would be {2 * 640 * 640})"
    )
    report(6, "linear-cost timing and memory", ok, detail, elapsed)


def test_criterion_07_normalization(report):
    exact = gamma(20) == 1.0 and gamma(40) == 1.0 and gamma(80) == 0.5 and gamma(640) == 0.0625
    worst = 0.0
    for n in (20, 40, 80, 160, 320, 640):
        p = build_problem(1, n, 1)
        d = np.zeros(n)
        d[::7] = 0.5  # exactly representable squared norm
        c = float(d @ d)
        want = gamma(n) * c + p.f_opt
        worst = max(worst, abs(p(p.x_opt + d) - want) / max(1.0, abs(want)))
    ok = exact and worst <= 4 * np.finfo(float).eps
    report(7, "gamma normalization", ok, f"gamma values exact: {exact}; f1 max relative error {worst:.1e}")


def test_criterion_08_distinct_axes(report):
    n = 80
    k = distinct_axes(n)
    findings = {}
    for fid in (11, 12, 13):
        p = build_problem(fid, n, 1)
        z0 = np.full(n, 0.2)
        base = p.core(z0)
        deltas = []
        for i in range(n):
            z = z0.copy()
            z[i] += 0.1
            deltas.append(p.core(z) - base)
        deltas = np.array(deltas)
        # coordinates whose response differs from the majority are the distinguished ones
        majority = np.median(deltas)
        distinguished = np.flatnonzero(~np.isclose(deltas, majority, rtol=1e-9))
        findings[fid] = distinguished.tolist()
    ok = k == 2 and all(v == [0, 1] for v in findings.values())
    report(8, "distinct axes at n=80", ok, f"ceil(80/40)={k}; distinguished coordinates (0-based) {findings}")


def test_criterion_09_dimension_overlap(report):
    sizes = {}
    for n in (20, 40):
        sizes[n] = block_sizes(n, 40)
        for fid in (10, 21):
            p = build_problem(fid, n, 1)
            blocks = [M.block.block_sizes for M in p.rotations.values()]
            if p.gallagher is not None:
                blocks.append(p.gallagher.block.block_sizes)
            assert all(b == (n,) for b in blocks)
    ok = sizes == {20: [20], 40: [40]}
    report(9, "single block for n in {20, 40}", ok, f"block sizes {sizes}")


class _Scripted:
    def __init__(self, values):
        from bbls.functions import ProblemDescriptor

        self.values = list(values)
        self.f_opt = 0.0
        self.descriptor = ProblemDescriptor(1, 2, 1)
        self.dimension = 2

    def __call__(self, x):
        return self.values.pop(0)


def test_criterion_10_harness_semantics(report):
    precisions = (100.0, 10.0, 1.0, 1e-8)
    traces = {
        "descending": ([150.0, 80.0, 9.0, 9.5, 0.7, 0.0], {100.0: 2, 10.0: 3, 1.0: 5, 1e-8: 6}),
        "jump": ([500.0, 1e-9], {100.0: 2, 10.0: 2, 1.0: 2, 1e-8: 2}),
        "stalled": ([300.0, 50.0, 12.0, 11.0], {100.0: 2}),
    }
    problems = []
    for name, (values, expected) in traces.items():
        obs = observe(_Scripted(values), TargetSet(0.0, precisions))
        for _ in values:
            obs(None)
        rec: RunRecord = obs.record
        if rec.first_hit != expected:
            problems.append(name)
        for p in precisions:
            rt = runtime_to_target(rec, p)
            if p in expected and rt != expected[p]:
                problems.append(f"{name}:{p}")
            if p not in expected and (rt is not None or rec.evaluations != len(values)):
                problems.append(f"{name}:{p} unsolved")
    ok = not problems
    report(10, "runtime definition on scripted traces", ok, "all traces match" if ok else f"mismatches {problems}")


def test_criterion_11_end_to_end_determinism(report, tmp_path):
    config = SuiteConfig(dimensions=(20,), function_ids=(1, 6, 15, 21), instances=(1, 2))
    bodies = []
    for k, workers in enumerate((1, 4, 8)):
        out = tmp_path / f"r{k}.txt"
        run_experiment(config, "one-plus-one-es", 50, out, workers=workers, seed=11)
        bodies.append([line for line in out.read_bytes().splitlines() if b"timestamp=" not in line])
    ok = bodies[0] == bodies[1] == bodies[2] and len(bodies[0]) == 1 + len(config)
    report(11, "byte-identical records across workers 1/4/8", ok, f"{len(bodies[0]) - 1} record lines per run")
