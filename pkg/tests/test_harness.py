import numpy as np
import pytest

from bbls.functions import ProblemDescriptor, build_problem
from bbls.harness import (
    Budget,
    ObservedProblem,
    RunRecord,
    format_record,
    observe,
    one_plus_one_es,
    parse_record_line,
    random_search,
    read_results,
    run_experiment,
    runtime_to_target,
)
from bbls.prng import RngState
from bbls.suite import SuiteConfig, TargetSet


class ScriptedProblem:
    """Stands in for a Problem and returns a fixed sequence of f-values."""

    def __init__(self, values, f_opt=0.0, n=2):
        self.values = list(values)
        self.f_opt = f_opt
        self.descriptor = ProblemDescriptor(1, n, 1)
        self.dimension = n
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.values.pop(0)


def scripted(values, precisions=(10.0, 1.0, 0.1)):
    p = ScriptedProblem(values)
    return p, observe(p, TargetSet(p.f_opt, precisions))


def test_first_hits_follow_the_trace():
    _, obs = scripted([50.0, 10.0, 3.0, 1.0, 0.5, 0.05])
    for _ in range(6):
        obs(None)
    rec = obs.record
    assert rec.first_hit == {10.0: 2, 1.0: 4, 0.1: 6}
    assert rec.best_f == 0.05 and rec.evaluations == 6 and rec.solved


def test_one_evaluation_can_hit_several_targets():
    _, obs = scripted([0.0])
    obs(None)
    assert obs.record.first_hit == {10.0: 1, 1.0: 1, 0.1: 1}
    assert obs.all_hit


def test_worse_values_do_not_undo_hits():
    _, obs = scripted([5.0, 500.0, 0.9, 20.0])
    for _ in range(4):
        obs(None)
    assert obs.record.first_hit == {10.0: 1, 1.0: 3}
    assert obs.record.best_f == 0.9


def test_optimum_hits_all_51_targets_at_once():
    p = build_problem(3, 20, 1)
    obs = observe(p)
    obs(p.x_opt)
    assert len(obs.record.first_hit) == 51 and set(obs.record.first_hit.values()) == {1}


def test_never_below_first_target():
    _, obs = scripted([200.0, 150.0, 101.0], precisions=(100.0, 1.0))
    for _ in range(3):
        obs(None)
    assert obs.record.first_hit == {}


def test_runtime_to_target():
    rec = RunRecord(ProblemDescriptor(1, 20, 1), 0.0, (10.0, 1.0), evaluations=80, first_hit={10.0: 37})
    assert runtime_to_target(rec, 10.0) == 37
    assert runtime_to_target(rec, 1.0) is None
    assert rec.evaluations == 80  # the lower bound for the unsolved target
    with pytest.raises(ValueError):
        runtime_to_target(rec, 0.5)


def test_evaluation_counting_is_exact():
    p = ScriptedProblem([5.0] * 123)
    obs = observe(p, TargetSet(0.0, (1.0,)))
    random_search(obs, Budget(123), RngState(1))
    assert p.calls == obs.record.evaluations == 123


def test_budget():
    assert Budget.from_multiplier(100, 20).max_evaluations == 2000
    with pytest.raises(ValueError):
        Budget(-1)


def test_random_search_zero_budget():
    rec = random_search(observe(build_problem(1, 4, 1)), Budget(0), RngState(1))
    assert rec.evaluations == 0 and rec.best_f == np.inf


def test_random_search_best_so_far_improves_with_budget():
    bests = []
    for budget in (10, 100, 1000, 10_000):
        rec = random_search(observe(build_problem(1, 4, 1)), Budget(budget), RngState(5))
        bests.append(rec.best_f)
    assert all(a >= b for a, b in zip(bests, bests[1:]))


def _records_equal(a: RunRecord, b: RunRecord) -> bool:
    return (a.evaluations, a.best_f, a.first_hit, a.restarts) == (b.evaluations, b.best_f, b.first_hit, b.restarts)


def test_same_seed_same_record():
    for algo in (random_search, one_plus_one_es):
        a = algo(observe(build_problem(7, 20, 2)), Budget(2000), RngState(9))
        b = algo(observe(build_problem(7, 20, 2)), Budget(2000), RngState(9))
        assert _records_equal(a, b)


def test_es_restarts_on_stagnation():
    # a flat objective never improves, so every 50n evaluations the ES restarts
    p = ScriptedProblem([1000.0] * 1000, n=2)
    obs = observe(p, TargetSet(0.0, (1.0,)))
    rec = one_plus_one_es(obs, Budget(1000), RngState(3))
    assert rec.evaluations == 1000
    assert rec.restarts == 1000 // (2 * 50 + 1)


def test_es_solves_sphere_on_most_instances():
    solved = 0
    for instance in range(1, 16):
        p = build_problem(1, 20, instance)
        rec = one_plus_one_es(observe(p), Budget(10_000 * 20), RngState(instance))
        solved += runtime_to_target(rec, rec.precisions[-1]) is not None
    assert solved >= 8


def test_record_line_round_trip():
    rec = RunRecord(ProblemDescriptor(4, 40, 2), 1.5, (100.0, 1.0), evaluations=9, best_f=3.25, first_hit={100.0: 1}, restarts=2)
    line = format_record(rec)
    parsed = parse_record_line(line)
    assert parsed == {
        "function_id": 4,
        "dimension": 40,
        "instance": 2,
        "evaluations": 9,
        "best_delta": 1.75,
        "restarts": 2,
        "first_hit": {100.0: 1},
    }


def _body(path):
    return [line for line in path.read_text().splitlines() if "timestamp=" not in line]


def test_run_experiment_writes_one_line_per_problem(tmp_path):
    config = SuiteConfig(dimensions=(20,), function_ids=(1, 2), instances=(1, 2))
    out = tmp_path / "rs.txt"
    records = run_experiment(config, "random-search", 5, out)
    header, rows = read_results(out)
    assert len(records) == len(rows) == 4
    assert "optimizer=random-search" in header
    assert [(r["function_id"], r["instance"]) for r in rows] == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert not (tmp_path / "rs.txt.partial").exists()


def test_run_experiment_reproducible_across_workers(tmp_path):
    config = SuiteConfig(dimensions=(20,), function_ids=(1, 8, 21), instances=(1, 2))
    bodies = []
    for k, workers in enumerate((1, 8, 1)):
        out = tmp_path / f"run{k}.txt"
        run_experiment(config, "one-plus-one-es", 20, out, workers=workers, seed=4)
        bodies.append(_body(out))
    assert bodies[0] == bodies[1] == bodies[2]
    out = tmp_path / "other.txt"
    run_experiment(config, "one-plus-one-es", 20, out, seed=5)
    assert _body(out) != bodies[0]


def test_failed_run_leaves_partial_marker(tmp_path, monkeypatch):
    import bbls.harness as H

    calls = {"n": 0}
    real = H.run_problem

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 3:
            raise RuntimeError("boom")
        return real(*args, **kwargs)

    monkeypatch.setattr(H, "run_problem", flaky)
    config = SuiteConfig(dimensions=(20,), function_ids=(1,), instances=(1, 2, 3, 4))
    out = tmp_path / "res.txt"
    with pytest.raises(RuntimeError):
        run_experiment(config, "random-search", 2, out)
    assert not out.exists()
    lines = (tmp_path / "res.txt.partial").read_text().splitlines()
    assert lines[-1] == "# PARTIAL"
    assert len([line for line in lines if not line.startswith("#")]) == 2


def test_run_experiment_rejects_bad_arguments(tmp_path):
    config = SuiteConfig(dimensions=(20,), function_ids=(1,), instances=(1,))
    with pytest.raises(ValueError):
        run_experiment(config, "cma", 10, tmp_path / "x")
    with pytest.raises(ValueError):
        run_experiment(config, "random-search", 0, tmp_path / "x")


def test_observed_problem_wraps_problem():
    p = build_problem(2, 20, 1)
    obs = ObservedProblem(p)
    assert obs.dimension == 20 and len(obs.targets) == 51
