"""Detection rules, metric arithmetic, and benchmark persistence."""

import csv
import json

import numpy as np
import pytest

from nvagm.bench import (
    SUMMARY_COLUMNS,
    compute_metrics,
    detect_rectangle,
    detect_value_gap,
    run_benchmark,
)
from nvagm.objectives import ModeSpec, Objective, get_problem, make_quadratic
from nvagm.optimizers import RunConfig, Schedule

MODES = (
    ModeSpec([0.0, 0.0], True, 1.0),
    ModeSpec([1.0, 1.0], False, 0.5),
)


# ------------------------------------------------------------------ detection


def test_rectangle_closed_boundary():
    fg, fa = detect_rectangle(np.array([[0.1, 0.0]]), MODES, 0.1)
    assert fg == {0} and fa == {0}
    fg, fa = detect_rectangle(np.array([[0.1000001, 0.0]]), MODES, 0.1)
    assert fg == set() and fa == set()


def test_rectangle_separates_global_and_local():
    means = np.array([[0.02, -0.03], [0.95, 1.08]])
    fg, fa = detect_rectangle(means, MODES, 0.1)
    assert fg == {0}
    assert fa == {0, 1}


def test_rectangle_found_sets_grow_with_epsilon():
    rng = np.random.default_rng(0)
    means = rng.uniform(-1.5, 1.5, size=(6, 2))
    prev_g, prev_a = set(), set()
    for eps in (0.05, 0.1, 0.3, 0.8, 2.0):
        fg, fa = detect_rectangle(means, MODES, eps)
        assert prev_g <= fg and prev_a <= fa
        prev_g, prev_a = fg, fa
    assert prev_a == {0, 1}


def test_value_gap_assigns_nearest_global():
    bundle = get_problem("cec-f2")
    modes = bundle.modes
    # two means sitting on distinct optima, one in the valley between
    means = np.array([[0.1], [0.5], [0.15]])
    fg, fa = detect_value_gap(bundle.objective, means, modes, 0.1)
    assert fg == fa
    assert len(fg) == 2
    locs = sorted(float(modes[i].location[0]) for i in fg)
    assert locs == pytest.approx([0.1, 0.5], abs=1e-6)


def test_value_gap_counts_each_mode_once():
    bundle = get_problem("cec-f2")
    means = np.array([[0.1], [0.1002], [0.0998]])
    fg, _ = detect_value_gap(bundle.objective, means, bundle.modes, 0.1)
    assert len(fg) == 1


# ------------------------------------------------------------------ metrics


def test_metrics_half_recovery():
    found_g = [{0, 1, 2}, set()]
    found_a = [{0, 1, 2, 3}, set()]
    m = compute_metrics(found_g, found_a, n_global=3, n_modes=4)
    assert m["gpr"] == pytest.approx(0.5)
    assert m["apr"] == pytest.approx(0.5)
    assert m["gsr"] == pytest.approx(0.5)


def test_metrics_perfect_and_empty():
    m = compute_metrics([{0}], [{0, 1}], n_global=1, n_modes=2)
    assert m == {"gpr": 1.0, "apr": 1.0, "gsr": 1.0}
    m = compute_metrics([set(), set()], [set(), set()], n_global=2, n_modes=2)
    assert m == {"gpr": 0.0, "apr": 0.0, "gsr": 0.0}


def test_metrics_validation():
    with pytest.raises(ValueError):
        compute_metrics([], [], 1, 1)
    with pytest.raises(ValueError):
        compute_metrics([{0}], [{0}], 0, 3)
    with pytest.raises(ValueError):
        compute_metrics([{0}], [], 1, 1)
    with pytest.raises(ValueError):
        compute_metrics([{0}], [{0}], 2, 1)


# ------------------------------------------------------------------ benchmark runs


def small_bench_config(**over):
    base = dict(
        problem="sym-gmm",
        algorithm="nva-gm",
        n_components=4,
        batch=4,
        schedule=Schedule(1.0, 1.0, 0.1, 0.8, steps=400),
        seed=0,
    )
    base.update(over)
    return RunConfig(**base)


def test_benchmark_writes_layout(tmp_path):
    cfg = small_bench_config()
    res = run_benchmark(cfg, 3, out_dir=tmp_path, experiment="smoke")
    exp = tmp_path / "smoke"
    assert (exp / "report.json").is_file()
    assert (exp / "summary.csv").is_file()
    for h in range(3):
        assert (exp / f"run-{h}.jsonl").is_file()

    report = json.loads((exp / "report.json").read_text())
    assert report["experiment"] == "smoke"
    assert report["n_replicates"] == 3
    assert set(report["metrics"]) == {"gpr", "apr", "gsr"}
    assert len(report["per_run"]) == 3
    for entry in report["per_run"]:
        assert entry["abort"] is None
        assert entry["eval_counts"]["value"] == 4 * 4 * 400

    with open(exp / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert list(rows[0]) == SUMMARY_COLUMNS
    row = rows[0]
    assert row["experiment"] == "smoke"
    assert row["K"] == "4" and row["B"] == "4" and row["T"] == "400"
    assert row["H"] == "3"
    assert 0.0 <= float(row["gpr"]) <= 1.0
    assert row["feval_l"] == "6400"

    assert 0.0 <= res.metrics["gpr"] <= 1.0
    first = json.loads((exp / "run-0.jsonl").read_text().splitlines()[0])
    assert set(first) == {"t", "omega", "rho", "weights", "means", "eig_min", "eig_max", "fbar"}


def test_benchmark_metrics_match_detection_by_hand(tmp_path):
    cfg = small_bench_config(schedule=Schedule(1.0, 1.0, 0.1, 0.8, steps=600))
    res = run_benchmark(cfg, 2)
    bundle = get_problem("sym-gmm")
    by_hand = []
    for trace in res.traces:
        fg, _ = detect_rectangle(trace.final_state.means, bundle.modes, 0.1)
        by_hand.append(fg)
    assert res.metrics["gpr"] == pytest.approx(
        sum(len(g) for g in by_hand) / (bundle.n_global * 2)
    )


def convex_abort_objective():
    def value_fn(x2d):
        return 0.5e12 * np.einsum("ij,ij->i", x2d, x2d)

    def grad_fn(x2d):
        return 1e12 * x2d

    def hess_fn(x2d):
        return np.broadcast_to(1e12 * np.eye(2), (x2d.shape[0], 2, 2)).copy()

    return Objective("blowup", 2, "hessian", value_fn, grad_fn, hess_fn)


def test_aborted_replicates_score_zero():
    cfg = RunConfig(
        problem=convex_abort_objective(),
        algorithm="nva-gm",
        n_components=1,
        batch=4,
        schedule=Schedule(1e-9, 0.0, 10.0, 0.0, steps=5),
        init_means=np.zeros((1, 2)),
        seed=0,
    )
    res = run_benchmark(cfg, 2, modes=MODES, detection="rectangle", epsilon=5.0)
    assert res.n_aborted == 2
    assert res.metrics == {"gpr": 0.0, "apr": 0.0, "gsr": 0.0}
    assert all(e["abort"] is not None for e in res.per_run)


def test_budget_violation_raises():
    cfg = small_bench_config(schedule=Schedule(1.0, 1.0, 0.1, 0.8, steps=10))
    with pytest.raises(RuntimeError, match="budget"):
        run_benchmark(cfg, 1, budget=100)


def test_budget_respected_passes():
    cfg = small_bench_config(schedule=Schedule(1.0, 1.0, 0.1, 0.8, steps=10))
    res = run_benchmark(cfg, 1, budget=4 * 4 * 10 * 3)
    assert res.n_aborted == 0


def test_parallel_jobs_match_serial():
    cfg = small_bench_config(schedule=Schedule(1.0, 1.0, 0.1, 0.8, steps=60))
    serial = run_benchmark(cfg, 2, jobs=1)
    parallel = run_benchmark(cfg, 2, jobs=2)
    assert serial.metrics == parallel.metrics
    for a, b in zip(serial.traces, parallel.traces):
        assert a.records == b.records
        assert np.array_equal(a.final_state.means, b.final_state.means)


def test_bare_objective_needs_modes():
    cfg = RunConfig(
        problem=make_quadratic([0.0, 0.0], np.eye(2)),
        algorithm="nva-gm",
        n_components=1,
        batch=4,
        schedule=Schedule(1.0, 1.0, 0.1, 0.8, steps=5),
        init_means=np.zeros((1, 2)),
    )
    with pytest.raises(ValueError, match="mode inventory"):
        run_benchmark(cfg, 1)
    res = run_benchmark(cfg, 1, modes=(ModeSpec([0.0, 0.0], True, 0.0),), epsilon=0.5)
    assert res.metrics["gpr"] == 1.0


def test_replicate_indices_drive_runs():
    cfg = small_bench_config(schedule=Schedule(1.0, 1.0, 0.1, 0.8, steps=40))
    res = run_benchmark(cfg, 3)
    means = [t.final_state.means for t in res.traces]
    assert not np.array_equal(means[0], means[1])
    assert not np.array_equal(means[1], means[2])
    assert [t.replicate for t in res.traces] == [0, 1, 2]
