"""Replicated benchmark runs, mode-detection rules, and recovery metrics.

A mode counts as found by the rectangle rule when any component mean lands
within the closed sup-norm box of half-width epsilon around it. Bounded
multimodal suites use the value-gap rule instead: a mean whose objective
value is within epsilon of the shared global value claims the nearest
global mode. Metrics over H replicates:

    gpr  found globals / (n_global * H)       (peak ratio, globals)
    apr  found modes   / (n_modes  * H)       (peak ratio, all modes)
    gsr  fraction of replicates finding every global
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .objectives import Objective, ProblemBundle, get_problem
from .optimizers import RunConfig, Trace, run, write_trace_jsonl

__all__ = [
    "SUMMARY_COLUMNS",
    "BenchResult",
    "detect_rectangle",
    "detect_value_gap",
    "compute_metrics",
    "run_benchmark",
    "write_report",
]

SUMMARY_COLUMNS = [
    "experiment",
    "algorithm",
    "K",
    "B",
    "T",
    "H",
    "epsilon",
    "gpr",
    "apr",
    "gsr",
    "feval_l",
    "feval_grad",
    "feval_hess",
    "seed",
]


# ------------------------------------------------------------------ detection


def detect_rectangle(means, modes, epsilon):
    """Closed sup-norm test of component means against every mode location.

    Returns (found global indices, found indices) as sets over `modes`.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    found_global, found_all = set(), set()
    for i, mode in enumerate(modes):
        gaps = np.max(np.abs(means - mode.location), axis=1)
        if np.any(gaps <= epsilon):
            found_all.add(i)
            if mode.is_global:
                found_global.add(i)
    return found_global, found_all


def detect_value_gap(objective, means, modes, epsilon):
    """Nearest-global assignment for means within epsilon of the best value.

    Suites scored this way inventory global modes only, so both returned
    sets coincide.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    glob = [i for i, m in enumerate(modes) if m.is_global]
    if not glob:
        raise ValueError("value-gap detection needs at least one global mode")
    v_star = max(modes[i].value for i in glob)
    locs = np.stack([modes[i].location for i in glob])
    vals = np.atleast_1d(np.asarray(objective.value(means), dtype=float))
    found = set()
    for mu, v in zip(means, vals):
        if v >= v_star - epsilon:
            j = int(np.argmin(np.linalg.norm(locs - mu, axis=1)))
            found.add(glob[j])
    return found, set(found)


def compute_metrics(found_global, found_all, n_global, n_modes):
    """Aggregate per-replicate found-sets into gpr/apr/gsr."""
    h = len(found_global)
    if h == 0 or len(found_all) != h:
        raise ValueError("need one found-set pair per replicate")
    if n_global < 1:
        raise ValueError("problem must declare at least one global mode")
    if n_modes < n_global:
        raise ValueError("mode inventory smaller than its global subset")
    gpr = sum(len(g) for g in found_global) / (n_global * h)
    apr = sum(len(a) for a in found_all) / (n_modes * h)
    gsr = sum(1 for g in found_global if len(g) == n_global) / h
    return {"gpr": gpr, "apr": apr, "gsr": gsr}


# ------------------------------------------------------------------ execution


@dataclass
class BenchResult:
    experiment: str
    problem: str
    config: RunConfig
    n_replicates: int
    epsilon: float
    detection: str
    metrics: dict
    per_run: list
    traces: list
    eval_mean: dict
    n_aborted: int


_FORK_CONFIG = None


def _fork_replicate(h: int) -> Trace:
    return run(replace(_FORK_CONFIG, replicate=h))


def _run_all(config: RunConfig, n_replicates: int, jobs: int):
    if jobs > 1:
        global _FORK_CONFIG
        _FORK_CONFIG = config
        try:
            ctx = get_context("fork")
            with ProcessPoolExecutor(
                max_workers=min(jobs, n_replicates), mp_context=ctx
            ) as pool:
                return list(pool.map(_fork_replicate, range(n_replicates)))
        finally:
            _FORK_CONFIG = None
    return [run(replace(config, replicate=h)) for h in range(n_replicates)]


def _resolve_bundle(problem):
    if isinstance(problem, str):
        return get_problem(problem)
    if isinstance(problem, ProblemBundle):
        return problem
    return None


def run_benchmark(
    config: RunConfig,
    n_replicates: int,
    *,
    modes=None,
    detection=None,
    epsilon=None,
    budget=None,
    out_dir=None,
    experiment=None,
    jobs=1,
) -> BenchResult:
    """Run H seeded replicates of one configuration and score recovery.

    Detection parameters default to the problem bundle's. Aborted
    replicates contribute empty found-sets and keep their diagnostics.
    When the problem carries an evaluation budget, every replicate must
    stay within it.
    """
    if n_replicates < 1:
        raise ValueError("need at least one replicate")
    bundle = _resolve_bundle(config.problem)
    if bundle is not None:
        modes = bundle.modes if modes is None else modes
        detection = bundle.detection["kind"] if detection is None else detection
        if epsilon is None:
            epsilon = bundle.detection.get("epsilon")
        if budget is None:
            budget = bundle.budget
        objective = bundle.objective
        problem_id = bundle.pid
    else:
        if not isinstance(config.problem, Objective):
            raise TypeError(f"cannot interpret problem {config.problem!r}")
        objective = config.problem
        problem_id = objective.name
    if modes is None:
        raise ValueError("no mode inventory to score against")
    detection = detection or "rectangle"
    epsilon = 0.1 if epsilon is None else float(epsilon)
    n_global = sum(1 for m in modes if m.is_global)
    n_modes = len(modes)

    traces = _run_all(config, n_replicates, jobs)

    found_global, found_all, per_run = [], [], []
    for h, trace in enumerate(traces):
        if trace.abort is not None:
            fg, fa = set(), set()
        elif detection == "value-gap":
            fg, fa = detect_value_gap(
                objective, trace.final_state.means, modes, epsilon
            )
        else:
            fg, fa = detect_rectangle(trace.final_state.means, modes, epsilon)
        total = sum(trace.eval_counts.values())
        if budget is not None and total > budget:
            raise RuntimeError(
                f"replicate {h} spent {total} evaluations, over the budget {budget}"
            )
        found_global.append(fg)
        found_all.append(fa)
        per_run.append(
            {
                "h": h,
                "found_global": sorted(fg),
                "found_all": sorted(fa),
                "eval_counts": dict(trace.eval_counts),
                "abort": trace.abort,
                "elapsed": trace.elapsed,
            }
        )

    metrics = compute_metrics(found_global, found_all, n_global, n_modes)
    eval_mean = {
        key: float(np.mean([t.eval_counts[key] for t in traces]))
        for key in ("value", "grad", "hess")
    }
    result = BenchResult(
        experiment=experiment or f"{problem_id}-{config.algorithm}",
        problem=problem_id,
        config=config,
        n_replicates=n_replicates,
        epsilon=epsilon,
        detection=detection,
        metrics=metrics,
        per_run=per_run,
        traces=traces,
        eval_mean=eval_mean,
        n_aborted=sum(1 for t in traces if t.abort is not None),
    )
    if out_dir is not None:
        write_report(result, out_dir)
    return result


# ------------------------------------------------------------------ persistence


def _config_payload(config: RunConfig) -> dict:
    s = config.schedule
    return {
        "algorithm": config.algorithm,
        "K": config.n_components,
        "B": config.batch,
        "T": s.steps,
        "omega1": s.omega1,
        "alpha": s.alpha,
        "rho1": s.rho1,
        "beta": s.beta,
        "kappa": s.kappa,
        "tau": s.tau,
        "mu_variant": config.mu_variant,
        "s_variant": config.s_variant,
        "precision_rule": config.precision_rule,
        "sigma0": config.sigma0,
        "fixed_omega": config.fixed_omega,
        "seed": config.seed,
    }


def write_report(result: BenchResult, out_dir) -> Path:
    """Persist one experiment: per-replicate traces, report.json, summary.csv."""
    exp_dir = Path(out_dir) / result.experiment
    exp_dir.mkdir(parents=True, exist_ok=True)
    for h, trace in enumerate(result.traces):
        write_trace_jsonl(trace, exp_dir / f"run-{h}.jsonl")
    report = {
        "experiment": result.experiment,
        "problem": result.problem,
        "n_replicates": result.n_replicates,
        "detection": result.detection,
        "epsilon": result.epsilon,
        "metrics": result.metrics,
        "eval_mean": result.eval_mean,
        "n_aborted": result.n_aborted,
        "config": _config_payload(result.config),
        "per_run": result.per_run,
    }
    with open(exp_dir / "report.json", "w") as fh:
        json.dump(report, fh, indent=2)
    cfg = _config_payload(result.config)
    row = {
        "experiment": result.experiment,
        "algorithm": cfg["algorithm"],
        "K": cfg["K"],
        "B": cfg["B"],
        "T": cfg["T"],
        "H": result.n_replicates,
        "epsilon": result.epsilon,
        "gpr": result.metrics["gpr"],
        "apr": result.metrics["apr"],
        "gsr": result.metrics["gsr"],
        "feval_l": int(round(result.eval_mean["value"])),
        "feval_grad": int(round(result.eval_mean["grad"])),
        "feval_hess": int(round(result.eval_mean["hess"])),
        "seed": cfg["seed"],
    }
    with open(exp_dir / "summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        writer.writerow(row)
    return exp_dir
