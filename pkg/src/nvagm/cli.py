"""Command-line front end.

    nvagm optimize (PROBLEM | --config FILE | --preset NAME) [--seed N] [--out FILE]
    nvagm bench    (--config FILE | --preset NAME) [--out DIR] [--jobs N] [--seed N]
    nvagm list-problems
    nvagm report --out DIR

Exit codes: 0 success, 1 runtime failure, 2 bad usage or config. The
NVA_SEED environment variable overrides configured seeds; an explicit
--seed flag beats both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import run_benchmark
from .config import (
    ExperimentConfig,
    PRESET_NAMES,
    config_from_toml,
    get_preset,
    resolve_run,
)
from .objectives import list_problems
from .optimizers import run, write_trace_jsonl


def _seed_override(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("NVA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"NVA_SEED must be an integer, got {env!r}") from exc
    return None


def _gather_experiments(args):
    """(name, ExperimentConfig) pairs from --preset, --config, or a problem id."""
    if args.preset is not None:
        return get_preset(args.preset)
    if args.config is not None:
        cfg = config_from_toml(args.config)
        return [(Path(args.config).stem, cfg)]
    problem = getattr(args, "problem", None)
    if problem is not None:
        return [(problem, ExperimentConfig(problem=problem))]
    raise ValueError("nothing to run: give a problem id, --config, or --preset")


def cmd_optimize(args) -> int:
    experiments = _gather_experiments(args)
    seed = _seed_override(args)
    for name, cfg in experiments:
        run_config, _ = resolve_run(cfg)
        if seed is not None:
            run_config = replace(run_config, seed=seed)
        trace = run(run_config)
        print(
            f"{name}: problem={trace.problem} algorithm={trace.algorithm} "
            f"T={run_config.schedule.steps} seed={trace.seed}"
        )
        if trace.abort is not None:
            print(f"  aborted at t={trace.abort['t']}: {trace.abort['reason']}")
        state = trace.final_state
        print("  final weights: " + " ".join(f"{w:.4f}" for w in state.weights))
        print("  final means:")
        for k, mean in enumerate(state.means):
            coords = " ".join(f"{v: .4f}" for v in mean)
            print(f"    {k}: {coords}")
        counts = trace.eval_counts
        print(
            f"  evals: value={counts['value']} grad={counts['grad']} "
            f"hess={counts['hess']}  ({trace.elapsed:.2f}s)"
        )
        if args.out is not None:
            out = Path(args.out)
            if len(experiments) > 1:
                out = out / f"{name}.jsonl"
                out.parent.mkdir(parents=True, exist_ok=True)
            write_trace_jsonl(trace, out)
            print(f"  trace written to {out}")
        if trace.abort is not None:
            return 1
    return 0


def cmd_bench(args) -> int:
    experiments = _gather_experiments(args)
    seed = _seed_override(args)
    failed = False
    for name, cfg in experiments:
        run_config, options = resolve_run(cfg)
        if seed is not None:
            run_config = replace(run_config, seed=seed)
        out_dir = args.out if args.out is not None else options["out_dir"]
        result = run_benchmark(
            run_config,
            options["replicates"],
            epsilon=options["epsilon"],
            out_dir=out_dir,
            experiment=name,
            jobs=args.jobs,
        )
        m = result.metrics
        print(
            f"{name}: H={result.n_replicates} gpr={m['gpr']:.3f} "
            f"apr={m['apr']:.3f} gsr={m['gsr']:.3f} aborted={result.n_aborted}"
        )
        if result.n_aborted == result.n_replicates:
            failed = True
    return 1 if failed else 0


def cmd_list_problems(_args) -> int:
    rows = list_problems()
    header = f"{'id':<18} {'dim':>3} {'modes':>5} {'global':>6} {'tier':<9} {'algorithm':<10} {'K':>3} {'T':>6} {'budget':>7}"
    print(header)
    print("-" * len(header))
    for r in rows:
        budget = "-" if r["budget"] is None else str(r["budget"])
        print(
            f"{r['id']:<18} {r['dim']:>3} {r['n_modes']:>5} {r['n_global']:>6} "
            f"{r['tier']:<9} {r['algorithm']:<10} {r['K']:>3} {r['T']:>6} {budget:>7}"
        )
    return 0


def cmd_report(args) -> int:
    from .plotting import plot_metric_bars, plot_weight_trajectories

    root = Path(args.out)
    reports = []
    if root.is_dir():
        for report_path in sorted(root.glob("*/report.json")):
            with open(report_path) as fh:
                reports.append((report_path.parent, json.load(fh)))
    if not reports:
        print(f"no results under {root}", file=sys.stderr)
        return 1
    print(f"{'experiment':<28} {'H':>4} {'gpr':>6} {'apr':>6} {'gsr':>6} {'aborted':>8}")
    total_evals = np.zeros(3)
    for exp_dir, rep in reports:
        m = rep["metrics"]
        print(
            f"{rep['experiment']:<28} {rep['n_replicates']:>4} "
            f"{m['gpr']:>6.3f} {m['apr']:>6.3f} {m['gsr']:>6.3f} "
            f"{rep['n_aborted']:>8}"
        )
        mean = rep["eval_mean"]
        total_evals += rep["n_replicates"] * np.array(
            [mean["value"], mean["grad"], mean["hess"]]
        )
    print(
        f"total evaluations: value={int(total_evals[0])} "
        f"grad={int(total_evals[1])} hess={int(total_evals[2])}"
    )
    bars = root / "metrics.png"
    plot_metric_bars([rep for _, rep in reports], bars)
    print(f"figure written to {bars}")
    for exp_dir, rep in reports:
        first = exp_dir / "run-0.jsonl"
        if first.is_file():
            records = [json.loads(line) for line in first.read_text().splitlines() if line.strip()]
            if records:
                fig_path = exp_dir / "weights.png"
                plot_weight_trajectories(records, fig_path, title=rep["experiment"])
                print(f"figure written to {fig_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvagm",
        description="Multimodal optimization via annealed natural-gradient mixture search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run one replicate and print the final mixture")
    p_opt.add_argument("problem", nargs="?", help="registered problem id")
    p_opt.add_argument("--config", help="experiment TOML file")
    p_opt.add_argument("--preset", choices=PRESET_NAMES, help="named experiment battery")
    p_opt.add_argument("--seed", type=int, help="override the run seed")
    p_opt.add_argument("--out", help="write the trace JSONL here")

    p_bench = sub.add_parser("bench", help="run replicated experiments and score recovery")
    p_bench.add_argument("--config", help="experiment TOML file")
    p_bench.add_argument("--preset", choices=PRESET_NAMES, help="named experiment battery")
    p_bench.add_argument("--seed", type=int, help="override the run seed")
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel replicate workers")
    p_bench.add_argument("--out", help="results directory")

    sub.add_parser("list-problems", help="show the problem registry")

    p_rep = sub.add_parser("report", help="summarize a results directory and render figures")
    p_rep.add_argument("--out", required=True, help="results directory to summarize")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "optimize": cmd_optimize,
        "bench": cmd_bench,
        "list-problems": cmd_list_problems,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, KeyError, TypeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
