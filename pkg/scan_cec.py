"""Criterion-5 pre-check: CEC F1-F6 with bundle defaults, value-gap scoring."""
import sys
import time
import warnings
import numpy as np
from dataclasses import replace
from nvagm.bench import detect_value_gap, compute_metrics
from nvagm.config import resolve_run, config_from_dict
from nvagm.objectives import get_problem
from nvagm.optimizers import run

warnings.filterwarnings("ignore")


def trial(idx, reps=8, seed=0):
    name = f"cec-f{idx}"
    bundle = get_problem(name)
    base, options = resolve_run(config_from_dict({"problem": name}))
    t0 = time.perf_counter()
    fg, fa, aborts = [], [], 0
    for rep in range(reps):
        tr = run(replace(base, seed=seed, replicate=rep))
        if tr.abort is not None:
            aborts += 1
            fg.append(set())
            fa.append(set())
            continue
        g, a = detect_value_gap(
            bundle.objective, tr.final_state.means, bundle.modes, 0.1
        )
        fg.append(g)
        fa.append(a)
    dt = time.perf_counter() - t0
    n_glob = sum(1 for m in bundle.modes if m.is_global)
    met = compute_metrics(fg, fa, n_glob, len(bundle.modes))
    print(f"F{idx}: GPR={met['gpr']:.3f} GSR={met['gsr']:.3f} "
          f"aborts={aborts} ({dt/reps:.1f}s/run)", flush=True)


which = sys.argv[1] if len(sys.argv) > 1 else "all"
for idx in (1, 2, 3, 4, 5, 6):
    if which in ("all", str(idx)):
        trial(idx, reps=8 if idx != 6 else 4)
