"""Criterion-4 pre-check: ST d=4 K=16 T=200, NVA hessian tier + FS."""
import sys
import time
import warnings
import numpy as np
from dataclasses import replace
from nvagm.config import resolve_run, config_from_dict
from nvagm.objectives import get_problem
from nvagm.optimizers import run

warnings.filterwarnings("ignore")
b = get_problem("styblinski-tang-4")
ALL = [np.asarray(m.location) for m in b.modes]
GLOBALS = [np.asarray(m.location) for m in b.modes if m.is_global]
print(f"modes={len(ALL)} globals={len(GLOBALS)}", flush=True)


def found(means, locs):
    means = np.asarray(means)
    return sum(
        1 for loc in locs
        if np.any(np.max(np.abs(means - loc), axis=1) <= 0.1)
    )


def trial(label, algo, reps=12, seed=0, **over):
    d = {"problem": "styblinski-tang-4", "algorithm": algo, "K": 16}
    d.update(over)
    base, _ = resolve_run(config_from_dict(d))
    t0 = time.perf_counter()
    gf, af, aborts = [], [], 0
    for rep in range(reps):
        tr = run(replace(base, seed=seed, replicate=rep))
        if tr.abort is not None:
            aborts += 1
            gf.append(0)
            af.append(0)
            continue
        gf.append(found(tr.final_state.means, GLOBALS))
        af.append(found(tr.final_state.means, ALL))
    dt = time.perf_counter() - t0
    print(f"{label}: GPR={sum(gf)/(len(GLOBALS)*reps):.3f} "
          f"APR={sum(af)/(len(ALL)*reps):.3f} aborts={aborts} "
          f"({dt/reps:.1f}s/run)", flush=True)


which = sys.argv[1] if len(sys.argv) > 1 else "all"
if which in ("all", "nva"):
    trial("nva-gm hess", "nva-gm")
if which in ("all", "fs"):
    trial("fs cmaes", "fs-nva-gm", B=16, utilities={"kind": "cmaes", "B0": 4})
