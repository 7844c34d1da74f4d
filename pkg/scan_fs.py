"""FS sym schedule candidates: find a stable (beta, rho1) giving GPR >= 0.95."""
import sys
import time
import warnings
import numpy as np
from dataclasses import replace
from nvagm.config import resolve_run, config_from_dict
from nvagm.objectives import get_problem
from nvagm.optimizers import run, Schedule

warnings.filterwarnings("ignore")
b = get_problem("sym-gmm")
GLOBALS = [np.asarray(m.location) for m in b.modes[:3]]
ALL = [np.asarray(m.location) for m in b.modes]


def found(means, locs):
    means = np.asarray(means)
    return sum(
        1 for loc in locs
        if np.any(np.max(np.abs(means - loc), axis=1) <= 0.1)
    )


def trial(label, K, sched, kappa=0, tau=0.0, reps=12, seed=0):
    base, _ = resolve_run(config_from_dict({
        "problem": "sym-gmm", "algorithm": "fs-nva-gm", "K": K, "B": 16,
        "utilities": {"kind": "cmaes", "eta": 0.25}}))
    sched = replace(sched, kappa=kappa, tau=tau)
    base = replace(base, schedule=sched)
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
    gpr = sum(gf) / (3 * reps)
    apr = sum(af) / (4 * reps)
    print(f"{label}: GPR={gpr:.3f} APR={apr:.3f} aborts={aborts} "
          f"({dt/reps:.1f}s/run)", flush=True)


which = sys.argv[1] if len(sys.argv) > 1 else "all"
mk = lambda **kw: Schedule(omega1=1.0, alpha=1.0, steps=5000, **kw)
if which in ("all", "k4"):
    trial("C k4 beta=0", 4, mk(rho1=0.1, beta=0.0))
    trial("C k4 beta=0 tau=1e-10", 4, mk(rho1=0.1, beta=0.0), tau=1e-10)
if which in ("all", "k3t"):
    trial("C k3 beta=0 tau=1e-10", 3, mk(rho1=0.1, beta=0.0), tau=1e-10)
    trial("C k2 beta=0 tau=1e-10", 2, mk(rho1=0.1, beta=0.0), tau=1e-10)
if which in ("all", "more"):
    trial("E k3 rho=0.05", 3, mk(rho1=0.05, beta=0.0), tau=1e-10)
    trial("F k3 rho=0.2", 3, mk(rho1=0.2, beta=0.0), tau=1e-10)
