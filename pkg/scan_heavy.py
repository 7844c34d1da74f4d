"""Single-run timings and sanity for criteria 3, 4, 5 before freezing acceptance."""
import time
import warnings
import numpy as np
from dataclasses import replace
from nvagm.config import resolve_run, config_from_dict, get_preset
from nvagm.objectives import get_problem
from nvagm.optimizers import run

warnings.filterwarnings("ignore")


def one(pid, overrides, label):
    cfg, extra = resolve_run(config_from_dict({"problem": pid, **overrides}))
    t0 = time.perf_counter()
    tr = run(replace(cfg, seed=0, replicate=0))
    dt = time.perf_counter() - t0
    means = np.asarray(tr.final_state.means)
    b = get_problem(pid)
    found = set()
    for i, m in enumerate(b.modes):
        if np.any(np.max(np.abs(means - np.asarray(m.location)), axis=1) <= 0.1):
            found.add(i)
    print(f"{label}: {dt:.1f}s evals={tr.eval_counts} abort={tr.abort} "
          f"modes_found={len(found)}/{len(b.modes)}", flush=True)
    return dt


# criterion 3: FS sym K=3 / K=4
one("sym-gmm", {"algorithm": "fs-nva-gm", "K": 3, "B": 16,
                "utilities": {"kind": "cmaes", "eta": 0.25}}, "C3 fs sym K=3")
one("sym-gmm", {"algorithm": "fs-nva-gm", "K": 4, "B": 16,
                "utilities": {"kind": "cmaes", "eta": 0.25}}, "C3 fs sym K=4")
# criterion 4: ST nva + fs, K=16 T=200
one("styblinski-tang-4", {"algorithm": "nva-gm", "K": 16}, "C4 nva st")
one("styblinski-tang-4", {"algorithm": "fs-nva-gm", "K": 16, "B": 16,
                          "utilities": {"kind": "cmaes", "eta": 0.25}}, "C4 fs st")
# criterion 5: cheapest and costliest CEC functions
one("cec-f1", {}, "C5 cec-f1")
one("cec-f6", {}, "C5 cec-f6")
