"""Criterion 1 scan: sym K=4 T=10000, collect bijective runs under root seed 0."""
import warnings
import numpy as np
from dataclasses import replace
from itertools import permutations
from nvagm.config import resolve_run, config_from_dict
from nvagm.objectives import get_problem
from nvagm.optimizers import run

warnings.filterwarnings("ignore")
EPS = 0.1


def bijective(means, modes):
    means = np.asarray(means)
    locs = [np.asarray(m.location) for m in modes]
    hit = np.array([[np.max(np.abs(mu - loc)) <= EPS for loc in locs] for mu in means])
    if hit.shape[0] < len(locs):
        return None
    for perm in permutations(range(hit.shape[0]), len(locs)):
        if all(hit[perm[i], i] for i in range(len(locs))):
            return perm
    return None


b = get_problem("sym-gmm")
cfg, _ = resolve_run(config_from_dict({"problem": "sym-gmm", "K": 4, "T": 10000}))
print("cfg:", cfg.schedule, "B=", cfg.batch, "init box", cfg.init_lo, cfg.init_hi, flush=True)
n_bij = 0
for rep in range(24):
    tr = run(replace(cfg, seed=0, replicate=rep))
    perm = bijective(tr.final_state.means, b.modes)
    means = np.asarray(tr.final_state.means)
    w = []
    for m in b.modes:
        loc = np.asarray(m.location)
        mask = np.max(np.abs(means - loc), axis=1) <= EPS
        w.append(float(np.sum(tr.final_state.weights[mask])))
    tag = "BIJ" if perm is not None else ("ABORT" if tr.abort else "---")
    if perm is not None:
        n_bij += 1
    # modes[3] is the local one for sym-gmm
    ok = perm is not None and all(abs(x - 1 / 3) <= 0.05 for x in w[:3]) and w[3] < 0.05
    print(f"rep {rep:2d} {tag} w={np.round(w, 4)} weight_ok={ok} ({tr.elapsed:.1f}s)", flush=True)
    if n_bij >= 12:
        break
print("bijective:", n_bij)
