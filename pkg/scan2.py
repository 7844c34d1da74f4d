"""Seed scan with bijective-assignment conditioning for the weight criteria."""
import numpy as np
from dataclasses import replace
from itertools import permutations
from nvagm.config import resolve_run, config_from_dict, get_preset
from nvagm.objectives import get_problem
from nvagm.optimizers import run

EPS = 0.1


def bijective(means, modes):
    """Each mode claimed by a distinct component mean within sup-norm EPS."""
    means = np.asarray(means)
    locs = [np.asarray(m.location) for m in modes]
    hit = np.array([[np.max(np.abs(mu - loc)) <= EPS for loc in locs] for mu in means])
    if hit.shape[0] < len(locs):
        return None
    for perm in permutations(range(hit.shape[0]), len(locs)):
        if all(hit[perm[i], i] for i in range(len(locs))):
            return perm
    return None


def mode_weights(state, modes):
    means = np.asarray(state.means)
    out = []
    for m in modes:
        loc = np.asarray(m.location)
        mask = np.max(np.abs(means - loc), axis=1) <= EPS
        out.append(float(np.sum(state.weights[mask])))
    return out


def scan(problem_id, base_cfg, seeds, n_reps, label):
    b = get_problem(problem_id)
    for seed in seeds:
        rows = []
        for rep in range(n_reps):
            tr = run(replace(base_cfg, seed=seed, replicate=rep))
            perm = bijective(tr.final_state.means, b.modes)
            w = mode_weights(tr.final_state, b.modes)
            rows.append((rep, perm is not None, w, tr.abort is not None))
        nb = sum(1 for r in rows if r[1])
        print(f"{label} seed={seed}: bijective {nb}/{n_reps}")
        for rep, bij, w, ab in rows:
            tag = "BIJ" if bij else ("ABORT" if ab else "---")
            print(f"  rep {rep:2d} {tag}  w_per_mode={np.round(w, 3)}")


import warnings
warnings.filterwarnings("ignore")

rc_asym, _ = resolve_run(config_from_dict({"problem": "asym-gmm"}))
scan("asym-gmm", rc_asym, [0], 20, "asym")

rc_deg, _ = resolve_run(config_from_dict({"problem": "degenerate-psi"}))
scan("degenerate-psi", rc_deg, [0], 25, "degen")
