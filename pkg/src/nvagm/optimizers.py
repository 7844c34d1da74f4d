"""Annealed natural-gradient mixture search and the baseline drivers.

The main loop keeps a Gaussian mixture iterate and, once per iteration,
draws a fresh batch from every frozen component, estimates natural-gradient
directions for weights, means, and precisions, then rebuilds the state
atomically. Precisions move first; each mean update is preconditioned by
its component's NEW precision. Variants: raw-value estimators (nva-gm,
snga) and rank-shaped estimators (fs-nva-gm). psga and pcmaes are the
particle baselines run under the same bookkeeping.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .cmaes import cma_ask, cma_init, cma_tell
from .estimation import (
    AnnealedPotential,
    GradientEstimate,
    UtilityScheme,
    estimate_all,
    estimate_grad_pi,
    fs_estimate,
)
from .mixture import (
    GaussianComponent,
    MixtureState,
    mixture_logpdf,
    sample_component,
)
from .objectives import Objective, ProblemBundle, fill_derivatives, get_problem

__all__ = [
    "ALGORITHMS",
    "Schedule",
    "RunConfig",
    "RunAbort",
    "Trace",
    "CountingObjective",
    "rng_for",
    "iblr_precision_update",
    "nva_gm_step",
    "fs_nva_gm_step",
    "run",
    "write_trace_jsonl",
    "read_trace_jsonl",
]

ALGORITHMS = ("nva-gm", "fs-nva-gm", "snga", "psga", "pcmaes")

MAX_HALVINGS = 30


def rng_for(seed: int, rep: int, t: int, k: int) -> np.random.Generator:
    """Independent substream for (run seed, replicate, iteration, component).

    Iterations are 1-based in the main loops; t=0 is reserved for
    initialization draws so restarts and replicates never share a stream.
    """
    ss = np.random.SeedSequence(entropy=(int(seed), int(rep), int(t), int(k)))
    return np.random.Generator(np.random.Philox(ss))


# ------------------------------------------------------------------ schedules


@dataclass(frozen=True)
class Schedule:
    """Polynomial temperature decay with a coupled step-size ramp.

    omega(t) = omega1 * t^-alpha and rho(t) = rho1 * (omega1/omega(t))^beta
    for t = 1..steps. kappa iterations of burn-in leave precisions untouched;
    tau > 0 floors every post-update covariance spectrum at tau.
    """

    omega1: float
    alpha: float
    rho1: float
    beta: float
    steps: int
    kappa: int = 0
    tau: float = 0.0

    def __post_init__(self):
        if not self.omega1 > 0.0:
            raise ValueError("omega1 must be positive")
        if not self.rho1 > 0.0:
            raise ValueError("rho1 must be positive")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.kappa < 0 or self.tau < 0.0:
            raise ValueError("kappa and tau must be nonnegative")

    def omega_at(self, t: int) -> float:
        return self.omega1 * float(t) ** (-self.alpha)

    def rho_at(self, t: int) -> float:
        # rho1 * (omega1/omega_t)^beta, simplified
        return self.rho1 * float(t) ** (self.alpha * self.beta)


@dataclass(frozen=True)
class RunConfig:
    """Everything one replicate needs; problem is an id, bundle, or objective."""

    problem: object
    algorithm: str
    n_components: int
    batch: int
    schedule: Schedule
    mu_variant: int = 1
    s_variant: int = 2
    utilities: UtilityScheme = None
    init_means: np.ndarray = None
    init_lo: np.ndarray = None
    init_hi: np.ndarray = None
    sigma0: float = 1.0
    precision_rule: str = "ngd"
    fixed_omega: float = None
    sga_exponent: float = 0.55
    seed: int = 0
    replicate: int = 0
    snapshot_every: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.n_components < 1:
            raise ValueError("n_components must be at least 1")
        if self.batch < 1:
            raise ValueError("batch must be at least 1")
        if self.mu_variant not in (0, 1):
            raise ValueError(f"unknown mean-estimator variant {self.mu_variant!r}")
        if self.s_variant not in (0, 1, 2):
            raise ValueError(f"unknown precision-estimator variant {self.s_variant!r}")
        if self.precision_rule not in ("ngd", "iblr"):
            raise ValueError(f"unknown precision rule {self.precision_rule!r}")
        if not self.sigma0 > 0.0:
            raise ValueError("sigma0 must be positive")
        if self.seed < 0 or self.replicate < 0:
            raise ValueError("seed and replicate must be nonnegative")
        if self.algorithm == "fs-nva-gm":
            if self.utilities is None:
                raise ValueError("fs-nva-gm requires a utility scheme")
            if self.utilities.batch_size != self.batch:
                raise ValueError(
                    f"utility scheme sized {self.utilities.batch_size} "
                    f"but batch is {self.batch}"
                )
        if self.algorithm == "snga":
            if self.fixed_omega is None or not self.fixed_omega >= 0.0:
                raise ValueError("snga requires a fixed nonnegative temperature")


class RunAbort(RuntimeError):
    """Raised when a precision update cannot be kept positive definite."""

    def __init__(self, t, component, reason):
        super().__init__(f"aborted at t={t}, component {component}: {reason}")
        self.t = t
        self.component = component
        self.reason = reason


# ------------------------------------------------------------------ counting


class CountingObjective:
    """Wraps an objective so every evaluated row is tallied by order.

    Derivative synthesis (fill_derivatives) goes on top of the counted
    surface, so finite-difference fallbacks show up as the evaluations
    they actually spend.
    """

    def __init__(self, objective: Objective):
        self.inner = objective
        self.counts = {"value": 0, "grad": 0, "hess": 0}

        def tally(fn, key):
            if fn is None:
                return None

            def counted(x2d, _fn=fn, _key=key):
                self.counts[_key] += x2d.shape[0]
                return _fn(x2d)

            return counted

        self.objective = Objective(
            name=objective.name,
            dim=objective.dim,
            tier=objective.tier,
            value_fn=tally(objective.value_fn, "value"),
            grad_fn=tally(objective.grad_fn, "grad"),
            hess_fn=tally(objective.hess_fn, "hess"),
        )


# ------------------------------------------------------------------ updates


def _is_pd(mat: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(mat)
        return True
    except np.linalg.LinAlgError:
        return False


def iblr_precision_update(prec, grad_mat, rho) -> np.ndarray:
    """Precision step with the rho^2/2 curvature correction.

    Algebraically 0.5 * (S + (S - rho G) S^{-1} (S - rho G)), which stays in
    the positive semidefinite cone for any step size.
    """
    half = prec - rho * grad_mat
    out = 0.5 * (prec + half @ np.linalg.solve(prec, half))
    return 0.5 * (out + out.T)


def _floor_covariance(prec: np.ndarray, tau: float) -> np.ndarray:
    # spectral form of inv(inv(prec) + tau*I); w/(1+tau*w) stays finite and
    # caps the precision spectrum at 1/tau even for barely-PD inputs where
    # a matrix inverse would go indefinite
    w, v = np.linalg.eigh(0.5 * (prec + prec.T))
    w = np.clip(w, np.finfo(float).tiny, None)
    w = w / (1.0 + tau * w)
    return (v * w) @ v.T


def _apply_updates(state, est: GradientEstimate, rho, t, *, burn_in, tau, rule):
    """Rebuild the mixture from one iteration's estimates.

    Precision first (guarded, floored), then the mean preconditioned by the
    new precision at the full step size, then the weight logits.
    """
    new_comps = []
    halvings = 0
    for k, comp in enumerate(state.components):
        if burn_in:
            prec_new = comp.precision
        else:
            step = rho
            tries = 0
            while True:
                if rule == "iblr":
                    cand = iblr_precision_update(comp.precision, est.prec[k], step)
                else:
                    cand = comp.precision - step * est.prec[k]
                    cand = 0.5 * (cand + cand.T)
                if np.all(np.isfinite(cand)) and _is_pd(cand):
                    break
                tries += 1
                if tries > MAX_HALVINGS:
                    raise RunAbort(
                        t, k, "precision update left the positive-definite cone"
                    )
                step *= 0.5
            halvings += tries
            prec_new = _floor_covariance(cand, tau) if tau > 0.0 else cand
        try:
            mean_new = comp.mean + rho * np.linalg.solve(prec_new, est.mu[k])
        except np.linalg.LinAlgError:
            # passed the PD guard yet numerically rank-deficient
            raise RunAbort(t, k, "singular precision in the mean update")
        new_comps.append(GaussianComponent(mean_new, prec_new))
    logits_new = state.logits + rho * est.pi
    return MixtureState(logits_new, tuple(new_comps)), halvings


@dataclass(frozen=True)
class StepContext:
    """Per-run constants shared by every iteration."""

    objective: Objective  # counted (and possibly synthesized) surface
    raw_objective: Objective  # uncounted handle for trace diagnostics
    config: RunConfig
    schedule: Schedule

    def draw(self, state, t):
        cfg = self.config
        return [
            sample_component(state, k, cfg.batch, rng_for(cfg.seed, cfg.replicate, t, k))
            for k in range(state.n_components)
        ]


def _schedule_point(ctx: StepContext, t: int):
    if ctx.config.algorithm == "snga":
        # constant temperature and step size
        return ctx.config.fixed_omega, ctx.schedule.rho1
    return ctx.schedule.omega_at(t), ctx.schedule.rho_at(t)


def _mean_potential(ctx, ap, state, samples, omega, values_cached):
    """Batch-mean potential for the trace; cached values when the estimators
    already paid for them, otherwise the uncounted handle."""
    if values_cached:
        return float(np.mean([ap.value_batch(s).mean() for s in samples]))
    total = 0.0
    for s in samples:
        vals = np.asarray(ctx.raw_objective.value(s), dtype=float)
        if omega != 0.0:
            vals = vals - omega * mixture_logpdf(state, s)
        total += vals.mean()
    return total / len(samples)


def nva_gm_step(state: MixtureState, t: int, ctx: StepContext):
    """One annealed natural-gradient iteration with raw-value estimators."""
    cfg = ctx.config
    omega, rho = _schedule_point(ctx, t)
    ap = AnnealedPotential(ctx.objective, omega, state)
    samples = ctx.draw(state, t)
    est = estimate_all(ap, samples, cfg.mu_variant, cfg.s_variant)
    new_state, halvings = _apply_updates(
        state, est, rho, t,
        burn_in=(t <= ctx.schedule.kappa),
        tau=ctx.schedule.tau,
        rule=cfg.precision_rule,
    )
    values_cached = (
        state.n_components > 1 or cfg.mu_variant == 0 or cfg.s_variant == 0
    )
    fbar = _mean_potential(ctx, ap, state, samples, omega, values_cached)
    return new_state, {"omega": omega, "rho": rho, "fbar": fbar, "halvings": halvings}


def fs_nva_gm_step(state: MixtureState, t: int, ctx: StepContext):
    """One iteration with rank-shaped mean/precision estimates.

    The weight update is untouched: raw-value logit gradients on the same
    batches that the rank shaping already evaluated.
    """
    cfg = ctx.config
    omega, rho = _schedule_point(ctx, t)
    ap = AnnealedPotential(ctx.objective, omega, state)
    samples = ctx.draw(state, t)
    kk = state.n_components
    mu = np.empty((kk, state.dim))
    prec = np.empty((kk, state.dim, state.dim))
    for k in range(kk):
        mu[k], prec[k] = fs_estimate(ap, k, samples[k], cfg.utilities)
    pi = np.array(
        [estimate_grad_pi(ap, samples[k], samples[-1]) for k in range(kk - 1)]
    )
    est = GradientEstimate(pi=pi, mu=mu, prec=prec, samples_used=kk * cfg.batch)
    new_state, halvings = _apply_updates(
        state, est, rho, t,
        burn_in=(t <= ctx.schedule.kappa),
        tau=ctx.schedule.tau,
        rule=cfg.precision_rule,
    )
    fbar = _mean_potential(ctx, ap, state, samples, omega, True)
    return new_state, {"omega": omega, "rho": rho, "fbar": fbar, "halvings": halvings}


# ------------------------------------------------------------------ traces


@dataclass
class Trace:
    """Run log: periodic snapshots, final iterate, and the evaluation bill."""

    algorithm: str
    problem: str
    seed: int
    replicate: int
    records: list = field(default_factory=list)
    final_state: MixtureState = None
    eval_counts: dict = field(default_factory=dict)
    abort: dict = None
    elapsed: float = 0.0


def _spectrum(comp: GaussianComponent):
    evals = np.linalg.eigvalsh(comp.precision)
    return 1.0 / evals.max(), 1.0 / evals.min()  # covariance extremes


def _snapshot(t, omega, rho, state, fbar, with_spectrum=True):
    if with_spectrum:
        pairs = [_spectrum(c) for c in state.components]
        eig_min = [float(lo) for lo, _ in pairs]
        eig_max = [float(hi) for _, hi in pairs]
    else:
        eig_min = None
        eig_max = None
    return {
        "t": int(t),
        "omega": None if omega is None else float(omega),
        "rho": None if rho is None else float(rho),
        "weights": [float(w) for w in state.weights],
        "means": [[float(v) for v in m] for m in state.means],
        "eig_min": eig_min,
        "eig_max": eig_max,
        "fbar": None if fbar is None else float(fbar),
    }


def write_trace_jsonl(trace: Trace, path) -> None:
    with open(path, "w") as fh:
        for rec in trace.records:
            fh.write(json.dumps(rec) + "\n")


def read_trace_jsonl(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


# ------------------------------------------------------------------ run loops


def _resolve_problem(config: RunConfig):
    prob = config.problem
    if isinstance(prob, str):
        prob = get_problem(prob)
    if isinstance(prob, ProblemBundle):
        objective, pid = prob.objective, prob.pid
        lo, hi = prob.init_lo, prob.init_hi
    elif isinstance(prob, Objective):
        objective, pid = prob, prob.name
        lo = hi = None
    else:
        raise TypeError(f"cannot interpret problem {prob!r}")
    if config.init_lo is not None:
        lo = np.asarray(config.init_lo, dtype=float)
    if config.init_hi is not None:
        hi = np.asarray(config.init_hi, dtype=float)
    return objective, pid, lo, hi


def _initial_means(config: RunConfig, dim, lo, hi) -> np.ndarray:
    if config.init_means is not None:
        means = np.asarray(config.init_means, dtype=float)
        if means.shape != (config.n_components, dim):
            raise ValueError(
                f"init_means must have shape ({config.n_components}, {dim}), "
                f"got {means.shape}"
            )
        return means.copy()
    if lo is None or hi is None:
        raise ValueError("need init_means or an init box")
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (dim,))
    rng = rng_for(config.seed, config.replicate, 0, 0)
    return rng.uniform(lo, hi, size=(config.n_components, dim))


def _prepare_surface(objective: Objective, config: RunConfig) -> Objective:
    algo = config.algorithm
    fs = algo == "fs-nva-gm"
    needs_grad = algo == "psga" or (
        algo in ("nva-gm", "snga") and (config.mu_variant == 1 or config.s_variant == 1)
    )
    needs_hess = algo in ("nva-gm", "snga") and config.s_variant == 2
    if fs or algo == "pcmaes":
        return objective
    if (needs_grad and objective.grad_fn is None) or (
        needs_hess and objective.hess_fn is None
    ):
        return fill_derivatives(objective)
    return objective


def _snapshot_stride(config: RunConfig, steps: int) -> int:
    if config.snapshot_every > 0:
        return config.snapshot_every
    return max(1, steps // 200)


def run(config: RunConfig) -> Trace:
    """Execute one replicate and return its trace. Aborts are recorded, not
    raised: the trace keeps the last valid state and the diagnostic."""
    started = time.perf_counter()
    raw, pid, lo, hi = _resolve_problem(config)
    counted = CountingObjective(raw)
    surface = _prepare_surface(counted.objective, config)
    trace = Trace(config.algorithm, pid, config.seed, config.replicate)

    if config.algorithm == "pcmaes":
        _run_pcmaes(config, raw, surface, lo, hi, trace)
    elif config.algorithm == "psga":
        _run_psga(config, raw, surface, lo, hi, trace)
    else:
        _run_nva(config, raw, surface, lo, hi, trace)

    trace.eval_counts = dict(counted.counts)
    trace.elapsed = time.perf_counter() - started
    return trace


def _run_nva(config, raw, surface, lo, hi, trace):
    schedule = config.schedule
    dim = surface.dim
    means = _initial_means(config, dim, lo, hi)
    prec0 = np.eye(dim) / config.sigma0**2
    state = MixtureState(
        np.zeros(config.n_components - 1),
        tuple(GaussianComponent(m, prec0) for m in means),
    )
    ctx = StepContext(surface, raw, config, schedule)
    step = fs_nva_gm_step if config.algorithm == "fs-nva-gm" else nva_gm_step
    stride = _snapshot_stride(config, schedule.steps)
    try:
        for t in range(1, schedule.steps + 1):
            state, info = step(state, t, ctx)
            if t % stride == 0 or t == schedule.steps:
                trace.records.append(
                    _snapshot(t, info["omega"], info["rho"], state, info["fbar"])
                )
    except RunAbort as exc:
        trace.abort = {"t": exc.t, "component": exc.component, "reason": exc.reason}
    trace.final_state = state


def _run_psga(config, raw, surface, lo, hi, trace):
    """Independent gradient-ascent particles under the shared bookkeeping."""
    schedule = config.schedule
    dim = surface.dim
    particles = _initial_means(config, dim, lo, hi)
    stride = _snapshot_stride(config, schedule.steps)
    kk = config.n_components
    for t in range(1, schedule.steps + 1):
        g = np.asarray(surface.grad(particles), dtype=float)
        rho = schedule.rho1 * float(t) ** (-config.sga_exponent)
        particles = particles + rho * g
        if t % stride == 0 or t == schedule.steps:
            fbar = float(np.mean(np.asarray(raw.value(particles), dtype=float)))
            state = _particle_state(particles)
            trace.records.append(
                _snapshot(t, None, rho, state, fbar, with_spectrum=False)
            )
    trace.final_state = _particle_state(particles)


def _particle_state(particles) -> MixtureState:
    eye = np.eye(particles.shape[1])
    return MixtureState(
        np.zeros(particles.shape[0] - 1),
        tuple(GaussianComponent(p, eye) for p in particles),
    )


def _run_pcmaes(config, raw, surface, lo, hi, trace):
    """K independent CMA-ES instances; ranks maximize the raw objective."""
    schedule = config.schedule
    dim = surface.dim
    means = _initial_means(config, dim, lo, hi)
    if config.utilities is not None:
        mu_sel = int(np.count_nonzero(config.utilities.values))
    else:
        mu_sel = max(1, config.batch // 4)
    instances = [
        cma_init(means[k], config.sigma0, config.batch, mu_sel)
        for k in range(config.n_components)
    ]
    stride = _snapshot_stride(config, schedule.steps)
    try:
        for t in range(1, schedule.steps + 1):
            gen_vals = []
            for k, inst in enumerate(instances):
                cands = cma_ask(inst, rng_for(config.seed, config.replicate, t, k))
                vals = np.asarray(surface.value(cands), dtype=float)
                cma_tell(inst, vals)
                gen_vals.append(vals.mean())
            if t % stride == 0 or t == schedule.steps:
                state = _cma_state(instances)
                trace.records.append(
                    _snapshot(t, None, None, state, float(np.mean(gen_vals)))
                )
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        trace.abort = {"t": t, "component": k, "reason": str(exc)}
    trace.final_state = _cma_state(instances)


def _cma_state(instances) -> MixtureState:
    comps = []
    for inst in instances:
        cov = inst.sigma**2 * inst.cov
        try:
            prec = np.linalg.inv(0.5 * (cov + cov.T))
            comp = GaussianComponent(inst.mean, 0.5 * (prec + prec.T))
        except (np.linalg.LinAlgError, ValueError):
            comp = GaussianComponent(inst.mean, np.eye(inst.mean.size))
        comps.append(comp)
    return MixtureState(np.zeros(len(comps) - 1), tuple(comps))
