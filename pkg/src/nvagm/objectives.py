"""Objective functions, their mode inventories, and the problem registry.

An Objective bundles a log-objective l with whatever derivatives it
supports. The tier string records the highest derivative order available
analytically: "value", "gradient", or "hessian". Estimators choose their
default variant from the tier; fill_derivatives synthesizes the missing
orders by central differences when a caller insists on a higher tier.

All callables follow the row convention: (d,) in, scalar out; (n, d) in,
(n,) out (and (n, d, d) for Hessians).
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import cec2013
from . import mixture as mx

__all__ = [
    "Objective",
    "QuadraticObjective",
    "ModeSpec",
    "ProblemBundle",
    "finite_diff_grad",
    "finite_diff_hess",
    "fill_derivatives",
    "refine_mode",
    "make_quadratic",
    "make_gmm_objective",
    "make_symmetric_gmm",
    "make_asymmetric_gmm",
    "make_styblinski_tang",
    "make_degenerate_psi",
    "pyramidal_extend",
    "make_cec_suite",
    "get_problem",
    "list_problems",
    "PROBLEM_IDS",
]

TIERS = ("value", "gradient", "hessian")


def _rows(x):
    x = np.asarray(x, dtype=float)
    return (np.atleast_2d(x), x.ndim == 1)


@dataclass(frozen=True)
class Objective:
    name: str
    dim: int
    tier: str
    value_fn: callable = field(repr=False)
    grad_fn: callable = field(default=None, repr=False)
    hess_fn: callable = field(default=None, repr=False)

    def __post_init__(self):
        if self.tier not in TIERS:
            raise ValueError(f"unknown tier {self.tier!r}")
        if self.tier in ("gradient", "hessian") and self.grad_fn is None:
            raise ValueError("gradient tier requires grad_fn")
        if self.tier == "hessian" and self.hess_fn is None:
            raise ValueError("hessian tier requires hess_fn")

    def value(self, x):
        x2d, single = _rows(x)
        out = self.value_fn(x2d)
        return float(out[0]) if single else out

    def grad(self, x):
        if self.grad_fn is None:
            raise ValueError(f"objective {self.name!r} has no analytic gradient")
        x2d, single = _rows(x)
        out = self.grad_fn(x2d)
        return out[0] if single else out

    def hess(self, x):
        if self.hess_fn is None:
            raise ValueError(f"objective {self.name!r} has no analytic Hessian")
        x2d, single = _rows(x)
        out = self.hess_fn(x2d)
        return out[0] if single else out


@dataclass(frozen=True)
class QuadraticObjective(Objective):
    center: np.ndarray = None
    matrix: np.ndarray = None

    def gaussian_expectation(self, mean, cov):
        """E[l(x)] under N(mean, cov), closed form."""
        delta = np.asarray(mean, float) - self.center
        return float(
            -0.5 * (delta @ self.matrix @ delta + np.trace(self.matrix @ cov))
        )


@dataclass(frozen=True)
class ModeSpec:
    location: np.ndarray
    is_global: bool
    value: float
    hessian: np.ndarray = None

    def __post_init__(self):
        loc = np.array(self.location, dtype=float)
        loc.setflags(write=False)
        object.__setattr__(self, "location", loc)
        if self.hessian is not None:
            h = np.array(self.hessian, dtype=float)
            h.setflags(write=False)
            object.__setattr__(self, "hessian", h)


# ------------------------------------------------------------------ finite differences


def finite_diff_grad(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def finite_diff_hess(f, x, h=1e-4):
    x = np.asarray(x, dtype=float)
    d = x.size
    out = np.zeros((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        out[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            out[i, j] = out[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h**2)
    return out


def fill_derivatives(obj: Objective, step=1e-5) -> Objective:
    """Return an objective with grad/hess present, synthesized if missing.

    Synthesized derivatives are central differences of the best analytic
    order available (Hessian from the analytic gradient when there is one).
    The tier label is preserved so callers can still see what is exact.
    """
    grad_fn = obj.grad_fn
    if grad_fn is None:
        def grad_fn(x2d, _o=obj):
            return np.stack(
                [finite_diff_grad(lambda z: _o.value(z), row, step) for row in x2d]
            )

    hess_fn = obj.hess_fn
    if hess_fn is None:
        if obj.grad_fn is not None:
            def hess_fn(x2d, _o=obj):
                out = np.empty((x2d.shape[0], _o.dim, _o.dim))
                for n, row in enumerate(x2d):
                    cols = np.empty((_o.dim, _o.dim))
                    for j in range(_o.dim):
                        e = np.zeros(_o.dim)
                        e[j] = step
                        cols[:, j] = (_o.grad(row + e) - _o.grad(row - e)) / (2 * step)
                    out[n] = 0.5 * (cols + cols.T)
                return out
        else:
            def hess_fn(x2d, _o=obj):
                return np.stack(
                    [finite_diff_hess(lambda z: _o.value(z), row, 1e-4) for row in x2d]
                )

    return replace(obj, grad_fn=grad_fn, hess_fn=hess_fn)


# ------------------------------------------------------------------ factories


def make_quadratic(center, matrix) -> QuadraticObjective:
    """l(x) = -(x - m)^T A (x - m) / 2 with A positive definite."""
    m = np.asarray(center, dtype=float)
    a = np.asarray(matrix, dtype=float)
    np.linalg.cholesky(a)  # rejects non-PD early

    def value_fn(x2d):
        delta = x2d - m
        return -0.5 * np.einsum("ij,jk,ik->i", delta, a, delta)

    def grad_fn(x2d):
        return -(x2d - m) @ a

    def hess_fn(x2d):
        return np.broadcast_to(-a, (x2d.shape[0], m.size, m.size)).copy()

    return QuadraticObjective(
        name="quadratic",
        dim=m.size,
        tier="hessian",
        value_fn=value_fn,
        grad_fn=grad_fn,
        hess_fn=hess_fn,
        center=m,
        matrix=a,
    )


def make_gmm_objective(weights, means, covariances, name="gmm") -> Objective:
    """Log-density of a fixed Gaussian mixture as the objective."""
    covs = [np.asarray(c, dtype=float) for c in covariances]
    precs = [np.linalg.inv(c) for c in covs]
    comps = tuple(
        mx.GaussianComponent(np.asarray(m, float), p) for m, p in zip(means, precs)
    )
    target = mx.MixtureState.from_weights(np.asarray(weights, float), comps)

    return Objective(
        name=name,
        dim=target.dim,
        tier="hessian",
        value_fn=lambda x2d: mx.mixture_logpdf(target, x2d),
        grad_fn=lambda x2d: mx.mixture_logpdf_grad(target, x2d),
        hess_fn=lambda x2d: mx.mixture_logpdf_hess(target, x2d),
    )


def refine_mode(obj: Objective, x0, tol=1e-12, max_iter=100):
    """Polish a stationary-point estimate of a smooth objective by damped Newton."""
    filled = fill_derivatives(obj)
    x = np.asarray(x0, dtype=float).copy()
    for _ in range(max_iter):
        g = filled.grad(x)
        if np.linalg.norm(g) < tol:
            break
        h = filled.hess(x)
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            step = g / max(np.linalg.norm(g), 1.0)
        # keep to ascent: halve until the value does not decrease
        # (up to float noise at the value's own scale)
        v0 = filled.value(x)
        noise = 1e-12 * max(1.0, abs(v0))
        scale = 1.0
        for _ in range(40):
            x_new = x + scale * step
            if filled.value(x_new) >= v0 - noise:
                break
            scale *= 0.5
        if np.linalg.norm(x_new - x) < 1e-14:
            break
        x = x_new
    return x


def _mode_from(obj, x0, is_global):
    loc = refine_mode(obj, x0)
    filled = fill_derivatives(obj)
    return ModeSpec(
        location=loc, is_global=is_global, value=obj.value(loc), hessian=filled.hess(loc)
    )


def make_symmetric_gmm():
    """Three-fold symmetric mixture log-density with 3 tied global modes.

    Component means sit on the unit circle at angles 90, 210, 330 degrees;
    covariances 0.54 I, equal weights. The overlap pulls the global modes
    inward to roughly 0.511 times the means and creates a shallow local
    mode at the origin.
    """
    angles = [np.pi / 2 + 2.0 * np.pi * k / 3.0 for k in (1, 2, 3)]
    gammas = [np.array([np.sin(a), np.cos(a)]) for a in angles]
    obj = make_gmm_objective(
        np.full(3, 1.0 / 3.0),
        gammas,
        [0.54 * np.eye(2)] * 3,
        name="sym-gmm",
    )
    modes = [_mode_from(obj, 0.511 * g, True) for g in gammas]
    modes.append(_mode_from(obj, np.zeros(2), False))
    return obj, modes


def make_asymmetric_gmm():
    """Anisotropic three-component mixture with two tied global modes.

    The two outer components (means (-1, 0) and (1, 0), covariances
    diag(0.03, 0.3) and diag(0.005, 0.9)) have their weights chosen so the
    two density peaks are exactly equal; the broad center component (weight
    0.1, covariance diag(0.3, 0.6)) forms a much lower local mode.
    """
    covs = [np.diag([0.03, 0.3]), np.diag([0.3, 0.6]), np.diag([0.005, 0.9])]
    s1 = np.sqrt(np.linalg.det(covs[0]))
    s3 = np.sqrt(np.linalg.det(covs[2]))
    w1 = 0.9 * s1 / (s1 + s3)
    weights = np.array([w1, 0.1, 0.9 - w1])
    means = [np.array([-1.0, 0.0]), np.array([0.0, 0.0]), np.array([1.0, 0.0])]
    obj = make_gmm_objective(weights, means, covs, name="asym-gmm")
    modes = [
        _mode_from(obj, means[0], True),
        _mode_from(obj, means[2], True),
        _mode_from(obj, means[1], False),
    ]
    return obj, modes


def make_styblinski_tang(dim=4):
    """Separable quartic with 2^dim local maxima, exactly one global."""

    def value_fn(x2d):
        return -0.5 * (x2d**4 - 16.0 * x2d**2 + 5.0 * x2d).sum(axis=1)

    def grad_fn(x2d):
        return -0.5 * (4.0 * x2d**3 - 32.0 * x2d + 5.0)

    def hess_fn(x2d):
        n, d = x2d.shape
        out = np.zeros((n, d, d))
        diag = -6.0 * x2d**2 + 16.0
        for i in range(d):
            out[:, i, i] = diag[:, i]
        return out

    obj = Objective(
        name=f"styblinski-tang-{dim}",
        dim=dim,
        tier="hessian",
        value_fn=value_fn,
        grad_fn=grad_fn,
        hess_fn=hess_fn,
    )

    # stationary points of the 1-d factor: roots of 4 x^3 - 32 x + 5;
    # the outer two are maxima, the global branch is the negative one
    roots = np.sort(np.roots([4.0, 0.0, -32.0, 5.0]).real)
    x_lo, x_hi = roots[0], roots[2]
    modes = []
    for signs in itertools.product([x_lo, x_hi], repeat=dim):
        loc = np.array(signs)
        modes.append(
            ModeSpec(
                location=loc,
                is_global=bool(np.all(loc == x_lo)),
                value=obj.value(loc),
                hessian=obj.hess(loc),
            )
        )
    return obj, modes


def _psi(t):
    return np.select(
        [t < -2.0, t <= 2.0],
        [
            -((t + 3.0) ** 4) - 1.0,
            -(t**3) / 8.0 + 0.75 * t**2 + 0.5 * t - 5.0,
        ],
        default=-((t - 3.0) ** 2) - 1.0,
    )


def _psi_prime(t):
    return np.select(
        [t < -2.0, t <= 2.0],
        [
            -4.0 * (t + 3.0) ** 3,
            -0.375 * t**2 + 1.5 * t + 0.5,
        ],
        default=-2.0 * (t - 3.0),
    )


def make_degenerate_psi():
    """Two tied global modes, one with a singular Hessian.

    l(x) = psi(x1) (x2^2 + 1) where psi is a C^1 piecewise polynomial with
    maxima psi(-3) = psi(3) = -1; the quartic branch makes the mode at
    (-3, 0) flat to second order along x1. Only value and gradient are
    exposed (the second derivative jumps at the seams).
    """

    def value_fn(x2d):
        return _psi(x2d[:, 0]) * (x2d[:, 1] ** 2 + 1.0)

    def grad_fn(x2d):
        t, u = x2d[:, 0], x2d[:, 1]
        return np.stack(
            [_psi_prime(t) * (u**2 + 1.0), 2.0 * u * _psi(t)], axis=1
        )

    obj = Objective(
        name="degenerate-psi", dim=2, tier="gradient", value_fn=value_fn, grad_fn=grad_fn
    )
    modes = [
        ModeSpec(np.array([-3.0, 0.0]), True, -1.0, np.diag([0.0, -2.0])),
        ModeSpec(np.array([3.0, 0.0]), True, -1.0, np.diag([-2.0, -2.0])),
    ]
    return obj, modes


def pyramidal_extend(obj: Objective, lo, hi, amplitude) -> Objective:
    """Tile a box-bounded objective over all of R^d with a sawtooth penalty.

    Points fold into the box by generalized Euclidean division of x - lo by
    the box widths; each cell step away costs one amplitude. Identity on
    [lo, hi); value-only tier.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = hi - lo
    if np.any(width <= 0):
        raise ValueError("box must have positive widths")
    amplitude = float(amplitude)

    def value_fn(x2d):
        y = x2d - lo
        q = np.floor(y / width)
        inside = lo + (y - q * width)
        return obj.value_fn(inside) - amplitude * np.abs(q).sum(axis=1)

    return Objective(
        name=f"{obj.name}-tiled", dim=obj.dim, tier="value", value_fn=value_fn
    )


# ------------------------------------------------------------------ CEC suite


@dataclass(frozen=True)
class CecProblem:
    index: int
    raw: Objective
    objective: Objective  # tiled extension actually searched
    lo: np.ndarray
    hi: np.ndarray
    amplitude: float
    modes: tuple
    n_global: int
    budget: int


def _bounded_polish(fn, x0, lo, hi):
    from scipy.optimize import Bounds, minimize

    res = minimize(
        lambda z: -fn(z[None])[0],
        x0,
        method="L-BFGS-B",
        bounds=Bounds(lo, hi),
        options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500},
    )
    # L-BFGS-B with numeric gradients stalls around |g| ~ 1e-5 on stiff
    # functions; a couple of finite-difference Newton steps finish the job
    x = np.clip(res.x, lo, hi)
    if np.all(x > lo + 1e-9) and np.all(x < hi - 1e-9):
        bare = Objective("polish", lo.size, "value", value_fn=fn)
        x = np.clip(refine_mode(bare, x, tol=1e-9, max_iter=25), lo, hi)
    return x


def _shubert_global_modes(lo, hi):
    # dense grid, strict local maxima, polish survivors, keep the tied best
    n = 1001
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = cec2013.F6(np.stack([gx.ravel(), gy.ravel()], axis=1)).reshape(n, n)
    pad = np.pad(vals, 1, constant_values=-np.inf)
    neigh = np.stack(
        [
            pad[1 + di : n + 1 + di, 1 + dj : n + 1 + dj]
            for di in (-1, 0, 1)
            for dj in (-1, 0, 1)
            if (di, dj) != (0, 0)
        ]
    ).max(axis=0)
    mask = (vals > neigh) & (vals > vals.max() - 30.0)
    cand = np.stack([gx[mask], gy[mask]], axis=1)
    polished = np.array([_bounded_polish(cec2013.F6, c, lo, hi) for c in cand])
    pvals = cec2013.F6(polished)
    best = pvals.max()
    keep = polished[pvals > best - 1e-6 * abs(best)]
    out = []
    for p in keep:
        if all(np.linalg.norm(p - q) > 1e-4 for q in out):
            out.append(p)
    return sorted(out, key=lambda p: (p[0], p[1]))


# per-function run settings: (I, T, K, B, omega1, alpha, rho1, beta, kappa)
CEC_RUN_TABLE = {
    1: (2, 500, 2, 16, 1e5, 2.0, 1e-3, 0.8, 0),
    2: (5, 2000, 5, 32, 20.0, 1.0, 1e-3, 0.9, 0),
    3: (1, 2000, 1, 32, 20.0, 1.0, 1e-3, 0.9, 0),
    4: (4, 2000, 4, 16, 2e6, 1.8, 1e-4, 0.7, 50),
    5: (2, 2000, 2, 16, 1e4, 2.0, 1e-5, 0.8, 0),
    6: (18, 2000, 18, 16, 1e6, 1.8, 1e-5, 0.8, 50),
}

CEC_BUDGETS = {1: 16000, 2: 320000, 3: 64000, 4: 130000, 5: 64000, 6: 580000}


@functools.lru_cache(maxsize=1)
def make_cec_suite():
    """The six classic niching benchmarks wrapped with the tiled extension."""
    fns = {1: cec2013.F1, 2: cec2013.F2, 3: cec2013.F3, 4: cec2013.F4, 5: cec2013.F5, 6: cec2013.F6}
    suite = {}
    for idx, fn in fns.items():
        lo, hi = cec2013.CEC_DOMAINS[idx]
        d = lo.size
        raw = Objective(name=f"cec-f{idx}", dim=d, tier="value", value_fn=fn)
        # amplitude = value range on a 1001-per-axis grid
        if d == 1:
            grid = np.linspace(lo[0], hi[0], 1001)[:, None]
        else:
            xs = np.linspace(lo[0], hi[0], 1001)
            ys = np.linspace(lo[1], hi[1], 1001)
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
        gvals = fn(grid)
        amplitude = float(gvals.max() - gvals.min())

        if idx == 6:
            locs = _shubert_global_modes(lo, hi)
        elif idx == 1:
            locs = cec2013.CEC_MODE_SEEDS[1]  # boundary peaks, exact
        else:
            locs = [
                _bounded_polish(fn, seed, lo, hi)
                for seed in cec2013.CEC_MODE_SEEDS[idx]
            ]
        modes = tuple(
            ModeSpec(location=p, is_global=True, value=float(fn(np.atleast_2d(p))[0]))
            for p in locs
        )
        n_global = cec2013.CEC_N_GLOBAL[idx]
        if len(modes) != n_global:
            raise RuntimeError(
                f"cec-f{idx}: found {len(modes)} global modes, expected {n_global}"
            )
        suite[idx] = CecProblem(
            index=idx,
            raw=raw,
            objective=pyramidal_extend(raw, lo, hi, amplitude),
            lo=lo,
            hi=hi,
            amplitude=amplitude,
            modes=modes,
            n_global=n_global,
            budget=CEC_BUDGETS[idx],
        )
    return suite


# ------------------------------------------------------------------ registry


@dataclass(frozen=True)
class ProblemBundle:
    pid: str
    objective: Objective
    modes: tuple
    defaults: dict
    detection: dict
    init_lo: np.ndarray
    init_hi: np.ndarray
    budget: int = None

    @property
    def n_global(self):
        return sum(1 for m in self.modes if m.is_global)

    @property
    def n_modes(self):
        return len(self.modes)


PROBLEM_IDS = [
    "sym-gmm",
    "asym-gmm",
    "styblinski-tang-4",
    "degenerate-psi",
    "cec-f1",
    "cec-f2",
    "cec-f3",
    "cec-f4",
    "cec-f5",
    "cec-f6",
]

_GMM_DEFAULTS = dict(
    algorithm="nva-gm", B=4, mu_variant=1, s_variant=2,
    kappa=0, tau=0.0, sigma0=1.0, epsilon=0.1,
)


_FS_GMM = dict(
    beta=0.0, tau=1e-10, B=16, utilities={"kind": "cmaes", "B0": 4},
)


def _bundle_sym():
    obj, modes = make_symmetric_gmm()
    defaults = dict(
        _GMM_DEFAULTS, K=4, T=5000, omega1=1.0, alpha=1.0, rho1=0.1, beta=0.8,
        fs=_FS_GMM,
    )
    return ProblemBundle(
        "sym-gmm", obj, tuple(modes), defaults,
        {"kind": "rectangle", "epsilon": 0.1},
        np.array([-2.0, -2.0]), np.array([2.0, 2.0]),
    )


def _bundle_asym():
    obj, modes = make_asymmetric_gmm()
    defaults = dict(
        _GMM_DEFAULTS, K=3, T=1000, omega1=100.0, alpha=1.0, rho1=1e-3, beta=0.8,
        fs=dict(_FS_GMM, rho1=0.1),
    )
    return ProblemBundle(
        "asym-gmm", obj, tuple(modes), defaults,
        {"kind": "rectangle", "epsilon": 0.1},
        np.array([-2.0, -2.0]), np.array([2.0, 2.0]),
    )


def _bundle_st():
    obj, modes = make_styblinski_tang(4)
    defaults = dict(
        _GMM_DEFAULTS, K=16, T=200, omega1=4e4, alpha=2.0, rho1=1e-4, beta=0.5,
        fs={"B": 16, "utilities": {"kind": "cmaes", "B0": 4}},
    )
    return ProblemBundle(
        "styblinski-tang-4", obj, tuple(modes), defaults,
        {"kind": "rectangle", "epsilon": 0.1},
        np.full(4, -4.0), np.full(4, 4.0),
    )


def _bundle_degenerate():
    obj, modes = make_degenerate_psi()
    defaults = dict(
        _GMM_DEFAULTS, K=2, T=50, omega1=0.1, alpha=2.0, rho1=0.1, beta=0.8,
        fs=_FS_GMM,
    )
    return ProblemBundle(
        "degenerate-psi", obj, tuple(modes), defaults,
        {"kind": "rectangle", "epsilon": 0.1},
        np.array([-5.0, -2.0]), np.array([5.0, 2.0]),
    )


def _bundle_cec(idx):
    prob = make_cec_suite()[idx]
    n_glob, t, k, b, omega1, alpha, rho1, beta, kappa = CEC_RUN_TABLE[idx]
    defaults = dict(
        algorithm="fs-nva-gm", K=k, B=b, T=t,
        omega1=omega1, alpha=alpha, rho1=rho1, beta=beta, kappa=kappa,
        tau=1e-10, mu_variant=1, s_variant=2,
        sigma0=float(np.max(prob.hi - prob.lo)) / 2.0,
        epsilon=0.1,
        utilities={"kind": "cmaes", "eta": 0.25},
    )
    return ProblemBundle(
        f"cec-f{idx}", prob.objective, prob.modes, defaults,
        {"kind": "value-gap", "epsilon": 0.1},
        prob.lo.copy(), prob.hi.copy(), budget=prob.budget,
    )


def _bundle_gmm_file(path):
    with open(path) as fh:
        payload = json.load(fh)
    for key in ("weights", "means", "covariances"):
        if key not in payload:
            raise ValueError(f"gmm file {path}: missing key {key!r}")
    obj = make_gmm_objective(
        payload["weights"], payload["means"], payload["covariances"],
        name=f"gmm-file",
    )
    means = np.asarray(payload["means"], dtype=float)
    raw_modes = [refine_mode(obj, m) for m in means]
    vals = np.array([obj.value(m) for m in raw_modes])
    vmax = vals.max()
    filled = fill_derivatives(obj)
    modes = tuple(
        ModeSpec(m, bool(v >= vmax - 1e-9 * max(1.0, abs(vmax))), float(v), filled.hess(m))
        for m, v in zip(raw_modes, vals)
    )
    stds = [np.sqrt(np.linalg.eigvalsh(np.asarray(c, float)).max()) for c in payload["covariances"]]
    margin = 3.0 * max(stds)
    defaults = dict(
        _GMM_DEFAULTS, K=len(modes), T=1000, omega1=1.0, alpha=1.0, rho1=0.01, beta=0.8,
        fs=dict(_FS_GMM, rho1=0.1),
    )
    return ProblemBundle(
        f"gmm-file:{path}", obj, modes, defaults,
        {"kind": "rectangle", "epsilon": 0.1},
        means.min(axis=0) - margin, means.max(axis=0) + margin,
    )


def get_problem(pid: str) -> ProblemBundle:
    if pid == "sym-gmm":
        return _bundle_sym()
    if pid == "asym-gmm":
        return _bundle_asym()
    if pid == "styblinski-tang-4":
        return _bundle_st()
    if pid == "degenerate-psi":
        return _bundle_degenerate()
    if pid.startswith("cec-f"):
        try:
            idx = int(pid[5:])
        except ValueError:
            idx = -1
        if idx in CEC_RUN_TABLE:
            return _bundle_cec(idx)
    if pid.startswith("gmm-file:"):
        return _bundle_gmm_file(pid.split(":", 1)[1])
    raise KeyError(f"unknown problem id {pid!r}")


def list_problems():
    rows = []
    for pid in PROBLEM_IDS:
        b = get_problem(pid)
        rows.append(
            {
                "id": pid,
                "dim": b.objective.dim,
                "n_global": b.n_global,
                "n_modes": b.n_modes,
                "tier": b.objective.tier,
                "algorithm": b.defaults["algorithm"],
                "K": b.defaults["K"],
                "T": b.defaults["T"],
                "budget": b.budget,
            }
        )
    return rows
