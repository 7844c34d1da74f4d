"""Monte Carlo gradient estimators for the annealed mixture objective.

The search maximizes L(state) = E_q[l] + omega * H(q) over mixtures q. All
estimators work with the tempered potential

    f_omega(x) = l(x) - omega * log q(x)

evaluated at points drawn from the frozen current state. Per-component
estimators come in variants by derivative order: 0 uses values only, 1 uses
gradients, 2 uses Hessians. Variant choice trades evaluation cost against
variance; the reparameterized forms (1 and 2) are exact reformulations, not
approximations.

The rank-based path (fs_estimate) replaces raw potential values with
utilities assigned by descending rank, which makes the resulting updates
invariant under strictly increasing transformations of the objective.

AnnealedPotential memoizes batch evaluations per sample array (by object
identity), so the weight-gradient estimator reuses the very same values a
mean or precision estimator already paid for within an iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mixture as mx

__all__ = [
    "AnnealedPotential",
    "GradientEstimate",
    "UtilityScheme",
    "potential_value",
    "potential_grad",
    "potential_hess",
    "estimate_grad_pi",
    "estimate_grad_mu",
    "estimate_grad_prec",
    "estimate_all",
    "utility_truncation",
    "utility_cmaes",
    "rank_descending",
    "fs_estimate",
]


@dataclass
class AnnealedPotential:
    """f_omega over a frozen mixture state, with per-batch memoization."""

    objective: object
    temperature: float
    state: mx.MixtureState
    _vals: dict = field(default_factory=dict, repr=False)
    _grads: dict = field(default_factory=dict, repr=False)
    _hesses: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.temperature >= 0.0:
            raise ValueError("temperature must be >= 0")

    def _memo(self, cache, samples, compute):
        # keyed by object identity; the cache keeps the array alive, so a
        # recycled id cannot alias a dead batch. The `is` check guards the
        # (unreachable) remainder.
        key = id(samples)
        hit = cache.get(key)
        if hit is None or hit[0] is not samples:
            cache[key] = (samples, compute())
        return cache[key][1]

    def value_batch(self, samples: np.ndarray) -> np.ndarray:
        def compute():
            out = np.asarray(self.objective.value(samples), dtype=float)
            if self.temperature != 0.0:
                out = out - self.temperature * mx.mixture_logpdf(self.state, samples)
            return out

        return self._memo(self._vals, samples, compute)

    def grad_batch(self, samples: np.ndarray) -> np.ndarray:
        def compute():
            out = np.asarray(self.objective.grad(samples), dtype=float)
            if self.temperature != 0.0:
                out = out - self.temperature * mx.mixture_logpdf_grad(self.state, samples)
            return out

        return self._memo(self._grads, samples, compute)

    def hess_batch(self, samples: np.ndarray) -> np.ndarray:
        def compute():
            out = np.asarray(self.objective.hess(samples), dtype=float)
            if self.temperature != 0.0:
                out = out - self.temperature * mx.mixture_logpdf_hess(self.state, samples)
            return out

        return self._memo(self._hesses, samples, compute)


def potential_value(ap: AnnealedPotential, x):
    x = np.asarray(x, dtype=float)
    out = ap.value_batch(np.atleast_2d(x))
    return float(out[0]) if x.ndim == 1 else out


def potential_grad(ap: AnnealedPotential, x):
    x = np.asarray(x, dtype=float)
    out = ap.grad_batch(np.atleast_2d(x))
    return out[0] if x.ndim == 1 else out


def potential_hess(ap: AnnealedPotential, x):
    x = np.asarray(x, dtype=float)
    out = ap.hess_batch(np.atleast_2d(x))
    return out[0] if x.ndim == 1 else out


# ------------------------------------------------------------------ estimators


def estimate_grad_pi(ap: AnnealedPotential, samples_k, samples_last) -> float:
    """Weight-logit gradient: mean potential advantage of component k over the last."""
    return float(ap.value_batch(samples_k).mean() - ap.value_batch(samples_last).mean())


def estimate_grad_mu(ap: AnnealedPotential, k: int, samples, variant: int):
    """Mean-direction estimate for component k; scaled by 1/pi_k relative to dL/dmu.

    variant 0: S_k E[delta f], values only
    variant 1: E[grad f], one gradient per sample
    """
    comp = ap.state.components[k]
    if variant == 0:
        delta = samples - comp.mean
        f = ap.value_batch(samples)
        return (delta * f[:, None]).mean(axis=0) @ comp.precision
    if variant == 1:
        return ap.grad_batch(samples).mean(axis=0)
    raise ValueError(f"unknown mean-estimator variant {variant!r}")


def estimate_grad_prec(ap: AnnealedPotential, k: int, samples, variant: int):
    """Inverse-covariance-direction estimate for component k (symmetric d x d).

    Estimates (2/pi_k) dL/dS_k^{-1}; the precision recursion subtracts it.
    variant 0: S (E[delta delta^T f]) S - E[f] S, values only
    variant 1: sym(S E[delta grad f^T]), one gradient per sample
    variant 2: E[hess f], one Hessian per sample
    """
    comp = ap.state.components[k]
    prec = comp.precision
    b = samples.shape[0]
    if variant == 0:
        delta = samples - comp.mean
        f = ap.value_batch(samples)
        m = (delta * f[:, None]).T @ delta / b
        out = prec @ m @ prec - f.mean() * prec
    elif variant == 1:
        delta = samples - comp.mean
        g = ap.grad_batch(samples)
        out = prec @ (delta.T @ g) / b
    elif variant == 2:
        out = ap.hess_batch(samples).mean(axis=0)
    else:
        raise ValueError(f"unknown precision-estimator variant {variant!r}")
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class GradientEstimate:
    """One iteration's worth of per-component estimates."""

    pi: np.ndarray  # (K-1,) logit gradients
    mu: np.ndarray  # (K, d)
    prec: np.ndarray  # (K, d, d)
    samples_used: int


def estimate_all(ap, samples_per_comp, mu_variant, s_variant) -> GradientEstimate:
    """Bundle mean/precision/weight estimates over shared per-component draws."""
    k_total = ap.state.n_components
    d = ap.state.dim
    mu = np.empty((k_total, d))
    prec = np.empty((k_total, d, d))
    for k in range(k_total):
        mu[k] = estimate_grad_mu(ap, k, samples_per_comp[k], mu_variant)
        prec[k] = estimate_grad_prec(ap, k, samples_per_comp[k], s_variant)
    pi = np.array(
        [
            estimate_grad_pi(ap, samples_per_comp[k], samples_per_comp[-1])
            for k in range(k_total - 1)
        ]
    )
    used = sum(s.shape[0] for s in samples_per_comp)
    return GradientEstimate(pi=pi, mu=mu, prec=prec, samples_used=used)


# ------------------------------------------------------------------ rank shaping


@dataclass(frozen=True)
class UtilityScheme:
    """Non-increasing utilities indexed by descending rank, mean 1."""

    kind: str
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("utilities must be a non-empty vector")
        if np.any(np.diff(vals) > 1e-12):
            raise ValueError("utilities must be non-increasing in rank")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def batch_size(self) -> int:
        return self.values.size


def utility_truncation(batch: int, eta: float) -> UtilityScheme:
    """Top floor(batch*eta + 1/2) samples share all the mass equally."""
    keep = int(np.floor(batch * eta + 0.5))
    if keep <= 0 or keep > batch:
        raise ValueError(
            f"truncation keeps {keep} of {batch} samples; need 1 <= keep <= batch"
        )
    u = np.zeros(batch)
    u[:keep] = batch / keep
    return UtilityScheme("truncation", u)


def utility_cmaes(batch: int, keep: int) -> UtilityScheme:
    """Log-rank weights on the top `keep` samples, scaled to sum to batch."""
    if keep <= 0 or keep > batch:
        raise ValueError(f"need 1 <= keep <= batch, got keep={keep}, batch={batch}")
    ranks = np.arange(1, keep + 1, dtype=float)
    w = np.log(keep + 1.0) - np.log(ranks)
    u = np.zeros(batch)
    u[:keep] = batch * w / w.sum()
    return UtilityScheme("cmaes", u)


def rank_descending(values) -> np.ndarray:
    """Indices sorting values descending; ties keep original order."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("cannot rank non-finite potential values")
    return np.argsort(-values, kind="stable")


def fs_estimate(ap: AnnealedPotential, k: int, samples, utilities: UtilityScheme):
    """Rank-shaped mean and precision estimates for component k.

    Samples are ranked by descending potential and the b-th best receives
    utility u_b in place of its raw value. Returns (nu_mu, nu_prec); the
    precision recursion subtracts nu_prec, the mean update adds the solved
    nu_mu, exactly like the raw-value variants.
    """
    if samples.shape[0] != utilities.batch_size:
        raise ValueError(
            f"{samples.shape[0]} samples but {utilities.batch_size} utilities"
        )
    comp = ap.state.components[k]
    prec = comp.precision
    b = samples.shape[0]
    u = utilities.values
    order = rank_descending(ap.value_batch(samples))
    delta = samples[order] - comp.mean
    nu_mu = (delta * u[:, None]).mean(axis=0) @ prec
    m = (delta * u[:, None]).T @ delta / b
    nu_prec = prec @ m @ prec - (u.sum() / b) * prec
    return nu_mu, 0.5 * (nu_prec + nu_prec.T)
