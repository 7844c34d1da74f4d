"""Gaussian mixture state: components, weights-as-logits, log-density identities.

Conventions used throughout the package:

* a component is parameterized by its mean and its precision matrix S
  (inverse covariance); Cholesky factors S = L L^T are cached at
  construction and every downstream quadratic form / determinant / solve
  goes through L,
* mixture weights live in logit space: a state with K components stores
  K-1 free logits v_1..v_{K-1} with the last logit pinned to 0, and the
  simplex weights are recovered by a max-shifted softmax,
* batched points are row vectors, arrays of shape (n, d).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))

__all__ = [
    "GaussianComponent",
    "MixtureState",
    "weights_from_logits",
    "logits_from_weights",
    "sample_component",
    "mixture_logpdf",
    "mixture_logpdf_grad",
    "mixture_logpdf_hess",
    "responsibilities",
    "gaussian_entropy",
    "approx_mixture_entropy",
    "limit_weights",
    "state_to_payload",
    "state_from_payload",
    "state_to_json",
    "state_from_json",
]


def _as_readonly(a):
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GaussianComponent:
    """Single Gaussian in precision form, with cached Cholesky factor."""

    mean: np.ndarray
    precision: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)
    half_logdet: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = _as_readonly(self.mean)
        prec = np.array(self.precision, dtype=float)
        if mean.ndim != 1:
            raise ValueError("component mean must be a 1-d array")
        d = mean.shape[0]
        if prec.shape != (d, d):
            raise ValueError(f"precision must have shape ({d}, {d}), got {prec.shape}")
        scale = max(np.abs(prec).max(), 1.0)
        if np.abs(prec - prec.T).max() > 1e-10 * scale:
            raise ValueError("precision matrix is not symmetric")
        prec = _as_readonly(0.5 * (prec + prec.T))
        try:
            chol = np.linalg.cholesky(prec)
        except np.linalg.LinAlgError as exc:
            raise ValueError("precision matrix is not positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "precision", prec)
        object.__setattr__(self, "chol", _as_readonly(chol))
        object.__setattr__(self, "half_logdet", float(np.log(np.diag(chol)).sum()))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def covariance(self) -> np.ndarray:
        return np.linalg.solve(self.precision, np.eye(self.dim))

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        """Log N(x; mean, S^{-1}) for x of shape (d,) or (n, d)."""
        x = np.asarray(x, dtype=float)
        delta = np.atleast_2d(x) - self.mean
        y = delta @ self.chol  # rows are L^T (x - mean)
        quad = np.einsum("ij,ij->i", y, y)
        out = -0.5 * self.dim * LOG_2PI + self.half_logdet - 0.5 * quad
        return out[0] if x.ndim == 1 else out


def weights_from_logits(logits: np.ndarray) -> np.ndarray:
    """Softmax over (v_1, .., v_{K-1}, 0) with max shift; never overflows."""
    logits = np.asarray(logits, dtype=float)
    full = np.concatenate([logits, [0.0]])
    full = full - full.max()
    w = np.exp(full)
    return w / w.sum()


def logits_from_weights(weights: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.shape[0] < 1:
        raise ValueError("weights must be a non-empty 1-d array")
    if not np.all(weights > 0.0):
        raise ValueError("weights must be strictly positive")
    return np.log(weights[:-1]) - np.log(weights[-1])


@dataclass(frozen=True)
class MixtureState:
    """Immutable mixture iterate: K-1 free logits plus K components."""

    logits: np.ndarray
    components: tuple

    def __post_init__(self):
        logits = _as_readonly(np.atleast_1d(np.asarray(self.logits, dtype=float)))
        comps = tuple(self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if logits.shape != (len(comps) - 1,):
            raise ValueError(
                f"expected {len(comps) - 1} logits for {len(comps)} components, "
                f"got shape {logits.shape}"
            )
        if not np.all(np.isfinite(logits)):
            raise ValueError("logits must be finite")
        d = comps[0].dim
        if any(c.dim != d for c in comps):
            raise ValueError("components must share a dimension")
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "components", comps)

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def weights(self) -> np.ndarray:
        return weights_from_logits(self.logits)

    @property
    def means(self) -> np.ndarray:
        return np.stack([c.mean for c in self.components])

    @classmethod
    def from_weights(cls, weights, components) -> "MixtureState":
        return cls(logits_from_weights(np.asarray(weights, dtype=float)), tuple(components))


def sample_component(state: MixtureState, k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points from component k as mean + L^{-T} z, z standard normal."""
    comp = state.components[k]
    z = rng.standard_normal((n, comp.dim))
    return comp.mean + np.linalg.solve(comp.chol.T, z.T).T


def _component_logpdfs(state: MixtureState, x2d: np.ndarray) -> np.ndarray:
    """(n, K) matrix of per-component log-densities."""
    out = np.empty((x2d.shape[0], state.n_components))
    for k, comp in enumerate(state.components):
        out[:, k] = comp.logpdf(x2d)
    return out


def _log_mix_terms(state, x2d):
    # log(pi_k N_k(x)) with a max shift; returns (terms, logq) where
    # terms has shape (n, K) and logq shape (n,)
    # a weight that has raced to exact float zero contributes -inf here,
    # which the shift turns into a clean 0 responsibility
    with np.errstate(divide="ignore"):
        terms = _component_logpdfs(state, x2d) + np.log(state.weights)
    m = terms.max(axis=1, keepdims=True)
    logq = m[:, 0] + np.log(np.exp(terms - m).sum(axis=1))
    return terms, logq


def mixture_logpdf(state: MixtureState, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _, logq = _log_mix_terms(state, np.atleast_2d(x))
    return float(logq[0]) if x.ndim == 1 else logq


def responsibilities(state: MixtureState, x: np.ndarray) -> np.ndarray:
    """r_k(x) = pi_k N_k(x) / q(x), computed in log space; (K,) or (n, K)."""
    x = np.asarray(x, dtype=float)
    terms, logq = _log_mix_terms(state, np.atleast_2d(x))
    r = np.exp(terms - logq[:, None])
    return r[0] if x.ndim == 1 else r


def mixture_logpdf_grad(state: MixtureState, x: np.ndarray) -> np.ndarray:
    """grad log q(x) = sum_k r_k(x) S_k (mean_k - x)."""
    x = np.asarray(x, dtype=float)
    x2d = np.atleast_2d(x)
    r = responsibilities(state, x2d)
    g = np.zeros_like(x2d)
    for k, comp in enumerate(state.components):
        a_k = (comp.mean - x2d) @ comp.precision
        g += r[:, k : k + 1] * a_k
    return g[0] if x.ndim == 1 else g


def mixture_logpdf_hess(state: MixtureState, x: np.ndarray) -> np.ndarray:
    """Hessian of log q via the responsibility identity.

    hess log q = sum_k r_k (a_k a_k^T - S_k) - g g^T with a_k = S_k (mean_k - x)
    and g = grad log q. Exactly symmetric by construction.
    """
    x = np.asarray(x, dtype=float)
    x2d = np.atleast_2d(x)
    n, d = x2d.shape
    r = responsibilities(state, x2d)
    g = np.zeros((n, d))
    h = np.zeros((n, d, d))
    for k, comp in enumerate(state.components):
        a_k = (comp.mean - x2d) @ comp.precision
        g += r[:, k : k + 1] * a_k
        h += r[:, k, None, None] * (
            a_k[:, :, None] * a_k[:, None, :] - comp.precision[None, :, :]
        )
    h -= g[:, :, None] * g[:, None, :]
    return h[0] if x.ndim == 1 else h


def gaussian_entropy(precision: np.ndarray) -> float:
    """Entropy of N(mean, S^{-1}): d(1 + log 2 pi)/2 - (log det S)/2."""
    comp = GaussianComponent(np.zeros(np.asarray(precision).shape[0]), precision)
    return 0.5 * comp.dim * (1.0 + LOG_2PI) - comp.half_logdet


def approx_mixture_entropy(state: MixtureState) -> float:
    """Mixture entropy surrogate: weight entropy plus weighted component entropies.

    Exact when components are identical; a lower-bound-style approximation
    that tightens as components separate.
    """
    w = state.weights
    comp_h = np.array(
        [0.5 * c.dim * (1.0 + LOG_2PI) - c.half_logdet for c in state.components]
    )
    return float(-(w * np.log(w)).sum() + (w * comp_h).sum())


def limit_weights(hessians) -> np.ndarray:
    """Asymptotic weight split over equal-height modes from their curvatures.

    Given the objective Hessians H_i at the tied global modes, returns
    w_i proportional to det(-H_i)^{-1/2}, normalized. Raises ValueError if
    any -H_i is not positive definite (degenerate or saddle-like mode).
    """
    logs = []
    for i, h in enumerate(hessians):
        h = np.asarray(h, dtype=float)
        m = -0.5 * (h + h.T)
        try:
            chol = np.linalg.cholesky(m)
        except np.linalg.LinAlgError as exc:
            raise ValueError(
                f"mode {i}: negated Hessian is not positive definite "
                "(degenerate mode, curvature-based limit weights undefined)"
            ) from exc
        logs.append(-np.log(np.diag(chol)).sum())
    logs = np.array(logs)
    logs -= logs.max()
    w = np.exp(logs)
    return w / w.sum()


# ---------------------------------------------------------------------------
# serialization


def state_to_payload(state: MixtureState) -> dict:
    return {
        "weights": state.weights.tolist(),
        "means": [c.mean.tolist() for c in state.components],
        "precisions": [c.precision.tolist() for c in state.components],
    }


def state_from_payload(payload: dict) -> MixtureState:
    try:
        weights = payload["weights"]
        means = payload["means"]
        precisions = payload["precisions"]
    except KeyError as exc:
        raise ValueError(f"mixture payload missing key {exc}") from exc
    comps = tuple(
        GaussianComponent(np.asarray(m, dtype=float), np.asarray(p, dtype=float))
        for m, p in zip(means, precisions)
    )
    if len(comps) != len(weights):
        raise ValueError("weights/components length mismatch")
    return MixtureState.from_weights(weights, comps)


def state_to_json(state: MixtureState) -> str:
    return json.dumps(state_to_payload(state))


def state_from_json(text: str) -> MixtureState:
    return state_from_payload(json.loads(text))
