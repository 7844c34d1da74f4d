"""Minimal CMA-ES instance used by the parallel baseline.

Standard rank-mu update with cumulative step-size adaptation, default
parameters from the classic tutorial treatment. Maximizes the supplied
values (callers pass raw objective values; internally ranks descending).
One instance per search component; no restarts, no boundary handling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["CmaParams", "CmaState", "cma_init", "cma_ask", "cma_tell"]


@dataclass(frozen=True)
class CmaParams:
    dim: int
    lam: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_cov: float
    chi_n: float


def cma_params(dim: int, lam: int, mu: int) -> CmaParams:
    if not (1 <= mu <= lam):
        raise ValueError(f"need 1 <= mu <= lam, got mu={mu}, lam={lam}")
    w = np.log(mu + 1.0) - np.log(np.arange(1, mu + 1, dtype=float))
    w = w / w.sum()
    mu_eff = 1.0 / np.sum(w**2)
    c_sigma = (mu_eff + 2.0) / (dim + mu_eff + 3.0)
    d_sigma = 1.0 + 2.0 * max(0.0, np.sqrt((mu_eff - 1.0) / (dim + 1.0)) - 1.0) + c_sigma
    c_c = 4.0 / (dim + 4.0)
    mu_cov = mu_eff
    c_cov = (1.0 / mu_cov) * 2.0 / (dim + np.sqrt(2.0)) ** 2 + (
        1.0 - 1.0 / mu_cov
    ) * min(1.0, (2.0 * mu_cov - 1.0) / ((dim + 2.0) ** 2 + mu_cov))
    chi_n = np.sqrt(dim) * (1.0 - 1.0 / (4.0 * dim) + 1.0 / (21.0 * dim**2))
    return CmaParams(dim, lam, mu, w, mu_eff, c_sigma, d_sigma, c_c, c_cov, chi_n)


@dataclass
class CmaState:
    params: CmaParams
    mean: np.ndarray
    sigma: float
    cov: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    t: int = 0
    _ys: np.ndarray = field(default=None, repr=False)


def cma_init(mean, sigma, lam, mu) -> CmaState:
    mean = np.asarray(mean, dtype=float).copy()
    d = mean.size
    return CmaState(
        params=cma_params(d, lam, mu),
        mean=mean,
        sigma=float(sigma),
        cov=np.eye(d),
        p_sigma=np.zeros(d),
        p_c=np.zeros(d),
    )


def _cov_factors(cov):
    evals, evecs = np.linalg.eigh(cov)
    evals = np.maximum(evals, 1e-300)
    root = evecs @ np.diag(np.sqrt(evals)) @ evecs.T
    inv_root = evecs @ np.diag(1.0 / np.sqrt(evals)) @ evecs.T
    return root, inv_root


def cma_ask(st: CmaState, rng: np.random.Generator) -> np.ndarray:
    """Draw lam candidates; stashes the scaled steps for the matching tell."""
    root, _ = _cov_factors(st.cov)
    z = rng.standard_normal((st.params.lam, st.params.dim))
    st._ys = z @ root.T
    return st.mean + st.sigma * st._ys


def cma_tell(st: CmaState, values: np.ndarray) -> None:
    """Update mean, paths, covariance, and step size from candidate values."""
    p = st.params
    if st._ys is None or values.shape[0] != p.lam:
        raise ValueError("tell must follow ask with one value per candidate")
    order = np.argsort(-np.asarray(values, dtype=float), kind="stable")[: p.mu]
    ys = st._ys[order]
    st._ys = None
    y_w = p.weights @ ys
    st.mean = st.mean + st.sigma * y_w

    _, inv_root = _cov_factors(st.cov)
    st.p_sigma = (1.0 - p.c_sigma) * st.p_sigma + np.sqrt(
        p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff
    ) * (inv_root @ y_w)
    st.t += 1
    norm = np.linalg.norm(st.p_sigma)
    denom = np.sqrt(1.0 - (1.0 - p.c_sigma) ** (2.0 * st.t))
    h_sigma = 1.0 if norm / denom < (1.4 + 2.0 / (p.dim + 1.0)) * p.chi_n else 0.0

    st.p_c = (1.0 - p.c_c) * st.p_c + h_sigma * np.sqrt(
        p.c_c * (2.0 - p.c_c) * p.mu_eff
    ) * y_w

    mu_cov = p.mu_eff
    rank_mu = (ys * p.weights[:, None]).T @ ys
    st.cov = (
        (1.0 - p.c_cov) * st.cov
        + (p.c_cov / mu_cov)
        * (np.outer(st.p_c, st.p_c) + (1.0 - h_sigma) * p.c_c * (2.0 - p.c_c) * st.cov)
        + p.c_cov * (1.0 - 1.0 / mu_cov) * rank_mu
    )
    st.cov = 0.5 * (st.cov + st.cov.T)
    st.sigma = st.sigma * np.exp((p.c_sigma / p.d_sigma) * (norm / p.chi_n - 1.0))
    if not (np.isfinite(st.sigma) and np.all(np.isfinite(st.cov)) and np.all(np.isfinite(st.mean))):
        raise FloatingPointError("covariance adaptation left the finite range")
