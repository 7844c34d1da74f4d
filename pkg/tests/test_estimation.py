import numpy as np
import pytest

from nvagm import estimation as es
from nvagm import mixture as mx
from nvagm import objectives as ob


def small_state(means=(0.1, -0.8), precs=(1.5, 0.8), weights=(0.6, 0.4)):
    comps = tuple(
        mx.GaussianComponent(np.array([m]), np.array([[p]]))
        for m, p in zip(means, precs)
    )
    return mx.MixtureState.from_weights(np.array(weights), comps)


QUAD = ob.make_quadratic([0.7], [[2.0]])
GRID = np.linspace(-40.0, 40.0, 400001)[:, None]


def annealed_objective_quadrature(omega, weights, means, precs):
    """L = E_q[l] + omega H(q) by dense 1-d quadrature; the test oracle."""
    comps = tuple(
        mx.GaussianComponent(np.array([m]), np.array([[p]]))
        for m, p in zip(means, precs)
    )
    st = mx.MixtureState.from_weights(weights, comps)
    lq = mx.mixture_logpdf(st, GRID)
    dens = np.exp(lq)
    return np.trapezoid(dens * (QUAD.value(GRID) - omega * lq), GRID[:, 0])


# ------------------------------------------------------------- potential


def test_zero_temperature_is_objective_exactly(rng):
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.0, state)
    xs = rng.normal(size=(9, 1))
    assert np.array_equal(ap.value_batch(xs), QUAD.value(xs))
    assert np.array_equal(ap.grad_batch(xs), QUAD.grad(xs))
    assert np.array_equal(ap.hess_batch(xs), QUAD.hess(xs))


def test_negative_temperature_rejected():
    with pytest.raises(ValueError):
        es.AnnealedPotential(QUAD, -0.1, small_state())


def test_potential_derivatives_match_fd(rng):
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.7, state)
    for _ in range(3):
        x = rng.normal(size=1)
        v = lambda z: es.potential_value(ap, z)
        g_fd = ob.finite_diff_grad(v, x)
        np.testing.assert_allclose(es.potential_grad(ap, x), g_fd, rtol=1e-5, atol=1e-7)
        h_fd = ob.finite_diff_hess(v, x)
        np.testing.assert_allclose(
            es.potential_hess(ap, x), h_fd, rtol=1e-3, atol=1e-4
        )


# ------------------------------------------------------------- unbiasedness


@pytest.mark.parametrize("omega", [0.0, 0.5])
def test_estimators_unbiased_for_annealed_gradient(omega):
    """Every estimator matches a quadrature + finite-difference oracle to 3 SE."""
    weights, means, precs = (0.6, 0.4), (0.1, -0.8), (1.5, 0.8)
    state = small_state(means, precs, weights)
    ap = es.AnnealedPotential(QUAD, omega, state)
    h = 1e-5
    n = 100000
    rng = np.random.default_rng(2024)
    s0 = mx.sample_component(state, 0, n, rng)
    s1 = mx.sample_component(state, 1, n, rng)

    def oracle(**kw):
        args = dict(weights=np.array(weights), means=list(means), precs=list(precs))
        args.update(kw)
        return annealed_objective_quadrature(omega, args["weights"], args["means"], args["precs"])

    # component-0 mean direction: estimators target (dL/dmu_0) / pi_0
    d_mu = (
        oracle(means=[means[0] + h, means[1]]) - oracle(means=[means[0] - h, means[1]])
    ) / (2 * h)
    target_mu = d_mu / weights[0]
    for variant in (0, 1):
        per = (
            (s0 - state.components[0].mean) * ap.value_batch(s0)[:, None] @ state.components[0].precision
            if variant == 0
            else ap.grad_batch(s0)
        )
        est = es.estimate_grad_mu(ap, 0, s0, variant)
        se = per[:, 0].std() / np.sqrt(n)
        assert abs(est[0] - target_mu) < 3 * se + 1e-6, (variant, est, target_mu)

    # component-0 precision direction: estimators target (2/pi_0) dL/dS0^{-1}
    c0 = 1.0 / precs[0]
    d_si = (
        oracle(precs=[1.0 / (c0 + h), precs[1]]) - oracle(precs=[1.0 / (c0 - h), precs[1]])
    ) / (2 * h)
    target_s = 2.0 * d_si / weights[0]
    for variant in (0, 1, 2):
        est = es.estimate_grad_prec(ap, 0, s0, variant)
        # replicate in quarters for an SE of the batch mean
        quarters = [
            es.estimate_grad_prec(
                es.AnnealedPotential(QUAD, omega, state), 0, s0[i::4].copy(), variant
            )[0, 0]
            for i in range(4)
        ]
        se = np.std(quarters) / 2.0
        assert abs(est[0, 0] - target_s) < 3 * se + 2e-3, (variant, est, target_s)

    # weight-logit gradient for component 0 vs the folded last component
    dp = h
    w_plus = np.array([weights[0] + dp, weights[1] - dp])
    w_minus = np.array([weights[0] - dp, weights[1] + dp])
    d_pi = (oracle(weights=w_plus) - oracle(weights=w_minus)) / (2 * dp)
    est_pi = es.estimate_grad_pi(ap, s0, s1)
    diffs = ap.value_batch(s0) - np.mean(ap.value_batch(s1))
    se = np.sqrt(ap.value_batch(s0).var() / n + ap.value_batch(s1).var() / n)
    assert abs(est_pi - d_pi) < 3 * se + 1e-6


def test_variant2_zero_variance_on_quadratic():
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.0, state)
    rng = np.random.default_rng(0)
    a = mx.sample_component(state, 0, 4, rng)
    b = mx.sample_component(state, 0, 4, rng)
    ha = es.estimate_grad_prec(ap, 0, a, 2)
    hb = es.estimate_grad_prec(ap, 0, b, 2)
    np.testing.assert_array_equal(ha, [[-2.0]])
    np.testing.assert_array_equal(ha, hb)


def test_variant2_single_component_exact_tempered_curvature():
    comp = mx.GaussianComponent(np.array([0.1]), np.array([[1.5]]))
    state = mx.MixtureState.from_weights([1.0], (comp,))
    ap = es.AnnealedPotential(QUAD, 0.3, state)
    rng = np.random.default_rng(1)
    s = mx.sample_component(state, 0, 4, rng)
    got = es.estimate_grad_prec(ap, 0, s, 2)
    # -A + omega * S, no Monte Carlo error at all
    np.testing.assert_allclose(got, [[-2.0 + 0.3 * 1.5]], atol=1e-13)


def test_variance_decays_like_one_over_batch():
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.5, state)
    rng = np.random.default_rng(8)
    reps = 3000
    variances = []
    batches = [4, 16, 64, 256]
    for b in batches:
        ests = np.empty(reps)
        draws = mx.sample_component(state, 0, reps * b, rng).reshape(reps, b, 1)
        for i in range(reps):
            s = draws[i]
            ests[i] = es.estimate_grad_mu(ap, 0, s, 0)[0]
        variances.append(ests.var())
    slope = np.polyfit(np.log(batches), np.log(variances), 1)[0]
    assert -1.2 < slope < -0.8, (slope, variances)


def test_variant2_lower_variance_than_variant0():
    state = small_state()
    rng = np.random.default_rng(12)
    reps, b = 800, 8
    e0 = np.empty(reps)
    e2 = np.empty(reps)
    for i in range(reps):
        ap = es.AnnealedPotential(QUAD, 0.5, state)
        s = mx.sample_component(state, 0, b, rng)
        e0[i] = es.estimate_grad_prec(ap, 0, s, 0)[0, 0]
        e2[i] = es.estimate_grad_prec(ap, 0, s, 2)[0, 0]
    assert e2.var() < 0.5 * e0.var()


# ------------------------------------------------------------- memoization


class CountingQuadratic:
    def __init__(self):
        self.calls = 0
        self.inner = QUAD
        self.dim = 1
        self.tier = "hessian"

    def value(self, x):
        self.calls += np.atleast_2d(x).shape[0]
        return self.inner.value(x)

    def grad(self, x):
        return self.inner.grad(x)

    def hess(self, x):
        return self.inner.hess(x)


def test_values_memoized_per_sample_array(rng):
    state = small_state()
    counter = CountingQuadratic()
    ap = es.AnnealedPotential(counter, 0.5, state)
    s0 = mx.sample_component(state, 0, 16, rng)
    s1 = mx.sample_component(state, 1, 16, rng)
    es.estimate_grad_mu(ap, 0, s0, 0)
    assert counter.calls == 16
    es.estimate_grad_prec(ap, 0, s0, 0)
    assert counter.calls == 16  # same array, cached
    es.estimate_grad_pi(ap, s0, s1)
    assert counter.calls == 32  # only the second batch is new


# ------------------------------------------------------------- utilities


def test_truncation_examples():
    np.testing.assert_array_equal(es.utility_truncation(4, 0.5).values, [2, 2, 0, 0])
    np.testing.assert_array_equal(es.utility_truncation(4, 1.0).values, [1, 1, 1, 1])
    assert es.utility_truncation(16, 0.25).values[3] == 4.0
    assert es.utility_truncation(16, 0.25).values[4] == 0.0


def test_truncation_mean_one():
    for b, eta in [(4, 0.5), (16, 0.25), (32, 0.25), (7, 0.6)]:
        u = es.utility_truncation(b, eta)
        assert u.values.mean() == pytest.approx(1.0, abs=1e-12)


def test_truncation_degenerate_rejected():
    with pytest.raises(ValueError):
        es.utility_truncation(4, 0.05)


def test_cmaes_utilities_frozen_example():
    u = es.utility_cmaes(4, 2)
    np.testing.assert_allclose(u.values, [2.9214, 1.0786, 0.0, 0.0], atol=5e-4)
    assert u.values.sum() == pytest.approx(4.0, abs=1e-12)


def test_cmaes_utilities_bad_keep():
    with pytest.raises(ValueError):
        es.utility_cmaes(4, 0)
    with pytest.raises(ValueError):
        es.utility_cmaes(4, 5)


def test_utility_scheme_rejects_increasing():
    with pytest.raises(ValueError):
        es.UtilityScheme("x", np.array([1.0, 2.0]))


def test_rank_descending_example_and_ties():
    np.testing.assert_array_equal(es.rank_descending([1.0, 3.0, 2.0]), [1, 2, 0])
    np.testing.assert_array_equal(es.rank_descending([5.0, 5.0, 3.0]), [0, 1, 2])
    with pytest.raises(ValueError):
        es.rank_descending([1.0, np.nan])


# ------------------------------------------------------------- rank-shaped path


def test_fs_estimate_length_mismatch():
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.5, state)
    s = mx.sample_component(state, 0, 8, np.random.default_rng(0))
    with pytest.raises(ValueError, match="utilities"):
        es.fs_estimate(ap, 0, s, es.utility_truncation(4, 0.5))


def test_fs_uniform_utilities_reduce_to_sample_mean(rng):
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.5, state)
    s = mx.sample_component(state, 0, 12, rng)
    u = es.utility_truncation(12, 1.0)
    nu_mu, nu_prec = es.fs_estimate(ap, 0, s, u)
    comp = state.components[0]
    delta = s - comp.mean
    np.testing.assert_allclose(nu_mu, delta.mean(0) @ comp.precision, atol=1e-14)
    m = delta.T @ delta / 12
    expect = comp.precision @ m @ comp.precision - comp.precision
    np.testing.assert_allclose(nu_prec, expect, atol=1e-13)


def test_fs_uniform_utilities_zero_mean():
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.5, state)
    rng = np.random.default_rng(77)
    n = 100000
    s = mx.sample_component(state, 0, n, rng)
    u = es.utility_truncation(n, 1.0)
    nu_mu, _ = es.fs_estimate(ap, 0, s, u)
    comp = state.components[0]
    per = (s - comp.mean) @ comp.precision
    se = per[:, 0].std() / np.sqrt(n)
    assert abs(nu_mu[0]) < 3 * se


def test_fs_invariant_under_increasing_transform(rng):
    """Ranks only: rescaling and shifting the objective changes nothing."""
    obj_a = ob.make_quadratic([0.2, -0.4], np.diag([1.0, 2.5]))
    obj_b = ob.Objective(
        "affine", 2, "value", value_fn=lambda x2d: 2.0 * obj_a.value_fn(x2d) + 7.0
    )
    comps = (mx.GaussianComponent(np.zeros(2), np.eye(2)),)
    state = mx.MixtureState.from_weights([1.0], comps)
    s = mx.sample_component(state, 0, 16, rng)
    u = es.utility_cmaes(16, 4)
    out_a = es.fs_estimate(es.AnnealedPotential(obj_a, 0.0, state), 0, s, u)
    out_b = es.fs_estimate(es.AnnealedPotential(obj_b, 0.0, state), 0, s, u)
    np.testing.assert_array_equal(out_a[0], out_b[0])
    np.testing.assert_array_equal(out_a[1], out_b[1])


def test_fs_mu_zero_mean_at_spherical_mode():
    obj = ob.make_quadratic([0.0, 0.0], np.eye(2))
    comps = (mx.GaussianComponent(np.zeros(2), 4.0 * np.eye(2)),)
    state = mx.MixtureState.from_weights([1.0], comps)
    ap = es.AnnealedPotential(obj, 0.0, state)
    rng = np.random.default_rng(5)
    reps, b = 4000, 16
    u = es.utility_truncation(b, 0.25)
    ests = np.empty((reps, 2))
    for i in range(reps):
        s = mx.sample_component(state, 0, b, rng)
        ests[i] = es.fs_estimate(es.AnnealedPotential(obj, 0.0, state), 0, s, u)[0]
    se = ests.std(axis=0) / np.sqrt(reps)
    assert np.all(np.abs(ests.mean(axis=0)) < 3 * se + 1e-4)


def test_estimate_all_shapes(rng):
    state = small_state()
    ap = es.AnnealedPotential(QUAD, 0.5, state)
    samples = [mx.sample_component(state, k, 6, rng) for k in range(2)]
    bundle = es.estimate_all(ap, samples, mu_variant=1, s_variant=2)
    assert bundle.pi.shape == (1,)
    assert bundle.mu.shape == (2, 1)
    assert bundle.prec.shape == (2, 1, 1)
    assert bundle.samples_used == 12
