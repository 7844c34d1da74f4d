import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvagm import mixture as mx
from conftest import finite_diff, finite_diff_matrix


def make_state(weights, means, precisions):
    comps = tuple(
        mx.GaussianComponent(np.asarray(m, float), np.asarray(p, float))
        for m, p in zip(means, precisions)
    )
    return mx.MixtureState.from_weights(np.asarray(weights, float), comps)


# ---------------------------------------------------------------- weights


def test_weights_from_zero_logits_uniform():
    w = mx.weights_from_logits(np.zeros(3))
    np.testing.assert_allclose(w, [0.25, 0.25, 0.25, 0.25], rtol=0, atol=1e-15)


def test_weights_from_logits_ln2():
    w = mx.weights_from_logits(np.array([np.log(2.0)]))
    np.testing.assert_allclose(w, [2 / 3, 1 / 3], atol=1e-15)


def test_weights_from_logits_extreme_no_overflow():
    with np.errstate(over="raise"):
        w = mx.weights_from_logits(np.array([700.0]))
    assert np.all(np.isfinite(w))
    assert w[0] == pytest.approx(1.0)
    assert w[1] >= 0.0


def test_logits_from_weights_rejects_nonpositive():
    with pytest.raises(ValueError):
        mx.logits_from_weights(np.array([0.5, 0.5, 0.0]))
    with pytest.raises(ValueError):
        mx.logits_from_weights(np.array([1.2, -0.2]))


@given(
    st.lists(st.floats(min_value=-30.0, max_value=30.0), min_size=1, max_size=7)
)
@settings(max_examples=200, deadline=None)
def test_logit_weight_roundtrip(logits):
    logits = np.asarray(logits)
    w = mx.weights_from_logits(logits)
    assert abs(w.sum() - 1.0) < 1e-12
    assert np.all(w > 0)
    back = mx.logits_from_weights(w)
    # invariant to a common shift: compare against shifted originals
    np.testing.assert_allclose(back, logits - 0.0, atol=1e-9)


# ---------------------------------------------------------------- logpdf


def test_single_standard_gaussian_at_origin():
    s = make_state([1.0], [np.zeros(2)], [np.eye(2)])
    assert mx.mixture_logpdf(s, np.zeros(2)) == pytest.approx(-1.837877, abs=1e-6)


def test_two_component_1d_at_origin():
    s = make_state([0.5, 0.5], [[-1.0], [1.0]], [[[1.0]], [[1.0]]])
    assert mx.mixture_logpdf(s, np.zeros(1)) == pytest.approx(-1.418939, abs=1e-6)


def test_logpdf_batch_matches_scalar(rng):
    s = make_state(
        [0.3, 0.7],
        [[-1.0, 0.5], [1.0, -0.2]],
        [np.diag([1.0, 2.0]), [[2.0, 0.3], [0.3, 1.0]]],
    )
    xs = rng.normal(size=(11, 2))
    batch = mx.mixture_logpdf(s, xs)
    singles = np.array([mx.mixture_logpdf(s, x) for x in xs])
    np.testing.assert_allclose(batch, singles, rtol=1e-14)


def test_quadrature_normalization_1d():
    # densities integrate to 1 on a fine grid, K up to 3
    grid = np.linspace(-30, 30, 240001)[:, None]
    for weights, means, precs in [
        ([1.0], [[0.3]], [[[0.7]]]),
        ([0.4, 0.6], [[-2.0], [1.5]], [[[1.0]], [[3.0]]]),
        ([0.2, 0.5, 0.3], [[-4.0], [0.0], [5.0]], [[[0.5]], [[2.0]], [[1.2]]]),
    ]:
        s = make_state(weights, means, precs)
        dens = np.exp(mx.mixture_logpdf(s, grid))
        total = np.trapezoid(dens, grid[:, 0])
        assert total == pytest.approx(1.0, abs=1e-3)


def test_grad_matches_finite_differences(rng):
    s = make_state(
        [0.25, 0.75],
        [[0.0, 0.0], [1.5, -1.0]],
        [np.diag([2.0, 0.5]), [[1.0, 0.4], [0.4, 2.0]]],
    )
    for _ in range(5):
        x = rng.normal(size=2)
        g = mx.mixture_logpdf_grad(s, x)
        g_fd = finite_diff(lambda y: mx.mixture_logpdf(s, y), x)
        np.testing.assert_allclose(g, g_fd, rtol=1e-5, atol=1e-8)


def test_hess_matches_finite_differences_and_symmetric(rng):
    s = make_state(
        [0.5, 0.5],
        [[-1.0, 0.0], [1.0, 0.5]],
        [np.eye(2), np.diag([3.0, 0.7])],
    )
    for _ in range(4):
        x = rng.normal(size=2)
        h = mx.mixture_logpdf_hess(s, x)
        assert np.array_equal(h, h.T)
        h_fd = finite_diff_matrix(lambda y: mx.mixture_logpdf_grad(s, y), x)
        np.testing.assert_allclose(h, 0.5 * (h_fd + h_fd.T), rtol=1e-4, atol=1e-6)


# ---------------------------------------------------------------- sampling


def test_sample_component_regression_seeded():
    from numpy.random import Generator, Philox, SeedSequence

    s = make_state([1.0], [[5.0, 5.0]], [np.eye(2)])
    rng = Generator(Philox(SeedSequence(entropy=(0, 0, 1, 0))))
    x = mx.sample_component(s, 0, 1, rng)
    np.testing.assert_allclose(
        x, [[5.912205647997658, 4.9590699816933395]], rtol=0, atol=0
    )


def test_sample_component_covariance():
    s = make_state([1.0], [[0.0, 0.0]], [np.diag([4.0, 4.0])])
    rng = np.random.default_rng(7)
    xs = mx.sample_component(s, 0, 120000, rng)
    np.testing.assert_allclose(xs.var(axis=0), [0.25, 0.25], atol=0.01)
    np.testing.assert_allclose(xs.mean(axis=0), [0.0, 0.0], atol=0.01)


def test_sample_component_correlated_precision():
    prec = np.array([[2.0, 0.8], [0.8, 1.0]])
    s = make_state([1.0], [[1.0, -1.0]], [prec])
    rng = np.random.default_rng(11)
    xs = mx.sample_component(s, 0, 200000, rng)
    emp_cov = np.cov(xs.T)
    np.testing.assert_allclose(emp_cov, np.linalg.inv(prec), atol=0.01)


# ---------------------------------------------------------------- entropy


def test_gaussian_entropy_values():
    assert mx.gaussian_entropy(np.eye(2)) == pytest.approx(2.837877, abs=1e-6)
    assert mx.gaussian_entropy(np.array([[4.0]])) == pytest.approx(0.725791, abs=1e-6)


def test_approx_entropy_identical_components():
    prec = np.diag([2.0, 0.5])
    s = make_state([0.5, 0.5], [[0.0, 0.0], [0.0, 0.0]], [prec, prec])
    expect = np.log(2.0) + mx.gaussian_entropy(prec)
    assert mx.approx_mixture_entropy(s) == pytest.approx(expect, abs=1e-12)


def test_approx_entropy_separated_matches_monte_carlo():
    s = make_state(
        [0.4, 0.6], [[-30.0, 0.0], [30.0, 0.0]], [np.eye(2), np.diag([2.0, 1.0])]
    )
    rng = np.random.default_rng(3)
    n = 4000000
    ks = rng.choice(2, size=n, p=s.weights)
    xs = np.empty((n, 2))
    for k in (0, 1):
        idx = np.flatnonzero(ks == k)
        xs[idx] = mx.sample_component(s, k, idx.size, rng)
    mc = -mx.mixture_logpdf(s, xs).mean()
    assert mx.approx_mixture_entropy(s) == pytest.approx(mc, abs=1e-3)


# ---------------------------------------------------------------- limit weights


def test_limit_weights_identical_curvature():
    h = -np.diag([2.0, 3.0])
    np.testing.assert_allclose(mx.limit_weights([h, h, h]), np.ones(3) / 3, atol=1e-15)


def test_limit_weights_asymmetric_pair():
    h_sharp = -np.linalg.inv(np.diag([0.005, 0.9]))
    h_flat = -np.linalg.inv(np.diag([0.03, 0.3]))
    w = mx.limit_weights([h_flat, h_sharp])
    np.testing.assert_allclose(w, [0.586, 0.414], atol=5e-4)


def test_limit_weights_degenerate_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        mx.limit_weights([-np.diag([1.0, 0.0])])


# ---------------------------------------------------------------- structure


def test_component_rejects_asymmetric_precision():
    with pytest.raises(ValueError, match="symmetric"):
        mx.GaussianComponent(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_component_rejects_indefinite_precision():
    with pytest.raises(ValueError, match="positive definite"):
        mx.GaussianComponent(np.zeros(2), np.diag([1.0, -1.0]))


def test_state_weights_sum_and_consistency(rng):
    for _ in range(5):
        logits = rng.normal(size=3) * 4
        s = make_state(
            mx.weights_from_logits(logits),
            rng.normal(size=(4, 2)),
            [np.eye(2)] * 4,
        )
        assert abs(s.weights.sum() - 1.0) < 1e-12
        np.testing.assert_allclose(s.logits, logits, atol=1e-9)


def test_state_arrays_readonly():
    s = make_state([0.5, 0.5], [[0.0, 0.0], [1.0, 1.0]], [np.eye(2), np.eye(2)])
    with pytest.raises(ValueError):
        s.components[0].mean[0] = 3.0
    with pytest.raises(ValueError):
        s.components[1].precision[0, 1] = 9.0
    with pytest.raises(ValueError):
        s.logits[0] = 2.0


# ---------------------------------------------------------------- serialization


def test_json_roundtrip():
    s = make_state(
        [0.3, 0.7],
        [[-1.0, 0.5], [1.0, -0.2]],
        [np.diag([1.0, 2.0]), [[2.0, 0.3], [0.3, 1.0]]],
    )
    text = mx.state_to_json(s)
    payload = json.loads(text)
    assert set(payload) == {"weights", "means", "precisions"}
    assert payload["precisions"][1] == [[2.0, 0.3], [0.3, 1.0]]
    back = mx.state_from_json(text)
    np.testing.assert_allclose(back.weights, s.weights, atol=1e-12)
    for c0, c1 in zip(s.components, back.components):
        np.testing.assert_allclose(c0.mean, c1.mean, atol=1e-12)
        np.testing.assert_allclose(c0.precision, c1.precision, atol=1e-12)


def test_payload_missing_key_rejected():
    with pytest.raises(ValueError, match="missing"):
        mx.state_from_payload({"weights": [1.0], "means": [[0.0]]})
