"""Classic 1-d / 2-d niching benchmark functions, maximization form.

Vectorized over rows: every function takes an (n, d) array and returns (n,).
Domains are the standard closed boxes; values outside a domain are never
requested by callers (the periodic extension in objectives.py folds points
into the box first).
"""

import numpy as np

__all__ = ["F1", "F2", "F3", "F4", "F5", "F6", "CEC_DOMAINS", "CEC_MODE_SEEDS", "CEC_N_GLOBAL"]


def five_uneven_peak_trap(x):
    t = x[:, 0]
    conds = [
        (t >= 0.0) & (t < 2.5),
        (t >= 2.5) & (t < 5.0),
        (t >= 5.0) & (t < 7.5),
        (t >= 7.5) & (t < 12.5),
        (t >= 12.5) & (t < 17.5),
        (t >= 17.5) & (t < 22.5),
        (t >= 22.5) & (t < 27.5),
        (t >= 27.5) & (t <= 30.0),
    ]
    vals = [
        80.0 * (2.5 - t),
        64.0 * (t - 2.5),
        64.0 * (7.5 - t),
        28.0 * (t - 7.5),
        28.0 * (17.5 - t),
        32.0 * (t - 17.5),
        32.0 * (27.5 - t),
        80.0 * (t - 27.5),
    ]
    return np.select(conds, vals, default=0.0)


def equal_maxima(x):
    return np.sin(5.0 * np.pi * x[:, 0]) ** 6


def uneven_decreasing_maxima(x):
    t = x[:, 0]
    envelope = np.exp(-2.0 * np.log(2.0) * ((t - 0.08) / 0.854) ** 2)
    # t**0.75 is only real for t >= 0; the domain is [0, 1]
    return envelope * np.sin(5.0 * np.pi * (np.abs(t) ** 0.75 - 0.05)) ** 6


def himmelblau(x):
    a, b = x[:, 0], x[:, 1]
    return 200.0 - (a * a + b - 11.0) ** 2 - (a + b * b - 7.0) ** 2


def six_hump_camel_back(x):
    a, b = x[:, 0], x[:, 1]
    a2, b2 = a * a, b * b
    return -((4.0 - 2.1 * a2 + a2 * a2 / 3.0) * a2 + a * b + (4.0 * b2 - 4.0) * b2)


def shubert(x):
    j = np.arange(1.0, 6.0)
    # per-axis sum_j j cos((j+1) x + j), multiplied across axes, negated
    inner = (j * np.cos((j + 1.0) * x[..., None] + j)).sum(axis=-1)
    return -np.prod(inner, axis=-1)


F1, F2, F3, F4, F5, F6 = (
    five_uneven_peak_trap,
    equal_maxima,
    uneven_decreasing_maxima,
    himmelblau,
    six_hump_camel_back,
    shubert,
)

CEC_DOMAINS = {
    1: (np.array([0.0]), np.array([30.0])),
    2: (np.array([0.0]), np.array([1.0])),
    3: (np.array([0.0]), np.array([1.0])),
    4: (np.array([-6.0, -6.0]), np.array([6.0, 6.0])),
    5: (np.array([-1.9, -1.1]), np.array([1.9, 1.1])),
    6: (np.array([-10.0, -10.0]), np.array([10.0, 10.0])),
}

CEC_N_GLOBAL = {1: 2, 2: 5, 3: 1, 4: 4, 5: 2, 6: 18}

# Starting points for numeric mode refinement. F1's two peaks sit exactly on
# the domain boundary (piecewise linear, no interior stationarity) and are
# kept as-is; F6's 18 peaks are located by a grid sweep at build time.
CEC_MODE_SEEDS = {
    1: [np.array([0.0]), np.array([30.0])],
    2: [np.array([0.1 + 0.2 * m]) for m in range(5)],
    3: [np.array([0.08])],
    4: [
        np.array([3.0, 2.0]),
        np.array([-2.8, 3.1]),
        np.array([-3.8, -3.3]),
        np.array([3.6, -1.8]),
    ],
    5: [np.array([0.09, -0.71]), np.array([-0.09, 0.71])],
    6: None,
}
