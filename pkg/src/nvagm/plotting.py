"""Report figures: recovery-metric bars and weight trajectories.

Headless by construction; every function writes a PNG and closes its
figure so batch report generation never accumulates state.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_metric_bars", "plot_weight_trajectories"]


def plot_metric_bars(reports, path):
    """Grouped gpr/apr/gsr bars, one group per experiment report dict."""
    if not reports:
        raise ValueError("nothing to plot")
    names = [r["experiment"] for r in reports]
    keys = ("gpr", "apr", "gsr")
    x = np.arange(len(names), dtype=float)
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(names)), 3.6))
    for i, key in enumerate(keys):
        vals = [r["metrics"][key] for r in reports]
        ax.bar(x + (i - 1) * width, vals, width, label=key.upper())
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("recovery ratio")
    ax.legend(frameon=False, fontsize=8)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_weight_trajectories(records, path, title=None):
    """Mixture weights against iteration from one run's trace records."""
    if not records:
        raise ValueError("nothing to plot")
    ts = np.array([r["t"] for r in records])
    weights = np.array([r["weights"] for r in records])
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    for k in range(weights.shape[1]):
        ax.plot(ts, weights[:, k], lw=1.2, label=f"component {k}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("weight")
    ax.set_ylim(0.0, 1.0)
    if title:
        ax.set_title(title, fontsize=9)
    if weights.shape[1] <= 8:
        ax.legend(frameon=False, fontsize=7)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
