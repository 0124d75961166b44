"""Figure helpers for the report path.

matplotlib is imported lazily and pinned to the Agg backend so headless
runs never touch a display. Every helper writes one file and returns the
path it wrote.
"""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_series(path, series, xlabel="", ylabel="", title="", logy=False):
    """Line plot of labeled (xs, ys) series.

    ``series`` is a list of (label, xs, ys) triples; points with
    non-finite y are dropped per series.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        keep = np.isfinite(ys)
        ax.plot(xs[keep], ys[keep], marker="o", markersize=4, label=str(label))
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if any(str(label) for label, _, _ in series):
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_scatter(path, xs, ys, xlabel="", ylabel="", title="", hline=None):
    """Scatter plot with an optional horizontal reference line."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(xs, ys, ".", markersize=3)
    if hline is not None:
        ax.axhline(hline, color="tab:red", linewidth=1, label=f"bound {hline}")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_decay_fit(path, dists, norms, J, alpha, title=""):
    """Interaction norms against loop distance with the fitted exponential.

    Pairs with zero norm are dropped from the log-scale scatter; the fit
    line is drawn only when J > 0 and alpha is finite.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    dists = np.asarray(dists, dtype=float)
    norms = np.asarray(norms, dtype=float)
    keep = norms > 0
    ax.semilogy(dists[keep], norms[keep], "o", label="pair norm")
    if J > 0 and np.isfinite(alpha) and keep.any():
        xs = np.linspace(dists[keep].min(), dists[keep].max(), 64)
        ax.semilogy(xs, J * np.exp(-alpha * xs), "-", label="J exp(-alpha d)")
    ax.set_xlabel("loop distance")
    ax.set_ylabel("two-body norm")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
