"""Figure rendering for the report paths: network grids, ROC curves, and
chain diagnostics, written next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def save_network_grid(path, composite, per_lag, title: str = "Granger network"):
    """Composite adjacency on the left, one panel per lag to the right."""
    per_lag = np.asarray(per_lag, dtype=bool)
    n_lags = per_lag.shape[0]
    fig, axes = plt.subplots(1, n_lags + 1, figsize=(2.1 * (n_lags + 1), 2.4))
    axes = np.atleast_1d(axes)
    axes[0].imshow(np.asarray(composite, dtype=float), cmap="Greys", vmin=0, vmax=1)
    axes[0].set_title("composite", fontsize=9)
    for lag in range(n_lags):
        ax = axes[lag + 1]
        ax.imshow(per_lag[lag].astype(float), cmap="Greys", vmin=0, vmax=1)
        ax.set_title(f"lag {lag + 1}", fontsize=9)
    for ax in axes:
        ax.set_xticks([])
        ax.set_yticks([])
    fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    _save(fig, path)


def save_probability_grid(path, probabilities, title: str = "inclusion probabilities"):
    probabilities = np.asarray(probabilities, dtype=float)
    n_lags = probabilities.shape[0]
    fig, axes = plt.subplots(1, n_lags, figsize=(2.1 * n_lags, 2.4))
    axes = np.atleast_1d(axes)
    for lag in range(n_lags):
        im = axes[lag].imshow(probabilities[lag], cmap="viridis", vmin=0, vmax=1)
        axes[lag].set_title(f"lag {lag + 1}", fontsize=9)
        axes[lag].set_xticks([])
        axes[lag].set_yticks([])
    fig.colorbar(im, ax=axes.tolist(), shrink=0.8)
    fig.suptitle(title, fontsize=11)
    _save(fig, path)


def save_roc_curve(path, points, title: str = "network recovery ROC"):
    """``points`` rows are (threshold, FPR, TPR) in percent."""
    points = np.asarray(points, dtype=float)
    fig, ax = plt.subplots(figsize=(4, 4))
    order = np.argsort(points[:, 1])
    ax.plot(points[order, 1], points[order, 2], marker="o", lw=1.2)
    ax.plot([0, 100], [0, 100], ls="--", color="grey", lw=0.8)
    for t, fpr, tpr in points:
        ax.annotate(f"{t:.1f}", (fpr, tpr), fontsize=6, xytext=(3, 3),
                    textcoords="offset points")
    ax.set_xlabel("FPR (%)")
    ax.set_ylabel("TPR (%)")
    ax.set_title(title, fontsize=11)
    ax.set_xlim(-2, 102)
    ax.set_ylim(-2, 102)
    fig.tight_layout()
    _save(fig, path)


def save_chain_diagnostics(path, draws, title: str = "chain diagnostics"):
    """Noise-variance trace and lag-factor row norms across stored draws."""
    fig, axes = plt.subplots(1, 2, figsize=(8, 3))
    axes[0].plot(draws.sigma2, lw=0.8)
    axes[0].set_title("noise variance draws", fontsize=9)
    axes[0].set_xlabel("stored draw")
    for lag in range(draws.beta3_row_norms.shape[1]):
        axes[1].plot(draws.beta3_row_norms[:, lag], lw=0.8, label=f"lag {lag + 1}")
    axes[1].set_title("lag-factor row norms", fontsize=9)
    axes[1].set_xlabel("stored draw")
    axes[1].legend(fontsize=6, ncol=2)
    fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    _save(fig, path)


def save_fit_series(path, actual, fitted, split: int = 0, max_series: int = 3,
                    title: str = "one-step-ahead fit"):
    """Observed vs fitted values for the first few series."""
    actual = np.asarray(actual, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    n_series = min(max_series, actual.shape[1])
    fig, axes = plt.subplots(n_series, 1, figsize=(7, 1.8 * n_series), sharex=True)
    axes = np.atleast_1d(axes)
    for j in range(n_series):
        axes[j].plot(actual[:, j], color="black", lw=0.8, label="observed")
        axes[j].plot(fitted[:, j], color="crimson", lw=0.8, label="fitted")
        if split > 0:
            axes[j].axvline(actual.shape[0] - split, color="grey", ls=":", lw=0.8)
        axes[j].set_ylabel(f"s{j + 1}", fontsize=8)
    axes[0].legend(fontsize=7, loc="upper right")
    fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    _save(fig, path)


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
