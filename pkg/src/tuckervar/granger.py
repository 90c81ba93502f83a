"""Posterior Granger-causality inference: inclusion probabilities, the
loss-optimal decision threshold, network construction, and recovery metrics.

An edge ``(lag, j, k)`` means the lagged value of series ``k`` helps predict
series ``j``. Decisions minimize the posterior expected loss
``c * FP + FN``; the minimizer thresholds the inclusion probabilities at
``t* = c / (c + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class DecisionConfig:
    """Practical-zero window and false-positive penalty for edge decisions."""

    delta: float = 0.01
    c: float = 1.0

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.c <= 0:
            raise ValueError("c must be positive")

    @property
    def t_star(self) -> float:
        return self.c / (self.c + 1.0)


@dataclass
class GcNetwork:
    """Per-lag inclusion probabilities and decisions plus the composite network."""

    probabilities: np.ndarray  # (L, K, K) in [0, 1]
    decisions: np.ndarray  # (L, K, K) bool
    composite: np.ndarray  # (K, K) bool, OR over lags
    t_star: float

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        self.decisions = np.asarray(self.decisions, dtype=bool)
        self.composite = np.asarray(self.composite, dtype=bool)
        if self.probabilities.shape != self.decisions.shape:
            raise ValueError("probabilities and decisions must share a shape")

    @property
    def n_lags(self) -> int:
        return self.probabilities.shape[0]

    def active_lags(self) -> list:
        """1-based lags with at least one included edge."""
        return [lag + 1 for lag in range(self.n_lags) if self.decisions[lag].any()]


@dataclass
class MetricsReport:
    """Network recovery rates (percent) and model-fit summaries."""

    tpr: float
    tnr: float
    fpr: float
    fnr: float
    r2_in: Optional[float] = None
    r2_out: Optional[float] = None
    notes: dict = field(default_factory=dict)


def lag_coefficient_draws(b_draws: np.ndarray, n_series: int) -> np.ndarray:
    """Rearrange draws of the ``K x KL`` coefficient matrix into ``(n, L, K, K)``."""
    b_draws = np.asarray(b_draws, dtype=float)
    n, k, kl = b_draws.shape
    if k != n_series or kl % k != 0:
        raise ValueError(f"unexpected coefficient draw shape {b_draws.shape}")
    n_lags = kl // k
    return b_draws.reshape(n, k, n_lags, k).transpose(0, 2, 1, 3)


def inclusion_probabilities(coeff_draws: np.ndarray, delta: float = 0.01) -> np.ndarray:
    """Posterior probability that each coefficient magnitude exceeds ``delta / 2``.

    ``coeff_draws`` has shape ``(n_draws, L, K, K)``.
    """
    coeff_draws = np.asarray(coeff_draws, dtype=float)
    if coeff_draws.ndim != 4 or coeff_draws.shape[0] == 0:
        raise ValueError("need a nonempty (n_draws, L, K, K) array")
    excluded = np.mean(np.abs(coeff_draws) < delta / 2.0, axis=0)
    return 1.0 - excluded


def decide_network(probabilities: np.ndarray, cfg: DecisionConfig) -> GcNetwork:
    """Threshold inclusion probabilities at ``t*``; ties at the threshold are included."""
    probabilities = np.asarray(probabilities, dtype=float)
    if np.any(probabilities < 0) or np.any(probabilities > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    decisions = probabilities >= cfg.t_star
    return GcNetwork(
        probabilities=probabilities,
        decisions=decisions,
        composite=decisions.any(axis=0),
        t_star=cfg.t_star,
    )


def expected_loss(probabilities, decisions, c: float) -> tuple:
    """Posterior expected false positives, false negatives, and combined loss."""
    v = np.asarray(probabilities, dtype=float)
    d = np.asarray(decisions, dtype=float)
    if v.shape != d.shape:
        raise ValueError("probabilities and decisions must share a shape")
    fp = float(np.sum(d * (1.0 - v)))
    fn = float(np.sum((1.0 - d) * v))
    return fp, fn, c * fp + fn


def score_network(estimated: np.ndarray, truth: np.ndarray) -> MetricsReport:
    """TPR/TNR/FPR/FNR (percent) over all per-lag cells of the decision array."""
    est = np.asarray(estimated, dtype=bool)
    tru = np.asarray(truth, dtype=bool)
    if est.shape != tru.shape:
        raise ValueError(f"shape mismatch: estimated {est.shape} vs truth {tru.shape}")
    positives = int(tru.sum())
    negatives = int(tru.size - positives)
    tp = int(np.sum(est & tru))
    tn = int(np.sum(~est & ~tru))
    tpr = 100.0 * tp / positives if positives else float("nan")
    tnr = 100.0 * tn / negatives if negatives else float("nan")
    return MetricsReport(tpr=tpr, tnr=tnr, fpr=100.0 - tnr, fnr=100.0 - tpr)


def pad_truth(truth: np.ndarray, n_lags: int) -> np.ndarray:
    """Extend a truth support with all-zero slices for extra experimental lags."""
    truth = np.asarray(truth, dtype=bool)
    if truth.shape[0] > n_lags:
        raise ValueError(f"truth has {truth.shape[0]} lags, more than the requested {n_lags}")
    if truth.shape[0] == n_lags:
        return truth
    pad = np.zeros((n_lags - truth.shape[0],) + truth.shape[1:], dtype=bool)
    return np.concatenate([truth, pad], axis=0)


def r_squared(fitted: np.ndarray, actual: np.ndarray, means=None) -> float:
    """Pooled ``1 - SSE/SST`` across all series and time points.

    ``means`` optionally fixes the per-series centering used in the total sum
    of squares (training means for out-of-sample evaluation). Returns ``nan``
    when the total sum of squares is zero (constant series: not computable).
    """
    fitted = np.asarray(fitted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if fitted.shape != actual.shape:
        raise ValueError("fitted and actual must share a shape")
    centers = np.mean(actual, axis=0) if means is None else np.asarray(means, dtype=float)
    sse = float(np.sum((actual - fitted) ** 2))
    sst = float(np.sum((actual - centers) ** 2))
    if sst == 0.0:
        return float("nan")
    return 1.0 - sse / sst


def roc_sweep(probabilities: np.ndarray, truth: np.ndarray, thresholds=None) -> np.ndarray:
    """(threshold, FPR, TPR) rows for a grid of decision thresholds."""
    v = np.asarray(probabilities, dtype=float)
    tru = np.asarray(truth, dtype=bool)
    if v.shape != tru.shape:
        raise ValueError("probabilities and truth must share a shape")
    if thresholds is None:
        thresholds = np.round(np.arange(0.0, 1.0001, 0.1), 10)
    rows = []
    for t in thresholds:
        if not 0.0 <= t <= 1.0:
            raise ValueError("thresholds must lie in [0, 1]")
        decided = v >= t
        report = score_network(decided, tru)
        rows.append((float(t), report.fpr, report.tpr))
    return np.array(rows)
