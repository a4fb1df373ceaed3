"""Risk metrics and trace summaries."""

from __future__ import annotations

import numpy as np

from .errors import EmptyTestSet

__all__ = ["empirical_risk_node", "empirical_risk_global", "moving_average",
           "consensus_gap"]


def empirical_risk_node(predictions, truths) -> float:
    """Fraction of misclassified labels: mean of |truth - pred| / 2."""
    pred = np.asarray(predictions, dtype=float)
    true = np.asarray(truths, dtype=float)
    if pred.shape != true.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {true.shape}")
    if pred.size == 0:
        raise EmptyTestSet("no test samples")
    return float(np.mean(0.5 * np.abs(true - pred)))


def empirical_risk_global(per_node) -> float:
    """Total misclassified count over all nodes divided by the total test size.

    ``per_node`` is a sequence of (predictions, truths) pairs; nodes may
    have different test sizes and weigh in proportionally.
    """
    mis = 0
    total = 0
    for pred, true in per_node:
        pred = np.asarray(pred, dtype=float)
        true = np.asarray(true, dtype=float)
        mis += float(np.sum(0.5 * np.abs(true - pred)))
        total += pred.size
    if total == 0:
        raise EmptyTestSet("no test samples")
    return mis / total


def moving_average(series, window: int) -> np.ndarray:
    """Trailing mean over the last ``min(window, t+1)`` points."""
    if window < 1:
        raise ValueError("window must be >= 1")
    s = np.asarray(series, dtype=float)
    out = np.empty_like(s)
    csum = np.cumsum(s)
    for t in range(len(s)):
        lo = max(0, t - window + 1)
        out[t] = (csum[t] - (csum[lo - 1] if lo > 0 else 0.0)) / (t - lo + 1)
    return out


def consensus_gap(decision_vectors) -> float:
    """Largest pairwise Euclidean distance between node decision vectors."""
    rs = [np.asarray(r, dtype=float) for r in decision_vectors]
    if len(rs) < 2:
        return 0.0
    return max(float(np.linalg.norm(a - b))
               for i, a in enumerate(rs) for b in rs[i + 1:])
