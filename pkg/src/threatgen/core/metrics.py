"""Detection metrics for trained discriminators."""

from __future__ import annotations

import numpy as np
from sklearn.metrics import roc_auc_score


def evaluate_discriminator(scores, labels, threshold: float) -> dict:
    """Score a detector on a labeled set; positive class = malicious.

    Returns accuracy, threshold-free AUC, and alert_rate / recall / precision
    at the supplied score threshold.  With a single-class set the AUC is
    reported as None and everything else is still computed.
    """
    scores = np.asarray(scores, dtype=float).reshape(-1)
    labels = np.asarray(labels).reshape(-1).astype(int)
    if scores.shape != labels.shape or scores.size == 0:
        raise ValueError("scores and labels must be equal-length and non-empty")

    alerts = scores > threshold
    positives = labels == 1
    accuracy = float(np.mean(alerts == positives))
    alert_rate = float(np.mean(alerts))
    tp = int(np.sum(alerts & positives))
    recall = tp / max(int(positives.sum()), 1)
    precision = tp / max(int(alerts.sum()), 1)
    auc = None
    if 0 < positives.sum() < labels.size:
        auc = float(roc_auc_score(labels, scores))
    return {
        "accuracy": accuracy,
        "auc": auc,
        "alert_rate": alert_rate,
        "recall": float(recall),
        "precision": float(precision),
    }


def threshold_for_alert_rate(scores, target_rate: float) -> float:
    """Largest threshold whose alert rate is closest to target_rate.

    If the target is not exactly achievable (ties, finite samples) the nearest
    achievable rate wins.
    """
    scores = np.asarray(scores, dtype=float).reshape(-1)
    if scores.size == 0:
        raise ValueError("scores must be non-empty")
    candidates = np.unique(np.concatenate([scores, [scores.min() - 1.0]]))
    best_thr = candidates[0]
    best_gap = float("inf")
    for thr in candidates:
        rate = float(np.mean(scores > thr))
        gap = abs(rate - target_rate)
        if gap < best_gap or (gap == best_gap and thr > best_thr):
            best_gap = gap
            best_thr = float(thr)
    return float(best_thr)
