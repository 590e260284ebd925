"""Thresholds, confusion metrics, ROC-AUC and the uncertainty interval.

A score at or above the threshold is classified positive, so the minimum
positive training score is itself a true positive.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.stats import rankdata

from tapauc.exceptions import ContractViolationError
from tapauc.schemas.metrics import ConfusionMetrics, ThresholdResult, UncertaintyReport


def _scores_and_labels(scores: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.shape != y.shape:
        raise ContractViolationError(f"{s.shape[0]} scores but {y.shape[0]} labels")
    return s, y == 1


def zfn_threshold(train_positive_scores: np.ndarray) -> ThresholdResult:
    """Lowest positive training score: every training positive is classified positive."""
    positives = np.asarray(train_positive_scores, dtype=np.float64).reshape(-1)
    if positives.size == 0:
        raise ContractViolationError("the zero-false-negative threshold needs at least one positive")
    return ThresholdResult(threshold_zfn=float(positives.min()))


def std_threshold(train_scores: np.ndarray, train_labels: np.ndarray) -> float:
    """Accuracy-maximizing threshold on the training scores.

    Candidates are the distinct scores plus one value above the maximum (nothing
    flagged); among equally accurate candidates the highest threshold wins.
    """
    s, positive = _scores_and_labels(train_scores, train_labels)
    if s.size == 0:
        raise ContractViolationError("empty score vector")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = positive[order]
    n, n_neg = s.size, int((~positive).sum())

    # last position of each run of equal scores in descending order
    ends = np.append(np.flatnonzero(np.diff(s_sorted) != 0), n - 1)
    tp = np.cumsum(pos_sorted)[ends]
    fp = np.cumsum(~pos_sorted)[ends]
    accuracy = (tp + (n_neg - fp)) / n

    candidates = np.append(np.nextafter(s_sorted[0], np.inf), s_sorted[ends])
    accuracy = np.append(n_neg / n, accuracy)
    return float(candidates[int(np.argmax(accuracy))])


def confusion_metrics(scores: np.ndarray, labels: np.ndarray, threshold: float) -> ConfusionMetrics:
    s, positive = _scores_and_labels(scores, labels)
    predicted = s >= threshold
    tp = int(np.sum(predicted & positive))
    fn = int(np.sum(~predicted & positive))
    fp = int(np.sum(predicted & ~positive))
    tn = int(np.sum(~predicted & ~positive))
    total = tp + fn + fp + tn

    degenerate = False
    if tp + fn > 0:
        tpr = tp / (tp + fn)
        fnr = 1.0 - tpr
    else:
        tpr = fnr = 0.0
        degenerate = True
    if fp + tn > 0:
        fpr = fp / (fp + tn)
    else:
        fpr = 0.0
        degenerate = True

    return ConfusionMetrics(
        threshold=float(threshold),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        accuracy=(tp + tn) / total if total else 0.0,
        tpr=tpr,
        fpr=fpr,
        fnr=fnr,
        degenerate=degenerate or total == 0,
    )


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Wilcoxon-Mann-Whitney AUC: s_p > s_n counts 1, a tie counts 0.5."""
    s, positive = _scores_and_labels(scores, labels)
    n_pos = int(positive.sum())
    n_neg = s.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ContractViolationError("ROC-AUC needs both classes")
    ranks = rankdata(s, method="average")
    u_statistic = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def uncertainty_interval(
    val_scores: np.ndarray, val_labels: np.ndarray, threshold: float
) -> UncertaintyReport:
    """Interval [worst missed positive, threshold) of scores needing a manual check.

    With no positive below the threshold the interval is empty (zero width).
    """
    s, positive = _scores_and_labels(val_scores, val_labels)
    missed = positive & (s < threshold)
    lower_bound = float(s[missed].min()) if missed.any() else float(threshold)

    flagged = (s >= lower_bound) & (s < threshold)
    n = s.size
    flagged_count = int(flagged.sum())
    useful_count = int((flagged & positive).sum())

    return UncertaintyReport(
        threshold=float(threshold),
        lower_bound=lower_bound,
        width=float(threshold) - lower_bound,
        n_instances=n,
        flagged_count=flagged_count,
        useful_count=useful_count,
        false_negatives=int(missed.sum()),
        captured_false_negatives=int((missed & flagged).sum()),
        manual_checks_pct=flagged_count / n if n else 0.0,
        useful_checks_pct=useful_count / n if n else 0.0,
    )
