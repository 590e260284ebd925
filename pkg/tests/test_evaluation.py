import numpy as np
import pytest
from sklearn.metrics import roc_auc_score

from tapauc.exceptions import ContractViolationError
from tapauc.services.evaluation import (
    confusion_metrics,
    roc_auc,
    std_threshold,
    uncertainty_interval,
    zfn_threshold,
)


def test_zfn_threshold_is_the_lowest_positive_score():
    assert zfn_threshold(np.array([0.7, 0.31, 0.9])).threshold_zfn == 0.31
    with pytest.raises(ContractViolationError):
        zfn_threshold(np.array([]))


def test_zfn_threshold_classifies_every_training_positive(rng):
    """
    The threshold is itself a positive score, and ties at the threshold count as positive.
    """
    scores = rng.uniform(size=40)
    labels = (rng.uniform(size=40) < 0.4).astype(int)
    labels[:2] = [1, 0]
    threshold = zfn_threshold(scores[labels == 1]).threshold_zfn
    metrics = confusion_metrics(scores, labels, threshold)
    assert metrics.tpr == 1.0
    assert metrics.fn == 0


def test_confusion_metrics_by_hand():
    scores = np.array([0.9, 0.5, 0.4, 0.5, 0.1])
    labels = np.array([1, 1, 1, 0, 0])
    metrics = confusion_metrics(scores, labels, 0.5)
    assert (metrics.tp, metrics.fn, metrics.fp, metrics.tn) == (2, 1, 1, 1)
    assert metrics.accuracy == pytest.approx(3 / 5)
    assert metrics.tpr == pytest.approx(2 / 3)
    assert metrics.fnr == pytest.approx(1 / 3)
    assert metrics.fpr == pytest.approx(1 / 2)
    assert not metrics.degenerate


def test_single_class_metrics_are_flagged_degenerate():
    metrics = confusion_metrics(np.array([0.2, 0.8]), np.array([0, 0]), 0.5)
    assert metrics.degenerate
    assert metrics.tpr == 0.0
    assert metrics.fpr == 0.5


def test_extreme_thresholds_flag_everything_or_nothing(rng):
    scores = rng.uniform(0.01, 0.99, size=12)
    labels = np.array([1, 0] * 6)
    everything = confusion_metrics(scores, labels, 0.0)
    assert (everything.tpr, everything.fpr) == (1.0, 1.0)
    nothing = confusion_metrics(scores, labels, 1.0)
    assert (nothing.tpr, nothing.fpr) == (0.0, 0.0)
    assert nothing.tp == nothing.fp == 0


def test_confusion_metrics_match_a_per_instance_count(rng):
    scores = rng.uniform(size=30)
    labels = (rng.uniform(size=30) < 0.4).astype(int)
    labels[:2] = [1, 0]
    threshold = float(np.median(scores))
    counts = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for score, label in zip(scores, labels):
        flagged = score >= threshold
        if label == 1:
            counts["tp" if flagged else "fn"] += 1
        else:
            counts["fp" if flagged else "tn"] += 1
    metrics = confusion_metrics(scores, labels, threshold)
    assert (metrics.tp, metrics.fp, metrics.tn, metrics.fn) == (counts["tp"], counts["fp"], counts["tn"], counts["fn"])
    assert metrics.tpr == counts["tp"] / (counts["tp"] + counts["fn"])
    assert metrics.fpr == counts["fp"] / (counts["fp"] + counts["tn"])


def test_roc_auc_equals_pairwise_enumeration_with_ties():
    scores = np.array([0.9, 0.4, 0.4, 0.7, 0.4, 0.2, 0.7, 0.1, 0.95, 0.3])
    labels = np.array([1, 1, 0, 1, 0, 0, 0, 1, 0, 0])
    positives, negatives = scores[labels == 1], scores[labels == 0]
    count = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in positives for n in negatives)
    assert roc_auc(scores, labels) == count / (len(positives) * len(negatives))


def test_roc_auc_agrees_with_scikit_learn(rng):
    scores = np.round(rng.uniform(size=200), 2)
    labels = (rng.uniform(size=200) < 0.3).astype(int)
    assert roc_auc(scores, labels) == pytest.approx(roc_auc_score(labels, scores), abs=1e-12)


def test_roc_auc_ignores_strictly_increasing_transforms(rng):
    scores = np.round(rng.uniform(size=60), 2)
    labels = (rng.uniform(size=60) < 0.5).astype(int)
    labels[:2] = [1, 0]
    assert roc_auc(3.0 * scores**3 + 1.0, labels) == roc_auc(scores, labels)
    assert roc_auc(np.log(scores + 0.5), labels) == roc_auc(scores, labels)


def test_roc_auc_needs_both_classes():
    with pytest.raises(ContractViolationError):
        roc_auc(np.array([0.1, 0.2]), np.array([1, 1]))


def test_std_threshold_prefers_the_highest_equally_accurate_cut():
    """
    Cutting at 0.8 and at 0.35 are both 75% accurate; the higher one wins.
    """
    scores = np.array([0.1, 0.4, 0.35, 0.8])
    labels = np.array([0, 0, 1, 1])
    assert std_threshold(scores, labels) == 0.8


def test_std_threshold_on_separable_scores():
    assert std_threshold(np.array([0.1, 0.2, 0.7, 0.9]), np.array([0, 0, 1, 1])) == 0.7


def test_std_threshold_can_flag_nothing():
    threshold = std_threshold(np.array([0.9, 0.2, 0.3]), np.array([0, 0, 1]))
    assert threshold > 0.9


def test_uncertainty_interval_by_hand():
    scores = np.array([0.2, 0.3, 0.45, 0.6, 0.7, 0.1])
    labels = np.array([0, 1, 0, 1, 1, 0])
    report = uncertainty_interval(scores, labels, 0.5)
    assert report.lower_bound == 0.3
    assert report.width == pytest.approx(0.2)
    assert (report.flagged_count, report.useful_count) == (2, 1)
    assert report.manual_checks_pct == pytest.approx(2 / 6)
    assert report.useful_checks_pct == pytest.approx(1 / 6)
    assert report.false_negatives == report.captured_false_negatives == 1
    assert report.captures_all_false_negatives


def test_uncertainty_interval_is_empty_without_misses():
    report = uncertainty_interval(np.array([0.6, 0.2, 0.8]), np.array([1, 0, 1]), 0.5)
    assert report.width == 0.0
    assert report.lower_bound == 0.5
    assert report.flagged_count == 0
    assert report.captures_all_false_negatives


def test_uncertainty_interval_captures_every_false_negative(rng):
    scores = rng.uniform(size=60)
    labels = (rng.uniform(size=60) < 0.5).astype(int)
    report = uncertainty_interval(scores, labels, 0.7)
    assert report.false_negatives == int(np.sum((labels == 1) & (scores < 0.7)))
    assert report.captures_all_false_negatives
