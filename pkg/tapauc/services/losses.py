"""Training losses with exact gradients with respect to the input scores.

Every loss returns a ``LossResult`` whose ``score_gradients`` is aligned with
the score vector it was given, so it can be passed straight to
``tapauc.models.mlp.backward``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from tapauc.exceptions import ContractViolationError
from tapauc.schemas.training import Alpha, SelectionSchedule, floor_fraction

logger = logging.getLogger(__name__)

BCE_CLAMP = 1e-12


@dataclass(frozen=True)
class LossResult:
    value: float
    score_gradients: np.ndarray


@dataclass(frozen=True)
class ScorePartition:
    """Scores split by class, with back-references into the original vector.

    ``scores[positive_index]`` is P and ``scores[negative_index]`` is N, both in
    original order.
    """

    scores: np.ndarray
    positive_index: np.ndarray
    negative_index: np.ndarray

    @classmethod
    def from_scores(cls, scores: np.ndarray, labels: np.ndarray) -> ScorePartition:
        scores = np.asarray(scores, dtype=np.float64).reshape(-1)
        labels = np.asarray(labels).reshape(-1)
        if scores.shape != labels.shape:
            raise ContractViolationError(
                f"{scores.shape[0]} scores but {labels.shape[0]} labels"
            )
        return cls(
            scores=scores,
            positive_index=np.flatnonzero(labels == 1),
            negative_index=np.flatnonzero(labels != 1),
        )

    @classmethod
    def from_sets(cls, positives: np.ndarray, negatives: np.ndarray) -> ScorePartition:
        """Concatenate P then N; gradients come back in that order."""
        positives = np.asarray(positives, dtype=np.float64).reshape(-1)
        negatives = np.asarray(negatives, dtype=np.float64).reshape(-1)
        n_pos = positives.shape[0]
        return cls(
            scores=np.concatenate([positives, negatives]),
            positive_index=np.arange(n_pos),
            negative_index=np.arange(n_pos, n_pos + negatives.shape[0]),
        )

    @property
    def positives(self) -> np.ndarray:
        return self.scores[self.positive_index]

    @property
    def negatives(self) -> np.ndarray:
        return self.scores[self.negative_index]

    def sorted_negatives(self) -> np.ndarray:
        """N in descending score order, ties kept in original order."""
        return self.negatives[np.argsort(-self.negatives, kind="stable")]

    def hard_subset(self, alpha: Alpha) -> np.ndarray:
        """Positions in the full score vector of the hardest negatives, by rank."""
        return self.negative_index[select_hard_negatives(self.negatives, alpha)]


def bce_loss(scores: np.ndarray, labels: np.ndarray) -> LossResult:
    """Mean binary cross-entropy; scores are clamped to [1e-12, 1 - 1e-12]."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if s.shape != y.shape:
        raise ContractViolationError(f"{s.shape[0]} scores but {y.shape[0]} labels")
    if s.shape[0] == 0:
        raise ContractViolationError("empty score vector")
    n = s.shape[0]
    s = np.clip(s, BCE_CLAMP, 1.0 - BCE_CLAMP)
    value = -np.mean(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))
    gradients = (-y / s + (1.0 - y) / (1.0 - s)) / n
    return LossResult(value=float(value), score_gradients=gradients)


def _require_both_classes(partition: ScorePartition) -> None:
    if partition.positive_index.size == 0:
        raise ContractViolationError("no positive scores: the pairwise loss needs both classes")
    if partition.negative_index.size == 0:
        raise ContractViolationError("no negative scores: the pairwise loss needs both classes")


def _pairwise_squared_hinge(
    scores: np.ndarray,
    positive_index: np.ndarray,
    negative_index: np.ndarray,
    margin: float,
) -> LossResult:
    positives = scores[positive_index]
    negatives = scores[negative_index]
    pair_count = positives.shape[0] * negatives.shape[0]

    # hinge[p, n] = max(0, s_n + margin - s_p)
    hinge = np.maximum(0.0, negatives[np.newaxis, :] + margin - positives[:, np.newaxis])
    value = np.sum(hinge * hinge) / pair_count

    gradients = np.zeros_like(scores)
    gradients[negative_index] = 2.0 * hinge.sum(axis=0) / pair_count
    gradients[positive_index] = -2.0 * hinge.sum(axis=1) / pair_count
    return LossResult(value=float(value), score_gradients=gradients)


def approx_auc_loss(partition: ScorePartition, margin: float) -> LossResult:
    """Squared-hinge surrogate of the pairwise AUC loss over all of P x N."""
    _require_both_classes(partition)
    if margin <= 0.0:
        raise ContractViolationError(f"margin must be positive, got {margin}")
    return _pairwise_squared_hinge(
        partition.scores, partition.positive_index, partition.negative_index, margin
    )


def select_hard_negatives(negatives: np.ndarray, alpha: Alpha) -> np.ndarray:
    """Indices of the k highest negative scores, highest first.

    k = max(1, floor(alpha * |N|)) for a fractional alpha and 1 for ``"single"``.
    Equal scores are ranked by lower original index.
    """
    negatives = np.asarray(negatives, dtype=np.float64).reshape(-1)
    if negatives.shape[0] == 0:
        raise ContractViolationError("cannot select hard negatives from an empty set")
    if alpha == "single":
        k = 1
    else:
        if not 0.0 < alpha <= 1.0:
            raise ContractViolationError(f"alpha must lie in (0, 1] or be 'single', got {alpha}")
        k = max(1, floor_fraction(alpha, negatives.shape[0]))
    return np.argsort(-negatives, kind="stable")[:k]


def tapauc_loss(
    partition: ScorePartition,
    schedule: SelectionSchedule,
    epoch: int,
) -> LossResult:
    """Squared hinge over P x N_alpha, or over P x N while still warming up.

    The hard subset is recomputed from the current scores on every call;
    negatives outside it get exactly zero gradient.
    """
    _require_both_classes(partition)
    if not 0 <= epoch < schedule.total_epochs:
        raise ContractViolationError(
            f"epoch {epoch} outside [0, {schedule.total_epochs})"
        )
    if not schedule.selection_active(epoch):
        return approx_auc_loss(partition, schedule.margin)

    selected = partition.hard_subset(schedule.alpha)
    # summing in original order keeps alpha=1 bitwise equal to the full loss
    selected = np.sort(selected)
    logger.debug("epoch %d: %d of %d negatives selected", epoch, selected.size, partition.negative_index.size)
    return _pairwise_squared_hinge(partition.scores, partition.positive_index, selected, schedule.margin)
