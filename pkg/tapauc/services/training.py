"""Training of one configuration on one split, and its fold report."""

from __future__ import annotations

import logging
import math
import time
from typing import List, Optional, Tuple, Union

import numpy as np

from tapauc.exceptions import ContractViolationError, NumericalError
from tapauc.models.mlp import MlpModel, OptimizerState, adam_step, backward, forward, init_network, predict_scores
from tapauc.schemas.network import NetworkConfig
from tapauc.schemas.reports import FoldReport
from tapauc.schemas.training import HyperParams, SelectionSchedule
from tapauc.services.datasets import Dataset
from tapauc.services.evaluation import (
    confusion_metrics,
    roc_auc,
    std_threshold,
    uncertainty_interval,
    zfn_threshold,
)
from tapauc.services.losses import LossResult, ScorePartition, approx_auc_loss, bce_loss, tapauc_loss

logger = logging.getLogger(__name__)

LOG_EVERY_EPOCHS = 50


def compute_loss(
    hp: HyperParams,
    scores: np.ndarray,
    labels: np.ndarray,
    epoch: int,
    schedule: Optional[SelectionSchedule] = None,
) -> LossResult:
    if hp.method == "bce":
        return bce_loss(scores, labels)
    partition = ScorePartition.from_scores(scores, labels)
    if hp.method == "auc_hinge":
        return approx_auc_loss(partition, hp.margin)
    return tapauc_loss(partition, schedule or hp.schedule(), epoch)


def stratified_batches(labels: np.ndarray, batch_size: Union[str, int], rng: np.random.Generator) -> List[np.ndarray]:
    """Row indices of each batch in one epoch.

    ``"full"`` is the whole training split. Otherwise both classes are shuffled
    and dealt round-robin into min(ceil(n / batch_size), |P|, |N|) batches, so
    every batch holds at least one instance of each class.
    """
    n = labels.size
    if batch_size == "full":
        return [np.arange(n)]
    positives = rng.permutation(np.flatnonzero(labels == 1))
    negatives = rng.permutation(np.flatnonzero(labels == 0))
    n_batches = max(1, min(math.ceil(n / batch_size), positives.size, negatives.size))
    pos_slot = np.arange(positives.size) % n_batches
    neg_slot = np.arange(negatives.size) % n_batches
    return [
        np.sort(np.concatenate([positives[pos_slot == b], negatives[neg_slot == b]]))
        for b in range(n_batches)
    ]


def train_model(train: Dataset, hp: HyperParams, seed: int) -> Tuple[MlpModel, float]:
    """Fit a fresh network and return it with the loss of the last batch.

    Initialization uses ``seed``; dropout masks and batch order draw from a
    separate stream derived from it. Raises NumericalError on a non-finite loss.
    """
    if train.n_positive == 0 or train.n_negative == 0:
        raise ContractViolationError(f"{train.name}: training split needs both classes")
    model = init_network(NetworkConfig(input_dim=train.features.shape[1]), seed)
    state = OptimizerState.for_model(model, hp.learning_rate)
    rng = np.random.default_rng([seed, 1])
    schedule = hp.schedule() if hp.method == "tapauc" else None

    last_loss = math.nan
    for epoch in range(hp.e_total):
        for batch in stratified_batches(train.labels, hp.batch_size, rng):
            scores, cache = forward(model, train.features[batch], mode="train", rng=rng)
            loss = compute_loss(hp, scores, train.labels[batch], epoch, schedule)
            if not math.isfinite(loss.value):
                raise NumericalError(f"non-finite loss at epoch {epoch}")
            grads = backward(model, cache, loss.score_gradients)
            model, state = adam_step(model, grads, state)
            last_loss = loss.value
        if (epoch + 1) % LOG_EVERY_EPOCHS == 0:
            logger.debug("%s epoch %d: loss %.6f", hp.key, epoch + 1, last_loss)
    return model, last_loss


def train_one(
    train: Dataset,
    val: Dataset,
    hp: HyperParams,
    seed: int,
    repetition: int = 0,
    fold: int = 0,
    dataset_name: Optional[str] = None,
) -> FoldReport:
    """Train, fix the zero-false-negative threshold on the training scores and
    evaluate it on the validation split.

    Numerical failures produce a report with ``status="failed"`` instead of raising.
    """
    started = time.perf_counter()
    base = dict(
        dataset=dataset_name or train.name,
        config_key=hp.key,
        hyperparams=hp,
        repetition=repetition,
        fold=fold,
        seed=seed,
    )

    try:
        model, final_loss = train_model(train, hp, seed)
        train_scores = predict_scores(model, train.features)
        val_scores = predict_scores(model, val.features)
        if not (np.all(np.isfinite(train_scores)) and np.all(np.isfinite(val_scores))):
            raise NumericalError("non-finite scores after training")
    except NumericalError as exc:
        logger.warning("%s r=%d f=%d failed: %s", hp.key, repetition, fold, exc)
        return FoldReport(
            **base, status="failed", diagnostic=str(exc), duration_seconds=time.perf_counter() - started
        )

    threshold = zfn_threshold(train_scores[train.labels == 1])
    cut = threshold.threshold_zfn
    validation_auc = None
    if 0 < val.n_positive < val.labels.size:
        validation_auc = roc_auc(val_scores, val.labels)
    std_cut = std_threshold(train_scores, train.labels)

    return FoldReport(
        **base,
        final_loss=final_loss,
        threshold=threshold,
        train=confusion_metrics(train_scores, train.labels, cut),
        validation=confusion_metrics(val_scores, val.labels, cut),
        uncertainty=uncertainty_interval(val_scores, val.labels, cut),
        validation_auc=validation_auc,
        threshold_std=std_cut,
        validation_std=confusion_metrics(val_scores, val.labels, std_cut),
        duration_seconds=time.perf_counter() - started,
    )
