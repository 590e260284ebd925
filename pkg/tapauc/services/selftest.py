"""Built-in checks run by ``tapauc selftest``.

Each check returns a ``CheckResult``; none of them raise on a mismatch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from tapauc.exceptions import NumericalError, TapAucError
from tapauc.models.mlp import PARAMETER_NAMES, MlpModel, backward, forward, init_network
from tapauc.schemas.network import NetworkConfig
from tapauc.schemas.training import Alpha, HyperParams, SelectionSchedule, floor_fraction
from tapauc.services.datasets import make_synthetic_dataset
from tapauc.services.evaluation import roc_auc
from tapauc.services.folds import stratified_kfold
from tapauc.services.grid import ALPHAS, MARGINS, prepare_splits
from tapauc.services.losses import (
    LossResult,
    ScorePartition,
    approx_auc_loss,
    bce_loss,
    select_hard_negatives,
    tapauc_loss,
)
from tapauc.services.training import train_one
from tapauc.utils.gradcheck import numerical_gradient, relative_error

logger = logging.getLogger(__name__)

GRADIENT_EPS = 1e-3
GRADIENT_TOLERANCE = 1e-4
GRADIENT_FLOOR = 1e-8
# layer-1 bias is exempt: batch norm makes its gradient identically zero
MIN_GRADIENT = 1e-3
ORACLE_TOLERANCE = 1e-12
ORACLE_INSTANCES = 200

LossFn = Callable[[np.ndarray, np.ndarray], LossResult]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def brute_force_squared_hinge(
    positives: np.ndarray, negatives: np.ndarray, margin: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Mean squared hinge over every pair, with gradients for P and N, by double loop."""
    pair_count = len(positives) * len(negatives)
    terms = []
    grad_pos = [0.0] * len(positives)
    grad_neg = [0.0] * len(negatives)
    for i, s_p in enumerate(positives):
        for j, s_n in enumerate(negatives):
            hinge = max(0.0, float(s_n) + margin - float(s_p))
            terms.append(hinge * hinge)
            grad_pos[i] -= 2.0 * hinge
            grad_neg[j] += 2.0 * hinge
    return (
        math.fsum(terms) / pair_count,
        np.asarray(grad_pos) / pair_count,
        np.asarray(grad_neg) / pair_count,
    )


def brute_force_hard_negatives(negatives: np.ndarray, alpha: Alpha) -> List[int]:
    k = 1 if alpha == "single" else max(1, floor_fraction(alpha, len(negatives)))
    return sorted(range(len(negatives)), key=lambda j: (-negatives[j], j))[:k]


def brute_force_auc(positives: np.ndarray, negatives: np.ndarray) -> float:
    count = 0.0
    for s_p in positives:
        for s_n in negatives:
            count += 1.0 if s_p > s_n else 0.5 if s_p == s_n else 0.0
    return count / (len(positives) * len(negatives))


def loss_function(method: str, margin: float = 0.3, alpha: Alpha = 0.25) -> LossFn:
    """Score-level loss of ``method`` with selection active from the first epoch."""
    if method == "bce":
        return bce_loss
    if method == "auc_hinge":
        return lambda scores, labels: approx_auc_loss(ScorePartition.from_scores(scores, labels), margin)
    schedule = SelectionSchedule(total_epochs=1, warmup_epochs=0, alpha=alpha, margin=margin)
    return lambda scores, labels: tapauc_loss(ScorePartition.from_scores(scores, labels), schedule, 0)


def kink_distance(
    model: MlpModel, features: np.ndarray, labels: np.ndarray, method: str, margin: float, alpha: Alpha
) -> Tuple[float, float]:
    """(distance of batch-norm outputs from the ReLU kink, distance of scores from
    a hinge or selection boundary)."""
    scores, cache = forward(model, features, mode="train")
    relu = float(np.abs(cache.bn_output).min())
    if method == "bce":
        return relu, math.inf
    positives, negatives = scores[labels == 1], scores[labels == 0]
    boundary = float(np.abs(negatives[np.newaxis, :] + margin - positives[:, np.newaxis]).min())
    if method == "tapauc":
        ranked = np.sort(negatives)[::-1]
        k = 1 if alpha == "single" else max(1, floor_fraction(alpha, ranked.size))
        if k < ranked.size:
            boundary = min(boundary, float(ranked[k - 1] - ranked[k]))
    return relu, boundary


def gradcheck_problem(
    method: str,
    seed: int = 0,
    n_rows: int = 10,
    input_dim: int = 6,
    hidden_dim: int = 3,
    margin: float = 0.3,
    alpha: Alpha = 0.25,
) -> Tuple[MlpModel, np.ndarray, np.ndarray]:
    """Seeded model and batch whose finite differences do not cross a kink.

    Seeds are tried from ``seed`` upward until the ReLU inputs stay at least
    0.05 and the scores at least 0.005 away from every non-smooth point, and
    every gradient entry except the layer-1 bias is at least ``MIN_GRADIENT``
    in magnitude.
    """
    labels = np.array([1] * 4 + [0] * (n_rows - 4))
    loss_fn = loss_function(method, margin, alpha)
    for candidate in range(seed, seed + 1000):
        rng = np.random.default_rng(candidate)
        features = rng.normal(size=(n_rows, input_dim))
        model = init_network(NetworkConfig(input_dim=input_dim, hidden_dim=hidden_dim, dropout_rate=0.0), candidate)
        model.layer1_bias = rng.normal(0.0, 0.1, hidden_dim)
        model.bn_scale = rng.uniform(0.5, 1.5, hidden_dim)
        model.bn_shift = rng.normal(0.0, 0.3, hidden_dim)
        model.layer2_bias = rng.normal(0.0, 0.1, 1)
        relu, boundary = kink_distance(model, features, labels, method, margin, alpha)
        if relu < 0.05 or boundary < 0.005:
            continue
        if smallest_gradient(model, features, labels, loss_fn) >= MIN_GRADIENT:
            return model, features, labels
    raise NumericalError(f"no kink-free gradient check problem for {method} near seed {seed}")


def smallest_gradient(model: MlpModel, features: np.ndarray, labels: np.ndarray, loss_fn: LossFn) -> float:
    scores, cache = forward(model, features, mode="train")
    grads = backward(model, cache, loss_fn(scores, labels).score_gradients)
    return min(float(np.abs(grads[name]).min()) for name in PARAMETER_NAMES if name != "layer1_bias")


def network_gradient_errors(
    model: MlpModel, features: np.ndarray, labels: np.ndarray, loss_fn: LossFn, eps: float = GRADIENT_EPS
) -> Dict[str, float]:
    """Worst entry-wise relative error between backprop and central differences, per parameter."""
    scores, cache = forward(model, features, mode="train")
    analytic = backward(model, cache, loss_fn(scores, labels).score_gradients)

    def objective() -> float:
        return loss_fn(forward(model, features, mode="train")[0], labels).value

    return {
        name: float(
            relative_error(
                analytic[name], numerical_gradient(objective, getattr(model, name), eps), floor=GRADIENT_FLOOR
            ).max()
        )
        for name in PARAMETER_NAMES
    }


def check_gradients(seed: int = 0) -> List[CheckResult]:
    results = []
    for method in ("bce", "auc_hinge", "tapauc"):
        model, features, labels = gradcheck_problem(method, seed)
        errors = network_gradient_errors(model, features, labels, loss_function(method))
        worst = max(errors, key=errors.get)
        results.append(
            CheckResult(
                name=f"gradient/{method}",
                passed=errors[worst] <= GRADIENT_TOLERANCE,
                detail=f"worst {worst}: {errors[worst]:.2e}",
            )
        )
    return results


def check_oracles(seed: int = 0, instances: int = ORACLE_INSTANCES) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    alphas = [*ALPHAS, 1.0]
    worst = {"approx_auc_loss": 0.0, "tapauc_loss": 0.0}
    auc_mismatches = 0
    for _ in range(instances):
        positives = rng.uniform(size=rng.integers(1, 51))
        negatives = rng.uniform(size=rng.integers(1, 51))
        margin = float(rng.choice(MARGINS))
        alpha = alphas[rng.integers(len(alphas))]
        partition = ScorePartition.from_sets(positives, negatives)
        n_pos = positives.size

        value, grad_pos, grad_neg = brute_force_squared_hinge(positives, negatives, margin)
        result = approx_auc_loss(partition, margin)
        worst["approx_auc_loss"] = max(
            worst["approx_auc_loss"],
            abs(result.value - value),
            float(np.abs(result.score_gradients - np.concatenate([grad_pos, grad_neg])).max()),
        )

        chosen = brute_force_hard_negatives(negatives, alpha)
        value, grad_pos, grad_sub = brute_force_squared_hinge(positives, negatives[chosen], margin)
        expected = np.zeros(n_pos + negatives.size)
        expected[:n_pos] = grad_pos
        expected[n_pos + np.asarray(chosen)] = grad_sub
        schedule = SelectionSchedule(total_epochs=1, warmup_epochs=0, alpha=alpha, margin=margin)
        result = tapauc_loss(partition, schedule, 0)
        worst["tapauc_loss"] = max(
            worst["tapauc_loss"],
            abs(result.value - value),
            float(np.abs(result.score_gradients - expected).max()),
        )

        # two-decimal scores force ties
        tied = np.round(partition.scores, 2)
        labels = np.r_[np.ones(n_pos), np.zeros(negatives.size)]
        if roc_auc(tied, labels) != brute_force_auc(tied[:n_pos], tied[n_pos:]):
            auc_mismatches += 1

    results = [
        CheckResult(name=f"oracle/{name}", passed=error <= ORACLE_TOLERANCE, detail=f"max deviation {error:.2e}")
        for name, error in worst.items()
    ]
    results.append(
        CheckResult(name="oracle/roc_auc", passed=auc_mismatches == 0, detail=f"{auc_mismatches} mismatches")
    )
    return results


def check_reductions(seed: int = 0) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    partition = ScorePartition.from_sets(rng.uniform(size=7), rng.uniform(size=11))
    full = approx_auc_loss(partition, 0.5)

    every = tapauc_loss(partition, SelectionSchedule(total_epochs=4, warmup_epochs=0, alpha=1.0, margin=0.5), 0)
    warming = tapauc_loss(partition, SelectionSchedule(total_epochs=4, warmup_epochs=2, alpha=0.05, margin=0.5), 1)
    small = np.array([0.2, 0.9, 0.4])
    return [
        CheckResult(
            name="reduction/alpha_one",
            passed=every.value == full.value and np.array_equal(every.score_gradients, full.score_gradients),
            detail="alpha=1 equals the full loss bitwise",
        ),
        CheckResult(
            name="reduction/warmup",
            passed=warming.value == full.value and np.array_equal(warming.score_gradients, full.score_gradients),
            detail="warmup epochs use the full loss",
        ),
        CheckResult(
            name="reduction/floor_fallback",
            passed=select_hard_negatives(small, 0.05).tolist() == [1]
            and select_hard_negatives(small, "single").tolist() == [1],
            detail="floor(alpha |N|) = 0 keeps the hardest negative",
        ),
    ]


def check_zero_false_negatives(seed: int = 0) -> List[CheckResult]:
    dataset = make_synthetic_dataset(n_positive=30, n_negative=45, n_features=5, seed=seed, separation=1.0)
    split = prepare_splits(dataset, stratified_kfold(dataset, k=3, repetitions=1, base_seed=seed))[0]
    grid = [
        HyperParams(method="bce", e_total=20),
        HyperParams(method="auc_hinge", e_total=20, margin=0.5),
        HyperParams(method="tapauc", e_total=20, warmup_fraction=0.5, margin=0.5, alpha=0.25),
    ]
    results = []
    for hp in grid:
        report = train_one(split.train, split.validation, hp, split.seed, dataset_name=dataset.name)
        passed = (
            report.ok and report.train.tpr == 1.0 and report.train.fn == 0
            and report.uncertainty.captures_all_false_negatives
        )
        detail = report.diagnostic if not report.ok else (
            f"train TPR {report.train.tpr:.4f}, validation FN {report.uncertainty.false_negatives} "
            f"captured {report.uncertainty.captured_false_negatives}"
        )
        results.append(CheckResult(name=f"zfn/{hp.method}", passed=passed, detail=detail))
    return results


def run_selftest(seed: int = 0) -> List[CheckResult]:
    suites = (check_gradients, check_oracles, check_reductions, check_zero_false_negatives)
    results: List[CheckResult] = []
    for suite in suites:
        try:
            results.extend(suite(seed))
        except TapAucError as exc:
            logger.warning("%s raised: %s", suite.__name__, exc)
            results.append(CheckResult(name=suite.__name__, passed=False, detail=str(exc)))
    failed = [r.name for r in results if not r.passed]
    logger.info("selftest: %d checks, %d failed", len(results), len(failed))
    return results
