from __future__ import annotations

import numpy as np

from tapauc.exceptions import DatasetError
from tapauc.schemas.data import FoldPlan, fold_seed
from tapauc.services.datasets import Dataset

# fold_seed packs (repetition, fold) into base_seed * 1000 + r * 10 + f
MAX_FOLDS = 10
MAX_REPETITIONS = 100


def stratified_kfold(dataset: Dataset, k: int = 5, repetitions: int = 5, base_seed: int = 0) -> FoldPlan:
    """Repeated stratified k-fold plan.

    Each repetition shuffles every class with its own seed, ``fold_seed(base_seed, r, 0)``,
    and deals the shuffled members round-robin into the k folds.
    """
    if not 2 <= k <= MAX_FOLDS:
        raise DatasetError(f"k must lie in [2, {MAX_FOLDS}], got {k}")
    if not 1 <= repetitions <= MAX_REPETITIONS:
        raise DatasetError(f"repetitions must lie in [1, {MAX_REPETITIONS}], got {repetitions}")
    if base_seed < 0:
        raise DatasetError(f"base_seed must be non-negative, got {base_seed}")
    classes = [np.flatnonzero(dataset.labels == c) for c in (0, 1)]
    for label, members in zip((0, 1), classes):
        if members.size < k:
            raise DatasetError(
                f"{dataset.name}: class {label} has {members.size} instances, fewer than k={k}"
            )

    seeds = [fold_seed(base_seed, r, 0) for r in range(repetitions)]
    assignments = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        folds = np.empty(dataset.labels.size, dtype=np.int64)
        for members in classes:
            shuffled = rng.permutation(members)
            folds[shuffled] = np.arange(shuffled.size) % k
        assignments.append(folds.tolist())

    return FoldPlan(k=k, repetitions=repetitions, base_seed=base_seed, seeds=seeds, assignments=assignments)
