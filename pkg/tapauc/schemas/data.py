from typing import Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel, Field


class PreprocessReport(BaseModel):
    """Feature filtering and min-max parameters fitted on one training split."""

    original_features: List[str]
    retained_features: List[str]
    dropped_constant: List[str]
    dropped_correlated: List[str]
    scale_min: List[float]
    scale_max: List[float]
    correlation_cutoff: float


def fold_seed(base_seed: int, repetition: int, fold: int) -> int:
    """Seed of the (repetition, fold) split: base_seed * 1000 + repetition * 10 + fold.

    Distinct for fold < 10 and repetition < 100, the bounds ``stratified_kfold`` enforces.
    """
    return base_seed * 1000 + repetition * 10 + fold


class FoldPlan(BaseModel):
    """Repeated stratified k-fold assignment.

    ``assignments[r][i]`` is the validation fold of instance ``i`` in repetition ``r``.
    ``seeds[r]`` shuffled the classes of repetition ``r``.
    """

    k: int = Field(ge=2)
    repetitions: int = Field(ge=1)
    base_seed: int = Field(ge=0)
    seeds: List[int]
    assignments: List[List[int]]

    @property
    def n_instances(self) -> int:
        return len(self.assignments[0]) if self.assignments else 0

    def seed_for(self, repetition: int, fold: int) -> int:
        return fold_seed(self.base_seed, repetition, fold)

    def split(self, repetition: int, fold: int) -> Tuple[np.ndarray, np.ndarray]:
        """Return (train_indices, validation_indices), both ascending."""
        folds = np.asarray(self.assignments[repetition])
        return np.flatnonzero(folds != fold), np.flatnonzero(folds == fold)

    def iter_splits(self) -> Iterator[Tuple[int, int, np.ndarray, np.ndarray]]:
        for repetition in range(self.repetitions):
            for fold in range(self.k):
                train_idx, val_idx = self.split(repetition, fold)
                yield repetition, fold, train_idx, val_idx
