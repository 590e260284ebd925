"""Dataset container, CSV ingestion, bundled/synthetic datasets and negative subsampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from tapauc.exceptions import DatasetError

logger = logging.getLogger(__name__)

# public layouts: label column, positive value, columns that are not features
WDBC_LAYOUT = {"label_column": "diagnosis", "positive_label": "M", "drop_columns": ("id",)}
CCF_LAYOUT = {"label_column": "Class", "positive_label": "1", "drop_columns": ()}
CCF_NEGATIVE_TARGET = 492


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with binary labels (1 = positive/abnormal)."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]
    name: str = "dataset"

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise DatasetError(f"{self.name}: features must be a 2-D matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise DatasetError(f"{self.name}: one label per row is required")
        if len(self.feature_names) != self.features.shape[1]:
            raise DatasetError(f"{self.name}: {len(self.feature_names)} names for {self.features.shape[1]} columns")
        if not np.isin(self.labels, (0, 1)).all():
            raise DatasetError(f"{self.name}: labels must be 0 or 1")
        if not np.all(np.isfinite(self.features)):
            raise DatasetError(f"{self.name}: features contain missing or non-finite values")

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())

    @property
    def n_negative(self) -> int:
        return int(self.labels.size - self.labels.sum())

    def subset(self, index: np.ndarray) -> Dataset:
        return Dataset(
            features=self.features[index],
            labels=self.labels[index],
            feature_names=self.feature_names,
            name=self.name,
        )


def _require_both_classes(dataset: Dataset) -> Dataset:
    if dataset.labels.size < 2 or dataset.n_positive == 0 or dataset.n_negative == 0:
        raise DatasetError(
            f"{dataset.name}: both classes are required "
            f"({dataset.n_positive} positive, {dataset.n_negative} negative)"
        )
    return dataset


def _is_positive(column: pd.Series, positive_label: object) -> np.ndarray:
    as_text = column.astype(str).str.strip()
    target = str(positive_label).strip()
    matches = (as_text == target).to_numpy()
    numeric = pd.to_numeric(column, errors="coerce")
    try:
        target_value = float(target)
    except ValueError:
        return matches
    return matches | (numeric == target_value).to_numpy()


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int],
    positive_label: object,
    drop_columns: Sequence[str] = (),
    name: Optional[str] = None,
) -> Dataset:
    """Read a comma-separated file with a header row.

    The label column is removed from the features and mapped to 1 where it equals
    ``positive_label`` (compared as text, or numerically when both sides are
    numbers), 0 elsewhere. Empty ``Unnamed: *`` columns left by trailing
    delimiters are ignored; every other cell must be numeric.
    """
    path = Path(path)
    name = name or path.stem
    if not path.is_file():
        raise DatasetError(f"{path}: file not found")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DatasetError(f"{path}: cannot parse as delimited text ({exc})") from exc

    artifacts = [c for c in frame.columns if str(c).startswith("Unnamed:") and frame[c].isna().all()]
    frame = frame.drop(columns=artifacts)

    if isinstance(label_column, int):
        if not 0 <= label_column < frame.shape[1]:
            raise DatasetError(f"{path}: label column index {label_column} out of range")
        label_column = frame.columns[label_column]
    if label_column not in frame.columns:
        raise DatasetError(f"{path}: missing label column {label_column!r}")
    missing = [c for c in drop_columns if c not in frame.columns]
    if missing:
        raise DatasetError(f"{path}: missing columns {missing}")

    labels_raw = frame[label_column]
    if labels_raw.isna().any():
        raise DatasetError(f"{path}: missing values in label column {label_column!r}")
    features = frame.drop(columns=[label_column, *drop_columns])

    for column in features.columns:
        converted = pd.to_numeric(features[column], errors="coerce")
        bad = converted.isna() & features[column].notna()
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DatasetError(
                f"{path}: non-numeric value {features[column].iloc[row]!r} in column {column!r}, row {row}"
            )
        if converted.isna().any():
            raise DatasetError(f"{path}: missing values in column {column!r}")
        features[column] = converted

    dataset = Dataset(
        features=features.to_numpy(dtype=np.float64),
        labels=_is_positive(labels_raw, positive_label).astype(np.int64),
        feature_names=tuple(str(c) for c in features.columns),
        name=name,
    )
    logger.info(
        "loaded %s: %d rows, %d features, %d positive",
        name, dataset.labels.size, dataset.features.shape[1], dataset.n_positive,
    )
    return _require_both_classes(dataset)


def load_wdbc(path: Optional[Union[str, Path]] = None) -> Dataset:
    """WDBC from its public CSV layout, or from the copy bundled with scikit-learn."""
    if path is not None:
        return load_csv(path, name="wdbc", **WDBC_LAYOUT)

    from sklearn.datasets import load_breast_cancer

    bunch = load_breast_cancer()
    # scikit-learn encodes malignant as 0
    labels = (bunch.target == 0).astype(np.int64)
    return _require_both_classes(
        Dataset(
            features=np.asarray(bunch.data, dtype=np.float64),
            labels=labels,
            feature_names=tuple(str(n) for n in bunch.feature_names),
            name="wdbc",
        )
    )


def load_ccf(path: Union[str, Path], seed: int = 0, negative_target: Optional[int] = CCF_NEGATIVE_TARGET) -> Dataset:
    """Credit card fraud data with negatives subsampled to ``negative_target``."""
    dataset = load_csv(path, name="ccf", **CCF_LAYOUT)
    if negative_target is None:
        return dataset
    return subsample_negatives(dataset, negative_target, seed)


def make_synthetic_dataset(
    n_positive: int = 40,
    n_negative: int = 60,
    n_features: int = 6,
    seed: int = 0,
    separation: float = 1.5,
) -> Dataset:
    """Two Gaussian classes; positives are shifted by ``separation`` on every feature."""
    rng = np.random.default_rng(seed)
    negatives = rng.normal(0.0, 1.0, size=(n_negative, n_features))
    positives = rng.normal(separation, 1.0, size=(n_positive, n_features))
    features = np.vstack([negatives, positives])
    labels = np.concatenate([np.zeros(n_negative, dtype=np.int64), np.ones(n_positive, dtype=np.int64)])
    order = rng.permutation(labels.size)
    return Dataset(
        features=features[order],
        labels=labels[order],
        feature_names=tuple(f"x{i}" for i in range(n_features)),
        name="synthetic",
    )


def subsample_negatives(dataset: Dataset, target_count: int, seed: int) -> Dataset:
    """Keep every positive and a uniform sample of ``target_count`` negatives; row order is preserved."""
    negative_index = np.flatnonzero(dataset.labels == 0)
    if target_count > negative_index.size:
        raise DatasetError(
            f"{dataset.name}: cannot keep {target_count} negatives, only {negative_index.size} available"
        )
    if target_count < 0:
        raise DatasetError(f"{dataset.name}: negative target count {target_count}")
    rng = np.random.default_rng(seed)
    kept = rng.choice(negative_index, size=target_count, replace=False)
    index = np.sort(np.concatenate([np.flatnonzero(dataset.labels == 1), kept]))
    logger.info("%s: subsampled negatives %d -> %d", dataset.name, negative_index.size, target_count)
    return dataset.subset(index)
