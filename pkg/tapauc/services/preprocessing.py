"""Constant/correlated feature removal and min-max scaling, fitted on a training split only."""

from __future__ import annotations

import logging

import numpy as np
from sklearn.preprocessing import MinMaxScaler

from tapauc.exceptions import DatasetError
from tapauc.schemas.data import PreprocessReport
from tapauc.services.datasets import Dataset

logger = logging.getLogger(__name__)

DEFAULT_CORRELATION_CUTOFF = 0.95


def fit_preprocess(train: Dataset, correlation_cutoff: float = DEFAULT_CORRELATION_CUTOFF) -> PreprocessReport:
    """Drop zero-variance columns, then every column whose |Pearson r| with any
    earlier varying column reaches the cutoff (even one that is itself dropped),
    then fit min-max scaling on the rest."""
    if train.features.shape[0] == 0:
        raise DatasetError(f"{train.name}: cannot fit preprocessing on an empty split")
    names = list(train.feature_names)
    x = train.features

    constant = np.ptp(x, axis=0) == 0.0
    varying = np.flatnonzero(~constant)

    correlated = np.zeros(x.shape[1], dtype=bool)
    if varying.size > 1:
        r = np.abs(np.corrcoef(x[:, varying], rowvar=False))
        upper = np.triu(r >= correlation_cutoff, k=1)
        correlated[varying[upper.any(axis=0)]] = True

    retained = np.flatnonzero(~constant & ~correlated)
    if retained.size == 0:
        raise DatasetError(f"{train.name}: preprocessing dropped every feature")

    scaler = MinMaxScaler(clip=False).fit(x[:, retained])
    report = PreprocessReport(
        original_features=names,
        retained_features=[names[i] for i in retained],
        dropped_constant=[names[i] for i in np.flatnonzero(constant)],
        dropped_correlated=[names[i] for i in np.flatnonzero(correlated)],
        scale_min=scaler.data_min_.tolist(),
        scale_max=scaler.data_max_.tolist(),
        correlation_cutoff=correlation_cutoff,
    )
    logger.debug(
        "%s: kept %d of %d features (%d constant, %d correlated)",
        train.name, retained.size, len(names), int(constant.sum()), int(correlated.sum()),
    )
    return report


def fitted_scaler(report: PreprocessReport) -> MinMaxScaler:
    """Scaler with the training min/max of ``report``; the two boundary rows reproduce them exactly."""
    return MinMaxScaler(clip=False).fit(np.array([report.scale_min, report.scale_max]))


def apply_preprocess(dataset: Dataset, report: PreprocessReport) -> Dataset:
    """Select the retained columns and scale with the training min/max.

    Values outside the training range are not clamped.
    """
    if list(dataset.feature_names) != report.original_features:
        unknown = sorted(set(dataset.feature_names) ^ set(report.original_features))
        raise DatasetError(
            f"{dataset.name}: feature set differs from the fitted one (mismatch: {unknown or 'column order'})"
        )
    position = {name: i for i, name in enumerate(dataset.feature_names)}
    columns = [position[name] for name in report.retained_features]
    return Dataset(
        features=fitted_scaler(report).transform(dataset.features[:, columns]),
        labels=dataset.labels,
        feature_names=tuple(report.retained_features),
        name=dataset.name,
    )