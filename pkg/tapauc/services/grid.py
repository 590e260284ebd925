"""Hyper-parameter grids, cross-validated grid evaluation and configuration selection."""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from pydantic import ValidationError
from tqdm import tqdm

from tapauc.exceptions import ConfigurationError
from tapauc.schemas.data import FoldPlan, PreprocessReport
from tapauc.schemas.reports import ConfigAggregate, FoldReport, GridSearchResult, PreprocessEntry
from tapauc.schemas.training import METHODS, HyperParams
from tapauc.services.datasets import Dataset
from tapauc.services.preprocessing import DEFAULT_CORRELATION_CUTOFF, apply_preprocess, fit_preprocess
from tapauc.services.training import train_one

logger = logging.getLogger(__name__)

DEFAULT_FPR_CAP = 0.5

MARGINS = (0.1, 0.3, 0.5, 0.7, 1.0)
WARMUP_FRACTIONS = (0.25, 0.5, 0.75)
ALPHAS = ("single", 0.05, 0.10, 0.25, 0.50)

GRID_EPOCHS = {
    "default": {"bce": (60, 200), "auc_hinge": (60, 200), "tapauc": (60, 200)},
    "full": {"bce": (200, 500), "auc_hinge": (200, 500), "tapauc": (60, 200, 500)},
}


def build_grid(method: str, preset: str = "default") -> List[HyperParams]:
    """Every configuration of ``method`` in a named preset."""
    if preset not in GRID_EPOCHS:
        raise ConfigurationError(f"unknown grid {preset!r}, expected one of {sorted(GRID_EPOCHS)}")
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}")
    epochs = GRID_EPOCHS[preset][method]
    if method == "bce":
        return [HyperParams(method="bce", e_total=e) for e in epochs]
    if method == "auc_hinge":
        return [HyperParams(method="auc_hinge", e_total=e, margin=m) for e in epochs for m in MARGINS]
    return [
        HyperParams(method="tapauc", e_total=e, warmup_fraction=w, margin=m, alpha=a)
        for e, w, m, a in itertools.product(epochs, WARMUP_FRACTIONS, MARGINS, ALPHAS)
    ]


def _expand(entry: Dict) -> Iterable[Dict]:
    names = list(entry)
    choices = [value if isinstance(value, list) else [value] for value in entry.values()]
    for combination in itertools.product(*choices):
        yield dict(zip(names, combination))


def load_grid_file(path: Union[str, Path], methods: Optional[Sequence[str]] = None) -> List[HyperParams]:
    """Read a JSON list of objects; list values expand as a cartesian product.

    With ``methods`` given, configurations of other methods are left out.
    Duplicates (same key) are kept once, in first-seen order.
    """
    path = Path(path)
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read grid file ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(entries, list) or not all(isinstance(e, dict) for e in entries):
        raise ConfigurationError(f"{path}: a grid file must hold a list of objects")

    grid: Dict[str, HyperParams] = {}
    for entry in entries:
        for values in _expand(entry):
            try:
                hp = HyperParams(**values)
            except ValidationError as exc:
                raise ConfigurationError(f"{path}: invalid configuration {values}: {exc}") from exc
            if methods is None or hp.method in methods:
                grid.setdefault(hp.key, hp)
    if not grid:
        raise ConfigurationError(f"{path}: grid is empty")
    return list(grid.values())


def resolve_grid(spec: str, methods: Sequence[str]) -> List[HyperParams]:
    """``default``, ``full`` or ``file:PATH``."""
    if spec.startswith("file:"):
        return load_grid_file(spec[len("file:"):], methods)
    return [hp for method in methods for hp in build_grid(method, spec)]


@dataclass(frozen=True)
class PreparedSplit:
    repetition: int
    fold: int
    seed: int
    train: Dataset
    validation: Dataset
    report: PreprocessReport

    def entry(self) -> PreprocessEntry:
        return PreprocessEntry(repetition=self.repetition, fold=self.fold, report=self.report)


def prepare_splits(
    dataset: Dataset, plan: FoldPlan, correlation_cutoff: float = DEFAULT_CORRELATION_CUTOFF
) -> List[PreparedSplit]:
    """Fit preprocessing on each training split and apply it to both sides."""
    if plan.n_instances != dataset.labels.size:
        raise ConfigurationError(
            f"fold plan covers {plan.n_instances} instances, dataset has {dataset.labels.size}"
        )
    splits = []
    for repetition, fold, train_idx, val_idx in plan.iter_splits():
        train, validation = dataset.subset(train_idx), dataset.subset(val_idx)
        report = fit_preprocess(train, correlation_cutoff)
        splits.append(
            PreparedSplit(
                repetition=repetition,
                fold=fold,
                seed=plan.seed_for(repetition, fold),
                train=apply_preprocess(train, report),
                validation=apply_preprocess(validation, report),
                report=report,
            )
        )
    first = splits[0].report
    logger.info(
        "%s: %d splits, first split keeps %d of %d features",
        dataset.name, len(splits), len(first.retained_features), len(first.original_features),
    )
    return splits


def evaluate_grid(
    dataset_name: str,
    grid: Sequence[HyperParams],
    splits: Sequence[PreparedSplit],
    workers: int = 1,
    progress: bool = False,
) -> List[FoldReport]:
    """Train every configuration on every split.

    Reports come back in (configuration, repetition, fold) order whatever the
    number of workers.
    """
    if not grid:
        raise ConfigurationError("grid is empty")
    jobs = [
        delayed(train_one)(s.train, s.validation, hp, s.seed, s.repetition, s.fold, dataset_name)
        for hp in grid
        for s in splits
    ]
    logger.info("%s: %d configurations x %d splits on %d worker(s)", dataset_name, len(grid), len(splits), workers)
    outputs = Parallel(n_jobs=workers, return_as="generator")(jobs)
    reports = list(tqdm(outputs, total=len(jobs), desc=dataset_name, disable=not progress))
    logger.info("%s: grid finished in %.1fs of training", dataset_name, sum(r.duration_seconds for r in reports))
    return reports


def _mean(values: List[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def aggregate_config(hp: HyperParams, reports: Sequence[FoldReport], fpr_cap: float = DEFAULT_FPR_CAP) -> ConfigAggregate:
    """Means over the completed folds; failed folds are only counted."""
    done = [r for r in reports if r.ok]
    aggregate = ConfigAggregate(
        config_key=hp.key,
        hyperparams=hp,
        n_folds=len(reports),
        n_failed=len(reports) - len(done),
        mean_accuracy=_mean([r.validation.accuracy for r in done]),
        mean_tpr=_mean([r.validation.tpr for r in done]),
        mean_fpr=_mean([r.validation.fpr for r in done]),
        mean_auc=_mean([r.validation_auc for r in done]),
        mean_lower_bound=_mean([r.uncertainty.lower_bound for r in done]),
        mean_interval_width=_mean([r.uncertainty.width for r in done]),
        mean_manual_checks=_mean([r.uncertainty.manual_checks_pct for r in done]),
        mean_useful_checks=_mean([r.uncertainty.useful_checks_pct for r in done]),
        mean_std_tpr=_mean([r.validation_std.tpr for r in done if r.validation_std]),
        mean_std_fpr=_mean([r.validation_std.fpr for r in done if r.validation_std]),
    )
    feasible = aggregate.mean_fpr is not None and aggregate.mean_fpr <= fpr_cap
    return aggregate.model_copy(update={"feasible": feasible})


def _preference(aggregate: ConfigAggregate) -> Tuple[float, float, float, str]:
    # higher TPR, lower FPR, higher accuracy, then key
    return (-aggregate.mean_tpr, aggregate.mean_fpr, -aggregate.mean_accuracy, aggregate.config_key)


def select_configuration(
    aggregates: Sequence[ConfigAggregate], fpr_cap: float = DEFAULT_FPR_CAP
) -> Tuple[Optional[ConfigAggregate], bool]:
    """Best mean TPR with mean FPR at or under the cap.

    Returns (selected, infeasible). Without a feasible configuration the best
    one regardless of FPR is returned with ``infeasible=True``.
    """
    scored = [a for a in aggregates if a.mean_tpr is not None]
    if not scored:
        return None, True
    feasible = [a for a in scored if a.mean_fpr <= fpr_cap]
    if feasible:
        return min(feasible, key=_preference), False
    return min(scored, key=_preference), True


def summarize_grid(
    dataset_name: str,
    method: str,
    grid: Sequence[HyperParams],
    reports: Sequence[FoldReport],
    fpr_cap: float = DEFAULT_FPR_CAP,
) -> GridSearchResult:
    by_key: Dict[str, List[FoldReport]] = {hp.key: [] for hp in grid}
    for report in reports:
        if report.config_key in by_key:
            by_key[report.config_key].append(report)
    aggregates = [aggregate_config(hp, by_key[hp.key], fpr_cap) for hp in grid]
    selected, infeasible = select_configuration(aggregates, fpr_cap)
    failed = sum(a.n_failed for a in aggregates)

    if failed:
        logger.warning("%s/%s: %d failed folds excluded from the means", dataset_name, method, failed)
    if selected is None:
        logger.warning("%s/%s: no configuration completed a fold", dataset_name, method)
    elif infeasible:
        logger.warning(
            "%s/%s: no configuration meets FPR <= %g; best TPR is %s (FPR %.4f), reported for information only",
            dataset_name, method, fpr_cap, selected.config_key, selected.mean_fpr,
        )
    else:
        logger.info(
            "%s/%s: selected %s (TPR %.4f, FPR %.4f)",
            dataset_name, method, selected.config_key, selected.mean_tpr, selected.mean_fpr,
        )
    return GridSearchResult(
        dataset=dataset_name,
        method=method,
        fpr_cap=fpr_cap,
        aggregates=aggregates,
        selected=selected,
        infeasible=infeasible,
        failed_folds=failed,
        total_folds=sum(a.n_folds for a in aggregates),
    )


def run_grid(
    dataset: Dataset,
    grid: Sequence[HyperParams],
    plan: FoldPlan,
    fpr_cap: float = DEFAULT_FPR_CAP,
    workers: int = 1,
    correlation_cutoff: float = DEFAULT_CORRELATION_CUTOFF,
    progress: bool = False,
) -> GridSearchResult:
    """Cross-validated grid search of a single-method grid."""
    if not grid:
        raise ConfigurationError("grid is empty")
    methods = sorted({hp.method for hp in grid})
    method = methods[0] if len(methods) == 1 else "+".join(methods)
    splits = prepare_splits(dataset, plan, correlation_cutoff)
    reports = evaluate_grid(dataset.name, grid, splits, workers, progress)
    return summarize_grid(dataset.name, method, grid, reports, fpr_cap)
