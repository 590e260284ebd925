from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from tapauc.schemas.data import FoldPlan, PreprocessReport
from tapauc.schemas.metrics import ConfusionMetrics, ThresholdResult, UncertaintyReport
from tapauc.schemas.training import HyperParams


class FoldReport(BaseModel):
    """Outcome of one training run on one (repetition, fold) split.

    Failed runs keep ``status="failed"`` and a diagnostic; their metric fields stay empty.
    ``duration_seconds`` is not serialized so that reports of seeded runs are reproducible.
    """

    dataset: str
    config_key: str
    hyperparams: HyperParams
    repetition: int
    fold: int
    seed: int
    status: Literal["ok", "failed"] = "ok"
    diagnostic: Optional[str] = None
    final_loss: Optional[float] = None
    threshold: Optional[ThresholdResult] = None
    train: Optional[ConfusionMetrics] = None
    validation: Optional[ConfusionMetrics] = None
    uncertainty: Optional[UncertaintyReport] = None
    validation_auc: Optional[float] = None
    threshold_std: Optional[float] = None
    validation_std: Optional[ConfusionMetrics] = None
    duration_seconds: float = Field(default=0.0, exclude=True)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class ConfigAggregate(BaseModel):
    """Means over the completed folds of one configuration."""

    config_key: str
    hyperparams: HyperParams
    n_folds: int
    n_failed: int
    mean_accuracy: Optional[float] = None
    mean_tpr: Optional[float] = None
    mean_fpr: Optional[float] = None
    mean_auc: Optional[float] = None
    mean_lower_bound: Optional[float] = None
    mean_interval_width: Optional[float] = None
    mean_manual_checks: Optional[float] = None
    mean_useful_checks: Optional[float] = None
    mean_std_tpr: Optional[float] = None
    mean_std_fpr: Optional[float] = None
    feasible: bool = False


class GridSearchResult(BaseModel):
    """Per-configuration aggregates and the configuration picked by the
    best-TPR-under-FPR-cap rule.

    When no configuration meets the cap, ``infeasible`` is set and ``selected``
    holds the best-TPR configuration for information only.
    """

    dataset: str
    method: str
    fpr_cap: float
    aggregates: List[ConfigAggregate]
    selected: Optional[ConfigAggregate] = None
    infeasible: bool = False
    failed_folds: int = 0
    total_folds: int = 0


class ExperimentResult(BaseModel):
    """Everything ``run`` writes to ``grid_result.json``."""

    dataset: str
    results: List[GridSearchResult]


class PreprocessEntry(BaseModel):
    repetition: int
    fold: int
    report: PreprocessReport


class SummaryCell(BaseModel):
    """Selected-configuration metrics of one dataset x method cell, in fractions."""

    dataset: str
    method: str
    config_key: Optional[str] = None
    accuracy: Optional[float] = None
    tpr: Optional[float] = None
    fpr: Optional[float] = None
    lower_bound: Optional[float] = None
    interval_width: Optional[float] = None
    manual_checks: Optional[float] = None
    useful_checks: Optional[float] = None
    infeasible: bool = False


class ExperimentSummary(BaseModel):
    """Cells per dataset and method, plus the unweighted MEAN over datasets per method."""

    datasets: List[str]
    methods: List[str]
    cells: List[SummaryCell]
    means: List[SummaryCell]
    mean_convention: str = "unweighted arithmetic mean over datasets"


class DatasetInfo(BaseModel):
    name: str
    source: str
    n_instances: int
    n_features: int
    n_positive: int
    n_negative: int


class RunConfigEcho(BaseModel):
    """Resolved configuration of a ``run``, including every derived seed."""

    version: str
    dataset: DatasetInfo
    methods: List[str]
    grid_spec: str
    grid: List[HyperParams]
    fold_plan: FoldPlan
    fold_seeds: List[List[int]]
    fpr_cap: float
    correlation_cutoff: float
