from typing import Literal

from pydantic import BaseModel, Field


class ThresholdResult(BaseModel):
    """Zero-false-negative operating point learned on the training split."""

    threshold_zfn: float
    source: Literal["train_min_positive"] = "train_min_positive"


class ConfusionMetrics(BaseModel):
    """Counts and rates for the rule ``score >= threshold`` => positive.

    Rates whose denominator is zero are reported as 0 and ``degenerate`` is set.
    """

    threshold: float
    tp: int = Field(ge=0)
    fp: int = Field(ge=0)
    tn: int = Field(ge=0)
    fn: int = Field(ge=0)
    accuracy: float = Field(ge=0.0, le=1.0)
    tpr: float = Field(ge=0.0, le=1.0)
    fpr: float = Field(ge=0.0, le=1.0)
    fnr: float = Field(ge=0.0, le=1.0)
    degenerate: bool = False


class UncertaintyReport(BaseModel):
    """Scores in ``[lower_bound, threshold)`` are routed to a human check.

    ``manual_checks_pct`` and ``useful_checks_pct`` are fractions of the whole
    validation set; tables render them as percentages.
    """

    threshold: float
    lower_bound: float
    width: float = Field(ge=0.0)
    n_instances: int = Field(ge=0)
    flagged_count: int = Field(ge=0)
    useful_count: int = Field(ge=0)
    false_negatives: int = Field(ge=0)
    captured_false_negatives: int = Field(ge=0)
    manual_checks_pct: float = Field(ge=0.0, le=1.0)
    useful_checks_pct: float = Field(ge=0.0, le=1.0)

    @property
    def captures_all_false_negatives(self) -> bool:
        return self.captured_false_negatives == self.false_negatives
