import math
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Method = Literal["bce", "auc_hinge", "tapauc"]
Alpha = Union[Literal["single"], float]

METHODS = ("bce", "auc_hinge", "tapauc")

# floor() of products such as 0.29 * 100 must not lose a unit to rounding
FLOOR_TOLERANCE = 1e-9


def floor_fraction(fraction: float, count: int) -> int:
    return int(math.floor(fraction * count + FLOOR_TOLERANCE))


def _check_alpha(alpha: Optional[Alpha]) -> Optional[Alpha]:
    if alpha is None or alpha == "single":
        return alpha
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1] or be 'single', got {alpha}")
    return alpha


class SelectionSchedule(BaseModel):
    """When and how hard negatives are selected by the tapAUC loss."""

    model_config = ConfigDict(frozen=True)

    total_epochs: int = Field(ge=1)
    warmup_epochs: int = Field(ge=0)
    alpha: Alpha
    margin: float = Field(gt=0.0)

    @field_validator("alpha")
    @classmethod
    def _alpha_in_range(cls, value: Optional[Alpha]) -> Optional[Alpha]:
        return _check_alpha(value)

    @model_validator(mode="after")
    def _warmup_within_total(self) -> "SelectionSchedule":
        if self.warmup_epochs > self.total_epochs:
            raise ValueError(
                f"warmup_epochs ({self.warmup_epochs}) exceeds total_epochs ({self.total_epochs})"
            )
        return self

    def selection_active(self, epoch: int) -> bool:
        return epoch >= self.warmup_epochs


class HyperParams(BaseModel):
    """One point of the hyper-parameter grid.

    Fields that do not apply to a method must be left unset: ``margin`` is only
    used by the hinge-based methods, ``warmup_fraction`` and ``alpha`` only by tapauc.
    """

    model_config = ConfigDict(frozen=True)

    method: Method
    e_total: int = Field(ge=1)
    warmup_fraction: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    margin: Optional[float] = Field(default=None, gt=0.0)
    alpha: Optional[Alpha] = None
    learning_rate: float = Field(default=0.01, gt=0.0)
    batch_size: Union[Literal["full"], int] = "full"

    @field_validator("alpha")
    @classmethod
    def _alpha_in_range(cls, value: Optional[Alpha]) -> Optional[Alpha]:
        return _check_alpha(value)

    @field_validator("batch_size")
    @classmethod
    def _batch_holds_both_classes(cls, value: Union[str, int]) -> Union[str, int]:
        if value != "full" and value < 2:
            raise ValueError("batch_size must be 'full' or at least 2")
        return value

    @model_validator(mode="after")
    def _fields_match_method(self) -> "HyperParams":
        needs = {
            "bce": set(),
            "auc_hinge": {"margin"},
            "tapauc": {"margin", "warmup_fraction", "alpha"},
        }[self.method]
        for name in ("margin", "warmup_fraction", "alpha"):
            present = getattr(self, name) is not None
            if name in needs and not present:
                raise ValueError(f"method {self.method} requires {name}")
            if name not in needs and present:
                raise ValueError(f"method {self.method} does not use {name}")
        return self

    @property
    def warmup_epochs(self) -> int:
        if self.warmup_fraction is None:
            return 0
        return floor_fraction(self.warmup_fraction, self.e_total)

    @property
    def key(self) -> str:
        """Stable textual identity, also the last tie-breaker of grid selection."""
        parts = [self.method, f"e_total={self.e_total}"]
        if self.warmup_fraction is not None:
            parts.append(f"warmup={self.warmup_fraction:g}")
        if self.margin is not None:
            parts.append(f"margin={self.margin:g}")
        if self.alpha is not None:
            parts.append(f"alpha={self.alpha if self.alpha == 'single' else format(self.alpha, 'g')}")
        parts.append(f"lr={self.learning_rate:g}")
        parts.append(f"batch={self.batch_size}")
        return "|".join(parts)

    def schedule(self) -> SelectionSchedule:
        if self.method != "tapauc":
            raise ValueError(f"method {self.method} has no selection schedule")
        return SelectionSchedule(
            total_epochs=self.e_total,
            warmup_epochs=self.warmup_epochs,
            alpha=self.alpha,
            margin=self.margin,
        )
