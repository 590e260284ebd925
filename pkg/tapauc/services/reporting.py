"""Summary tables over datasets and methods, and the files a run writes."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, TypeAdapter, ValidationError

from tapauc.exceptions import ConfigurationError
from tapauc.schemas.reports import (
    ExperimentResult,
    ExperimentSummary,
    FoldReport,
    GridSearchResult,
    PreprocessEntry,
    SummaryCell,
)
from tapauc.schemas.training import METHODS

logger = logging.getLogger(__name__)

MEAN_ROW = "MEAN"
FOLD_REPORTS_FILE = "fold_reports.jsonl"
GRID_RESULT_FILE = "grid_result.json"
SUMMARY_FILE = "summary.json"
SUMMARY_TABLE_FILE = "summary_table.txt"
UNCERTAINTY_TABLE_FILE = "uncertainty_table.txt"
PREPROCESS_FILE = "preprocess_report.json"
CONFIG_ECHO_FILE = "config_echo.json"

CELL_METRICS = ("accuracy", "tpr", "fpr", "lower_bound", "interval_width", "manual_checks", "useful_checks")

_preprocess_entries = TypeAdapter(List[PreprocessEntry])


def summary_cell(result: GridSearchResult) -> SummaryCell:
    selected = result.selected
    if selected is None:
        return SummaryCell(dataset=result.dataset, method=result.method, infeasible=True)
    return SummaryCell(
        dataset=result.dataset,
        method=result.method,
        config_key=selected.config_key,
        accuracy=selected.mean_accuracy,
        tpr=selected.mean_tpr,
        fpr=selected.mean_fpr,
        lower_bound=selected.mean_lower_bound,
        interval_width=selected.mean_interval_width,
        manual_checks=selected.mean_manual_checks,
        useful_checks=selected.mean_useful_checks,
        infeasible=result.infeasible,
    )


def _ordered_methods(methods: Sequence[str]) -> List[str]:
    known = [m for m in METHODS if m in methods]
    return known + sorted(set(methods) - set(known))


def aggregate_report(results: Sequence[GridSearchResult]) -> ExperimentSummary:
    """One cell per dataset x method, plus a MEAN cell per method.

    The MEAN is the unweighted mean over datasets of each metric, infeasible
    cells included; datasets missing a value are skipped for that metric.
    """
    cells = [summary_cell(r) for r in results]
    datasets = list(dict.fromkeys(c.dataset for c in cells))
    methods = _ordered_methods(list(dict.fromkeys(c.method for c in cells)))

    means = []
    for method in methods:
        column = [c for c in cells if c.method == method]
        values: Dict[str, Optional[float]] = {}
        for metric in CELL_METRICS:
            present = [getattr(c, metric) for c in column if getattr(c, metric) is not None]
            values[metric] = float(np.mean(present)) if present else None
        means.append(SummaryCell(dataset=MEAN_ROW, method=method, **values))
    return ExperimentSummary(datasets=datasets, methods=methods, cells=cells, means=means)


def _percent(value: Optional[float], infeasible: bool = False) -> str:
    if value is None:
        return "-"
    return f"{100.0 * value:.2f}" + ("*" if infeasible else "")


def _decimal(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4f}"


def _table(summary: ExperimentSummary, columns: Dict[str, Callable[[SummaryCell], str]]) -> pd.DataFrame:
    lookup = {(c.dataset, c.method): c for c in summary.cells}
    lookup.update({(MEAN_ROW, c.method): c for c in summary.means})
    header = pd.MultiIndex.from_tuples([(m, label) for m in summary.methods for label in columns])
    rows = []
    for dataset in [*summary.datasets, MEAN_ROW]:
        row = []
        for method in summary.methods:
            cell = lookup.get((dataset, method))
            row.extend(fmt(cell) if cell else "-" for fmt in columns.values())
        rows.append(row)
    return pd.DataFrame(rows, index=[*summary.datasets, MEAN_ROW], columns=header)


def render_summary_table(summary: ExperimentSummary) -> str:
    """Accuracy, TPR and FPR in percent at the selected configuration of each cell."""
    frame = _table(
        summary,
        {
            "ACC": lambda c: _percent(c.accuracy, c.infeasible),
            "TPR": lambda c: _percent(c.tpr, c.infeasible),
            "FPR": lambda c: _percent(c.fpr, c.infeasible),
        },
    )
    lines = [frame.to_string()]
    if any(c.infeasible for c in summary.cells):
        lines.append("* no configuration met the FPR cap; best TPR shown for information only")
    lines.append(f"{MEAN_ROW}: {summary.mean_convention}")
    return "\n".join(lines) + "\n"


def render_uncertainty_table(summary: ExperimentSummary) -> str:
    """Uncertainty interval: lower bound, width, manual and useful checks in percent."""
    frame = _table(
        summary,
        {
            "Lower": lambda c: _decimal(c.lower_bound),
            "Width": lambda c: _decimal(c.interval_width),
            "Manual%": lambda c: _percent(c.manual_checks),
            "Useful%": lambda c: _percent(c.useful_checks),
        },
    )
    return frame.to_string() + f"\n{MEAN_ROW}: {summary.mean_convention}\n"


def write_fold_reports(path: Union[str, Path], reports: Sequence[FoldReport]) -> Path:
    path = Path(path)
    path.write_text("".join(r.model_dump_json() + "\n" for r in reports), encoding="utf-8")
    return path


def read_fold_reports(path: Union[str, Path]) -> List[FoldReport]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [FoldReport.model_validate_json(line) for line in lines if line.strip()]


def write_preprocess_entries(path: Union[str, Path], entries: Sequence[PreprocessEntry]) -> Path:
    path = Path(path)
    path.write_bytes(_preprocess_entries.dump_json(list(entries), indent=2))
    return path


def write_json(path: Union[str, Path], model: BaseModel) -> Path:
    path = Path(path)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    return path


def write_summary(out_dir: Union[str, Path], summary: ExperimentSummary) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        write_json(out_dir / SUMMARY_FILE, summary),
        out_dir / SUMMARY_TABLE_FILE,
        out_dir / UNCERTAINTY_TABLE_FILE,
    ]
    written[1].write_text(render_summary_table(summary), encoding="utf-8")
    written[2].write_text(render_uncertainty_table(summary), encoding="utf-8")
    return written


def load_experiment(result_dir: Union[str, Path]) -> ExperimentResult:
    path = Path(result_dir) / GRID_RESULT_FILE
    if not path.is_file():
        raise ConfigurationError(f"{path}: no grid result found")
    try:
        return ExperimentResult.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise ConfigurationError(f"{path}: not a grid result ({exc.error_count()} errors)") from exc


def summarize_directories(result_dirs: Sequence[Union[str, Path]]) -> ExperimentSummary:
    results: List[GridSearchResult] = []
    for result_dir in result_dirs:
        results.extend(load_experiment(result_dir).results)
    if not results:
        raise ConfigurationError("no dataset x method results to summarize")
    return aggregate_report(results)
