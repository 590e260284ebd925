import pytest

from tapauc.exceptions import ConfigurationError
from tapauc.schemas.reports import (
    ConfigAggregate,
    ExperimentResult,
    ExperimentSummary,
    FoldReport,
    GridSearchResult,
)
from tapauc.schemas.training import HyperParams
from tapauc.services import reporting


def grid_result(dataset, method, tpr, fpr, accuracy, infeasible=False):
    hp = HyperParams(method="bce", e_total=60)
    selected = ConfigAggregate(
        config_key=f"{method}-best",
        hyperparams=hp,
        n_folds=25,
        n_failed=0,
        mean_accuracy=accuracy,
        mean_tpr=tpr,
        mean_fpr=fpr,
        mean_lower_bound=0.3,
        mean_interval_width=0.12,
        mean_manual_checks=0.2,
        mean_useful_checks=0.05,
        feasible=not infeasible,
    )
    return GridSearchResult(
        dataset=dataset, method=method, fpr_cap=0.5, aggregates=[selected], selected=selected,
        infeasible=infeasible, total_folds=25,
    )


def test_single_cell_mean_equals_the_row():
    summary = reporting.aggregate_report([grid_result("wdbc", "tapauc", 0.9925, 0.2992, 0.8095)])
    cell, mean = summary.cells[0], summary.means[0]
    assert mean.dataset == "MEAN"
    for metric in reporting.CELL_METRICS:
        assert getattr(mean, metric) == getattr(cell, metric)


def test_mean_is_unweighted_over_datasets():
    """
    The MEAN of two datasets is their plain average, whatever their sizes.
    """
    summary = reporting.aggregate_report([
        grid_result("wdbc", "bce", 0.97, 0.20, 0.90),
        grid_result("ccf", "bce", 0.91, 0.60, 0.52, infeasible=True),
    ])
    mean = summary.means[0]
    assert abs(mean.tpr - (0.97 + 0.91) / 2) <= 1e-12
    assert abs(mean.fpr - (0.20 + 0.60) / 2) <= 1e-12
    assert abs(mean.accuracy - (0.90 + 0.52) / 2) <= 1e-12
    assert summary.datasets == ["wdbc", "ccf"]


def test_methods_follow_the_canonical_order():
    summary = reporting.aggregate_report([
        grid_result("wdbc", "tapauc", 0.99, 0.3, 0.8),
        grid_result("wdbc", "bce", 0.97, 0.2, 0.9),
    ])
    assert summary.methods == ["bce", "tapauc"]


def test_summary_table_renders_percentages():
    summary = reporting.aggregate_report([
        grid_result("wdbc", "tapauc", 0.9925, 0.2992, 0.8095),
        grid_result("ccf", "tapauc", 0.95, 0.55, 0.7, infeasible=True),
    ])
    table = reporting.render_summary_table(summary)
    assert "99.25" in table
    assert "29.92" in table
    assert "95.00*" in table
    assert "MEAN" in table
    assert "information only" in table


def test_uncertainty_table_renders_bounds_and_checks():
    summary = reporting.aggregate_report([grid_result("wdbc", "tapauc", 0.99, 0.3, 0.8)])
    table = reporting.render_uncertainty_table(summary)
    assert "0.3000" in table
    assert "20.00" in table
    assert "Useful%" in table


def test_missing_selection_renders_dashes():
    empty = GridSearchResult(dataset="wdbc", method="bce", fpr_cap=0.5, aggregates=[], infeasible=True)
    summary = reporting.aggregate_report([empty])
    assert summary.means[0].tpr is None
    row = next(line for line in reporting.render_summary_table(summary).splitlines() if line.startswith("wdbc"))
    assert row.split()[1:] == ["-", "-", "-"]


def test_summary_files_round_trip(results_dir):
    summary = reporting.aggregate_report([grid_result("wdbc", "bce", 0.97, 0.2, 0.9)])
    written = reporting.write_summary(results_dir, summary)
    assert [p.name for p in written] == ["summary.json", "summary_table.txt", "uncertainty_table.txt"]
    parsed = ExperimentSummary.model_validate_json((results_dir / "summary.json").read_text())
    assert parsed == summary


def test_fold_reports_are_one_json_object_per_line(results_dir):
    hp = HyperParams(method="bce", e_total=60)
    reports = [
        FoldReport(dataset="wdbc", config_key=hp.key, hyperparams=hp, repetition=0, fold=f, seed=f,
                   status="failed", diagnostic="diverged")
        for f in range(3)
    ]
    path = reporting.write_fold_reports(results_dir / reporting.FOLD_REPORTS_FILE, reports)
    assert len(path.read_text().splitlines()) == 3
    assert reporting.read_fold_reports(path) == reports


def test_report_rebuilds_tables_from_result_directories(tmp_path):
    for dataset in ("wdbc", "ccf"):
        out = tmp_path / dataset
        out.mkdir()
        experiment = ExperimentResult(dataset=dataset, results=[grid_result(dataset, "tapauc", 0.98, 0.3, 0.8)])
        reporting.write_json(out / reporting.GRID_RESULT_FILE, experiment)
    summary = reporting.summarize_directories([tmp_path / "wdbc", tmp_path / "ccf"])
    assert summary.datasets == ["wdbc", "ccf"]
    assert summary.means[0].tpr == pytest.approx(0.98)


def test_missing_result_directory(tmp_path):
    with pytest.raises(ConfigurationError):
        reporting.summarize_directories([tmp_path])
