import json

import pytest

from tapauc.exceptions import ConfigurationError
from tapauc.schemas.reports import ConfigAggregate, FoldReport
from tapauc.schemas.metrics import ConfusionMetrics, ThresholdResult, UncertaintyReport
from tapauc.schemas.training import HyperParams
from tapauc.services.folds import stratified_kfold
from tapauc.services.grid import (
    aggregate_config,
    build_grid,
    evaluate_grid,
    load_grid_file,
    prepare_splits,
    resolve_grid,
    run_grid,
    select_configuration,
)

BCE = HyperParams(method="bce", e_total=1)


def aggregate(key, tpr, fpr, accuracy):
    return ConfigAggregate(
        config_key=key,
        hyperparams=BCE,
        n_folds=1,
        n_failed=0,
        mean_accuracy=accuracy,
        mean_tpr=tpr,
        mean_fpr=fpr,
        feasible=fpr <= 0.5,
    )


def brute_force_select(aggregates, cap):
    """Apply the selection rule one criterion at a time."""
    pool = [a for a in aggregates if a.mean_fpr <= cap] or list(aggregates)
    best_tpr = max(a.mean_tpr for a in pool)
    pool = [a for a in pool if a.mean_tpr == best_tpr]
    best_fpr = min(a.mean_fpr for a in pool)
    pool = [a for a in pool if a.mean_fpr == best_fpr]
    best_accuracy = max(a.mean_accuracy for a in pool)
    pool = [a for a in pool if a.mean_accuracy == best_accuracy]
    return min(pool, key=lambda a: a.config_key)


def fold(hp, tpr, fpr, ok=True):
    if not ok:
        return FoldReport(dataset="d", config_key=hp.key, hyperparams=hp, repetition=0, fold=0, seed=0,
                          status="failed", diagnostic="diverged")
    metrics = ConfusionMetrics(threshold=0.5, tp=1, fp=1, tn=1, fn=1, accuracy=0.5, tpr=tpr, fpr=fpr, fnr=1 - tpr)
    uncertainty = UncertaintyReport(
        threshold=0.5, lower_bound=0.4, width=0.1, n_instances=4, flagged_count=1, useful_count=1,
        false_negatives=1, captured_false_negatives=1, manual_checks_pct=0.25, useful_checks_pct=0.25,
    )
    return FoldReport(
        dataset="d", config_key=hp.key, hyperparams=hp, repetition=0, fold=0, seed=0,
        threshold=ThresholdResult(threshold_zfn=0.5), train=metrics, validation=metrics,
        uncertainty=uncertainty, validation_auc=0.8,
    )


def test_grid_sizes():
    assert len(build_grid("bce")) == 2
    assert len(build_grid("auc_hinge")) == 10
    assert len(build_grid("tapauc")) == 150
    assert len(build_grid("tapauc", "full")) == 225
    assert {hp.e_total for hp in build_grid("bce", "full")} == {200, 500}
    assert {hp.e_total for hp in build_grid("tapauc", "full")} == {60, 200, 500}


def test_unknown_grid_or_method():
    with pytest.raises(ConfigurationError):
        build_grid("bce", "huge")
    with pytest.raises(ConfigurationError):
        build_grid("svm")


def test_grid_file_lists_expand_as_a_product(tmp_path):
    path = tmp_path / "grid.json"
    path.write_text(json.dumps([
        {"method": "tapauc", "e_total": [60, 200], "warmup_fraction": 0.5, "margin": [0.1, 0.3], "alpha": "single"},
        {"method": "bce", "e_total": 60},
    ]))
    grid = load_grid_file(path)
    assert len(grid) == 5
    assert [hp.method for hp in load_grid_file(path, ["bce"])] == ["bce"]
    assert resolve_grid(f"file:{path}", ["tapauc"]) == grid[:4]


@pytest.mark.parametrize(
    "content",
    [
        "not json",
        json.dumps({"method": "bce"}),
        json.dumps([{"method": "bce", "e_total": 60, "margin": 0.5}]),
        json.dumps([{"method": "tapauc", "e_total": 60, "warmup_fraction": 0.5, "margin": 0.5, "alpha": 2.0}]),
    ],
)
def test_invalid_grid_files(tmp_path, content):
    path = tmp_path / "grid.json"
    path.write_text(content)
    with pytest.raises(ConfigurationError):
        load_grid_file(path)


def test_single_configuration_is_selected():
    only = aggregate("a", 0.7, 0.9, 0.5)
    selected, infeasible = select_configuration([only])
    assert selected == only
    assert infeasible


def test_fpr_cap_excludes_the_higher_tpr():
    """
    (TPR 0.95, FPR 0.40) beats (TPR 0.99, FPR 0.60) under a 50% cap.
    """
    first, second = aggregate("first", 0.95, 0.40, 0.8), aggregate("second", 0.99, 0.60, 0.7)
    selected, infeasible = select_configuration([second, first])
    assert selected.config_key == "first"
    assert not infeasible


def test_infeasible_grid_reports_best_tpr():
    selected, infeasible = select_configuration([aggregate("a", 0.9, 0.7, 0.5), aggregate("b", 0.95, 0.8, 0.4)])
    assert selected.config_key == "b"
    assert infeasible


def test_selection_matches_brute_force_rule():
    table = [
        aggregate("c00", 0.97, 0.45, 0.81),
        aggregate("c01", 0.99, 0.51, 0.90),
        aggregate("c02", 0.97, 0.30, 0.79),
        aggregate("c03", 0.97, 0.30, 0.85),
        aggregate("c04", 0.96, 0.10, 0.95),
        aggregate("c05", 0.97, 0.30, 0.85),
        aggregate("c06", 1.00, 0.75, 0.60),
        aggregate("c07", 0.50, 0.00, 0.70),
        aggregate("c08", 0.97, 0.50, 0.83),
        aggregate("c09", 0.92, 0.20, 0.88),
    ]
    selected, infeasible = select_configuration(table)
    assert not infeasible
    assert selected == brute_force_select(table, 0.5)
    assert selected.config_key == "c03"


def test_aggregate_excludes_failed_folds():
    hp = HyperParams(method="auc_hinge", e_total=5, margin=0.5)
    result = aggregate_config(hp, [fold(hp, 1.0, 0.2), fold(hp, 0.8, 0.4), fold(hp, 0.0, 0.0, ok=False)])
    assert result.n_folds == 3
    assert result.n_failed == 1
    assert result.mean_tpr == pytest.approx(0.9)
    assert result.mean_fpr == pytest.approx(0.3)
    assert result.mean_auc == pytest.approx(0.8)
    assert result.feasible


def test_all_failed_configuration_has_no_means():
    hp = HyperParams(method="bce", e_total=5)
    result = aggregate_config(hp, [fold(hp, 0, 0, ok=False)])
    assert result.mean_tpr is None
    assert not result.feasible
    assert select_configuration([result]) == (None, True)


def test_run_grid_evaluates_every_split(synthetic_dataset):
    grid = [HyperParams(method="bce", e_total=10), HyperParams(method="bce", e_total=20)]
    plan = stratified_kfold(synthetic_dataset, k=3, repetitions=2)
    result = run_grid(synthetic_dataset, grid, plan)
    assert result.method == "bce"
    assert result.total_folds == 12
    assert [a.config_key for a in result.aggregates] == [hp.key for hp in grid]
    assert result.selected is not None


def test_reports_do_not_depend_on_worker_count(synthetic_dataset):
    grid = [HyperParams(method="tapauc", e_total=10, warmup_fraction=0.5, margin=0.5, alpha=0.25)]
    splits = prepare_splits(synthetic_dataset, stratified_kfold(synthetic_dataset, k=3, repetitions=1))
    serial = evaluate_grid("synthetic", grid, splits, workers=1)
    parallel = evaluate_grid("synthetic", grid, splits, workers=2)
    assert [r.model_dump_json() for r in serial] == [r.model_dump_json() for r in parallel]
