"""Command-line entry point: ``run``, ``selftest`` and ``report``."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from tapauc import __version__
from tapauc.config import Settings, get_settings
from tapauc.exceptions import ConfigurationError, DatasetError, TapAucError
from tapauc.schemas.reports import DatasetInfo, ExperimentResult, RunConfigEcho
from tapauc.schemas.training import METHODS
from tapauc.services import reporting
from tapauc.services.datasets import Dataset, load_ccf, load_csv, load_wdbc, make_synthetic_dataset
from tapauc.services.folds import stratified_kfold
from tapauc.services.grid import evaluate_grid, prepare_splits, resolve_grid, summarize_grid
from tapauc.services.selftest import run_selftest
from tapauc.utils.log import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tapauc",
        description="Zero-false-negative classifiers trained with hard-negative partial AUC losses",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.log_level, help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="cross-validated grid search on one dataset")
    run.add_argument("--dataset", required=True, help="wdbc, ccf, synthetic or csv:PATH")
    run.add_argument("--data-path", default=None, help="CSV file for wdbc or ccf")
    label = run.add_mutually_exclusive_group()
    label.add_argument("--label-column", default=None, help="label column name of a csv:PATH dataset")
    label.add_argument(
        "--label-index", type=int, default=None, help="zero-based label column position of a csv:PATH dataset"
    )
    run.add_argument("--positive-label", default=None, help="label value of the positive class")
    run.add_argument("--method", default="all", choices=[*METHODS, "all"])
    run.add_argument("--grid", default="default", help="default, full or file:PATH")
    run.add_argument("--folds", type=int, default=5)
    run.add_argument("--repetitions", type=int, default=5)
    run.add_argument("--seed", type=int, default=settings.seed)
    run.add_argument("--fpr-cap", type=float, default=settings.fpr_cap)
    run.add_argument("--correlation-cutoff", type=float, default=settings.correlation_cutoff)
    run.add_argument("--out", default=settings.out_dir)
    run.add_argument("--workers", type=int, default=settings.workers)
    run.add_argument(
        "--no-progress", dest="progress", action="store_false", default=settings.progress,
        help="hide the progress bar",
    )

    selftest = commands.add_parser("selftest", help="gradient, oracle and threshold checks")
    selftest.add_argument("--seed", type=int, default=settings.seed)

    report = commands.add_parser("report", help="summary tables from one or more run directories")
    report.add_argument("--in", dest="inputs", action="append", required=True, help="run output directory")
    report.add_argument("--out", default=None, help="defaults to the first --in directory")
    return parser


def load_dataset(args: argparse.Namespace, settings: Settings) -> Dataset:
    name = args.dataset
    if name == "wdbc":
        return load_wdbc(args.data_path)
    if name == "ccf":
        path = args.data_path or Path(settings.data_dir) / "creditcard.csv"
        return load_ccf(path, seed=args.seed)
    if name == "synthetic":
        return make_synthetic_dataset(seed=args.seed)
    if name.startswith("csv:"):
        label = args.label_column if args.label_column is not None else args.label_index
        if label is None or args.positive_label is None:
            raise ConfigurationError("csv datasets need --label-column or --label-index, and --positive-label")
        return load_csv(name[len("csv:"):], label, args.positive_label)
    raise ConfigurationError(f"unknown dataset {name!r}, expected wdbc, ccf, synthetic or csv:PATH")


def run_command(args: argparse.Namespace, settings: Settings) -> int:
    if args.workers < 1:
        raise ConfigurationError(f"--workers must be at least 1, got {args.workers}")
    if not 0.0 <= args.fpr_cap <= 1.0:
        raise ConfigurationError(f"--fpr-cap must lie in [0, 1], got {args.fpr_cap}")

    dataset = load_dataset(args, settings)
    logger.info(
        "%s: %d instances, %d features, %d positive, %d negative",
        dataset.name, dataset.labels.size, dataset.features.shape[1], dataset.n_positive, dataset.n_negative,
    )
    methods = list(METHODS) if args.method == "all" else [args.method]
    grid = resolve_grid(args.grid, methods)
    methods = [m for m in methods if any(hp.method == m for hp in grid)]
    plan = stratified_kfold(dataset, k=args.folds, repetitions=args.repetitions, base_seed=args.seed)
    splits = prepare_splits(dataset, plan, args.correlation_cutoff)

    reports = evaluate_grid(dataset.name, grid, splits, workers=args.workers, progress=args.progress)
    results = [
        summarize_grid(
            dataset.name,
            method,
            [hp for hp in grid if hp.method == method],
            [r for r in reports if r.hyperparams.method == method],
            args.fpr_cap,
        )
        for method in methods
    ]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo = RunConfigEcho(
        version=__version__,
        dataset=DatasetInfo(
            name=dataset.name,
            source=args.data_path or args.dataset,
            n_instances=int(dataset.labels.size),
            n_features=int(dataset.features.shape[1]),
            n_positive=dataset.n_positive,
            n_negative=dataset.n_negative,
        ),
        methods=methods,
        grid_spec=args.grid,
        grid=grid,
        fold_plan=plan,
        fold_seeds=[[plan.seed_for(r, f) for f in range(plan.k)] for r in range(plan.repetitions)],
        fpr_cap=args.fpr_cap,
        correlation_cutoff=args.correlation_cutoff,
    )
    summary = reporting.aggregate_report(results)
    written = [
        reporting.write_fold_reports(out_dir / reporting.FOLD_REPORTS_FILE, reports),
        reporting.write_json(out_dir / reporting.GRID_RESULT_FILE, ExperimentResult(dataset=dataset.name, results=results)),
        reporting.write_preprocess_entries(out_dir / reporting.PREPROCESS_FILE, [s.entry() for s in splits]),
        reporting.write_json(out_dir / reporting.CONFIG_ECHO_FILE, echo),
        *reporting.write_summary(out_dir, summary),
    ]
    for path in written:
        logger.info("wrote %s", path)

    print(reporting.render_summary_table(summary))
    print(reporting.render_uncertainty_table(summary))
    return EXIT_OK


def selftest_command(args: argparse.Namespace) -> int:
    results = run_selftest(seed=args.seed)
    for result in results:
        print(f"{'PASS' if result.passed else 'FAIL'}  {result.name:<32} {result.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


def report_command(args: argparse.Namespace) -> int:
    summary = reporting.summarize_directories(args.inputs)
    out_dir = Path(args.out or args.inputs[0])
    for path in reporting.write_summary(out_dir, summary):
        logger.info("wrote %s", path)
    print(reporting.render_summary_table(summary))
    print(reporting.render_uncertainty_table(summary))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    configure_logging(args.log_level)

    try:
        if args.command == "run":
            return run_command(args, settings)
        if args.command == "selftest":
            return selftest_command(args)
        return report_command(args)
    except (ConfigurationError, DatasetError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TapAucError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
