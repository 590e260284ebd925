#!/usr/bin/env python3
"""
Print the inventory of the datasets available locally: rows, features and class counts
"""

import sys
from pathlib import Path

from dotenv import load_dotenv

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from tapauc.config import get_settings  # noqa: E402
from tapauc.exceptions import DatasetError  # noqa: E402
from tapauc.services.datasets import CCF_NEGATIVE_TARGET, load_ccf, load_wdbc  # noqa: E402


def describe(dataset):
    print(f"  rows:      {dataset.labels.size}")
    print(f"  features:  {dataset.features.shape[1]}")
    print(f"  positive:  {dataset.n_positive}")
    print(f"  negative:  {dataset.n_negative}")


def check_datasets():
    """Load every known dataset and print its shape"""

    # Load environment variables
    load_dotenv()
    settings = get_settings()
    data_dir = Path(settings.data_dir)

    print("=" * 70)
    print("DATASET INVENTORY")
    print("=" * 70)

    wdbc_path = data_dir / "wdbc.csv"
    print(f"\nWDBC ({wdbc_path if wdbc_path.is_file() else 'bundled with scikit-learn'})")
    try:
        describe(load_wdbc(wdbc_path if wdbc_path.is_file() else None))
    except DatasetError as e:
        print(f"  unavailable: {e}")

    ccf_path = data_dir / "creditcard.csv"
    print(f"\nCCF ({ccf_path})")
    if not ccf_path.is_file():
        print("  not found: download creditcard.csv and place it in the data directory")
        print("  (or set TAPAUC_DATA_DIR)")
    else:
        try:
            full = load_ccf(ccf_path, negative_target=None)
            describe(full)
            print(f"  after subsampling negatives: {full.n_positive} positive, {min(full.n_negative, CCF_NEGATIVE_TARGET)} negative")
        except DatasetError as e:
            print(f"  unreadable: {e}")

    print("\n" + "=" * 70)


if __name__ == "__main__":
    check_datasets()
