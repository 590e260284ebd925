import numpy as np
import pytest

from tapauc.models.mlp import init_network
from tapauc.schemas.network import NetworkConfig
from tapauc.services.datasets import Dataset, make_synthetic_dataset


@pytest.fixture(scope="session")
def synthetic_dataset():
    """
    Fixture providing a small, well separated two-class dataset.
    """
    return make_synthetic_dataset(n_positive=24, n_negative=36, n_features=5, seed=7, separation=1.5)


@pytest.fixture(scope="session")
def tiny_dataset():
    """
    Fixture providing a hand-written dataset with one constant and one duplicated column.
    """
    features = np.array(
        [
            [0.0, 1.0, 5.0, 10.0],
            [1.0, 1.0, 3.0, 6.0],
            [2.0, 1.0, 4.0, 8.0],
            [3.0, 1.0, 1.0, 2.0],
            [4.0, 1.0, 2.0, 4.0],
            [5.0, 1.0, 0.0, 0.0],
        ]
    )
    return Dataset(
        features=features,
        labels=np.array([1, 0, 1, 0, 0, 1]),
        feature_names=("a", "const", "b", "b_twice"),
        name="tiny",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_model():
    """
    Fixture providing a seeded 4-input, 2-hidden-unit model without dropout.
    """
    return init_network(NetworkConfig(input_dim=4, hidden_dim=2, dropout_rate=0.0), seed=3)


@pytest.fixture
def results_dir(tmp_path):
    out = tmp_path / "results"
    out.mkdir()
    return out
