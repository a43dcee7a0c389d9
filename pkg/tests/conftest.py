import numpy as np
import pytest
from prefect.testing.utilities import prefect_test_harness

from texprint.dataset import Dataset
from texprint.fixtures import synthesize_corpus
from texprint.texture import FeatureVector


@pytest.fixture(scope="session")
def prefect_harness():
    """Temporary Prefect backend for tests that run flows."""
    with prefect_test_harness():
        yield


@pytest.fixture
def make_dataset():
    """Factory: Dataset from a value matrix and a label list."""

    def build(X, labels, names=None) -> Dataset:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        names = tuple(names or (f"a{i}" for i in range(X.shape[1])))
        instances = [FeatureVector(names, row, str(label)) for row, label in zip(X, labels)]
        return Dataset.from_instances(instances, names)

    return build


@pytest.fixture
def clustered_dataset(make_dataset):
    """Four classes of ten instances, every attribute separating them cleanly."""
    rng = np.random.default_rng(7)
    labels = [c for c in "ABCD" for _ in range(10)]
    centres = np.repeat(np.arange(4) * 10.0, 10)
    X = centres[:, None] + rng.normal(0.0, 0.1, (40, 3))
    return make_dataset(X, labels)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    synthesize_corpus(root, subjects=4, samples=4, seed=3)
    return root
