import numpy as np
import pytest

from logistic_ensemble.data import Dataset
from logistic_ensemble.model import EnsembleModel, n_nodes


def random_model(rng, n_layers, dim, scale=1.0):
    return EnsembleModel(n_layers, dim, scale * rng.standard_normal((n_nodes(n_layers), dim + 1)))


def model_with_activations(h):
    """Single-feature model whose nodes output ``h`` at input x = [0]."""
    h = np.asarray(h, dtype=float)
    n = int(len(h) + 1).bit_length() - 1
    W = np.zeros((len(h), 2))
    W[:, 0] = np.log(h / (1 - h))
    return EnsembleModel(n, 1, W)


def two_cluster_xor(rng, per_quadrant=50):
    """Two clusters along x0; inside each, the class is decided by x1 with opposite sign.

    Jointly not linearly separable, separable within each cluster.
    """
    pts, labels = [], []
    for cx in (-3.0, 3.0):
        for sy in (-1.0, 1.0):
            x0 = cx + 0.4 * rng.standard_normal(per_quadrant)
            x1 = sy * (1.0 + np.abs(rng.standard_normal(per_quadrant)))
            pts.append(np.column_stack([x0, x1]))
            labels.append(np.full(per_quadrant, int((sy > 0) == (cx < 0))))
    X = np.vstack(pts)
    X = (X - X.mean(0)) / X.std(0)
    return Dataset(X, np.concatenate(labels))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def fixture_dataset():
    """Small two-cluster problem used for the descent and symmetry properties."""
    return two_cluster_xor(np.random.default_rng(7), per_quadrant=16)
