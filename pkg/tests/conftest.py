import numpy as np
import pytest

from slisemapper.data import normalise
from slisemapper.synth import make_regimes
from slisemapper.types import Dataset, Hyperparameters, LbfgsSettings


@pytest.fixture
def regimes():
    """Small, nearly noise-free two-regime data, normalised, with the true regime labels."""
    data, labels, _ = make_regimes(n=60, m=2, regimes=2, noise=0.01, seed=1)
    return normalise(data), labels


@pytest.fixture
def quick():
    return Hyperparameters(escape_rounds=1, lbfgs=LbfgsSettings(max_iter=150))


def dataset(X, y, classification=False) -> Dataset:
    X = np.asarray(X, dtype=float)
    return Dataset(
        X=X,
        Y=np.asarray(y, dtype=float).reshape(-1, 1),
        feature_names=[f"x{j + 1}" for j in range(X.shape[1])],
        target_names=["y"],
        classification=classification,
    )
