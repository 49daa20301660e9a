"""Piecewise-linear synthetic data with known regimes."""

from __future__ import annotations

import os
from typing import Tuple

import numpy as np
import pandas as pd

from .types import Dataset
from .utils import validate_param

TARGET = "y"


def make_regimes(
    n: int = 400,
    m: int = 5,
    regimes: int = 3,
    noise: float = 0.1,
    classification: bool = False,
    offset: float = 0.0,
    seed: int = 0,
    separation: float = 3.0,
) -> Tuple[Dataset, np.ndarray, np.ndarray]:
    """
    Each regime has a centre in feature space and its own linear model. Items are spread
    evenly over regimes, scattered around their centre with unit variance, and labelled by

        y = x . w_r + offset * r + noise * e

    For classification the linear score is squashed through a sigmoid, so targets are
    probabilities. Returns the dataset (raw, not normalised), the regime of every row and the
    generating models, one row per regime laid out like a local model: weights, then the
    intercept `offset * r`.
    """
    validate_param("n", n, min_val=2)
    validate_param("m", m, min_val=1)
    validate_param("regimes", regimes, min_val=1, max_val=n)
    validate_param("noise", noise, min_val=0.0)
    validate_param("separation", separation, min_val=0.0)
    rng = np.random.default_rng(seed)

    centres = rng.normal(scale=separation, size=(regimes, m))
    weights = rng.normal(scale=2.0, size=(regimes, m))
    labels = rng.permutation(np.arange(n) % regimes)
    X = centres[labels] + rng.normal(size=(n, m))
    score = np.sum(X * weights[labels], axis=1) + offset * labels
    score = score + noise * rng.normal(size=n)
    y = 1.0 / (1.0 + np.exp(-score)) if classification else score
    data = Dataset(
        X=X,
        Y=y[:, None],
        feature_names=[f"x{j + 1}" for j in range(m)],
        target_names=[TARGET],
        classification=classification,
    )
    coefficients = np.column_stack([weights, offset * np.arange(regimes)])
    return data, labels.astype(np.int64), coefficients


def regimes_path(path: str) -> str:
    stem, _ = os.path.splitext(path)
    return f"{stem}.regimes.csv"


def write_regimes_csv(data: Dataset, labels: np.ndarray, path: str) -> Tuple[str, str]:
    """Data CSV (features then target, with header) plus a one-column `regime` file next to it."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame = pd.DataFrame(data.X, columns=data.feature_names)
    frame[data.target_names[0]] = data.Y[:, 0]
    frame.to_csv(path, index=False, float_format="%.17g")
    labels_out = regimes_path(path)
    pd.DataFrame({"regime": np.asarray(labels)}).to_csv(labels_out, index=False)
    return path, labels_out
