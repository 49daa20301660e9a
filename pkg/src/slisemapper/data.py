"""Tabular datasets: CSV ingestion, normalisation, resampling and target permutation."""

from __future__ import annotations

import os
import warnings
from dataclasses import replace
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import InputError
from .types import Dataset, Normalisation
from .utils import validate_param

# A column whose population std is below this is treated as constant.
CONSTANT_STD = 1e-12


def load_csv(
    path: str,
    target_columns: Sequence[str],
    delimiter: str = ",",
    classification: bool = False,
) -> Dataset:
    """Read a headed, UTF-8 CSV; every non-target column becomes a feature (order kept)."""
    if not os.path.isfile(path):
        raise InputError(f"Data file not found: {path}")
    targets = list(target_columns)
    if len(targets) != 1:
        raise InputError(f"Exactly one target column is supported, got {targets}")

    try:
        header = pd.read_csv(
            path, sep=delimiter, header=None, nrows=1, dtype=str, encoding="utf-8"
        )
    except pd.errors.EmptyDataError as e:
        raise InputError(f"{path}: the file is empty") from e
    columns = [str(c).strip() for c in header.iloc[0].tolist()]
    seen = set()
    for c in columns:
        if c in seen:
            raise InputError(f"{path}: duplicate column name '{c}'")
        seen.add(c)
    for t in targets:
        if t not in seen:
            raise InputError(f"{path}: unknown column '{t}' (columns: {', '.join(columns)})")

    try:
        raw = pd.read_csv(
            path,
            sep=delimiter,
            header=None,
            skiprows=1,
            names=columns,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise InputError(f"{path}: no data rows below the header") from e
    values = np.empty(raw.shape, dtype=np.float64)
    for j, c in enumerate(columns):
        parsed = pd.to_numeric(raw[c].str.strip(), errors="coerce").to_numpy(dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(parsed))
        if bad.size:
            i = int(bad[0])
            # +2: one for the header line, one for 1-based line numbers
            raise InputError(
                f"{path}: non-numeric or non-finite cell {raw[c].iloc[i]!r} "
                f"at line {i + 2}, column '{c}'"
            )
        values[:, j] = parsed

    features = [c for c in columns if c not in targets]
    fidx = [columns.index(c) for c in features]
    tidx = [columns.index(c) for c in targets]
    try:
        return Dataset(
            X=values[:, fidx],
            Y=values[:, tidx],
            feature_names=features,
            target_names=targets,
            classification=classification,
        )
    except ValueError as e:
        raise InputError(f"{path}: {e}") from e


def _column_stats(A: np.ndarray, names: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    mean = A.mean(axis=0)
    std = A.std(axis=0)
    constant = std < CONSTANT_STD * np.maximum(1.0, np.abs(mean))
    if np.any(constant):
        cols = [names[j] for j in np.flatnonzero(constant)]
        warnings.warn(f"Constant columns set to zero with std 1: {', '.join(cols)}", stacklevel=3)
        std = np.where(constant, 1.0, std)
    return mean, std


def normalise(data: Dataset) -> Dataset:
    """
    Standardise every feature (and, for regression, the target) to zero mean and unit
    population std. Normalising twice composes the recorded parameters, so they always map
    back to the units the data was loaded in.
    """
    x_mean, x_std = _column_stats(data.X, data.feature_names)
    X = (data.X - x_mean) / x_std
    if data.classification:
        y_mean, y_std = np.zeros(1), np.ones(1)
        Y = data.Y
    else:
        y_mean, y_std = _column_stats(data.Y, data.target_names)
        Y = (data.Y - y_mean) / y_std

    prev = data.normalisation
    if prev is not None:
        x_mean = prev.x_mean + prev.x_std * x_mean
        x_std = prev.x_std * x_std
        y_mean = prev.y_mean + prev.y_std * y_mean
        y_std = prev.y_std * y_std
    norm = Normalisation(x_mean=x_mean, x_std=x_std, y_mean=y_mean, y_std=y_std)
    return replace(data, X=X, Y=Y, normalisation=norm)


def denormalise(data: Dataset) -> Dataset:
    """Inverse of `normalise`; a dataset without parameters is returned unchanged."""
    norm = data.normalisation
    if norm is None:
        return data
    X = data.X * norm.x_std + norm.x_mean
    Y = data.Y * norm.y_std + norm.y_mean
    return replace(data, X=X, Y=Y, normalisation=None)


def raw_targets(data: Dataset) -> np.ndarray:
    """Targets in the units they were loaded in, as a flat vector."""
    norm = data.normalisation
    y = data.Y[:, 0]
    if norm is None:
        return np.array(y)
    return y * norm.y_std[0] + norm.y_mean[0]


def raw_features(data: Dataset) -> np.ndarray:
    norm = data.normalisation
    if norm is None:
        return np.array(data.X)
    return data.X * norm.x_std + norm.x_mean


def subset(data: Dataset, rows: np.ndarray) -> Dataset:
    rows = np.asarray(rows, dtype=np.int64)
    return replace(
        data,
        X=data.X[rows],
        Y=data.Y[rows],
        source_index=data.row_index()[rows],
    )


def resample(
    data: Dataset,
    size: int,
    overlap: Optional[Dataset] = None,
    shared_fraction: float = 0.5,
    seed: int = 0,
) -> Tuple[Dataset, np.ndarray]:
    """
    Draw `size` rows without replacement.

    With `overlap` (an earlier sample of the same data), exactly floor(shared_fraction * size)
    of its rows are reused and the rest are drawn from rows outside it. Returns the sample and
    the sorted shared row ids, numbered like `Dataset.row_index()`; empty without one.
    """
    validate_param("shared_fraction", shared_fraction, min_val=0.0, max_val=1.0)
    if size < 2 or size > data.n:
        raise InputError(f"Sample size {size} is infeasible for a dataset of {data.n} rows")
    rng = np.random.default_rng(seed)
    if overlap is None:
        rows = rng.choice(data.n, size=size, replace=False)
        return subset(data, rows), np.empty(0, dtype=np.int64)

    # Map overlap's rows back to positions in `data`
    base = data.row_index()
    position = {int(r): i for i, r in enumerate(base)}
    try:
        taken = np.array([position[int(r)] for r in overlap.row_index()], dtype=np.int64)
    except KeyError as e:
        raise InputError("The overlap sample is not drawn from this dataset") from e
    n_shared = int(np.floor(shared_fraction * size))
    free = np.setdiff1d(np.arange(data.n), taken)
    if n_shared > taken.size or size - n_shared > free.size:
        raise InputError(
            f"Cannot share {n_shared} of {size} rows: overlap has {taken.size} rows and "
            f"only {free.size} rows lie outside it"
        )
    shared = rng.choice(taken, size=n_shared, replace=False)
    fresh = rng.choice(free, size=size - n_shared, replace=False)
    rows = rng.permutation(np.concatenate([shared, fresh]))
    return subset(data, rows), np.sort(base[shared])


def permute_targets(data: Dataset, seed: int = 0) -> Dataset:
    """Shuffle the rows of Y with a seeded uniform permutation; X is untouched."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(data.n)
    return replace(data, Y=data.Y[perm])


def coefficients_in_original_units(B: np.ndarray, data: Dataset) -> np.ndarray:
    """
    Rewrite local models fitted on normalised data so they act on raw feature values and
    predict raw targets: w_k * y_std / x_std_k, with the intercept absorbing the means.
    For classification the targets were never scaled, so only the feature side changes.
    """
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if B.shape[1] != data.m + 1:
        raise InputError(f"Expected {data.m + 1} coefficients per row, got {B.shape[1]}")
    norm = data.normalisation
    if norm is None:
        return B.copy()
    w = B[:, :-1] / norm.x_std
    intercept = B[:, -1] - w @ norm.x_mean
    out = np.column_stack([w, intercept]) * norm.y_std[0]
    out[:, -1] += norm.y_mean[0]
    return out


def coefficients_in_normalised_units(B: np.ndarray, data: Dataset) -> np.ndarray:
    """Inverse of `coefficients_in_original_units`: raw-unit models rewritten for `data.X`."""
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if B.shape[1] != data.m + 1:
        raise InputError(f"Expected {data.m + 1} coefficients per row, got {B.shape[1]}")
    norm = data.normalisation
    if norm is None:
        return B.copy()
    w = B[:, :-1]
    intercept = B[:, -1] + w @ norm.x_mean - norm.y_mean[0]
    return np.column_stack([w * norm.x_std, intercept]) / norm.y_std[0]
