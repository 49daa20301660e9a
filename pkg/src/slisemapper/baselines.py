"""Fixed embeddings (PCA or external coordinates) with local models trained on top."""

from __future__ import annotations

import os
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from .engine import dataset_checksum, objective, optimise, project_radius
from .errors import InputError
from .local_models import coefficient_names, fit_global_model
from .types import Dataset, FitDiagnostics, FixedEmbedding, Hyperparameters, Solution


def principal_components(X: np.ndarray, d: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Project X onto its top-d principal axes (eigenvectors of the population covariance).
    Each axis is signed so that its largest-magnitude loading is positive.
    Returns the coordinates and the explained-variance ratio of every axis.
    """
    X = np.asarray(X, dtype=np.float64)
    if d > X.shape[1]:
        raise InputError(f"PCA dimension {d} exceeds the number of features {X.shape[1]}")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / X.shape[0]
    eigval, eigvec = np.linalg.eigh(cov)
    order = np.argsort(-eigval, kind="stable")
    eigval = np.clip(eigval[order], 0.0, None)
    eigvec = eigvec[:, order]
    lead = np.argmax(np.abs(eigvec), axis=0)
    signs = np.sign(eigvec[lead, np.arange(eigvec.shape[1])])
    eigvec = eigvec * np.where(signs == 0, 1.0, signs)
    total = eigval.sum()
    ratio = eigval / total if total > 0 else np.full_like(eigval, 1.0 / eigval.size)
    return Xc @ eigvec[:, :d], ratio


def pca_embed(data: Dataset, d: int) -> FixedEmbedding:
    Z, ratio = principal_components(data.X, d)
    return FixedEmbedding(Z=Z, source="pca", explained_variance_ratio=ratio)


def rescale_embedding(fixed: FixedEmbedding, radius: float) -> FixedEmbedding:
    """Rescale coordinates so that the mean squared row norm equals radius^2."""
    try:
        Z = project_radius(fixed.Z, radius)
    except InputError as e:
        raise InputError(f"Embedding '{fixed.source}': {e}") from e
    return replace(fixed, Z=Z, radius_normalised=True)


def load_external_embedding(
    path: str,
    data: Dataset,
    radius: Optional[float] = 3.5,
    label: Optional[str] = None,
    rows: Optional[np.ndarray] = None,
) -> FixedEmbedding:
    """
    Read a header-less CSV of coordinates, one row per dataset row in dataset order.

    `rows` selects rows of the file for a resampled `data`; the file must then cover the
    full dataset. With `radius` set the coordinates are rescaled to it (pass None to keep
    them verbatim).
    """
    if not os.path.isfile(path):
        raise InputError(f"Embedding file not found: {path}")
    label = label or os.path.splitext(os.path.basename(path))[0]
    frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False)
    Z = frame.apply(lambda c: pd.to_numeric(c.str.strip(), errors="coerce")).to_numpy(
        dtype=np.float64
    )
    if rows is not None:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size and rows.max() >= Z.shape[0]:
            raise InputError(f"{path}: has {Z.shape[0]} rows, fewer than the dataset needs")
        Z = Z[rows]
    if Z.shape[0] != data.n:
        raise InputError(f"{path}: has {Z.shape[0]} rows but the dataset has {data.n}")
    if not np.all(np.isfinite(Z)):
        i, j = np.argwhere(~np.isfinite(Z))[0]
        raise InputError(f"{path}: non-numeric or non-finite value at row {i + 1}, column {j + 1}")
    fixed = FixedEmbedding(Z=Z, source=f"external:{label}")
    if radius is None:
        return fixed
    if not np.any(Z):
        raise InputError(f"{path}: all coordinates are zero, cannot rescale to the radius")
    return rescale_embedding(fixed, radius)


def fit_local_models_on_fixed_embedding(
    data: Dataset,
    fixed: FixedEmbedding,
    hyper: Hyperparameters,
    B0: Optional[np.ndarray] = None,
) -> Solution:
    """
    Minimise the SLISEMAP loss over B only, with Z frozen at `fixed.Z`. Starts from the
    global model replicated on every row unless `B0` is given.
    """
    Z = fixed.Z
    if Z.shape[0] != data.n:
        raise InputError(f"Embedding '{fixed.source}' has {Z.shape[0]} rows, data has {data.n}")
    if B0 is None:
        b0 = fit_global_model(hyper.family, data, hyper.ridge, hyper.regularise_intercept)
        B0 = np.tile(b0, (data.n, 1))
    _, B, res = optimise(
        np.array(Z), np.asarray(B0, dtype=np.float64), data.X, data.Y, hyper, optimise_z=False
    )
    loss, _, gB = objective(Z, B, data.X, data.Y, hyper)
    diagnostics = FitDiagnostics(
        iterations=res.iterations,
        gradient_norm=float(np.max(np.abs(gB))),
        converged=res.converged,
        line_search_failed=res.line_search_failed,
        phases=[("lbfgs-fixed", loss)],
    )
    return Solution(
        Z=Z,
        B=B,
        loss=loss,
        hyper=hyper,
        diagnostics=diagnostics,
        source=fixed.source,
        dataset_checksum=dataset_checksum(data),
        coefficient_names=coefficient_names(data.feature_names),
        row_index=data.row_index(),
    )
