"""k-means over local-model coefficients and per-cluster summaries."""

from __future__ import annotations

from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .data import raw_features, raw_targets
from .errors import InputError
from .types import CellGrid, ClusterSummary, Dataset
from .utils import derive_seeds, parallel_map


def _sq_distances(P: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = P[:, None, :] - C[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeans_plus_plus(P: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    k-means++ seeding: the first centre uniformly, each next one with probability
    proportional to the squared distance to the nearest chosen centre. When every
    remaining point coincides with a centre, the lowest-index unchosen point is taken.
    """
    n = P.shape[0]
    chosen = [int(rng.integers(n))]
    closest = np.sum((P - P[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0.0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(np.setdiff1d(np.arange(n), chosen)[0])
        chosen.append(nxt)
        closest = np.minimum(closest, np.sum((P - P[nxt]) ** 2, axis=1))
    return P[chosen].copy()


def _centres(P: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.zeros((k, P.shape[1]))
    np.add.at(sums, labels, P)
    return sums / np.maximum(counts, 1.0)[:, None]


def _repair_empty(
    P: np.ndarray, labels: np.ndarray, centres: np.ndarray, k: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Move the point farthest from its centre into each empty cluster."""
    labels = labels.copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        dist = np.sum((P - centres[labels]) ** 2, axis=1)
        # never empty a cluster to fill another
        sizes = np.bincount(labels, minlength=k)
        dist[sizes[labels] <= 1] = -np.inf
        far = int(np.argmax(dist))
        labels[far] = c
        centres[c] = P[far]
    return labels, centres


def lloyd(
    P: np.ndarray, centres: np.ndarray, max_iter: int = 300
) -> Tuple[np.ndarray, np.ndarray, List[float]]:
    """
    Lloyd iterations from `centres` until the assignment stops changing.
    Returns labels, centres (the member means) and the inertia after every iteration.
    """
    k = centres.shape[0]
    labels = np.argmin(_sq_distances(P, centres), axis=1)
    labels, centres = _repair_empty(P, labels, centres, k)
    centres = _centres(P, labels, k)
    trace = [float(np.sum((P - centres[labels]) ** 2))]
    for _ in range(max_iter):
        new = np.argmin(_sq_distances(P, centres), axis=1)
        new, centres = _repair_empty(P, new, centres, k)
        if np.array_equal(new, labels):
            break
        labels = new
        centres = _centres(P, labels, k)
        trace.append(float(np.sum((P - centres[labels]) ** 2)))
    return labels, centres, trace


def _relabel(labels: np.ndarray, centres: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Number clusters by first appearance so reruns agree label for label."""
    order: List[int] = []
    for lab in labels:
        if lab not in order:
            order.append(int(lab))
    mapping = np.empty(centres.shape[0], dtype=np.int64)
    mapping[order] = np.arange(len(order))
    return mapping[labels], centres[order]


def kmeans_on_coefficients(
    B: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    threads: int = 1,
) -> ClusterSummary:
    """Best-of-`restarts` k-means (lowest inertia, earliest restart on ties) on the rows of B."""
    P = np.asarray(B, dtype=np.float64)
    n = P.shape[0]
    if k < 1 or k > n:
        raise InputError(f"k must be between 1 and the number of items ({n}), got {k}")
    if restarts < 1:
        raise InputError("restarts must be >= 1")

    def run(s: int) -> Tuple[float, np.ndarray, np.ndarray]:
        rng = np.random.default_rng(s)
        labels, centres, trace = lloyd(P, kmeans_plus_plus(P, k, rng), max_iter)
        return trace[-1], labels, centres

    results = parallel_map(run, derive_seeds(seed, restarts), threads)
    best = min(range(len(results)), key=lambda i: (results[i][0], i))
    inertia, labels, centres = results[best]
    labels, centres = _relabel(labels, centres)
    sizes = np.bincount(labels, minlength=k)
    means = _centres(P, labels, k)
    return ClusterSummary(
        k=k,
        labels=labels,
        centroids=centres,
        inertia=float(inertia),
        sizes=[int(s) for s in sizes],
        mean_coefficients=means,
    )


def inertia_curve(
    B: np.ndarray, ks: Sequence[int], seed: int = 0, restarts: int = 10, threads: int = 1
) -> List[Tuple[int, float]]:
    """Inertia for each feasible k (elbow data); the caller chooses k."""
    n = np.asarray(B).shape[0]
    return [
        (k, kmeans_on_coefficients(B, k, seed, restarts, threads=threads).inertia)
        for k in ks
        if 1 <= k <= n
    ]


def cluster_target_stats(summary: ClusterSummary, data: Dataset) -> ClusterSummary:
    """
    Median target per cluster (and overall) in the units the data was loaded in, plus
    the fraction of each cluster's items with a positive raw feature value.
    """
    labels = np.asarray(summary.labels)
    if labels.shape[0] != data.n:
        raise InputError(f"Cluster labels cover {labels.shape[0]} items, dataset has {data.n}")
    y = raw_targets(data)
    X = raw_features(data)
    medians: List[Optional[float]] = []
    incidence = {name: [] for name in data.feature_names}
    for c in range(summary.k):
        members = labels == c
        if not np.any(members):
            medians.append(None)
            for name in data.feature_names:
                incidence[name].append(float("nan"))
            continue
        medians.append(float(np.median(y[members])))
        frac = np.mean(X[members] > 0.0, axis=0)
        for name, f in zip(data.feature_names, frac):
            incidence[name].append(float(f))
    return replace(
        summary,
        median_target=medians,
        global_median=float(np.median(y)),
        incidence=incidence,
    )


def bin_embedding_medians(Z: np.ndarray, values: np.ndarray, grid_size: int) -> CellGrid:
    """
    Square grid of `grid_size` x `grid_size` cells over the bounding box of the first two
    embedding axes; each non-empty cell holds the median of its members' values. Points on
    the upper edge belong to the last cell. A 1-D embedding uses a single row of cells.
    """
    if grid_size < 1:
        raise InputError(f"grid_size must be >= 1, got {grid_size}")
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.shape[0] != Z.shape[0]:
        raise InputError("values must have one entry per embedded item")
    coords = Z[:, :2] if Z.shape[1] >= 2 else np.hstack([Z[:, :1], np.zeros((Z.shape[0], 1))])
    gy = grid_size if Z.shape[1] >= 2 else 1

    def axis(col: np.ndarray, cells: int) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = float(col.min()), float(col.max())
        if hi <= lo:
            return np.linspace(lo - 0.5, lo + 0.5, cells + 1), np.zeros(col.shape[0], dtype=int)
        edges = np.linspace(lo, hi, cells + 1)
        idx = np.floor((col - lo) / (hi - lo) * cells).astype(int)
        return edges, np.clip(idx, 0, cells - 1)

    x_edges, ix = axis(coords[:, 0], grid_size)
    y_edges, iy = axis(coords[:, 1], gy)
    medians = np.full((grid_size, gy), np.nan)
    counts = np.zeros((grid_size, gy), dtype=np.int64)
    cell = ix * gy + iy
    for c in np.unique(cell):
        members = cell == c
        i, j = divmod(int(c), gy)
        medians[i, j] = float(np.median(values[members]))
        counts[i, j] = int(np.count_nonzero(members))
    return CellGrid(x_edges=x_edges, y_edges=y_edges, medians=medians, counts=counts)
