from __future__ import annotations

from typing import Tuple

import numpy as np

from .errors import InputError


def hungarian_assignment(cost: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Minimum-cost perfect assignment on a square matrix, O(n^3).

    Shortest augmenting paths with row/column potentials (the Jonker-Volgenant form of the
    Hungarian method); the inner scan over columns is vectorised. Returns `assignment` with
    assignment[i] = column given to row i, and the total cost.
    """
    C = np.asarray(cost, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InputError(f"Cost matrix must be square, got shape {C.shape}")
    n = C.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64), 0.0
    if not np.all(np.isfinite(C)):
        raise InputError("Cost matrix contains non-finite entries")

    # 1-based: index 0 is the virtual column used to start each augmenting path
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j] = row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = C[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break

    assignment = np.empty(n, dtype=np.int64)
    assignment[p[1:] - 1] = np.arange(n)
    total = float(C[np.arange(n), assignment].sum())
    return assignment, total
