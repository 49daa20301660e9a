"""
The SLISEMAP objective and its optimisation.

    loss = sum_i sum_j W_ij l(f_i(x_j), y_j) + sum_i sum_k (lasso |B_ik| + ridge B_ik^2)

with W = row-wise softmax of -D(z_i, z_j), subject to mean_i ||z_i||^2 = radius^2.
The constraint is kept exactly: Z is optimised through the map Z -> radius * Z / rms(Z),
and every accepted iterate is projected back onto the constraint surface.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import InputError, OptimisationError
from .lbfgs import LbfgsResult, lbfgs_minimise
from .local_models import (
    add_intercept,
    coefficient_names,
    fit_global_model,
    loss_matrix,
    loss_matrix_with_derivative,
    penalty_mask,
)
from .logging_utils import JsonLinesLogger
from .types import CLASSIFICATION, Dataset, FitDiagnostics, Hyperparameters, Solution
from .utils import array_checksum

Progress = Callable[[int, float, float], None]


def pairwise_distances(Z: np.ndarray, squared: bool = False) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    diff = Z[:, None, :] - Z[None, :, :]
    D2 = np.einsum("ijk,ijk->ij", diff, diff)
    return D2 if squared else np.sqrt(D2)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    E = np.exp(shifted)
    return E / E.sum(axis=1, keepdims=True)


def softmax_weights(Z: np.ndarray, squared: bool = False) -> np.ndarray:
    """Row-stochastic W with W_ij proportional to exp(-D(z_i, z_j)), self term included."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if not np.all(np.isfinite(Z)):
        raise InputError("Embedding contains non-finite coordinates")
    return _softmax_rows(-pairwise_distances(Z, squared))


def _penalty(B: np.ndarray, hyper: Hyperparameters) -> Tuple[float, np.ndarray]:
    mask = penalty_mask(B.shape[1], hyper.regularise_intercept)
    value = float(np.sum(mask * (hyper.lasso * np.abs(B) + hyper.ridge * B * B)))
    grad = mask * (hyper.lasso * np.sign(B) + 2.0 * hyper.ridge * B)
    return value, grad


def objective(
    Z: np.ndarray,
    B: np.ndarray,
    X: np.ndarray,
    Y: np.ndarray,
    hyper: Hyperparameters,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Loss value with exact gradients with respect to Z and B."""
    Z = np.asarray(Z, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    n = X.shape[0]
    if Z.shape[0] != n or B.shape != (n, X.shape[1] + 1) or np.size(Y) != n:
        raise InputError(
            f"Shape mismatch: Z {Z.shape}, B {B.shape}, X {X.shape}, Y {np.shape(Y)}"
        )
    Xt = add_intercept(X)
    y = np.asarray(Y, dtype=np.float64).reshape(-1)

    D = pairwise_distances(Z, hyper.squared_distance)
    W = _softmax_rows(-D)
    L, dS = loss_matrix_with_derivative(hyper.family, B, Xt, y)
    if not np.all(np.isfinite(L)):
        i, j = np.argwhere(~np.isfinite(L))[0]
        raise OptimisationError(
            f"Non-finite local loss for model {i} on item {j}", {"model": int(i), "item": int(j)}
        )

    WL = W * L
    penalty, gpen = _penalty(B, hyper)
    loss = float(WL.sum()) + penalty

    # d loss / d D_ij = -W_ij (L_ij - sum_k W_ik L_ik)
    G = -W * (L - WL.sum(axis=1, keepdims=True))
    S = G + G.T
    if hyper.squared_distance:
        H = 2.0 * S
    else:
        # the distance is not differentiable at 0: coincident pairs contribute nothing
        with np.errstate(divide="ignore"):
            H = np.where(D > 0.0, S / np.where(D > 0.0, D, 1.0), 0.0)
    grad_Z = H.sum(axis=1, keepdims=True) * Z - H @ Z
    grad_B = (W * dS) @ Xt + gpen
    return loss, grad_Z, grad_B


def project_radius(Z: np.ndarray, radius: float) -> np.ndarray:
    """Scale Z so that the mean squared row norm is radius^2."""
    Z = np.asarray(Z, dtype=np.float64)
    rms = np.sqrt(np.mean(np.sum(Z * Z, axis=-1))) if Z.size else 0.0
    if not rms > 0.0 or not np.isfinite(rms):
        raise InputError("Cannot rescale an all-zero (or non-finite) embedding to the radius")
    return Z * (radius / rms)


def initial_embedding(X: np.ndarray, hyper: Hyperparameters) -> np.ndarray:
    """
    PCA of X scaled to the radius, plus seeded Gaussian jitter of `init_jitter * radius`.
    A seeded Gaussian when PCA is unavailable or flat.
    """
    from .baselines import principal_components

    rng = np.random.default_rng(hyper.seed)
    if hyper.d <= X.shape[1]:
        Z, _ = principal_components(X, hyper.d)
        if np.sqrt(np.mean(np.sum(Z * Z, axis=1))) > 1e-12:
            Z = project_radius(Z, hyper.radius)
            if hyper.init_jitter > 0.0:
                Z = Z + rng.normal(scale=hyper.init_jitter * hyper.radius, size=Z.shape)
            return project_radius(Z, hyper.radius)
    return project_radius(rng.normal(size=(X.shape[0], hyper.d)), hyper.radius)


def optimise(
    Z: np.ndarray,
    B: np.ndarray,
    X: np.ndarray,
    Y: np.ndarray,
    hyper: Hyperparameters,
    optimise_z: bool = True,
    callback: Optional[Progress] = None,
) -> Tuple[np.ndarray, np.ndarray, LbfgsResult]:
    """L-BFGS over (Z, B) jointly, or over B alone with Z left untouched."""
    n, p = B.shape
    d = Z.shape[1]
    r = hyper.radius

    def split(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return x[: n * d].reshape(n, d), x[n * d :].reshape(n, p)

    def fun_joint(x: np.ndarray) -> Tuple[float, np.ndarray]:
        Zr, Bx = split(x)
        rho = np.sqrt(np.sum(Zr * Zr) / n)
        if not rho > 0.0:
            return np.inf, np.zeros_like(x)
        Zp = Zr * (r / rho)
        try:
            loss, gZ, gB = objective(Zp, Bx, X, Y, hyper)
        except OptimisationError:
            return np.inf, np.zeros_like(x)
        # chain rule through the radius map
        gZr = (r / rho) * (gZ - (np.sum(gZ * Zr) / (n * rho * rho)) * Zr)
        return loss, np.concatenate([gZr.ravel(), gB.ravel()])

    def project(x: np.ndarray) -> np.ndarray:
        Zr, Bx = split(x)
        return np.concatenate([project_radius(Zr, r).ravel(), Bx.ravel()])

    def fun_fixed(b: np.ndarray) -> Tuple[float, np.ndarray]:
        try:
            loss, _, gB = objective(Z, b.reshape(n, p), X, Y, hyper)
        except OptimisationError:
            return np.inf, np.zeros_like(b)
        return loss, gB.ravel()

    if optimise_z:
        x0 = np.concatenate([np.asarray(Z, dtype=np.float64).ravel(), B.ravel()])
        res = lbfgs_minimise(x0, fun_joint, hyper.lbfgs, project=project, callback=callback)
        Zn, Bn = split(res.x)
        return Zn.copy(), Bn.copy(), res

    res = lbfgs_minimise(B.ravel(), fun_fixed, hyper.lbfgs, callback=callback)
    return np.asarray(Z), res.x.reshape(n, p).copy(), res


def _relocate(
    Z: np.ndarray, B: np.ndarray, X: np.ndarray, Y: np.ndarray, hyper: Hyperparameters
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    One greedy pass: item i may move to the position (and adopt the local model) of a
    candidate item a. The score of a for i is the loss of item i under the models around a,
    sum_k W_ak L_ki, plus the weighted loss of a's own model, sum_k W_ak L_ak. A move is taken
    only when it strictly beats staying put; ties go to the lowest candidate index.
    """
    n = Z.shape[0]
    W = softmax_weights(Z, hyper.squared_distance)
    L = loss_matrix(hyper.family, B, X, Y)
    if n > hyper.escape_candidates:
        rng = np.random.default_rng(hyper.seed)
        cand = np.sort(rng.choice(n, size=hyper.escape_candidates, replace=False))
    else:
        cand = np.arange(n)

    WLT = W @ L  # [a, i] = sum_k W_ak L_ki
    own = np.sum(W * L, axis=1)
    current = np.diagonal(WLT) + own
    scores = WLT[cand] + own[cand, None]
    best = np.argmin(scores, axis=0)
    best_score = scores[best, np.arange(n)]
    target = cand[best]
    tol = 1e-12 * np.maximum(1.0, np.abs(current))
    move = (best_score < current - tol) & (target != np.arange(n))

    Zn = np.array(Z, dtype=np.float64)
    Bn = np.array(B, dtype=np.float64)
    Zn[move] = Z[target[move]]
    Bn[move] = B[target[move]]
    return Zn, Bn, int(np.count_nonzero(move))


def _escape_round(
    Z: np.ndarray,
    B: np.ndarray,
    X: np.ndarray,
    Y: np.ndarray,
    hyper: Hyperparameters,
    callback: Optional[Progress] = None,
) -> Tuple[np.ndarray, np.ndarray, bool, int, Optional[LbfgsResult]]:
    before = objective(Z, B, X, Y, hyper)[0]
    Zm, Bm, moved = _relocate(Z, B, X, Y, hyper)
    if moved == 0:
        return Z, B, False, 0, None
    Zm = project_radius(Zm, hyper.radius)
    # Only a few items moved: half the budget of the first phase
    budget = max(1, hyper.lbfgs.max_iter // 2)
    local = replace(hyper, lbfgs=replace(hyper.lbfgs, max_iter=budget))
    Zo, Bo, res = optimise(Zm, Bm, X, Y, local, callback=callback)
    after = objective(Zo, Bo, X, Y, hyper)[0]
    if after < before:
        return Zo, Bo, True, moved, res
    return Z, B, False, moved, res


def escape_heuristic(
    Z: np.ndarray, B: np.ndarray, X: np.ndarray, Y: np.ndarray, hyper: Hyperparameters
) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    Greedy relocation pass followed by a fresh L-BFGS run. The relocated state is kept
    only if it ends strictly below the input loss; otherwise the input comes back unchanged
    with improved=False.
    """
    Zo, Bo, improved, _, _ = _escape_round(Z, B, X, Y, hyper)
    return Zo, Bo, improved


def fit(
    data: Dataset,
    hyper: Hyperparameters,
    logger: Optional[JsonLinesLogger] = None,
    callback: Optional[Progress] = None,
) -> Solution:
    """
    Fit embedding and local models: global-model start, L-BFGS over (Z, B) with the radius
    constraint, then up to `escape_rounds` greedy escape passes (stopping at the first pass
    that does not improve). Deterministic for a fixed seed.
    """
    if data.n < 2:
        raise InputError("At least two data items are required")
    if hyper.family == CLASSIFICATION and (np.any(data.Y < 0.0) or np.any(data.Y > 1.0)):
        raise InputError("Classification targets must be probabilities in [0, 1]")
    X, Y = data.X, data.Y

    b0 = fit_global_model(hyper.family, data, hyper.ridge, hyper.regularise_intercept)
    B = np.tile(b0, (data.n, 1))
    Z = initial_embedding(X, hyper)
    diagnostics = FitDiagnostics()

    Z, B, res = optimise(Z, B, X, Y, hyper, callback=callback)
    diagnostics.iterations += res.iterations
    diagnostics.line_search_failed = res.line_search_failed
    diagnostics.converged = res.converged
    diagnostics.phases.append(("lbfgs", res.loss))
    if logger:
        logger.phase(
            phase="lbfgs", loss=res.loss, iterations=res.iterations, gradient_norm=res.gradient_norm
        )

    for round_no in range(1, hyper.escape_rounds + 1):
        before = diagnostics.phases[-1][1]
        Z, B, improved, moved, eres = _escape_round(Z, B, X, Y, hyper, callback=callback)
        if eres is not None:
            diagnostics.iterations += eres.iterations
        after = objective(Z, B, X, Y, hyper)[0]
        if logger:
            logger.escape(
                round_no=round_no,
                relocated=moved,
                loss_before=before,
                loss_after=after,
                improved=improved,
            )
        if not improved:
            break
        assert eres is not None
        diagnostics.escape_rounds = round_no
        diagnostics.converged = eres.converged
        diagnostics.line_search_failed = eres.line_search_failed
        diagnostics.phases.append((f"escape-{round_no}", after))

    loss, gZ, gB = objective(Z, B, X, Y, hyper)
    if not np.isfinite(loss):
        raise OptimisationError("Fit ended with a non-finite loss", diagnostics.to_dict())
    n = data.n
    tangent = gZ - (np.sum(gZ * Z) / (n * hyper.radius**2)) * Z
    diagnostics.gradient_norm = float(max(np.max(np.abs(tangent)), np.max(np.abs(gB))))
    return Solution(
        Z=Z,
        B=B,
        loss=loss,
        hyper=hyper,
        diagnostics=diagnostics,
        source="slisemap",
        dataset_checksum=dataset_checksum(data),
        coefficient_names=coefficient_names(data.feature_names),
        row_index=data.row_index(),
    )


def dataset_checksum(data: Dataset) -> str:
    return array_checksum(data.X, data.Y, names=[*data.feature_names, *data.target_names])
