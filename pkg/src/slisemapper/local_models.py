"""
Local white-box model families.

Each local model is an affine function of the features: a coefficient row b of length
m + 1 whose last entry is the intercept. The family fixes both the link and the loss:

- regression: prediction b . [x; 1], squared error.
- classification: prediction sigmoid(b . [x; 1]) as the class-1 probability, two-class
  Hellinger loss 0.5 * ((sqrt(p_hat) - sqrt(p))^2 + (sqrt(1 - p_hat) - sqrt(1 - p))^2),
  which lies in [0, 1].
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from .errors import InputError, OptimisationError
from .lbfgs import lbfgs_minimise
from .types import CLASSIFICATION, FAMILIES, REGRESSION, Dataset, LbfgsSettings

# Predicted probabilities are clamped to [PROB_EPS, 1 - PROB_EPS].
PROB_EPS = 1e-8


def _check_family(family: str) -> None:
    if family not in FAMILIES:
        raise InputError(f"Unknown model family {family!r}; expected one of {FAMILIES}")


def add_intercept(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.hstack([X, np.ones((X.shape[0], 1))])


def coefficient_names(feature_names) -> list[str]:
    return [*feature_names, "intercept"]


def _sigmoid(s: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * s))


def _check_dims(b: np.ndarray, x: np.ndarray) -> None:
    if b.ndim != 1 or x.ndim != 1 or b.shape[0] != x.shape[0] + 1:
        raise InputError(
            f"Coefficient row of length {b.shape} does not match {x.shape} features plus intercept"
        )


def predict(family: str, b: np.ndarray, x: np.ndarray) -> float:
    _check_family(family)
    b = np.asarray(b, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    _check_dims(b, x)
    s = float(np.dot(b[:-1], x) + b[-1])
    if family == REGRESSION:
        return s
    return float(_sigmoid(np.array(s)))


def predict_matrix(family: str, B: np.ndarray, X: np.ndarray) -> np.ndarray:
    """P[i, j] = f_i(x_j) for every coefficient row i and data row j."""
    S = np.atleast_2d(B) @ add_intercept(X).T
    if family == REGRESSION:
        return S
    return _sigmoid(S)


def _hellinger(p_hat: np.ndarray, p: np.ndarray) -> np.ndarray:
    a = np.sqrt(p_hat) - np.sqrt(p)
    b = np.sqrt(1.0 - p_hat) - np.sqrt(1.0 - p)
    return 0.5 * (a * a + b * b)


def point_loss(family: str, prediction, target):
    """Loss of a prediction against a target; scalars or broadcastable arrays."""
    _check_family(family)
    pred = np.asarray(prediction, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    if family == REGRESSION:
        out = (pred - y) ** 2
    else:
        if np.any((pred < 0.0) | (pred > 1.0)) or np.any((y < 0.0) | (y > 1.0)):
            raise InputError("Hellinger loss needs probabilities in [0, 1]")
        out = _hellinger(pred, y)
    return float(out) if out.ndim == 0 else out


def _loss_and_score_derivative(
    family: str, S: np.ndarray, y: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Loss and its derivative with respect to the linear score s = b . [x; 1]."""
    if family == REGRESSION:
        r = S - y
        return r * r, 2.0 * r
    raw = _sigmoid(S)
    p_hat = np.clip(raw, PROB_EPS, 1.0 - PROB_EPS)
    L = _hellinger(p_hat, y)
    sq_hat, sq_hat_c = np.sqrt(p_hat), np.sqrt(1.0 - p_hat)
    # dL/dp_hat * dp_hat/ds, written to avoid dividing by sqrt(p_hat)
    dS = 0.5 * (np.sqrt(1.0 - y) * sq_hat_c * p_hat - np.sqrt(y) * sq_hat * (1.0 - p_hat))
    dS = np.where(raw == p_hat, dS, 0.0)
    return L, dS


def point_loss_gradient(family: str, b: np.ndarray, x: np.ndarray, target: float) -> np.ndarray:
    """Gradient of point_loss(predict(b, x), target) with respect to b."""
    _check_family(family)
    b = np.asarray(b, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    _check_dims(b, x)
    if family == CLASSIFICATION and not 0.0 <= float(target) <= 1.0:
        raise InputError("Hellinger loss needs probabilities in [0, 1]")
    xt = np.append(x, 1.0)
    _, dS = _loss_and_score_derivative(family, np.array(np.dot(b, xt)), np.array(float(target)))
    return float(dS) * xt


def loss_matrix(family: str, B: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """L[i, j] = l(f_i(x_j), y_j)."""
    _check_family(family)
    S = np.atleast_2d(B) @ add_intercept(X).T
    L, _ = _loss_and_score_derivative(family, S, np.asarray(Y, dtype=np.float64).reshape(1, -1))
    return L


def loss_matrix_with_derivative(
    family: str, B: np.ndarray, Xt: np.ndarray, y: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Loss matrix and dL/ds for intercept-augmented features `Xt` and flat targets `y`."""
    return _loss_and_score_derivative(family, B @ Xt.T, y.reshape(1, -1))


def penalty_mask(p: int, regularise_intercept: bool = True) -> np.ndarray:
    mask = np.ones(p)
    if not regularise_intercept:
        mask[-1] = 0.0
    return mask


def fit_global_model(
    family: str,
    data: Dataset,
    ridge: float = 0.0,
    regularise_intercept: bool = True,
    settings: Optional[LbfgsSettings] = None,
) -> np.ndarray:
    """
    One coefficient row minimising mean point loss + ridge * ||b||^2 over all rows.

    Regression is solved in closed form; classification with L-BFGS, raising
    OptimisationError when the gradient is still large after max_iter iterations.
    """
    _check_family(family)
    Xt = add_intercept(data.X)
    y = data.Y[:, 0]
    n, p = Xt.shape
    mask = penalty_mask(p, regularise_intercept)
    if family == REGRESSION:
        A = Xt.T @ Xt / n + ridge * np.diag(mask)
        rhs = Xt.T @ y / n
        b, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        return b

    def fun(b: np.ndarray) -> Tuple[float, np.ndarray]:
        L, dS = _loss_and_score_derivative(family, Xt @ b, y)
        loss = float(L.mean() + ridge * np.sum(mask * b * b))
        grad = Xt.T @ dS / n + 2.0 * ridge * mask * b
        return loss, grad

    settings = settings or LbfgsSettings(max_iter=1000, gtol=1e-7, ftol=1e-12)
    res = lbfgs_minimise(np.zeros(p), fun, settings)
    if not res.converged and res.gradient_norm > 1e-3:
        raise OptimisationError(
            f"Global model did not converge after {res.iterations} iterations "
            f"(gradient norm {res.gradient_norm:.3g})",
            {"iterations": res.iterations, "gradient_norm": res.gradient_norm},
        )
    return res.x
