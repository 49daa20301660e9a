import numpy as np
import pytest
from conftest import dataset

from slisemapper.errors import InputError
from slisemapper.local_models import (
    coefficient_names,
    fit_global_model,
    loss_matrix,
    point_loss,
    point_loss_gradient,
    predict,
    predict_matrix,
)
from slisemapper.types import CLASSIFICATION, REGRESSION


def _numeric_gradient(f, b, h=1e-6):
    g = np.zeros_like(b)
    for k in range(b.size):
        e = np.zeros_like(b)
        e[k] = h
        g[k] = (f(b + e) - f(b - e)) / (2 * h)
    return g


def test_predict_regression_and_classification():
    assert predict(REGRESSION, np.array([1.0, 2.0, 0.5]), np.array([1.0, 1.0])) == 3.5
    assert predict(CLASSIFICATION, np.array([0.0, 0.0]), np.array([5.0])) == pytest.approx(0.5)
    p = predict(CLASSIFICATION, np.array([40.0, 0.0]), np.array([1.0]))
    assert 0.0 <= p <= 1.0
    with pytest.raises(InputError):
        predict(REGRESSION, np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(InputError):
        predict("poisson", np.array([1.0, 2.0]), np.array([1.0]))


def test_point_loss_values():
    assert point_loss(REGRESSION, 3.0, 1.0) == 4.0
    assert point_loss(CLASSIFICATION, 0.3, 0.3) == 0.0
    assert point_loss(CLASSIFICATION, 0.0, 1.0) == pytest.approx(1.0)
    grid = np.linspace(0.0, 1.0, 11)
    L = point_loss(CLASSIFICATION, grid[:, None], grid[None, :])
    assert np.all(L >= 0.0) and np.all(L <= 1.0)
    with pytest.raises(InputError):
        point_loss(CLASSIFICATION, 1.2, 0.5)


@pytest.mark.parametrize("family,target", [(REGRESSION, 0.7), (CLASSIFICATION, 0.3)])
def test_point_loss_gradient_matches_finite_differences(family, target):
    rng = np.random.default_rng(0)
    x = rng.normal(size=3)
    b = rng.normal(size=4) * 0.5

    def f(bb):
        return point_loss(family, predict(family, bb, x), target)

    np.testing.assert_allclose(
        point_loss_gradient(family, b, x, target), _numeric_gradient(f, b), rtol=1e-5, atol=1e-9
    )


def test_loss_matrix_matches_double_loop():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(6, 2))
    y = rng.uniform(size=6)
    B = rng.normal(size=(6, 3))
    for family in (REGRESSION, CLASSIFICATION):
        L = loss_matrix(family, B, X, y)
        for i in range(6):
            for j in range(6):
                expected = point_loss(family, predict(family, B[i], X[j]), y[j])
                assert L[i, j] == pytest.approx(expected, abs=1e-12)
    P = predict_matrix(REGRESSION, B, X)
    assert P[2, 4] == pytest.approx(predict(REGRESSION, B[2], X[4]))


def test_fit_global_model_recovers_linear_coefficients():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 3))
    w = np.array([1.5, -2.0, 0.25])
    data = dataset(X, X @ w + 0.75)
    b = fit_global_model(REGRESSION, data, ridge=0.0)
    np.testing.assert_allclose(b, [*w, 0.75], atol=1e-8)
    # ridge shrinks
    shrunk = fit_global_model(REGRESSION, data, ridge=1.0)
    assert np.linalg.norm(shrunk) < np.linalg.norm(b)


def test_fit_global_model_classification():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(80, 2))
    p = 1.0 / (1.0 + np.exp(-(X @ np.array([1.0, -0.5]) + 0.2)))
    data = dataset(X, p, classification=True)
    b = fit_global_model(CLASSIFICATION, data)
    np.testing.assert_allclose(b, [1.0, -0.5, 0.2], atol=1e-2)


def test_coefficient_names():
    assert coefficient_names(["a", "b"]) == ["a", "b", "intercept"]
