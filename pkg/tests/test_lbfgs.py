from dataclasses import replace

import numpy as np
import pytest

from slisemapper.errors import OptimisationError
from slisemapper.lbfgs import InverseLbfgs, lbfgs_minimise
from slisemapper.types import LbfgsSettings


def rosenbrock(x):
    a, b = x
    f = (1 - a) ** 2 + 100 * (b - a * a) ** 2
    g = np.array([-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)])
    return f, g


def test_rosenbrock():
    settings = LbfgsSettings(max_iter=5000, gtol=1e-8, ftol=0.0)
    res = lbfgs_minimise(np.array([-1.2, 1.0]), rosenbrock, settings)
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-4)
    assert res.loss < 1e-8


def test_quadratic_converges_with_monotone_losses():
    A = np.diag([1.0, 10.0, 100.0])
    c = np.array([1.0, -2.0, 3.0])

    def fun(x):
        r = x - c
        return 0.5 * r @ A @ r, A @ r

    seen = []
    settings = LbfgsSettings(gtol=1e-10, ftol=0.0)
    res = lbfgs_minimise(np.zeros(3), fun, settings, callback=lambda it, f, g: seen.append(it))
    assert res.converged
    assert not res.line_search_failed
    np.testing.assert_allclose(res.x, c, atol=1e-9)
    assert all(b <= a for a, b in zip(res.losses, res.losses[1:]))
    assert seen == list(range(1, res.iterations + 1))


def test_stalled_loss_counts_as_converged():
    # Quartic valley: the loss flattens out long before the gradient reaches gtol
    def fun(x):
        return float(np.sum(x**4)), 4 * x**3

    settings = LbfgsSettings(max_iter=2000, gtol=1e-12, ftol=1e-9, stall_window=5)
    res = lbfgs_minimise(np.array([3.0, -2.0]), fun, settings)
    assert res.converged
    assert res.iterations < 2000
    assert res.loss < 1e-3
    assert res.losses[-6] - res.losses[-1] <= 1e-9

    res = lbfgs_minimise(np.array([3.0, -2.0]), fun, replace(settings, ftol=0.0, max_iter=5))
    assert not res.converged


def test_projection_keeps_iterates_feasible():
    target = np.array([3.0, 4.0])

    def fun(x):
        r = x - target
        return float(r @ r), 2 * r

    def onto_circle(x):
        return x / np.linalg.norm(x)

    res = lbfgs_minimise(
        np.array([1.0, 0.0]), fun, LbfgsSettings(max_iter=200, ftol=0.0), project=onto_circle
    )
    assert np.linalg.norm(res.x) == pytest.approx(1.0)
    np.testing.assert_allclose(res.x, target / 5.0, atol=1e-3)


def test_max_iter_zero_returns_start():
    def square(x):
        return float(x @ x), 2 * x

    res = lbfgs_minimise(np.array([2.0]), square, LbfgsSettings(max_iter=0))
    assert res.iterations == 0
    np.testing.assert_array_equal(res.x, [2.0])
    assert not res.converged


def test_non_finite_start_raises():
    with pytest.raises(OptimisationError):
        lbfgs_minimise(np.array([1.0]), lambda x: (np.nan, np.zeros(1)))


def test_inverse_memory_secant_condition():
    memory = InverseLbfgs(history=3)
    np.testing.assert_array_equal(memory.matvec(np.array([1.0, 2.0])), [1.0, 2.0])
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    s = np.array([1.0, -0.3])
    assert memory.store(s, A @ s)
    np.testing.assert_allclose(memory.matvec(A @ s), s, atol=1e-12)
    # negative curvature is rejected
    assert not memory.store(np.array([1.0, 0.0]), np.array([-1.0, 0.0]))
    assert len(memory) == 1
    for k in range(5):
        memory.store(np.array([1.0, k]), A @ np.array([1.0, k]))
    assert len(memory) == 3
