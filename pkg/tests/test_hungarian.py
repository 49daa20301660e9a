import itertools

import numpy as np
import pytest

from slisemapper.errors import InputError
from slisemapper.hungarian import hungarian_assignment


def _brute_force(C):
    n = C.shape[0]
    return min(sum(C[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


@pytest.mark.parametrize("n", range(2, 8))
def test_matches_brute_force(n):
    rng = np.random.default_rng(n)
    for trial in range(100):
        # every other matrix has small integer costs, so optimal assignments tie
        if trial % 2:
            C = rng.integers(0, 4, size=(n, n)).astype(float)
        else:
            C = rng.uniform(0.0, 10.0, size=(n, n))
        assignment, total = hungarian_assignment(C)
        assert sorted(assignment.tolist()) == list(range(n))
        assert total == pytest.approx(C[np.arange(n), assignment].sum())
        assert total == pytest.approx(_brute_force(C), abs=1e-9)


def test_integer_costs_with_ties():
    C = np.array([[4, 1, 3], [2, 0, 5], [3, 2, 2]], dtype=float)
    assignment, total = hungarian_assignment(C)
    assert total == 5.0
    assert total == _brute_force(C)


def test_identity_is_optimal_for_zero_diagonal():
    C = np.ones((5, 5)) - np.eye(5)
    assignment, total = hungarian_assignment(C)
    np.testing.assert_array_equal(assignment, np.arange(5))
    assert total == 0.0


def test_edge_cases():
    assignment, total = hungarian_assignment(np.zeros((0, 0)))
    assert assignment.size == 0 and total == 0.0
    assignment, total = hungarian_assignment(np.array([[7.0]]))
    assert assignment.tolist() == [0] and total == 7.0
    with pytest.raises(InputError):
        hungarian_assignment(np.ones((2, 3)))
    with pytest.raises(InputError):
        hungarian_assignment(np.array([[1.0, np.inf], [0.0, 1.0]]))
