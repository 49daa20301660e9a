import numpy as np
import pandas as pd

from slisemapper.synth import make_regimes, write_regimes_csv


def test_make_regimes_shapes_and_balance():
    data, labels, coefficients = make_regimes(n=90, m=4, regimes=3, seed=0)
    assert data.X.shape == (90, 4)
    assert data.Y.shape == (90, 1)
    assert np.bincount(labels).tolist() == [30, 30, 30]
    assert coefficients.shape == (3, 5)
    again, labels2, _ = make_regimes(n=90, m=4, regimes=3, seed=0)
    np.testing.assert_array_equal(again.X, data.X)
    np.testing.assert_array_equal(labels2, labels)


def test_offset_shifts_regime_targets():
    base, labels, coefficients = make_regimes(n=300, m=2, regimes=2, noise=0.0, seed=1)
    shifted, _, shifted_coefficients = make_regimes(
        n=300, m=2, regimes=2, noise=0.0, offset=10.0, seed=1
    )
    diff = shifted.Y[:, 0] - base.Y[:, 0]
    np.testing.assert_allclose(diff, 10.0 * labels)
    np.testing.assert_allclose(shifted_coefficients[:, -1], [0.0, 10.0])
    np.testing.assert_array_equal(shifted_coefficients[:, :-1], coefficients[:, :-1])


def test_coefficients_generate_noise_free_targets():
    data, labels, coefficients = make_regimes(
        n=60, m=3, regimes=3, noise=0.0, offset=2.0, seed=4
    )
    w = coefficients[labels]
    np.testing.assert_allclose(data.Y[:, 0], np.sum(data.X * w[:, :-1], axis=1) + w[:, -1])


def test_classification_targets_are_probabilities():
    data, _, _ = make_regimes(n=50, m=3, regimes=2, classification=True, seed=2)
    assert data.classification
    assert np.all((data.Y >= 0.0) & (data.Y <= 1.0))


def test_write_regimes_csv(tmp_path):
    data, labels, _ = make_regimes(n=20, m=2, regimes=2, seed=3)
    path, labels_path = write_regimes_csv(data, labels, str(tmp_path / "d.csv"))
    frame = pd.read_csv(path)
    assert frame.columns.tolist() == ["x1", "x2", "y"]
    np.testing.assert_array_equal(frame[["x1", "x2"]].to_numpy(), data.X)
    assert labels_path.endswith("d.regimes.csv")
    assert pd.read_csv(labels_path)["regime"].tolist() == labels.tolist()
