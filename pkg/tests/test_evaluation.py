from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from conftest import dataset
from sklearn.metrics import adjusted_rand_score

from slisemapper.clustering import kmeans_on_coefficients
from slisemapper.data import coefficients_in_normalised_units, normalise
from slisemapper.engine import fit
from slisemapper.errors import InputError
from slisemapper.evaluation import (
    EXPERIMENT_COLUMNS,
    MODEL_STABILITY,
    NEIGHBOURHOOD_STABILITY,
    PERMUTATION,
    compare_embeddings,
    comparison_table,
    coverage_threshold,
    explanation_quality,
    local_model_stability,
    neighbourhood_stability,
    permutation_loss,
    quality_report,
    stability_experiment,
    summarise_experiment,
)
from slisemapper.hungarian import hungarian_assignment
from slisemapper.local_models import fit_global_model, loss_matrix, point_loss, predict
from slisemapper.synth import make_regimes
from slisemapper.types import Hyperparameters, LbfgsSettings, Solution


def _solution(Z, B, rows=None, hyper=None):
    Z = np.asarray(Z, dtype=float)
    return Solution(
        Z=Z.reshape(Z.shape[0], -1),
        B=np.asarray(B, dtype=float),
        loss=0.0,
        hyper=hyper or Hyperparameters(),
        row_index=None if rows is None else np.asarray(rows),
    )


def test_local_model_stability_hand_values():
    a = _solution(np.zeros(2), [[0.0], [1.0]])
    assert local_model_stability(a, _solution(np.zeros(2), [[1.0], [0.0]])) == 0.0
    # every pairing costs 1, total 2, normaliser 4 / 2
    b = _solution(np.zeros(2), [[0.0], [2.0]])
    c = _solution(np.zeros(2), [[1.0], [1.0]])
    assert local_model_stability(b, c) == pytest.approx(1.0)


def test_local_model_stability_ignores_row_order():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(12, 4))
    a = _solution(np.zeros(12), B)
    b = _solution(np.zeros(12), B[rng.permutation(12)])
    assert local_model_stability(a, b) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InputError):
        local_model_stability(a, _solution(np.zeros(3), B[:3]))


def test_neighbourhood_stability_matches_items_by_row():
    a = _solution([[0.0], [0.5], [5.0]], np.zeros((3, 2)), rows=[0, 1, 2])
    # same items in a different order: 2, 0, 1
    b = _solution([[5.5], [0.0], [5.0]], np.zeros((3, 2)), rows=[2, 0, 1])
    assert neighbourhood_stability(a, a, [0, 1, 2]) == 0.0
    assert neighbourhood_stability(a, b, [0, 1, 2]) == pytest.approx(5.0 / 9.0)
    with pytest.raises(InputError):
        neighbourhood_stability(a, b, [0, 7])


def _reference_quality(Z, B, X, y, k, l0):
    n = len(y)
    local, nn_loss, nn_cov = 0.0, 0.0, 0.0
    for i in range(n):
        local += point_loss("regression", predict("regression", B[i], X[i]), y[i])
        dist = [(np.linalg.norm(Z[i] - Z[j]), j) for j in range(n) if j != i]
        neighbours = [j for _, j in sorted(dist)[:k]]
        losses = [
            point_loss("regression", predict("regression", B[i], X[j]), y[j]) for j in neighbours
        ]
        nn_loss += sum(losses) / k
        nn_cov += sum(1 for v in losses if v < l0) / k
    return local / n, nn_loss / n, nn_cov / n


def test_explanation_quality_matches_reference():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 2))
    y = rng.normal(size=20)
    data = dataset(X, y)
    Z = rng.normal(size=(20, 2))
    B = rng.normal(size=(20, 3))
    l0 = 1.0
    q = explanation_quality(_solution(Z, B), data, k_fraction=0.2, l0=l0)
    local, nn_loss, nn_cov = _reference_quality(Z, B, X, y, 4, l0)
    assert q.k == 4
    assert q.local_loss == pytest.approx(local, abs=1e-12)
    assert q.nn_local_loss == pytest.approx(nn_loss, abs=1e-12)
    assert q.nn_coverage == pytest.approx(nn_cov, abs=1e-12)
    L = loss_matrix("regression", B, X, y)
    assert q.global_coverage == pytest.approx(np.mean(L < l0))


def test_quality_of_interpolating_solution():
    # two exact linear regimes, far apart in the embedding, each model on its own regime
    x = np.linspace(-1.0, 1.0, 10)
    X = np.concatenate([x, x])[:, None]
    y = np.concatenate([2 * x + 1, -3 * x])
    data = dataset(X, y)
    regime = np.repeat([0, 1], 10)
    B = np.array([[2.0, 1.0], [-3.0, 0.0]])[regime]
    Z = np.column_stack([np.where(regime == 0, -3.0, 3.0) + 0.01 * np.arange(20), np.zeros(20)])
    report = quality_report(_solution(Z, B), data)
    assert report.local_loss == pytest.approx(0.0, abs=1e-20)
    assert report.nn_local_loss == pytest.approx(0.0, abs=1e-20)
    assert report.nn_coverage == 1.0
    assert report.context["k"] == 2


def test_explanation_quality_is_rotation_invariant(regimes, quick):
    data, _ = regimes
    sol = fit(data, quick)
    base = explanation_quality(sol, data)
    rng = np.random.default_rng(3)
    for _ in range(10):
        R, _ = np.linalg.qr(rng.normal(size=(2, 2)))
        rotated = explanation_quality(replace(sol, Z=sol.Z @ R), data)
        assert rotated.local_loss == pytest.approx(base.local_loss, rel=1e-9)
        assert rotated.nn_local_loss == pytest.approx(base.nn_local_loss, rel=1e-9)
        assert rotated.nn_coverage == pytest.approx(base.nn_coverage)


def test_coverage_threshold_is_global_loss_quantile(regimes):
    data, _ = regimes
    hyper = Hyperparameters()
    b = fit_global_model("regression", data, hyper.ridge)
    losses = loss_matrix("regression", b[None, :], data.X, data.Y)[0]
    assert coverage_threshold(data, hyper) == pytest.approx(np.quantile(losses, 0.3))


def test_explanation_quality_rejects_bad_k(regimes):
    data, _ = regimes
    sol = _solution(np.zeros((data.n, 2)), np.zeros((data.n, 3)))
    with pytest.raises(InputError):
        explanation_quality(sol, data, k_fraction=0.001)


def test_permutation_loss_below_one_on_structured_data(regimes, quick):
    data, _ = regimes
    hyper = replace(quick, escape_rounds=0)
    assert permutation_loss(data, hyper, seeds=[0, 1]) < 1.0
    with pytest.raises(InputError):
        permutation_loss(data, hyper, seeds=[])


def test_stability_experiment_schema_and_thread_independence(regimes):
    data, _ = regimes
    hyper = Hyperparameters(escape_rounds=0, lbfgs=LbfgsSettings(max_iter=30))
    one = stability_experiment(data, hyper, [10, 20], repetitions=1, master_seed=3, threads=1)
    two = stability_experiment(data, hyper, [10, 20], repetitions=1, master_seed=3, threads=2)
    assert list(one.columns) == EXPERIMENT_COLUMNS
    assert len(one) == 2 * 1 * 3
    assert set(one["metric"]) == {PERMUTATION, MODEL_STABILITY, NEIGHBOURHOOD_STABILITY}
    pd.testing.assert_frame_equal(one, two)


def test_stability_experiment_writes_csv(tmp_path, regimes):
    data, _ = regimes
    hyper = Hyperparameters(escape_rounds=0, lbfgs=LbfgsSettings(max_iter=20))
    out = tmp_path / "stability.csv"
    table = stability_experiment(data, hyper, [10], repetitions=2, out_path=str(out))
    back = pd.read_csv(out)
    assert list(back.columns) == EXPERIMENT_COLUMNS
    np.testing.assert_array_equal(back["value"].to_numpy(), table["value"].to_numpy())


def test_stability_experiment_infeasible_size(regimes):
    data, _ = regimes
    with pytest.raises(InputError):
        stability_experiment(data, Hyperparameters(), [50])
    with pytest.raises(InputError):
        stability_experiment(data, Hyperparameters(), [1])


def test_comparison_table_flags_best():
    scores = pd.DataFrame(
        {
            "method": ["slisemap", "pca", "slisemap", "pca"],
            "repetition": [0, 0, 1, 1],
            "local_loss": [0.1, 0.5, 0.3, 0.7],
            "nn_local_loss": [0.2, 0.6, 0.2, 0.6],
            "nn_coverage": [0.9, 0.4, 0.7, 0.6],
            "seed": [1, 1, 2, 2],
        }
    )
    table = comparison_table(scores)
    assert table["method"].tolist() == ["slisemap", "pca"]
    assert table["local_loss_mean"].tolist() == pytest.approx([0.2, 0.6])
    assert table["best_local_loss"].tolist() == [True, False]
    assert table["best_nn_coverage"].tolist() == [True, False]
    assert table["nn_local_loss_std"].tolist() == pytest.approx([0.0, 0.0])


def test_compare_embeddings_rejects_external_with_wrong_rows(tmp_path, regimes):
    data, _ = regimes
    path = tmp_path / "tsne.csv"
    np.savetxt(path, np.zeros((data.n - 1, 2)) + 1.0, delimiter=",")
    with pytest.raises(InputError, match="tsne.csv"):
        compare_embeddings(data, Hyperparameters(), {"tsne": str(path)}, repetitions=1)


def test_compare_embeddings_methods(tmp_path, regimes):
    data, _ = regimes
    path = tmp_path / "coords.csv"
    np.savetxt(path, np.random.default_rng(0).normal(size=(data.n, 2)), delimiter=",")
    hyper = Hyperparameters(escape_rounds=0, lbfgs=LbfgsSettings(max_iter=30))
    scores = compare_embeddings(
        data, hyper, {"random": str(path)}, sample_size=40, repetitions=2, master_seed=1
    )
    assert len(scores) == 3 * 2
    assert list(dict.fromkeys(scores["method"])) == ["slisemap", "pca", "external:random"]


@pytest.mark.slow
def test_permutation_loss_on_three_regimes():
    data, _, _ = make_regimes(n=400, m=5, regimes=3, noise=0.1, seed=11)
    data = normalise(data)
    assert permutation_loss(data, Hyperparameters(), seeds=range(5), threads=5) < 0.9


@pytest.mark.slow
def test_slisemap_beats_pca_on_regime_data():
    data, _, _ = make_regimes(n=500, m=5, regimes=3, noise=0.1, seed=12)
    data = normalise(data)
    table = comparison_table(
        compare_embeddings(data, Hyperparameters(), sample_size=300, repetitions=5, threads=5)
    )
    rows = table.set_index("method")
    assert rows.loc["slisemap", "local_loss_mean"] < rows.loc["pca", "local_loss_mean"]
    assert rows.loc["slisemap", "nn_local_loss_mean"] < rows.loc["pca", "nn_local_loss_mean"]
    assert rows.loc["slisemap", "nn_coverage_mean"] > rows.loc["pca", "nn_coverage_mean"]


@pytest.mark.slow
def test_permutation_loss_is_one_on_iid_noise():
    rng = np.random.default_rng(13)
    data = normalise(dataset(rng.normal(size=(400, 5)), rng.normal(size=400)))
    value = permutation_loss(data, Hyperparameters(), seeds=range(5), threads=5)
    assert 0.9 < value < 1.1


@pytest.mark.slow
def test_local_models_recover_generating_regimes():
    raw, labels, coefficients = make_regimes(n=300, m=5, regimes=2, noise=0.1, seed=14)
    data = normalise(raw)
    sol = fit(data, Hyperparameters())
    summary = kmeans_on_coefficients(sol.B, 2, seed=0)
    assert adjusted_rand_score(labels, summary.labels) >= 0.9
    truth = coefficients_in_normalised_units(coefficients, data)
    cost = np.abs(summary.centroids[:, None, :] - truth[None, :, :]).max(axis=2)
    assignment, _ = hungarian_assignment(cost)
    assert np.max(cost[np.arange(2), assignment]) < 0.1


@pytest.mark.slow
def test_stability_improves_with_sample_size():
    raw, _, _ = make_regimes(n=400, m=5, regimes=3, noise=0.1, seed=15)
    hyper = Hyperparameters(escape_rounds=1)
    table = stability_experiment(
        normalise(raw), hyper, [50, 100, 200], repetitions=3, master_seed=2, threads=4
    )
    summary = summarise_experiment(table).set_index(["metric", "size"])
    for metric in (PERMUTATION, MODEL_STABILITY, NEIGHBOURHOOD_STABILITY):
        rows = summary.loc[metric]
        assert np.all(rows["mean"] < rows["baseline_mean"]), metric
    for metric in (PERMUTATION, MODEL_STABILITY):
        rows = summary.loc[metric]
        assert rows.loc[200, "mean"] < rows.loc[50, "mean"], metric
