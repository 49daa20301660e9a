import json

import numpy as np
import pandas as pd
import pytest

from slisemapper.clustering import cluster_target_stats, kmeans_on_coefficients
from slisemapper.engine import fit
from slisemapper.errors import InputError
from slisemapper.storage import (
    cluster_table,
    load_cluster_summary,
    load_solution,
    save_cluster_summary,
    save_metric_report,
    save_normalisation,
    save_solution,
    write_matrix_csv,
)
from slisemapper.types import MetricReport


def test_solution_round_trip(tmp_path, regimes, quick):
    data, _ = regimes
    sol = fit(data, quick)
    path = save_solution(sol, str(tmp_path / "sol.json"), config={"seed": 42})
    back = load_solution(path)
    np.testing.assert_array_equal(back.Z, sol.Z)
    np.testing.assert_array_equal(back.B, sol.B)
    assert back.loss == sol.loss
    assert back.hyper == sol.hyper
    assert back.dataset_checksum == sol.dataset_checksum
    assert back.coefficient_names == sol.coefficient_names
    assert back.diagnostics.phases == sol.diagnostics.phases
    payload = json.loads(open(path, encoding="utf-8").read())
    assert payload["config"] == {"seed": 42}


def test_load_solution_rejects_other_files(tmp_path):
    path = tmp_path / "x.json"
    path.write_text('{"schema": "something-else"}', encoding="utf-8")
    with pytest.raises(InputError, match="schema"):
        load_solution(str(path))
    path.write_text("not json", encoding="utf-8")
    with pytest.raises(InputError):
        load_solution(str(path))
    with pytest.raises(InputError):
        load_solution(str(tmp_path / "missing.json"))


def test_cluster_summary_round_trip_and_table(tmp_path, regimes):
    data, _ = regimes
    B = np.random.default_rng(0).normal(size=(data.n, 3))
    summary = cluster_target_stats(kmeans_on_coefficients(B, 2, seed=0), data)
    path = save_cluster_summary(summary, str(tmp_path / "c.json"))
    back = load_cluster_summary(path)
    np.testing.assert_array_equal(back.labels, summary.labels)
    assert back.sizes == summary.sizes
    assert back.median_target == pytest.approx(summary.median_target)
    table = cluster_table(back, ["x1", "x2", "intercept"])
    assert table.columns.tolist() == ["cluster", "size", "median_target", "x1", "x2", "intercept"]
    assert table["cluster"].tolist() == [1, 2]


def test_matrix_csv_header_only_with_columns(tmp_path):
    M = np.array([[1.5, 2.0], [3.0, 4.25]])
    write_matrix_csv(str(tmp_path / "z.csv"), M)
    assert (tmp_path / "z.csv").read_text().splitlines()[0] == "1.5,2"
    write_matrix_csv(str(tmp_path / "b.csv"), M, ["a", "b"])
    back = pd.read_csv(tmp_path / "b.csv")
    assert back.columns.tolist() == ["a", "b"]
    np.testing.assert_array_equal(back.to_numpy(), M)


def test_metric_report_and_normalisation_files(tmp_path, regimes):
    data, _ = regimes
    report = MetricReport(local_loss=0.5, nn_coverage=0.25, context={"k": 3})
    payload = json.loads(open(save_metric_report(report, str(tmp_path / "m.json"))).read())
    assert payload["metrics"]["local_loss"] == 0.5
    assert payload["metrics"]["permutation_loss"] is None
    assert payload["context"] == {"k": 3}
    norm = json.loads(open(save_normalisation(data, str(tmp_path / "n.json"))).read())
    assert set(norm) == {"x1", "x2", "y"}
