"""JSON and CSV schemas for solutions, metric reports and cluster summaries."""

from __future__ import annotations

import json
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import InputError
from .logging_utils import _plain
from .types import (
    ClusterSummary,
    Dataset,
    FitDiagnostics,
    Hyperparameters,
    MetricReport,
    Solution,
)
from .utils import file_checksum

SOLUTION_SCHEMA = "slisemapper.solution/1"
REPORT_SCHEMA = "slisemapper.metrics/1"
CLUSTER_SCHEMA = "slisemapper.clusters/1"
PROVENANCE_SCHEMA = "slisemapper.provenance/1"


def _write_json(path: str, payload: Dict[str, Any]) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_plain(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _read_json(path: str, schema: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise InputError(f"File not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: not valid JSON ({e})") from e
    if payload.get("schema") != schema:
        raise InputError(f"{path}: expected schema {schema!r}, got {payload.get('schema')!r}")
    return payload


def solution_to_dict(sol: Solution, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        "schema": SOLUTION_SCHEMA,
        "source": sol.source,
        "hyperparameters": sol.hyper.to_dict(),
        "Z": np.asarray(sol.Z).tolist(),
        "B": np.asarray(sol.B).tolist(),
        "loss": sol.loss,
        "diagnostics": sol.diagnostics.to_dict(),
        "dataset_checksum": sol.dataset_checksum,
        "coefficient_names": list(sol.coefficient_names),
        "row_index": None if sol.row_index is None else np.asarray(sol.row_index).tolist(),
        "config": config or {},
    }


def save_solution(sol: Solution, path: str, config: Optional[Dict[str, Any]] = None) -> str:
    return _write_json(path, solution_to_dict(sol, config))


def load_solution(path: str) -> Solution:
    payload = _read_json(path, SOLUTION_SCHEMA)
    try:
        diag = payload.get("diagnostics") or {}
        diagnostics = FitDiagnostics(
            iterations=int(diag.get("iterations", 0)),
            escape_rounds=int(diag.get("escape_rounds", 0)),
            gradient_norm=float(diag.get("gradient_norm") or float("nan")),
            converged=bool(diag.get("converged", False)),
            line_search_failed=bool(diag.get("line_search_failed", False)),
            phases=[(str(p), float(v)) for p, v in diag.get("phases", [])],
        )
        Z = np.array(payload["Z"], dtype=np.float64)
        B = np.array(payload["B"], dtype=np.float64)
        rows = payload.get("row_index")
        return Solution(
            Z=Z.reshape(Z.shape[0], -1),
            B=B,
            loss=float(payload["loss"]),
            hyper=Hyperparameters.from_dict(payload["hyperparameters"]),
            diagnostics=diagnostics,
            source=str(payload.get("source", "slisemap")),
            dataset_checksum=str(payload.get("dataset_checksum", "")),
            coefficient_names=list(payload.get("coefficient_names", [])),
            row_index=None if rows is None else np.array(rows, dtype=np.int64),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: malformed solution ({e})") from e


def write_matrix_csv(
    path: str, M: np.ndarray, columns: Optional[Sequence[str]] = None
) -> str:
    """Row-per-item CSV; without `columns` no header is written (embedding files)."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame = pd.DataFrame(np.asarray(M), columns=list(columns) if columns else None)
    frame.to_csv(path, index=False, header=bool(columns), float_format="%.17g")
    return path


def save_normalisation(data: Dataset, path: str) -> str:
    if data.normalisation is None:
        raise InputError("Dataset has no normalisation parameters to save")
    return _write_json(path, data.normalisation.to_dict(data.feature_names, data.target_names))


def provenance_path(matrix_stem: str) -> str:
    return f"{matrix_stem}.provenance.json"


def save_provenance(
    sol: Solution, path: str, files: Dict[str, str], config: Optional[Dict[str, Any]] = None
) -> str:
    """
    Sidecar for the plain CSV exports, which carry no metadata of their own: the run
    configuration, hyperparameters, dataset checksum and a sha256 of every exported file.
    """
    return _write_json(
        path,
        {
            "schema": PROVENANCE_SCHEMA,
            "dataset_checksum": sol.dataset_checksum,
            "hyperparameters": sol.hyper.to_dict(),
            "loss": sol.loss,
            "files": {
                kind: {"path": os.path.basename(p), "sha256": file_checksum(p)}
                for kind, p in files.items()
            },
            "config": config or {},
        },
    )


def save_metric_report(
    report: MetricReport, path: str, config: Optional[Dict[str, Any]] = None
) -> str:
    return _write_json(
        path,
        {
            "schema": REPORT_SCHEMA,
            "metrics": report.metrics(),
            "context": report.context,
            "config": config or {},
        },
    )


def cluster_summary_to_dict(summary: ClusterSummary) -> Dict[str, Any]:
    return {
        "schema": CLUSTER_SCHEMA,
        "k": summary.k,
        "labels": np.asarray(summary.labels).tolist(),
        "centroids": np.asarray(summary.centroids).tolist(),
        "mean_coefficients": np.asarray(summary.mean_coefficients).tolist(),
        "inertia": summary.inertia,
        "sizes": list(summary.sizes),
        "median_target": summary.median_target,
        "global_median": summary.global_median,
        "incidence": summary.incidence,
    }


def save_cluster_summary(
    summary: ClusterSummary,
    path: str,
    config: Optional[Dict[str, Any]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> str:
    payload = cluster_summary_to_dict(summary)
    payload["config"] = config or {}
    payload.update(extra or {})
    return _write_json(path, payload)


def load_cluster_summary(path: str) -> ClusterSummary:
    payload = _read_json(path, CLUSTER_SCHEMA)
    try:
        return ClusterSummary(
            k=int(payload["k"]),
            labels=np.array(payload["labels"], dtype=np.int64),
            centroids=np.array(payload["centroids"], dtype=np.float64),
            inertia=float(payload["inertia"]),
            sizes=[int(s) for s in payload["sizes"]],
            mean_coefficients=np.array(payload["mean_coefficients"], dtype=np.float64),
            median_target=payload.get("median_target"),
            global_median=payload.get("global_median"),
            incidence=payload.get("incidence"),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: malformed cluster summary ({e})") from e


def cluster_table(summary: ClusterSummary, coefficient_names: List[str]) -> pd.DataFrame:
    """One row per cluster: size, median target and the mean coefficient of every column."""
    table = pd.DataFrame(np.asarray(summary.mean_coefficients), columns=coefficient_names)
    table.insert(0, "cluster", np.arange(1, summary.k + 1))
    table.insert(1, "size", summary.sizes)
    if summary.median_target is not None:
        table.insert(2, "median_target", summary.median_target)
    return table
