"""
Quality measures for fitted solutions and the resampling experiment behind them.

- permutation loss: fitted loss on the real targets over fitted loss on permuted targets.
- local model stability: optimal-matching distance between two populations of local
  models, normalised by their mean pairwise distance.
- neighbourhood stability: one minus the mean Jaccard similarity of radius-1 neighbourhoods
  of shared items in two embeddings.
- explanation quality: local loss, k-NN local loss and k-NN coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .baselines import (
    fit_local_models_on_fixed_embedding,
    load_external_embedding,
    pca_embed,
    rescale_embedding,
)
from .data import permute_targets, resample
from .engine import fit, pairwise_distances
from .errors import InputError
from .hungarian import hungarian_assignment
from .local_models import fit_global_model, loss_matrix
from .logging_utils import JsonLinesLogger
from .types import Dataset, Hyperparameters, MetricReport, QualityScores, Solution
from .utils import derive_seeds, parallel_map

PERMUTATION = "permutation_loss"
MODEL_STABILITY = "local_model_stability"
NEIGHBOURHOOD_STABILITY = "neighbourhood_stability"
EXPERIMENT_COLUMNS = ["size", "repetition", "metric", "value", "baselineValue", "seed"]


def _fit_with_seed(data: Dataset, hyper: Hyperparameters, seed: int) -> Solution:
    return fit(data, replace(hyper, seed=seed))


def permutation_loss(
    data: Dataset, hyper: Hyperparameters, seeds: Sequence[int], threads: int = 1
) -> float:
    """Mean over seeds of L / L_permuted, with a fresh target permutation per seed."""
    seeds = list(seeds)
    if not seeds:
        raise InputError("permutation_loss needs at least one seed")

    def ratio(seed: int) -> float:
        real = _fit_with_seed(data, hyper, seed).loss
        permuted = _fit_with_seed(permute_targets(data, seed), hyper, seed).loss
        return real / permuted

    return float(np.mean(parallel_map(ratio, seeds, threads)))


def local_model_stability(sol_a: Solution, sol_b: Solution) -> float:
    """min over matchings of sum ||B_i - B'_pi(i)||, divided by sum_ij ||B_i - B'_j|| / n."""
    A, B = np.asarray(sol_a.B), np.asarray(sol_b.B)
    if A.shape != B.shape:
        raise InputError(f"Coefficient matrices differ in shape: {A.shape} vs {B.shape}")
    diff = A[:, None, :] - B[None, :, :]
    cost = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    norm = cost.sum() / A.shape[0]
    if norm == 0.0:
        return 0.0
    _, total = hungarian_assignment(cost)
    return float(total / norm)


def neighbourhood_stability(
    sol_a: Solution, sol_b: Solution, shared: Iterable[int], radius: float = 1.0
) -> float:
    """
    For each shared item i, N(i) = shared items within `radius` of z_i, in each embedding;
    returns 1 - mean Jaccard(N(i), N'(i)). Items are matched through `Solution.rows()`.
    """
    shared = np.unique(np.asarray(list(shared), dtype=np.int64))
    if shared.size == 0:
        raise InputError("neighbourhood_stability needs a non-empty shared set")

    def locate(sol: Solution) -> np.ndarray:
        pos = {int(r): i for i, r in enumerate(sol.rows())}
        missing = [int(s) for s in shared if int(s) not in pos]
        if missing:
            raise InputError(f"Shared items {missing[:5]} are missing from a solution")
        return np.array([pos[int(s)] for s in shared])

    Za = np.asarray(sol_a.Z)[locate(sol_a)]
    Zb = np.asarray(sol_b.Z)[locate(sol_b)]
    Na = pairwise_distances(Za) <= radius
    Nb = pairwise_distances(Zb) <= radius
    inter = np.sum(Na & Nb, axis=1)
    union = np.sum(Na | Nb, axis=1)
    return float(1.0 - np.mean(inter / union))


def coverage_threshold(data: Dataset, hyper: Hyperparameters, quantile: float = 0.3) -> float:
    """The `quantile` of the per-item losses of a single global model."""
    b = fit_global_model(hyper.family, data, hyper.ridge, hyper.regularise_intercept)
    losses = loss_matrix(hyper.family, b[None, :], data.X, data.Y)[0]
    return float(np.quantile(losses, quantile))


def nearest_neighbours(Z: np.ndarray, k: int, include_self: bool = False) -> np.ndarray:
    """Indices of the k nearest rows of Z for every row; distance ties go to the lower index."""
    D = pairwise_distances(np.asarray(Z, dtype=np.float64))
    if not include_self:
        np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def explanation_quality(
    sol: Solution,
    data: Dataset,
    k_fraction: float = 0.1,
    coverage_quantile: float = 0.3,
    l0: Optional[float] = None,
    include_self: bool = False,
) -> QualityScores:
    """
    Local loss (each model on its own item), k-NN local loss (each model on its embedding
    neighbours) and k-NN coverage (share of neighbours with loss strictly below l0), with
    k = floor(k_fraction * n). l0 defaults to the `coverage_quantile` of a global model's
    losses. The un-localised coverage over all items is reported as `global_coverage`.
    """
    n = data.n
    if sol.n != n:
        raise InputError(f"Solution has {sol.n} rows but the dataset has {n}")
    k = int(math.floor(k_fraction * n))
    if k < 1 or k > (n if include_self else n - 1):
        raise InputError(f"k = floor({k_fraction} * {n}) = {k} is not a usable neighbour count")
    if l0 is None:
        l0 = coverage_threshold(data, sol.hyper, coverage_quantile)

    L = loss_matrix(sol.hyper.family, sol.B, data.X, data.Y)
    nn = nearest_neighbours(sol.Z, k, include_self)
    nn_losses = np.take_along_axis(L, nn, axis=1)
    return QualityScores(
        local_loss=float(np.mean(np.diagonal(L))),
        nn_local_loss=float(np.mean(nn_losses.mean(axis=1))),
        nn_coverage=float(np.mean(np.mean(nn_losses < l0, axis=1))),
        global_coverage=float(np.mean(L < l0)),
        k=k,
        l0=float(l0),
    )


def quality_report(sol: Solution, data: Dataset, **kwargs) -> MetricReport:
    q = explanation_quality(sol, data, **kwargs)
    return MetricReport(
        local_loss=q.local_loss,
        nn_local_loss=q.nn_local_loss,
        nn_coverage=q.nn_coverage,
        global_coverage=q.global_coverage,
        context={"n": data.n, "k": q.k, "l0": q.l0, "source": sol.source},
    )


@dataclass
class _Repetition:
    size: int
    repetition: int
    seed: int


def _check_sizes(data: Dataset, sizes: Sequence[int]) -> None:
    if not sizes:
        raise InputError("No sample sizes given")
    for s in sizes:
        # The neighbourhood pair needs size + size/2 distinct rows
        if s < 2 or s + (s - s // 2) > data.n:
            raise InputError(
                f"Sample size {s} is infeasible for {data.n} rows "
                "(need 2 <= size and 1.5 * size <= n)"
            )


def _run_repetition(data: Dataset, hyper: Hyperparameters, rep: _Repetition) -> List[Dict]:
    s_sample, s_other, s_overlap, s_perm, s_perm2, s_fit = derive_seeds(rep.seed, 6)
    hyper = replace(hyper, seed=s_fit)
    a, _ = resample(data, rep.size, seed=s_sample)
    b, _ = resample(data, rep.size, seed=s_other)
    c, shared = resample(data, rep.size, overlap=a, shared_fraction=0.5, seed=s_overlap)

    sol_a = fit(a, hyper)
    sol_a_perm = fit(permute_targets(a, s_perm), hyper)
    sol_a_perm2 = fit(permute_targets(a, s_perm2), hyper)
    sol_b = fit(b, hyper)
    sol_b_perm = fit(permute_targets(b, s_perm), hyper)
    sol_c = fit(c, hyper)
    sol_c_perm = fit(permute_targets(c, s_perm), hyper)

    values = {
        PERMUTATION: (sol_a.loss / sol_a_perm.loss, sol_a_perm2.loss / sol_a_perm.loss),
        MODEL_STABILITY: (
            local_model_stability(sol_a, sol_b),
            local_model_stability(sol_a, sol_b_perm),
        ),
        NEIGHBOURHOOD_STABILITY: (
            neighbourhood_stability(sol_a, sol_c, shared),
            neighbourhood_stability(sol_a, sol_c_perm, shared),
        ),
    }
    return [
        {
            "size": rep.size,
            "repetition": rep.repetition,
            "metric": metric,
            "value": float(value),
            "baselineValue": float(baseline),
            "seed": rep.seed,
        }
        for metric, (value, baseline) in values.items()
    ]


def stability_experiment(
    data: Dataset,
    hyper: Hyperparameters,
    sizes: Sequence[int],
    repetitions: int = 10,
    master_seed: int = 0,
    threads: int = 1,
    out_path: Optional[str] = None,
    logger: Optional[JsonLinesLogger] = None,
) -> pd.DataFrame:
    """
    For every sample size and repetition: permutation loss of a fresh fit, local model
    stability between fits on two independent samples, and neighbourhood stability between
    fits on two samples sharing half their items. Every metric is paired with a baseline
    where the second fit sees permuted targets (for permutation loss: the ratio of two
    permuted fits). Repetition seeds derive from `master_seed` only, so the table does not
    depend on `threads`.
    """
    sizes = [int(s) for s in sizes]
    _check_sizes(data, sizes)
    if repetitions < 1:
        raise InputError("repetitions must be >= 1")
    seeds = derive_seeds(master_seed, len(sizes) * repetitions)
    reps = [
        _Repetition(size=s, repetition=r, seed=seeds[i * repetitions + r])
        for i, s in enumerate(sizes)
        for r in range(repetitions)
    ]
    rows: List[Dict] = []
    for block in parallel_map(lambda rep: _run_repetition(data, hyper, rep), reps, threads):
        rows.extend(block)
        if logger:
            for row in block:
                logger.metric(
                    name=row["metric"],
                    value=row["value"],
                    baseline=row["baselineValue"],
                    size=row["size"],
                    repetition=row["repetition"],
                )
    table = pd.DataFrame(rows, columns=EXPERIMENT_COLUMNS)
    if out_path:
        table.to_csv(out_path, index=False, float_format="%.17g")
    return table


def summarise_experiment(table: pd.DataFrame) -> pd.DataFrame:
    """Mean and std of value and baseline per (size, metric)."""
    grouped = table.groupby(["size", "metric"], sort=True)
    summary = grouped.agg(
        mean=("value", "mean"),
        std=("value", "std"),
        baseline_mean=("baselineValue", "mean"),
        baseline_std=("baselineValue", "std"),
        repetitions=("value", "size"),
    )
    return summary.reset_index()


QUALITY_METRICS = ["local_loss", "nn_local_loss", "nn_coverage"]
# nn_coverage is the only measure where larger is better
HIGHER_IS_BETTER = {"nn_coverage"}


def compare_embeddings(
    data: Dataset,
    hyper: Hyperparameters,
    externals: Optional[Dict[str, str]] = None,
    sample_size: Optional[int] = None,
    repetitions: int = 5,
    master_seed: int = 0,
    threads: int = 1,
    k_fraction: float = 0.1,
) -> pd.DataFrame:
    """
    Explanation quality of SLISEMAP, a PCA embedding and every external embedding file
    (label -> path, rows in the order of `data`), each with local models fitted on the same
    resample. One row per (method, repetition); l0 is shared within a repetition.
    """
    externals = dict(externals or {})
    size = data.n if sample_size is None else int(sample_size)
    if size < 2 or size > data.n:
        raise InputError(f"Sample size {size} is infeasible for {data.n} rows")
    if repetitions < 1:
        raise InputError("repetitions must be >= 1")
    # Fail on a bad file before any fitting starts
    for label, path in externals.items():
        load_external_embedding(path, data, hyper.radius, label)

    def run(job: Tuple[int, int]) -> List[Dict]:
        rep, seed = job
        s_sample, s_fit = derive_seeds(seed, 2)
        sample, _ = resample(data, size, seed=s_sample)
        h = replace(hyper, seed=s_fit)
        l0 = coverage_threshold(sample, h)
        solutions = [fit(sample, h)]
        pca = rescale_embedding(pca_embed(sample, h.d), h.radius)
        solutions.append(fit_local_models_on_fixed_embedding(sample, pca, h))
        for label, path in externals.items():
            fixed = load_external_embedding(path, sample, h.radius, label, rows=sample.row_index())
            solutions.append(fit_local_models_on_fixed_embedding(sample, fixed, h))
        rows = []
        for sol in solutions:
            q = explanation_quality(sol, sample, k_fraction=k_fraction, l0=l0)
            rows.append(
                {
                    "method": sol.source,
                    "repetition": rep,
                    "local_loss": q.local_loss,
                    "nn_local_loss": q.nn_local_loss,
                    "nn_coverage": q.nn_coverage,
                    "seed": seed,
                }
            )
        return rows

    jobs = list(enumerate(derive_seeds(master_seed, repetitions)))
    rows: List[Dict] = []
    for block in parallel_map(run, jobs, threads):
        rows.extend(block)
    return pd.DataFrame(rows, columns=["method", "repetition", *QUALITY_METRICS, "seed"])


def comparison_table(scores: pd.DataFrame) -> pd.DataFrame:
    """Mean and std per method and metric, with a `best_<metric>` flag on the winning method."""
    methods = list(dict.fromkeys(scores["method"]))
    grouped = scores.groupby("method", sort=False)
    table = pd.DataFrame({"method": methods})
    for metric in QUALITY_METRICS:
        mean = grouped[metric].mean().reindex(methods).to_numpy()
        std = grouped[metric].std(ddof=1).reindex(methods).fillna(0.0).to_numpy()
        best = mean.max() if metric in HIGHER_IS_BETTER else mean.min()
        table[f"{metric}_mean"] = mean
        table[f"{metric}_std"] = std
        table[f"best_{metric}"] = mean == best
    return table
