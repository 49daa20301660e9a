from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .utils import validate_param

REGRESSION = "regression"
CLASSIFICATION = "classification"
FAMILIES = (REGRESSION, CLASSIFICATION)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Normalisation:
    """Per-column mean and population std; `y_*` is identity when targets were left raw."""

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray

    def to_dict(self, feature_names: List[str], target_names: List[str]) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for name, mu, sd in zip(feature_names, self.x_mean, self.x_std):
            out[name] = {"mean": float(mu), "std": float(sd)}
        for name, mu, sd in zip(target_names, self.y_mean, self.y_std):
            out[name] = {"mean": float(mu), "std": float(sd)}
        return out


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    feature_names: List[str]
    target_names: List[str]
    classification: bool = False
    normalisation: Optional[Normalisation] = None
    # Row ids in the dataset this one was resampled from (None: rows are the originals).
    source_index: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        X = _frozen(self.X)
        Y = _frozen(self.Y)
        if Y.ndim == 1:
            Y = _frozen(Y[:, None])
        if X.ndim != 2:
            raise ValueError(f"X must be a matrix, got shape {X.shape}")
        n, m = X.shape
        if n < 2:
            raise ValueError(f"A dataset needs at least 2 rows, got {n}")
        if m < 1:
            raise ValueError("A dataset needs at least one feature column")
        if Y.shape != (n, 1):
            raise ValueError(f"Y must have shape ({n}, 1), got {Y.shape}")
        if len(self.feature_names) != m or len(self.target_names) != 1:
            raise ValueError("Column names do not match the data shape")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("Dataset contains non-finite values")
        if self.classification and (np.any(Y < 0.0) or np.any(Y > 1.0)):
            raise ValueError("Classification targets must be probabilities in [0, 1]")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "feature_names", list(self.feature_names))
        object.__setattr__(self, "target_names", list(self.target_names))
        if self.source_index is not None:
            idx = np.array(self.source_index, dtype=np.int64)
            idx.setflags(write=False)
            object.__setattr__(self, "source_index", idx)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def m(self) -> int:
        return int(self.X.shape[1])

    @property
    def family(self) -> str:
        return CLASSIFICATION if self.classification else REGRESSION

    def row_index(self) -> np.ndarray:
        if self.source_index is None:
            return np.arange(self.n)
        return np.asarray(self.source_index)


@dataclass(frozen=True)
class LbfgsSettings:
    max_iter: int = 500
    gtol: float = 1e-4
    history: int = 10
    c1: float = 1e-4
    max_backtracks: int = 40
    # Stall test: stop once the loss fell by at most ftol * max(1, |loss|) over `stall_window`
    # iterations. 0 disables it.
    ftol: float = 1e-6
    stall_window: int = 5

    def __post_init__(self) -> None:
        validate_param("max_iter", self.max_iter, min_val=0)
        validate_param("gtol", self.gtol, min_val=0.0, min_exclusive=True)
        validate_param("history", self.history, min_val=1)
        validate_param("c1", self.c1, min_val=0.0, max_val=1.0, min_exclusive=True)
        validate_param("max_backtracks", self.max_backtracks, min_val=1)
        validate_param("ftol", self.ftol, min_val=0.0)
        validate_param("stall_window", self.stall_window, min_val=1)


@dataclass(frozen=True)
class Hyperparameters:
    """
    SLISEMAP hyperparameters.

    - d, radius: embedding dimension and the radius fixed by the mean-square-norm constraint.
    - lasso, ridge: L1/L2 penalties on every coefficient (intercept too unless
      regularise_intercept is False).
    - squared_distance: use squared Euclidean distances in the softmax kernel instead of
      plain ones.
    - escape_rounds: greedy relocation passes after the first quasi-Newton phase.
    - escape_candidates: cap on candidate positions per relocation pass.
    - init_jitter: seeded Gaussian noise added to the PCA start, as a fraction of radius, so
      that fits with different seeds start (and end) in different places.
    """

    d: int = 2
    radius: float = 3.5
    lasso: float = 1e-4
    ridge: float = 1e-4
    family: str = REGRESSION
    squared_distance: bool = False
    regularise_intercept: bool = True
    escape_rounds: int = 2
    escape_candidates: int = 2000
    seed: int = 42
    init_jitter: float = 0.1
    lbfgs: LbfgsSettings = field(default_factory=LbfgsSettings)

    def __post_init__(self) -> None:
        validate_param("d", self.d, min_val=1)
        validate_param("radius", self.radius, min_val=0.0, min_exclusive=True)
        validate_param("lasso", self.lasso, min_val=0.0)
        validate_param("ridge", self.ridge, min_val=0.0)
        validate_param("escape_rounds", self.escape_rounds, min_val=0)
        validate_param("escape_candidates", self.escape_candidates, min_val=1)
        validate_param("init_jitter", self.init_jitter, min_val=0.0)
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "radius": self.radius,
            "lasso": self.lasso,
            "ridge": self.ridge,
            "family": self.family,
            "squared_distance": self.squared_distance,
            "regularise_intercept": self.regularise_intercept,
            "escape_rounds": self.escape_rounds,
            "escape_candidates": self.escape_candidates,
            "seed": self.seed,
            "init_jitter": self.init_jitter,
            "lbfgs": {
                "max_iter": self.lbfgs.max_iter,
                "gtol": self.lbfgs.gtol,
                "history": self.lbfgs.history,
                "c1": self.lbfgs.c1,
                "max_backtracks": self.lbfgs.max_backtracks,
                "ftol": self.lbfgs.ftol,
                "stall_window": self.lbfgs.stall_window,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Hyperparameters":
        values = dict(data)
        lb = values.pop("lbfgs", None) or {}
        return cls(lbfgs=LbfgsSettings(**lb), **values)


@dataclass
class FitDiagnostics:
    iterations: int = 0
    escape_rounds: int = 0
    gradient_norm: float = float("nan")
    converged: bool = False
    line_search_failed: bool = False
    # (phase, loss) after each optimisation phase, in order
    phases: List[Tuple[str, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "escape_rounds": self.escape_rounds,
            "gradient_norm": self.gradient_norm,
            "converged": self.converged,
            "line_search_failed": self.line_search_failed,
            "phases": [[p, loss] for p, loss in self.phases],
        }


@dataclass
class Solution:
    Z: np.ndarray
    B: np.ndarray
    loss: float
    hyper: Hyperparameters
    diagnostics: FitDiagnostics = field(default_factory=FitDiagnostics)
    source: str = "slisemap"
    dataset_checksum: str = ""
    coefficient_names: List[str] = field(default_factory=list)
    row_index: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.Z.shape[0])

    def rows(self) -> np.ndarray:
        if self.row_index is None:
            return np.arange(self.n)
        return np.asarray(self.row_index)


@dataclass(frozen=True)
class FixedEmbedding:
    Z: np.ndarray
    source: str
    radius_normalised: bool = False
    explained_variance_ratio: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        Z = np.array(self.Z, dtype=np.float64)
        if Z.ndim == 1:
            Z = Z[:, None]
        if not np.all(np.isfinite(Z)):
            raise ValueError(f"Embedding '{self.source}' contains non-finite values")
        Z.setflags(write=False)
        object.__setattr__(self, "Z", Z)


@dataclass
class QualityScores:
    local_loss: float
    nn_local_loss: float
    nn_coverage: float
    global_coverage: float
    k: int
    l0: float


@dataclass
class MetricReport:
    """Metrics for one solution (or a pair); None means "not computed"."""

    permutation_loss: Optional[float] = None
    local_model_stability: Optional[float] = None
    neighbourhood_stability: Optional[float] = None
    local_loss: Optional[float] = None
    nn_local_loss: Optional[float] = None
    nn_coverage: Optional[float] = None
    global_coverage: Optional[float] = None
    context: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.nn_coverage is not None:
            validate_param("nn_coverage", self.nn_coverage, min_val=0.0, max_val=1.0)

    def metrics(self) -> Dict[str, Optional[float]]:
        return {
            "permutation_loss": self.permutation_loss,
            "local_model_stability": self.local_model_stability,
            "neighbourhood_stability": self.neighbourhood_stability,
            "local_loss": self.local_loss,
            "nn_local_loss": self.nn_local_loss,
            "nn_coverage": self.nn_coverage,
            "global_coverage": self.global_coverage,
        }


@dataclass
class ClusterSummary:
    k: int
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    sizes: List[int]
    mean_coefficients: np.ndarray
    # Filled by clustering.cluster_target_stats
    median_target: Optional[List[float]] = None
    global_median: Optional[float] = None
    incidence: Optional[Dict[str, List[float]]] = None


@dataclass
class CellGrid:
    """Square binning of a 2-D embedding; empty cells hold NaN in `medians`."""

    x_edges: np.ndarray
    y_edges: np.ndarray
    medians: np.ndarray
    counts: np.ndarray

    @property
    def value_range(self) -> Tuple[float, float]:
        filled = self.medians[self.counts > 0]
        return float(np.min(filled)), float(np.max(filled))
