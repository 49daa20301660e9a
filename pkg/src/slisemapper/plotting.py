"""Static SVG figures: clustered embedding, per-cluster coefficients, binned target map."""

from __future__ import annotations

import json
import os
from typing import Any, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")  # Must be before pyplot import
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .types import CellGrid, ClusterSummary  # noqa: E402

# Fixed ids and no timestamps, so the same input yields the same file
plt.rcParams["svg.hashsalt"] = "slisemapper"
plt.rcParams["svg.fonttype"] = "path"


def _save(fig, path: str, provenance: Optional[Dict[str, Any]]) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    metadata: Dict[str, Any] = {"Date": None, "Creator": "slisemapper"}
    if provenance:
        metadata["Description"] = json.dumps(provenance, sort_keys=True, default=str)
    fig.savefig(path, format="svg", metadata=metadata)
    plt.close(fig)
    return path


def _figure(width: float, height: float):
    fig, ax = plt.subplots(figsize=(width, height))
    ax.grid(True, linestyle="--", alpha=0.3)
    ax.set_axisbelow(True)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    return fig, ax


def _xy(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1 or Z.shape[1] == 1:
        return np.column_stack([Z.reshape(-1), np.zeros(Z.shape[0])])
    return Z[:, :2]


def plot_embedding(
    Z: np.ndarray,
    path: str,
    labels: Optional[np.ndarray] = None,
    width: float = 6.0,
    height: float = 5.0,
    provenance: Optional[Dict[str, Any]] = None,
) -> str:
    """Scatter of the embedding, one colour per cluster when labels are given."""
    xy = _xy(Z)
    fig, ax = _figure(width, height)
    if labels is None:
        ax.scatter(xy[:, 0], xy[:, 1], s=12, c="tab:gray", lw=0)
    else:
        labels = np.asarray(labels)
        cmap = plt.get_cmap("tab10")
        for c in np.unique(labels):
            members = labels == c
            ax.scatter(
                xy[members, 0],
                xy[members, 1],
                s=12,
                color=cmap(int(c) % 10),
                lw=0,
                label=f"Cluster {int(c) + 1}",
            )
        ax.legend(frameon=True, fontsize=8, loc="upper right")
    ax.set_xlabel("SLISEMAP 1")
    ax.set_ylabel("SLISEMAP 2")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    return _save(fig, path, provenance)


def plot_cluster_coefficients(
    summary: ClusterSummary,
    coefficient_names: Sequence[str],
    path: str,
    width: float = 6.0,
    height: float = 5.0,
    provenance: Optional[Dict[str, Any]] = None,
) -> str:
    """Horizontal bars of each cluster's mean coefficients, one panel per cluster."""
    k = summary.k
    fig, axes = plt.subplots(1, k, figsize=(width, height), sharey=True, squeeze=False)
    cmap = plt.get_cmap("tab10")
    ypos = np.arange(len(coefficient_names))
    lim = float(np.max(np.abs(summary.mean_coefficients))) or 1.0
    for c, ax in enumerate(axes[0]):
        ax.barh(ypos, summary.mean_coefficients[c], color=cmap(c % 10))
        ax.axvline(0.0, color="black", lw=0.8)
        ax.set_xlim(-1.1 * lim, 1.1 * lim)
        ax.set_title(f"Cluster {c + 1}\n(n={summary.sizes[c]})", fontsize=9)
        ax.grid(True, axis="x", linestyle="--", alpha=0.3)
    axes[0][0].set_yticks(ypos)
    axes[0][0].set_yticklabels(list(coefficient_names), fontsize=8)
    axes[0][0].invert_yaxis()
    fig.supxlabel("Coefficient")
    fig.tight_layout()
    return _save(fig, path, provenance)


def plot_binned_medians(
    grid: CellGrid,
    path: str,
    vmin: Optional[float] = None,
    vmax: Optional[float] = None,
    label: str = "Median target",
    width: float = 6.0,
    height: float = 5.0,
    provenance: Optional[Dict[str, Any]] = None,
) -> str:
    """Heat map of binned medians; empty cells are left blank."""
    fig, ax = _figure(width, height)
    masked = np.ma.masked_invalid(grid.medians.T)
    mesh = ax.pcolormesh(grid.x_edges, grid.y_edges, masked, cmap="viridis", vmin=vmin, vmax=vmax)
    bar = fig.colorbar(mesh, ax=ax)
    bar.set_label(label)
    ax.set_xlabel("SLISEMAP 1")
    ax.set_ylabel("SLISEMAP 2")
    fig.tight_layout()
    return _save(fig, path, provenance)


def svg_text_labels(path: str) -> List[str]:
    """Every text string in an SVG written here (text is drawn as paths, with the string kept
    in a comment next to it)."""
    with open(path, "r", encoding="utf-8") as f:
        svg = f.read()
    return [line.split("<!-- ")[1].split(" -->")[0] for line in svg.splitlines() if "<!-- " in line]
