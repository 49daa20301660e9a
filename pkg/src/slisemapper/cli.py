from __future__ import annotations

import argparse
import os
import sys
import warnings
from dataclasses import replace
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

from .clustering import (
    bin_embedding_medians,
    cluster_target_stats,
    inertia_curve,
    kmeans_on_coefficients,
)
from .data import coefficients_in_original_units, load_csv, normalise, raw_targets
from .engine import dataset_checksum, fit
from .errors import InputError, ProvenanceError, SlisemapError
from .evaluation import (
    MODEL_STABILITY,
    NEIGHBOURHOOD_STABILITY,
    PERMUTATION,
    compare_embeddings,
    comparison_table,
    permutation_loss,
    quality_report,
    stability_experiment,
    summarise_experiment,
)
from .logging_utils import JsonLinesLogger, _plain
from .plotting import plot_binned_medians, plot_cluster_coefficients, plot_embedding
from .storage import (
    cluster_table,
    load_cluster_summary,
    load_solution,
    provenance_path,
    save_cluster_summary,
    save_metric_report,
    save_normalisation,
    save_provenance,
    save_solution,
    write_matrix_csv,
)
from .synth import make_regimes, write_regimes_csv
from .types import (
    CLASSIFICATION,
    FAMILIES,
    ClusterSummary,
    Dataset,
    Hyperparameters,
    LbfgsSettings,
    MetricReport,
    Solution,
)
from .utils import default_threads, derive_seeds, env, file_checksum, load_dotenv

PLOT_KINDS = ("all", "embedding", "coefficients", "medians")


class _Parser(argparse.ArgumentParser):
    """Usage errors become InputError (exit 1) instead of argparse's exit 2."""

    def error(self, message: str):  # type: ignore[override]
        raise InputError(f"{self.prog}: {message}")


def _add_data_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--data", required=required, default=None, help="Input CSV with a header")
    p.add_argument("--target", required=required, default=None, help="Name of the target column")
    p.add_argument("--delimiter", default=env("DELIMITER", ","), help="CSV delimiter")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=int(env("D", "2")), help="Embedding dimension")
    p.add_argument(
        "--radius",
        type=float,
        default=float(env("RADIUS", "3.5")),
        help="Embedding radius (env: SLISEMAP_RADIUS)",
    )
    p.add_argument("--lasso", type=float, default=float(env("LASSO", "1e-4")))
    p.add_argument("--ridge", type=float, default=float(env("RIDGE", "1e-4")))
    p.add_argument("--family", choices=list(FAMILIES), default=env("FAMILY", "regression"))
    p.add_argument(
        "--squared-distance",
        action="store_true",
        help="Squared Euclidean distances in the softmax kernel",
    )
    p.add_argument(
        "--no-intercept-penalty",
        action="store_true",
        help="Leave the intercept out of the lasso/ridge penalties",
    )
    p.add_argument(
        "--escape-rounds",
        type=int,
        default=int(env("ESCAPE_ROUNDS", "2")),
        help="Greedy relocation passes after the first optimisation",
    )
    p.add_argument(
        "--escape-candidates", type=int, default=int(env("ESCAPE_CANDIDATES", "2000"))
    )
    p.add_argument(
        "--max-iter", type=int, default=int(env("MAX_ITER", "500")), help="L-BFGS iterations"
    )
    p.add_argument(
        "--ftol",
        type=float,
        default=float(env("FTOL", "1e-6")),
        help="Stop once the relative loss decrease over 5 iterations is below this (0: off)",
    )
    p.add_argument(
        "--init-jitter",
        type=float,
        default=float(env("INIT_JITTER", "0.1")),
        help="Seeded noise on the PCA start, as a fraction of the radius",
    )


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=int(env("SEED", "42")))
    p.add_argument(
        "--threads",
        type=int,
        default=int(env("THREADS", str(default_threads()))),
        help="Worker threads for repetitions and restarts (results do not depend on it)",
    )
    p.add_argument(
        "--log-json",
        default=env("LOG_JSON", "") or None,
        help="Write newline-delimited JSON events to file (env: SLISEMAP_LOG_JSON)",
    )
    p.add_argument("--verbose", action="store_true")
    p.add_argument(
        "--progress-interval",
        type=int,
        default=int(env("PROGRESS_INTERVAL", "50")),
        help="Print progress every N L-BFGS iterations when --verbose",
    )


def _add_cluster_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=int(env("K", "3")), help="Number of clusters")
    p.add_argument("--restarts", type=int, default=int(env("RESTARTS", "10")))
    p.add_argument(
        "--raw-units",
        action="store_true",
        help="Report cluster coefficients for raw (unnormalised) feature values",
    )


def _add_plot_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=list(PLOT_KINDS), default="all")
    p.add_argument("--grid-size", type=int, default=int(env("GRID_SIZE", "10")))
    p.add_argument("--vmin", type=float, default=None, help="Colour scale lower bound")
    p.add_argument("--vmax", type=float, default=None, help="Colour scale upper bound")
    p.add_argument("--width", type=float, default=float(env("PLOT_WIDTH", "6")))
    p.add_argument("--height", type=float, default=float(env("PLOT_HEIGHT", "5")))


def _add_evaluate_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--quality", action="store_true", help="Local loss, NN loss and coverage")
    p.add_argument("--k-fraction", type=float, default=0.1, help="k = floor(fraction * n)")
    p.add_argument("--permutation", action="store_true", help="Permutation loss of refits")
    p.add_argument("--permutation-seeds", type=int, default=5)
    p.add_argument(
        "--stability",
        default=None,
        help="Comma-separated sample sizes for the resampling experiment, e.g. 100,200,400",
    )
    p.add_argument("--repetitions", type=int, default=int(env("REPETITIONS", "10")))
    p.add_argument("--stability-out", default=None, help="CSV for the per-repetition table")


def parse_args(argv: List[str]) -> argparse.Namespace:
    p = _Parser(prog="slisemapper", description="SLISEMAP embeddings with local explanations")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("fit", help="Fit embedding and local models")
    _add_data_args(sp)
    _add_model_args(sp)
    _add_run_args(sp)
    sp.add_argument("--out", default="solution.json", help="Solution JSON path")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("evaluate", help="Metrics for a fitted solution")
    _add_data_args(sp)
    _add_run_args(sp)
    _add_evaluate_args(sp)
    sp.add_argument("--solution", required=True)
    sp.add_argument("--out", default="metrics.json", help="Metric report JSON path")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("compare", help="SLISEMAP against PCA and external embeddings")
    _add_data_args(sp)
    _add_model_args(sp)
    _add_run_args(sp)
    sp.add_argument(
        "--external",
        action="append",
        default=[],
        metavar="LABEL=PATH",
        help="Header-less CSV of coordinates in dataset order (repeatable)",
    )
    sp.add_argument("--sample-size", type=int, default=None)
    sp.add_argument("--repetitions", type=int, default=int(env("REPETITIONS", "5")))
    sp.add_argument("--k-fraction", type=float, default=0.1)
    sp.add_argument("--out", default="comparison.csv")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("cluster", help="k-means over the local models")
    _add_data_args(sp, required=False)
    _add_run_args(sp)
    _add_cluster_args(sp)
    sp.add_argument("--solution", required=True)
    sp.add_argument("--out", default="clusters.json")
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("plot", help="SVG figures for a solution")
    _add_data_args(sp, required=False)
    _add_run_args(sp)
    _add_plot_args(sp)
    sp.add_argument("--solution", required=True)
    sp.add_argument("--clusters", default=None, help="Cluster summary JSON")
    sp.add_argument("--out-dir", default="plots")
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("synth", help="Write a synthetic piecewise-linear dataset")
    sp.add_argument("--n", type=int, default=400)
    sp.add_argument("--m", type=int, default=5)
    sp.add_argument("--regimes", type=int, default=3)
    sp.add_argument("--noise", type=float, default=0.1)
    sp.add_argument("--offset", type=float, default=0.0, help="Target shift per regime index")
    sp.add_argument("--classification", action="store_true")
    sp.add_argument("--seed", type=int, default=int(env("SEED", "42")))
    sp.add_argument("--log-json", default=env("LOG_JSON", "") or None)
    sp.add_argument("--verbose", action="store_true")
    sp.add_argument("--out", default="synthetic.csv")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("pipeline", help="fit, cluster, plot and evaluate in one go")
    _add_data_args(sp)
    _add_model_args(sp)
    _add_run_args(sp)
    _add_cluster_args(sp)
    _add_plot_args(sp)
    _add_evaluate_args(sp)
    sp.add_argument("--out-dir", default="out")
    sp.set_defaults(func=cmd_pipeline)

    return p.parse_args(argv)


def _default_log_path(command: str) -> str:
    ts = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return os.path.join("logs", f"{command}-{ts}.ndjson")


def _config(ns: argparse.Namespace) -> Dict[str, Any]:
    """The run configuration as stored in every artifact."""
    cfg = {k: v for k, v in vars(ns).items() if k != "func"}
    if getattr(ns, "data", None) and os.path.isfile(ns.data):
        cfg["input_checksum"] = file_checksum(ns.data)
    return _plain(cfg)


def _hyper(ns: argparse.Namespace) -> Hyperparameters:
    try:
        return Hyperparameters(
            d=ns.d,
            radius=ns.radius,
            lasso=ns.lasso,
            ridge=ns.ridge,
            family=ns.family,
            squared_distance=ns.squared_distance,
            regularise_intercept=not ns.no_intercept_penalty,
            escape_rounds=ns.escape_rounds,
            escape_candidates=ns.escape_candidates,
            seed=ns.seed,
            init_jitter=ns.init_jitter,
            lbfgs=LbfgsSettings(max_iter=ns.max_iter, ftol=ns.ftol),
        )
    except ValueError as e:
        raise InputError(str(e)) from e


def _load_data(ns: argparse.Namespace, classification: bool) -> Dataset:
    if not ns.data or not ns.target:
        raise InputError("--data and --target are required here")
    raw = load_csv(ns.data, [ns.target], ns.delimiter, classification=classification)
    return normalise(raw)


def _checked_data(ns: argparse.Namespace, sol: Solution) -> Dataset:
    """Load the dataset a solution was fitted on and verify it is the same one."""
    data = _load_data(ns, sol.hyper.family == CLASSIFICATION)
    found = dataset_checksum(data)
    if sol.dataset_checksum and found != sol.dataset_checksum:
        raise ProvenanceError(
            f"{ns.data} does not match the dataset of {ns.solution} "
            f"(checksum {found[:12]} != {sol.dataset_checksum[:12]})"
        )
    if sol.n != data.n:
        raise ProvenanceError(f"Solution has {sol.n} rows, {ns.data} has {data.n}")
    return data


def _progress(ns: argparse.Namespace):
    if not ns.verbose:
        return None
    interval = max(1, int(ns.progress_interval))

    def report(it: int, loss: float, gnorm: float) -> None:
        if it % interval == 0:
            print(f"[iter {it}] loss={loss:.6g} grad={gnorm:.3g}", flush=True)

    return report


def _sizes(text: str) -> List[int]:
    try:
        return [int(s) for s in text.replace("sizes=", "").split(",") if s.strip()]
    except ValueError as e:
        raise InputError(f"--stability expects comma-separated integers, got {text!r}") from e


def _stem(path: str) -> str:
    return os.path.splitext(path)[0]


# Subcommands --------------------------------------------------------------------------------


def _fit(
    ns: argparse.Namespace, logger: JsonLinesLogger, out: str
) -> Tuple[Dataset, Solution]:
    hyper = _hyper(ns)
    data = _load_data(ns, hyper.family == CLASSIFICATION)
    cfg = _config(ns)
    logger.start(
        command=ns.command,
        dataset_checksum=dataset_checksum(data),
        hyperparameters=hyper.to_dict(),
        config=cfg,
    )
    if ns.verbose:
        print(f"Fit start: n={data.n} m={data.m} family={hyper.family} d={hyper.d}", flush=True)
    sol = fit(data, hyper, logger=logger, callback=_progress(ns))
    stem = _stem(out)
    files = {
        "solution": save_solution(sol, out, cfg),
        "Z": write_matrix_csv(f"{stem}.Z.csv", sol.Z),
        "B": write_matrix_csv(f"{stem}.B.csv", sol.B, sol.coefficient_names),
        "normalisation": save_normalisation(data, f"{stem}.normalisation.json"),
    }
    save_provenance(sol, provenance_path(stem), files, cfg)
    diag = sol.diagnostics
    print(
        f"Loss {sol.loss:.6g} after {diag.iterations} iterations "
        f"({diag.escape_rounds} escape rounds, converged={diag.converged})"
    )
    return data, sol


def cmd_fit(ns: argparse.Namespace, logger: JsonLinesLogger) -> int:
    _, sol = _fit(ns, logger, ns.out)
    logger.completed(command=ns.command, outputs={"solution": ns.out}, loss=sol.loss)
    return 0


def _evaluate(
    ns: argparse.Namespace,
    logger: JsonLinesLogger,
    data: Dataset,
    sol: Solution,
    out: str,
    stability_out: str,
) -> Dict[str, str]:
    cfg = _config(ns)
    hyper = sol.hyper
    report = MetricReport(context={"n": data.n, "source": sol.source})
    outputs = {"report": out}
    if ns.quality or not (ns.permutation or ns.stability):
        q = quality_report(sol, data, k_fraction=ns.k_fraction)
        report.local_loss = q.local_loss
        report.nn_local_loss = q.nn_local_loss
        report.nn_coverage = q.nn_coverage
        report.global_coverage = q.global_coverage
        report.context.update(q.context)
    if ns.permutation:
        seeds = derive_seeds(ns.seed, ns.permutation_seeds)
        report.permutation_loss = permutation_loss(data, hyper, seeds, ns.threads)
        report.context["permutation_seeds"] = seeds
    if ns.stability:
        table = stability_experiment(
            data,
            hyper,
            _sizes(ns.stability),
            repetitions=ns.repetitions,
            master_seed=ns.seed,
            threads=ns.threads,
            out_path=stability_out,
            logger=logger,
        )
        outputs["stability"] = stability_out
        summary = summarise_experiment(table)
        largest = summary[summary["size"] == summary["size"].max()].set_index("metric")
        report.context["stability_size"] = int(summary["size"].max())
        if report.permutation_loss is None:
            report.permutation_loss = float(largest.loc[PERMUTATION, "mean"])
        report.local_model_stability = float(largest.loc[MODEL_STABILITY, "mean"])
        report.neighbourhood_stability = float(largest.loc[NEIGHBOURHOOD_STABILITY, "mean"])
        report.context["stability_summary"] = summary.to_dict(orient="records")
    for name, value in report.metrics().items():
        if value is not None:
            logger.metric(name=name, value=value)
            print(f"{name}: {value:.6g}")
    save_metric_report(report, out, cfg)
    return outputs


def cmd_evaluate(ns: argparse.Namespace, logger: JsonLinesLogger) -> int:
    sol = load_solution(ns.solution)
    data = _checked_data(ns, sol)
    logger.start(
        command=ns.command,
        dataset_checksum=sol.dataset_checksum,
        hyperparameters=sol.hyper.to_dict(),
        config=_config(ns),
    )
    stability_out = ns.stability_out or f"{_stem(ns.out)}.stability.csv"
    outputs = _evaluate(ns, logger, data, sol, ns.out, stability_out)
    logger.completed(command=ns.command, outputs=outputs)
    return 0


def _externals(items: List[str]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in items:
        label, sep, path = item.partition("=")
        if not sep or not label or not path:
            raise InputError(f"--external expects LABEL=PATH, got {item!r}")
        out[label] = path
    return out


def cmd_compare(ns: argparse.Namespace, logger: JsonLinesLogger) -> int:
    hyper = _hyper(ns)
    data = _load_data(ns, hyper.family == CLASSIFICATION)
    externals = _externals(ns.external)
    logger.start(
        command=ns.command,
        dataset_checksum=dataset_checksum(data),
        hyperparameters=hyper.to_dict(),
        config=_config(ns),
    )
    scores = compare_embeddings(
        data,
        hyper,
        externals,
        sample_size=ns.sample_size,
        repetitions=ns.repetitions,
        master_seed=ns.seed,
        threads=ns.threads,
        k_fraction=ns.k_fraction,
    )
    table = comparison_table(scores)
    os.makedirs(os.path.dirname(ns.out) or ".", exist_ok=True)
    table.to_csv(ns.out, index=False, float_format="%.17g")
    scores.to_csv(f"{_stem(ns.out)}.repetitions.csv", index=False, float_format="%.17g")
    for row in table.itertuples(index=False):
        print(
            f"{row.method:>16}  local={row.local_loss_mean:.4g}  "
            f"nn_local={row.nn_local_loss_mean:.4g}  nn_coverage={row.nn_coverage_mean:.4g}"
        )
        logger.metric(name="nn_coverage", value=row.nn_coverage_mean, method=row.method)
    logger.completed(command=ns.command, outputs={"comparison": ns.out})
    return 0


def _cluster(
    ns: argparse.Namespace,
    sol: Solution,
    data: Optional[Dataset],
    out: str,
) -> ClusterSummary:
    if ns.k < 1:
        raise InputError(f"--k must be >= 1, got {ns.k}")
    summary = kmeans_on_coefficients(sol.B, ns.k, ns.seed, ns.restarts, threads=ns.threads)
    if data is not None:
        summary = cluster_target_stats(summary, data)
    names = sol.coefficient_names or [f"b{j + 1}" for j in range(sol.B.shape[1])]
    coefficients = summary.mean_coefficients
    if ns.raw_units:
        if data is None:
            raise InputError("--raw-units needs --data and --target")
        coefficients = coefficients_in_original_units(coefficients, data)
    table = cluster_table(replace(summary, mean_coefficients=coefficients), names)
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    table.to_csv(f"{_stem(out)}.csv", index=False, float_format="%.17g")
    save_cluster_summary(
        summary, out, _config(ns), extra={"solution_checksum": sol.dataset_checksum}
    )

    print("Inertia (elbow guidance):")
    ks = range(ns.k - 2, ns.k + 3)
    for k, inertia in inertia_curve(sol.B, ks, ns.seed, ns.restarts, ns.threads):
        mark = " <-" if k == ns.k else ""
        print(f"  k={k}: {inertia:.6g}{mark}")
    return summary


def cmd_cluster(ns: argparse.Namespace, logger: JsonLinesLogger) -> int:
    sol = load_solution(ns.solution)
    data = _checked_data(ns, sol) if ns.data else None
    logger.start(command=ns.command, dataset_checksum=sol.dataset_checksum, config=_config(ns))
    summary = _cluster(ns, sol, data, ns.out)
    logger.metric(name="inertia", value=summary.inertia, k=summary.k)
    logger.completed(command=ns.command, outputs={"clusters": ns.out})
    return 0


def _plot(
    ns: argparse.Namespace,
    sol: Solution,
    summary: Optional[ClusterSummary],
    data: Optional[Dataset],
    out_dir: str,
) -> Dict[str, str]:
    cfg = _config(ns)
    provenance = {"config": cfg, "dataset_checksum": sol.dataset_checksum}
    size = {"width": ns.width, "height": ns.height, "provenance": provenance}
    kinds = PLOT_KINDS[1:] if ns.kind == "all" else (ns.kind,)
    if summary is not None and (summary.k < 1 or len(summary.labels) == 0):
        summary = None
    if summary is not None and len(summary.labels) != sol.n:
        raise InputError(f"Cluster summary covers {len(summary.labels)} items, solution {sol.n}")
    outputs: Dict[str, str] = {}

    if "embedding" in kinds:
        labels = None if summary is None else summary.labels
        path = os.path.join(out_dir, "embedding.svg")
        outputs["embedding"] = plot_embedding(sol.Z, path, labels, **size)
    if "coefficients" in kinds:
        if summary is None:
            warnings.warn("No cluster summary: skipping the coefficient panel", stacklevel=2)
        else:
            path = os.path.join(out_dir, "coefficients.svg")
            names = sol.coefficient_names or [f"b{j + 1}" for j in range(sol.B.shape[1])]
            outputs["coefficients"] = plot_cluster_coefficients(summary, names, path, **size)
    if "medians" in kinds:
        if data is None:
            warnings.warn("No dataset given: skipping the binned target map", stacklevel=2)
        else:
            grid = bin_embedding_medians(sol.Z, raw_targets(data), ns.grid_size)
            path = os.path.join(out_dir, "medians.svg")
            outputs["medians"] = plot_binned_medians(
                grid,
                path,
                vmin=ns.vmin,
                vmax=ns.vmax,
                label=f"Median {data.target_names[0]}",
                **size,
            )
    for kind, path in outputs.items():
        print(f"Wrote {kind} plot: {path}")
    return outputs


def cmd_plot(ns: argparse.Namespace, logger: JsonLinesLogger) -> int:
    sol = load_solution(ns.solution)
    data = _checked_data(ns, sol) if ns.data else None
    summary = load_cluster_summary(ns.clusters) if ns.clusters else None
    logger.start(command=ns.command, dataset_checksum=sol.dataset_checksum, config=_config(ns))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        outputs = _plot(ns, sol, summary, data, ns.out_dir)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
        logger.metric(name="warning", value=None, message=str(w.message))
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    logger.completed(command=ns.command, outputs=outputs)
    return 0


def cmd_synth(ns: argparse.Namespace, logger: JsonLinesLogger) -> int:
    try:
        data, labels, _ = make_regimes(
            n=ns.n,
            m=ns.m,
            regimes=ns.regimes,
            noise=ns.noise,
            classification=ns.classification,
            offset=ns.offset,
            seed=ns.seed,
        )
    except ValueError as e:
        raise InputError(str(e)) from e
    logger.start(command=ns.command, config=_config(ns))
    path, labels_path = write_regimes_csv(data, labels, ns.out)
    print(f"Wrote {data.n} rows to {path} (regimes in {labels_path})")
    logger.completed(command=ns.command, outputs={"data": path, "regimes": labels_path})
    return 0


def cmd_pipeline(ns: argparse.Namespace, logger: JsonLinesLogger) -> int:
    out = ns.out_dir
    outputs = {"solution": os.path.join(out, "solution.json")}
    data, sol = _fit(ns, logger, outputs["solution"])
    outputs["clusters"] = os.path.join(out, "clusters.json")
    summary = _cluster(ns, sol, data, outputs["clusters"])
    outputs.update(_plot(ns, sol, summary, data, os.path.join(out, "plots")))
    outputs.update(
        _evaluate(
            ns,
            logger,
            data,
            sol,
            os.path.join(out, "metrics.json"),
            ns.stability_out or os.path.join(out, "stability.csv"),
        )
    )
    logger.completed(command=ns.command, outputs=outputs, loss=sol.loss)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    argv = sys.argv[1:] if argv is None else argv
    try:
        ns = parse_args(argv)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    logger = JsonLinesLogger(ns.log_json or _default_log_path(ns.command))
    try:
        return int(ns.func(ns, logger))
    except SlisemapError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.failed(command=ns.command, reason=str(e), exit_code=e.exit_code)
        return e.exit_code
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.failed(command=ns.command, reason=str(e), exit_code=1)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
