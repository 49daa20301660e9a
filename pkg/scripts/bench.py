#!/usr/bin/env python3
import argparse
import os
import sys
from typing import List


def parse_args(argv: List[str]):
    p = argparse.ArgumentParser(description="Bench compare + stability over several master seeds")
    p.add_argument("--seeds", default="0,1,2", help="Comma-separated master seeds")
    p.add_argument("--data", default=os.getenv("SLISEMAP_DATA"), help="CSV (default: synthetic)")
    p.add_argument("--target", default=os.getenv("SLISEMAP_TARGET", "y"))
    p.add_argument("--n", type=int, default=400, help="Synthetic rows when --data is not set")
    p.add_argument("--regimes", type=int, default=3)
    p.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--sizes", default="100,200", help="Stability sample sizes")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--threads", type=int, default=int(os.getenv("SLISEMAP_THREADS", "1")))
    p.add_argument("--verbose", action="store_true")
    p.add_argument(
        "--json-out", default=os.getenv("BENCH_JSON"), help="Write summary JSON to file"
    )
    return p.parse_args(argv)


def main(argv: List[str] | None = None) -> int:
    here = os.path.dirname(os.path.abspath(__file__))
    src = os.path.abspath(os.path.join(here, "..", "src"))
    if src not in sys.path:
        sys.path.insert(0, src)

    from slisemapper.data import load_csv, normalise
    from slisemapper.errors import SlisemapError
    from slisemapper.evaluation import (
        compare_embeddings,
        comparison_table,
        stability_experiment,
        summarise_experiment,
    )
    from slisemapper.synth import make_regimes
    from slisemapper.types import Hyperparameters
    from slisemapper.utils import load_dotenv

    load_dotenv()
    argv = argv or sys.argv[1:]
    ns = parse_args(argv)

    if ns.data:
        data = normalise(load_csv(ns.data, [ns.target]))
    else:
        data = normalise(make_regimes(n=ns.n, regimes=ns.regimes, seed=0)[0])
    seeds = [int(s.strip()) for s in ns.seeds.split(",") if s.strip()]
    sizes = [int(s.strip()) for s in ns.sizes.split(",") if s.strip()]
    print(f"Bench start: seeds={seeds} n={data.n} sizes={sizes} reps={ns.repetitions}")

    results = {}
    for seed in seeds:
        hyper = Hyperparameters(seed=seed)
        try:
            scores = compare_embeddings(
                data,
                hyper,
                sample_size=ns.sample_size,
                repetitions=ns.repetitions,
                master_seed=seed,
                threads=ns.threads,
            )
            table = comparison_table(scores)
            stability = summarise_experiment(
                stability_experiment(
                    data, hyper, sizes, ns.repetitions, master_seed=seed, threads=ns.threads
                )
            )
            results[seed] = {
                "compare": table.to_dict(orient="records"),
                "stability": stability.to_dict(orient="records"),
            }
            slise = table[table["method"] == "slisemap"].iloc[0]
            print(
                f"Seed {seed}: slisemap nn_coverage={slise['nn_coverage_mean']:.4f} "
                f"local_loss={slise['local_loss_mean']:.4g}"
            )
            if ns.verbose:
                print(stability.to_string(index=False))
        except SlisemapError as e:
            print(f"Seed {seed} failed: {e}")
            results[seed] = {"error": str(e)}

    # Default JSON output name if not provided
    if not ns.json_out:
        from datetime import datetime, timezone

        ts = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        ns.json_out = f"bench-{ts}.json"

    import json

    from slisemapper.logging_utils import _plain

    out = {str(k): v for k, v in results.items()}
    with open(ns.json_out, "w", encoding="utf-8") as f:
        json.dump(_plain(out), f, indent=2, sort_keys=True)
    print(f"Summary written to {ns.json_out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
