"""Success rate over the epsilon x minimum-path-width grid, as a heatmap.

    python3 scripts/width_sweep.py --trials 30 --out results/width
"""
import argparse
import json
import os
import time
from pathlib import Path

from bycoms.agent import NoiseConfig
from bycoms.experiments import (
    DEFAULT_GRID, SweepSpec, band_mean, collect_corpus, export_heatmap, records_json, run_sweep,
    trend_score, write_manifest,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", type=Path, default=Path("results/width"))
    args = ap.parse_args()

    spec = SweepSpec(epsilons=DEFAULT_GRID, width_bins=DEFAULT_GRID, trials_per_cell=args.trials,
                     master_seed=args.seed, noise=NoiseConfig(enabled=False))
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    corpus = collect_corpus(spec.width_bins, spec.trials_per_cell, spec.master_seed)
    print(f"corpus: {sum(map(len, corpus.values()))} terrains in {time.perf_counter() - t0:.0f} s")
    result = run_sweep(spec, args.workers, corpus)
    print(f"sweep: {len(result.records)} trials in {time.perf_counter() - t0:.0f} s")

    export_heatmap(result, args.out / "heatmap.csv", args.out / "heatmap.svg",
                   title="success rate by epsilon and minimum path width")
    write_manifest(result, args.out / "manifest.json", corpus)
    (args.out / "trials.json").write_text(json.dumps(records_json(result), indent=1) + "\n")

    print(f"trend score            {trend_score(result):.3f}")
    print(f"mean, width >= eps + 1 {band_mean(result, lo_gap=1.0):.3f}")
    print(f"mean, width <= eps - 1 {band_mean(result, hi_gap=-1.0):.3f}")
    print(f"written to {args.out}/")


if __name__ == "__main__":
    main()
