"""Paired sweeps with and without sensing noise on one terrain corpus.

    python3 scripts/noise_study.py --trials 30 --out results/noise
"""
import argparse
import os
from pathlib import Path

from bycoms.agent import NoiseConfig
from bycoms.experiments import (
    DEFAULT_GRID, SweepSpec, collect_corpus, export_heatmap, rate_deltas, run_noise_comparison,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", type=Path, default=Path("results/noise"))
    args = ap.parse_args()

    spec = SweepSpec(epsilons=DEFAULT_GRID, width_bins=DEFAULT_GRID, trials_per_cell=args.trials,
                     master_seed=args.seed, noise=NoiseConfig())
    args.out.mkdir(parents=True, exist_ok=True)
    corpus = collect_corpus(spec.width_bins, spec.trials_per_cell, spec.master_seed)
    clean, noisy = run_noise_comparison(spec, args.workers, corpus)
    export_heatmap(clean, args.out / "clean.csv", args.out / "clean.svg", title="no noise")
    export_heatmap(noisy, args.out / "noisy.csv", args.out / "noisy.svg", title="sensing noise")

    d = rate_deltas(clean, noisy)
    with open(args.out / "delta.csv", "w") as f:
        f.write("epsilon,width,clean,noisy,delta\n")
        for (e, w), v in sorted(d.items(), key=lambda kv: (-kv[0][1], kv[0][0])):
            f.write(f"{e:g},{w:g},{clean.rate(e, w):.4f},{noisy.rate(e, w):.4f},{v:+.4f}\n")
    within = sum(abs(v) <= 0.2 + 1e-12 for v in d.values()) / len(d)
    print(f"cells with |noisy - clean| <= 0.2: {within:.1%}")
    print(f"largest change: {max(d.values(), key=abs):+.3f}")
    print(f"written to {args.out}/")


if __name__ == "__main__":
    main()
