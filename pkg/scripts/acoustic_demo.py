"""Microphone-array robot driving past sound emitters, next to the exact-gradient run.

    python3 scripts/acoustic_demo.py --out results/acoustic
"""
import argparse
from pathlib import Path

from bycoms.acoustic import cross_track_deviation, run_acoustic
from bycoms.render import render_svg
from bycoms.sim import serialize_trace

SCENES = {
    "single": [(2.0, 0.05)],
    "offset": [(2.0, -0.1)],
    "pair": [(1.5, 0.1), (3.0, -0.15)],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--out", type=Path, default=Path("results/acoustic"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    print(f"{'scene':8} {'mics':>8} {'exact':>8} {'dev/eps':>8}")
    for name, emitters in SCENES.items():
        mic = run_acoustic((0.0, 0.0), (4.5, 0.0), emitters, args.epsilon, sensing="mics")
        ref = run_acoustic((0.0, 0.0), (4.5, 0.0), emitters, args.epsilon, sensing="exact")
        dev = cross_track_deviation(mic.path, ref.path) / args.epsilon
        print(f"{name:8} {str(mic.reached):>8} {str(ref.reached):>8} {dev:8.3f}")
        (args.out / f"{name}.jsonl").write_bytes(serialize_trace(mic.trace))
        (args.out / f"{name}.svg").write_text(render_svg(mic.trace))
    print(f"written to {args.out}/")


if __name__ == "__main__":
    main()
