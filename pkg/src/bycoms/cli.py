"""Command-line entry point.

Exit codes: 0 success, 1 navigation failure, 2 usage error, 3 I/O error.
Every subcommand prints its effective configuration as one JSON line first.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import acoustic, experiments, render, sim, terrain
from .agent import NoiseConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class InputError(Exception):
    """An input file exists but cannot be parsed."""


def _read_terrain(path):
    try:
        return terrain.load_terrain(path)
    except terrain.TerrainError as exc:
        raise InputError(f"{path}: {exc}") from None


def _read_trace(path):
    try:
        return sim.load_trace(Path(path).read_bytes())
    except sim.TraceFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _echo_config(name: str, cfg: dict) -> None:
    print("config: " + json.dumps({"command": name, **cfg}, sort_keys=True), flush=True)


def _noise(args) -> NoiseConfig:
    return NoiseConfig(
        enabled=args.noise,
        strength_factor_range=tuple(args.strength_range),
        grad_angle_range=tuple(args.angle_range),
    )


def _floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _corner_points(size: int):
    q = size // 4
    return (q + 0.5, q + 0.5), (size - 1 - q + 0.5, size - 1 - q + 0.5)


# -- subcommands ------------------------------------------------------------


def cmd_terrain_gen(args) -> int:
    a = None if args.random_threshold or args.threshold is None else args.threshold
    cfg = terrain.PerlinConfig(seed=args.seed, lattice_cell_size=args.lattice, threshold_a=a)
    start, goal = _corner_points(args.size)
    _echo_config("terrain-gen", {
        "seed": args.seed, "size": args.size, "lattice": args.lattice,
        "threshold": a, "out": str(args.out),
    })
    t = terrain.generate_terrain(cfg, (args.size, args.size), start, goal)
    terrain.save_terrain(t, args.out)
    s = terrain.summarize(t)
    print(f"impassable_cells: {int(t.cells.sum())}")
    print(f"path_exists: {str(s.path_exists).lower()}")
    print(f"min_path_width: {s.min_path_width:g}")
    return EXIT_OK


def cmd_terrain_width(args) -> int:
    _echo_config("terrain-width", {"terrain": str(args.terrain)})
    s = terrain.summarize(_read_terrain(args.terrain))
    print(f"path_exists: {str(s.path_exists).lower()}")
    print(f"min_path_width: {s.min_path_width:g}")
    return EXIT_OK


def _sim_overrides(args) -> dict:
    return {
        "dt": args.dt, "time_budget": args.time_budget,
        "goal_tolerance": args.goal_tolerance, "max_robots": args.max_robots,
    }


def cmd_sim_run(args) -> int:
    if args.terrain is not None:
        t = _read_terrain(args.terrain)
        origin = str(args.terrain)
    else:
        t = terrain.generate_terrain(terrain.PerlinConfig(seed=args.terrain_seed))
        origin = f"perlin:{args.terrain_seed}"
    cfg = sim.SimConfig(epsilon=args.epsilon, seed=args.seed, noise=_noise(args),
                        **_sim_overrides(args))
    _echo_config("sim-run", {"terrain": origin, **cfg.to_dict()})
    result, trace = sim.run_trial(t, cfg)
    if args.trace_out:
        Path(args.trace_out).write_bytes(sim.serialize_trace(trace))
    if args.frames_out:
        n = len(render.write_frames(trace, args.frames_out, args.frame_every))
        print(f"frames: {n}")
    print(f"reason: {result.reason.value}")
    print(f"success: {str(result.success).lower()}")
    print(f"robots_deployed: {result.robots_deployed}")
    print(f"robots_stuck: {result.robots_stuck}")
    print(f"elapsed: {result.elapsed:g}")
    return EXIT_OK if result.success else EXIT_FAIL


def _spec(args) -> experiments.SweepSpec:
    return experiments.SweepSpec(
        epsilons=args.epsilons, width_bins=args.widths, trials_per_cell=args.trials,
        master_seed=args.master_seed, noise=_noise(args), sim=_sim_overrides(args),
    )


def _write_sweep(result, corpus, out: Path, stem: str, title: str) -> None:
    experiments.export_heatmap(result, out / f"{stem}.csv", out / f"{stem}.svg", title=title)
    experiments.write_manifest(result, out / f"{stem}.manifest.json", corpus)
    (out / f"{stem}.trials.json").write_text(
        json.dumps(experiments.records_json(result), indent=1) + "\n")


def cmd_sweep(args) -> int:
    spec = _spec(args)
    _echo_config("sweep", {**spec.to_dict(), "workers": args.workers, "out_dir": str(args.out_dir)})
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = experiments.collect_corpus(spec.width_bins, spec.trials_per_cell, spec.master_seed)
    result = experiments.run_sweep(spec, args.workers, corpus)
    _write_sweep(result, corpus, out, "sweep", "success rate")
    if experiments._has_bands(result):
        print(f"trend_score: {experiments.trend_score(result):.4f}")
    print(f"csv: {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_noise_compare(args) -> int:
    spec = _spec(args)
    _echo_config("noise-compare", {**spec.to_dict(), "workers": args.workers,
                                   "out_dir": str(args.out_dir)})
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = experiments.collect_corpus(spec.width_bins, spec.trials_per_cell, spec.master_seed)
    clean, noisy = experiments.run_noise_comparison(spec, args.workers, corpus)
    _write_sweep(clean, corpus, out, "clean", "success rate, no noise")
    _write_sweep(noisy, corpus, out, "noisy", "success rate, sensing noise")
    d = experiments.rate_deltas(clean, noisy)
    within = sum(abs(v) <= 0.2 + 1e-12 for v in d.values()) / len(d)
    print(f"max_abs_delta: {max(abs(v) for v in d.values()):.4f}")
    print(f"cells_within_0.2: {within:.4f}")
    return EXIT_OK


def cmd_acoustic_run(args) -> int:
    emitters = [tuple(e) for e in args.emitter] or [
        ((args.start[0] + args.goal[0]) / 2, (args.start[1] + args.goal[1]) / 2)]
    noise = _noise(args)
    _echo_config("acoustic-run", {
        "start": args.start, "goal": args.goal, "emitters": emitters, "epsilon": args.epsilon,
        "sensing": args.sensing, "seed": args.seed, "time_budget": args.time_budget,
        "noise": noise.enabled,
    })
    run = acoustic.run_acoustic(args.start, args.goal, emitters, epsilon=args.epsilon,
                                sensing=args.sensing, noise=noise, seed=args.seed,
                                time_budget=args.time_budget)
    if args.trace_out:
        Path(args.trace_out).write_bytes(sim.serialize_trace(run.trace))
    print(f"reached: {str(run.reached).lower()}")
    print(f"elapsed: {run.elapsed:g}")
    return EXIT_OK if run.reached else EXIT_FAIL


def cmd_render(args) -> int:
    _echo_config("render", {"trace": str(args.trace), "out": str(args.out),
                            "frames_out": args.frames_out and str(args.frames_out),
                            "every": args.frame_every})
    tr = _read_trace(args.trace)
    Path(args.out).write_text(render.render_svg(tr))
    if args.frames_out:
        print(f"frames: {len(render.write_frames(tr, args.frames_out, args.frame_every))}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _positive(kind):
    def parse(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def _add_noise(p):
    p.add_argument("--noise", action="store_true", help="enable sensing noise")
    p.add_argument("--strength-range", type=float, nargs=2, default=(0.8, 1.2),
                   metavar=("LO", "HI"))
    p.add_argument("--angle-range", type=float, nargs=2, default=(-math.pi / 6, math.pi / 6),
                   metavar=("LO", "HI"), help="radians")


def _add_sim(p):
    p.add_argument("--dt", type=_positive(float), default=0.1)
    p.add_argument("--time-budget", type=_positive(float), default=10000.0)
    p.add_argument("--goal-tolerance", type=_positive(float), default=1.0)
    p.add_argument("--max-robots", type=_positive(int), default=100)


def _add_sweep(p):
    grid = ",".join(f"{v:g}" for v in experiments.DEFAULT_GRID)
    p.add_argument("--epsilons", type=_floats, default=experiments.DEFAULT_GRID, help=grid)
    p.add_argument("--widths", type=_floats, default=experiments.DEFAULT_GRID, help=grid)
    p.add_argument("--trials", type=_positive(int), default=100)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--workers", type=_positive(int), default=1)
    p.add_argument("--out-dir", type=Path, required=True)
    _add_noise(p)
    _add_sim(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bycoms", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("terrain-gen", help="generate a Perlin terrain file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=60)
    p.add_argument("--lattice", type=_positive(float), default=10.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--threshold", type=float)
    g.add_argument("--random-threshold", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_terrain_gen)

    p = sub.add_parser("terrain-width", help="report connectivity and minimum path width")
    p.add_argument("--terrain", type=Path, required=True)
    p.set_defaults(func=cmd_terrain_width)

    p = sub.add_parser("sim-run", help="run one trial")
    p.add_argument("--terrain", type=Path)
    p.add_argument("--terrain-seed", type=int, default=0,
                   help="Perlin seed used when --terrain is absent")
    p.add_argument("--epsilon", type=_positive(float), default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-out", type=Path)
    p.add_argument("--frames-out", type=Path)
    p.add_argument("--frame-every", type=_positive(int), default=100)
    _add_noise(p)
    _add_sim(p)
    p.set_defaults(func=cmd_sim_run)

    p = sub.add_parser("sweep", help="epsilon x width success-rate sweep")
    _add_sweep(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("noise-compare", help="paired sweeps without and with noise")
    _add_sweep(p)
    p.set_defaults(func=cmd_noise_compare)

    p = sub.add_parser("acoustic-run", help="microphone-array robot past fixed emitters")
    p.add_argument("--start", type=float, nargs=2, default=(0.0, 0.0), metavar=("X", "Y"))
    p.add_argument("--goal", type=float, nargs=2, default=(3.0, 0.0), metavar=("X", "Y"))
    p.add_argument("--emitter", type=float, nargs=2, action="append", default=[],
                   metavar=("X", "Y"), help="repeatable; default one at the midpoint")
    p.add_argument("--epsilon", type=_positive(float), default=0.5)
    p.add_argument("--sensing", choices=("mics", "exact"), default="mics")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-budget", type=_positive(float), default=200.0)
    p.add_argument("--trace-out", type=Path)
    _add_noise(p)
    p.set_defaults(func=cmd_acoustic_run)

    p = sub.add_parser("render", help="draw a trace as SVG")
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--frames-out", type=Path)
    p.add_argument("--frame-every", type=_positive(int), default=100)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (OSError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, experiments.CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
