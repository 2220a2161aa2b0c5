"""Monte-Carlo sweeps over the circumnavigation radius and path width.

Terrains come from one indexed seed stream: stream item ``k`` is a Perlin
terrain whose seed is derived from ``(master_seed, k)``. Each width bin takes
the first ``count`` items whose measured width falls in it, so a bin's corpus
does not depend on which other bins were requested. One corpus per bin is
reused for every epsilon.
"""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .agent import NoiseConfig
from .kernel import run_trial_fast
from .sim import SimConfig
from .terrain import (
    DEFAULT_DIMS,
    DEFAULT_GOAL,
    DEFAULT_START,
    GridTerrain,
    PerlinConfig,
    generate_terrain,
    min_path_width,
)

log = logging.getLogger(__name__)

DEFAULT_GRID = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
BIN_HALF_WIDTH = 0.25
REJECTION_BUDGET = 100_000
MANIFEST_FORMAT = "bycoms-sweep-manifest"

_TERRAIN_STREAM = 0
_TRIAL_STREAM = 1


class CorpusError(RuntimeError):
    """A width bin could not be filled within the rejection budget."""


def _derive(master_seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def terrain_seed(master_seed: int, index: int) -> int:
    return _derive(master_seed, _TERRAIN_STREAM, index)


def trial_seed(master_seed: int, eps_index: int, bin_index: int, trial_index: int) -> int:
    return _derive(master_seed, _TRIAL_STREAM, eps_index, bin_index, trial_index)


@dataclass(frozen=True)
class CorpusEntry:
    seed: int
    width: float
    terrain: GridTerrain = field(repr=False, compare=False)


def in_bin(width: float, width_bin: float) -> bool:
    return width > 0 and abs(width - width_bin) <= BIN_HALF_WIDTH


def collect_corpus(
    width_bins,
    count: int,
    master_seed: int,
    dims=DEFAULT_DIMS,
    start=DEFAULT_START,
    goal=DEFAULT_GOAL,
    budget: int = REJECTION_BUDGET,
) -> dict[float, list[CorpusEntry]]:
    """Fill every bin with ``count`` terrains from the shared seed stream.

    A bin fails loudly once ``budget`` consecutive stream items have missed it.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    bins = [float(b) for b in width_bins]
    if not bins:
        raise ValueError("width_bins must be nonempty")
    corpus = {b: [] for b in bins}
    misses = {b: 0 for b in bins}
    k = 0
    while any(len(v) < count for v in corpus.values()):
        seed = terrain_seed(master_seed, k)
        k += 1
        t = generate_terrain(PerlinConfig(seed=seed), dims, start, goal)
        w = min_path_width(t)
        for b in bins:
            if len(corpus[b]) >= count:
                continue
            if in_bin(w, b):
                corpus[b].append(CorpusEntry(seed, w, t))
                misses[b] = 0
            else:
                misses[b] += 1
                if misses[b] > budget:
                    raise CorpusError(
                        f"width bin {b:g}: {budget} consecutive rejections "
                        f"after {len(corpus[b])} of {count} terrains"
                    )
    log.info("corpus: %d terrains generated for %d bins x %d", k, len(bins), count)
    return corpus


def collect_terrains(width_bin: float, count: int, master_seed: int, **kw) -> list[GridTerrain]:
    return [e.terrain for e in collect_corpus([width_bin], count, master_seed, **kw)[float(width_bin)]]


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    epsilons: tuple = DEFAULT_GRID
    width_bins: tuple = DEFAULT_GRID
    trials_per_cell: int = 100
    master_seed: int = 0
    noise: NoiseConfig = NoiseConfig()
    sim: dict = field(default_factory=dict)  # SimConfig overrides

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "width_bins", tuple(float(w) for w in self.width_bins))
        if not self.epsilons or not self.width_bins:
            raise ValueError("epsilons and width_bins must be nonempty")
        if any(not e > 0 for e in self.epsilons):
            raise ValueError("epsilons must be positive")
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be at least 1")
        bad = {"epsilon", "seed", "noise"} & set(self.sim)
        if bad:
            raise ValueError(f"sim overrides may not set {sorted(bad)}")
        self.sim_config(self.epsilons[0], 0)  # validates overrides

    def sim_config(self, epsilon: float, seed: int) -> SimConfig:
        return SimConfig(epsilon=epsilon, seed=seed, noise=self.noise, **self.sim)

    def to_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "width_bins": list(self.width_bins),
            "trials_per_cell": self.trials_per_cell,
            "master_seed": self.master_seed,
            "noise": {
                "enabled": self.noise.enabled,
                "strength_factor_range": list(self.noise.strength_factor_range),
                "grad_angle_range": list(self.noise.grad_angle_range),
            },
            "sim": dict(self.sim),
        }


@dataclass(frozen=True)
class TrialRecord:
    epsilon: float
    width_bin: float
    trial: int
    terrain_seed: int
    sim_seed: int
    outcome: str
    success: bool
    robots_used: int
    elapsed: float


@dataclass(frozen=True)
class CellStats:
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials


@dataclass
class SweepResult:
    spec: SweepSpec
    matrix: dict  # (epsilon, width_bin) -> CellStats
    records: list

    def rate(self, epsilon: float, width_bin: float) -> float:
        return self.matrix[(float(epsilon), float(width_bin))].rate


def _aggregate(spec: SweepSpec, records) -> dict:
    wins = {(e, w): 0 for w in spec.width_bins for e in spec.epsilons}
    for r in records:
        wins[(r.epsilon, r.width_bin)] += r.success
    return {k: CellStats(spec.trials_per_cell, s) for k, s in wins.items()}


def run_sweep(spec: SweepSpec, workers: int = 1, corpus=None) -> SweepResult:
    """Run every (epsilon, bin, trial) and aggregate success rates.

    Work items are independent and carry pre-derived seeds, so the result is
    the same for any ``workers``. ``corpus`` may be passed to share terrains
    between sweeps; otherwise it is collected from ``spec.master_seed``.
    """
    if corpus is None:
        corpus = collect_corpus(spec.width_bins, spec.trials_per_cell, spec.master_seed)
    jobs = []
    for bi, w in enumerate(spec.width_bins):
        entries = corpus[w]
        if len(entries) < spec.trials_per_cell:
            raise CorpusError(f"width bin {w:g}: corpus has {len(entries)} terrains")
        for ei, e in enumerate(spec.epsilons):
            for ti in range(spec.trials_per_cell):
                jobs.append((e, w, ti, entries[ti], trial_seed(spec.master_seed, ei, bi, ti)))

    def one(job):
        e, w, ti, entry, seed = job
        res = run_trial_fast(entry.terrain, spec.sim_config(e, seed))
        return TrialRecord(e, w, ti, entry.seed, seed, res.reason.value, res.success,
                           res.robots_deployed, res.elapsed)

    if workers <= 1:
        records = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, jobs))
    return SweepResult(spec, _aggregate(spec, records), records)


def run_noise_comparison(spec: SweepSpec, workers: int = 1, corpus=None):
    """Paired sweeps on one corpus with one seed derivation; only noise differs.

    The noisy arm uses ``spec.noise``'s ranges with noise switched on.
    """
    if corpus is None:
        corpus = collect_corpus(spec.width_bins, spec.trials_per_cell, spec.master_seed)
    clean = run_sweep(replace(spec, noise=replace(spec.noise, enabled=False)), workers, corpus)
    noisy = run_sweep(replace(spec, noise=replace(spec.noise, enabled=True)), workers, corpus)
    return clean, noisy


# -- summaries --------------------------------------------------------------


def band_mean(result: SweepResult, lo_gap: float | None = None, hi_gap: float | None = None):
    """Mean rate over cells with ``lo_gap <= width - epsilon <= hi_gap``; None if empty."""
    rates = [
        s.rate for (e, w), s in result.matrix.items()
        if (lo_gap is None or w - e >= lo_gap) and (hi_gap is None or w - e <= hi_gap)
    ]
    return float(np.mean(rates)) if rates else None


def trend_score(result: SweepResult) -> float:
    """Mean rate where width >= eps + 1 minus mean rate where width <= eps - 1."""
    return band_mean(result, lo_gap=1.0) - band_mean(result, hi_gap=-1.0)


def rate_deltas(a: SweepResult, b: SweepResult) -> dict:
    return {k: b.matrix[k].rate - a.matrix[k].rate for k in a.matrix}


# -- export -----------------------------------------------------------------


def _ordered(result: SweepResult):
    return sorted(result.matrix.items(), key=lambda kv: (-kv[0][1], kv[0][0]))


def heatmap_csv(result: SweepResult) -> str:
    lines = ["epsilon,width,trials,successes,rate"]
    for (e, w), s in _ordered(result):
        lines.append(f"{e:g},{w:g},{s.trials},{s.successes},{s.rate:.6f}")
    return "\n".join(lines) + "\n"


def _cell_colour(rate: float) -> str:
    # white (0) to dark blue (1)
    r = round(255 - 225 * rate)
    g = round(255 - 175 * rate)
    b = round(255 - 55 * rate)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(result: SweepResult, cell: int = 48, title: str | None = None) -> str:
    eps = sorted({e for e, _ in result.matrix})
    widths = sorted({w for _, w in result.matrix}, reverse=True)
    left, top = 64, 40 if title else 16
    W = left + cell * len(eps) + 16
    H = top + cell * len(widths) + 48
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{W / 2:g}" y="22" text-anchor="middle" font-size="14">{title}</text>')
    for row, w in enumerate(widths):
        y = top + row * cell
        out.append(f'<text x="{left - 6}" y="{y + cell / 2 + 4:g}" text-anchor="end">{w:g}</text>')
        for col, e in enumerate(eps):
            x = left + col * cell
            rate = result.matrix[(e, w)].rate
            ink = "white" if rate > 0.55 else "black"
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                       f'fill="{_cell_colour(rate)}" stroke="#888" stroke-width="0.5"/>')
            out.append(f'<text x="{x + cell / 2:g}" y="{y + cell / 2 + 4:g}" '
                       f'text-anchor="middle" fill="{ink}">{rate:.2f}</text>')
    base = top + cell * len(widths)
    for col, e in enumerate(eps):
        out.append(f'<text x="{left + col * cell + cell / 2:g}" y="{base + 16}" '
                   f'text-anchor="middle">{e:g}</text>')
    out.append(f'<text x="{left + cell * len(eps) / 2:g}" y="{base + 38}" '
               f'text-anchor="middle">circumnavigation radius epsilon</text>')
    out.append(f'<text x="14" y="{top + cell * len(widths) / 2:g}" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + cell * len(widths) / 2:g})">min path width</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_heatmap(result: SweepResult, csv_path, svg_path=None, title: str | None = None):
    csv_text = heatmap_csv(result)
    Path(csv_path).write_text(csv_text)
    if svg_path is not None:
        Path(svg_path).write_text(heatmap_svg(result, title=title))
    return csv_text


def manifest(result: SweepResult, corpus=None) -> dict:
    """Everything needed to rerun a sweep, plus a digest of its CSV."""
    m = {
        "format": MANIFEST_FORMAT,
        "version": 1,
        "spec": result.spec.to_dict(),
        "csv_sha256": hashlib.sha256(heatmap_csv(result).encode()).hexdigest(),
        "trend_score": trend_score(result) if _has_bands(result) else None,
    }
    if corpus is not None:
        m["terrain_seeds"] = {f"{w:g}": [e.seed for e in corpus[w]] for w in result.spec.width_bins}
    return m


def _has_bands(result: SweepResult) -> bool:
    return band_mean(result, lo_gap=1.0) is not None and band_mean(result, hi_gap=-1.0) is not None


def write_manifest(result: SweepResult, path, corpus=None) -> None:
    Path(path).write_text(json.dumps(manifest(result, corpus), indent=2, sort_keys=True) + "\n")


def records_json(result: SweepResult) -> list[dict]:
    return [asdict(r) for r in result.records]


def seeds_unique(result: SweepResult) -> bool:
    seeds = [r.sim_seed for r in result.records]
    return len(set(seeds)) == len(seeds)
