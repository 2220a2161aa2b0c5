import itertools
import json
from dataclasses import replace

import numpy as np
import pytest

from bycoms.agent import NoiseConfig
from bycoms.crafted import corridor, door, elbow, staggered
from bycoms.experiments import (
    DEFAULT_GRID, CellStats, CorpusEntry, CorpusError, SweepResult, SweepSpec, band_mean,
    collect_corpus, collect_terrains, export_heatmap, heatmap_csv, heatmap_svg, in_bin, manifest,
    rate_deltas, records_json, run_noise_comparison, run_sweep, seeds_unique, terrain_seed,
    trend_score, trial_seed, write_manifest,
)
from bycoms.terrain import GridTerrain, min_path_width, path_exists

BINS = (2.0, 3.0)


@pytest.fixture(scope="module")
def corpus():
    return collect_corpus(BINS, 2, master_seed=5)


@pytest.fixture(scope="module")
def small_spec():
    return SweepSpec(epsilons=(1.0, 3.0), width_bins=BINS, trials_per_cell=2, master_seed=5,
                     sim={"time_budget": 1500.0})


def _synthetic(eps, widths, rate_fn, trials=10):
    spec = SweepSpec(epsilons=eps, width_bins=widths, trials_per_cell=trials)
    matrix = {(float(e), float(w)): CellStats(trials, rate_fn(e, w)) for e in eps for w in widths}
    return SweepResult(spec, matrix, [])


# -- seeds --------------------------------------------------------------------


def test_seed_derivation_injective_over_default_sweep():
    seeds = {trial_seed(0, ei, bi, ti)
             for ei, bi, ti in itertools.product(range(9), range(9), range(100))}
    assert len(seeds) == 8100
    terrain = {terrain_seed(0, k) for k in range(5000)}
    assert len(terrain) == 5000 and not seeds & terrain


def test_seeds_depend_on_master_and_are_stable():
    assert trial_seed(1, 0, 0, 0) == trial_seed(1, 0, 0, 0)
    assert trial_seed(1, 0, 0, 0) != trial_seed(2, 0, 0, 0)
    assert 0 <= terrain_seed(123, 4) < 2**64


# -- corpus -------------------------------------------------------------------


def test_in_bin():
    assert in_bin(3.0, 3.0) and in_bin(2.75, 3.0) and in_bin(3.25, 3.0)
    assert not in_bin(3.5, 3.0) and not in_bin(0.0, 0.0)


def test_single_terrain_in_bin():
    (t,) = collect_terrains(3.0, 1, master_seed=11)
    assert path_exists(t)
    assert 2.75 <= min_path_width(t) <= 3.25


def test_corpus_is_deterministic(corpus):
    again = collect_corpus(BINS, 2, master_seed=5)
    for b in BINS:
        assert [e.seed for e in again[b]] == [e.seed for e in corpus[b]]
        assert all(x.terrain == y.terrain for x, y in zip(again[b], corpus[b]))
        assert all(in_bin(e.width, b) for e in corpus[b])


def test_collect_terrains_is_a_bin_slice(corpus):
    ts = collect_terrains(3.0, 2, master_seed=5)
    assert all(a == e.terrain for a, e in zip(ts, corpus[3.0]))


def test_unreachable_bin_fails_loudly():
    # clearance at the start is at most 15.5, so no width reaches 40
    with pytest.raises(CorpusError, match="width bin 40"):
        collect_corpus([40.0], 1, master_seed=0, budget=30)


def test_corpus_argument_checks():
    with pytest.raises(ValueError):
        collect_corpus([3.0], 0, 0)
    with pytest.raises(ValueError):
        collect_corpus([], 1, 0)


# -- sweeps -------------------------------------------------------------------


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(epsilons=())
    with pytest.raises(ValueError):
        SweepSpec(trials_per_cell=0)
    with pytest.raises(ValueError):
        SweepSpec(epsilons=(0.0,))
    with pytest.raises(ValueError):
        SweepSpec(sim={"seed": 3})
    with pytest.raises(ValueError):
        SweepSpec(sim={"dt": -1.0})
    with pytest.raises(TypeError):
        SweepSpec(sim={"bogus": 1})
    assert SweepSpec().epsilons == DEFAULT_GRID


def test_open_terrain_always_succeeds():
    t = GridTerrain(np.zeros((60, 60), dtype=np.uint8))
    spec = SweepSpec(epsilons=(1.0, 5.0), width_bins=(5.0,), trials_per_cell=1)
    res = run_sweep(spec, corpus={5.0: [CorpusEntry(0, 5.0, t)]})
    assert res.rate(1.0, 5.0) == 1.0 and res.rate(5.0, 5.0) == 1.0


def test_large_epsilon_seals_width_one_corridors():
    # every terrain puts a wall across the straight start-goal line
    ts = [door(1, 3), door(1, 50, vertical=True), staggered(1), elbow(1), corridor(1.0, "l")]
    entries = [CorpusEntry(k, 1.0, t) for k, t in enumerate(ts)]
    spec = SweepSpec(epsilons=(5.0,), width_bins=(1.0,), trials_per_cell=len(ts))
    res = run_sweep(spec, corpus={1.0: entries})
    assert res.rate(5.0, 1.0) == 0.0
    assert all(r.outcome in ("Timeout", "RobotsExhausted") for r in res.records)


def test_sweep_records_and_aggregation(corpus, small_spec):
    res = run_sweep(small_spec, corpus=corpus)
    assert len(res.records) == 2 * 2 * 2
    assert seeds_unique(res)
    for (e, w), cell in res.matrix.items():
        rows = [r for r in res.records if r.epsilon == e and r.width_bin == w]
        assert cell.trials == len(rows) == small_spec.trials_per_cell
        assert cell.successes == sum(r.success for r in rows)
        assert cell.rate == cell.successes / cell.trials
    for r in res.records:
        assert r.terrain_seed == corpus[r.width_bin][r.trial].seed
        assert r.success == (r.outcome == "Reached")


def test_thread_count_does_not_change_results(corpus, small_spec):
    one = run_sweep(small_spec, workers=1, corpus=corpus)
    many = run_sweep(small_spec, workers=4, corpus=corpus)
    assert heatmap_csv(one) == heatmap_csv(many)
    assert records_json(one) == records_json(many)


def test_sweep_collects_its_own_corpus(corpus, small_spec):
    assert records_json(run_sweep(small_spec)) == records_json(run_sweep(small_spec, corpus=corpus))


def test_short_corpus_rejected(corpus, small_spec):
    with pytest.raises(CorpusError):
        run_sweep(replace(small_spec, trials_per_cell=3), corpus=corpus)


def test_degenerate_noise_matches_clean(corpus, small_spec):
    spec = replace(small_spec, noise=NoiseConfig(False, (1.0, 1.0), (0.0, 0.0)))
    clean, noisy = run_noise_comparison(spec, corpus=corpus)
    assert noisy.spec.noise.enabled and not clean.spec.noise.enabled
    assert heatmap_csv(clean) == heatmap_csv(noisy)
    assert all(v == 0 for v in rate_deltas(clean, noisy).values())
    # both arms share terrains and trial seeds
    key = [(r.terrain_seed, r.sim_seed) for r in clean.records]
    assert key == [(r.terrain_seed, r.sim_seed) for r in noisy.records]


# -- summaries ---------------------------------------------------------------


def test_band_means_and_trend():
    res = _synthetic((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), lambda e, w: 10 if w >= e else 0)
    assert band_mean(res, lo_gap=1.0) == 1.0
    assert band_mean(res, hi_gap=-1.0) == 0.0
    assert trend_score(res) == 1.0
    assert band_mean(res, lo_gap=5.0) is None


# -- export --------------------------------------------------------------------


def test_csv_one_cell():
    res = _synthetic((1.0,), (1.0,), lambda e, w: 3)
    assert heatmap_csv(res) == "epsilon,width,trials,successes,rate\n1,1,10,3,0.300000\n"


def test_csv_default_grid_line_count_and_order():
    res = _synthetic(DEFAULT_GRID, DEFAULT_GRID, lambda e, w: 5)
    lines = heatmap_csv(res).splitlines()
    assert len(lines) == 82
    keys = [tuple(map(float, ln.split(",")[:2])) for ln in lines[1:]]
    assert keys == sorted(keys, key=lambda k: (-k[1], k[0]))


def test_golden_svg(golden):
    res = _synthetic((1.0, 2.5), (2.0, 4.0), lambda e, w: int(round(10 * min(1.0, w / (2 * e)))))
    assert heatmap_svg(res, title="demo") == (golden / "heatmap_2x2.svg").read_text()


def test_export_and_manifest(tmp_path, corpus, small_spec):
    res = run_sweep(small_spec, corpus=corpus)
    text = export_heatmap(res, tmp_path / "h.csv", tmp_path / "h.svg", title="t")
    assert (tmp_path / "h.csv").read_text() == text
    assert (tmp_path / "h.svg").read_text().startswith("<svg")
    write_manifest(res, tmp_path / "m.json", corpus)
    m = json.loads((tmp_path / "m.json").read_text())
    assert m == json.loads(json.dumps(manifest(res, corpus)))
    assert m["spec"]["master_seed"] == 5 and m["spec"]["trials_per_cell"] == 2
    assert m["terrain_seeds"]["3"] == [e.seed for e in corpus[3.0]]
    import hashlib
    assert m["csv_sha256"] == hashlib.sha256(text.encode()).hexdigest()
    # a spec rebuilt from the manifest reproduces the sweep
    s = m["spec"]
    again = SweepSpec(epsilons=s["epsilons"], width_bins=s["width_bins"],
                      trials_per_cell=s["trials_per_cell"], master_seed=s["master_seed"],
                      noise=NoiseConfig(s["noise"]["enabled"],
                                        tuple(s["noise"]["strength_factor_range"]),
                                        tuple(s["noise"]["grad_angle_range"])),
                      sim=s["sim"])
    assert heatmap_csv(run_sweep(again, corpus=corpus)) == text
