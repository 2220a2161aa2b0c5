"""The compiled sweep engine must reproduce the reference engine exactly."""
import numpy as np
import pytest

from bycoms.agent import NoiseConfig
from bycoms.crafted import crafted_corpus
from bycoms.kernel import run_trial_fast
from bycoms.sim import SimConfig, run_trial
from bycoms.terrain import GridTerrain, PerlinConfig, generate_terrain


def _same(t, cfg):
    ref, _ = run_trial(t, cfg)
    fast = run_trial_fast(t, cfg)
    assert fast == ref
    return ref


@pytest.mark.parametrize("noise", [False, True])
@pytest.mark.parametrize("seed", range(6))
def test_generated_terrains(seed, noise):
    rng = np.random.default_rng(seed)
    t = generate_terrain(PerlinConfig(seed=seed, threshold_a=float(rng.uniform(-0.2, 0.5))))
    for eps in (1.0, 2.5):
        _same(t, SimConfig(epsilon=eps, seed=seed + 100, time_budget=1500.0,
                           noise=NoiseConfig(enabled=noise)))


def test_crafted_terrains_cover_all_outcomes():
    reasons = set()
    for name, w, t in crafted_corpus((2, 4))[:6]:
        for eps in (1.0, 3.0):
            reasons.add(_same(t, SimConfig(epsilon=eps, time_budget=800.0, max_robots=30)).reason)
    c = np.zeros((60, 60), dtype=np.uint8)
    c[9:21, 9:21] = 1
    c[10:20, 10:20] = 0
    reasons.add(_same(GridTerrain(c), SimConfig(max_robots=6)).reason)
    assert {r.value for r in reasons} == {"Reached", "Timeout", "RobotsExhausted"}


def test_custom_noise_ranges_and_params():
    t = generate_terrain(PerlinConfig(seed=31, threshold_a=0.25))
    cfg = SimConfig(epsilon=1.5, seed=5, time_budget=1200.0, dt=0.2, speed=0.7,
                    turn_rate=0.9, heading_deadband=0.05, goal_tolerance=0.6, c=2.0,
                    noise=NoiseConfig(True, (0.5, 1.5), (-1.0, 0.3)))
    _same(t, cfg)
