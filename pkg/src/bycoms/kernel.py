"""Compiled trial loop for sweeps.

Mirrors ``bycoms.sim.run_trial`` operation for operation (same float
expressions, same summation order, same RNG draws) but records no trace. The
angle and controller helpers are the exact functions from ``bycoms.agent``,
compiled with numba. ``tests/test_kernel.py`` checks the two engines agree.
"""
from __future__ import annotations

import math
import types

import numba
import numpy as np

from . import agent as _agent
from . import angles as _angles
from .field import DELTA_MIN
from .sim import Reason, SimConfig, SimResult
from .terrain import GridTerrain


def _recompile(fn, **names):
    """Compile ``fn`` with its global helpers rebound to compiled versions."""
    g = {"math": math, "abs": abs, "HALF_PI": _agent.HALF_PI}
    g.update(names)
    return numba.njit(nogil=True)(types.FunctionType(fn.__code__, g, fn.__name__))


wrap_angle = numba.njit(nogil=True)(_angles.wrap_angle)
angle_between = _recompile(_angles.angle_between, wrap_angle=wrap_angle)
_helpers = {"wrap_angle": wrap_angle, "angle_between": angle_between}
mode_transition = _recompile(_agent.mode_transition, **_helpers)
circumnavigate_side = _recompile(_agent.circumnavigate_side, **_helpers)
tangent_heading = _recompile(_agent.tangent_heading, **_helpers)
side_transition = _recompile(_agent.side_transition, circumnavigate_side=circumnavigate_side)
step_pose = _recompile(_agent.step_pose, **_helpers)

_REACHED, _TIMEOUT, _EXHAUSTED = 0, 1, 2
_REASONS = {_REACHED: Reason.REACHED, _TIMEOUT: Reason.TIMEOUT, _EXHAUSTED: Reason.ROBOTS_EXHAUSTED}


@numba.njit(nogil=True)
def _trial(cells, sx0, sy0, gx0, gy0, c, g_th, dt, max_ticks, tol, max_robots,
           speed, turn_rate, deadband, noisy, f_lo, f_hi, a_lo, a_hi, rng):
    h, w = cells.shape
    src_x = np.empty(max_robots)
    src_y = np.empty(max_robots)
    n_src = 0
    floor2 = DELTA_MIN * DELTA_MIN
    heading0 = wrap_angle(math.atan2(gy0 - sy0, gx0 - sx0))
    x, y, heading, mode, side = sx0, sy0, heading0, 1, 0
    deployed = 1
    ticks = 0
    reason = -1
    while reason < 0:
        # sense
        g = 0.0
        gx = 0.0
        gy = 0.0
        degenerate = False
        for k in range(n_src):
            dx = x - src_x[k]
            dy = y - src_y[k]
            d2 = dx * dx + dy * dy
            g += c / (d2 if d2 > floor2 else floor2)
            if d2 <= floor2:
                degenerate = True
            else:
                q = -2.0 * c / (d2 * d2)
                gx += q * dx
                gy += q * dy
        if degenerate:
            gx = 0.0
            gy = 0.0
        has_grad = math.sqrt(gx * gx + gy * gy) >= 1e-12
        grad_dir = math.atan2(gy, gx) if has_grad else 0.0
        if noisy:
            g = g * (f_lo + (f_hi - f_lo) * rng.random())
            off = a_lo + (a_hi - a_lo) * rng.random()
            if has_grad:
                grad_dir = wrap_angle(grad_dir + off)
        bearing = math.atan2(gy0 - y, gx0 - x)
        theta_fg = angle_between(grad_dir, bearing) if has_grad else 0.0
        theta_rg = angle_between(heading, bearing)
        # decide and move
        prev = mode
        mode = mode_transition(mode, g, has_grad, theta_fg, theta_rg, g_th)
        side = side_transition(prev, mode, side, grad_dir, bearing)
        if mode == 1:
            target = bearing
        elif has_grad:
            target = tangent_heading(grad_dir, side)
        else:
            target = heading
        x, y, heading = step_pose(x, y, heading, target, speed, turn_rate, deadband, dt)
        ticks += 1
        # stuck, then goal
        if x >= 0.0 and y >= 0.0 and x < w and y < h:
            stuck = cells[int(math.floor(y)), int(math.floor(x))] != 0
        else:
            stuck = True
        if stuck:
            src_x[n_src] = x
            src_y[n_src] = y
            n_src += 1
            if deployed >= max_robots:
                reason = 2
                break
            deployed += 1
            x, y, heading, mode, side = sx0, sy0, heading0, 1, 0
        else:
            ex = x - gx0
            ey = y - gy0
            if math.sqrt(ex * ex + ey * ey) <= tol:
                reason = 0
                break
        if ticks >= max_ticks:
            reason = 1
    return reason, deployed, n_src, ticks, src_x[:n_src].copy(), src_y[:n_src].copy()


def run_trial_fast(t: GridTerrain, cfg: SimConfig) -> SimResult:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.noise
    code, deployed, n_stuck, ticks, xs, ys = _trial(
        t.cells, t.start[0], t.start[1], t.goal[0], t.goal[1],
        float(cfg.c), cfg.g_th, float(cfg.dt), cfg.max_ticks, float(cfg.goal_tolerance),
        cfg.max_robots, float(cfg.speed), float(cfg.turn_rate), float(cfg.heading_deadband),
        bool(n.enabled), float(n.strength_factor_range[0]), float(n.strength_factor_range[1]),
        float(n.grad_angle_range[0]), float(n.grad_angle_range[1]), rng,
    )
    return SimResult(
        success=code == _REACHED,
        robots_deployed=int(deployed),
        robots_stuck=int(n_stuck),
        elapsed=ticks * cfg.dt,
        reason=_REASONS[int(code)],
        ticks=int(ticks),
        stuck_positions=tuple(zip(xs.tolist(), ys.tolist())),
    )
