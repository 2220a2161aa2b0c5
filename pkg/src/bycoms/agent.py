"""The two-mode bypassing controller for a single robot on the grid.

Mode 1 (goal seek) heads for the goal. Mode 2 (circumnavigate) moves at right
angles to the sensed field gradient. The side (clockwise or counterclockwise)
is the one closer to the goal at the moment Mode 2 is entered, and it is kept
until the robot returns to Mode 1.
The scalar helpers at the bottom are plain float code; ``bycoms.kernel``
compiles the very same functions with numba.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum, IntEnum

import numpy as np

from .angles import angle_between, wrap_angle
from .field import DegeneratePointError, FieldSet, gradient_at, strength_at

HALF_PI = 0.5 * math.pi
GRAD_EPS = 1e-12


class Mode(IntEnum):
    GOAL_SEEK = 1
    CIRCUMNAVIGATE = 2


class Status(Enum):
    ACTIVE = "active"
    STUCK = "stuck"
    REACHED = "reached"


class MissingGradientError(ValueError):
    pass


@dataclass(frozen=True)
class AgentState:
    position: tuple[float, float]
    heading: float
    mode: Mode = Mode.GOAL_SEEK
    status: Status = Status.ACTIVE
    side: int = 0  # committed tangent: +1 is grad_dir + pi/2, -1 is grad_dir - pi/2, 0 none

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))
        if self.side not in (-1, 0, 1):
            raise ValueError("side must be -1, 0 or +1")


@dataclass(frozen=True)
class AgentParams:
    speed: float = 1.0
    turn_rate: float = math.pi / 6
    heading_deadband: float = math.pi / 36
    epsilon: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("speed", "turn_rate", "heading_deadband", "epsilon", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.heading_deadband >= HALF_PI:
            raise ValueError("heading_deadband must be below pi/2")

    @property
    def g_th(self) -> float:
        return self.c / (self.epsilon * self.epsilon)


@dataclass(frozen=True)
class NoiseConfig:
    enabled: bool = False
    strength_factor_range: tuple[float, float] = (0.8, 1.2)
    grad_angle_range: tuple[float, float] = (-math.pi / 6, math.pi / 6)

    def __post_init__(self):
        lo, hi = self.strength_factor_range
        if not 0 < lo <= hi:
            raise ValueError("strength_factor_range must satisfy 0 < lo <= hi")
        lo, hi = self.grad_angle_range
        if not lo <= hi:
            raise ValueError("grad_angle_range must satisfy lo <= hi")


@dataclass(frozen=True)
class SenseSample:
    g: float
    grad_dir: float | None
    goal_bearing: float
    theta_fg: float | None
    theta_rg: float


def sense(
    pos,
    heading: float,
    fs: FieldSet,
    goal,
    noise: NoiseConfig = NoiseConfig(),
    rng: np.random.Generator | None = None,
) -> SenseSample:
    """Read field strength, gradient direction and goal bearing at ``pos``.

    With noise enabled exactly two uniforms are drawn per call (strength
    factor, then angle offset), whether or not a gradient is present.
    """
    g = strength_at(fs, pos)
    try:
        gx, gy = gradient_at(fs, pos)
    except DegeneratePointError:
        gx = gy = 0.0
    has_grad = math.sqrt(gx * gx + gy * gy) >= GRAD_EPS
    grad_dir = math.atan2(gy, gx) if has_grad else None
    if noise.enabled:
        lo, hi = noise.strength_factor_range
        g = g * (lo + (hi - lo) * rng.random())
        lo, hi = noise.grad_angle_range
        offset = lo + (hi - lo) * rng.random()
        if has_grad:
            grad_dir = wrap_angle(grad_dir + offset)
    goal_bearing = math.atan2(goal[1] - pos[1], goal[0] - pos[0])
    theta_fg = angle_between(grad_dir, goal_bearing) if has_grad else None
    return SenseSample(
        g=g,
        grad_dir=grad_dir,
        goal_bearing=goal_bearing,
        theta_fg=theta_fg,
        theta_rg=angle_between(heading, goal_bearing),
    )


def update_mode(mode: Mode, s: SenseSample, g_th: float) -> Mode:
    has_grad = s.grad_dir is not None
    fg = s.theta_fg if has_grad else 0.0
    return Mode(mode_transition(int(mode), s.g, has_grad, fg, s.theta_rg, g_th))


def update_side(prev: Mode, mode: Mode, side: int, s: SenseSample) -> int:
    """Side to circle on after this tick's mode update."""
    grad = 0.0 if s.grad_dir is None else s.grad_dir
    return side_transition(int(prev), int(mode), side, grad, s.goal_bearing)


def target_heading(mode: Mode, s: SenseSample, side: int = 0) -> float:
    """Goal bearing, or the gradient tangent on ``side``.

    ``side=0`` picks the goal-closer tangent afresh from this sample.
    """
    if mode == Mode.GOAL_SEEK:
        return s.goal_bearing
    if s.grad_dir is None:
        raise MissingGradientError("circumnavigation needs a gradient direction")
    if side == 0:
        return circumnavigate_heading(s.grad_dir, s.goal_bearing)
    return tangent_heading(s.grad_dir, side)


def step(st: AgentState, target: float, params: AgentParams, dt: float) -> AgentState:
    """Drive straight if within the deadband of ``target``, else turn in place."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x, y, h = step_pose(
        st.position[0], st.position[1], st.heading, target,
        params.speed, params.turn_rate, params.heading_deadband, dt,
    )
    return replace(st, position=(x, y), heading=h)


# -- scalar core (compiled by numba in bycoms.kernel) -------------------------


def mode_transition(mode, g, has_grad, theta_fg, theta_rg, g_th):
    if mode == 1:
        if has_grad and g >= g_th and theta_fg <= HALF_PI:
            return 2
    elif has_grad and theta_rg < HALF_PI and theta_fg > HALF_PI:
        return 1
    return mode


def circumnavigate_side(grad_dir, goal_bearing):
    """+1 (ccw) or -1 (cw): the tangent closer to the goal; ties go ccw."""
    ccw = wrap_angle(grad_dir + HALF_PI)
    cw = wrap_angle(grad_dir - HALF_PI)
    if angle_between(cw, goal_bearing) < angle_between(ccw, goal_bearing):
        return -1
    return 1


def tangent_heading(grad_dir, side):
    if side < 0:
        return wrap_angle(grad_dir - HALF_PI)
    return wrap_angle(grad_dir + HALF_PI)


def circumnavigate_heading(grad_dir, goal_bearing):
    return tangent_heading(grad_dir, circumnavigate_side(grad_dir, goal_bearing))


def side_transition(prev_mode, mode, side, grad_dir, goal_bearing):
    if mode == 1:
        return 0
    if prev_mode == 1 or side == 0:
        return circumnavigate_side(grad_dir, goal_bearing)
    return side


def step_pose(x, y, heading, target, speed, turn_rate, deadband, dt):
    diff = wrap_angle(target - heading)
    if abs(diff) <= deadband:
        d = speed * dt
        return x + d * math.cos(heading), y + d * math.sin(heading), heading
    turn = turn_rate * dt
    if abs(diff) < turn:
        turn = abs(diff)
    if diff < 0:
        turn = -turn
    return x, y, wrap_angle(heading + turn)
