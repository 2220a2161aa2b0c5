"""Continuous-space emulation of the sound-field robot.

A robot carries six microphones on a ring. Each microphone hears the sum of
the other robots' emissions (inverse-square intensity); the robot's own
emission is excluded by construction, standing in for per-frequency
separation. Mean and gradient estimates from the ring drive two P-control
laws and a differential-drive base. Lengths are in metres.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .agent import HALF_PI, Mode, NoiseConfig, side_transition, tangent_heading
from .angles import angle_between, wrap_angle
from .field import DELTA_MIN, FieldSet, FieldSource, gradient_at, strength_at
from .sim import TRACE_FORMAT, TRACE_VERSION, SimTrace

GRAD_EPS = 1e-12
FREQUENCY_TAGS = ("224Hz", "320Hz", "512Hz")


@dataclass(frozen=True)
class MicArray:
    mic_count: int = 6
    radius: float = 0.1

    def __post_init__(self):
        if self.mic_count != 6:
            raise ValueError("the estimator is defined for six microphones")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def offsets(self) -> np.ndarray:
        """Robot-frame microphone positions; microphone 1 on the +x axis."""
        a = 2.0 * np.pi * np.arange(self.mic_count) / self.mic_count
        return self.radius * np.stack([np.cos(a), np.sin(a)], axis=1)


@dataclass(frozen=True)
class AcousticParams:
    K_p: float = 100.0
    alpha: float = 1e-4
    V_target: float = 22000.0
    V_min: float = 15000.0
    v_m: float = 100.0
    k_v: float = 0.001  # m/s per volt: 0.1 m/s at v_m
    k_omega: float = 0.005  # rad/s per volt of right-left difference: 1 rad/s at u = v_m
    dt: float = 0.1

    def __post_init__(self):
        for name in ("K_p", "alpha", "V_target", "V_min", "v_m", "k_v", "k_omega", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class AcousticRobotState:
    position: tuple[float, float]
    heading: float
    mode: Mode = Mode.GOAL_SEEK
    source_gain: float = 1.0
    frequency_tag: str = FREQUENCY_TAGS[0]

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))
        if not self.source_gain > 0:
            raise ValueError("source_gain must be positive")


def calibrated_gain(epsilon: float, params: AcousticParams = AcousticParams()) -> float:
    """Emission gain at which a listener at distance ``epsilon`` reads V_target."""
    return params.V_target * epsilon * epsilon


def mic_positions(position, heading: float, array: MicArray) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    m = array.offsets
    return np.column_stack([
        position[0] + c * m[:, 0] - s * m[:, 1],
        position[1] + s * m[:, 0] + c * m[:, 1],
    ])


def mic_readings(position, heading: float, array: MicArray, others: FieldSet) -> np.ndarray:
    """V_1..V_6: summed inverse-square intensity of the other robots at each mic."""
    mics = mic_positions(position, heading, array)
    V = np.zeros(array.mic_count)
    floor = DELTA_MIN * DELTA_MIN
    for src in others:
        d2 = ((mics - np.asarray(src.position)) ** 2).sum(axis=1)
        V += src.strength_c / np.maximum(d2, floor)
    return V


def estimate_average(V) -> float:
    V = np.asarray(V, dtype=float)
    return float(V.sum() / len(V))


def estimate_gradient(V, array: MicArray, heading: float = 0.0):
    """World-frame gradient estimate and its direction (None if negligible)."""
    V = np.asarray(V, dtype=float)
    local = ((V - estimate_average(V))[:, None] * array.offsets).sum(axis=0)
    c, s = math.cos(heading), math.sin(heading)
    grad = np.array([c * local[0] - s * local[1], s * local[0] + c * local[1]])
    norm = math.sqrt(grad[0] ** 2 + grad[1] ** 2)
    direction = wrap_angle(math.atan2(grad[1], grad[0])) if norm >= GRAD_EPS else None
    return grad, direction


def contour_side(grad_dir: float, target: float) -> int:
    """+1 when the emitter is on the robot's left (counterclockwise orbit)."""
    return 1 if angle_between(target, wrap_angle(grad_dir - HALF_PI)) < HALF_PI else -1


def control_input(mode: Mode, angle: float, V_ave: float, params: AcousticParams,
                  side: int = 1) -> float:
    """P-control input; positive ``u`` turns the robot clockwise.

    ``angle`` is heading minus the desired direction, in (-pi, pi]. In
    circumnavigation the intensity error is added with sign ``side`` so that
    a too-loud reading always steers away from the emitter; ``side=+1`` is
    the counterclockwise orbit, for which this is ``K_p (angle + alpha V_e)``.
    """
    if mode == Mode.GOAL_SEEK:
        return params.K_p * angle
    V_e = V_ave - params.V_target
    return params.K_p * (angle + side * params.alpha * V_e)


def motor_step(st: AcousticRobotState, u: float, params: AcousticParams,
               dt: float | None = None) -> AcousticRobotState:
    """Left motor gets v_m + u, right gets v_m - u; first-order Euler."""
    dt = params.dt if dt is None else dt
    if not dt > 0:
        raise ValueError("dt must be positive")
    left = params.v_m + u
    right = params.v_m - u
    v = params.k_v * 0.5 * (left + right)
    omega = params.k_omega * (right - left)
    x = st.position[0] + v * math.cos(st.heading) * dt
    y = st.position[1] + v * math.sin(st.heading) * dt
    return AcousticRobotState((x, y), st.heading + omega * dt, st.mode,
                              st.source_gain, st.frequency_tag)


def acoustic_mode_switch(mode: Mode, V_ave: float, grad_dir: float | None,
                         goal_bearing: float, heading: float,
                         params: AcousticParams) -> Mode:
    if mode == Mode.GOAL_SEEK:
        if (grad_dir is not None and V_ave > params.V_target
                and angle_between(goal_bearing, grad_dir) < HALF_PI):
            return Mode.CIRCUMNAVIGATE
        return mode
    if V_ave < params.V_min:
        return Mode.GOAL_SEEK
    if (grad_dir is not None and angle_between(heading, goal_bearing) < HALF_PI
            and angle_between(grad_dir, goal_bearing) > HALF_PI):
        return Mode.GOAL_SEEK
    return mode


# -- closed loop ------------------------------------------------------------


@dataclass
class AcousticRun:
    reached: bool
    elapsed: float
    path: np.ndarray
    modes: np.ndarray
    trace: SimTrace = field(repr=False, default=None)


def run_acoustic(
    start,
    goal,
    emitters,
    epsilon: float = 0.5,
    params: AcousticParams = AcousticParams(),
    array: MicArray = MicArray(),
    sensing: str = "mics",
    noise: NoiseConfig = NoiseConfig(),
    seed: int = 0,
    time_budget: float = 200.0,
    goal_tolerance: float = 0.1,
) -> AcousticRun:
    """Drive one robot from ``start`` to ``goal`` past fixed emitters.

    ``sensing="mics"`` uses the six-microphone estimates; ``"exact"`` reads the
    field and its analytic gradient at the robot centre instead.
    """
    if sensing not in ("mics", "exact"):
        raise ValueError(f"unknown sensing mode {sensing!r}")
    gain = calibrated_gain(epsilon, params)
    others = FieldSet([FieldSource(tuple(map(float, e)), gain) for e in emitters])
    rng = np.random.default_rng(seed)
    bearing = math.atan2(goal[1] - start[1], goal[0] - start[0])
    st = AcousticRobotState(tuple(map(float, start)), bearing, source_gain=gain)
    trace = SimTrace(header={
        "format": TRACE_FORMAT, "version": TRACE_VERSION, "kind": "acoustic",
        "config": {
            "start": list(st.position), "goal": [float(goal[0]), float(goal[1])],
            "emitters": [list(s.position) for s in others], "epsilon": epsilon,
            "gain": gain, "sensing": sensing, "seed": seed,
            "time_budget": time_budget, "goal_tolerance": goal_tolerance,
            "noise": noise.enabled, "params": params.__dict__.copy(),
            "mic_radius": array.radius,
        },
    })
    trace.event(0.0, "Deployed", 0, *st.position)
    path = [st.position]
    modes = [int(st.mode)]
    max_ticks = max(1, math.ceil(time_budget / params.dt - 1e-9))
    reached = False
    ticks = 0
    side = 0
    while ticks < max_ticks:
        if sensing == "mics":
            V = mic_readings(st.position, st.heading, array, others)
            if noise.enabled:
                lo, hi = noise.strength_factor_range
                V = V * (lo + (hi - lo) * rng.random(len(V)))
            V_ave = estimate_average(V)
            _, grad_dir = estimate_gradient(V, array, st.heading)
        else:
            V = None
            V_ave = strength_at(others, st.position)
            gx, gy = gradient_at(others, st.position)
            grad_dir = math.atan2(gy, gx) if math.sqrt(gx * gx + gy * gy) >= GRAD_EPS else None
        goal_bearing = math.atan2(goal[1] - st.position[1], goal[0] - st.position[0])
        mode = acoustic_mode_switch(st.mode, V_ave, grad_dir, goal_bearing, st.heading, params)
        side = side_transition(int(st.mode), int(mode), side,
                               0.0 if grad_dir is None else grad_dir, goal_bearing)
        if mode == Mode.CIRCUMNAVIGATE and grad_dir is not None:
            target = tangent_heading(grad_dir, side)
            u = control_input(mode, wrap_angle(st.heading - target), V_ave, params,
                              contour_side(grad_dir, target))
        elif mode == Mode.CIRCUMNAVIGATE:
            u = 0.0
        else:
            u = control_input(mode, wrap_angle(st.heading - goal_bearing), V_ave, params)
        st = motor_step(AcousticRobotState(st.position, st.heading, mode, st.source_gain,
                                           st.frequency_tag), u, params)
        ticks += 1
        now = ticks * params.dt
        path.append(st.position)
        modes.append(int(mode))
        trace.tick(now, 0, st.position[0], st.position[1], st.heading, mode, V_ave,
                   grad_dir, V=None if V is None else V.tolist(), V_ave=V_ave)
        dx = st.position[0] - goal[0]
        dy = st.position[1] - goal[1]
        if math.sqrt(dx * dx + dy * dy) <= goal_tolerance:
            reached = True
            trace.event(now, "Reached", 0, *st.position)
            break
    if not reached:
        trace.event(ticks * params.dt, "Timeout", 0, *st.position)
    return AcousticRun(reached, ticks * params.dt, np.array(path), np.array(modes), trace)


def cross_track_deviation(path: np.ndarray, reference: np.ndarray) -> float:
    """Largest distance from a point of ``path`` to the polyline ``reference``."""
    a = reference[:-1]
    b = reference[1:]
    ab = b - a
    L2 = (ab ** 2).sum(axis=1)
    L2 = np.where(L2 > 0, L2, 1.0)
    worst = 0.0
    for p in path:
        s = np.clip(((p - a) * ab).sum(axis=1) / L2, 0.0, 1.0)
        d = np.sqrt((((a + s[:, None] * ab) - p) ** 2).sum(axis=1)).min()
        worst = max(worst, float(d))
    return worst
