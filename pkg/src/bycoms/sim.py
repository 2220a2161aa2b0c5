"""Sequential-deployment trials on a grid terrain.

Robots leave the start one at a time. A robot that enters an impassable cell
(or leaves the grid) freezes and becomes a field source; the next robot is
deployed on the same tick. The trial ends when a robot reaches the goal, the
time budget is spent, or the last allowed robot gets stuck.

``run_trial`` here is the readable reference engine and the only one that
records traces. ``bycoms.kernel.run_trial_fast`` runs the same loop compiled.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .agent import (
    AgentParams,
    AgentState,
    Mode,
    NoiseConfig,
    sense,
    step,
    target_heading,
    update_mode,
    update_side,
)
from .field import FieldSet, FieldSource
from .terrain import GridTerrain

TRACE_FORMAT = "bycoms-trace"
TRACE_VERSION = 1


class Reason(Enum):
    REACHED = "Reached"
    TIMEOUT = "Timeout"
    ROBOTS_EXHAUSTED = "RobotsExhausted"


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 1.0
    c: float = 1.0
    dt: float = 0.1
    time_budget: float = 10000.0
    goal_tolerance: float = 1.0
    max_robots: int = 100
    noise: NoiseConfig = NoiseConfig()
    seed: int = 0
    speed: float = 1.0
    turn_rate: float = math.pi / 6
    heading_deadband: float = math.pi / 36

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.time_budget > 0:
            raise ValueError("time_budget must be positive")
        if not self.goal_tolerance > 0:
            raise ValueError("goal_tolerance must be positive")
        if self.max_robots < 1:
            raise ValueError("max_robots must be at least 1")
        self.agent_params()  # validates the rest

    def agent_params(self) -> AgentParams:
        return AgentParams(
            speed=self.speed,
            turn_rate=self.turn_rate,
            heading_deadband=self.heading_deadband,
            epsilon=self.epsilon,
            c=self.c,
        )

    @property
    def g_th(self) -> float:
        return self.c / (self.epsilon * self.epsilon)

    @property
    def max_ticks(self) -> int:
        return max(1, math.ceil(self.time_budget / self.dt - 1e-9))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = {
            "enabled": self.noise.enabled,
            "strength_factor_range": list(self.noise.strength_factor_range),
            "grad_angle_range": list(self.noise.grad_angle_range),
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        n = d.pop("noise", None)
        if n is not None:
            d["noise"] = NoiseConfig(
                enabled=n["enabled"],
                strength_factor_range=tuple(n["strength_factor_range"]),
                grad_angle_range=tuple(n["grad_angle_range"]),
            )
        return cls(**d)


@dataclass(frozen=True)
class SimResult:
    success: bool
    robots_deployed: int
    robots_stuck: int
    elapsed: float
    reason: Reason
    ticks: int = 0
    stuck_positions: tuple = ()


def _r9(v):
    return None if v is None else float(f"{v:.9g}")


@dataclass(frozen=True)
class TickRecord:
    t: float
    robot: int
    x: float
    y: float
    heading: float
    mode: int
    g: float
    grad_dir: float | None
    V: tuple | None = None
    V_ave: float | None = None

    def to_json(self) -> dict:
        d = {
            "t": self.t, "robot": self.robot, "x": self.x, "y": self.y,
            "heading": self.heading, "mode": self.mode, "g": self.g,
            "grad_dir": self.grad_dir,
        }
        if self.V is not None:
            d["V"] = list(self.V)
            d["V_ave"] = self.V_ave
        return d


@dataclass(frozen=True)
class EventRecord:
    t: float
    event: str
    robot: int
    x: float
    y: float

    def to_json(self) -> dict:
        return {"t": self.t, "event": self.event, "robot": self.robot, "x": self.x, "y": self.y}


TERMINAL_EVENTS = ("Reached", "Timeout", "Exhausted")


@dataclass
class SimTrace:
    """Tick and event records in emission order."""

    header: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @property
    def ticks(self) -> list[TickRecord]:
        return [r for r in self.records if isinstance(r, TickRecord)]

    @property
    def events(self) -> list[EventRecord]:
        return [r for r in self.records if isinstance(r, EventRecord)]

    def tick(self, t, robot, x, y, heading, mode, g, grad_dir, V=None, V_ave=None):
        self.records.append(TickRecord(
            _r9(t), robot, _r9(x), _r9(y), _r9(heading), int(mode), _r9(g), _r9(grad_dir),
            None if V is None else tuple(_r9(v) for v in V), _r9(V_ave),
        ))

    def event(self, t, kind, robot, x, y):
        self.records.append(EventRecord(_r9(t), kind, robot, _r9(x), _r9(y)))


# -- predicates -------------------------------------------------------------


def is_stuck(t: GridTerrain, p) -> bool:
    x, y = p
    if not (0.0 <= x < t.width_cells and 0.0 <= y < t.height_cells):
        return True
    return bool(t.cells[int(math.floor(y)), int(math.floor(x))])


def is_goal_reached(p, goal, tol: float) -> bool:
    dx = p[0] - goal[0]
    dy = p[1] - goal[1]
    return math.sqrt(dx * dx + dy * dy) <= tol


# -- engine -----------------------------------------------------------------


def terrain_header(t: GridTerrain) -> dict:
    return {
        "width_cells": t.width_cells,
        "height_cells": t.height_cells,
        "start": list(t.start),
        "goal": list(t.goal),
        "rows": ["".join(map(str, row)) for row in t.cells.tolist()],
    }


def run_trial(t: GridTerrain, cfg: SimConfig) -> tuple[SimResult, SimTrace]:
    params = cfg.agent_params()
    g_th = cfg.g_th
    rng = np.random.default_rng(cfg.seed)
    fs = FieldSet()
    trace = SimTrace(header={
        "format": TRACE_FORMAT, "version": TRACE_VERSION,
        "config": cfg.to_dict(), "terrain": terrain_header(t),
    })
    goal = t.goal
    heading0 = math.atan2(goal[1] - t.start[1], goal[0] - t.start[0])

    def deploy(time, idx):
        trace.event(time, "Deployed", idx, t.start[0], t.start[1])
        return AgentState(t.start, heading0)

    robot = 0
    deployed = 1
    stuck_positions = []
    state = deploy(0.0, robot)
    max_ticks = cfg.max_ticks
    ticks = 0
    reason = None
    while reason is None:
        s = sense(state.position, state.heading, fs, goal, cfg.noise, rng)
        mode = update_mode(state.mode, s, g_th)
        side = update_side(state.mode, mode, state.side, s)
        if mode == Mode.CIRCUMNAVIGATE and s.grad_dir is None:
            target = state.heading  # negligible gradient: hold course this tick
        else:
            target = target_heading(mode, s, side)
        state = step(AgentState(state.position, state.heading, mode, side=side), target,
                     params, cfg.dt)
        ticks += 1
        now = ticks * cfg.dt
        x, y = state.position
        trace.tick(now, robot, x, y, state.heading, mode, s.g, s.grad_dir)
        if is_stuck(t, state.position):
            trace.event(now, "Stuck", robot, x, y)
            fs.add(FieldSource((x, y), cfg.c))
            stuck_positions.append((x, y))
            if deployed >= cfg.max_robots:
                trace.event(now, "Exhausted", robot, x, y)
                reason = Reason.ROBOTS_EXHAUSTED
                break
            robot += 1
            deployed += 1
            state = deploy(now, robot)
        elif is_goal_reached(state.position, goal, cfg.goal_tolerance):
            trace.event(now, "Reached", robot, x, y)
            reason = Reason.REACHED
            break
        if ticks >= max_ticks:
            trace.event(now, "Timeout", robot, state.position[0], state.position[1])
            reason = Reason.TIMEOUT
    result = SimResult(
        success=reason is Reason.REACHED,
        robots_deployed=deployed,
        robots_stuck=len(stuck_positions),
        elapsed=ticks * cfg.dt,
        reason=reason,
        ticks=ticks,
        stuck_positions=tuple(stuck_positions),
    )
    return result, trace


# -- trace serialisation ----------------------------------------------------


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def serialize_trace(tr: SimTrace) -> bytes:
    lines = [_dump(tr.header)]
    lines.extend(_dump(r.to_json()) for r in tr.records)
    return ("\n".join(lines) + "\n").encode()


def load_trace(data: bytes | str) -> SimTrace:
    text = data.decode() if isinstance(data, (bytes, bytearray)) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise TraceFormatError("line 1: missing header")
    tr = SimTrace()
    for n, line in enumerate(lines, 1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {n}: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise TraceFormatError(f"line {n}: expected an object")
        if n == 1:
            if obj.get("format") != TRACE_FORMAT:
                raise TraceFormatError("line 1: not a bycoms trace header")
            tr.header = obj
            continue
        try:
            if "event" in obj:
                tr.records.append(EventRecord(obj["t"], obj["event"], obj["robot"], obj["x"], obj["y"]))
            else:
                V = obj.get("V")
                tr.records.append(TickRecord(
                    obj["t"], obj["robot"], obj["x"], obj["y"], obj["heading"],
                    obj["mode"], obj["g"], obj["grad_dir"],
                    None if V is None else tuple(V), obj.get("V_ave"),
                ))
        except KeyError as exc:
            raise TraceFormatError(f"line {n}: missing field {exc}") from None
    return tr
