"""Inverse-square virtual potential field emitted by stuck robots."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

DELTA_MIN = 1e-6


class DegeneratePointError(ValueError):
    """Gradient requested at (or within DELTA_MIN of) a source."""


@dataclass(frozen=True)
class FieldSource:
    position: tuple[float, float]
    strength_c: float = 1.0

    def __post_init__(self):
        if not self.strength_c > 0:
            raise ValueError("strength_c must be positive")


@dataclass
class FieldSet:
    """Sources in deployment order. Only ``add`` mutates it."""

    sources: list[FieldSource] = field(default_factory=list)

    def add(self, source: FieldSource) -> None:
        self.sources.append(source)

    def __len__(self):
        return len(self.sources)

    def __iter__(self):
        return iter(self.sources)


def strength_at(fs: FieldSet, p) -> float:
    px, py = p
    g = 0.0
    floor = DELTA_MIN * DELTA_MIN
    for s in fs.sources:
        dx = px - s.position[0]
        dy = py - s.position[1]
        d2 = dx * dx + dy * dy
        g += s.strength_c / (d2 if d2 > floor else floor)
    return g


def gradient_at(fs: FieldSet, p) -> tuple[float, float]:
    """Analytic gradient of ``strength_at``; points toward a lone source."""
    px, py = p
    gx = gy = 0.0
    floor = DELTA_MIN * DELTA_MIN
    for s in fs.sources:
        dx = px - s.position[0]
        dy = py - s.position[1]
        d2 = dx * dx + dy * dy
        if d2 <= floor:
            raise DegeneratePointError(f"point {p} coincides with source at {s.position}")
        k = -2.0 * s.strength_c / (d2 * d2)
        gx += k * dx
        gy += k * dy
    return gx, gy


def epsilon_to_threshold(epsilon: float, c: float = 1.0) -> float:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return c / (epsilon * epsilon)


def threshold_to_epsilon(g_th: float, c: float = 1.0) -> float:
    if not g_th > 0:
        raise ValueError(f"threshold must be positive, got {g_th}")
    return math.sqrt(c / g_th)
