"""Offline SVG snapshots of a trial from its trace."""
from __future__ import annotations

import math
from pathlib import Path

from .sim import EventRecord, SimTrace, TickRecord

IMPASSABLE = "#9fd3e6"
PATH_COLOURS = ("#1f3b73", "#7a3b8f", "#2e7d32", "#b35c00", "#5d4037")


def _bounds(tr: SimTrace):
    terr = tr.header.get("terrain")
    if terr:
        return 0.0, 0.0, float(terr["width_cells"]), float(terr["height_cells"])
    cfg = tr.header.get("config", {})
    xs, ys = [], []
    for key in ("start", "goal"):
        if key in cfg:
            xs.append(cfg[key][0])
            ys.append(cfg[key][1])
    for e in cfg.get("emitters", []):
        xs.append(e[0])
        ys.append(e[1])
    for r in tr.records:
        xs.append(r.x)
        ys.append(r.y)
    if not xs:
        return 0.0, 0.0, 1.0, 1.0
    pad = 0.1 * max(max(xs) - min(xs), max(ys) - min(ys), 1e-3)
    return min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad


def _epsilon(tr: SimTrace) -> float | None:
    return tr.header.get("config", {}).get("epsilon")


def _star(cx, cy, r):
    pts = []
    for k in range(10):
        a = math.pi / 2 + k * math.pi / 5
        rr = r if k % 2 == 0 else 0.45 * r
        pts.append(f"{cx + rr * math.cos(a):.2f},{cy - rr * math.sin(a):.2f}")
    return " ".join(pts)


def render_svg(tr: SimTrace, upto: float | None = None, px: float | None = None) -> str:
    """Terrain, robot paths, stuck robots with their epsilon circles, start and goal.

    Only records with ``t <= upto`` are drawn when ``upto`` is given.
    """
    x0, y0, x1, y1 = _bounds(tr)
    if px is None:
        px = 600.0 / max(x1 - x0, y1 - y0)
    W, H = (x1 - x0) * px, (y1 - y0) * px

    def sx(x):
        return (x - x0) * px

    def sy(y):
        return H - (y - y0) * px

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" '
        f'viewBox="0 0 {W:.2f} {H:.2f}">',
        f'<rect width="{W:.2f}" height="{H:.2f}" fill="white"/>',
    ]
    terr = tr.header.get("terrain")
    if terr:
        for cy, row in enumerate(terr["rows"]):
            run_start = None
            for cx, ch in enumerate(row + "0"):
                if ch == "1" and run_start is None:
                    run_start = cx
                elif ch != "1" and run_start is not None:
                    out.append(f'<rect x="{sx(run_start):.2f}" y="{sy(cy + 1):.2f}" '
                               f'width="{(cx - run_start) * px:.2f}" height="{px:.2f}" '
                               f'fill="{IMPASSABLE}"/>')
                    run_start = None

    paths: dict[int, list] = {}
    stuck = []
    for r in tr.records:
        if upto is not None and r.t > upto:
            break
        if isinstance(r, TickRecord):
            paths.setdefault(r.robot, []).append((r.x, r.y))
        elif isinstance(r, EventRecord) and r.event == "Stuck":
            stuck.append((r.x, r.y))
    for robot, pts in paths.items():
        colour = PATH_COLOURS[robot % len(PATH_COLOURS)]
        d = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{d}" fill="none" stroke="{colour}" '
                   f'stroke-width="1" stroke-opacity="0.8"/>')

    eps = _epsilon(tr)
    emitters = tr.header.get("config", {}).get("emitters", [])
    for x, y in stuck + [tuple(e) for e in emitters]:
        if eps:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="{eps * px:.2f}" '
                       f'fill="none" stroke="#8e44ad" stroke-dasharray="3,2" stroke-width="0.8"/>')
        out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="#c0392b"/>')

    start = (terr or tr.header.get("config", {})).get("start")
    goal = (terr or tr.header.get("config", {})).get("goal")
    if start:
        cx, cy = sx(start[0]), sy(start[1])
        out.append(f'<path d="M{cx - 5:.2f},{cy - 5:.2f} L{cx + 5:.2f},{cy + 5:.2f} '
                   f'M{cx - 5:.2f},{cy + 5:.2f} L{cx + 5:.2f},{cy - 5:.2f}" '
                   f'stroke="black" stroke-width="2"/>')
    if goal:
        out.append(f'<polygon points="{_star(sx(goal[0]), sy(goal[1]), 8)}" fill="#f1c40f" '
                   f'stroke="black" stroke-width="0.8"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def frame_times(tr: SimTrace, every: int) -> list[float]:
    """Times of every ``every``-th tick, plus the final record time."""
    if every < 1:
        raise ValueError("every must be at least 1")
    times = sorted({r.t for r in tr.records if isinstance(r, TickRecord)})
    picked = times[every - 1::every]
    if tr.records and (not picked or picked[-1] < tr.records[-1].t):
        picked.append(tr.records[-1].t)
    return picked


def write_frames(tr: SimTrace, out_dir, every: int = 100) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, t in enumerate(frame_times(tr, every)):
        p = out_dir / f"frame_{k:05d}.svg"
        p.write_text(render_svg(tr, upto=t))
        paths.append(p)
    return paths
