"""Deterministic SVG rendering of an environment, agents and overlays."""

from __future__ import annotations

from xml.sax.saxutils import escape

from ..connectivity import SystemState, build_relay_graph, build_unit_graph
from ..geometry import Environment, Polygon, Region
from ..motion.planner import Path
from ..motion.tour import Tour

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _f(v: float) -> str:
    s = f"{float(v):.6f}"
    return "0.000000" if s == "-0.000000" else s


def _ring_d(coords) -> str:
    pts = list(coords)
    if len(pts) > 1 and tuple(pts[0]) == tuple(pts[-1]):
        pts = pts[:-1]
    head, *rest = pts
    return "M " + f"{_f(head[0])} {_f(head[1])}" + "".join(f" L {_f(x)} {_f(y)}" for x, y in rest) + " Z"


def _shape_d(obj) -> str:
    if isinstance(obj, Polygon):
        return _ring_d(obj.vertices)
    parts = []
    for p in obj.parts:
        parts.append(_ring_d(p.exterior.coords))
        parts.extend(_ring_d(h.coords) for h in p.interiors)
    return " ".join(parts)


def _polyline(pts) -> str:
    return " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)


def render_svg(env: Environment, state: SystemState | None = None, overlays: dict | None = None) -> str:
    """SVG 1.1 document; identical inputs give byte-identical output.

    ``overlays`` keys (all optional): ``visibility``, ``faces``, ``gamma``
    (lists of Region), ``paths`` (list of Path), ``tour`` (Tour), ``graphs``
    (bool, draws relay and unit edges for ``state``), ``labels`` (dict of
    ``(x, y) -> text``).
    """
    overlays = overlays or {}
    x0, y0, x1, y1 = env.bounds
    w, h = x1 - x0, y1 - y0
    m = 0.05 * max(w, h)
    scale = 800.0 / max(w + 2 * m, h + 2 * m)
    stroke = _f(1.5 / scale)
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f((w + 2 * m) * scale)}" '
        f'height="{_f((h + 2 * m) * scale)}" viewBox="{_f(x0 - m)} {_f(-(y1 + m))} {_f(w + 2 * m)} {_f(h + 2 * m)}">',
        # flip y so the world is drawn with y pointing up
        f'<g transform="matrix(1 0 0 -1 0 0)" stroke-width="{stroke}">',
        f'<path id="world" d="{_ring_d(env.world.vertices)}" fill="#ffffff" stroke="#000000"/>',
    ]
    for i, o in enumerate(env.obstacles):
        out.append(f'<path id="obstacle-{i}" d="{_ring_d(o.vertices)}" fill="#808080" stroke="#000000"/>')
    for key, opacity in (("visibility", "0.15"), ("faces", "0.25"), ("gamma", "0.45")):
        for i, r in enumerate(overlays.get(key, ())):
            if isinstance(r, Region) and r.is_empty:
                continue
            c = _PALETTE[i % len(_PALETTE)]
            out.append(
                f'<path class="{key}" d="{_shape_d(r)}" fill="{c}" fill-opacity="{opacity}" '
                f'fill-rule="evenodd" stroke="{c}"/>'
            )
    if state is not None and overlays.get("graphs"):
        q, u = state.vehicle_points(), state.unit_points()
        pts = list(map(tuple, q)) + list(map(tuple, u))
        for cls, g in (("relay-edge", build_relay_graph(state, env)), ("unit-edge", build_unit_graph(state, env))):
            for a, b in g.edges():
                out.append(f'<polyline class="{cls}" points="{_polyline([pts[a], pts[b]])}" fill="none" stroke="#444444"/>')
    for i, p in enumerate(overlays.get("paths", ())):
        if isinstance(p, Path) and len(p.waypoints) > 1:
            out.append(f'<polyline class="path" points="{_polyline(p.waypoints)}" fill="none" stroke="#d62728"/>')
    tour = overlays.get("tour")
    if isinstance(tour, Tour) and len(tour.path.waypoints) > 1:
        out.append(f'<polyline class="tour" points="{_polyline(tour.path.waypoints)}" fill="none" stroke="#9467bd"/>')
    if state is not None:
        r = _f(0.01 * max(w, h))
        for i, v in enumerate(state.vehicles):
            out.append(f'<circle class="vehicle" id="vehicle-{i}" cx="{_f(v.x)}" cy="{_f(v.y)}" r="{r}" fill="#1f77b4"/>')
        for j, p in enumerate(state.units):
            out.append(f'<circle class="unit" id="unit-{j}" cx="{_f(p.x)}" cy="{_f(p.y)}" r="{r}" fill="#2ca02c"/>')
    out.append("</g>")
    size = _f(0.03 * max(w, h))
    for (x, y), text in sorted(overlays.get("labels", {}).items()):
        out.append(f'<text x="{_f(x)}" y="{_f(-y)}" font-size="{size}">{escape(str(text))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
