"""Plain-dict serialization of regions, paths and plans."""

from __future__ import annotations

import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from ..errors import ParseError
from ..geometry import Region
from ..motion.planner import Path
from ..motion.tour import Tour
from ..placement import DeploymentPlan
from ..recovery import RecoveryResult


def _ring(coords) -> list[list[float]]:
    pts = [[float(x), float(y)] for x, y in coords]
    return pts[:-1] if len(pts) > 1 and pts[0] == pts[-1] else pts


def region_to_list(r: Region) -> list[dict]:
    out = []
    for p in r.parts:
        p = shapely.normalize(p)
        out.append({"exterior": _ring(p.exterior.coords), "holes": [_ring(h.coords) for h in p.interiors]})
    return out


def region_from_list(parts, fieldpath="region") -> Region:
    try:
        polys = [ShapelyPolygon(p["exterior"], p.get("holes", [])) for p in parts]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed region: {exc}", field=fieldpath) from None
    return Region(tuple(polys))


def path_to_dict(p: Path | None):
    if p is None:
        return None
    d = {"length": p.length, "waypoints": [[float(x), float(y)] for x, y in p.waypoints]}
    if p.poses:
        d["poses"] = [list(q) for q in p.poses]
    return d


def tour_to_dict(t: Tour | None):
    if t is None:
        return None
    return {
        "path": path_to_dict(t.path),
        "visits": {str(k): v for k, v in sorted(t.visits.items())},
        "order": list(t.order),
    }


def recovery_to_dict(res: RecoveryResult, vehicle_ids=None, unit_ids=None) -> dict:
    vid = (lambda i: vehicle_ids[i]) if vehicle_ids else (lambda i: i)
    uid = (lambda j: unit_ids[j]) if unit_ids else (lambda j: j)
    return {
        "kind": "recovery",
        "success": res.success,
        "failed_unit": None if res.failed_unit is None else uid(res.failed_unit),
        "cost": res.cost,
        "moves": [
            {
                "vehicle": vid(mv.vehicle),
                "unit": uid(mv.unit),
                "anchor": None if mv.anchor is None else vid(mv.anchor),
                "goal": list(mv.goal),
                "goal_region": region_to_list(mv.goal_region),
                "path": path_to_dict(mv.path),
                "cost": mv.cost,
            }
            for mv in res.moves
        ],
    }


def deployment_to_dict(plan: DeploymentPlan, unit_ids=None) -> dict:
    uid = (lambda j: unit_ids[j]) if unit_ids else (lambda j: j)
    return {
        "kind": "placement",
        "case": plan.case,
        "n_vehicles": plan.n_vehicles,
        "cover": [
            {"label": sorted(uid(u) for u in f.label), "score": f.score, "polygon": region_to_list(f.polygon)}
            for f in plan.cover.selected
        ],
        "static_assignment": {str(v): f for v, f in sorted(plan.static_assignment.items())},
        "positions": {str(v): [float(p[0]), float(p[1])] for v, p in sorted(plan.positions.items())},
        "patroller": plan.patroller,
        "uncovered": list(plan.uncovered),
        "component_polygons": [region_to_list(r) for r in plan.component_polygons],
        "tour_vertices": [region_to_list(r) for r in plan.tour_vertices],
        "tour_order": list(plan.tour_order),
        "tour": tour_to_dict(plan.tour),
    }
