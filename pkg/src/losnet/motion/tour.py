"""Closed patrol tours through an ordered list of regions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..geometry import Point2, Region, standing_point
from .planner import Path, geodesic


@dataclass(frozen=True)
class Tour:
    path: Path
    visits: dict = field(default_factory=dict)  # face index -> arc length of first entry
    order: tuple = ()

    @property
    def length(self) -> float:
        return self.path.length

    def duration(self, speed: float) -> float:
        """Tour horizon ``T`` at constant forward speed."""
        return self.path.length / speed

    def point_at(self, t: float) -> Point2:
        """Position after travelling arc length ``t`` (wraps around the loop)."""
        way = self.path.waypoints
        if len(way) == 1 or self.path.length == 0:
            return way[0]
        t = t % self.path.length
        for a, b in zip(way[:-1], way[1:]):
            seg = math.dist(a, b)
            if t <= seg:
                s = t / seg if seg else 0.0
                return Point2(a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
            t -= seg
        return way[-1]


def _inset(env, region: Region) -> Region:
    x0, y0, x1, y1 = env.bounds
    delta = 1e-6 * max(1.0, math.hypot(x1 - x0, y1 - y0))
    shrunk = Region.from_geometry(region.geometry.buffer(-delta))
    return region if shrunk.is_empty else shrunk


def patrol_tour(env, faces, max_rounds: int = 20) -> Tour:
    """Closed tour entering every region in the given order and returning to its start.

    The start point lies in the first region; it is moved to where the closing
    leg enters that region until it stops changing, so the loop does not pay
    for a detour through the first region's interior.
    """
    faces = list(faces)
    if not faces:
        raise ValueError("patrol_tour needs at least one region")
    targets = [_inset(env, f) for f in faces]
    start = standing_point(faces[0])
    if len(faces) == 1:
        return Tour(Path((start,), 0.0), {0: 0.0}, (0,))

    for _ in range(max_rounds):
        legs, cur = [], start
        for tgt in targets[1:]:
            leg = geodesic(env, cur, tgt)
            legs.append(leg)
            cur = leg.end
        back = geodesic(env, cur, targets[0])
        if math.dist(back.end, start) < 1e-9:
            break
        start = back.end
    legs.append(geodesic(env, cur, start))

    path = Path((start,), 0.0)
    visits = {0: 0.0}
    for i, leg in enumerate(legs[:-1], start=1):
        path = path.concat(leg)
        visits[i] = path.length
    path = path.concat(legs[-1])
    if path.waypoints[-1] != start:
        path = Path(path.waypoints + (start,), path.length)
    return Tour(path, visits, tuple(range(len(faces))))
