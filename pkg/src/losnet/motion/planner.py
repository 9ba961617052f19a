"""Shortest paths in the free space on a visibility graph of reflex vertices.

Sources and targets may be points or regions. For a region the path ends at
the first boundary point reached: either a region vertex or the closest point
of a region edge as seen from the last bend, which makes the returned length
the exact geodesic distance up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely

from ..errors import NoPath
from ..geometry import (
    Environment,
    Point2,
    Region,
    as_point,
    in_free_space_many,
    los_visible_many,
)


@dataclass(frozen=True)
class Path:
    waypoints: tuple[Point2, ...]
    length: float
    poses: tuple[tuple[float, float, float], ...] | None = None

    @property
    def start(self) -> Point2:
        return self.waypoints[0]

    @property
    def end(self) -> Point2:
        return self.waypoints[-1]

    def final_heading(self, default: float = 0.0) -> float:
        if self.poses:
            return self.poses[-1][2] % (2 * math.pi)
        for a, b in zip(reversed(self.waypoints[:-1]), reversed(self.waypoints[1:])):
            if a != b:
                return math.atan2(b[1] - a[1], b[0] - a[0]) % (2 * math.pi)
        return default

    def sample(self, resolution: float) -> np.ndarray:
        """Points along the polyline no further apart than ``resolution``, waypoints included."""
        pts = np.asarray(self.waypoints, dtype=float)
        out = [pts[:1]]
        for a, b in zip(pts[:-1], pts[1:]):
            seg = float(np.hypot(*(b - a)))
            k = max(1, int(math.ceil(seg / resolution)))
            t = np.arange(1, k + 1)[:, None] / k
            out.append(a + t * (b - a))
        return np.vstack(out)

    def concat(self, other: "Path") -> "Path":
        if not self.waypoints:
            return other
        tail = other.waypoints[1:] if other.waypoints[0] == self.waypoints[-1] else other.waypoints
        return Path(self.waypoints + tuple(tail), self.length + other.length)


@dataclass(frozen=True)
class DubinsParams:
    wheelbase: float = 0.5
    max_steer: float = 0.6
    speed: float = 1.0

    def __post_init__(self):
        if self.wheelbase <= 0:
            raise ValueError("wheelbase must be positive")
        if not 0 < abs(self.max_steer) < math.pi / 2:
            raise ValueError("max_steer must lie in (0, pi/2)")
        if self.speed <= 0:
            raise ValueError("speed must be positive")

    @property
    def turning_radius(self) -> float:
        return self.wheelbase / math.tan(abs(self.max_steer))


@dataclass(frozen=True)
class PlannerConfig:
    kind: str = "visgraph"  # "visgraph" | "rrtstar"
    dubins: DubinsParams = field(default_factory=DubinsParams)
    max_iterations: int = 5000

    def __post_init__(self):
        if self.kind not in ("visgraph", "rrtstar"):
            raise ValueError(f"unknown planner {self.kind!r}")


class _Site:
    """A point or a region acting as path source/target."""

    def __init__(self, obj):
        if isinstance(obj, Region):
            self.point = None
            self.region = obj
            e0, e1 = [], []
            for part in obj.parts:
                for ring in [part.exterior, *part.interiors]:
                    c = np.asarray(ring.coords, dtype=float)
                    e0.append(c[:-1])
                    e1.append(c[1:])
            self.e0 = np.vstack(e0)
            self.e1 = np.vstack(e1)
            self.vertices = np.unique(self.e0, axis=0)
            self._geom = obj.geometry
        else:
            self.point = as_point(obj)
            self.region = None
            self.vertices = np.array([self.point], dtype=float)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        if self.point is not None:
            return (pts[:, 0] == self.point.x) & (pts[:, 1] == self.point.y)
        return shapely.intersects_xy(self._geom, pts[:, 0], pts[:, 1])

    def candidates(self, x: np.ndarray) -> np.ndarray:
        if self.point is not None:
            return self.vertices
        d = self.e1 - self.e0
        dd = (d * d).sum(axis=1)
        t = np.clip(((x - self.e0) * d).sum(axis=1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        return np.vstack([self.e0 + t[:, None] * d, self.vertices])


def _reflex_graph(env: Environment):
    cache = env.__dict__.get("_reflex_graph")
    if cache is None:
        R = env.reflex_vertices
        n = len(R)
        W = np.full((n, n), np.inf)
        for i in range(n):
            vis = los_visible_many(env, R[i], R)
            d = np.hypot(*(R - R[i]).T)
            W[i, vis] = d[vis]
            W[i, i] = 0.0
        W = np.minimum(W, W.T)
        cache = (R, W)
        env.__dict__["_reflex_graph"] = cache
    return cache


def _best_entry(env: Environment, site: _Site, x: np.ndarray) -> tuple[float, np.ndarray | None]:
    """Shortest straight link from ``x`` to the site, via visible candidate points."""
    if site.contains(x[None, :])[0]:
        return 0.0, x
    cand = site.candidates(x)
    vis = los_visible_many(env, x, cand)
    if not vis.any():
        return math.inf, None
    d = np.hypot(*(cand - x).T)
    d[~vis] = np.inf
    k = int(np.argmin(d))
    return float(d[k]), cand[k]


def geodesic(env: Environment, source, target) -> Path:
    """Shortest path from a point/region ``source`` to a point/region ``target``."""
    src, dst = _Site(source), _Site(target)
    if src.point is not None and not in_free_space_many(env, src.vertices)[0]:
        raise NoPath(f"start {src.point} is outside the free space")
    if src.region is not None and dst.region is not None:
        if src.region.geometry.intersects(dst.region.geometry):
            p = src.region.geometry.intersection(dst.region.geometry).representative_point()
            return Path((Point2(p.x, p.y),), 0.0)
    if src.point is not None and dst.contains(src.vertices)[0]:
        return Path((src.point,), 0.0)

    R, WR = _reflex_graph(env)
    extra = [src.vertices]
    if dst.region is not None:
        extra.append(dst.vertices)
    X = np.vstack([R, *extra])
    X = X[in_free_space_many(env, X)]
    nr = len(R)
    N = len(X)
    W = np.full((N, N), np.inf)
    W[:nr, :nr] = WR
    for i in range(nr, N):
        vis = los_visible_many(env, X[i], X)
        d = np.hypot(*(X - X[i]).T)
        W[i, vis] = d[vis]
        W[vis, i] = d[vis]
    np.fill_diagonal(W, 0.0)

    d0 = np.full(N, np.inf)
    start_pt = [None] * N
    for i in range(N):
        d, c = _best_entry(env, src, X[i])
        d0[i], start_pt[i] = d, c
    # Dijkstra with per-node initial distances
    dist = d0.copy()
    pred = np.full(N, -1)
    done = np.zeros(N, dtype=bool)
    for _ in range(N):
        cand = np.where(done, np.inf, dist)
        u = int(np.argmin(cand))
        if not math.isfinite(cand[u]):
            break
        done[u] = True
        alt = dist[u] + W[u]
        better = (alt < dist) & ~done
        dist[better] = alt[better]
        pred[better] = u

    best, best_i, best_end = math.inf, -1, None
    for i in np.argsort(dist):
        if not math.isfinite(dist[i]) or dist[i] >= best:
            break
        d, c = _best_entry(env, dst, X[i])
        if dist[i] + d < best:
            best, best_i, best_end = dist[i] + d, int(i), c
    if best_i < 0:
        raise NoPath("target is not reachable from source")

    chain = []
    i = best_i
    while i >= 0:
        chain.append(i)
        i = int(pred[i])
    chain.reverse()
    pts = [tuple(start_pt[chain[0]])] + [tuple(X[i]) for i in chain] + [tuple(best_end)]
    way: list[Point2] = []
    for q in pts:
        q = Point2(float(q[0]), float(q[1]))
        if not way or way[-1] != q:
            way.append(q)
    length = sum(math.dist(a, b) for a, b in zip(way[:-1], way[1:]))
    return Path(tuple(way), length)


def plan_path(env: Environment, start, goal) -> Path:
    """Geodesic from ``start`` to the goal region (or point); ends where the goal is first touched."""
    return geodesic(env, as_point(start), goal)


def motion_cost(env: Environment, start, goal) -> float:
    return plan_path(env, start, goal).length


def region_distance(env: Environment, a: Region, b: Region) -> Path:
    return geodesic(env, a, b)


def plan_to_point(env: Environment, pose, target, region: Region | None, config: PlannerConfig, seed: int = 0) -> Path:
    """Path for a vehicle to a standing point, using the configured planner."""
    if config.kind == "rrtstar":
        from .dubins import plan_dubins

        return plan_dubins(env, pose, target, config.dubins, seed=seed, max_iterations=config.max_iterations)
    return plan_path(env, pose.point, target)
