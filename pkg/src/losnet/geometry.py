"""Polygonal free space, line-of-sight and visibility polygons.

Free space ``E`` is a closed set: the world polygon with the open interiors of
the obstacles removed. Points on obstacle boundaries are free, and a segment
that grazes an obstacle vertex or slides along an obstacle edge is visible.

Sign decisions go through the exact predicates in ``_predicates``; only the
coordinates of computed shadow vertices are subject to rounding. Boolean
operations on regions are delegated to shapely (GEOS).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, cmp_to_key
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.ops import polylabel

from ._predicates import cross_signs, dot_signs, orient, orient_signs
from .errors import EmptyRegion, PointOutsideFreeSpace, ValidationError

EPS_SNAP = 1e-9
EPS_AREA = 1e-7

_CHUNK = 4096


class Point2(NamedTuple):
    x: float
    y: float


def as_point(p) -> Point2:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"non-finite coordinate {p!r}")
    return Point2(x, y)


def _signed_area(pts: Sequence[Point2]) -> float:
    s = 0.0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, stored counterclockwise without a repeated closing vertex."""

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        pts = [as_point(v) for v in self.vertices]
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts.pop()
        welded: list[Point2] = []
        for q in pts:
            if welded and math.dist(welded[-1], q) < EPS_SNAP:
                continue
            welded.append(q)
        while len(welded) > 1 and math.dist(welded[0], welded[-1]) < EPS_SNAP:
            welded.pop()
        if len(welded) < 3:
            raise ValidationError(f"polygon needs at least 3 distinct vertices, got {len(welded)}")
        a = _signed_area(welded)
        if a == 0.0:
            raise ValidationError("polygon has zero area")
        if a < 0:
            welded.reverse()
        object.__setattr__(self, "vertices", tuple(welded))

    @classmethod
    def from_shapely(cls, poly: ShapelyPolygon) -> "Polygon":
        return cls(tuple(poly.exterior.coords))

    def to_shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.vertices)

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    def is_simple(self) -> bool:
        return bool(self.to_shapely().exterior.is_simple)


@dataclass(frozen=True, eq=False)
class Region:
    """A set of interior-disjoint polygonal parts, each possibly with holes."""

    parts: tuple[ShapelyPolygon, ...] = ()

    @classmethod
    def from_geometry(cls, geom) -> "Region":
        parts = []
        for g in shapely.get_parts(geom):
            if isinstance(g, ShapelyPolygon):
                if g.area >= EPS_AREA:
                    parts.append(g)
            elif g.geom_type in ("MultiPolygon", "GeometryCollection"):
                parts.extend(cls.from_geometry(g).parts)
        return cls(tuple(parts))

    @classmethod
    def from_polygon(cls, poly: Polygon) -> "Region":
        return cls((poly.to_shapely(),))

    @property
    def geometry(self) -> MultiPolygon:
        return MultiPolygon(list(self.parts))

    @property
    def is_empty(self) -> bool:
        return not self.parts

    @property
    def area(self) -> float:
        return float(sum(p.area for p in self.parts))

    def contains_point(self, q) -> bool:
        return any(p.intersects(shapely.Point(q[0], q[1])) for p in self.parts)

    def __len__(self):
        return len(self.parts)


@dataclass(frozen=True)
class Environment:
    """World polygon with polygonal obstacles; the free space is ``world - obstacles``."""

    world: Polygon
    obstacles: tuple[Polygon, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        world = self.world.to_shapely()
        if not world.is_valid:
            raise ValidationError("world polygon is not simple")
        obs = []
        for i, o in enumerate(self.obstacles):
            s = o.to_shapely()
            if not s.is_valid:
                raise ValidationError(f"obstacle {i} is not simple")
            if not world.contains_properly(s):
                raise ValidationError(f"obstacle {i} is not strictly inside the world")
            for j, prev in enumerate(obs):
                if s.intersection(prev).area > 0.0:
                    raise ValidationError(f"obstacles {j} and {i} overlap")
            obs.append(s)
        if isinstance(self.free, MultiPolygon):
            raise ValidationError("free space is not connected")

    @cached_property
    def free(self):
        g = self.world.to_shapely()
        if self.obstacles:
            g = g.difference(shapely.union_all([o.to_shapely() for o in self.obstacles]))
        return g

    @cached_property
    def _prepared_free(self):
        g = self.free
        shapely.prepare(g)
        return g

    @cached_property
    def _rings(self) -> list[list[Point2]]:
        # free space on the left of every directed edge
        rings = [list(self.world.vertices)]
        for o in self.obstacles:
            rings.append(list(reversed(o.vertices)))
        return rings

    @cached_property
    def _topology(self):
        pts, nxt, prv = [], [], []
        for ring in self._rings:
            base = len(pts)
            k = len(ring)
            for i, q in enumerate(ring):
                pts.append(q)
                nxt.append(base + (i + 1) % k)
                prv.append(base + (i - 1) % k)
        return np.array(pts, dtype=float), np.array(nxt), np.array(prv)

    @property
    def vertices(self) -> np.ndarray:
        return self._topology[0]

    @cached_property
    def reflex_vertices(self) -> np.ndarray:
        """Vertices where the free-space angle exceeds pi (candidate geodesic bends)."""
        V, nxt, prv = self._topology
        W, U = V[nxt], V[prv]
        # free wedge runs ccw from (w - v) to (u - v); reflex when that turn is clockwise
        c = cross_signs(V[:, 0], V[:, 1], W[:, 0], W[:, 1], V[:, 0], V[:, 1], U[:, 0], U[:, 1])
        return V[c < 0]

    @cached_property
    def bounds(self) -> tuple[float, float, float, float]:
        return tuple(self.world.to_shapely().bounds)

    @cached_property
    def area(self) -> float:
        return float(self.free.area)

    @cached_property
    def _vis_cache(self) -> dict:
        return {}


# ---------------------------------------------------------------------------
# membership and line of sight


def in_free_space_many(env: Environment, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    return shapely.intersects_xy(env._prepared_free, pts[:, 0], pts[:, 1])


def in_free_space(env: Environment, p) -> bool:
    return bool(in_free_space_many(env, [p])[0])


def _require_free(env, *pts):
    ok = in_free_space_many(env, pts)
    for p, good in zip(pts, ok):
        if not good:
            raise PointOutsideFreeSpace(p)


def _in_wedge(ca, cb, c):
    """Direction test against the closed free wedge at a boundary vertex.

    ``c`` is the sign of (w - v) x (u - v); ``ca`` of (w - v) x d; ``cb`` of d x (u - v).
    """
    return np.where(c > 0, (ca >= 0) & (cb >= 0), np.where(c < 0, (ca >= 0) | (cb >= 0), ca >= 0))


def _segments_clear(env: Environment, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Closed-segment containment in E for endpoint pairs already known to be in E."""
    V, nxt, prv = env._topology
    W, U = V[nxt], V[prv]
    vx, vy = V[None, :, 0], V[None, :, 1]
    wx, wy = W[None, :, 0], W[None, :, 1]
    ux, uy = U[None, :, 0], U[None, :, 1]
    wedge = cross_signs(vx, vy, wx, wy, vx, vy, ux, uy)[0]
    out = np.ones(len(A), dtype=bool)
    for lo in range(0, len(A), _CHUNK):
        a = A[lo : lo + _CHUNK]
        b = B[lo : lo + _CHUNK]
        ax, ay = a[:, 0:1], a[:, 1:2]
        bx, by = b[:, 0:1], b[:, 1:2]
        degenerate = (a[:, 0] == b[:, 0]) & (a[:, 1] == b[:, 1])
        s0 = orient_signs(ax, ay, bx, by, vx, vy)
        s1 = s0[:, nxt]
        s2 = orient_signs(vx, vy, wx, wy, ax, ay)
        s3 = orient_signs(vx, vy, wx, wy, bx, by)
        blocked = ((s0 * s1 < 0) & (s2 * s3 < 0)).any(axis=1)

        # segment passing through, starting at, or ending at a boundary vertex
        ri, ki = np.nonzero((s0 == 0) & ~degenerate[:, None])
        if len(ri):
            pax, pay, pbx, pby = ax[ri, 0], ay[ri, 0], bx[ri, 0], by[ri, 0]
            qx, qy = V[ki, 0], V[ki, 1]
            is_a = (qx == pax) & (qy == pay)
            is_b = (qx == pbx) & (qy == pby)
            inner = (dot_signs(pax, pay, qx, qy, pax, pay, pbx, pby) > 0) & (
                dot_signs(pbx, pby, qx, qy, pbx, pby, pax, pay) > 0
            )
            ca = cross_signs(qx, qy, W[ki, 0], W[ki, 1], pax, pay, pbx, pby)
            cb = -cross_signs(qx, qy, U[ki, 0], U[ki, 1], pax, pay, pbx, pby)
            c = wedge[ki]
            fwd = _in_wedge(ca, cb, c)
            back = _in_wedge(-ca, -cb, c)
            bad = (inner & ~(fwd & back)) | (is_a & ~fwd) | (is_b & ~back)
            if bad.any():
                blocked[np.unique(ri[bad])] = True

        # endpoint lying in the relative interior of an edge
        for sgn, px_, py_, sign_block in ((s2, ax, ay, -1), (s3, bx, by, 1)):
            ri, ki = np.nonzero((sgn == 0) & ~degenerate[:, None])
            if not len(ri):
                continue
            qx, qy = px_[ri, 0], py_[ri, 0]
            ex0, ey0, ex1, ey1 = V[ki, 0], V[ki, 1], W[ki, 0], W[ki, 1]
            inside = (dot_signs(ex0, ey0, qx, qy, ex0, ey0, ex1, ey1) > 0) & (
                dot_signs(ex1, ey1, qx, qy, ex1, ey1, ex0, ey0) > 0
            )
            side = cross_signs(ex0, ey0, ex1, ey1, ax[ri, 0], ay[ri, 0], bx[ri, 0], by[ri, 0])
            bad = inside & (side == sign_block)
            if bad.any():
                blocked[np.unique(ri[bad])] = True

        blocked &= ~degenerate
        out[lo : lo + _CHUNK] = ~blocked
    return out


def los_visible(env: Environment, a, b) -> bool:
    """True iff the closed segment ``ab`` lies in the free space."""
    a, b = as_point(a), as_point(b)
    _require_free(env, a, b)
    return bool(_segments_clear(env, np.array([a]), np.array([b]))[0])


def los_visible_many(env: Environment, a, targets) -> np.ndarray:
    """Vectorized :func:`los_visible` from one source; targets outside E are reported not visible."""
    a = as_point(a)
    _require_free(env, a)
    T = np.asarray(targets, dtype=float).reshape(-1, 2)
    ok = in_free_space_many(env, T)
    out = np.zeros(len(T), dtype=bool)
    if ok.any():
        A = np.broadcast_to(np.array(a, dtype=float), (int(ok.sum()), 2))
        out[ok] = _segments_clear(env, A, T[ok])
    return out


def segments_clear(env: Environment, A, B) -> np.ndarray:
    """Pairwise LoS for segment arrays; segments with an endpoint outside E are not clear."""
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    ok = in_free_space_many(env, A) & in_free_space_many(env, B)
    out = np.zeros(len(A), dtype=bool)
    if ok.any():
        out[ok] = _segments_clear(env, A[ok], B[ok])
    return out


# ---------------------------------------------------------------------------
# visibility polygon


def _angular_groups(p: Point2, pts: np.ndarray, idx: np.ndarray) -> list[list[int]]:
    """Sort vertex indices by exact angle around ``p``; collinear same-direction ones share a group."""
    px, py = p

    def half(i):
        dx, dy = pts[i, 0] - px, pts[i, 1] - py
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    halves = {int(i): half(i) for i in idx}

    def cmp(i, j):
        hi, hj = halves[i], halves[j]
        if hi != hj:
            return hi - hj
        return -orient(p, pts[i], pts[j])

    order = sorted((int(i) for i in idx), key=cmp_to_key(cmp))
    groups: list[list[int]] = []
    for i in order:
        if groups:
            j = groups[-1][0]
            if halves[i] == halves[j] and orient(p, pts[j], pts[i]) == 0:
                groups[-1].append(i)
                continue
        groups.append([i])
    return groups


def _first_hits(env: Environment, p: Point2, reps: np.ndarray, incident: np.ndarray):
    """Nearest blocking boundary point just ccw (left) and just cw (right) of each ray p -> rep."""
    V, nxt, prv = env._topology
    W = V[nxt]
    px, py = p
    D = len(reps)
    rx, ry = reps[:, 0:1], reps[:, 1:2]
    vx, vy = V[None, :, 0], V[None, :, 1]
    ux, uy = rx - px, ry - py
    S = orient_signs(px, py, rx, ry, vx, vy)
    S1 = S[:, nxt]
    usable = ~incident[None, :]

    # proper crossings of the ray's supporting line
    ex, ey = W[None, :, 0] - vx, W[None, :, 1] - vy
    o_edge = orient_signs(vx, vy, W[None, :, 0], W[None, :, 1], px, py)
    cs = cross_signs(vx, vy, W[None, :, 0], W[None, :, 1], px, py, rx, ry)
    crossing = (S * S1 < 0) & usable & ((-o_edge * cs) > 0)
    denom = ux * ey - uy * ex
    with np.errstate(divide="ignore", invalid="ignore"):
        t_cross = ((vx - px) * ey - (vy - py) * ex) / denom
        s_cross = ((vx - px) * uy - (vy - py) * ux) / denom
    t_cross = np.where(crossing, t_cross, np.inf)

    # vertices lying on the ray
    uu = ux * ux + uy * uy
    fwd = dot_signs(px, py, vx, vy, px, py, rx, ry) > 0
    on_ray = (S == 0) & fwd
    t_vert = ((vx - px) * ux + (vy - py) * uy) / uu
    side_next = np.where(usable, S1, 0)
    side_prev = np.where(usable[:, prv], S[:, prv], 0)
    left_v = on_ray & ((side_next > 0) | (side_prev > 0))
    right_v = on_ray & ((side_next < 0) | (side_prev < 0))

    out = []
    for vmask in (left_v, right_v):
        tv = np.where(vmask, t_vert, np.inf)
        kv = tv.argmin(axis=1)
        kc = t_cross.argmin(axis=1)
        rows = np.arange(D)
        best_v = tv[rows, kv]
        best_c = t_cross[rows, kc]
        pts = np.empty((D, 2))
        found = np.isfinite(best_v) | np.isfinite(best_c)
        use_v = best_v <= best_c
        pts[use_v] = V[kv[use_v]]
        cm = ~use_v
        s = np.clip(s_cross[rows[cm], kc[cm]], 0.0, 1.0)
        pts[cm] = V[kc[cm]] + s[:, None] * (W[kc[cm]] - V[kc[cm]])
        out.append((pts, found))
    return out


def visibility_polygon(env: Environment, p) -> Polygon:
    """Visibility polygon of ``p`` in the free space.

    Rays are cast through every boundary vertex; for each ray the nearest
    boundary hit is taken on both angular sides, so between consecutive
    critical directions the polygon follows a single boundary edge.
    """
    p = as_point(p)
    _require_free(env, p)
    cached = env._vis_cache.get(p)
    if cached is not None:
        return cached

    V, nxt, prv = env._topology
    W = V[nxt]
    px, py = p
    K = len(V)
    on_line = orient_signs(V[:, 0], V[:, 1], W[:, 0], W[:, 1], np.full(K, px), np.full(K, py)) == 0
    incident = on_line & (dot_signs(V[:, 0], V[:, 1], px, py, V[:, 0], V[:, 1], W[:, 0], W[:, 1]) >= 0)
    incident &= dot_signs(W[:, 0], W[:, 1], px, py, W[:, 0], W[:, 1], V[:, 0], V[:, 1]) >= 0

    others = np.nonzero(~((V[:, 0] == px) & (V[:, 1] == py)))[0]
    groups = _angular_groups(p, V, others)
    reps = V[[g[0] for g in groups]]
    (left_pts, left_ok), (right_pts, right_ok) = _first_hits(env, p, reps, incident)

    D = len(groups)
    use_left = left_ok.copy()
    use_right = right_ok.copy()
    order = list(range(D))
    boundary = bool(incident.any())
    if boundary:
        k0 = int(np.nonzero(incident)[0][0])
        at_vertex = V[k0, 0] == px and V[k0, 1] == py
        if not at_vertex and V[nxt[k0], 0] == px and V[nxt[k0], 1] == py:
            k0, at_vertex = int(nxt[k0]), True
        start_v = int(nxt[k0])
        end_v = int(prv[k0]) if at_vertex else k0
        group_of = {i: gi for gi, g in enumerate(groups) for i in g}
        gs, ge = group_of[start_v], group_of[end_v]
        span = (ge - gs) % D
        order = [(gs + i) % D for i in range(span + 1)]
        use_right[gs] = False
        use_left[ge] = False

    ring: list[tuple[float, float]] = [p] if boundary else []
    for gi in order:
        if use_right[gi]:
            ring.append((float(right_pts[gi, 0]), float(right_pts[gi, 1])))
        if use_left[gi]:
            ring.append((float(left_pts[gi, 0]), float(left_pts[gi, 1])))
    cleaned: list[tuple[float, float]] = []
    for q in ring:
        if cleaned and math.dist(cleaned[-1], q) < EPS_SNAP:
            continue
        cleaned.append(q)
    while len(cleaned) > 1 and math.dist(cleaned[0], cleaned[-1]) < EPS_SNAP:
        cleaned.pop()
    poly = Polygon(tuple(cleaned))
    env._vis_cache[p] = poly
    return poly


def visibility_region(env: Environment, p) -> Region:
    poly = visibility_polygon(env, p).to_shapely()
    if not poly.is_valid:
        poly = shapely.make_valid(poly)
    return Region.from_geometry(poly)


# ---------------------------------------------------------------------------
# regions


def region_boolean(op: str, a: Region, b: Region) -> Region:
    ga, gb = a.geometry, b.geometry
    if op == "intersect":
        g = shapely.intersection(ga, gb)
    elif op == "union":
        g = shapely.union(ga, gb)
    elif op == "difference":
        g = shapely.difference(ga, gb)
    else:
        raise ValueError(f"unknown boolean op {op!r}")
    return Region.from_geometry(g)


def union_all(regions: Iterable[Region]) -> Region:
    geoms = [r.geometry for r in regions]
    if not geoms:
        return Region()
    return Region.from_geometry(shapely.union_all(geoms))


def intersect_all(regions: Iterable[Region]) -> Region:
    it = iter(regions)
    try:
        acc = next(it).geometry
    except StopIteration:
        raise ValueError("intersect_all needs at least one region")
    for r in it:
        acc = shapely.intersection(acc, r.geometry)
        if acc.is_empty:
            break
    return Region.from_geometry(acc)


def area(r) -> float:
    if isinstance(r, Polygon):
        return r.area
    return r.area


def centroid(p) -> Point2:
    g = p.to_shapely() if isinstance(p, Polygon) else p
    c = g.centroid
    return Point2(float(c.x), float(c.y))


def distance(r: Region, q) -> float:
    """Euclidean distance from ``q`` to the region (0 inside)."""
    if r.is_empty:
        return math.inf
    return float(r.geometry.distance(shapely.Point(q[0], q[1])))


def largest_part(r: Region) -> Region:
    """Single-part region holding the largest part; equal areas go to the smaller centroid (x, y)."""
    if r.is_empty:
        raise EmptyRegion("largest_part of an empty region")

    def key(part):
        c = part.centroid
        return (-round(part.area / EPS_AREA), c.x, c.y)

    return Region((min(r.parts, key=key),))


def standing_point(r: Region) -> Point2:
    """Pole of inaccessibility of the largest part."""
    part = largest_part(r).parts[0]
    tol = max(1e-6, 1e-3 * math.sqrt(part.area))
    q = polylabel(part, tolerance=tol)
    if not part.contains(q):
        q = part.representative_point()
    return Point2(float(q.x), float(q.y))


def environment_from_coords(world, obstacles=()) -> Environment:
    return Environment(Polygon(tuple(world)), tuple(Polygon(tuple(o)) for o in obstacles))


def box(x0, y0, x1, y1) -> Polygon:
    return Polygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))
