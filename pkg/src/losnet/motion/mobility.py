"""Unit mobility models: random waypoint and nomadic (group) motion.

Both models own a numpy ``Generator`` so a run is reproducible from its seed;
``clone()`` gives an independent copy for parallel rollouts.
"""

from __future__ import annotations

import copy
import math

import numpy as np

from ..connectivity import SystemState
from ..geometry import Environment, Point2, in_free_space_many, los_visible_many

DEFAULT_SPEED = (0.5, 1.5)
DEFAULT_GROUP_RADIUS = 2.0
_MAX_TRIES = 200


def _sample_free(env: Environment, rng: np.random.Generator, k: int = 64) -> np.ndarray:
    x0, y0, x1, y1 = env.bounds
    for _ in range(_MAX_TRIES):
        pts = np.column_stack([rng.uniform(x0, x1, k), rng.uniform(y0, y1, k)])
        ok = in_free_space_many(env, pts)
        if ok.any():
            return pts[ok]
    raise RuntimeError("could not sample the free space")


class _Walker:
    """Random-waypoint walker that only heads for waypoints in direct line of sight."""

    def __init__(self, pos, speed_range, env, rng):
        self.pos = np.asarray(pos, dtype=float)
        self.speed_range = speed_range
        self.waypoint = None
        self.speed = 0.0
        self._redraw(env, rng)

    def _redraw(self, env, rng):
        lo, hi = self.speed_range
        self.speed = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
        for _ in range(_MAX_TRIES // 10):
            cand = _sample_free(env, rng)
            vis = los_visible_many(env, self.pos, cand)
            if vis.any():
                self.waypoint = cand[int(np.argmax(vis))]
                return
        self.waypoint = self.pos.copy()

    def advance(self, dt, env, rng):
        if self.speed <= 0:
            return
        gap = self.waypoint - self.pos
        dist = float(np.hypot(*gap))
        reach = self.speed * dt
        if dist <= reach:
            self.pos = self.waypoint.copy()
            self._redraw(env, rng)
        else:
            self.pos = self.pos + gap * (reach / dist)


class RandomWaypoint:
    name = "random_waypoint"

    def __init__(self, env: Environment, units, speed=DEFAULT_SPEED, seed: int = 0):
        self.env = env
        self.speed = (float(speed[0]), float(speed[1]))
        self.rng = np.random.default_rng(seed)
        self.walkers = [_Walker(u, self.speed, env, self.rng) for u in units]

    def clone(self) -> "RandomWaypoint":
        return copy.deepcopy(self)

    def step(self, state: SystemState, dt: float) -> SystemState:
        if dt <= 0 or self.speed[1] <= 0:
            return state
        for w, u in zip(self.walkers, state.units):
            w.pos = np.asarray(u, dtype=float)
            w.advance(dt, self.env, self.rng)
        return state.with_units(Point2(float(w.pos[0]), float(w.pos[1])) for w in self.walkers)


class Nomadic:
    """Groups follow a random-waypoint reference point; members jitter around it.

    Member offsets do a bounded random walk (step at most ``speed * dt``)
    clipped to the group radius. Offsets that land outside the free space are
    redrawn; after repeated failures the member is pulled towards the
    reference point, which always lies in free space.
    """

    name = "nomadic"

    def __init__(
        self,
        env: Environment,
        units,
        groups=None,
        speed=DEFAULT_SPEED,
        group_radius: float = DEFAULT_GROUP_RADIUS,
        seed: int = 0,
    ):
        self.env = env
        self.speed = (float(speed[0]), float(speed[1]))
        self.radius = float(group_radius)
        self.rng = np.random.default_rng(seed)
        pts = np.asarray(units, dtype=float).reshape(-1, 2)
        self.groups = [list(g) for g in groups] if groups else ([list(range(len(pts)))] if len(pts) else [])
        self.refs = []
        for g in self.groups:
            c = pts[g].mean(axis=0)
            if not in_free_space_many(env, c[None, :])[0]:
                c = pts[g[0]]
            self.refs.append(_Walker(c, self.speed, env, self.rng))

    def clone(self) -> "Nomadic":
        return copy.deepcopy(self)

    def step(self, state: SystemState, dt: float) -> SystemState:
        if dt <= 0 or self.speed[1] <= 0:
            return state
        pts = state.unit_points().copy()
        for g, ref in zip(self.groups, self.refs):
            old_ref = ref.pos.copy()
            ref.advance(dt, self.env, self.rng)
            jitter = ref.speed * dt
            for u in g:
                offset = pts[u] - old_ref
                pts[u] = self._place(ref.pos, offset, jitter, pts[u])
        return state.with_units(Point2(float(x), float(y)) for x, y in pts)

    def _place(self, ref, offset, jitter, fallback):
        for _ in range(_MAX_TRIES // 10):
            ang = self.rng.uniform(0.0, 2 * math.pi)
            r = jitter * math.sqrt(self.rng.uniform())
            new = offset + r * np.array([math.cos(ang), math.sin(ang)])
            norm = float(np.hypot(*new))
            if norm > self.radius:
                new *= self.radius / norm
            cand = ref + new
            if in_free_space_many(self.env, cand[None, :])[0]:
                return cand
        norm = float(np.hypot(*offset))
        if norm > self.radius:
            offset = offset * (self.radius / norm)
        for s in (0.5, 0.25, 0.0):
            cand = ref + s * offset
            if in_free_space_many(self.env, cand[None, :])[0]:
                return cand
        return fallback


def make_model(kind: str, env: Environment, units, *, speed=DEFAULT_SPEED, group_radius=DEFAULT_GROUP_RADIUS, groups=None, seed=0):
    if kind == "random_waypoint":
        return RandomWaypoint(env, units, speed=speed, seed=seed)
    if kind == "nomadic":
        return Nomadic(env, units, groups=groups, speed=speed, group_radius=group_radius, seed=seed)
    if kind in ("static", "none"):
        return None
    raise ValueError(f"unknown mobility model {kind!r}")


def mobility_step(model, state: SystemState, dt: float) -> SystemState:
    """Advance the units by ``dt`` seconds; vehicles are left untouched."""
    if model is None:
        return state
    return model.step(state, dt)
