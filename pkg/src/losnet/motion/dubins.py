"""Dubins curves and a seeded RRT* planner for a car-like vehicle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BudgetExhausted
from ..geometry import Environment, Point2, Region, in_free_space_many, segments_clear, standing_point
from .planner import DubinsParams, Path

TWO_PI = 2.0 * math.pi


def _mod(a: float) -> float:
    return a - TWO_PI * math.floor(a / TWO_PI)


def _arc(a: float) -> float:
    """Turn angle in [0, 2pi), with rounding just below a full circle read as no turn."""
    a = _mod(a)
    return 0.0 if a > TWO_PI - 1e-9 else a


@dataclass(frozen=True)
class DubinsPath:
    start: tuple[float, float, float]
    word: str  # e.g. "LSL", or "LS" for point-reaching curves
    segments: tuple[float, ...]  # normalized segment lengths
    rho: float

    @property
    def length(self) -> float:
        return sum(self.segments) * self.rho

    def sample(self, step: float) -> np.ndarray:
        """Poses (x, y, theta) every ``step`` metres of arc, endpoint included."""
        total = self.length
        k = max(1, int(math.ceil(total / step)))
        out = np.array([self.pose_at(total * i / k) for i in range(k + 1)])
        return out

    def pose_at(self, s: float) -> tuple[float, float, float]:
        x, y, th = self.start
        rho = self.rho
        remaining = s / rho
        for kind, seg in zip(self.word, self.segments):
            d = min(seg, remaining)
            x, y, th = _advance(x, y, th, kind, d, rho)
            remaining -= d
            if remaining <= 0:
                break
        return x, y, th

    @property
    def end(self) -> tuple[float, float, float]:
        return self.pose_at(self.length)


def _advance(x, y, th, kind, d, rho):
    if kind == "S":
        return x + rho * d * math.cos(th), y + rho * d * math.sin(th), th
    if kind == "L":
        return (
            x + rho * (math.sin(th + d) - math.sin(th)),
            y + rho * (-math.cos(th + d) + math.cos(th)),
            th + d,
        )
    return (
        x + rho * (-math.sin(th - d) + math.sin(th)),
        y + rho * (math.cos(th - d) - math.cos(th)),
        th - d,
    )


def _words(alpha, beta, d):
    sa, sb = math.sin(alpha), math.sin(beta)
    ca, cb = math.cos(alpha), math.cos(beta)
    cab = math.cos(alpha - beta)
    out = {}

    p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb)
    if p2 >= 0:
        tmp = math.atan2(cb - ca, d + sa - sb)
        out["LSL"] = (_arc(-alpha + tmp), math.sqrt(p2), _arc(beta - tmp))

    p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa)
    if p2 >= 0:
        tmp = math.atan2(ca - cb, d - sa + sb)
        out["RSR"] = (_arc(alpha - tmp), math.sqrt(p2), _arc(-beta + tmp))

    p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb)
    if p2 >= 0:
        p = math.sqrt(p2)
        tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        out["LSR"] = (_arc(-alpha + tmp), p, _arc(-beta + tmp))

    p2 = -2 + d * d + 2 * cab - 2 * d * (sa + sb)
    if p2 >= 0:
        p = math.sqrt(p2)
        tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        out["RSL"] = (_arc(alpha - tmp), p, _arc(beta - tmp))

    tmp = (6.0 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8.0
    if abs(tmp) <= 1:
        p = _mod(TWO_PI - math.acos(tmp))
        t = _arc(alpha - math.atan2(ca - cb, d - sa + sb) + p / 2.0)
        out["RLR"] = (t, p, _arc(alpha - beta - t + p))

    tmp = (6.0 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8.0
    if abs(tmp) <= 1:
        p = _mod(TWO_PI - math.acos(tmp))
        t = _arc(-alpha - math.atan2(ca - cb, d + sa - sb) + p / 2.0)
        out["LRL"] = (t, p, _arc(beta - alpha - t + p))
    return out


def dubins_shortest(q0, q1, rho: float) -> DubinsPath:
    """Shortest Dubins path between two poses for turning radius ``rho``."""
    dx, dy = q1[0] - q0[0], q1[1] - q0[1]
    d = math.hypot(dx, dy) / rho
    th = math.atan2(dy, dx) if d > 0 else 0.0
    alpha, beta = _mod(q0[2] - th), _mod(q1[2] - th)
    words = _words(alpha, beta, d)
    word, segs = min(words.items(), key=lambda kv: (sum(kv[1]), kv[0]))
    return DubinsPath(tuple(map(float, q0)), word, segs, rho)


def dubins_to_point(q0, target, rho: float, headings: int = 72) -> DubinsPath:
    """Shortest curvature-bounded path from pose ``q0`` to a position with free final heading."""
    x0, y0, th0 = q0
    best = None
    for side in ("L", "R"):
        sgn = 1.0 if side == "L" else -1.0
        cx = x0 - sgn * rho * math.sin(th0)
        cy = y0 + sgn * rho * math.cos(th0)
        vx, vy = target[0] - cx, target[1] - cy
        dist = math.hypot(vx, vy)
        if dist < rho:
            continue
        straight = math.sqrt(max(dist * dist - rho * rho, 0.0))
        phi = math.atan2(vy, vx)
        tangent = phi - sgn * math.acos(min(1.0, rho / dist))
        begin = th0 - sgn * math.pi / 2
        arc = _arc(sgn * (tangent - begin))
        cand = DubinsPath(tuple(map(float, q0)), side + "S", (arc, straight / rho), rho)
        if best is None or cand.length < best.length:
            best = cand
    if best is not None:
        return best
    # target inside both turning circles: fall back to sampled final headings
    opts = [dubins_shortest(q0, (target[0], target[1], TWO_PI * k / headings), rho) for k in range(headings)]
    return min(opts, key=lambda p: p.length)


def _curve_clear(env: Environment, poses: np.ndarray) -> bool:
    pts = poses[:, :2]
    if not in_free_space_many(env, pts).all():
        return False
    if len(pts) < 2:
        return True
    return bool(segments_clear(env, pts[:-1], pts[1:]).all())


def plan_dubins(
    env: Environment,
    start,
    goal,
    params: DubinsParams,
    seed: int = 0,
    max_iterations: int = 5000,
    goal_bias: float = 0.1,
    refine_iterations: int = 300,
    step: float | None = None,
    resolution: float | None = None,
) -> Path:
    """Seeded RRT* over Dubins steering towards a goal point or region.

    A region goal is reached at its pole of inaccessibility. The search stops
    ``refine_iterations`` after the first solution, or raises
    :class:`BudgetExhausted` once ``max_iterations`` samples produced none.
    """
    rho = params.turning_radius
    goal_pt = standing_point(goal) if isinstance(goal, Region) else Point2(float(goal[0]), float(goal[1]))
    x0, y0, x1, y1 = env.bounds
    diag = math.hypot(x1 - x0, y1 - y0)
    step = step or 0.2 * diag
    res = resolution or min(0.05, diag / 400)
    rng = np.random.default_rng(seed)

    q_start = (float(start.x), float(start.y), float(start.theta)) if hasattr(start, "theta") else tuple(start)
    poses = [q_start]
    parent = [-1]
    cost = [0.0]
    best = (math.inf, -1, None)
    found_at = None

    def try_goal(i):
        nonlocal best, found_at
        cand = dubins_to_point(poses[i], goal_pt, rho)
        total = cost[i] + cand.length
        if total < best[0] and _curve_clear(env, cand.sample(res)):
            best = (total, i, cand)
            if found_at is None:
                found_at = it

    it = 0
    try_goal(0)
    for it in range(1, max_iterations + 1):
        if found_at is not None and it - found_at >= refine_iterations:
            break
        if rng.random() < goal_bias:
            sx, sy = goal_pt
        else:
            sx, sy = rng.uniform(x0, x1), rng.uniform(y0, y1)
        sth = rng.uniform(0.0, TWO_PI)
        if not in_free_space_many(env, [(sx, sy)])[0]:
            continue
        P = np.asarray(poses)
        dist = np.hypot(P[:, 0] - sx, P[:, 1] - sy)
        near_i = int(np.argmin(dist))
        steer = dubins_shortest(poses[near_i], (sx, sy, sth), rho)
        new = steer.pose_at(min(step, steer.length))
        n = len(poses)
        radius = max(2.0 * rho, min(step, 0.5 * diag * math.sqrt(math.log(n + 1) / (n + 1))))
        near = np.nonzero(np.hypot(P[:, 0] - new[0], P[:, 1] - new[1]) <= radius)[0].tolist()
        if near_i not in near:
            near.append(near_i)
        best_parent, best_cost = -1, math.inf
        for k in sorted(near, key=lambda k: cost[k]):
            seg = dubins_shortest(poses[k], new, rho)
            c = cost[k] + seg.length
            if c < best_cost and _curve_clear(env, seg.sample(res)):
                best_parent, best_cost = k, c
        if best_parent < 0:
            continue
        poses.append(new)
        parent.append(best_parent)
        cost.append(best_cost)
        j = len(poses) - 1
        for k in near:
            if k == best_parent:
                continue
            seg = dubins_shortest(new, poses[k], rho)
            c = best_cost + seg.length
            if c < cost[k] - 1e-9 and _curve_clear(env, seg.sample(res)):
                delta = cost[k] - c
                parent[k] = j
                _propagate(k, delta, parent, cost)
        try_goal(j)
    if best[1] < 0:
        raise BudgetExhausted(f"no path to goal after {max_iterations} iterations")

    # rebuild the chain root -> best node, then the goal connector
    chain, i = [], best[1]
    while i >= 0:
        chain.append(i)
        i = parent[i]
    chain.reverse()
    samples = [np.array([poses[chain[0]]])]
    length = 0.0
    for a, b in zip(chain[:-1], chain[1:]):
        seg = dubins_shortest(poses[a], poses[b], rho)
        samples.append(seg.sample(res)[1:])
        length += seg.length
    samples.append(best[2].sample(res)[1:])
    length += best[2].length
    S = np.vstack(samples)
    way = tuple(Point2(float(x), float(y)) for x, y in S[:, :2])
    return Path(way, length, tuple((float(x), float(y), float(t)) for x, y, t in S))


def _propagate(root, delta, parent, cost):
    children: dict[int, list[int]] = {}
    for c, p in enumerate(parent):
        children.setdefault(p, []).append(c)
    stack = [root]
    while stack:
        u = stack.pop()
        cost[u] -= delta
        stack.extend(children.get(u, ()))
