"""Multi-vehicle placement: face decomposition, labels, scores, greedy cover and deployment."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import shapely

from .connectivity import SystemState, VehiclePose, bfs_components
from .errors import NoPath, NoVehicles, Unreachable
from .geometry import (
    EPS_AREA,
    Environment,
    Point2,
    Region,
    as_point,
    distance,
    los_visible_many,
    standing_point,
    union_all,
    visibility_region,
)
from .motion.planner import geodesic
from .motion.tour import Tour, patrol_tour

HELD_KARP_LIMIT = 12


@dataclass(frozen=True)
class ScoreParams:
    alpha: float = 1e6
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0 or self.gamma < 0:
            raise ValueError("beta and gamma must be non-negative")
        if self.alpha < 1e3 * max(self.beta, self.gamma):
            raise ValueError("alpha must be at least 1000 times max(beta, gamma)")


@dataclass(frozen=True, eq=False)
class LabeledFace:
    polygon: Region
    label: frozenset
    score: float
    index: int = -1
    original: int | None = None  # unit whose full visibility polygon this face is

    @property
    def area(self) -> float:
        return self.polygon.area


# ---------------------------------------------------------------------------
# decomposition and labelling


def unit_visibility(env: Environment, units) -> list[Region]:
    return [visibility_region(env, u) for u in units]


def _same(a, b) -> bool:
    return shapely.symmetric_difference(a, b).area < EPS_AREA


def decompose(env: Environment, units, vis: list[Region] | None = None) -> list[Region]:
    """Arrangement faces of the units' visibility polygons followed by the originals.

    Arrangement faces tile the union of the visibility polygons. Originals that
    coincide with an arrangement face are not repeated.
    """
    units = [as_point(u) for u in units]
    if not units:
        return []
    vis = vis if vis is not None else unit_visibility(env, units)
    cover = union_all(vis).geometry
    lines = shapely.union_all([shapely.boundary(v.geometry) for v in vis])
    raw = shapely.get_parts(shapely.polygonize(shapely.get_parts(lines)))
    faces = []
    for f in raw:
        if f.area < EPS_AREA:
            continue
        if not cover.contains(f.representative_point()):
            continue
        faces.append(f)
    faces.sort(key=lambda f: (round(f.centroid.x, 9), round(f.centroid.y, 9), -f.area))
    out = [Region((f,)) for f in faces]
    for v in vis:
        g = v.geometry
        if not any(_same(g, r.geometry) for r in out):
            out.append(v)
    return out


def assign_label(face: Region, vis: list[Region]) -> frozenset:
    """Units whose visibility polygon contains the face, up to ``EPS_AREA``."""
    g = face.geometry
    return frozenset(u for u, v in enumerate(vis) if shapely.difference(g, v.geometry).area < EPS_AREA)


def assign_score(face: Region, label, units, params: ScoreParams = ScoreParams()) -> float:
    s = params.gamma * face.area
    for u in sorted(label):
        s += params.alpha - params.beta * distance(face, units[u])
    return float(s)


def label_faces(env: Environment, units, params: ScoreParams = ScoreParams()) -> list[LabeledFace]:
    units = [as_point(u) for u in units]
    vis = unit_visibility(env, units)
    out = []
    for idx, face in enumerate(decompose(env, units, vis)):
        label = assign_label(face, vis)
        orig = next((u for u, v in enumerate(vis) if face is v), None)
        out.append(LabeledFace(face, label, assign_score(face, label, units, params), idx, orig))
    return out


# ---------------------------------------------------------------------------
# greedy cover


@dataclass(frozen=True, eq=False)
class CoverResult:
    selected: tuple[LabeledFace, ...]
    covered: frozenset

    @property
    def labels(self) -> list[frozenset]:
        return [f.label for f in self.selected]

    def __len__(self):
        return len(self.selected)


def greedy_cover(faces: list[LabeledFace], units) -> CoverResult:
    """Repeatedly take the face covering most still-uncovered units (then higher score, then lower index)."""
    universe = frozenset(range(len(units)))
    remaining = set(universe)
    chosen: list[LabeledFace] = []
    while remaining:
        best = None
        for pos, f in enumerate(faces):
            gain = len(f.label & remaining)
            if gain == 0:
                continue
            key = (-gain, -f.score, pos)
            if best is None or key < best[0]:
                best = (key, f)
        if best is None:
            raise ValueError(f"units {sorted(remaining)} appear in no face label")
        chosen.append(best[1])
        remaining -= best[1].label
    return CoverResult(tuple(chosen), universe)


# ---------------------------------------------------------------------------
# components, component graph and tour ordering


def _points(placed) -> np.ndarray:
    if isinstance(placed, SystemState):
        return placed.vehicle_points()
    return np.array([as_point(p) for p in placed], dtype=float).reshape(-1, 2)


def placed_components(env: Environment, placed) -> list[list[int]]:
    pts = _points(placed)
    adj = np.zeros((len(pts), len(pts)), dtype=bool)
    for i, p in enumerate(pts):
        adj[i] = los_visible_many(env, p, pts)
    adj |= adj.T
    np.fill_diagonal(adj, False)
    return bfs_components(adj)


def component_polygons(placed, env: Environment) -> list[Region]:
    """Union of the member visibility polygons for each relay component of the placed vehicles."""
    pts = _points(placed)
    comps = placed_components(env, pts)
    return [union_all(visibility_region(env, pts[i]) for i in comp) for comp in comps]


def component_graph(vertices: list[Region], env: Environment) -> np.ndarray:
    """Complete weight matrix of geodesic region-to-region distances."""
    k = len(vertices)
    W = np.zeros((k, k))
    for a, b in itertools.combinations(range(k), 2):
        try:
            d = geodesic(env, vertices[a], vertices[b]).length
        except NoPath as exc:
            raise Unreachable(str(exc)) from exc
        W[a, b] = W[b, a] = d
    return W


def tour_cost(W: np.ndarray, order) -> float:
    order = list(order)
    return float(sum(W[a, b] for a, b in zip(order, order[1:] + order[:1])))


def _held_karp(W: np.ndarray) -> list[int]:
    k = len(W)
    full = 1 << (k - 1)
    # dp[mask][j]: cheapest path from 0 over nodes in mask (bits for 1..k-1), ending at j
    dp = np.full((full, k), np.inf)
    par = np.full((full, k), -1, dtype=int)
    for j in range(1, k):
        dp[1 << (j - 1), j] = W[0, j]
    for mask in range(1, full):
        for j in range(1, k):
            bit = 1 << (j - 1)
            if not mask & bit or not math.isfinite(dp[mask, j]):
                continue
            for nxt in range(1, k):
                nb = 1 << (nxt - 1)
                if mask & nb:
                    continue
                c = dp[mask, j] + W[j, nxt]
                if c < dp[mask | nb, nxt]:
                    dp[mask | nb, nxt] = c
                    par[mask | nb, nxt] = j
    last = int(np.argmin(dp[full - 1, 1:] + W[1:, 0])) + 1
    order, mask, j = [], full - 1, last
    while j > 0:
        order.append(j)
        pj = par[mask, j]
        mask ^= 1 << (j - 1)
        j = pj
    return [0] + order[::-1]


def _two_opt(W: np.ndarray, order: list[int]) -> list[int]:
    k = len(order)
    improved = True
    while improved:
        improved = False
        for i in range(1, k - 1):
            for j in range(i + 1, k):
                a, b = order[i - 1], order[i]
                c, d = order[j], order[(j + 1) % k]
                if W[a, c] + W[b, d] < W[a, b] + W[c, d] - 1e-12:
                    order[i : j + 1] = order[i : j + 1][::-1]
                    improved = True
    return order


def _nearest_neighbour(W: np.ndarray, start: int) -> list[int]:
    k = len(W)
    order, left = [start], set(range(k)) - {start}
    while left:
        cur = order[-1]
        nxt = min(left, key=lambda j: (W[cur, j], j))
        order.append(nxt)
        left.remove(nxt)
    return order


def _rotate(order: list[int]) -> list[int]:
    i = order.index(0)
    return order[i:] + order[:i]


def tour_sequence(W, seed: int = 0, restarts: int = 8, exact_limit: int = HELD_KARP_LIMIT) -> list[int]:
    """Visiting order (a Hamiltonian cycle starting at vertex 0).

    Exact subset dynamic programming up to ``exact_limit`` vertices,
    nearest-neighbour plus 2-opt from several seeded starts above.
    """
    W = np.asarray(W, dtype=float)
    k = len(W)
    if k <= 3:
        return list(range(k))
    if k <= exact_limit:
        return _held_karp(W)
    rng = np.random.default_rng(seed)
    starts = [0] + rng.choice(np.arange(1, k), size=min(restarts, k - 1), replace=False).tolist()
    best, best_cost = None, math.inf
    for s in starts:
        order = _rotate(_two_opt(W, _nearest_neighbour(W, int(s))))
        c = tour_cost(W, order)
        if c < best_cost - 1e-12:
            best, best_cost = order, c
    return best


# ---------------------------------------------------------------------------
# deployment


@dataclass(eq=False)
class DeploymentPlan:
    """Vehicle assignment for a cover.

    ``static_assignment`` maps a vehicle id to an index into ``cover.selected``.
    ``tour_vertices`` are the component polygons followed by the uncovered
    faces; ``tour`` visits them in ``tour_order``.
    """

    cover: CoverResult
    n_vehicles: int
    static_assignment: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)
    patroller: int | None = None
    component_polygons: list = field(default_factory=list)
    uncovered: list = field(default_factory=list)
    tour_vertices: list = field(default_factory=list)
    tour_order: list = field(default_factory=list)
    tour: Tour | None = None
    case: str = ""  # single | static | patrol | tour_all

    def vehicle_state(self, units, headings=None) -> SystemState:
        """System state with vehicles at their standing points (the patroller at the tour start).

        Vehicles without a role park next to vehicle 0 so the relay stays connected.
        """
        headings = headings or [0.0] * self.n_vehicles
        park = self.positions.get(0) or next(iter(self.positions.values()), None)
        if park is None and self.tour is not None:
            park = self.tour.path.start
        poses = []
        for i in range(self.n_vehicles):
            if i in self.positions:
                p = self.positions[i]
            elif i == self.patroller and self.tour is not None:
                p = self.tour.path.start
            else:
                p = park
            poses.append(VehiclePose(p[0], p[1], headings[i]))
        return SystemState(tuple(poses), tuple(units))


def _patrol(env, plan: DeploymentPlan, static_faces, seed):
    placed = [plan.positions[v] for v in sorted(plan.positions)]
    comps = component_polygons(placed, env) if placed else []
    covered = set(static_faces)
    uncovered = [i for i in range(len(plan.cover)) if i not in covered]
    plan.component_polygons = comps
    plan.uncovered = uncovered
    plan.tour_vertices = list(comps) + [plan.cover.selected[i].polygon for i in uncovered]
    if len(plan.tour_vertices) >= 2:
        W = component_graph(plan.tour_vertices, env)
        plan.tour_order = tour_sequence(W, seed=seed)
        plan.tour = patrol_tour(env, [plan.tour_vertices[i] for i in plan.tour_order])


def deploy(cover: CoverResult, n: int, env: Environment, seed: int = 0) -> DeploymentPlan:
    """Assign ``n`` vehicles to the cover faces, adding a patroller when needed."""
    if n < 1:
        raise NoVehicles("deployment needs at least one vehicle")
    faces = cover.selected
    g = len(faces)
    plan = DeploymentPlan(cover, n)
    if g == 0:
        return plan
    if g == 1:
        plan.case = "single"
        plan.static_assignment = {0: 0}
        plan.positions = {0: standing_point(faces[0].polygon)}
        return plan
    if n == 1:
        plan.case = "tour_all"
        plan.patroller = 0
        _patrol(env, plan, [], seed)
        return plan

    if g <= n:
        plan.static_assignment = {i: i for i in range(g)}
        plan.positions = {i: standing_point(faces[i].polygon) for i in range(g)}
        comps = placed_components(env, [plan.positions[i] for i in range(g)])
        if len(comps) == 1:
            plan.case = "static"
            plan.component_polygons = component_polygons([plan.positions[i] for i in range(g)], env)
            return plan
        if g < n:
            plan.case = "patrol"
            plan.patroller = g  # lowest-id spare vehicle
            _patrol(env, plan, list(range(g)), seed)
            return plan

    # n - 1 static vehicles on the best-scoring faces, the last vehicle patrols
    ranked = sorted(range(g), key=lambda i: (-faces[i].score, i))[: n - 1]
    ranked.sort()
    plan.static_assignment = {v: f for v, f in enumerate(ranked)}
    plan.positions = {v: standing_point(faces[f].polygon) for v, f in enumerate(ranked)}
    plan.case = "patrol"
    plan.patroller = n - 1
    _patrol(env, plan, ranked, seed)
    return plan


def place(env: Environment, units, n: int, params: ScoreParams = ScoreParams(), seed: int = 0) -> DeploymentPlan:
    """Label, cover and deploy in one call."""
    faces = label_faces(env, units, params)
    cover = greedy_cover(faces, units)
    return deploy(cover, n, env, seed=seed)


def served_units(env: Environment, plan: DeploymentPlan, units, resolution: float = 0.01) -> dict[int, bool]:
    """For units no static vehicle sees, whether some sampled tour point sees them."""
    units = [as_point(u) for u in units]
    static = np.array([plan.positions[v] for v in sorted(plan.positions)], dtype=float).reshape(-1, 2)
    out = {}
    samples = plan.tour.path.sample(resolution) if plan.tour is not None else np.zeros((0, 2))
    for j, u in enumerate(units):
        if len(static) and los_visible_many(env, u, static).any():
            continue
        out[j] = bool(len(samples) and los_visible_many(env, u, samples).any())
    return out


__all__ = [
    "CoverResult",
    "DeploymentPlan",
    "LabeledFace",
    "Point2",
    "ScoreParams",
    "assign_label",
    "assign_score",
    "component_graph",
    "component_polygons",
    "decompose",
    "deploy",
    "greedy_cover",
    "label_faces",
    "place",
    "served_units",
    "tour_cost",
    "tour_sequence",
]
