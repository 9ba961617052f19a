"""Restore communication validity by relocating one vehicle per disconnected unit."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .connectivity import (
    SystemState,
    VehiclePose,
    VisGraph,
    Verdict,
    build_relay_graph,
    build_unit_graph,
    communication_check,
    is_connected,
)
from .errors import RelayBroken
from .geometry import (
    Environment,
    Region,
    intersect_all,
    largest_part,
    region_boolean,
    standing_point,
    visibility_region,
)
from .motion.planner import Path, PlannerConfig, plan_to_point

log = logging.getLogger(__name__)


def disconnected_units(gB: VisGraph) -> frozenset[int]:
    """Unit indices (0-based among units) that no vehicle can see."""
    deg = gB.degree()[gB.n_vehicles :]
    return frozenset(int(j) for j in np.nonzero(deg == 0)[0])


def hard_constrained(gB: VisGraph) -> dict[int, frozenset[int]]:
    """Per vehicle, the units that only this vehicle sees."""
    n = gB.n_vehicles
    out = {i: set() for i in range(n)}
    for j in range(gB.size - n):
        seers = np.nonzero(gB.adjacency[n + j, :n])[0]
        if len(seers) == 1:
            out[int(seers[0])].add(j)
    return {i: frozenset(s) for i, s in out.items()}


def candidate_vehicles(gA: VisGraph) -> frozenset[int]:
    """Vehicles whose removal leaves the remaining relay graph connected."""
    return frozenset(i for i in range(gA.size) if is_connected(gA.without([i])))


def goal_region_with_anchor(
    env: Environment, state: SystemState, i: int, j: int, H_i=frozenset()
) -> tuple[Region, int | None]:
    """Largest part of ``V(r_j) & V(q_k) [& V(H_i)]`` over other vehicles ``k``, and that ``k``.

    With a single vehicle there is no ``k`` and the goal is ``V(r_j) [& V(H_i)]``.
    """
    base = [visibility_region(env, state.units[j])]
    base += [visibility_region(env, state.units[u]) for u in sorted(H_i)]
    core = intersect_all(base)
    if core.is_empty:
        return Region(), None
    others = [k for k in range(state.n) if k != i]
    if not others:
        return largest_part(core), None
    best, best_k, best_area = Region(), None, 0.0
    for k in others:
        inter = region_boolean("intersect", core, visibility_region(env, state.vehicles[k].point))
        if inter.is_empty:
            continue
        part = largest_part(inter)
        # strict comparison keeps the lowest k on ties
        if part.area > best_area:
            best, best_k, best_area = part, k, part.area
    return best, best_k


def goal_region(env: Environment, state: SystemState, i: int, j: int, H_i=frozenset()) -> Region:
    return goal_region_with_anchor(env, state, i, j, H_i)[0]


@dataclass(frozen=True, eq=False)
class RelocationPlan:
    vehicle: int
    unit: int
    goal_region: Region
    anchor: int | None
    goal: tuple[float, float]
    path: Path
    cost: float


@dataclass(eq=False)
class RecoveryResult:
    """Outcome of single-vehicle recovery.

    ``moves`` holds one plan per repaired unit in the order applied; ``state``
    is the state after all successful moves. On failure ``failed_unit`` names
    the unit for which no candidate had a non-empty goal region.
    """

    moves: list[RelocationPlan] = field(default_factory=list)
    state: SystemState | None = None
    failed_unit: int | None = None
    candidates: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.failed_unit is None

    @property
    def cost(self) -> float:
        return float(sum(mv.cost for mv in self.moves))


def _plan_single(env, state, j, gA, gB, planner: PlannerConfig, seed: int):
    H = hard_constrained(gB)
    C = sorted(candidate_vehicles(gA))
    options = {}
    for i in C:
        region, k = goal_region_with_anchor(env, state, i, j, H[i])
        if region.is_empty:
            continue
        target = standing_point(region)
        pose = state.vehicles[i]
        path = plan_to_point(env, pose, target, region, planner, seed=seed + i)
        options[i] = RelocationPlan(i, j, region, k, tuple(target), path, path.length)
    return C, options


def single_move_recover(
    env: Environment,
    state: SystemState,
    planner: PlannerConfig | None = None,
    seed: int = 0,
) -> RecoveryResult:
    """Repair every disconnected unit, lowest index first, one vehicle move each."""
    planner = planner or PlannerConfig()
    check = communication_check(state, env)
    if check.verdict is Verdict.INVALID_RELAY:
        raise RelayBroken("relay graph is disconnected; single-vehicle recovery does not apply")
    result = RecoveryResult(state=state)
    while True:
        gA = build_relay_graph(state, env)
        gB = build_unit_graph(state, env)
        D = disconnected_units(gB)
        if not D:
            break
        j = min(D)
        C, options = _plan_single(env, state, j, gA, gB, planner, seed)
        result.candidates[j] = {"candidates": C, "feasible": sorted(options)}
        if not options:
            log.info("unit %d unrecoverable; candidates %s all have empty goal regions", j, C)
            result.failed_unit = j
            break
        best = min(options.values(), key=lambda mv: (mv.cost, mv.vehicle))
        end = best.path.waypoints[-1]
        heading = best.path.final_heading(state.vehicles[best.vehicle].theta)
        state = state.with_vehicle(best.vehicle, VehiclePose(end[0], end[1], heading))
        result.moves.append(best)
        result.state = state
    return result

