"""Simulation loop: move units, validate, recover or re-place, record."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

from ..connectivity import SystemState, Verdict, VehiclePose, communication_check, distributed_check
from ..errors import NoPath, RelayBroken
from ..motion.mobility import make_model, mobility_step
from ..motion.planner import plan_path
from ..placement import place
from ..recovery import disconnected_units, single_move_recover
from .scenario import Scenario

log = logging.getLogger(__name__)

ACTIONS = ("none", "relocation", "replacement", "failure")


def _num(x):
    return None if x is None or not math.isfinite(x) else float(x)


@dataclass
class SimReport:
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"records": self.records, "summary": self.summary}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _summarize(records) -> dict:
    events = [r for r in records if r["verdict"] != Verdict.VALID.value]
    recov = [r for r in records if r["action"] == "relocation"]
    msgs = [r["messages"] for r in records]
    return {
        "steps": len(records),
        "disconnections": len(events),
        "recoveries": len(recov),
        "replacements": sum(r["action"] == "replacement" for r in records),
        "failures": sum(r["action"] == "failure" for r in records),
        "success_rate": (len(recov) / len(events)) if events else None,
        "mean_recovery_cost": (sum(r["cost"] for r in recov) / len(recov)) if recov else None,
        "total_travel": records[-1]["travel"] if records else 0.0,
        "messages_total": sum(msgs),
        "messages_max": max(msgs) if msgs else 0,
        "valid_after_action": sum(r["verdict_after"] == Verdict.VALID.value for r in records),
    }


def _replace(sc: Scenario, state: SystemState):
    """Fresh placement for the current units; returns (new_state, plan, travel)."""
    plan = place(sc.env, state.units, state.n, sc.score, seed=sc.seed)
    new = plan.vehicle_state(state.units, [v.theta for v in state.vehicles])
    travel = 0.0
    for old, nv in zip(state.vehicles, new.vehicles):
        if old.point != nv.point:
            try:
                travel += plan_path(sc.env, old.point, nv.point).length
            except NoPath:
                travel += math.dist(old.point, nv.point)
    return new, plan, travel


def simulate(sc: Scenario, steps: int | None = None) -> SimReport:
    """Run the move/validate/repair loop for ``steps`` timesteps (default: the scenario's)."""
    steps = sc.steps if steps is None else steps
    env, state = sc.env, sc.state
    model = make_model(
        sc.mobility.model,
        env,
        state.units,
        speed=sc.mobility.speed,
        group_radius=sc.mobility.group_radius,
        groups=sc.mobility.groups,
        seed=sc.seed,
    )
    patrol = None  # (vehicle, tour, arc length travelled)
    travel = 0.0
    records = []
    for step in range(1, steps + 1):
        state = mobility_step(model, state, sc.dt)
        if patrol is not None:
            vid, tour, t = patrol
            ds = sc.planner.dubins.speed * sc.dt
            if tour.length > 0:
                t += ds
                travel += ds
                p = tour.point_at(t)
                state = state.with_vehicle(vid, VehiclePose(p.x, p.y, state.vehicles[vid].theta))
            patrol = (vid, tour, t)

        check = communication_check(state, env)
        dist_ok, trace = distributed_check(state, env, 0)
        rec = {
            "step": step,
            "verdict": check.verdict.value,
            "lambda2_relay": _num(check.lambda2_relay),
            "lambda2_union": _num(check.lambda2_union),
            "disconnected": sorted(sc.unit_ids[j] for j in disconnected_units(check.units)),
            "distributed_valid": dist_ok,
            "messages": len(trace),
            "vehicles": [[v.x, v.y] for v in state.vehicles],
            "units": [[u.x, u.y] for u in state.units],
        }
        action, cost = "none", 0.0
        if check.verdict is Verdict.INVALID_UNION:
            try:
                res = single_move_recover(env, state, sc.planner, seed=sc.seed + step)
            except RelayBroken:
                res = None
            if res is not None and res.success:
                action, cost = "relocation", res.cost
                state = res.state
                moved = {mv.vehicle for mv in res.moves}
                if patrol is not None and patrol[0] in moved:
                    patrol = None
            else:
                action = "replacement"
        elif check.verdict is Verdict.INVALID_RELAY:
            action = "replacement"
        if action == "replacement":
            try:
                state, plan, cost = _replace(sc, state)
                patrol = (plan.patroller, plan.tour, 0.0) if plan.tour is not None else None
            except Exception as exc:  # recorded outcome, not a crash
                log.warning("step %d: replacement failed: %s", step, exc)
                action, cost = "failure", 0.0
        travel += cost
        rec["action"] = action
        rec["cost"] = float(cost)
        rec["travel"] = float(travel)
        rec["verdict_after"] = communication_check(state, env).verdict.value if action != "none" else rec["verdict"]
        records.append(rec)
    return SimReport(records, _summarize(records))
