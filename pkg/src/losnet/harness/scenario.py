"""Scenario and plan files (JSON with a ``version`` field)."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath

from ..connectivity import SystemState, VehiclePose
from ..errors import ParseError, PointOutsideFreeSpace, ValidationError
from ..geometry import Environment, Point2, Polygon, in_free_space
from ..motion.mobility import DEFAULT_GROUP_RADIUS, DEFAULT_SPEED
from ..motion.planner import DubinsParams, PlannerConfig
from ..placement import ScoreParams

FORMAT_VERSION = 1
MOBILITY_MODELS = ("static", "random_waypoint", "nomadic")


@dataclass(frozen=True)
class MobilityConfig:
    model: str = "static"
    speed: tuple[float, float] = DEFAULT_SPEED
    group_radius: float = DEFAULT_GROUP_RADIUS
    groups: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True, eq=False)
class Scenario:
    env: Environment
    state: SystemState
    vehicle_ids: tuple = ()
    unit_ids: tuple = ()
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    score: ScoreParams = field(default_factory=ScoreParams)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    seed: int = 0
    steps: int = 0
    dt: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not self.vehicle_ids:
            object.__setattr__(self, "vehicle_ids", tuple(range(self.state.n)))
        if not self.unit_ids:
            object.__setattr__(self, "unit_ids", tuple(range(self.state.m)))
        for p in [v.point for v in self.state.vehicles] + list(self.state.units):
            if not in_free_space(self.env, p):
                raise PointOutsideFreeSpace(p)

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        mob = {
            "model": self.mobility.model,
            "speed": list(self.mobility.speed),
            "group_radius": self.mobility.group_radius,
        }
        if self.mobility.groups is not None:
            mob["groups"] = [list(g) for g in self.mobility.groups]
        d = {
            "version": FORMAT_VERSION,
            "name": self.name,
            "environment": {
                "world": _coords(self.env.world),
                "obstacles": [_coords(o) for o in self.env.obstacles],
            },
            "vehicles": [
                {"id": vid, "x": v.x, "y": v.y, "theta": v.theta} for vid, v in zip(self.vehicle_ids, self.state.vehicles)
            ],
            "units": [{"id": uid, "x": u.x, "y": u.y} for uid, u in zip(self.unit_ids, self.state.units)],
            "mobility": mob,
            "score": {"alpha": self.score.alpha, "beta": self.score.beta, "gamma": self.score.gamma},
            "planner": {
                "kind": self.planner.kind,
                "max_iterations": self.planner.max_iterations,
                "dubins": {
                    "wheelbase": self.planner.dubins.wheelbase,
                    "max_steer": self.planner.dubins.max_steer,
                    "speed": self.planner.dubins.speed,
                },
            },
            "seed": self.seed,
            "steps": self.steps,
            "dt": self.dt,
        }
        return d


def _coords(poly: Polygon) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in poly.vertices]


def dumps(obj) -> str:
    # repr-precision floats, stable key order
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


class _Reader:
    def __init__(self, text: str):
        self.text = text

    def line_of(self, key: str) -> int | None:
        m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def fail(self, msg, fieldpath, key=None):
        raise ParseError(msg, field=fieldpath, line=self.line_of(key or fieldpath.split(".")[-1].split("[")[0]))

    def number(self, obj, key, fieldpath, default=None, kind=float):
        if key not in obj:
            if default is None:
                self.fail("missing required field", fieldpath, key)
            return default
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"expected a number, got {type(v).__name__}", fieldpath, key)
        if kind is int:
            if float(v) != int(v):
                self.fail("expected an integer", fieldpath, key)
            return int(v)
        if not math.isfinite(v):
            self.fail("expected a finite number", fieldpath, key)
        return float(v)

    def point_list(self, v, fieldpath, key):
        if not isinstance(v, list):
            self.fail("expected a list of [x, y] pairs", fieldpath, key)
        out = []
        for i, p in enumerate(v):
            if (
                not isinstance(p, (list, tuple))
                or len(p) != 2
                or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in p)
            ):
                self.fail(f"vertex {i} is not an [x, y] pair", fieldpath, key)
            out.append((float(p[0]), float(p[1])))
        if len(out) < 3:
            self.fail(f"polygon needs at least 3 vertices, got {len(out)}", fieldpath, key)
        return out

    def polygon(self, v, fieldpath, key):
        pts = self.point_list(v, fieldpath, key)
        try:
            return Polygon(tuple(pts))
        except ValidationError as exc:
            raise ValidationError(f"{fieldpath}: {exc}") from None


def _agents(r: _Reader, items, fieldpath, with_theta):
    if not isinstance(items, list):
        r.fail("expected a list", fieldpath)
    ids, out = [], []
    for i, a in enumerate(items):
        fp = f"{fieldpath}[{i}]"
        if not isinstance(a, dict):
            r.fail("expected an object", fp, fieldpath)
        aid = a.get("id", i)
        if isinstance(aid, bool) or not isinstance(aid, (int, str)):
            r.fail("id must be an integer or string", fp + ".id", "id")
        if aid in ids:
            r.fail(f"duplicate id {aid!r}", fp + ".id", "id")
        ids.append(aid)
        x = r.number(a, "x", fp + ".x")
        y = r.number(a, "y", fp + ".y")
        if with_theta:
            out.append(VehiclePose(x, y, r.number(a, "theta", fp + ".theta", default=0.0)))
        else:
            out.append(Point2(x, y))
    return tuple(ids), tuple(out)


def scenario_from_dict(d, text: str = "") -> Scenario:
    r = _Reader(text)
    if not isinstance(d, dict):
        raise ParseError("top level must be an object")
    if "version" not in d:
        r.fail("missing required field", "version")
    if d["version"] != FORMAT_VERSION:
        r.fail(f"unsupported version {d['version']!r}", "version")
    envd = d.get("environment")
    if not isinstance(envd, dict):
        r.fail("missing or malformed environment", "environment")
    world = r.polygon(envd.get("world"), "environment.world", "world")
    obs_raw = envd.get("obstacles", [])
    if not isinstance(obs_raw, list):
        r.fail("expected a list of polygons", "environment.obstacles", "obstacles")
    obstacles = tuple(r.polygon(o, f"environment.obstacles[{i}]", "obstacles") for i, o in enumerate(obs_raw))
    env = Environment(world, obstacles)

    vids, vehicles = _agents(r, d.get("vehicles"), "vehicles", True)
    if not vehicles:
        r.fail("at least one vehicle is required", "vehicles")
    uids, units = _agents(r, d.get("units", []), "units", False)

    mobd = d.get("mobility", {}) or {}
    if not isinstance(mobd, dict):
        r.fail("expected an object", "mobility")
    model = mobd.get("model", "static")
    if model not in MOBILITY_MODELS:
        r.fail(f"unknown model {model!r}", "mobility.model", "model")
    speed = mobd.get("speed", list(DEFAULT_SPEED))
    if isinstance(speed, (int, float)) and not isinstance(speed, bool):
        speed = [speed, speed]
    if (
        not isinstance(speed, list)
        or len(speed) != 2
        or any(isinstance(s, bool) or not isinstance(s, (int, float)) for s in speed)
        or not 0 <= speed[0] <= speed[1]
    ):
        r.fail("expected [min, max] with 0 <= min <= max", "mobility.speed", "speed")
    groups = mobd.get("groups")
    if groups is not None:
        uid_pos = {u: k for k, u in enumerate(uids)}
        try:
            groups = tuple(tuple(uid_pos[u] for u in g) for g in groups)
        except (KeyError, TypeError):
            r.fail("groups must list unit ids", "mobility.groups", "groups")
    mobility = MobilityConfig(
        model,
        (float(speed[0]), float(speed[1])),
        r.number(mobd, "group_radius", "mobility.group_radius", default=DEFAULT_GROUP_RADIUS),
        groups,
    )

    sd = d.get("score", {}) or {}
    try:
        score = ScoreParams(
            r.number(sd, "alpha", "score.alpha", default=1e6),
            r.number(sd, "beta", "score.beta", default=1.0),
            r.number(sd, "gamma", "score.gamma", default=1.0),
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        r.fail(str(exc), "score")

    pd = d.get("planner", {}) or {}
    dd = pd.get("dubins", {}) or {}
    try:
        planner = PlannerConfig(
            pd.get("kind", "visgraph"),
            DubinsParams(
                r.number(dd, "wheelbase", "planner.dubins.wheelbase", default=0.5),
                r.number(dd, "max_steer", "planner.dubins.max_steer", default=0.6),
                r.number(dd, "speed", "planner.dubins.speed", default=1.0),
            ),
            r.number(pd, "max_iterations", "planner.max_iterations", default=5000, kind=int),
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        r.fail(str(exc), "planner")

    if "seed" not in d:
        r.fail("missing required field", "seed")
    seed = r.number(d, "seed", "seed", kind=int)
    steps = r.number(d, "steps", "steps", default=0, kind=int)
    dt = r.number(d, "dt", "dt", default=1.0)
    if steps < 0:
        r.fail("must be non-negative", "steps")
    if dt < 0:
        r.fail("must be non-negative", "dt")
    return Scenario(
        env,
        SystemState(vehicles, units),
        vids,
        uids,
        mobility,
        score,
        planner,
        seed,
        steps,
        dt,
        str(d.get("name", "")),
    )


def loads_scenario(text: str) -> Scenario:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return scenario_from_dict(d, text)


def load_scenario(path) -> Scenario:
    return loads_scenario(FsPath(path).read_text())


def save_scenario(path, scenario: Scenario) -> None:
    FsPath(path).write_text(dumps(scenario.to_dict()))


def save_plan(path, plan: dict) -> None:
    """Write a plan document (see ``harness.plans``)."""
    FsPath(path).write_text(dumps({"version": FORMAT_VERSION, **plan}))


def load_plan(path) -> dict:
    text = FsPath(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(d, dict) or d.get("version") != FORMAT_VERSION:
        raise ParseError("missing or unsupported version", field="version")
    return d
