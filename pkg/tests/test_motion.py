import math

import numpy as np
import pytest
import shapely

import oracles
import scenarios
from losnet import BudgetExhausted, Region, SystemState, VehiclePose, box
from losnet.errors import NoPath
from losnet.geometry import distance, in_free_space_many, los_visible
from losnet.motion import (
    DubinsParams,
    Nomadic,
    PlannerConfig,
    RandomWaypoint,
    dubins_shortest,
    dubins_to_point,
    geodesic,
    make_model,
    mobility_step,
    motion_cost,
    patrol_tour,
    plan_dubins,
    plan_path,
    plan_to_point,
)


def test_geodesic_around_wall_matches_hand_computation():
    env = scenarios.walled_room()
    path = plan_path(env, (2, 5), (8, 5))
    # (2,5) -> (4.8,9.5) -> (5.2,9.5) -> (8,5): two 5.3 m legs and the 0.4 m wall end
    assert path.length == pytest.approx(11.0, abs=1e-9)
    assert path.start == (2, 5) and path.end == (8, 5)
    assert motion_cost(env, (2, 5), (8, 5)) == pytest.approx(11.0)


def test_geodesic_straight_when_visible():
    env = scenarios.walled_room()
    p = plan_path(env, (1, 1), (3, 8))
    assert len(p.waypoints) == 2
    assert p.length == pytest.approx(math.dist((1, 1), (3, 8)))


def test_geodesic_to_region_stops_at_boundary():
    env = scenarios.open_room()
    target = Region.from_polygon(box(6, 0, 10, 10))
    p = geodesic(env, (1, 5), target)
    assert p.length == pytest.approx(5.0)
    assert p.end[0] == pytest.approx(6.0)


def test_geodesic_from_region_to_region():
    env = scenarios.walled_room()
    a = Region.from_polygon(box(1, 4, 2, 6))
    b = Region.from_polygon(box(8, 4, 9, 6))
    p = geodesic(env, a, b)
    assert a.geometry.distance(shapely.Point(p.start)) < 1e-9
    assert b.geometry.distance(shapely.Point(p.end)) < 1e-9
    assert p.length < 11.0


def test_geodesic_never_enters_obstacles():
    rng = np.random.default_rng(4)
    for _ in range(10):
        env = oracles.random_box_env(rng)
        a, b = oracles.random_free_points(env, rng, 2)
        p = plan_path(env, a, b)
        for u, v in zip(p.waypoints[:-1], p.waypoints[1:]):
            assert los_visible(env, u, v)
        assert p.length >= math.dist(a, b) - 1e-9


def test_geodesic_rejects_points_in_obstacles():
    env = scenarios.walled_room()
    with pytest.raises(NoPath):
        plan_path(env, (5, 5), (1, 1))


def test_path_sampling_and_concat():
    env = scenarios.walled_room()
    p = plan_path(env, (2, 5), (8, 5))
    s = p.sample(0.01)
    assert np.hypot(*np.diff(s, axis=0).T).max() <= 0.01 + 1e-12
    q = p.concat(plan_path(env, (8, 5), (8, 8)))
    assert q.length == pytest.approx(14.0)
    assert q.end == (8, 8)


def test_dubins_shortest_straight_and_reversal():
    rho = 1.0
    assert dubins_shortest((0, 0, 0), (10, 0, 0), rho).length == pytest.approx(10.0)
    # turn around in place needs at least a half circle
    u = dubins_shortest((0, 0, 0), (0, 0, math.pi), rho)
    assert u.length >= math.pi * rho - 1e-9


def test_dubins_endpoints_are_exact():
    rng = np.random.default_rng(0)
    for _ in range(200):
        q0 = (*rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
        q1 = (*rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
        p = dubins_shortest(q0, q1, 0.8)
        x, y, th = p.end
        assert math.hypot(x - q1[0], y - q1[1]) < 1e-6
        assert abs(math.remainder(th - q1[2], 2 * math.pi)) < 1e-6
        assert p.length >= math.dist(q0[:2], q1[:2]) - 1e-9


def test_dubins_to_point_matches_oracle_outside_circles():
    rng = np.random.default_rng(1)
    for _ in range(100):
        q0 = (0.0, 0.0, rng.uniform(0, 2 * math.pi))
        target = tuple(rng.uniform(-6, 6, 2))
        ref = oracles.point_reach_length(q0, target, 1.0)
        p = dubins_to_point(q0, target, 1.0)
        assert math.dist(p.end[:2], target) < 1e-6
        if math.isfinite(ref):
            assert p.length == pytest.approx(ref, abs=1e-9)


def test_dubins_to_point_dead_ahead_is_straight():
    p = dubins_to_point((5.0, 20.0, 0.0), (35.0, 20.0), 0.7308479735390511)
    assert p.length == pytest.approx(30.0, abs=1e-9)


def test_dubins_params():
    prm = DubinsParams(wheelbase=0.5, max_steer=0.6)
    assert prm.turning_radius == pytest.approx(0.5 / math.tan(0.6))
    with pytest.raises(ValueError):
        DubinsParams(wheelbase=0.5, max_steer=2.0)
    with pytest.raises(ValueError):
        PlannerConfig("astar")


def test_plan_dubins_is_deterministic_and_clear():
    env = scenarios.walled_room()
    prm = DubinsParams()
    a = plan_dubins(env, VehiclePose(2, 5, math.pi / 2), (8, 5), prm, seed=7)
    b = plan_dubins(env, VehiclePose(2, 5, math.pi / 2), (8, 5), prm, seed=7)
    assert a.waypoints == b.waypoints and a.length == b.length
    assert a.length >= 11.0 - 1e-6
    free = oracles.free_geometry(env)
    assert free.buffer(1e-9).covers(shapely.LineString(a.waypoints))
    assert math.dist(a.end, (8, 5)) < 1e-6
    rho = prm.turning_radius
    k = oracles.menger_curvature(np.asarray(a.waypoints))
    assert (k <= (1 / rho) * (1 + 1e-6) + 1e-9).all()


def test_plan_dubins_budget():
    env = scenarios.walled_room()
    with pytest.raises(BudgetExhausted):
        plan_dubins(env, VehiclePose(2, 5, 0), (8, 5), DubinsParams(), seed=0, max_iterations=1)


def test_plan_to_point_dispatch():
    env = scenarios.walled_room()
    pose = VehiclePose(2, 5)
    p = plan_to_point(env, pose, (8, 5), None, PlannerConfig())
    assert p.poses is None and p.length == pytest.approx(11.0)
    q = plan_to_point(env, pose, (8, 5), None, PlannerConfig("rrtstar"), seed=2)
    assert q.poses is not None and q.length >= 11.0 - 1e-6


def _check_walk(env, model, state, steps, vmax):
    prev = state.unit_points()
    for _ in range(steps):
        state = mobility_step(model, state, 1.0)
        cur = state.unit_points()
        assert in_free_space_many(env, cur).all()
        yield prev, cur
        prev = cur


def test_random_waypoint_stays_free_for_many_steps():
    env = scenarios.cluttered_room()
    units = [(1, 1), (29, 19), (10, 18)]
    state = SystemState((VehiclePose(1, 19),), units)
    model = RandomWaypoint(env, units, speed=(0.5, 1.5), seed=3)
    moved = 0.0
    for prev, cur in _check_walk(env, model, state, 10_000, 1.5):
        step = np.hypot(*(cur - prev).T)
        assert (step <= 1.5 + 1e-9).all()
        moved += step.sum()
    assert moved > 1000


def test_nomadic_groups_stay_together():
    env = scenarios.cluttered_room()
    env9, state, groups = scenarios.nomadic_groups()
    model = Nomadic(env, state.units, groups=groups, speed=(0.5, 1.5), group_radius=2.0, seed=0)
    for _, cur in _check_walk(env, model, state, 2000, 1.5):
        for g in groups:
            pts = cur[list(g)]
            # members sit within the radius of a shared reference, so within a diameter of each other
            assert np.hypot(*(pts[:, None] - pts[None]).transpose(2, 0, 1)).max() <= 4.0 + 1e-9


def test_mobility_edge_cases():
    env = scenarios.open_room()
    state = SystemState((VehiclePose(5, 5),), ((1, 1), (2, 2)))
    model = make_model("random_waypoint", env, state.units, seed=1)
    assert mobility_step(model, state, 0.0) is state
    assert mobility_step(make_model("static", env, state.units), state, 1.0) is state
    frozen = make_model("nomadic", env, state.units, speed=(0.0, 0.0), seed=1)
    assert mobility_step(frozen, state, 1.0) is state
    with pytest.raises(ValueError):
        make_model("brownian", env, state.units)


def test_mobility_reproducible_and_clone_independent():
    env = scenarios.cluttered_room()
    units = [(1, 1), (29, 19)]
    state = SystemState((VehiclePose(1, 19),), units)
    a = RandomWaypoint(env, units, seed=9)
    b = a.clone()
    sa, sb = state, state
    for _ in range(50):
        sa = a.step(sa, 1.0)
        sb = b.step(sb, 1.0)
    assert sa.units == sb.units
    c = RandomWaypoint(env, units, seed=9)
    sc = state
    for _ in range(50):
        sc = c.step(sc, 1.0)
    assert sc.units == sa.units


def test_patrol_tour_two_boxes():
    env = scenarios.open_room()
    faces = [Region.from_polygon(box(1, 1, 2, 2)), Region.from_polygon(box(4, 1, 5, 2))]
    tour = patrol_tour(env, faces)
    # out and back across the 2 m gap, entering each box by the inset margin
    assert tour.length == pytest.approx(4.0, abs=1e-4)
    assert tour.path.waypoints[0] == tour.path.waypoints[-1]
    assert tour.duration(2.0) == pytest.approx(tour.length / 2.0)
    assert tour.point_at(tour.length) == pytest.approx(tour.point_at(0.0))
    assert set(tour.visits) == {0, 1}


def test_patrol_tour_single_region():
    env = scenarios.open_room()
    tour = patrol_tour(env, [Region.from_polygon(box(1, 1, 3, 3))])
    assert tour.length == 0.0
    assert tour.point_at(5.0) == pytest.approx((2.0, 2.0))
    with pytest.raises(ValueError):
        patrol_tour(env, [])


def test_motion_cost_bounds_for_regions():
    env = scenarios.walled_room()
    start = (2, 5)
    small = Region.from_polygon(box(8, 4, 9, 6))
    big = Region.from_polygon(box(7, 2, 9.5, 8))
    c_small, c_big = motion_cost(env, start, small), motion_cost(env, start, big)
    assert c_big <= c_small + 1e-9
    assert c_small >= distance(small, start) - 1e-9
    assert c_big >= distance(big, start) - 1e-9
