import numpy as np
import pytest
import shapely

import oracles
import scenarios
from losnet import NoVehicles, Region, ScoreParams, box, communication_check, place
from losnet.geometry import los_visible
from losnet.placement import (
    LabeledFace,
    assign_label,
    assign_score,
    component_graph,
    decompose,
    deploy,
    greedy_cover,
    label_faces,
    served_units,
    tour_cost,
    tour_sequence,
)


def _sq(x0, y0, x1, y1):
    return Region.from_polygon(box(x0, y0, x1, y1))


def test_two_overlapping_squares_give_five_faces():
    vis = [_sq(0, 0, 2, 2), _sq(1, 0, 3, 2)]
    env = scenarios.open_room()
    faces = decompose(env, [(0.5, 1), (2.5, 1)], vis)
    assert len(faces) == 5
    areas = sorted(round(f.area, 9) for f in faces)
    assert areas == [2.0, 2.0, 2.0, 4.0, 4.0]
    labels = sorted(sorted(assign_label(f, vis)) for f in faces)
    assert labels == [[0], [0], [0, 1], [1], [1]]


def test_identical_visibility_is_not_duplicated():
    env = scenarios.open_room()
    faces = label_faces(env, [(2, 2), (8, 8)])
    # both units see the whole room: one face labelled with both
    assert len(faces) == 1
    assert faces[0].label == {0, 1}
    assert faces[0].area == pytest.approx(100.0)


def test_score_formula():
    face = _sq(0, 0, 1, 1)
    assert assign_score(face, {0}, [(0.5, 0.5)]) == pytest.approx(1e6 + 1)
    s = assign_score(face, {0, 1}, [(0.5, 0.5), (4, 0.5)], ScoreParams(1e6, 2.0, 0.5))
    assert s == pytest.approx(0.5 + 2e6 - 2.0 * 3.0)


def test_score_params_require_dominant_alpha():
    with pytest.raises(ValueError):
        ScoreParams(alpha=10.0, beta=1.0, gamma=1.0)


def test_greedy_prefers_gain_then_score():
    f = lambda label, score, idx: LabeledFace(_sq(idx, 0, idx + 1, 1), frozenset(label), score, idx)
    faces = [f({0}, 5.0, 0), f({0, 1}, 1.0, 1), f({0, 1}, 2.0, 2), f({2}, 1.0, 3)]
    cover = greedy_cover(faces, [(0, 0)] * 3)
    assert [c.index for c in cover.selected] == [2, 3]
    assert cover.covered == {0, 1, 2}


def test_greedy_cover_covers_every_unit_and_matches_oracle_bound():
    env = scenarios.three_rooms()
    for units in (scenarios.TWO_FACE_UNITS, scenarios.STATIC_UNITS, scenarios.PATROL_UNITS):
        faces = label_faces(env, units)
        cover = greedy_cover(faces, units)
        assert cover.covered == set(range(len(units)))
        assert len(cover) >= oracles.min_cover_size([f.label for f in faces], range(len(units)))


def test_face_labels_agree_with_sampled_visibility():
    env = scenarios.three_rooms()
    units = scenarios.TWO_FACE_UNITS
    free = oracles.free_geometry(env)
    for face in label_faces(env, units)[:8]:
        p = face.polygon.geometry.representative_point()
        sees = oracles.shapely_los(free, (p.x, p.y), units)
        assert face.label <= {j for j, s in enumerate(sees) if s}


def test_deploy_static_case():
    env = scenarios.three_rooms()
    plan = place(env, scenarios.STATIC_UNITS, 3)
    assert plan.case == "static"
    assert len(plan.cover) == 3
    assert plan.tour is None and plan.patroller is None
    state = plan.vehicle_state(scenarios.STATIC_UNITS)
    assert communication_check(state, env).valid


def test_deploy_patrol_case():
    env = scenarios.three_rooms()
    units = scenarios.PATROL_UNITS
    plan = place(env, units, 3)
    assert plan.case == "patrol"
    assert len(plan.positions) == 2 and plan.patroller == 2
    assert len(plan.component_polygons) == 1
    assert plan.uncovered == [2]
    assert plan.tour is not None and plan.tour.length > 0
    assert all(served_units(env, plan, units).values())
    # the static pair sees each other
    a, b = (plan.positions[v] for v in sorted(plan.positions))
    assert los_visible(env, a, b)


def test_deploy_single_and_tour_all():
    env = scenarios.three_rooms()
    plan = place(env, [(1, 1)], 2)
    assert plan.case == "single" and plan.positions.keys() == {0}
    state = plan.vehicle_state([(1, 1)])
    assert state.vehicles[1].point == state.vehicles[0].point  # spare parks with vehicle 0
    plan = place(env, scenarios.TWO_FACE_UNITS, 1)
    assert plan.case == "tour_all" and plan.patroller == 0
    assert all(served_units(env, plan, scenarios.TWO_FACE_UNITS).values())


def test_deploy_needs_a_vehicle():
    env = scenarios.three_rooms()
    cover = greedy_cover(label_faces(env, scenarios.TWO_FACE_UNITS), scenarios.TWO_FACE_UNITS)
    with pytest.raises(NoVehicles):
        deploy(cover, 0, env)


def test_component_graph_uses_geodesic_distances():
    env = scenarios.walled_room()
    regions = [_sq(1, 4, 2, 6), _sq(8, 4, 9, 6), _sq(1, 1, 2, 2)]
    W = component_graph(regions, env)
    assert W.shape == (3, 3) and np.allclose(W, W.T)
    assert np.all(np.diag(W) == 0)
    # around the wall end: longer than the straight 6 m gap
    assert W[0, 1] > 6.0
    assert W[0, 2] == pytest.approx(2.0)


def test_tour_sequence_exact_and_heuristic():
    rng = np.random.default_rng(2)
    for k in range(2, 10):
        P = rng.uniform(0, 10, size=(k, 2))
        W = np.hypot(*(P[:, None] - P[None]).transpose(2, 0, 1))
        exact = tour_cost(W, tour_sequence(W))
        assert exact == pytest.approx(oracles.exact_tour_cost(W))
        heur = tour_sequence(W, seed=1, exact_limit=0)
        assert sorted(heur) == list(range(k)) and heur[0] == 0
        assert tour_cost(W, heur) <= 1.5 * exact + 1e-9
        assert heur == tour_sequence(W, seed=1, exact_limit=0)


def test_place_is_deterministic():
    env = scenarios.three_rooms()
    a = place(env, scenarios.PATROL_UNITS, 3, seed=5)
    b = place(env, scenarios.PATROL_UNITS, 3, seed=5)
    assert a.positions == b.positions
    assert a.tour.path.waypoints == b.tour.path.waypoints
    assert shapely.equals(a.component_polygons[0].geometry, b.component_polygons[0].geometry)
