import json
import math

import numpy as np
import pytest

import oracles
import scenarios
from losnet import SystemState, Verdict, VehiclePose, VisGraph, communication_check, distributed_check
from losnet.connectivity import (
    algebraic_connectivity,
    bfs_components,
    build_relay_graph,
    build_unit_graph,
    is_connected,
    jacobi_eigenvalues,
    laplacian,
)


def _graph(n, edges, n_vehicles=None):
    a = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        a[i, j] = a[j, i] = True
    return VisGraph(n if n_vehicles is None else n_vehicles, a)


def test_laplacian_of_path():
    lap = laplacian(_graph(3, [(0, 1), (1, 2)]))
    assert lap.dtype.kind == "i"
    assert lap.tolist() == [[1, -1, 0], [-1, 2, -1], [0, -1, 1]]


@pytest.mark.parametrize(
    "n, edges, expected",
    [
        (2, [(0, 1)], 2.0),
        (3, [(0, 1), (1, 2), (0, 2)], 3.0),
        (3, [(0, 1), (1, 2)], 1.0),
        (4, [(0, 1), (1, 2), (2, 3), (3, 0)], 2.0),
        (4, [(0, 1), (2, 3)], 0.0),
        (5, [(0, k) for k in range(1, 5)], 1.0),
    ],
)
def test_lambda2_closed_forms(n, edges, expected):
    assert algebraic_connectivity(laplacian(_graph(n, edges))) == pytest.approx(expected, abs=1e-9)


def test_lambda2_of_path_graphs_matches_formula():
    for n in range(2, 12):
        lam = algebraic_connectivity(laplacian(_graph(n, [(i, i + 1) for i in range(n - 1)])))
        assert lam == pytest.approx(2 - 2 * math.cos(math.pi / n), abs=1e-9)


def test_single_node_is_trivially_connected():
    assert algebraic_connectivity(laplacian(_graph(1, []))) == math.inf


def test_jacobi_matches_numpy_on_random_symmetric():
    rng = np.random.default_rng(1)
    for n in (1, 2, 5, 12):
        a = rng.normal(size=(n, n))
        a = a + a.T
        ours = np.sort(jacobi_eigenvalues(a))
        ref = np.linalg.eigvalsh(a)
        assert np.allclose(ours, ref, atol=1e-9)


def test_visgraph_union_and_without():
    g = _graph(4, [(0, 1), (1, 2), (2, 3)], n_vehicles=2)
    assert g.edges() == [(0, 1), (1, 2), (2, 3)]
    h = g.without([1])
    assert h.n_vehicles == 1 and h.size == 3
    assert not is_connected(h)
    assert bfs_components(h.adjacency) == [[0], [1, 2]]
    u = _graph(2, [(0, 1)]).union(_graph(3, [(1, 2)], n_vehicles=2))
    assert u.edges() == [(0, 1), (1, 2)]
    assert g.node_ids[2] == ("unit", 0)


def test_relay_and_unit_graphs_are_bipartite_and_symmetric():
    env, state = scenarios.cluttered_recoverable()
    ga, gb = build_relay_graph(state, env), build_unit_graph(state, env)
    assert (ga.adjacency == ga.adjacency.T).all()
    assert (gb.adjacency == gb.adjacency.T).all()
    assert not gb.adjacency[: state.n, : state.n].any()
    assert not gb.adjacency[state.n :, state.n :].any()


def test_unit_only_edges_do_not_validate():
    # two vehicles that cannot see each other but share a unit: relay fails first
    env, state = scenarios.split_relay()
    res = communication_check(state, env)
    assert res.verdict is Verdict.INVALID_RELAY
    assert res.union is None and res.lambda2_union is None


def test_zero_units_reduces_to_relay():
    env = scenarios.open_room()
    state = SystemState((VehiclePose(1, 1), VehiclePose(9, 9)), ())
    assert communication_check(state, env).valid


def test_distributed_sends_two_messages_per_relay_edge():
    env, state = scenarios.staircase_case()
    ok, trace = distributed_check(state, env, 0)
    n_edges = len(build_relay_graph(state, env).edges())
    assert len(trace) == 2 * n_edges
    assert ok == communication_check(state, env).valid
    kinds = [m.kind for m in trace.messages]
    assert kinds.count("query") == kinds.count("response") == n_edges
    lines = trace.to_lines().splitlines()
    assert len(lines) == len(trace)
    rec = json.loads(lines[0])
    assert set(rec) == {"round", "sender", "receiver", "kind", "coverage_size"}


def test_distributed_from_every_initiator_on_valid_state():
    env, state = scenarios.path_relay()
    for v in range(state.n):
        ok, trace = distributed_check(state, env, v)
        assert ok
        assert trace.rounds >= 1


def test_distributed_fails_when_relay_split():
    env, state = scenarios.split_relay()
    ok, trace = distributed_check(state, env, 1)
    assert not ok
    assert len(trace) == 0


def test_distributed_single_vehicle():
    env = scenarios.open_room()
    state = SystemState((VehiclePose(5, 5),), ((1, 1), (9, 9)))
    ok, trace = distributed_check(state, env, 0)
    assert ok and len(trace) == 0


def test_distributed_rejects_bad_initiator():
    env, state = scenarios.pair_in_room()
    with pytest.raises(ValueError):
        distributed_check(state, env, 5)


def test_distributed_against_bfs_on_random_states():
    rng = np.random.default_rng(11)
    for _ in range(30):
        env = oracles.random_box_env(rng)
        pts = oracles.random_free_points(env, rng, 7)
        state = SystemState(tuple(VehiclePose(*p) for p in pts[:4]), tuple(pts[4:]))
        gb = build_unit_graph(state, env).union(build_relay_graph(state, env))
        expected = oracles.bfs_connected(build_relay_graph(state, env).adjacency) and oracles.bfs_connected(gb.adjacency)
        assert distributed_check(state, env, int(rng.integers(0, 4)))[0] == expected


def test_vehicle_pose_validates():
    with pytest.raises((ValueError, TypeError)):
        VehiclePose(float("nan"), 0)
