"""Relay/unit visibility graphs, Laplacian spectra and communication-validity checks."""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ValidationError
from .geometry import Environment, Point2, as_point, los_visible_many

LAMBDA2_EPS = 1e-9
JACOBI_TOL = 1e-12


@dataclass(frozen=True)
class VehiclePose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        x, y = as_point((self.x, self.y))
        if not math.isfinite(float(self.theta)):
            raise ValidationError(f"non-finite heading {self.theta!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def point(self) -> Point2:
        return Point2(float(self.x), float(self.y))


@dataclass(frozen=True)
class SystemState:
    vehicles: tuple[VehiclePose, ...]
    units: tuple[Point2, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        object.__setattr__(self, "units", tuple(as_point(u) for u in self.units))

    @property
    def n(self) -> int:
        return len(self.vehicles)

    @property
    def m(self) -> int:
        return len(self.units)

    def vehicle_points(self) -> np.ndarray:
        return np.array([(v.x, v.y) for v in self.vehicles], dtype=float).reshape(-1, 2)

    def unit_points(self) -> np.ndarray:
        return np.array(self.units, dtype=float).reshape(-1, 2)

    def with_vehicle(self, i: int, pose: VehiclePose) -> "SystemState":
        vs = list(self.vehicles)
        vs[i] = pose
        return SystemState(tuple(vs), self.units)

    def with_units(self, units) -> "SystemState":
        return SystemState(self.vehicles, tuple(units))


@dataclass(frozen=True, eq=False)
class VisGraph:
    """Undirected graph over ``n_vehicles`` vehicle nodes followed by unit nodes."""

    n_vehicles: int
    adjacency: np.ndarray

    @property
    def size(self) -> int:
        return self.adjacency.shape[0]

    @property
    def node_ids(self) -> list[tuple[str, int]]:
        return [("vehicle", i) if i < self.n_vehicles else ("unit", i - self.n_vehicles) for i in range(self.size)]

    def degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(int)

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def neighbors(self, i: int) -> list[int]:
        return np.nonzero(self.adjacency[i])[0].tolist()

    def union(self, other: "VisGraph") -> "VisGraph":
        a, b = self.adjacency, other.adjacency
        size = max(a.shape[0], b.shape[0])
        out = np.zeros((size, size), dtype=bool)
        out[: a.shape[0], : a.shape[0]] |= a
        out[: b.shape[0], : b.shape[0]] |= b
        return VisGraph(max(self.n_vehicles, other.n_vehicles), out)

    def without(self, nodes: Iterable[int]) -> "VisGraph":
        drop = set(nodes)
        keep = [i for i in range(self.size) if i not in drop]
        nv = sum(1 for i in keep if i < self.n_vehicles)
        return VisGraph(nv, self.adjacency[np.ix_(keep, keep)])


def _pairwise_visibility(env: Environment, sources: np.ndarray, targets: np.ndarray) -> np.ndarray:
    out = np.zeros((len(sources), len(targets)), dtype=bool)
    for i, s in enumerate(sources):
        if len(targets):
            out[i] = los_visible_many(env, s, targets)
    return out


def build_relay_graph(state: SystemState, env: Environment) -> VisGraph:
    q = state.vehicle_points()
    adj = _pairwise_visibility(env, q, q)
    adj = adj | adj.T
    np.fill_diagonal(adj, False)
    return VisGraph(state.n, adj)


def build_unit_graph(state: SystemState, env: Environment) -> VisGraph:
    n, m = state.n, state.m
    adj = np.zeros((n + m, n + m), dtype=bool)
    if m:
        vis = _pairwise_visibility(env, state.vehicle_points(), state.unit_points())
        adj[:n, n:] = vis
        adj[n:, :n] = vis.T
    return VisGraph(n, adj)


def laplacian(g: VisGraph) -> np.ndarray:
    """Integer Laplacian ``DEG - ADJ``."""
    adj = g.adjacency.astype(np.int64)
    return np.diag(adj.sum(axis=1)) - adj


def jacobi_eigenvalues(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if n < 2:
        return np.diag(a).copy()
    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a))).max()
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


def algebraic_connectivity(lap: np.ndarray) -> float:
    """Second-smallest Laplacian eigenvalue; ``inf`` for a single node (connected by convention)."""
    lap = np.asarray(lap)
    if lap.shape[0] <= 1:
        return math.inf
    lam = float(jacobi_eigenvalues(lap)[1])
    # clamp round-off around the structural zero
    return 0.0 if abs(lam) < LAMBDA2_EPS else lam


def is_connected(g: VisGraph) -> bool:
    return g.size <= 1 or algebraic_connectivity(laplacian(g)) > LAMBDA2_EPS


class Verdict(str, enum.Enum):
    VALID = "valid"
    INVALID_RELAY = "invalid_relay"
    INVALID_UNION = "invalid_union"


@dataclass(frozen=True, eq=False)
class CheckResult:
    verdict: Verdict
    relay: VisGraph
    units: VisGraph
    union: VisGraph | None
    lambda2_relay: float
    lambda2_union: float | None

    @property
    def valid(self) -> bool:
        return self.verdict is Verdict.VALID


def communication_check(state: SystemState, env: Environment) -> CheckResult:
    """Two-stage validity check: relay graph first, then the vehicle+unit union graph."""
    ga = build_relay_graph(state, env)
    gb = build_unit_graph(state, env)
    lam_a = algebraic_connectivity(laplacian(ga))
    if lam_a <= LAMBDA2_EPS:
        return CheckResult(Verdict.INVALID_RELAY, ga, gb, None, lam_a, None)
    g = gb.union(ga)
    lam = algebraic_connectivity(laplacian(g))
    verdict = Verdict.VALID if lam > LAMBDA2_EPS else Verdict.INVALID_UNION
    return CheckResult(verdict, ga, gb, g, lam_a, lam)


# ---------------------------------------------------------------------------
# distributed check (echo-style message passing, synchronous rounds)


@dataclass(frozen=True)
class Message:
    round: int
    sender: int
    receiver: int
    kind: str  # "query" | "response"
    coverage: frozenset

    def to_record(self) -> dict:
        return {
            "round": self.round,
            "sender": self.sender,
            "receiver": self.receiver,
            "kind": self.kind,
            "coverage_size": len(self.coverage),
        }


@dataclass
class AgentMailbox:
    agent_id: int
    inbox: deque = field(default_factory=deque)


@dataclass
class MessageTrace:
    messages: list[Message] = field(default_factory=list)
    rounds: int = 0

    def __len__(self):
        return len(self.messages)

    def to_lines(self) -> str:
        return "".join(json.dumps(m.to_record(), sort_keys=True) + "\n" for m in self.messages)


@dataclass
class _Agent:
    vid: int
    neighbors: list[int]
    local: frozenset
    parent: int | None = None
    engaged: bool = False
    heard: set = field(default_factory=set)
    alpha: set = field(default_factory=set)
    done: bool = False


def distributed_check(
    state: SystemState,
    env: Environment,
    initiator: int = 0,
    *,
    max_rounds: int | None = None,
) -> tuple[bool, MessageTrace]:
    """Simulate the per-vehicle coverage-merging protocol from ``initiator``.

    Every vehicle knows only its own LoS neighbourhood ``h_i`` (visible vehicles
    and units). Queries flood outward over relay edges; a vehicle answers its
    requester once every other neighbour has either answered or sent it a
    query of its own (a repeat query is absorbed, never answered). Each relay
    edge therefore carries exactly two messages. The initiator succeeds when
    the merged coverage equals all vehicles and units.
    """
    n, m = state.n, state.m
    if not 0 <= initiator < n:
        raise ValueError(f"initiator {initiator} is not a vehicle")
    ga = build_relay_graph(state, env)
    gb = build_unit_graph(state, env)
    agents = []
    for i in range(n):
        nbrs = ga.neighbors(i)
        seen_units = [("unit", j - n) for j in gb.neighbors(i)]
        local = frozenset([("vehicle", i)] + [("vehicle", k) for k in nbrs] + seen_units)
        agents.append(_Agent(i, nbrs, local, alpha=set(local)))
    boxes = {i: AgentMailbox(i) for i in range(n)}
    trace = MessageTrace()
    everyone = {("vehicle", i) for i in range(n)} | {("unit", j) for j in range(m)}
    limit = max_rounds if max_rounds is not None else 2 * n + 2

    outgoing: list[Message] = []

    def send(rnd, a: _Agent, to: int, kind: str):
        msg = Message(rnd, a.vid, to, kind, frozenset(a.alpha) if kind == "response" else a.local)
        outgoing.append(msg)
        trace.messages.append(msg)

    def maybe_finish(rnd, a: _Agent):
        waiting = [k for k in a.neighbors if k != a.parent]
        if a.done or not a.heard.issuperset(waiting):
            return
        a.done = True
        if a.vid != initiator:
            send(rnd, a, a.parent, "response")

    root = agents[initiator]
    root.engaged = True
    for k in root.neighbors:
        send(0, root, k, "query")
    maybe_finish(0, root)

    rnd = 0
    while not root.done:
        if not outgoing or rnd >= limit:
            return False, trace
        rnd += 1
        for msg in outgoing:
            boxes[msg.receiver].inbox.append(msg)
        outgoing = []
        for i in range(n):
            a = agents[i]
            box = boxes[i].inbox
            while box:
                msg = box.popleft()
                a.alpha |= msg.coverage
                if msg.kind == "query" and not a.engaged:
                    a.engaged = True
                    a.parent = msg.sender
                    for k in a.neighbors:
                        if k != msg.sender:
                            send(rnd, a, k, "query")
                else:
                    a.heard.add(msg.sender)
                maybe_finish(rnd, a)
    trace.rounds = rnd
    return root.alpha == everyone, trace


def bfs_components(adjacency: np.ndarray) -> list[list[int]]:
    n = adjacency.shape[0]
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        comp, queue = [], deque([s])
        seen[s] = True
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in np.nonzero(adjacency[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(int(v))
        comps.append(sorted(comp))
    return comps
