"""Stage 1: a minimum-energy, line-of-sight-secured tube through the route points.

Candidate poses are drawn around every route point and screened for
line of sight, SNR and obstacle clearance. Consecutive layers are joined by
speed-feasible edges, and an exact dynamic program over (layer, incoming edge)
states picks the acceleration-feasible chain of least energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import random_streams
from .channel import optimal_snr
from .errors import EnumerationLimitError, Stage1Infeasible
from .geometry import distance, los_clear, same_side_check, sphere_intersects_aabb
from .kinematics import (HOVER, ControlInput, Pose, check_accel, check_speed,
                         step_energy, step_input)
from .world import KinematicLimits, PlannerConfig, RouteWaypoint, Scenario

ENUMERATION_LIMIT = 10 ** 6


@dataclass(frozen=True)
class CandidateNode:
    k: int
    q: int
    pose: Pose
    sphere_radius: float
    serving_bs: int = -1
    snr: float = 0.0


@dataclass
class LayeredGraph:
    """Candidate layers plus speed-feasible edges between neighbouring layers.

    ``edges[k]`` maps ``(q_prev, q)`` to the step input for layer ``k``
    (``edges[0]`` is empty). ``dts[k]`` is the leg duration into layer ``k``.
    """
    layers: list[list[CandidateNode]]
    dts: list[float]
    edges: list[dict[tuple[int, int], ControlInput]] = field(default_factory=list)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def out_edges(self, k: int, q_prev: int) -> Iterator[tuple[int, ControlInput]]:
        for (a, b), inp in self.edges[k].items():
            if a == q_prev:
                yield b, inp


@dataclass(frozen=True)
class TubeStep:
    k: int
    q: int
    pose: Pose
    radius: float
    input: ControlInput
    cumulative_energy: float
    serving_bs: int


@dataclass(frozen=True)
class TubePath:
    steps: tuple[TubeStep, ...]
    total_energy: float

    @property
    def q_sequence(self) -> tuple[int, ...]:
        return tuple(s.q for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "total_energy": self.total_energy,
            "steps": [
                {
                    "k": s.k,
                    "q": s.q,
                    "center": list(s.pose.position),
                    "heading": s.pose.heading,
                    "radius": s.radius,
                    "input": s.input.as_list(),
                    "cumulative_energy": s.cumulative_energy,
                    "serving_bs": s.serving_bs,
                }
                for s in self.steps
            ],
        }


# --- candidates -----------------------------------------------------------

def sample_candidates(k: int, route_point: RouteWaypoint, cfg: PlannerConfig,
                      lim: KinematicLimits, rng: np.random.Generator,
                      count: int | None = None) -> list[CandidateNode]:
    """Draw poses uniformly over the admissible cylinder above ``route_point``."""
    n = cfg.q_per_point if count is None else count
    radius = cfg.max_horiz_offset_m * np.sqrt(rng.random(n))
    bearing = rng.uniform(0.0, 2.0 * math.pi, n)
    z = rng.uniform(lim.z_min, lim.z_max, n)
    heading = rng.uniform(0.0, 2.0 * math.pi, n)
    cx, cy = route_point.position[0], route_point.position[1]
    nodes = []
    for i in range(n):
        pos = (float(cx + radius[i] * math.cos(bearing[i])),
               float(cy + radius[i] * math.sin(bearing[i])),
               float(z[i]))
        nodes.append(CandidateNode(k, i, Pose(pos, float(heading[i])), cfg.sphere_radius_m))
    return nodes


def serving_station(position, mt, scenario: Scenario, heading: float = 0.0):
    """Best visible base station for a UAV at ``position``.

    Returns ``(index, snr)`` of the station with the highest optimal-phase SNR
    among those with line of sight to the UAV, or ``None`` when the UAV-terminal
    hop is blocked or no station qualifies.
    """
    world = scenario.world
    if not los_clear(position, mt, world):
        return None
    best = None
    for n, bs in enumerate(scenario.base_stations):
        if distance(bs.position, position) == 0.0 or distance(position, mt) == 0.0:
            continue
        if scenario.planner.enable_same_side and not same_side_check(
                bs.position, Pose(tuple(position), heading), mt):
            continue
        if not los_clear(bs.position, position, world):
            continue
        s = optimal_snr(bs.position, position, mt, scenario.channel)
        if s >= scenario.channel.snr_min and (best is None or s > best[1]):
            best = (n, s)
    return best


def _admit(node: CandidateNode, scenario: Scenario) -> CandidateNode | None:
    for box in scenario.world.boxes:
        if sphere_intersects_aabb(node.pose.position, node.sphere_radius, box):
            return None
    mt = scenario.route[node.k].position
    found = serving_station(node.pose.position, mt, scenario, node.pose.heading)
    if found is None:
        return None
    return CandidateNode(node.k, node.q, node.pose, node.sphere_radius, found[0], found[1])


def filter_candidates(nodes: Sequence[CandidateNode], scenario: Scenario) -> list[CandidateNode]:
    """Keep nodes with obstacle-free spheres, two-hop LoS and SNR above threshold."""
    kept = [a for a in (_admit(n, scenario) for n in nodes) if a is not None]
    if scenario.planner.sphere_dispersion:
        kept = _disperse(kept)
    if nodes and not kept:
        raise Stage1Infeasible("no candidate survives the LoS/SNR filter", k=nodes[0].k)
    return kept


def _disperse(nodes: Sequence[CandidateNode], accepted: Sequence[CandidateNode] = ()) -> list[CandidateNode]:
    # greedy in draw order: a sphere may not overlap an earlier accepted one
    out = list(accepted)
    for n in nodes:
        if all(distance(n.pose.position, m.pose.position) > n.sphere_radius + m.sphere_radius
               for m in out):
            out.append(n)
    return out[len(accepted):]


def _incoming(node: CandidateNode, prev_layer: Sequence[CandidateNode],
              reach: dict[int, list[ControlInput]], dt: float,
              lim: KinematicLimits) -> dict[int, ControlInput]:
    """Edges into ``node`` that extend some feasible chain ending at a previous candidate.

    ``reach[q]`` lists the inputs on which feasible chains arrive at previous
    candidate ``q``. Returns ``{q_prev: input}``.
    """
    out = {}
    for p in prev_layer:
        arrivals = reach.get(p.q)
        if not arrivals:
            continue
        inp = step_input(p.pose, node.pose, dt)
        if check_speed(inp, lim) and any(check_accel(a, inp, dt, lim) for a in arrivals):
            out[p.q] = inp
    return out


def grow_layers(scenario: Scenario) -> list[list[CandidateNode]]:
    """Collect up to ``q_per_point`` admissible candidates for every route point.

    Each round draws ``q_per_point`` fresh poses; up to ``max_sample_rounds``
    rounds are used. With ``require_predecessor`` the layers grow like a tree:
    a candidate is only kept when a speed- and acceleration-feasible chain from
    the first layer reaches it.
    """
    cfg = scenario.planner
    lim = scenario.limits
    layers: list[list[CandidateNode]] = []
    reach: dict[int, list[ControlInput]] = {}
    for k, wp in enumerate(scenario.route):
        rng = random_streams.stream(cfg.rng_seed, random_streams.STAGE1, k)
        dt = wp.travel_time_s
        kept: list[CandidateNode] = []
        arrivals: list[dict[int, ControlInput]] = []
        for _ in range(cfg.max_sample_rounds):
            batch = [a for a in (_admit(n, scenario) for n in
                                 sample_candidates(k, wp, cfg, lim, rng)) if a is not None]
            if cfg.sphere_dispersion:
                batch = _disperse(batch, kept)
            for n in batch:
                if len(kept) >= cfg.q_per_point:
                    break
                if k > 0 and cfg.require_predecessor:
                    into = _incoming(n, layers[-1], reach, dt, lim)
                    if not into:
                        continue
                    arrivals.append(into)
                kept.append(n)
            if len(kept) >= cfg.q_per_point:
                break
        if not kept:
            raise Stage1Infeasible("no admissible candidate near route point", k=k)
        layers.append([CandidateNode(k, q, n.pose, n.sphere_radius, n.serving_bs, n.snr)
                       for q, n in enumerate(kept)])
        if k == 0:
            reach = {q: [HOVER] for q in range(len(kept))}
        elif cfg.require_predecessor:
            reach = {q: list(into.values()) for q, into in enumerate(arrivals)}
    return layers


# --- graph and search -----------------------------------------------------

def build_layered_graph(layers: Sequence[Sequence[CandidateNode]],
                        route: Sequence[RouteWaypoint],
                        lim: KinematicLimits) -> LayeredGraph:
    if len(layers) != len(route):
        raise ValueError(f"{len(layers)} layers for {len(route)} route points")
    for k, layer in enumerate(layers):
        if not layer:
            raise Stage1Infeasible("empty candidate layer", k=k)
    dts = [w.travel_time_s for w in route]
    edges: list[dict] = [{}]
    for k in range(1, len(layers)):
        ek = {}
        for a in layers[k - 1]:
            for b in layers[k]:
                inp = step_input(a.pose, b.pose, dts[k])
                if check_speed(inp, lim):
                    ek[(a.q, b.q)] = inp
        if not ek:
            raise Stage1Infeasible("no speed-feasible edge into route point", k=k)
        edges.append(ek)
    return LayeredGraph([list(l) for l in layers], dts, edges)


def min_energy_path(graph: LayeredGraph, cfg: PlannerConfig, lim: KinematicLimits) -> TubePath:
    """Exact minimum-energy chain under the edge-pair acceleration limits.

    DP state is the incoming edge of a layer; energy terms are added in layer
    order so the total matches :func:`kinematics.trajectory_energy` bit for bit.
    Equal energies are resolved by the lexicographically smallest q sequence.
    """
    a1, a2 = cfg.alpha1, cfg.alpha2
    if graph.n_layers == 1:
        only = min(graph.layers[0], key=lambda n: n.q)
        return _assemble(graph, (only.q,), [0.0])

    # state (q_prev, q) -> (cost, q path, per-step cumulative energies)
    best: dict[tuple[int, int], tuple[float, tuple[int, ...], list[float]]] = {}
    dt = graph.dts[1]
    for (a, b), inp in graph.edges[1].items():
        if check_accel(HOVER, inp, dt, lim):
            c = 0.0 + step_energy(HOVER, inp, dt, a1, a2)
            best[(a, b)] = (c, (a, b), [0.0, c])
    if not best:
        raise Stage1Infeasible("no acceleration-feasible start from hover", k=1)

    for k in range(2, graph.n_layers):
        dt = graph.dts[k]
        nxt: dict = {}
        for (a, b), (cost, path, cum) in best.items():
            prev_inp = graph.edges[k - 1][(a, b)]
            for c, inp in graph.out_edges(k, b):
                if not check_accel(prev_inp, inp, dt, lim):
                    continue
                new_cost = cost + step_energy(prev_inp, inp, dt, a1, a2)
                cand = (new_cost, path + (c,), cum + [new_cost])
                cur = nxt.get((b, c))
                if cur is None or (cand[0], cand[1]) < (cur[0], cur[1]):
                    nxt[(b, c)] = cand
        if not nxt:
            raise Stage1Infeasible("no acceleration-feasible chain reaches route point", k=k)
        best = nxt

    cost, path, cum = min(best.values(), key=lambda v: (v[0], v[1]))
    return _assemble(graph, path, cum)


def path_inputs(graph: LayeredGraph, path: Sequence[int]) -> list[ControlInput]:
    return [graph.edges[k][(path[k - 1], path[k])] for k in range(1, len(path))]


def _assemble(graph: LayeredGraph, path: Sequence[int], cum: Sequence[float]) -> TubePath:
    inputs = [HOVER] + path_inputs(graph, path)
    steps = []
    for k, q in enumerate(path):
        node = graph.layers[k][q]
        steps.append(TubeStep(k, q, node.pose, node.sphere_radius, inputs[k], cum[k],
                              node.serving_bs))
    return TubePath(tuple(steps), cum[-1])


def path_energy(graph: LayeredGraph, path: Sequence[int], cfg: PlannerConfig) -> float:
    """Energy of a q sequence, summed left to right from hover."""
    total = 0.0
    prev = HOVER
    for k, inp in enumerate(path_inputs(graph, path), start=1):
        total = total + step_energy(prev, inp, graph.dts[k], cfg.alpha1, cfg.alpha2)
        prev = inp
    return total


def path_is_valid(graph: LayeredGraph, path: Sequence[int], lim: KinematicLimits) -> bool:
    prev = HOVER
    for k in range(1, len(path)):
        inp = graph.edges[k].get((path[k - 1], path[k]))
        if inp is None or not check_accel(prev, inp, graph.dts[k], lim):
            return False
        prev = inp
    return True


def enumerate_valid_paths(graph: LayeredGraph, lim: KinematicLimits, cfg: PlannerConfig,
                          limit: int = ENUMERATION_LIMIT) -> list[tuple[tuple[int, ...], float]]:
    """Every speed- and acceleration-feasible chain with its energy (test oracle)."""
    out: list[tuple[tuple[int, ...], float]] = []
    n = graph.n_layers
    if n == 1:
        return [((node.q,), 0.0) for node in graph.layers[0]]

    def walk(path: tuple[int, ...], prev: ControlInput, energy: float):
        k = len(path)
        if k == n:
            out.append((path, energy))
            if len(out) > limit:
                raise EnumerationLimitError(f"more than {limit} valid paths")
            return
        for c, inp in graph.out_edges(k, path[-1]):
            if check_accel(prev, inp, graph.dts[k], lim):
                walk(path + (c,), inp, energy + step_energy(prev, inp, graph.dts[k],
                                                            cfg.alpha1, cfg.alpha2))

    for node in graph.layers[0]:
        walk((node.q,), HOVER, 0.0)
    return out


def _completion_counts(graph: LayeredGraph, lim: KinematicLimits) -> list[dict]:
    """counts[k][(a, b)]: number of feasible completions after taking edge (a, b) into layer k."""
    n = graph.n_layers
    counts: list[dict] = [dict() for _ in range(n)]
    for e in graph.edges[n - 1]:
        counts[n - 1][e] = 1
    for k in range(n - 2, 0, -1):
        for (a, b), inp in graph.edges[k].items():
            total = 0
            for c, nxt in graph.out_edges(k + 1, b):
                if check_accel(inp, nxt, graph.dts[k + 1], lim):
                    total += counts[k + 1][(b, c)]
            counts[k][(a, b)] = total
    return counts


def count_valid_paths(graph: LayeredGraph, lim: KinematicLimits) -> int:
    """Number of feasible chains, counted without enumerating them."""
    if graph.n_layers == 1:
        return len(graph.layers[0])
    counts = _completion_counts(graph, lim)
    return sum(c for (a, b), c in counts[1].items()
               if check_accel(HOVER, graph.edges[1][(a, b)], graph.dts[1], lim))


def sample_valid_paths(graph: LayeredGraph, lim: KinematicLimits, n: int,
                       rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Draw ``n`` feasible chains uniformly at random (with replacement)."""
    if graph.n_layers == 1:
        return [(int(rng.integers(len(graph.layers[0]))),) for _ in range(n)]
    counts = _completion_counts(graph, lim)
    first = [(e, c) for e, c in counts[1].items()
             if c > 0 and check_accel(HOVER, graph.edges[1][e], graph.dts[1], lim)]
    if not first:
        return []
    out = []
    for _ in range(n):
        weights = np.array([c for _, c in first], dtype=float)
        (a, b), _ = first[rng.choice(len(first), p=weights / weights.sum())]
        path = [a, b]
        prev = graph.edges[1][(a, b)]
        for k in range(2, graph.n_layers):
            opts = [((path[-1], c), inp) for c, inp in graph.out_edges(k, path[-1])
                    if check_accel(prev, inp, graph.dts[k], lim)
                    and counts[k][(path[-1], c)] > 0]
            w = np.array([counts[k][e] for e, _ in opts], dtype=float)
            (_, c), prev = opts[rng.choice(len(opts), p=w / w.sum())]
            path.append(c)
        out.append(tuple(path))
    return out


def plan_tube(scenario: Scenario) -> tuple[TubePath, LayeredGraph]:
    layers = grow_layers(scenario)
    graph = build_layered_graph(layers, scenario.route, scenario.limits)
    tube = min_energy_path(graph, scenario.planner, scenario.limits)
    return tube, graph
