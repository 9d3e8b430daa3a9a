"""Stage 2: exact UAV positions and RIS phases inside the stage-1 tube.

Each tube segment is cut into ``slots_per_segment`` slots. Every slot owns a
sphere on the straight line between consecutive tube centers; random points
in the sphere are screened for LoS and SNR, and the point with the smallest
BS-UAV times UAV-terminal distance product is kept. The objective is a sum of
independent per-slot terms, so the per-slot choice is the global optimum over
the sampled points.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import random_streams
from .channel import direct_gain, link_sample, slot_cost
from .errors import Stage2Infeasible
from .geometry import distance, horizontal_distance
from .kinematics import wrap_angle, wrap_heading
from .stage1 import TubePath, serving_station
from .world import PlannerConfig, RouteWaypoint, Scenario

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlotSphere:
    k: int
    epsilon: int
    center: tuple[float, float, float]
    radius: float
    mt_position: tuple[float, float, float]
    dt: float
    heading: float = 0.0


@dataclass(frozen=True)
class SlotReport:
    k: int
    epsilon: int
    position: tuple[float, float, float]
    heading: float
    serving_bs: int
    phases: tuple[float, ...]
    aoa_cos: float
    aod_cos: float
    snr: float
    rate: float
    cost: float
    dist_bs_uav: float
    dist_uav_mt: float
    mt_position: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "epsilon": self.epsilon,
            "position": list(self.position),
            "heading": self.heading,
            "serving_bs": self.serving_bs,
            "phases": list(self.phases),
            "aoa_cos": self.aoa_cos,
            "aod_cos": self.aod_cos,
            "snr": self.snr,
            "rate": self.rate,
        }


@dataclass(frozen=True)
class RefinedTrajectory:
    slots: tuple[SlotReport, ...]
    objective: float


def _lerp(a, b, t: float) -> tuple[float, float, float]:
    return tuple(float(x + (y - x) * t) for x, y in zip(a, b))


def discretize_tube(tube: TubePath, route: Sequence[RouteWaypoint],
                    cfg: PlannerConfig) -> list[SlotSphere]:
    """Slot spheres along every tube segment, ``epsilon = 1..E`` per segment."""
    n_slots = cfg.slots_per_segment
    out = []
    for k in range(1, len(tube.steps)):
        a, b = tube.steps[k - 1], tube.steps[k]
        dt = route[k].travel_time_s / n_slots
        turn = wrap_angle(b.pose.heading - a.pose.heading)
        for eps in range(1, n_slots + 1):
            t = eps / n_slots
            center = b.pose.position if eps == n_slots else _lerp(a.pose.position, b.pose.position, t)
            mt = (route[k].position if eps == n_slots
                  else _lerp(route[k - 1].position, route[k].position, t))
            out.append(SlotSphere(k, eps, center, b.radius, mt, dt,
                                  wrap_heading(a.pose.heading + turn * t)))
    return out


def sample_slot_positions(slot: SlotSphere, cfg: PlannerConfig, lim,
                          rng: np.random.Generator) -> list[tuple[float, float, float]]:
    """Sphere center followed by ``b_per_slot`` uniform points in the ball.

    Altitudes are clipped into the flight band; since the center itself lies
    in the band, clipping only moves a point towards the center.
    """
    n = cfg.b_per_slot
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = slot.radius * np.cbrt(rng.random(n))
    pts = np.asarray(slot.center) + direction * radius[:, None]
    pts[:, 2] = np.clip(pts[:, 2], lim.z_min, lim.z_max)
    return [tuple(slot.center)] + [tuple(float(c) for c in p) for p in pts]


def _admissible(points, slot: SlotSphere, scenario: Scenario):
    kept = []
    for i, p in enumerate(points):
        found = serving_station(p, slot.mt_position, scenario, slot.heading)
        if found is not None:
            kept.append((i, p, found[0]))
    return kept


def filter_slot_positions(points, slot: SlotSphere, scenario: Scenario) -> list[tuple[float, float, float]]:
    """Points with LoS on both hops and optimal-phase SNR at or above threshold."""
    kept = [p for _, p, _ in _admissible(points, slot, scenario)]
    if not kept:
        raise Stage2Infeasible("no admissible position in slot sphere",
                               k=slot.k, epsilon=slot.epsilon)
    return kept


def _choose(slot: SlotSphere, candidates, scenario: Scenario) -> SlotReport:
    # candidates: (index, position, serving bs); argmin cost, ties -> smallest index
    best = None
    for i, p, n in candidates:
        c = slot_cost(scenario.base_stations[n].position, p, slot.mt_position)
        if best is None or c < best[0]:
            best = (c, p, n)
    cost, p, n = best
    bs = scenario.base_stations[n].position
    sample, phases = link_sample(bs, p, slot.mt_position, scenario.channel)
    return SlotReport(slot.k, slot.epsilon, p, slot.heading, n, tuple(float(v) for v in phases),
                      sample.aoa_cos, sample.aod_cos, sample.snr, sample.rate, cost,
                      distance(bs, p), distance(p, slot.mt_position), slot.mt_position)


def select_refined_trajectory(slots: Sequence[SlotSphere], candidates: Sequence[Sequence],
                              scenario: Scenario) -> RefinedTrajectory:
    """Pick the cheapest admissible point per slot; ``candidates[i]`` belongs to ``slots[i]``."""
    return _assemble(slots, [_admissible(c, s, scenario) for s, c in zip(slots, candidates)],
                     scenario)


def _assemble(slots, admissible, scenario: Scenario) -> RefinedTrajectory:
    reports = []
    for slot, cands in zip(slots, admissible):
        if not cands:
            raise Stage2Infeasible("no admissible position in slot sphere",
                                   k=slot.k, epsilon=slot.epsilon)
        reports.append(_choose(slot, cands, scenario))
    objective = 0.0
    for r in reports:
        objective = objective + r.cost
    return RefinedTrajectory(tuple(reports), objective)


def refine(tube: TubePath, scenario: Scenario, threads: int = 1) -> RefinedTrajectory:
    """Run the whole second stage for one tube."""
    cfg = scenario.planner
    slots = discretize_tube(tube, scenario.route, cfg)

    def per_slot(slot: SlotSphere):
        rng = random_streams.stream(cfg.rng_seed, random_streams.STAGE2, slot.k, slot.epsilon)
        pts = sample_slot_positions(slot, cfg, scenario.limits, rng)
        return _admissible(pts, slot, scenario)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            candidates = list(pool.map(per_slot, slots))
    else:
        candidates = [per_slot(s) for s in slots]
    return _assemble(slots, candidates, scenario)


def speed_warnings(traj: RefinedTrajectory, scenario: Scenario) -> list[dict]:
    """Consecutive slot hops faster than ``v_max + 2r/dt`` (tube speed plus sphere slack)."""
    lim = scenario.limits
    r = scenario.planner.sphere_radius_m
    warnings = []
    for prev, cur in zip(traj.slots, traj.slots[1:]):
        dt = scenario.route[cur.k].travel_time_s / scenario.planner.slots_per_segment
        allowed = lim.v_max + 2.0 * r / dt
        speed = horizontal_distance(prev.position, cur.position) / dt
        if speed > allowed:
            warnings.append({"k": cur.k, "epsilon": cur.epsilon,
                             "speed": speed, "allowed": allowed})
    for w in warnings:
        log.warning("slot (%d, %d): hop speed %.2f m/s exceeds %.2f m/s",
                    w["k"], w["epsilon"], w["speed"], w["allowed"])
    return warnings


def evaluate_trajectory(traj: RefinedTrajectory, scenario: Scenario,
                        include_direct: bool = True) -> dict:
    """Per-slot SNR and rate with a seeded Rayleigh direct-link draw, plus summary stats.

    Slot ``i`` (0-based over the whole trajectory) uses its own fading stream,
    so adding or removing slots elsewhere never changes its draw.
    """
    cp = scenario.channel
    seed = scenario.planner.rng_seed
    rows = []
    for i, s in enumerate(traj.slots):
        bs = scenario.base_stations[s.serving_bs].position
        if include_direct:
            g = direct_gain(bs, s.mt_position, cp, random_streams.stream(seed, random_streams.FADING, i))
        else:
            g = 0j
        sample, _ = link_sample(bs, s.position, s.mt_position, cp, direct=g)
        rows.append({
            "slot_index": i,
            "k": s.k,
            "epsilon": s.epsilon,
            "snr": sample.snr,
            "rate": sample.rate,
            "snr_reflected": s.snr,
            "dist_bs_uav": s.dist_bs_uav,
            "dist_uav_mt": s.dist_uav_mt,
        })
    snrs = [r["snr"] for r in rows]
    rate_seconds = 0.0
    for s, r in zip(traj.slots, rows):
        rate_seconds += r["rate"] * scenario.route[s.k].travel_time_s / scenario.planner.slots_per_segment
    return {
        "slots": rows,
        "min_snr": min(snrs),
        "mean_snr": sum(snrs) / len(snrs),
        "min_snr_reflected": min(r["snr_reflected"] for r in rows),
        "total_rate_seconds": rate_seconds,
    }
