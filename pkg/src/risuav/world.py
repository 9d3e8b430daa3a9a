"""Scenario model: buildings, base stations, the timed terminal route and all limits.

A scenario is one JSON document. Decibel fields carry a ``_db``/``_dbm`` suffix
and are converted to linear units only through the properties on
:class:`ChannelParams`.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .geometry import Aabb

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OccupancyWorld:
    boxes: tuple[Aabb, ...]
    bounds: Aabb
    mt_height_m: float = 0.0

    @cached_property
    def box_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([b.min for b in self.boxes], dtype=float).reshape(-1, 3)
        hi = np.array([b.max for b in self.boxes], dtype=float).reshape(-1, 3)
        return lo, hi


@dataclass(frozen=True)
class BaseStation:
    position: tuple[float, float, float]


@dataclass(frozen=True)
class RouteWaypoint:
    position: tuple[float, float, float]
    travel_time_s: float = 0.0


@dataclass(frozen=True)
class KinematicLimits:
    v_max: float
    u_max: float
    w_max: float
    z_min: float
    z_max: float
    vdot_max: float
    udot_max: float
    wdot_max: float


@dataclass(frozen=True)
class ChannelParams:
    p_bs_dbm: float = 30.0
    noise_dbm: float = -80.0
    rho_db: float = 10.0
    gamma: float = 2.5
    lambda_m: float = 1e-2
    d_m: float = 5e-3
    m_elements: int = 16
    snr_min: float = 1.0
    varpi: float = 0.0

    @property
    def p_bs_w(self) -> float:
        return 10.0 ** ((self.p_bs_dbm - 30.0) / 10.0)

    @property
    def noise_w(self) -> float:
        return 10.0 ** ((self.noise_dbm - 30.0) / 10.0)

    @property
    def rho(self) -> float:
        return 10.0 ** (self.rho_db / 10.0)


@dataclass(frozen=True)
class PlannerConfig:
    q_per_point: int = 6
    sphere_radius_m: float = 15.0
    max_horiz_offset_m: float = 50.0
    slots_per_segment: int = 25
    b_per_slot: int = 20
    alpha1: float = 1.0
    alpha2: float = 1.0
    rng_seed: int = 42
    enable_same_side: bool = False
    sphere_dispersion: bool = False
    max_sample_rounds: int = 1
    require_predecessor: bool = False


@dataclass(frozen=True)
class Scenario:
    world: OccupancyWorld
    base_stations: tuple[BaseStation, ...]
    route: tuple[RouteWaypoint, ...]
    limits: KinematicLimits
    channel: ChannelParams
    planner: PlannerConfig = field(default_factory=PlannerConfig)

    @property
    def travel_times(self) -> list[float]:
        return [w.travel_time_s for w in self.route]

    @property
    def mission_time(self) -> float:
        return sum(w.travel_time_s for w in self.route[1:])

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, planner=replace(self.planner, rng_seed=int(seed)))


# --- validation -----------------------------------------------------------

def _finite(*vals) -> bool:
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals)


def _inside(p, box: Aabb) -> bool:
    return all(lo <= c <= hi for lo, c, hi in zip(box.min, p, box.max))


def validate_scenario(s: Scenario) -> list[str]:
    """Return one message per broken invariant; an empty list means valid."""
    v: list[str] = []
    w = s.world
    for i, b in enumerate(w.boxes):
        if not (_inside(b.min, w.bounds) and _inside(b.max, w.bounds)):
            v.append(f"world.boxes[{i}]: must lie inside world.bounds")
    if not _finite(w.mt_height_m) or w.mt_height_m < 0:
        v.append("world.mt_height_m: must be finite and >= 0")

    if not s.base_stations:
        v.append("base_stations: at least one base station required")
    for i, bs in enumerate(s.base_stations):
        if not _finite(*bs.position):
            v.append(f"base_stations[{i}].position: must be finite")
        elif not _inside(bs.position, w.bounds):
            v.append(f"base_stations[{i}].position: must lie inside world.bounds")
        elif bs.position[2] < 0:
            v.append(f"base_stations[{i}].position: z must be >= 0")

    if len(s.route) < 2:
        v.append("route: at least 2 waypoints required")
    for k, wp in enumerate(s.route):
        if not _finite(*wp.position):
            v.append(f"route[{k}].position: must be finite")
        elif wp.position[2] != w.mt_height_m:
            v.append(f"route[{k}].position: z must equal world.mt_height_m")
        if k == 0:
            if wp.travel_time_s != 0:
                v.append("route[0].travel_time: must be 0 for the first waypoint")
        elif not (_finite(wp.travel_time_s) and wp.travel_time_s > 0):
            v.append(f"route[{k}].travel_time: must be > 0")

    lim = s.limits
    for f in fields(lim):
        val = getattr(lim, f.name)
        if f.name in ("z_min", "z_max"):
            continue
        if not (_finite(val) and val > 0):
            v.append(f"limits.{f.name}: must be > 0")
    if not _finite(lim.z_min, lim.z_max):
        v.append("limits.z_min: must be finite")
    elif lim.z_min >= lim.z_max:
        v.append("limits.z_min: must be < limits.z_max")

    ch = s.channel
    if not (_finite(ch.gamma) and ch.gamma >= 2):
        v.append("channel.gamma: must be ≥ 2")
    if not (_finite(ch.lambda_m) and ch.lambda_m > 0):
        v.append("channel.lambda_m: must be > 0")
    if not (_finite(ch.d_m) and ch.d_m > 0):
        v.append("channel.d_m: must be > 0")
    if not (isinstance(ch.m_elements, int) and ch.m_elements >= 1):
        v.append("channel.m_elements: must be an integer ≥ 1")
    if not (_finite(ch.snr_min) and ch.snr_min > 0):
        v.append("channel.snr_min: must be > 0")
    if not (_finite(ch.varpi) and 0 <= ch.varpi < TWO_PI):
        v.append("channel.varpi: must lie in [0, 2π)")
    for name in ("p_bs_dbm", "noise_dbm", "rho_db"):
        if not _finite(getattr(ch, name)):
            v.append(f"channel.{name}: must be finite")

    pc = s.planner
    for name in ("q_per_point", "slots_per_segment", "b_per_slot", "max_sample_rounds"):
        val = getattr(pc, name)
        if not (isinstance(val, int) and val >= 1):
            v.append(f"planner.{name}: must be an integer ≥ 1")
    if not (_finite(pc.sphere_radius_m) and pc.sphere_radius_m > 0):
        v.append("planner.sphere_radius_m: must be > 0")
    if not (_finite(pc.max_horiz_offset_m) and pc.max_horiz_offset_m >= 0):
        v.append("planner.max_horiz_offset_m: must be ≥ 0")
    for name in ("alpha1", "alpha2"):
        if not (_finite(getattr(pc, name)) and getattr(pc, name) >= 0):
            v.append(f"planner.{name}: must be ≥ 0")
    if not (isinstance(pc.rng_seed, int) and 0 <= pc.rng_seed < 2 ** 64):
        v.append("planner.rng_seed: must be an unsigned 64-bit integer")
    return v


# --- JSON -----------------------------------------------------------------

def _point(raw, path: str, z_default: float | None = None) -> tuple[float, float, float]:
    if not isinstance(raw, (list, tuple)) or len(raw) not in (2, 3) or (
            len(raw) == 2 and z_default is None):
        raise ScenarioError([f"{path}: expected [x, y, z]"])
    try:
        vals = [float(c) for c in raw]
    except (TypeError, ValueError):
        raise ScenarioError([f"{path}: coordinates must be numbers"]) from None
    if len(vals) == 2:
        vals.append(z_default)
    return tuple(vals)


def _box(raw, path: str) -> Aabb:
    if not isinstance(raw, dict) or "min" not in raw or "max" not in raw:
        raise ScenarioError([f"{path}: expected {{min, max}}"])
    lo = _point(raw["min"], f"{path}.min")
    hi = _point(raw["max"], f"{path}.max")
    try:
        return Aabb(lo, hi)
    except ValueError:
        raise ScenarioError([f"{path}: min must not exceed max"]) from None


def _section(cls, raw, path: str):
    if not isinstance(raw, dict):
        raise ScenarioError([f"{path}: expected an object"])
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ScenarioError([f"{path}.{unknown[0]}: unknown field"])
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ScenarioError([f"{path}: {exc}"]) from None


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError(["<root>: expected an object"])
    for key in ("world", "base_stations", "route", "limits", "channel"):
        if key not in doc:
            raise ScenarioError([f"{key}: missing"])
    w = doc["world"]
    if not isinstance(w, dict) or "bounds" not in w:
        raise ScenarioError(["world.bounds: missing"])
    mt_h = float(w.get("mt_height_m", 0.0))
    world = OccupancyWorld(
        boxes=tuple(_box(b, f"world.boxes[{i}]") for i, b in enumerate(w.get("boxes", []))),
        bounds=_box(w["bounds"], "world.bounds"),
        mt_height_m=mt_h,
    )
    stations = tuple(
        BaseStation(_point(b.get("position") if isinstance(b, dict) else None,
                           f"base_stations[{i}].position"))
        for i, b in enumerate(doc["base_stations"]))
    route = []
    for k, r in enumerate(doc["route"]):
        if not isinstance(r, dict):
            raise ScenarioError([f"route[{k}]: expected an object"])
        try:
            t = float(r.get("travel_time_s", 0.0))
        except (TypeError, ValueError):
            raise ScenarioError([f"route[{k}].travel_time: must be a number"]) from None
        route.append(RouteWaypoint(_point(r.get("position"), f"route[{k}].position", mt_h), t))
    scenario = Scenario(
        world=world,
        base_stations=stations,
        route=tuple(route),
        limits=_section(KinematicLimits, doc["limits"], "limits"),
        channel=_section(ChannelParams, doc["channel"], "channel"),
        planner=_section(PlannerConfig, doc.get("planner", {}), "planner"),
    )
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioError(violations)
    return scenario


def scenario_to_dict(s: Scenario) -> dict:
    def box(b: Aabb):
        return {"min": list(b.min), "max": list(b.max)}

    def section(obj):
        return {f.name: getattr(obj, f.name) for f in fields(obj)}

    return {
        "world": {
            "bounds": box(s.world.bounds),
            "boxes": [box(b) for b in s.world.boxes],
            "mt_height_m": s.world.mt_height_m,
        },
        "base_stations": [{"position": list(b.position)} for b in s.base_stations],
        "route": [{"position": list(w.position), "travel_time_s": w.travel_time_s}
                  for w in s.route],
        "limits": section(s.limits),
        "channel": section(s.channel),
        "planner": section(s.planner),
    }


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"<parse>: {exc}"]) from None
    return scenario_from_dict(doc)


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2, sort_keys=True) + "\n"


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(dump_scenario(s))


def scenario_hash(s: Scenario) -> str:
    return hashlib.sha256(dump_scenario(s).encode()).hexdigest()
