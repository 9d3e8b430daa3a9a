"""Vector helpers, link angles and the exact segment/box line-of-sight test.

Points are plain length-3 sequences (tuples or numpy arrays) in meters.
Buildings are closed axis-aligned boxes; a segment that merely grazes a face
counts as blocked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DegenerateGeometryError

if TYPE_CHECKING:
    from .kinematics import Pose
    from .world import OccupancyWorld

Vec3 = Sequence[float]


def vec3(x: float, y: float, z: float) -> tuple[float, float, float]:
    v = (float(x), float(y), float(z))
    if not all(math.isfinite(c) for c in v):
        raise ValueError(f"non-finite coordinate in {v}")
    return v


@dataclass(frozen=True)
class Segment:
    a: tuple[float, float, float]
    b: tuple[float, float, float]


@dataclass(frozen=True)
class Aabb:
    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def __post_init__(self):
        for lo, hi in zip(self.min, self.max):
            if lo > hi:
                raise ValueError(f"inverted box {self.min} > {self.max}")

    def contains(self, p: Vec3) -> bool:
        return all(lo <= c <= hi for lo, c, hi in zip(self.min, p, self.max))

    def inflated(self, r: float) -> "Aabb":
        return Aabb(tuple(c - r for c in self.min), tuple(c + r for c in self.max))


def distance(a: Vec3, b: Vec3) -> float:
    """Euclidean distance between two points."""
    return math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2 + (b[2] - a[2]) ** 2)


def horizontal_distance(a: Vec3, b: Vec3) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def _slab_hits(a: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorised closed slab test of one segment against ``n`` boxes.

    ``lo`` and ``hi`` have shape (n, 3). Returns a boolean array of length n.
    Endpoints are put in a fixed order first so the result is exactly
    symmetric in ``a`` and ``b`` under floating-point rounding.
    """
    if tuple(b) < tuple(a):
        a, b = b, a
    d = b - a
    t_enter = np.zeros(lo.shape[0])
    t_exit = np.ones(lo.shape[0])
    hit = np.ones(lo.shape[0], dtype=bool)
    for axis in range(3):
        if d[axis] == 0.0:
            # parallel to the slab: inside it or nowhere
            hit &= (lo[:, axis] <= a[axis]) & (a[axis] <= hi[:, axis])
            continue
        with np.errstate(over="ignore"):
            t0 = (lo[:, axis] - a[axis]) / d[axis]
            t1 = (hi[:, axis] - a[axis]) / d[axis]
        t_enter = np.maximum(t_enter, np.minimum(t0, t1))
        t_exit = np.minimum(t_exit, np.maximum(t0, t1))
    return hit & (t_enter <= t_exit)


def segment_intersects_aabb(s: Segment, box: Aabb) -> bool:
    """True iff the closed segment meets the closed box (slab method)."""
    a = np.asarray(s.a, dtype=float)
    b = np.asarray(s.b, dtype=float)
    lo = np.asarray([box.min], dtype=float)
    hi = np.asarray([box.max], dtype=float)
    return bool(_slab_hits(a, b, lo, hi)[0])


def los_clear(a: Vec3, b: Vec3, world: "OccupancyWorld") -> bool:
    """Line of sight between ``a`` and ``b``: no building box touches the segment."""
    lo, hi = world.box_arrays
    if lo.shape[0] == 0:
        return True
    hits = _slab_hits(np.asarray(a, dtype=float), np.asarray(b, dtype=float), lo, hi)
    return not bool(hits.any())


def sphere_intersects_aabb(center: Vec3, radius: float, box: Aabb) -> bool:
    # squared distance from the center to the closest point of the box
    d2 = 0.0
    for c, lo, hi in zip(center, box.min, box.max):
        if c < lo:
            d2 += (lo - c) ** 2
        elif c > hi:
            d2 += (c - hi) ** 2
    return d2 <= radius * radius


def _angle_cosine(a: Vec3, b: Vec3) -> float:
    full = distance(a, b)
    if full == 0.0:
        raise DegenerateGeometryError(f"coincident points {tuple(a)}")
    return min(1.0, horizontal_distance(a, b) / full)


def aoa_cosine(bs: Vec3, uav: Vec3) -> float:
    """Cosine of the arrival angle at the RIS: horizontal over 3D BS-UAV distance."""
    return _angle_cosine(bs, uav)


def aod_cosine(uav: Vec3, mt: Vec3) -> float:
    """Cosine of the departure angle from the RIS towards the ground terminal."""
    return _angle_cosine(uav, mt)


def same_side_check(bs: Vec3, uav_pose: "Pose", mt: Vec3) -> bool:
    """Both the BS and the terminal lie on the side the UAV heading points at.

    Checks (-(uav - bs), h) > 0 and (mt - uav, h) > 0 with h the unit heading
    vector in the horizontal plane. Both products must be strictly positive.
    """
    p = uav_pose.position
    hx, hy = math.cos(uav_pose.heading), math.sin(uav_pose.heading)
    to_bs = (bs[0] - p[0]) * hx + (bs[1] - p[1]) * hy
    to_mt = (mt[0] - p[0]) * hx + (mt[1] - p[1]) * hy
    return to_bs > 0.0 and to_mt > 0.0
