"""Discrete UAV motion: per-step inputs, limit checks and the energy cost.

Horizontal and vertical speeds are in m/s. Heading change ``omega`` is in
radians per planning step, as are the angular limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    heading: float = 0.0


@dataclass(frozen=True)
class ControlInput:
    vx: float = 0.0
    vy: float = 0.0
    u: float = 0.0
    omega: float = 0.0

    @property
    def horizontal_speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def as_list(self) -> list[float]:
        return [self.vx, self.vy, self.u, self.omega]


HOVER = ControlInput()


def wrap_angle(a: float) -> float:
    """Map an angle difference into (-pi, pi]."""
    w = math.remainder(a, TWO_PI)  # exact, lands in [-pi, pi]
    return math.pi if w == -math.pi else w


def wrap_heading(a: float) -> float:
    """Map a heading into [0, 2*pi)."""
    w = math.fmod(a, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    return 0.0 if w >= TWO_PI else w


def step_input(prev: Pose, nxt: Pose, dt: float) -> ControlInput:
    """Average input that carries ``prev`` to ``nxt`` in ``dt`` seconds."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    (x0, y0, z0), (x1, y1, z1) = prev.position, nxt.position
    return ControlInput(
        vx=(x1 - x0) / dt,
        vy=(y1 - y0) / dt,
        u=(z1 - z0) / dt,
        omega=wrap_angle(nxt.heading - prev.heading),
    )


def check_speed(inp: ControlInput, lim) -> bool:
    return (
        inp.horizontal_speed <= lim.v_max
        and abs(inp.u) <= lim.u_max
        and abs(inp.omega) <= lim.w_max
    )


def check_accel(prev: ControlInput, cur: ControlInput, dt: float, lim) -> bool:
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return (
        abs(cur.horizontal_speed - prev.horizontal_speed) / dt <= lim.vdot_max
        and abs(cur.u - prev.u) / dt <= lim.udot_max
        and abs(cur.omega - prev.omega) / dt <= lim.wdot_max
    )


def step_energy(prev: ControlInput, cur: ControlInput, dt: float,
                alpha1: float, alpha2: float) -> float:
    """One term of the discrete energy sum: effort plus change-of-input penalty."""
    effort = abs(cur.vx) + abs(cur.vy) + abs(cur.u) + abs(cur.omega)
    change = (abs(cur.vx - prev.vx) + abs(cur.vy - prev.vy)
              + abs(cur.u - prev.u) + abs(cur.omega - prev.omega))
    return alpha1 * effort + alpha2 * change / dt


def trajectory_energy(inputs: Sequence[ControlInput], dts: Sequence[float],
                      alpha1: float, alpha2: float) -> float:
    """Energy of a step sequence that starts from hover.

    The terms are added left to right; the stage-1 DP accumulates in the same
    order so both produce bit-identical totals.
    """
    if len(inputs) != len(dts):
        raise ValueError(f"{len(inputs)} inputs but {len(dts)} durations")
    if not inputs:
        raise ValueError("need at least one step")
    total = 0.0
    prev = HOVER
    for inp, dt in zip(inputs, dts):
        if not dt > 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        total = total + step_energy(prev, inp, dt, alpha1, alpha2)
        prev = inp
    return total
