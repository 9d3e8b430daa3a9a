import math
from pathlib import Path

import pytest

from risuav.geometry import Aabb
from risuav.world import (BaseStation, ChannelParams, KinematicLimits, OccupancyWorld,
                          PlannerConfig, RouteWaypoint, Scenario, load_scenario)

ROOT = Path(__file__).resolve().parents[1]
DENSE_URBAN = ROOT / "scenarios" / "dense_urban.json"

BIG_BOUNDS = Aabb((-1000.0, -1000.0, 0.0), (1000.0, 1000.0, 500.0))


def make_scenario(boxes=(), bs=((-50.0, 0.0, 20.0),), route=None, times=None,
                  limits=None, channel=None, **planner) -> Scenario:
    route = route or [(0.0, 0.0), (60.0, 0.0), (120.0, 0.0)]
    times = times or [0.0] + [10.0] * (len(route) - 1)
    limits = limits or KinematicLimits(v_max=12.0, u_max=8.0, w_max=math.pi / 6,
                                       z_min=35.0, z_max=130.0, vdot_max=2.0,
                                       udot_max=2.0, wdot_max=math.pi / 12)
    return Scenario(
        world=OccupancyWorld(tuple(boxes), BIG_BOUNDS),
        base_stations=tuple(BaseStation(tuple(map(float, p))) for p in bs),
        route=tuple(RouteWaypoint((float(x), float(y), 0.0), float(t))
                    for (x, y), t in zip(route, times)),
        limits=limits,
        channel=channel or ChannelParams(),
        planner=PlannerConfig(**planner),
    )


@pytest.fixture(scope="session")
def dense_urban() -> Scenario:
    return load_scenario(DENSE_URBAN)


@pytest.fixture
def open_scenario() -> Scenario:
    return make_scenario(max_sample_rounds=50, require_predecessor=True)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
