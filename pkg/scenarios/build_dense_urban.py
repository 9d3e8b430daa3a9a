"""Regenerate dense_urban.json: a grid city with a 9-point ambulance route.

Run from the repository root:  python3 scenarios/build_dense_urban.py
"""
import json
import math
from pathlib import Path

# 9 route points, 8 legs, leg times in seconds
ROUTE = [(0, 0), (80, 0), (163, 0), (163, 52), (163, 93), (163, 133),
         (233, 133), (273, 133), (273, 253)]
TRAVEL = [0, 8, 8.3, 5.2, 4.1, 4, 7, 4, 12]

# street corridors (xmin, xmax, ymin, ymax) kept free of buildings
STREETS = [(-100, 185, -12, 12), (151, 175, -100, 145), (151, 330, 121, 145),
           (261, 285, 121, 320)]
HEIGHTS = [18, 32, 24, 45, 28, 55, 22, 38, 60, 26, 35, 50]
PITCH, SIZE = 40.0, 26.0


def overlaps(a, b):
    return a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]


def buildings():
    boxes = []
    i = 0
    for gx in range(-2, 9):
        for gy in range(-2, 8):
            x0, y0 = gx * PITCH + 3.0, gy * PITCH + 3.0
            fp = (x0, x0 + SIZE, y0, y0 + SIZE)
            if any(overlaps(fp, s) for s in STREETS):
                continue
            h = HEIGHTS[i % len(HEIGHTS)]
            i += 1
            boxes.append({"min": [fp[0], fp[2], 0.0], "max": [fp[1], fp[3], float(h)]})
    return boxes


def scenario():
    return {
        "world": {
            "bounds": {"min": [-100.0, -100.0, 0.0], "max": [350.0, 330.0, 200.0]},
            "boxes": buildings(),
            "mt_height_m": 0.0,
        },
        "base_stations": [{"position": [-40.0, -30.0, 25.0]}],
        "route": [{"position": [float(x), float(y), 0.0], "travel_time_s": float(t)}
                  for (x, y), t in zip(ROUTE, TRAVEL)],
        "limits": {
            "v_max": 12.0, "u_max": 8.0, "w_max": math.pi / 6,
            "z_min": 35.0, "z_max": 130.0,
            "vdot_max": 2.0, "udot_max": 2.0, "wdot_max": math.pi / 12,
        },
        "channel": {
            "p_bs_dbm": 30.0, "noise_dbm": -80.0, "rho_db": 10.0, "gamma": 2.5,
            "lambda_m": 0.01, "d_m": 0.005, "m_elements": 16, "snr_min": 1.0, "varpi": 0.0,
        },
        "planner": {
            "q_per_point": 6, "sphere_radius_m": 15.0, "max_horiz_offset_m": 50.0,
            "slots_per_segment": 25, "b_per_slot": 20, "alpha1": 1.0, "alpha2": 1.0,
            "rng_seed": 42, "enable_same_side": False, "sphere_dispersion": False,
            "max_sample_rounds": 400, "require_predecessor": True,
        },
    }


if __name__ == "__main__":
    out = Path(__file__).with_name("dense_urban.json")
    out.write_text(json.dumps(scenario(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
