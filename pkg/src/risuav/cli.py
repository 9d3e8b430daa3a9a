"""Command-line driver for the two-stage planner.

    risuav plan --scenario scenarios/dense_urban.json --seed 42 --out run/
    risuav validate --scenario my.json
    risuav report --out run/

Exit codes: 0 success, 2 invalid scenario, 3 stage-1 infeasible,
4 stage-2 infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import stage1, stage2
from .errors import EnumerationLimitError, InfeasibleError, ScenarioError, Stage2Infeasible
from .geometry import los_clear
from .world import Scenario, load_scenario, scenario_hash, validate_scenario

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_STAGE1 = 3
EXIT_STAGE2 = 4

CSV_COLUMNS = ["slot_index", "snr", "rate", "dist_bs_uav", "dist_uav_mt"]

log = logging.getLogger("risuav")


@dataclass
class RunConfig:
    scenario: Path
    out: Path
    seed: int | None = None
    stage: str = "full"
    emit_plots: bool = True
    oracle: bool = False
    threads: int = 1


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _slots_csv(header: dict, rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# scenario_sha256={header['scenario_sha256']} seed={header['seed']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r[c] if c == "slot_index" else repr(float(r[c])) for c in CSV_COLUMNS])
    return buf.getvalue()


def _slot_ok(slot: stage2.SlotReport, row: dict, scenario: Scenario) -> bool:
    bs = scenario.base_stations[slot.serving_bs].position
    return (los_clear(bs, slot.position, scenario.world)
            and los_clear(slot.position, slot.mt_position, scenario.world)
            and row["snr"] >= scenario.channel.snr_min)


def _stage1_oracle(graph: stage1.LayeredGraph, tube: stage1.TubePath, scenario: Scenario) -> dict:
    try:
        paths = stage1.enumerate_valid_paths(graph, scenario.limits, scenario.planner)
    except EnumerationLimitError:
        return {"stage1": "skipped: enumeration limit exceeded"}
    best = min(e for _, e in paths)
    return {"stage1_enumerated": len(paths), "stage1_min_energy": best,
            "stage1_match": best == tube.total_energy}


def run_pipeline(cfg: RunConfig) -> int:
    """Plan, evaluate and write artifacts into ``cfg.out``; returns the exit code."""
    started = time.perf_counter()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        scenario = load_scenario(cfg.scenario)
        if cfg.seed is not None:
            scenario = scenario.with_seed(cfg.seed)
            violations = validate_scenario(scenario)
            if violations:
                raise ScenarioError(violations)
    except (ScenarioError, OSError) as exc:
        violations = exc.violations if isinstance(exc, ScenarioError) else [str(exc)]
        print(json.dumps({"error": "scenario-invalid", "violations": violations}), file=sys.stderr)
        return EXIT_SCENARIO

    header = {"scenario_sha256": scenario_hash(scenario), "seed": scenario.planner.rng_seed}
    timing = {}
    try:
        t0 = time.perf_counter()
        tube, graph = stage1.plan_tube(scenario)
        n_valid = stage1.count_valid_paths(graph, scenario.limits)
        timing["stage1_s"] = time.perf_counter() - t0
        _write_json(out / "tube_path.json", {**header, **tube.to_dict(), "valid_path_count": n_valid})
        summary = {
            **header,
            "stage": cfg.stage,
            "total_energy": tube.total_energy,
            "valid_path_count": n_valid,
            "candidates_per_point": [len(layer) for layer in graph.layers],
        }
        if cfg.oracle:
            summary["oracle"] = _stage1_oracle(graph, tube, scenario)

        if cfg.stage == "full":
            t0 = time.perf_counter()
            traj = stage2.refine(tube, scenario, threads=cfg.threads)
            report = stage2.evaluate_trajectory(traj, scenario)
            timing["stage2_s"] = time.perf_counter() - t0
            bad = [(s.k, s.epsilon) for s, r in zip(traj.slots, report["slots"])
                   if not _slot_ok(s, r, scenario)]
            if bad:
                raise Stage2Infeasible("slot violates LoS or SNR threshold after fading",
                                       k=bad[0][0], epsilon=bad[0][1])
            slots = []
            for s, r in zip(traj.slots, report["slots"]):
                d = s.to_dict()
                d.update(snr=r["snr"], rate=r["rate"], snr_reflected=r["snr_reflected"])
                slots.append(d)
            _write_json(out / "trajectory.json", {**header, "objective": traj.objective,
                                                  "slots": slots})
            if cfg.emit_plots:
                (out / "slots.csv").write_text(_slots_csv(header, report["slots"]))
            warnings = stage2.speed_warnings(traj, scenario)
            summary.update(
                n_slots=len(traj.slots),
                slots_ok=True,
                min_snr=report["min_snr"],
                mean_snr=report["mean_snr"],
                min_snr_reflected=report["min_snr_reflected"],
                total_rate_seconds=report["total_rate_seconds"],
                objective=traj.objective,
                speed_warnings=len(warnings),
            )
    except InfeasibleError as exc:
        doc = {**header, **exc.to_dict()}
        _write_json(out / "infeasibility.json", doc)
        print(json.dumps(doc, sort_keys=True), file=sys.stderr)
        return EXIT_STAGE1 if exc.stage == 1 else EXIT_STAGE2

    timing["wall_time_s"] = time.perf_counter() - started
    summary["timing"] = timing
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def report_summary(out_dir) -> str:
    """Human-readable digest of ``summary.json``; numbers are printed, never recomputed."""
    s = json.loads((Path(out_dir) / "summary.json").read_text())
    lines = [
        f"scenario  {s['scenario_sha256'][:12]}  seed {s['seed']}",
        f"energy    {s['total_energy']:.6g}",
        f"paths     {s['valid_path_count']} valid after speed/acceleration pruning",
        f"layers    {s['candidates_per_point']}",
    ]
    if "n_slots" in s:
        lines += [
            f"slots     {s['n_slots']} (all LoS and above SNR threshold: {s['slots_ok']})",
            f"snr       min {s['min_snr']:.6g}  mean {s['mean_snr']:.6g}",
            f"rate      {s['total_rate_seconds']:.6g} bit/Hz over the mission",
            f"warnings  {s['speed_warnings']} slot hops above the tube speed bound",
        ]
    if "oracle" in s:
        lines.append(f"oracle    {s['oracle']}")
    lines.append("timing    " + "  ".join(f"{k} {v:.3f}" for k, v in s["timing"].items()))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risuav", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="run the planner and write artifacts")
    plan.add_argument("--scenario", required=True, type=Path)
    plan.add_argument("--seed", type=int, default=None, help="override planner.rng_seed")
    plan.add_argument("--out", type=Path, default=Path("out"))
    plan.add_argument("--stage", choices=("stage1", "full"), default="full")
    plan.add_argument("--emit-plots", action=argparse.BooleanOptionalAction, default=True,
                      help="write slots.csv with per-slot SNR, rate and hop distances")
    plan.add_argument("--oracle", action="store_true",
                      help="cross-check stage 1 against brute-force enumeration")
    plan.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--scenario", required=True, type=Path)

    rep = sub.add_parser("report", help="summarise a finished run")
    rep.add_argument("--out", type=Path, default=Path("out"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "validate":
        try:
            load_scenario(args.scenario)
        except (ScenarioError, OSError) as exc:
            for v in getattr(exc, "violations", [str(exc)]):
                print(v)
            return EXIT_SCENARIO
        print("ok")
        return EXIT_OK
    if args.command == "report":
        print(report_summary(args.out))
        return EXIT_OK
    code = run_pipeline(RunConfig(
        scenario=args.scenario, out=args.out, seed=args.seed, stage=args.stage,
        emit_plots=args.emit_plots, oracle=args.oracle, threads=max(1, args.threads)))
    if code == EXIT_OK:
        print(report_summary(args.out))
    return code


if __name__ == "__main__":
    sys.exit(main())
