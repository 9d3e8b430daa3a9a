import csv
import json
import subprocess
import sys

import pytest

from risuav.cli import main, report_summary
from risuav.geometry import Aabb
from risuav.world import save_scenario

from conftest import DENSE_URBAN, make_scenario

ARTIFACTS = ("tube_path.json", "trajectory.json", "slots.csv")


@pytest.fixture(scope="module")
def urban_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("urban")
    assert main(["plan", "--scenario", str(DENSE_URBAN), "--out", str(out), "--threads", "1"]) == 0
    return out


def write(tmp_path, scenario, name="s.json"):
    path = tmp_path / name
    save_scenario(scenario, path)
    return path


def test_plan_writes_all_artifacts(urban_run):
    for name in ARTIFACTS + ("summary.json",):
        assert (urban_run / name).is_file()
    assert not (urban_run / "infeasibility.json").exists()


def test_rerun_is_byte_identical(urban_run, tmp_path):
    assert main(["plan", "--scenario", str(DENSE_URBAN), "--out", str(tmp_path),
                 "--threads", "4"]) == 0
    for name in ARTIFACTS:
        assert (tmp_path / name).read_bytes() == (urban_run / name).read_bytes()


def test_seed_flag_changes_the_run(urban_run, tmp_path):
    code = main(["plan", "--scenario", str(DENSE_URBAN), "--out", str(tmp_path), "--seed", "3"])
    assert code in (0, 3, 4)
    if code == 0:
        assert (tmp_path / "tube_path.json").read_bytes() != (urban_run / "tube_path.json").read_bytes()
        assert json.loads((tmp_path / "summary.json").read_text())["seed"] == 3


def test_csv_layout(urban_run):
    lines = (urban_run / "slots.csv").read_text().splitlines()
    assert lines[0].startswith("# scenario_sha256=") and lines[0].endswith("seed=42")
    rows = list(csv.DictReader(lines[1:]))
    assert list(rows[0]) == ["slot_index", "snr", "rate", "dist_bs_uav", "dist_uav_mt"]
    assert len(rows) == 200
    assert [int(r["slot_index"]) for r in rows] == list(range(200))
    assert all(float(r["snr"]) >= 1.0 for r in rows)


def test_summary_agrees_with_artifacts(urban_run):
    summary = json.loads((urban_run / "summary.json").read_text())
    tube = json.loads((urban_run / "tube_path.json").read_text())
    traj = json.loads((urban_run / "trajectory.json").read_text())
    assert summary["total_energy"] == tube["total_energy"]
    assert summary["valid_path_count"] == tube["valid_path_count"] >= 1
    assert summary["n_slots"] == len(traj["slots"]) == 200
    assert summary["min_snr"] == min(s["snr"] for s in traj["slots"])
    assert summary["objective"] == traj["objective"]
    assert summary["scenario_sha256"] == tube["scenario_sha256"] == traj["scenario_sha256"]
    assert summary["slots_ok"] is True


def test_report_prints_stored_numbers(urban_run, capsys):
    assert main(["report", "--out", str(urban_run)]) == 0
    text = capsys.readouterr().out
    assert text.strip() == report_summary(urban_run)
    summary = json.loads((urban_run / "summary.json").read_text())
    assert f"{summary['total_energy']:.6g}" in text and "200" in text


def test_no_emit_plots_skips_csv(tmp_path):
    assert main(["plan", "--scenario", str(DENSE_URBAN), "--out", str(tmp_path),
                 "--no-emit-plots"]) == 0
    assert not (tmp_path / "slots.csv").exists()


def test_stage1_only(tmp_path):
    assert main(["plan", "--scenario", str(DENSE_URBAN), "--out", str(tmp_path),
                 "--stage", "stage1", "--oracle"]) == 0
    assert (tmp_path / "tube_path.json").exists()
    assert not (tmp_path / "trajectory.json").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["oracle"]["stage1_match"] is True
    assert summary["oracle"]["stage1_enumerated"] == summary["valid_path_count"]


def test_validate_subcommand(tmp_path, capsys):
    assert main(["validate", "--scenario", str(DENSE_URBAN)]) == 0
    doc = json.loads(DENSE_URBAN.read_text())
    doc["channel"]["gamma"] = 1.5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["validate", "--scenario", str(bad)]) == 2
    assert "channel.gamma" in capsys.readouterr().out


def test_invalid_scenario_exits_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["plan", "--scenario", str(missing), "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "scenario-invalid"


def test_sealed_route_point_exits_3(tmp_path, capsys):
    # the second route point sits inside a building: nothing can see the terminal there
    block = Aabb((30.0, -100.0, 0.0), (90.0, 100.0, 200.0))
    path = write(tmp_path, make_scenario(boxes=[block], max_sample_rounds=20))
    assert main(["plan", "--scenario", str(path), "--out", str(tmp_path / "o")]) == 3
    doc = json.loads((tmp_path / "o" / "infeasibility.json").read_text())
    assert doc["stage"] == 1 and doc["k"] == 1
    assert json.loads(capsys.readouterr().err)["k"] == 1


def test_blocked_slot_exits_4(tmp_path):
    # a low kerb over the terminal's path mid-leg: route points fine, some slots blind
    kerb = Aabb((25.0, -2.0, 0.0), (35.0, 2.0, 1.0))
    s = make_scenario(boxes=[kerb], max_sample_rounds=50, require_predecessor=True)
    path = write(tmp_path, s)
    assert main(["plan", "--scenario", str(path), "--out", str(tmp_path / "o")]) == 4
    doc = json.loads((tmp_path / "o" / "infeasibility.json").read_text())
    assert doc["stage"] == 2 and doc["k"] == 1 and 1 <= doc["epsilon"] <= 25


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "risuav", "validate", "--scenario",
                          str(DENSE_URBAN)], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "ok"
