from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from slowlight.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from slowlight.scenarios import DISPERSION_COLUMNS, RAY_COLUMNS, WAVE_COLUMNS

SHORT_WAVE = """
[grid]
n = 512
[wave]
t_end = 1e-4 s
sample_every = 1e-5 s
snapshot_every = 5
"""


def header(path):
    with open(path, newline="") as fh:
        return tuple(next(csv.reader(fh)))


def test_dispersion_subcommand(tmp_path):
    cfg = tmp_path / "d.ini"
    cfg.write_text("[dispersion]\ndelta = 0, -5e-7\nu = -600:600:7 m/s\nbranch = minus\n")
    assert main(["dispersion", "--config", str(cfg), "--out", str(tmp_path / "o"), "--check"]) == EXIT_OK
    out = tmp_path / "o"
    assert header(out / "dispersion.csv") == DISPERSION_COLUMNS
    rows = list(csv.DictReader((out / "dispersion.csv").open()))
    assert len(rows) == 14 and {r["branch"] for r in rows} == {"minus"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["derived"]["k0_per_m"] == 1e7
    assert manifest["status"] == "ok" and "dispersion.csv" in manifest["files"]


def test_ray_subcommand(tmp_path):
    assert main(["ray", "--out", str(tmp_path), "--check"]) == EXIT_OK
    assert header(tmp_path / "ray.csv") == RAY_COLUMNS
    events = json.loads((tmp_path / "events.json").read_text())
    assert "ray" in events


def test_wave_subcommand_with_snapshots(tmp_path):
    cfg = tmp_path / "w.ini"
    cfg.write_text(SHORT_WAVE)
    assert main(["wave", "--config", str(cfg), "--out", str(tmp_path / "o"), "--check"]) == EXIT_OK
    out = tmp_path / "o"
    assert header(out / "wave.csv") == WAVE_COLUMNS
    assert len((out / "wave.csv").read_text().splitlines()) == 1 + 11
    snaps = [json.loads(line) for line in (out / "snapshots.jsonl").read_text().splitlines()]
    assert len(snaps) == 3 and set(snaps[0]) == {"t", "z", "re", "im"}
    assert len(snaps[0]["z"]) == 512
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["derived"]["packet_bandwidth_hz"] > 0
    assert manifest["derived"]["kappa_m2_per_s"] == pytest.approx(1.5e-5)


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[group_velocity]\nkind = uniform\nvalue = -1 m/s\n")
    assert main(["ray", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    assert main(["ray", "--config", str(tmp_path / "absent.ini"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_numerical_failure_exit_code_keeps_manifest(tmp_path):
    cfg = tmp_path / "evan.ini"
    cfg.write_text("[launch]\ndelta = -2e-6\n")
    assert main(["ray", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_NUMERIC
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["status"] == "numerical-failure"


def test_check_failure_exit_code(tmp_path, capsys):
    # a ramp too shallow to turn the pulse: the reflection checks must fail
    cfg = tmp_path / "shallow.ini"
    cfg.write_text("[flow]\nleft = 298.498 m/s\n[wave]\nenabled = false\n")
    code = main(["scenario", "figure2b", "--config", str(cfg), "--out", str(tmp_path / "o"), "--check"])
    assert code == EXIT_CHECK
    assert "FAIL ray_turning_within_1um" in capsys.readouterr().out
    # without --check the same run completes normally
    assert main(["scenario", "figure2b", "--config", str(cfg), "--out", str(tmp_path / "p")]) == EXIT_OK


def test_sweep_subcommand(tmp_path):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[run]\nscenario = sonar\n[sweep]\ncount = 5\nmin = 0.004 m/s\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--check"]) == EXIT_OK
    rows = list(csv.DictReader((tmp_path / "o" / "sweep.csv").open()))
    assert len(rows) == 5 and all(r["reflects"] == "true" for r in rows)


def test_scenario_figure1(tmp_path):
    assert main(["scenario", "figure1", "--out", str(tmp_path), "--check"]) == EXIT_OK
    for name in ("curves.csv", "diagonals.csv", "working_points.csv", "report.json", "manifest.json"):
        assert (tmp_path / name).exists()


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "slowlight.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("dispersion", "ray", "wave", "scenario", "sweep"):
        assert sub in res.stdout
