from __future__ import annotations

import pytest

from slowlight.config import ConfigError
from slowlight.scenarios import ScenarioSpec, resolve, run_scenario

NO_WAVE = {"wave": {"enabled": False}}


def ray_only(name):
    return run_scenario(ScenarioSpec(name, NO_WAVE))


def test_unknown_scenario_rejected():
    with pytest.raises(ValueError):
        resolve(ScenarioSpec("figure9"))


def test_overrides_type_checked():
    with pytest.raises(ConfigError):
        resolve(ScenarioSpec("figure2b", {"grid": {"n": 1.5}}))


def test_every_quantity_has_unit_and_provenance():
    for name in ("figure2a", "figure2b", "figure3"):
        rep = ray_only(name)
        for q in rep.quantities.values():
            assert q.provenance in ("analytic", "ray", "wave")
            assert isinstance(q.unit, str) and q.unit


def test_figure1_curves_and_working_points():
    rep = ray_only("figure1")
    assert rep.passed
    cols, rows = rep.tables["curves"]
    assert len(rows) == 3 * 2 * 401
    zero = [r for r in rows if r[0] == 0.0 and r[5] is not None]
    assert min(abs(r[5]) for r in zero) == pytest.approx(300.0)
    assert rep.value("turning_flow_upper") == pytest.approx(300.0, rel=1e-9)


def test_figure2a_ray_matches_analytic():
    rep = ray_only("figure2a")
    assert rep.passed
    assert rep.value("velocity_after") == pytest.approx(-3.019, abs=5e-4)
    assert rep.value("ray_velocity_after") == pytest.approx(rep.value("velocity_after"), rel=1e-6)


def test_figure2b_ray_turning_point():
    rep = ray_only("figure2b")
    assert rep.passed
    assert rep.value("turning_flow_drop") * 1e3 == pytest.approx(3.77, abs=0.05)
    assert abs(rep.value("turning_z_ray") - rep.value("turning_z_profile")) <= 1e-6
    assert rep.value("bounce_time_ray") == pytest.approx(2 * rep.value("turning_time_ray"), rel=1e-6)


def test_figure3_bounce_and_freeze():
    rep = ray_only("figure3")
    assert rep.passed
    assert rep.value("turning_group_velocity_drop") == pytest.approx(0.162, abs=0.005)
    assert rep.value("freeze_final_speed") < 1e-3 * 300.0
    assert rep.value("freeze_final_z") == pytest.approx(rep.value("freeze_point_profile"), abs=1e-6)


def test_sonar_flow_drop_sweep():
    rep = run_scenario(ScenarioSpec("sonar", {"sweep": {"count": 9}}))
    assert rep.passed
    cols, rows = rep.tables["sweep"]
    assert rows[0][1] == 0.0 and rows[0][2] is False
    hits = [r for r in rows if r[2]]
    assert len(hits) >= 2


def test_sonar_group_velocity_axis():
    over = {"sweep": {"axis": "group-velocity", "min": 299.0, "max": 301.0, "count": 5}}
    rep = run_scenario(ScenarioSpec("sonar", over))
    cols, rows = rep.tables["sweep"]
    assert [r[1] for r in rows] == [299.0, 299.5, 300.0, 300.5, 301.0]
    # a slower medium turns the pulse at a higher flow speed
    speeds = [r[3] for r in rows if r[3] is not None]
    assert speeds == sorted(speeds, reverse=True)


def test_ray_scenarios_are_deterministic():
    a, b = ray_only("figure2b"), ray_only("figure2b")
    assert a.tables["ray"] == b.tables["ray"]
