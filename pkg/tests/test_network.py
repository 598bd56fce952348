import csv
import logging
import math

import pytest

from leomec import network as network_module
from leomec.Core.Exception import ConfigError
from leomec.Core.Types import FixedPointMethod, NetworkMode, RunMode, SweepVariable
from leomec.network import (
    COLUMNS,
    SATELLITE_LOAD_NOTE,
    LeoMec,
    SweepSpec,
    csv_text,
    evaluate_scenario,
    trend_summary,
)
from leomec.params import DEFAULT_CONFIG, from_config, set_config_value


def _scenario(**overrides):
    raw = DEFAULT_CONFIG
    for key, value in overrides.items():
        raw = set_config_value(raw, key.replace("__", "."), value)
    return from_config(raw)


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_default_scenario_evaluates():
    params, geom = _scenario()
    result = evaluate_scenario(params, geom)
    assert result.status == "ok"
    assert result.t_avg > 0.0 and math.isfinite(result.t_avg)
    assert 0.0 <= result.total_cov_down <= 1.0
    assert 0.0 <= result.total_cov_up <= 1.0
    first = result.tasks[0]
    assert all(t.delay == first.delay for t in result.tasks)
    for item in result.tasks:
        assert item.n_type == 250
        assert 0.0 < item.fixed_point.p_ofld <= 1.0
        assert item.fixed_point.n_offloadable == pytest.approx(250 * item.fixed_point.p_ofld)
        assert item.association.a_sat + item.association.a_cs == pytest.approx(1.0, abs=1e-6)
        cs_total = item.delay.t_resp_cs + item.delay.t_up_cs + item.delay.t_down_cs
        sat_total = item.delay.t_resp_sat + item.delay.t_up_sat + item.delay.t_down_sat
        assert min(cs_total, sat_total) <= item.delay.t_avg <= max(cs_total, sat_total)


def test_fixed_point_methods_agree_on_scenario():
    params, geom = _scenario()
    damped = evaluate_scenario(params, geom, method=FixedPointMethod.DAMPED)
    bisect = evaluate_scenario(params, geom, method=FixedPointMethod.BISECT)
    assert damped.tasks[0].fixed_point.p_ofld == pytest.approx(bisect.tasks[0].fixed_point.p_ofld, abs=1e-8)


def test_cloud_only_network_ignores_constellation():
    delays = []
    for n_sats in (500, 2000):
        params, geom = _scenario(constellation__n_sats=n_sats)
        result = evaluate_scenario(params, geom, NetworkMode.CS_ONLY)
        assert all(t.association.a_sat == 0.0 and t.association.a_cs == 1.0 for t in result.tasks)
        delays.append(result.t_avg)
    assert delays[0] == delays[1]


def test_satellite_only_network():
    params, geom = _scenario()
    result = evaluate_scenario(params, geom, "sat-only")
    assert result.mode == NetworkMode.SAT_ONLY
    assert all(t.association.a_sat == 1.0 and t.association.a_cs == 0.0 for t in result.tasks)
    assert all(t.delay.t_up_cs == 0.0 for t in result.tasks)
    assert math.isfinite(result.t_avg)


def test_light_load_keeps_every_satellite_offloadable():
    params, geom = _scenario(ground__lambda_u_per_km2=0.001)
    item = evaluate_scenario(params, geom).tasks[0]
    assert item.fixed_point.p_ofld == pytest.approx(1.0, abs=1e-6)
    assert item.fixed_point.n_offloadable == pytest.approx(250.0, abs=1e-3)


def test_unstable_cloud_server_is_reported_in_row():
    params, geom = _scenario(compute__f_cs_ghz=1e-6)
    result = evaluate_scenario(params, geom)
    assert result.status.startswith("unstable")
    assert math.isnan(result.t_avg)
    assert all(t.delay is None for t in result.tasks)


def test_sweep_spec_validation():
    with pytest.raises(ConfigError, match="must not be empty"):
        SweepSpec(variable="n_sats", values="")
    with pytest.raises(ConfigError, match="strictly increasing"):
        SweepSpec(variable="n_sats", values="1000,500")
    with pytest.raises(ConfigError, match="sweep"):
        SweepSpec(variable="elevation", values="1,2")
    with pytest.raises(ConfigError, match="must differ"):
        SweepSpec(variable="n_sats", values="1,2", series="n_s", series_values="3")


def test_sweep_points_order():
    spec = SweepSpec(variable="n_s", values=[200, 400], series="altitude_km", series_values=[500, 800])
    assert spec.variable == SweepVariable.N_SATS
    assert [label for label, _ in spec.points()] == [
        "altitude_km=500;n_sats=200",
        "altitude_km=500;n_sats=400",
        "altitude_km=800;n_sats=200",
        "altitude_km=800;n_sats=400",
    ]
    _, assignments = spec.points()[-1]
    assert assignments == {"constellation.altitude_km": 800.0, "constellation.n_sats": 400.0}


def test_run_sweep_writes_csv(tmp_path):
    path = tmp_path / "out" / "sweep.csv"
    runner = LeoMec()
    rows = runner.run_sweep(SweepSpec(variable="n_sats", values="500,1000", output_path=str(path)))
    assert len(rows) == 8
    table = _read_csv(path)
    assert table[0] == COLUMNS[RunMode.ANALYTIC]
    assert len(table) == 9
    points = [line[0] for line in table[1:]]
    assert points == ["n_sats=500"] * 4 + ["n_sats=1000"] * 4
    status = table[0].index("status")
    assert {line[status] for line in table[1:]} == {"ok"}


def test_simulation_needs_integrated_network():
    runner = LeoMec()
    spec = SweepSpec(variable="n_sats", values="500", mode=RunMode.SIMULATE, network_mode=NetworkMode.CS_ONLY)
    with pytest.raises(ConfigError, match="integrated"):
        runner.run_sweep(spec)


def test_compare_output_is_reproducible(tmp_path):
    overrides = ["sim.trials=2000", "sim.chunk_size=500"]
    paths = []
    for workers in (1, 3):
        path = tmp_path / f"compare_{workers}.csv"
        LeoMec(overrides=overrides, workers=workers).run_point(RunMode.COMPARE, str(path))
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    table = _read_csv(paths[0])
    assert table[0] == COLUMNS[RunMode.COMPARE]
    row = dict(zip(table[0], table[1]))
    assert row["trials"] == "2000"
    assert 0.0 <= float(row["sim_a_sat"]) <= 1.0
    assert float(row["gap_a_sat"]) == pytest.approx(abs(float(row["a_sat"]) - float(row["sim_a_sat"])))


def test_simulate_rows_keep_simulation_columns(tmp_path):
    dump = tmp_path / "trials.csv"
    runner = LeoMec(overrides=["sim.trials=500"])
    rows = runner.run_point(RunMode.SIMULATE, dump_path=str(dump))
    assert len(rows) == 4
    assert set(rows[0]) <= set(COLUMNS[RunMode.SIMULATE])
    assert "a_sat" not in rows[0]
    table = _read_csv(dump)
    assert table[0][:3] == ["service_id", "trial", "tier"]
    assert len(table) == 1 + 4 * 500


def test_preset_runs_and_unknown_names():
    runner = LeoMec()
    rows = runner.run_preset("telesat-1015")
    assert len(rows) == 4
    assert rows[0]["n_sats"] == 298
    assert rows[0]["altitude_km"] == 1015.0
    with pytest.raises(ConfigError, match="available presets"):
        runner.run_preset("iridium")


def test_trend_summary():
    rows = []
    for mode, delays in (("integrated", (1.0, 0.5)), ("cs-only", (2.0, 2.0)), ("sat-only", (3.0, 1.0))):
        for n_sats, delay in zip((200, 500), delays):
            for service_id in (1, 2):
                rows.append({"point": f"n_sats={n_sats}", "network_mode": mode, "n_sats": n_sats,
                             "service_id": service_id, "t_avg_system": delay})
    trends = trend_summary(rows)
    assert trends["integrated_best"] == {200: True, 500: True}
    assert trends["sat_below_cs"] == [500]
    assert trends["delays"]["cs-only"] == {200: 2.0, 500: 2.0}
    assert trends["ordering"][0] == "n_sats=500 [integrated]"
    assert len(trends["ordering"]) == 6


def test_csv_text_formatting():
    text = csv_text(["a", "b", "c", "d", "e"], [{"a": 0.1, "b": True, "c": None, "d": NetworkMode.CS_ONLY, "e": 7}])
    assert text == "a,b,c,d,e\n0.10000000000000001,true,,cs-only,7\n"


def test_debug_level_resets_for_later_runner():
    LeoMec(debug=True)
    assert logging.getLogger("leomec").level == logging.DEBUG
    LeoMec()
    assert logging.getLogger("leomec").level == logging.INFO


def test_baseline_comparison_logs_load_note(monkeypatch):
    messages = []
    runner = LeoMec()
    monkeypatch.setattr(network_module.logger, "info", messages.append)
    rows = runner.run_baseline_comparison(values=[500])
    assert len(rows) == 12
    assert {row["network_mode"] for row in rows} == set(NetworkMode)
    assert SATELLITE_LOAD_NOTE in messages
