import math

import numpy as np
import pytest

from leomec.Analysis.association import assoc_prob_sat
from leomec.Analysis.coverage import cov_down_cs, cov_down_sat, cov_up_cs, cov_up_sat
from leomec.Analysis.geometry import contact_cdf_nearest_sat, horizon
from leomec.Core.Exception import ConfigError, SimulationError
from leomec.Core.Types import Tier
from leomec.Simulation.montecarlo import (
    DUMP_COLUMNS,
    SimConfig,
    chunk_generator,
    dump_rows,
    estimate,
    estimate_proportion,
    run_trial,
    sample_constellation,
    sample_ground_ppp,
    sim_config_from,
    simulate_chunk,
    simulate_task,
    summarize,
)
from leomec.params import DEFAULT_CONFIG, from_config, set_config_value
from leomec.validation import GAMMA_BOUND_TOL, SAT_COVERAGE_TOL


def _scenario(**overrides):
    raw = set_config_value(DEFAULT_CONFIG, "constellation.cap_law", "area")
    for key, value in overrides.items():
        raw = set_config_value(raw, key.replace("__", "."), value)
    return from_config(raw)


def _within(estimate_value, expected, trials, sigmas=4.0):
    sigma = math.sqrt(max(expected * (1.0 - expected), 1e-12) / trials)
    return abs(estimate_value - expected) <= sigmas * sigma


@pytest.mark.parametrize(
    ("kwargs", "key"),
    [
        ({"trials": 0}, "sim.trials"),
        ({"chunk_size": 0}, "sim.chunk_size"),
        ({"workers": 0}, "sim.workers"),
        ({"seed": -1}, "sim.seed"),
        ({"ground_disk_radius": 0.0}, "sim.ground_disk_radius_km"),
    ],
)
def test_sim_config_validation(kwargs, key):
    with pytest.raises(ConfigError, match=key):
        SimConfig(**kwargs)


def test_sim_config_from_raw_and_chunks():
    sim = sim_config_from({"sim": {"trials": 120, "chunk_size": 50, "ground_disk_radius_km": 2.0}})
    assert sim.chunks == [50, 50, 20]
    assert sim.ground_disk_radius == pytest.approx(2e3)
    assert sim.seed == SimConfig().seed


def test_disk_too_small_for_cloud_servers():
    SimConfig().check_disk(1e-6)
    with pytest.raises(ConfigError, match="empty-disk"):
        SimConfig(ground_disk_radius=100.0).check_disk(1e-6)


def test_estimate_proportion_wilson():
    est = estimate_proportion(500_000, 1_000_000)
    assert est.mean == 0.5
    assert est.halfwidth == pytest.approx(0.00098, abs=1e-5)
    assert est.lower < 0.5 < est.upper
    assert estimate([1, 1, 1, 1], binomial=True).upper == pytest.approx(1.0)


def test_estimate_normal_interval():
    est = estimate(np.arange(100, dtype=float))
    assert est.mean == pytest.approx(49.5)
    assert est.halfwidth == pytest.approx(1.959964 * np.std(np.arange(100), ddof=1) / 10.0, rel=1e-5)
    with pytest.raises(ValueError):
        estimate([])


def test_constellation_is_uniform_on_the_shell():
    _, geom = _scenario()
    n = 100_000
    positions, labels = sample_constellation(n, geom, np.random.default_rng(5), (0.25,) * 4)
    radii = np.linalg.norm(positions, axis=1)
    assert np.allclose(radii, geom.r_s, rtol=1e-12)
    z = positions[:, 2] / geom.r_s
    assert abs(z.mean()) <= 4.0 * math.sqrt(1.0 / 3.0 / n)
    visible = 0.5 * (1.0 - geom.r_e / geom.r_s)
    assert _within(np.mean(positions[:, 2] >= geom.r_e), visible, n)
    assert set(np.unique(labels)) == {0, 1, 2, 3}


def test_constellation_fixed_split():
    _, geom = _scenario()
    _, labels = sample_constellation(10, geom, np.random.default_rng(0), split=(3, 3, 2, 2))
    assert np.bincount(labels).tolist() == [3, 3, 2, 2]
    with pytest.raises(ValueError, match="does not sum"):
        sample_constellation(10, geom, np.random.default_rng(0), split=(3, 3))


def test_ground_ppp_count_and_support():
    rng = np.random.default_rng(9)
    lam, radius = 1e-6, 1e4
    counts = []
    for _ in range(2_000):
        points = sample_ground_ppp(lam, radius, rng)
        counts.append(len(points))
        if len(points):
            assert np.all(np.hypot(points[:, 0], points[:, 1]) <= radius)
    mean = lam * math.pi * radius**2
    assert abs(np.mean(counts) - mean) <= 4.0 * math.sqrt(mean / 2_000)


def test_run_trial_follows_the_bias():
    params, geom = _scenario(link__bias_ratio=1e12, link__tau_db=-200.0, constellation__n_sats=200)
    rng = np.random.default_rng(1)
    sim = SimConfig()
    for _ in range(30):
        outcome = run_trial(params, geom, rng, [1.0] * 4, 0, sim, split=(50, 50, 50, 50))
        if math.isnan(outcome.d_sat):
            assert outcome.assoc_tier == Tier.CS
        else:
            assert outcome.assoc_tier == Tier.SAT
            assert geom.a_s - 1e-6 <= outcome.d_sat <= horizon(geom).d_max_down + 1e-6
        assert outcome.covered_down and outcome.covered_up


def test_run_trial_without_satellite_bias():
    params, geom = _scenario(link__bias_ratio=1e-12, constellation__n_sats=200)
    rng = np.random.default_rng(2)
    outcomes = [run_trial(params, geom, rng, [1.0] * 4, 0, SimConfig()) for _ in range(20)]
    assert all(o.assoc_tier == Tier.CS for o in outcomes)


def test_simulation_is_independent_of_workers():
    params, geom = _scenario()
    runs = [
        simulate_task(params, geom, 250, 0.8, SimConfig(trials=20_000, chunk_size=5_000, workers=w), 1)
        for w in (1, 4, 1)
    ]
    assert runs[0] == runs[1] == runs[2]
    other_task = simulate_task(params, geom, 250, 0.8, SimConfig(trials=20_000, chunk_size=5_000), 2)
    assert other_task != runs[0]


def test_chunk_streams_are_distinct():
    a = chunk_generator(1, 0, 0).random(4)
    b = chunk_generator(1, 0, 1).random(4)
    c = chunk_generator(1, 1, 0).random(4)
    assert not np.allclose(a, b)
    assert not np.allclose(a, c)
    assert np.array_equal(a, chunk_generator(1, 0, 0).random(4))


def test_redraw_limit_raises():
    params, geom = _scenario()
    sim = SimConfig(ground_disk_radius=1.0)
    with pytest.raises(SimulationError, match="redraws"):
        simulate_chunk(params, geom, 0, 1.0, 100, np.random.default_rng(0), sim)


def test_nearest_satellite_distance_law():
    params, geom = _scenario()
    trials = 50_000
    batch = simulate_chunk(params, geom, 250, 1.0, trials, np.random.default_rng(4), SimConfig(), dump=True)
    d_sat = batch.records["d_sat"]
    for x in (6e5, 8e5, 1.2e6):
        expected = float(contact_cdf_nearest_sat(x, 250, geom))
        assert _within(np.mean(d_sat <= x), expected, trials)
    d_max = horizon(geom).d_max_down
    assert _within(batch.visible / trials, float(contact_cdf_nearest_sat(d_max, 250, geom)), trials)


def test_association_and_coverage_match_analytic():
    params, geom = _scenario(fading__model="exact-series")
    trials = 200_000
    batch = simulate_task(params, geom, 250, 1.0, SimConfig(trials=trials), 0)
    summary = summarize(batch)
    tau = params.tau
    assert _within(summary["a_sat"].mean, assoc_prob_sat(250, params, geom), trials)
    assert _within(summary["p_cu_down"].mean, cov_down_cs(tau, params), trials)
    assert _within(summary["p_uc_up"].mean, cov_up_cs(tau, params), trials)
    assert _within(summary["p_su_down"].mean, cov_down_sat(tau, 250, params, geom), trials)
    assert summary["a_sat"].mean + summary["a_cs"].mean == pytest.approx(1.0)


@pytest.mark.parametrize("tau_db", [-20.0, -10.0, 0.0, 10.0, 20.0])
def test_satellite_coverage_across_thresholds(tau_db):
    exact, geom = _scenario(link__tau_db=tau_db, fading__model="exact-series")
    bound, _ = _scenario(link__tau_db=tau_db, fading__model="gamma-bound")
    trials = 100_000
    summary = summarize(simulate_task(exact, geom, 250, 1.0, SimConfig(trials=trials), 0))
    tau = exact.tau

    down = summary["p_su_down"].mean
    expected = cov_down_sat(tau, 250, exact, geom)
    assert _within(down, expected, trials) or abs(down - expected) <= 1e-3
    up = summary["p_us_up"].mean
    assert abs(up - cov_up_sat(tau, 250, exact, geom)) <= SAT_COVERAGE_TOL
    assert abs(down - cov_down_sat(tau, 250, bound, geom)) <= GAMMA_BOUND_TOL
    assert abs(up - cov_up_sat(tau, 250, bound, geom)) <= GAMMA_BOUND_TOL


def test_dump_rows_layout():
    params, geom = _scenario()
    batch = simulate_task(params, geom, 250, 1.0, SimConfig(trials=300, chunk_size=100), 0, dump=True)
    rows = dump_rows(batch, 3)
    assert len(rows) == 300
    assert len(rows[0]) == 1 + len(DUMP_COLUMNS)
    assert rows[0][0] == 3
    assert [row[1] for row in rows[:3]] == [0, 1, 2]
    assert {row[2] for row in rows} <= {Tier.SAT.value, Tier.CS.value}
    assert dump_rows(simulate_task(params, geom, 250, 1.0, SimConfig(trials=10), 0), 3) == []
