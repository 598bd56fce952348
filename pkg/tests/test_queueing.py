import math

import numpy as np
import pytest

from leomec.Analysis.queueing import (
    QueueInputs,
    TierLoad,
    average_delay,
    blocking_probability,
    chain_stationary_distribution,
    cs_response_time,
    mean_jobs_in_system,
    mean_loads,
    offload_probability,
    sat_response_time,
    solve_offload_fixed_point,
    transmission_time,
    transmission_times,
)
from leomec.Analysis.coverage import CoverageResult
from leomec.Core.Exception import FixedPointError, StabilityError, UnserviceableLinkError
from leomec.Core.Types import FixedPointMethod
from leomec.params import DEFAULT_CONFIG, from_config


def _sat_queue(rate, buffer, mu=1.0):
    return QueueInputs(lambda_sat=rate, lambda_cs_per_task=0.0, mu_sat=mu, mu_cs=1.0, rho_sat=rate / mu, buffer=buffer)


def _cs_queue(rate, mu):
    return QueueInputs(lambda_sat=0.0, lambda_cs_per_task=rate, mu_sat=1.0, mu_cs=mu, rho_sat=0.0, buffer=1)


@pytest.mark.parametrize(
    ("rho", "buffer", "expected"),
    [
        (0.0, 2, 1.0),
        (1.0, 2, 2.0 / 3.0),
        (100.0, 2, 101.0 / 10101.0),
        (1.0, 1, 0.5),
    ],
)
def test_offload_probability_values(rho, buffer, expected):
    assert offload_probability(rho, buffer) == pytest.approx(expected, rel=1e-12)


def test_offload_probability_heavy_load():
    assert offload_probability(100.0, 2) == pytest.approx(0.0099990, abs=1e-7)
    assert 0.0 < offload_probability(1e12, 50) < 1e-11


@pytest.mark.parametrize("side", [1.0 - 1e-7, 1.0 + 1e-7])
def test_offload_probability_continuous_at_one(side):
    assert offload_probability(side, 2) == pytest.approx(2.0 / 3.0, abs=1e-6)


@pytest.mark.parametrize(("rho", "buffer"), [(-0.1, 2), (0.5, 0), (0.5, 1.5)])
def test_offload_probability_domain(rho, buffer):
    with pytest.raises(ValueError):
        offload_probability(rho, buffer)


@pytest.mark.parametrize("buffer", [1, 2, 5])
@pytest.mark.parametrize("rho", [0.1, 0.5, 1.0, 2.0])
def test_finite_buffer_queue_against_chain(rho, buffer):
    pi = chain_stationary_distribution(rho, 1.0, buffer)
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert offload_probability(rho, buffer) == pytest.approx(1.0 - pi[-1], abs=1e-10)
    assert blocking_probability(rho, buffer) == pytest.approx(pi[-1], abs=1e-10)
    mean_jobs = float(np.dot(np.arange(buffer + 1), pi))
    assert mean_jobs_in_system(rho, buffer) == pytest.approx(mean_jobs, abs=1e-10)
    sojourn = mean_jobs / (rho * (1.0 - pi[-1]))
    assert sat_response_time(_sat_queue(rho, buffer)) == pytest.approx(sojourn, abs=1e-10)


def test_mean_jobs_near_one_and_overflow():
    assert mean_jobs_in_system(1.0 + 1e-9, 4) == pytest.approx(2.0, abs=1e-6)
    assert mean_jobs_in_system(1e6, 200) == pytest.approx(200.0, abs=1e-3)


def test_idle_satellite_queue_is_service_time():
    assert sat_response_time(_sat_queue(0.0, 2, mu=4.0)) == pytest.approx(0.25)


def test_pollaczek_khinchin_single_class():
    assert cs_response_time([_cs_queue(3.0, 5.0)]) == [pytest.approx(0.5, abs=1e-12)]


def test_symmetric_classes_equal_one_class():
    split = cs_response_time([_cs_queue(1.5, 5.0), _cs_queue(1.5, 5.0)])
    assert split == [pytest.approx(0.5, abs=1e-12)] * 2


def test_idle_cloud_server_queue():
    assert cs_response_time([_cs_queue(0.0, 4.0)]) == [0.25]


@pytest.mark.parametrize("rate", [5.0, 6.0])
def test_unstable_cloud_server_queue(rate):
    with pytest.raises(StabilityError, match="utilization"):
        cs_response_time([_cs_queue(rate, 5.0)])


def _two_class_arrivals(jobs, seed):
    rates, services = (0.3, 0.2), (2.0, 1.0)
    rng = np.random.default_rng(seed)
    total = sum(rates)
    classes = rng.choice(2, size=jobs, p=np.array(rates) / total)
    gaps = rng.exponential(1.0 / total, size=jobs)
    work = rng.exponential(1.0, size=jobs) / np.take(services, classes)
    return rates, services, classes, gaps, work


def _fcfs_sojourn(gaps, work):
    """Lindley recursion for a single FCFS server, in closed form over cumulative sums."""
    drift = np.concatenate(([0.0], np.cumsum(work[:-1] - gaps[1:])))
    waiting = drift - np.minimum.accumulate(drift)
    return waiting + work


def test_pollaczek_khinchin_against_fcfs_recursion():
    rates, services, classes, gaps, work = _two_class_arrivals(4_000_000, 2024)
    sojourn = _fcfs_sojourn(gaps, work)
    analytic = cs_response_time([_cs_queue(r, s) for r, s in zip(rates, services)])
    for i in range(2):
        assert sojourn[classes == i].mean() == pytest.approx(analytic[i], rel=0.01)


def test_fcfs_recursion_matches_event_simulation():
    simpy = pytest.importorskip("simpy")
    _, _, _, gaps, work = _two_class_arrivals(50_000, 7)
    sojourn = np.zeros(len(gaps))

    env = simpy.Environment()
    server = simpy.Resource(env, capacity=1)

    def job(k):
        arrived = env.now
        with server.request() as slot:
            yield slot
            yield env.timeout(work[k])
        sojourn[k] = env.now - arrived

    def source():
        for k in range(len(gaps)):
            yield env.timeout(gaps[k])
            env.process(job(k))

    env.process(source())
    env.run()
    assert np.allclose(sojourn, _fcfs_sojourn(gaps, work), rtol=0.0, atol=1e-6)


def test_mean_loads_and_bandwidth():
    params, _ = from_config(DEFAULT_CONFIG)
    task = params.tasks[0]
    idle = mean_loads(task, 0.0, params.lambda_c / params.lambda_u, params, 0.0)
    assert idle.mean_ues_sat == 1.0
    assert idle.mean_ues_cs == pytest.approx(1.0)
    assert idle.w_sat == pytest.approx(params.bandwidth)
    assert idle.w_cs == pytest.approx(params.bandwidth)
    busy = mean_loads(task, 0.5, 0.5, params, 1e-12)
    assert busy.mean_ues_sat == pytest.approx(1.0 + 1.28 * 0.25 * params.lambda_u * 0.5 / 1e-12)
    assert busy.w_cs == pytest.approx(params.bandwidth / busy.mean_ues_cs)
    with pytest.raises(ValueError, match="satellite density"):
        mean_loads(task, 0.5, 0.5, params, 0.0)


def test_transmission_time():
    assert transmission_time(500.0, 1.0, 500.0, 1.0) == pytest.approx(1.0)
    assert transmission_time(500.0, 0.5, 500.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(UnserviceableLinkError, match="unserviceable"):
        transmission_time(500.0, 0.0, 500.0, 1.0, "su_down")


def test_transmission_times_skip_unused_tier():
    params, _ = from_config(DEFAULT_CONFIG)
    coverage = CoverageResult(
        p_su_down=0.0, p_cu_down=0.9, p_us_up=0.0, p_uc_up=0.8, total_down=0.9, total_up=0.8, tau=1.0,
    )
    loads = TierLoad(mean_ues_sat=1.0, mean_ues_cs=1.0, w_sat=1e6, w_cs=1e6)
    t_up_cs, t_down_cs, t_up_sat, t_down_sat = transmission_times(params.tasks[0], coverage, loads, params, a_sat=0.0)
    assert (t_up_sat, t_down_sat) == (0.0, 0.0)
    assert t_up_cs == pytest.approx(500.0 / (0.8 * 1e6))
    with pytest.raises(UnserviceableLinkError):
        transmission_times(params.tasks[0], coverage, loads, params, a_sat=0.2)


def test_average_delay_mixture():
    delay = average_delay(0.3, 0.7, (1.0, 1.0, 2.0, 2.0), 1.0, 4.0)
    assert delay.t_avg == pytest.approx(0.7 * 3.0 + 0.3 * 8.0)
    only_cs = average_delay(0.0, 1.0, (1.0, 1.0, 0.0, 0.0), 1.0, 0.0)
    assert only_cs.t_avg == pytest.approx(3.0)


def test_fixed_point_trivial_cases():
    empty = solve_offload_fixed_point(0, lambda n: (0.0, 0.0), 2)
    assert (empty.p_ofld, empty.n_offloadable) == (1.0, 0.0)
    idle = solve_offload_fixed_point(100, lambda n: (0.4, 0.0), 2)
    assert idle.p_ofld == 1.0
    assert idle.n_offloadable == pytest.approx(100.0)
    assert idle.a_sat == 0.4


def test_fixed_point_methods_agree():
    def response(n):
        return 0.5, 0.05 * n

    damped = solve_offload_fixed_point(100, response, 2, FixedPointMethod.DAMPED)
    bisect = solve_offload_fixed_point(100, response, 2, FixedPointMethod.BISECT)
    assert damped.p_ofld == pytest.approx(bisect.p_ofld, abs=1e-8)
    x = damped.p_ofld
    assert x == pytest.approx(offload_probability(0.05 * 100 * x, 2), abs=1e-8)
    assert 0.0 < x < 1.0
    assert damped.iterations > 0


def test_fixed_point_failure_keeps_trace():
    def response(n):
        return 1.0, 0.0 if n < 50 else 1e9

    with pytest.raises(FixedPointError, match="no convergence") as info:
        solve_offload_fixed_point(100, response, 2, FixedPointMethod.DAMPED)
    assert len(info.value.trace) > 100
    assert not math.isnan(info.value.trace[-1])
