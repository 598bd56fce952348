"""Loads, bandwidth shares, transmission times, queue response times and the offloadability fixed point."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import optimize

from ..Core.Exception import FixedPointError, StabilityError, UnserviceableLinkError
from ..Core.Types import FixedPointMethod

logger = logging.getLogger(name="leomec.queueing")

SAT_LOAD_FACTOR = 1.28
DAMPING = 0.5
FIXED_POINT_TOL = 1e-9
FIXED_POINT_MAX_ITER = 500


@dataclass(frozen=True)
class TierLoad:
    mean_ues_sat: float
    mean_ues_cs: float
    w_sat: float
    w_cs: float


@dataclass(frozen=True)
class QueueInputs:
    lambda_sat: float
    lambda_cs_per_task: float
    mu_sat: float
    mu_cs: float
    rho_sat: float
    buffer: int


@dataclass(frozen=True)
class DelayBreakdown:
    t_up_cs: float
    t_down_cs: float
    t_up_sat: float
    t_down_sat: float
    t_resp_cs: float
    t_resp_sat: float
    t_avg: float


@dataclass(frozen=True)
class FixedPoint:
    n_offloadable: float
    p_ofld: float
    a_sat: float
    iterations: int


def _state_weights(rho: float, buffer: int) -> np.ndarray:
    """Unnormalised M/M/1/N stationary weights rho^n, rescaled to avoid overflow."""
    n = np.arange(buffer + 1, dtype=float)
    if rho <= 1.0:
        return rho**n
    return (1.0 / rho) ** (buffer - n)


def blocking_probability(rho: float, buffer: int) -> float:
    """sigma = rho^N / Σ_{n=0}^{N} rho^n, the probability that the buffer is full."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if rho == 0.0:
        return 0.0
    weights = _state_weights(rho, buffer)
    return float(weights[-1] / weights.sum())


def offload_probability(rho: float, buffer: int) -> float:
    """1 - (1 - rho) rho^N / (1 - rho^(N+1)), with the limit 1 - 1/(N+1) at rho = 1."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if int(buffer) != buffer or buffer < 1:
        raise ValueError("buffer must be an integer >= 1")
    if rho == 0.0:
        return 1.0
    if rho == 1.0:
        return 1.0 - 1.0 / (buffer + 1.0)
    if rho < 1.0:
        full = (1.0 - rho) * rho**buffer / (1.0 - rho ** (buffer + 1))
    else:
        inv = 1.0 / rho
        full = (1.0 - inv) / (1.0 - inv ** (buffer + 1))
    return 1.0 - full


def mean_jobs_in_system(rho: float, buffer: int) -> float:
    """Mean number in an M/M/1/N system.

    rho (1 - (N+1) rho^N + N rho^(N+1)) / ((1 - rho)(1 - rho^(N+1))) away from
    rho = 1; the exact finite sum Σ n pi_n near the removable singularity or
    where the powers overflow.
    """
    if rho == 0.0:
        return 0.0
    near_one = abs(rho - 1.0) < 1e-6
    overflow = rho > 1.0 and (buffer + 1) * math.log(rho) > 600.0
    if near_one or overflow:
        weights = _state_weights(rho, buffer)
        return float(np.dot(np.arange(buffer + 1), weights) / weights.sum())
    numerator = rho * (1.0 - (buffer + 1) * rho**buffer + buffer * rho ** (buffer + 1))
    return numerator / ((1.0 - rho) * (1.0 - rho ** (buffer + 1)))


def chain_stationary_distribution(arrival: float, service: float, buffer: int) -> np.ndarray:
    """Stationary law of the M/M/1/N birth-death chain from its generator matrix.

    Solves pi Q = 0 with sum(pi) = 1 by least squares on the stacked system.
    """
    size = buffer + 1
    generator = np.zeros((size, size))
    for n in range(size):
        if n < buffer:
            generator[n, n + 1] = arrival
        if n > 0:
            generator[n, n - 1] = service
        generator[n, n] = -generator[n].sum()
    system = np.vstack([generator.T, np.ones(size)])
    rhs = np.zeros(size + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return pi


def sat_response_time(q: QueueInputs) -> float:
    """Mean sojourn time of the finite-buffer satellite queue, L / (Lambda (1 - sigma))."""
    if q.lambda_sat <= 0.0:
        return 1.0 / q.mu_sat
    rho = q.lambda_sat / q.mu_sat
    mean_jobs = mean_jobs_in_system(rho, q.buffer)
    return mean_jobs / (q.lambda_sat * (1.0 - blocking_probability(rho, q.buffer)))


def cs_response_time(inputs: Sequence[QueueInputs]) -> List[float]:
    """Multi-class M/G/1 mean sojourn time per class from the Pollaczek-Khinchin formula.

    Raises:
        StabilityError: If the aggregate utilization is >= 1.
    """
    total = math.fsum(q.lambda_cs_per_task for q in inputs)
    if total <= 0.0:
        return [1.0 / q.mu_cs for q in inputs]
    shares = [q.lambda_cs_per_task / total for q in inputs]
    utilization = total * math.fsum(s / q.mu_cs for s, q in zip(shares, inputs))
    if utilization >= 1.0:
        raise StabilityError(utilization)
    second_moment = math.fsum(2.0 * s / q.mu_cs**2 for s, q in zip(shares, inputs))
    waiting = total * second_moment / (2.0 * (1.0 - utilization))
    return [1.0 / q.mu_cs + waiting for q in inputs]


def mean_loads(task, a_sat: float, a_cs: float, params, sat_density: float) -> TierLoad:
    """Mean number of UEs per serving satellite and per cloud server, and the per-UE bandwidth.

    Args:
        task (TaskSpec): The task class.
        a_sat (float): Association probability with the satellite tier.
        a_cs (float): Association probability with the cloud server tier.
        params (SystemParams): Scenario parameters.
        sat_density (float): Density of type-i satellites, points per m^2.
    """
    if a_sat > 0.0 and not sat_density > 0:
        raise ValueError("satellite density must be > 0 when the satellite tier carries traffic")
    users = params.task_user_density(task)
    mean_sat = 1.0 + SAT_LOAD_FACTOR * users * a_sat / sat_density if a_sat > 0.0 else 1.0
    mean_cs = params.lambda_u * a_cs / params.lambda_c
    return TierLoad(
        mean_ues_sat=mean_sat,
        mean_ues_cs=mean_cs,
        w_sat=params.bandwidth / mean_sat,
        w_cs=params.bandwidth / max(mean_cs, 1.0),
    )


def transmission_time(bits: float, coverage: float, bandwidth: float, tau: float, link: str = "link") -> float:
    if not coverage > 0.0:
        raise UnserviceableLinkError(link, tau)
    return bits / (coverage * bandwidth * math.log2(1.0 + tau))


def transmission_times(task, coverage, loads: TierLoad, params, a_sat: float = 1.0, a_cs: float = 1.0) -> Tuple[float, float, float, float]:
    """Uplink/downlink transmission times (cs_up, cs_down, sat_up, sat_down).

    A tier with zero association probability contributes nothing, so its
    times are reported as 0 instead of failing on zero coverage.
    """
    tau = params.tau
    if a_cs > 0.0:
        t_up_cs = transmission_time(task.input_bits, coverage.p_uc_up, loads.w_cs, tau, "uc_up")
        t_down_cs = transmission_time(task.output_bits, coverage.p_cu_down, loads.w_cs, tau, "cu_down")
    else:
        t_up_cs = t_down_cs = 0.0
    if a_sat > 0.0:
        t_up_sat = transmission_time(task.input_bits, coverage.p_us_up, loads.w_sat, tau, "us_up")
        t_down_sat = transmission_time(task.output_bits, coverage.p_su_down, loads.w_sat, tau, "su_down")
    else:
        t_up_sat = t_down_sat = 0.0
    return t_up_cs, t_down_cs, t_up_sat, t_down_sat


def average_delay(a_sat: float, a_cs: float, times: Tuple[float, float, float, float],
                  t_resp_cs: float, t_resp_sat: float) -> DelayBreakdown:
    t_up_cs, t_down_cs, t_up_sat, t_down_sat = times
    cs_total = t_resp_cs + t_up_cs + t_down_cs if a_cs > 0.0 else 0.0
    sat_total = t_resp_sat + t_up_sat + t_down_sat if a_sat > 0.0 else 0.0
    return DelayBreakdown(
        t_up_cs=t_up_cs,
        t_down_cs=t_down_cs,
        t_up_sat=t_up_sat,
        t_down_sat=t_down_sat,
        t_resp_cs=t_resp_cs,
        t_resp_sat=t_resp_sat,
        t_avg=a_cs * cs_total + a_sat * sat_total,
    )


def solve_offload_fixed_point(
    n_type: int,
    response: Callable[[float], Tuple[float, float]],
    buffer: int,
    method: FixedPointMethod = FixedPointMethod.DAMPED,
) -> FixedPoint:
    """Solve x = G(x) for the offload probability of one satellite type.

    `response(n_i)` returns (A_sat, rho) for n_i = n_type * x offloadable
    satellites; G(x) = offload_probability(rho).

    Raises:
        FixedPointError: If the damped iteration does not settle.
    """
    if n_type <= 0:
        return FixedPoint(n_offloadable=0.0, p_ofld=1.0, a_sat=0.0, iterations=0)

    def g(x: float) -> float:
        _, rho = response(n_type * x)
        return offload_probability(rho, buffer)

    if FixedPointMethod(method) == FixedPointMethod.BISECT:
        if g(1.0) >= 1.0:
            x = 1.0
        else:
            x = optimize.bisect(lambda v: g(v) - v, 0.0, 1.0, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)
        a_sat, _ = response(n_type * x)
        return FixedPoint(n_offloadable=n_type * x, p_ofld=x, a_sat=a_sat, iterations=0)

    x = 1.0
    trace = [x]
    for iteration in range(1, FIXED_POINT_MAX_ITER + 1):
        x_next = (1.0 - DAMPING) * x + DAMPING * g(x)
        trace.append(x_next)
        if abs(x_next - x) < FIXED_POINT_TOL:
            logger.debug(f"Fixed point settled at P_ofld={x_next:.12g} after {iteration} iterations")
            a_sat, _ = response(n_type * x_next)
            return FixedPoint(n_offloadable=n_type * x_next, p_ofld=x_next, a_sat=a_sat, iterations=iteration)
        x = x_next
    raise FixedPointError(trace)


__all__ = [
    "SAT_LOAD_FACTOR",
    "TierLoad",
    "QueueInputs",
    "DelayBreakdown",
    "FixedPoint",
    "blocking_probability",
    "offload_probability",
    "mean_jobs_in_system",
    "chain_stationary_distribution",
    "sat_response_time",
    "cs_response_time",
    "mean_loads",
    "transmission_time",
    "transmission_times",
    "average_delay",
    "solve_offload_fixed_point",
]
