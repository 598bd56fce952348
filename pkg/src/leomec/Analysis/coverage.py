"""Uplink and downlink SNR coverage probabilities per link and system mixtures."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..Core.Types import FadingModel
from .channel import SPEED_OF_LIGHT, gamma_approx_of_sr, gamma_bound_ccdf
from .geometry import (
    contact_pdf_nearest_sat,
    contact_pdf_serving_sat_uplink,
    horizon,
    nearest_cs_pdf,
    visibility_weight,
)
from .numerics import integrate, sr_power_cdf

logger = logging.getLogger(name="leomec.coverage")

TAIL_EPS = 1e-16


@dataclass(frozen=True)
class CoverageResult:
    p_su_down: float
    p_cu_down: float
    p_us_up: float
    p_uc_up: float
    total_down: float
    total_up: float
    tau: float


def _fading_success(params, a_const: float, exponent: float, satellite: bool) -> Callable[[float], float]:
    """x -> P(fading power > a_const * x^exponent) for the link's fading law."""
    if not satellite:
        return lambda x: math.exp(-a_const * x**exponent)
    if params.fading_model == FadingModel.EXACT_SERIES:
        return lambda x: 1.0 - float(sr_power_cdf(a_const * x**exponent, params.sr))
    g = gamma_approx_of_sr(params.sr, params.shape_rounding)
    return lambda x: float(gamma_bound_ccdf(a_const * x**exponent, g))


def _coverage_integral(success, density, lower: float, upper: float, spec) -> float:
    value = integrate(lambda x: success(x) * density(x), lower, upper, spec)
    return min(1.0, max(0.0, value))


def _sat_constant(tau: float, noise: float, power: float, f_s: float) -> float:
    return tau * noise / (power * (SPEED_OF_LIGHT / (4.0 * math.pi * f_s)) ** 2)


def _cs_coverage(tau: float, power: float, noise: float, params) -> float:
    k = tau * noise / (power * (SPEED_OF_LIGHT / (4.0 * math.pi * params.f_c)) ** params.alpha)
    success = _fading_success(params, k, params.alpha, satellite=False)
    density = lambda x: float(nearest_cs_pdf(x, params.lambda_c))
    r_tail = math.sqrt(math.log(1.0 / TAIL_EPS) / (params.lambda_c * math.pi))
    truncated = _coverage_integral(success, density, 0.0, r_tail, params.quadrature)
    full = _coverage_integral(success, density, 0.0, math.inf, params.quadrature)
    if abs(truncated - full) > 10.0 * max(params.quadrature.abs_tol, params.quadrature.rel_tol * abs(full)):
        logger.warning(f"Tail truncation at {r_tail:.4g} m disagrees with the half-line integral: {truncated!r} vs {full!r}")
    return truncated


def cov_down_sat(tau: float, n_i: float, params, geom) -> float:
    if not tau > 0:
        raise ValueError("tau must be > 0")
    if n_i <= 0:
        return 0.0
    a_const = _sat_constant(tau, params.sigma2_u, params.p_s, params.f_s)
    success = _fading_success(params, a_const, 2.0, satellite=True)
    density = lambda x: float(contact_pdf_nearest_sat(x, n_i, geom))
    return _coverage_integral(success, density, geom.a_s, horizon(geom).d_max_down, params.quadrature)


def cov_down_cs(tau: float, params) -> float:
    if not tau > 0:
        raise ValueError("tau must be > 0")
    return _cs_coverage(tau, params.p_c, params.sigma2_u, params)


def uplink_sat_success(tau: float, params, geom) -> float:
    """Coverage of the U-S link given a visible serving satellite, without the visibility weight."""
    if not tau > 0:
        raise ValueError("tau must be > 0")
    a_const = _sat_constant(tau, params.sigma2_s, params.p_u, params.f_s)
    success = _fading_success(params, a_const, 2.0, satellite=True)
    density = lambda x: float(contact_pdf_serving_sat_uplink(x, geom))
    return _coverage_integral(success, density, geom.a_s, horizon(geom).d_max_up, params.quadrature)


def cov_up_sat(tau: float, n_i: float, params, geom, conditional: float = None) -> float:
    weight = visibility_weight(n_i, geom)
    if weight <= 0.0:
        return 0.0
    if conditional is None:
        conditional = uplink_sat_success(tau, params, geom)
    return weight * conditional


def cov_up_cs(tau: float, params) -> float:
    if not tau > 0:
        raise ValueError("tau must be > 0")
    return _cs_coverage(tau, params.p_u, params.sigma2_c, params)


def total_cov(probabilities: Sequence[float], a_sat: Sequence[float], a_cs: Sequence[float],
              p_sat: Sequence[float], p_cs: Sequence[float]) -> float:
    """Σ_i q_i [A_i P_S_i + A_0i P_C_i]."""
    terms = [q * (a_s * ps + a_c * pc) for q, a_s, a_c, ps, pc in zip(probabilities, a_sat, a_cs, p_sat, p_cs)]
    return float(min(1.0, max(0.0, math.fsum(terms))))


def total_cov_down(probabilities, associations, per_task) -> float:
    return total_cov(
        probabilities,
        [a.a_sat for a in associations],
        [a.a_cs for a in associations],
        [c.p_su_down for c in per_task],
        [c.p_cu_down for c in per_task],
    )


def total_cov_up(probabilities, associations, per_task) -> float:
    return total_cov(
        probabilities,
        [a.a_sat for a in associations],
        [a.a_cs for a in associations],
        [c.p_us_up for c in per_task],
        [c.p_uc_up for c in per_task],
    )


def tau_grid(low_db: float = -20.0, high_db: float = 20.0, points: int = 20) -> np.ndarray:
    return 10.0 ** (np.linspace(low_db, high_db, points) / 10.0)


__all__ = [
    "CoverageResult",
    "cov_down_sat",
    "cov_down_cs",
    "cov_up_sat",
    "cov_up_cs",
    "uplink_sat_success",
    "total_cov",
    "total_cov_down",
    "total_cov_up",
    "tau_grid",
]
