"""Biased-average-power association between the typical UE and the two tiers.

Tier i is the nearest offloadable satellite caching service i, tier 0 the
nearest cloud server. The satellite wins when D_c >= Q_s D_s^(2/alpha).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import SPEED_OF_LIGHT
from .geometry import contact_cdf_nearest_sat, contact_pdf_nearest_sat, horizon, nearest_cs_cdf, nearest_cs_pdf
from .numerics import integrate

logger = logging.getLogger(name="leomec.association")

PARTITION_TOL = 1e-6


@dataclass(frozen=True)
class AssociationResult:
    a_sat: float
    a_cs: float
    q_s_factor: float
    n_offloadable: float


def q_s_constant(params, geom=None) -> float:
    """Q_s = (p_c B_c/(p_s B_s))^(1/alpha) (4 pi f_s/c)^(2/alpha) (c/(4 pi f_c))."""
    alpha = params.alpha
    power_ratio = params.p_c / (params.p_s * params.bias_ratio)
    return (
        power_ratio ** (1.0 / alpha)
        * (4.0 * math.pi * params.f_s / SPEED_OF_LIGHT) ** (2.0 / alpha)
        * (SPEED_OF_LIGHT / (4.0 * math.pi * params.f_c))
    )


def assoc_prob_sat(n_i: float, params, geom) -> float:
    """Probability that the typical UE with n_i offloadable satellites picks the satellite tier."""
    if n_i <= 0:
        return 0.0
    q_s = q_s_constant(params, geom)
    exponent = 4.0 / params.alpha
    lam_pi = params.lambda_c * math.pi

    def integrand(x):
        return math.exp(-lam_pi * q_s * q_s * x**exponent) * float(contact_pdf_nearest_sat(x, n_i, geom))

    value = integrate(integrand, geom.a_s, horizon(geom).d_max_down, params.quadrature)
    return min(1.0, max(0.0, value))


def assoc_prob_cs(n_i: float, params, geom) -> float:
    """Probability of the cloud server tier as the sum of its three range pieces.

    [0, x1): no satellite can be biased-stronger; [x1, x2): the nearest satellite
    must be beyond (x/Q_s)^(alpha/2); [x2, inf): no satellite may be visible.
    """
    if n_i <= 0:
        return 1.0
    q_s = q_s_constant(params, geom)
    d_max = horizon(geom).d_max_down
    x1 = q_s * geom.a_s ** (2.0 / params.alpha)
    x2 = q_s * d_max ** (2.0 / params.alpha)

    near = float(nearest_cs_cdf(x1, params.lambda_c))

    def integrand(x):
        d_s = (x / q_s) ** (params.alpha / 2.0)
        survive = 1.0 - float(contact_cdf_nearest_sat(d_s, n_i, geom))
        return survive * float(nearest_cs_pdf(x, params.lambda_c))

    middle = integrate(integrand, x1, x2, params.quadrature)
    none_visible = 1.0 - float(contact_cdf_nearest_sat(d_max, n_i, geom))
    far = none_visible * math.exp(-params.lambda_c * math.pi * x2 * x2)
    return min(1.0, max(0.0, near + middle + far))


def associate(n_i: float, params, geom) -> AssociationResult:
    a_sat = assoc_prob_sat(n_i, params, geom)
    a_cs = assoc_prob_cs(n_i, params, geom)
    drift = abs(a_sat + a_cs - 1.0)
    if drift > PARTITION_TOL:
        logger.warning(f"Association partition drift {drift:.3g} at N_i={n_i:.6g}")
    return AssociationResult(a_sat=a_sat, a_cs=a_cs, q_s_factor=q_s_constant(params, geom), n_offloadable=n_i)


def sat_wins(d_sat, d_cs, params):
    """Vectorised association rule on sampled distances, True where the satellite tier wins."""
    d_sat = np.asarray(d_sat, dtype=float)
    d_cs = np.asarray(d_cs, dtype=float)
    q_s = q_s_constant(params)
    with np.errstate(invalid="ignore"):
        return d_cs >= q_s * d_sat ** (2.0 / params.alpha)


__all__ = [
    "AssociationResult",
    "q_s_constant",
    "assoc_prob_sat",
    "assoc_prob_cs",
    "associate",
    "sat_wins",
]
