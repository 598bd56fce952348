"""Distance distributions and visibility quantities.

Satellites are a binomial point process on the sphere of radius r_s, ground
nodes a Poisson point process on the plane. A satellite at slant range x from
a ground UE sits at polar angle phi with

    1 - cos(phi) = (x^2 - a_s^2) / (2 r_e r_s).

`CapLaw.ARC` measures the visible cap by phi/pi, `CapLaw.AREA` by the cap area
fraction (1 - cos(phi))/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..Core.Types import CapLaw
from .numerics import as_output

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class HorizonQuantities:
    d_max_down: float
    d_max_up: float
    theta_c: float


def clamped_arccos(value: ArrayLike):
    """arccos with arguments within CLAMP_TOL outside [-1, 1] pulled back in."""
    v = np.asarray(value, dtype=float)
    if np.any(v > 1.0 + CLAMP_TOL) or np.any(v < -1.0 - CLAMP_TOL):
        raise ArithmeticError(f"arccos argument outside [-1, 1] beyond tolerance: {value!r}")
    return as_output(np.arccos(np.clip(v, -1.0, 1.0)))


def horizon(geom) -> HorizonQuantities:
    d_down = math.sqrt(2.0 * geom.r_e * geom.a_s + geom.a_s**2)
    d_up = math.sqrt(geom.r_s**2 - geom.r_e**2)
    if abs(d_down - d_up) > 1e-9 * d_down:
        raise ArithmeticError(f"horizon distances disagree: {d_down!r} vs {d_up!r}")
    return HorizonQuantities(d_max_down=d_down, d_max_up=d_up, theta_c=float(clamped_arccos(geom.r_e / geom.r_s)))


def _versine(x, geom):
    """1 - cos(phi) at slant range x, computed without cancellation."""
    return (x - geom.a_s) * (x + geom.a_s) / (2.0 * geom.r_e * geom.r_s)


def polar_angle(x: ArrayLike, geom):
    """Polar angle arccos(1 - u), evaluated as 2 arcsin(sqrt(u/2)) to keep precision near x = a_s."""
    u = np.asarray(_versine(np.asarray(x, dtype=float), geom))
    if np.any(u < -CLAMP_TOL) or np.any(u > 2.0 + CLAMP_TOL):
        raise ArithmeticError(f"slant range outside the shell geometry: {x!r}")
    return as_output(2.0 * np.arcsin(np.sqrt(np.clip(0.5 * u, 0.0, 1.0))))


def cap_fraction(phi: ArrayLike, geom):
    """Probability that one uniformly placed satellite lies within polar angle phi."""
    phi_arr = np.asarray(phi, dtype=float)
    if geom.cap_law == CapLaw.AREA:
        return as_output(0.5 * (1.0 - np.cos(phi_arr)))
    return as_output(phi_arr / math.pi)


def _cap_fraction_at(x, geom):
    if geom.cap_law == CapLaw.AREA:
        return 0.5 * _versine(x, geom)
    return np.asarray(polar_angle(x, geom)) / math.pi


def _cap_fraction_density(x, geom):
    """d/dx of the cap fraction at slant range x, zero outside (a_s, d_max)."""
    if geom.cap_law == CapLaw.AREA:
        return x / (2.0 * geom.r_e * geom.r_s)
    u = _versine(x, geom)
    sin_phi = np.sqrt(np.clip(u * (2.0 - u), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.where(sin_phi > 0, x / (math.pi * geom.r_e * geom.r_s * sin_phi), 0.0)
    return density


def horizon_cap_fraction(geom) -> float:
    return float(cap_fraction(horizon(geom).theta_c, geom))


def contact_cdf_nearest_sat(x: ArrayLike, n: float, geom):
    """CDF of the distance to the nearest of n satellites."""
    x_arr = np.asarray(x, dtype=float)
    if n <= 0:
        return as_output(np.zeros_like(x_arr))
    d_max = horizon(geom).d_max_down
    inside = np.clip(x_arr, geom.a_s, d_max)
    value = 1.0 - (1.0 - np.asarray(_cap_fraction_at(inside, geom))) ** n
    value = np.where(x_arr < geom.a_s, 0.0, value)
    return as_output(value)


def contact_pdf_nearest_sat(x: ArrayLike, n: float, geom):
    x_arr = np.asarray(x, dtype=float)
    if n <= 0:
        return as_output(np.zeros_like(x_arr))
    d_max = horizon(geom).d_max_down
    support = (x_arr > geom.a_s) & (x_arr < d_max)
    inside = np.clip(x_arr, geom.a_s, d_max)
    survival = 1.0 - np.asarray(_cap_fraction_at(inside, geom))
    with np.errstate(divide="ignore", invalid="ignore"):
        value = n * survival ** (n - 1.0) * _cap_fraction_density(inside, geom)
    return as_output(np.where(support, value, 0.0))


def contact_cdf_serving_sat_uplink(x: ArrayLike, geom):
    """Distance law of a uniformly placed satellite conditioned on being visible."""
    x_arr = np.asarray(x, dtype=float)
    d_max = horizon(geom).d_max_up
    inside = np.clip(x_arr, geom.a_s, d_max)
    value = np.asarray(_cap_fraction_at(inside, geom)) / horizon_cap_fraction(geom)
    value = np.where(x_arr < geom.a_s, 0.0, np.where(x_arr >= d_max, 1.0, value))
    return as_output(np.clip(value, 0.0, 1.0))


def contact_pdf_serving_sat_uplink(x: ArrayLike, geom):
    x_arr = np.asarray(x, dtype=float)
    d_max = horizon(geom).d_max_up
    support = (x_arr > geom.a_s) & (x_arr < d_max)
    inside = np.clip(x_arr, geom.a_s, d_max)
    value = _cap_fraction_density(inside, geom) / horizon_cap_fraction(geom)
    return as_output(np.where(support, value, 0.0))


def nearest_cs_cdf(x: ArrayLike, lambda_c: float):
    x_arr = np.asarray(x, dtype=float)
    return as_output(np.where(x_arr > 0, -np.expm1(-lambda_c * math.pi * x_arr**2), 0.0))


def nearest_cs_pdf(x: ArrayLike, lambda_c: float):
    x_arr = np.asarray(x, dtype=float)
    value = 2.0 * lambda_c * math.pi * x_arr * np.exp(-lambda_c * math.pi * x_arr**2)
    return as_output(np.where(x_arr > 0, value, 0.0))


def visibility_weight(n: float, geom) -> float:
    """Probability that at least one of the satellites is above the horizon.

    With `CapLaw.ARC` the exponent is n - 1, with `CapLaw.AREA` the exact void
    probability exponent n. Negative values for n below the offset are reported as 0.
    """
    exponent = n if geom.cap_law == CapLaw.AREA else n - 1.0
    if exponent <= 0:
        return 0.0
    theta_c = horizon(geom).theta_c
    return float(min(1.0, max(0.0, 1.0 - ((1.0 + math.cos(theta_c)) / 2.0) ** exponent)))


__all__ = [
    "HorizonQuantities",
    "clamped_arccos",
    "horizon",
    "polar_angle",
    "cap_fraction",
    "horizon_cap_fraction",
    "contact_cdf_nearest_sat",
    "contact_pdf_nearest_sat",
    "contact_cdf_serving_sat_uplink",
    "contact_pdf_serving_sat_uplink",
    "nearest_cs_cdf",
    "nearest_cs_pdf",
    "visibility_weight",
]
