"""Fading models, the Gamma approximation of Shadowed-Rician fading, path loss and SNR."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from numpy.random import Generator
from numpy.typing import ArrayLike
from scipy import special

from ..Core.Types import FadingKind, ShapeRounding
from .numerics import as_output

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SRFadingParams:
    omega: float
    b0: float
    m: float

    def __post_init__(self):
        if not (self.omega > 0 and self.b0 > 0 and self.m > 0):
            raise ValueError(
                f"Shadowed-Rician parameters must be > 0, got omega={self.omega}, b0={self.b0}, m={self.m}"
            )

    @property
    def mean_power(self) -> float:
        return 2.0 * self.b0 + self.omega


@dataclass(frozen=True)
class GammaApprox:
    """Moment-matched Gamma law of the Shadowed-Rician power.

    `alpha_s`/`beta_s` match the first two moments. `alpha_s_int` is the
    integer shape used by the closed-form coverage sums and `beta_s_int` the
    scale that keeps the mean with that shape.
    """

    alpha_s: float
    beta_s: float
    alpha_s_int: int
    beta_s_int: float

    @property
    def mu(self) -> float:
        return special.gamma(self.alpha_s_int + 1.0) ** (-1.0 / self.alpha_s_int)


@dataclass(frozen=True)
class LinkBudget:
    tx_power: float
    frequency: float
    noise: float
    path_loss_exp: float
    fading_kind: FadingKind

    def __post_init__(self):
        if not (self.tx_power > 0 and self.frequency > 0 and self.noise > 0):
            raise ValueError("link power, frequency and noise must be > 0")
        if not self.path_loss_exp >= 2:
            raise ValueError(f"path loss exponent must be >= 2, got {self.path_loss_exp}")


def gamma_approx_of_sr(sr: SRFadingParams, rounding: ShapeRounding = ShapeRounding.NEAREST) -> GammaApprox:
    quad = 4.0 * sr.m * sr.b0**2 + 4.0 * sr.m * sr.b0 * sr.omega + sr.omega**2
    mean = sr.mean_power
    alpha_s = sr.m * mean**2 / quad
    beta_s = quad / (sr.m * mean)
    if rounding == ShapeRounding.FLOOR:
        shape = math.floor(alpha_s)
    elif rounding == ShapeRounding.CEIL:
        shape = math.ceil(alpha_s)
    else:
        shape = int(math.floor(alpha_s + 0.5))
    shape = max(1, int(shape))
    return GammaApprox(alpha_s=alpha_s, beta_s=beta_s, alpha_s_int=shape, beta_s_int=mean / shape)


def gamma_tight_bound_cdf(t: ArrayLike, g: GammaApprox):
    """(1 - exp(-mu t / beta))^alpha with the integer shape and mean-preserving scale."""
    t_arr = np.asarray(t, dtype=float)
    value = (-np.expm1(-g.mu * t_arr / g.beta_s_int)) ** g.alpha_s_int
    return as_output(value)


def gamma_bound_ccdf(y: ArrayLike, g: GammaApprox):
    """Σ_{j=1}^{α} C(α, j) (-1)^{j+1} exp(-j mu y / beta), the complement of the tight bound."""
    y_arr = np.asarray(y, dtype=float)
    total = np.zeros_like(y_arr)
    for j in range(1, g.alpha_s_int + 1):
        total = total + special.comb(g.alpha_s_int, j, exact=True) * (-1.0) ** (j + 1) * np.exp(
            -j * g.mu * y_arr / g.beta_s_int
        )
    return as_output(total)


def path_loss(d: ArrayLike, f: float, exponent: float):
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise ValueError("path_loss requires d > 0")
    return as_output((SPEED_OF_LIGHT / (4.0 * math.pi * f * d_arr)) ** exponent)


def mean_rx_power(link: LinkBudget, d: ArrayLike):
    return as_output(link.tx_power * np.asarray(path_loss(d, link.frequency, link.path_loss_exp)))


def snr(link: LinkBudget, d: ArrayLike, fading_draw: ArrayLike):
    return as_output(np.asarray(mean_rx_power(link, d)) * np.asarray(fading_draw, dtype=float) / link.noise)


def link_budgets(params) -> Dict[str, LinkBudget]:
    """The four links of the network keyed as sat_down, sat_up, cs_down, cs_up."""
    return {
        "sat_down": LinkBudget(params.p_s, params.f_s, params.sigma2_u, 2.0, FadingKind.SHADOWED_RICIAN),
        "sat_up": LinkBudget(params.p_u, params.f_s, params.sigma2_s, 2.0, FadingKind.SHADOWED_RICIAN),
        "cs_down": LinkBudget(params.p_c, params.f_c, params.sigma2_u, params.alpha, FadingKind.RAYLEIGH),
        "cs_up": LinkBudget(params.p_u, params.f_c, params.sigma2_c, params.alpha, FadingKind.RAYLEIGH),
    }


def sample_sr_power(sr: SRFadingParams, rng: Generator, size=None):
    """Draw |h|^2 from the physical Shadowed-Rician composition.

    LOS power ~ Gamma(m, Omega/m) with uniform phase, plus circularly
    symmetric Gaussian scatter with per-component variance b0.
    """
    los_power = rng.gamma(sr.m, sr.omega / sr.m, size=size)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=size)
    amplitude = np.sqrt(los_power)
    scale = math.sqrt(sr.b0)
    real = amplitude * np.cos(phase) + scale * rng.standard_normal(size=size)
    imag = amplitude * np.sin(phase) + scale * rng.standard_normal(size=size)
    return real * real + imag * imag


def sample_rayleigh_power(rng: Generator, size=None):
    return rng.exponential(1.0, size=size)


def sample_fading(kind: FadingKind, rng: Generator, size=None, sr: Optional[SRFadingParams] = None):
    if FadingKind(kind) == FadingKind.SHADOWED_RICIAN:
        if sr is None:
            raise ValueError("Shadowed-Rician sampling needs SRFadingParams")
        return sample_sr_power(sr, rng, size=size)
    return sample_rayleigh_power(rng, size=size)


__all__ = [
    "SRFadingParams",
    "GammaApprox",
    "LinkBudget",
    "gamma_approx_of_sr",
    "gamma_tight_bound_cdf",
    "gamma_bound_ccdf",
    "path_loss",
    "mean_rx_power",
    "snr",
    "link_budgets",
    "sample_sr_power",
    "sample_rayleigh_power",
    "sample_fading",
]
