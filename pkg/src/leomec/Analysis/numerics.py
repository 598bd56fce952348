"""Quadrature and special functions shared by the analytical modules."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate as _integrate
from scipy import special

from ..Core.Exception import QuadratureError

logger = logging.getLogger(name="leomec.numerics")


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be an integer >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of f over [a, b].

    `b` may be `math.inf`; QUADPACK maps the half line onto a finite interval.
    Integrable endpoint singularities are handled by the extrapolating
    subdivision of QUADPACK.

    Args:
        f (Callable): Integrand, finite on the open interval.
        a (float): Lower limit.
        b (float): Upper limit, `a < b`.
        spec (QuadratureSpec): Tolerances and subdivision limit.
        points (Sequence[float], optional): Interior breakpoints. Ignored for infinite `b`.

    Returns:
        float: The integral estimate.

    Raises:
        ValueError: If `a >= b`.
        QuadratureError: If the reported error exceeds max(abs_tol, rel_tol*|result|).
    """
    if not a < b:
        raise ValueError(f"integration limits must satisfy a < b, got a={a!r}, b={b!r}")
    kwargs = dict(
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    if points is not None and math.isfinite(b):
        inner = sorted(p for p in points if a < p < b)
        if inner:
            kwargs["points"] = inner
    result = _integrate.quad(f, a, b, **kwargs)
    value, error = float(result[0]), float(result[1])
    if len(result) > 3:
        target = max(spec.abs_tol, spec.rel_tol * abs(value))
        if not error <= target:
            raise QuadratureError(value, error, f"{result[3]} (estimate {value!r}, error {error!r})")
        logger.debug(f"Quadrature on [{a}, {b}] flagged '{result[3]}' but met tolerance")
    return value


def lower_incomplete_gamma(s: float, x: ArrayLike):
    """Lower incomplete gamma function Υ(s, x) = ∫_0^x t^(s-1) e^(-t) dt."""
    if not s > 0:
        raise ValueError(f"lower_incomplete_gamma requires s > 0, got {s!r}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or np.any(np.isnan(x_arr)):
        raise ValueError("lower_incomplete_gamma requires x >= 0")
    value = special.gammainc(s, x_arr) * special.gamma(s)
    return float(value) if value.ndim == 0 else value


def regularized_lower_gamma(s: float, x: ArrayLike):
    """Υ(s, x)/Γ(s), the Gamma(s, 1) CDF."""
    value = special.gammainc(s, np.asarray(x, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def sr_power_cdf(t: ArrayLike, sr, trunc_tol: float = 1e-12, max_terms: int = 10_000):
    """CDF of the squared Shadowed-Rician fading power.

    Evaluates
        K^m Σ_z (m)_z / (z! Γ(z+1)) (Ω/(2b0 m + Ω))^z Υ(z+1, t/(2b0)),
    with K = 2 b0 m/(2 b0 m + Ω), as K^m Σ_z [(m)_z/z!] r^z P(z+1, t/(2b0))
    where P is the regularized lower gamma function. Summation stops once the
    current term is below trunc_tol times the running sum and z > m.
    """
    if not trunc_tol > 0:
        raise ValueError("trunc_tol must be > 0")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("sr_power_cdf requires t >= 0")
    denom = 2.0 * sr.b0 * sr.m + sr.omega
    log_k = sr.m * math.log(2.0 * sr.b0 * sr.m / denom)
    log_r = math.log(sr.omega / denom)
    y = t_arr / (2.0 * sr.b0)

    total = np.zeros_like(y)
    log_coef = 0.0
    z = 0
    while True:
        term = math.exp(log_k + log_coef + z * log_r) * special.gammainc(z + 1.0, y)
        total = total + term
        if z > sr.m and np.all(term <= trunc_tol * total):
            break
        if z >= max_terms:
            logger.warning(f"SR series stopped at the term cap {max_terms}")
            break
        log_coef += math.log(sr.m + z) - math.log(z + 1.0)
        z += 1
    logger.debug(f"SR series truncated after {z + 1} terms")
    value = np.clip(total, 0.0, 1.0)
    return float(value) if value.ndim == 0 else value


def wilson_interval(successes: int, n: int, z: float):
    """Wilson score interval (center, halfwidth, lower, upper) for a binomial proportion."""
    if n <= 0:
        raise ValueError("wilson_interval requires n >= 1")
    p_hat = successes / n
    denom = 1.0 + z * z / n
    center = (p_hat + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n)) / denom
    return center, half, center - half, center + half


def as_output(value: NDArray) -> float | NDArray:
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "integrate",
    "lower_incomplete_gamma",
    "regularized_lower_gamma",
    "sr_power_cdf",
    "wilson_interval",
    "as_output",
]
