from enum import Enum
from typing import Optional, Union


class FadingKind(str, Enum):
    SHADOWED_RICIAN = "shadowed_rician"
    RAYLEIGH = "rayleigh"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


class Tier(str, Enum):
    SAT = "sat"
    CS = "cs"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


class CapLaw(str, Enum):
    """How the visible spherical cap is measured.

    ARC: probability of a satellite inside polar angle phi is phi/pi.
    AREA: probability is the cap area fraction (1 - cos phi)/2, the exact
        law of area-uniform satellites.
    """

    ARC = "arc"
    AREA = "area"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


class FadingModel(str, Enum):
    GAMMA_BOUND = "gamma-bound"
    EXACT_SERIES = "exact-series"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


class ShapeRounding(str, Enum):
    NEAREST = "nearest"
    FLOOR = "floor"
    CEIL = "ceil"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


class NetworkMode(str, Enum):
    INTEGRATED = "integrated"
    CS_ONLY = "cs-only"
    SAT_ONLY = "sat-only"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


class RunMode(str, Enum):
    ANALYTIC = "analytic"
    SIMULATE = "simulate"
    COMPARE = "compare"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


class SweepVariable(str, Enum):
    """Sweepable scenario keys, named after their config keys."""

    N_SATS = "n_sats"
    ALTITUDE = "altitude_km"
    LAMBDA_U = "lambda_u_per_km2"
    TAU = "tau_db"
    BIAS_RATIO = "bias_ratio"

    @classmethod
    def _missing_(cls, value):
        aliases = {"n_s": "n_sats", "a_s": "altitude_km", "lambda_u": "lambda_u_per_km2", "tau": "tau_db"}
        value = aliases.get(str(value).lower(), value)
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )

    @property
    def config_key(self) -> str:
        return SWEEP_CONFIG_KEYS[self]


SWEEP_CONFIG_KEYS = {
    SweepVariable.N_SATS: "constellation.n_sats",
    SweepVariable.ALTITUDE: "constellation.altitude_km",
    SweepVariable.LAMBDA_U: "ground.lambda_u_per_km2",
    SweepVariable.TAU: "link.tau_db",
    SweepVariable.BIAS_RATIO: "link.bias_ratio",
}


class FixedPointMethod(str, Enum):
    DAMPED = "damped"
    BISECT = "bisect"

    @classmethod
    def _missing_(cls, value):
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(
            f"{value} is not a valid {cls.__name__}, must be one of {', '.join([m.value for m in cls])}"
        )


NetworkModeType = Optional[Union[str, NetworkMode]]


def normalize_network_mode(mode: NetworkModeType) -> NetworkMode:
    if mode is None:
        return NetworkMode.INTEGRATED
    if isinstance(mode, NetworkMode):
        return mode
    mode = mode.strip()
    if not mode:
        return NetworkMode.INTEGRATED
    return NetworkMode(mode)


def normalize_sweep_values(values) -> list:
    """Parse a comma separated string or sequence into a strictly increasing float list."""
    if isinstance(values, str):
        items = [item.strip() for item in values.split(",") if item.strip()]
    else:
        items = list(values or [])
    if not items:
        raise ValueError("sweep values must not be empty")
    try:
        parsed = [float(item) for item in items]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"sweep values must be numeric, got {items}") from exc
    for left, right in zip(parsed, parsed[1:]):
        if not right > left:
            raise ValueError(f"sweep values must be strictly increasing, got {parsed}")
    return parsed
