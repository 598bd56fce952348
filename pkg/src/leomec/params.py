"""Scenario parameters, unit conversions and validated scenario construction.

All internal quantities are linear SI (W, Hz, m, points/m^2). The config layer
is the only place where dB, dBm, km and per-km^2 values are converted; the
unit of a config key is carried by its suffix.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .Analysis.channel import SRFadingParams
from .Analysis.numerics import QuadratureSpec
from .Core.Exception import ConfigError
from .Core.Types import CapLaw, FadingModel, ShapeRounding

logger = logging.getLogger(name="leomec.params")


def dbm_to_watts(value: float) -> float:
    return 10.0 ** ((value - 30.0) / 10.0)


def watts_to_dbm(value: float) -> float:
    return 10.0 * math.log10(value) + 30.0


def db_to_linear(value: float) -> float:
    return 10.0 ** (value / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


UNIT_SUFFIXES: Tuple[Tuple[str, Any], ...] = (
    ("_per_km2", lambda v: v * 1e-6),
    ("_dbm", dbm_to_watts),
    ("_db", db_to_linear),
    ("_ghz", lambda v: v * 1e9),
    ("_mhz", lambda v: v * 1e6),
    ("_km", lambda v: v * 1e3),
    ("_kb", lambda v: v * 1e3),
)


def to_si(key: str, value: float) -> float:
    """Convert a config value to SI according to the suffix of its key."""
    for suffix, convert in UNIT_SUFFIXES:
        if key.endswith(suffix):
            return float(convert(value))
    return float(value)


@dataclass(frozen=True)
class TaskSpec:
    service_id: int
    cycles: float
    input_bits: float
    output_bits: float
    probability: float

    def __post_init__(self):
        prefix = f"tasks.{self.service_id}"
        for name in ("cycles", "input_bits", "output_bits"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{prefix}.{name}", "must be > 0")
        if not 0.0 < self.probability <= 1.0:
            raise ConfigError(f"{prefix}.probability", "must be in (0, 1]")


@dataclass(frozen=True)
class SystemParams:
    """Every physical parameter of the network in linear SI units.

    Attributes:
        p_u, p_c, p_s: UE, cloud server and satellite transmit power, W.
        f_s, f_c: satellite and terrestrial carrier frequency, Hz.
        sigma2_u, sigma2_c, sigma2_s: noise power at UE, cloud server and satellite, W.
        alpha: terrestrial path-loss exponent.
        lambda_c, lambda_u: cloud server and UE density, points per m^2.
        bias_ratio: B_s/B_c association bias ratio.
        bandwidth: total bandwidth W, Hz.
        tau: SNR threshold, linear.
        cpu_sat, cpu_cs: computational capacity F_s, F_c in cycles per second.
        n_buf: satellite buffer capacity in jobs.
    """

    p_u: float
    p_c: float
    p_s: float
    f_s: float
    f_c: float
    sigma2_u: float
    sigma2_c: float
    sigma2_s: float
    alpha: float
    lambda_c: float
    lambda_u: float
    bias_ratio: float
    bandwidth: float
    tau: float
    sr: SRFadingParams
    tasks: Tuple[TaskSpec, ...]
    cpu_sat: float
    cpu_cs: float
    n_buf: int
    fading_model: FadingModel = FadingModel.GAMMA_BOUND
    shape_rounding: ShapeRounding = ShapeRounding.NEAREST
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        for name in (
            "p_u", "p_c", "p_s", "f_s", "f_c", "sigma2_u", "sigma2_c", "sigma2_s",
            "lambda_c", "lambda_u", "bias_ratio", "bandwidth", "tau", "cpu_sat", "cpu_cs",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(name, f"must be finite and > 0, got {value!r}")
        if not self.alpha > 2:
            raise ConfigError("alpha", f"must be > 2, got {self.alpha!r}")
        if int(self.n_buf) != self.n_buf or self.n_buf < 1:
            raise ConfigError("n_buf", f"must be an integer >= 1, got {self.n_buf!r}")
        if not self.tasks:
            raise ConfigError("tasks", "at least one task class is required")
        total = math.fsum(task.probability for task in self.tasks)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError("tasks", f"q_i sum != 1 (got {total!r})")

    def task_user_density(self, task: TaskSpec) -> float:
        return task.probability * self.lambda_u


@dataclass(frozen=True)
class ConstellationGeometry:
    r_e: float
    a_s: float
    n_sats: int
    cap_law: CapLaw = CapLaw.ARC

    def __post_init__(self):
        if not self.r_e > 0:
            raise ConfigError("constellation.earth_radius_km", "must be > 0")
        if not self.a_s > 0:
            raise ConfigError("constellation.altitude_km", "must be > 0")
        if int(self.n_sats) != self.n_sats or self.n_sats < 1:
            raise ConfigError("constellation.n_sats", f"must be an integer >= 1, got {self.n_sats!r}")

    @property
    def r_s(self) -> float:
        return self.r_e + self.a_s


def derived_sat_density(geom: ConstellationGeometry) -> float:
    """Satellite density on the orbital shell, points per m^2."""
    return geom.n_sats / (4.0 * math.pi * geom.r_s**2)


def satellite_split(n_sats: int, probabilities: Sequence[float]) -> Tuple[int, ...]:
    """Split N_s over task types by largest remainder so the counts sum to N_s."""
    quotas = [q * n_sats for q in probabilities]
    counts = [int(math.floor(x)) for x in quotas]
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: n_sats - sum(counts)]:
        counts[i] += 1
    return tuple(counts)


DEFAULT_CONFIG: Dict[str, Any] = {
    "link": {
        "p_u_dbm": 23.0,
        "p_c_dbm": 45.0,
        "p_s_dbm": 60.0,
        "f_s_ghz": 2.0,
        "f_c_ghz": 1.0,
        "sigma2_u_dbm": -98.0,
        "sigma2_c_dbm": -117.0,
        "sigma2_s_dbm": -174.0,
        "alpha": 2.7,
        "tau_db": 0.0,
        "bandwidth_mhz": 500.0,
        "bias_ratio": 200.0,
    },
    "fading": {
        "omega": 1.29,
        "b0": 0.158,
        "m": 19.4,
        "model": FadingModel.GAMMA_BOUND.value,
        "shape_rounding": ShapeRounding.NEAREST.value,
    },
    "ground": {
        "lambda_u_per_km2": 45.0,
        "lambda_c_per_km2": 1.0,
    },
    "compute": {
        "f_sat_ghz": 3.0,
        "f_cs_ghz": 10.0,
        "buffer": 2,
    },
    "constellation": {
        "altitude_km": 500.0,
        "earth_radius_km": 6371.0,
        "n_sats": 1000,
        "cap_law": CapLaw.ARC.value,
    },
    "tasks": {
        str(i): {"cycles": 1000.0, "input_kb": 0.5, "output_kb": 0.3, "probability": 0.25}
        for i in range(1, 5)
    },
    "sim": {
        "trials": 100_000,
        "seed": 20241017,
        "ground_disk_radius_km": 5.0,
        "report_ci": True,
        "chunk_size": 50_000,
        "workers": 1,
    },
    "quadrature": {
        "abs_tol": 1e-10,
        "rel_tol": 1e-8,
        "max_subdivisions": 2000,
    },
}

SCHEMA: Dict[str, Tuple[str, ...]] = {
    section: tuple(values) for section, values in DEFAULT_CONFIG.items() if section != "tasks"
}
TASK_KEYS = ("cycles", "input_kb", "output_kb", "probability")
OPTIONAL_SECTIONS = ("sim", "quadrature")


def merge_config(base: Mapping[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(dict(base))
    for key, value in update.items():
        if key == "tasks":
            merged[key] = copy.deepcopy(dict(value))
        elif isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: str = None) -> Dict[str, Any]:
    """Read a TOML scenario file and merge it over the defaults.

    A `[tasks.N]` table in the file replaces the default task set as a whole.
    """
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    file_path = Path(path)
    try:
        with file_path.open("rb") as f:
            document = tomllib.load(f)
    except FileNotFoundError as exc:
        raise ConfigError("config", f"file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from exc
    logger.debug(f"Loaded scenario file {file_path}")
    return merge_config(DEFAULT_CONFIG, document)


def _parse_override_value(text: str) -> Any:
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text.strip()


def set_config_value(raw: Mapping[str, Any], dotted_key: str, value: Any) -> Dict[str, Any]:
    """Return a copy of `raw` with `section.key` (or `tasks.N.key`) set to value."""
    parts = dotted_key.split(".")
    if len(parts) < 2 or not all(parts):
        raise ConfigError(dotted_key, "override key must look like section.key")
    updated = copy.deepcopy(dict(raw))
    node = updated
    for part in parts[:-1]:
        child = node.get(part)
        if child is None:
            child = {}
            node[part] = child
        elif not isinstance(child, dict):
            raise ConfigError(dotted_key, f"'{part}' is not a section")
        node = child
    node[parts[-1]] = value
    return updated


def apply_overrides(raw: Mapping[str, Any], overrides: Iterable[str] = ()) -> Dict[str, Any]:
    updated = copy.deepcopy(dict(raw))
    for item in overrides or ():
        key, sep, text = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(item, "override must look like section.key=value")
        updated = set_config_value(updated, key.strip(), _parse_override_value(text))
    return updated


def _number(raw: Mapping[str, Any], section: str, key: str) -> float:
    try:
        value = raw[section][key]
    except (KeyError, TypeError):
        raise ConfigError(f"{section}.{key}", "missing key") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}", f"must be numeric, got {value!r}")
    return to_si(key, value)


def _option(raw: Mapping[str, Any], section: str, key: str, enum_cls):
    try:
        return enum_cls(raw[section][key])
    except (KeyError, TypeError):
        raise ConfigError(f"{section}.{key}", "missing key") from None
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}", str(exc)) from None


def _check_known_keys(raw: Mapping[str, Any]) -> None:
    for section, values in raw.items():
        if section == "tasks":
            if not isinstance(values, Mapping):
                raise ConfigError("tasks", "must be a table of task sections")
            for name, task in values.items():
                if not isinstance(task, Mapping):
                    raise ConfigError(f"tasks.{name}", "must be a table")
                for key in task:
                    if key not in TASK_KEYS:
                        raise ConfigError(f"tasks.{name}.{key}", "unknown key")
            continue
        if section not in SCHEMA:
            raise ConfigError(section, "unknown section")
        if not isinstance(values, Mapping):
            raise ConfigError(section, "must be a table")
        for key in values:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")


def _tasks_from_config(raw: Mapping[str, Any]) -> Tuple[TaskSpec, ...]:
    sections = raw.get("tasks")
    if not sections:
        raise ConfigError("tasks", "missing key")
    tasks: List[TaskSpec] = []
    for name in sections:
        if not str(name).isdigit():
            raise ConfigError(f"tasks.{name}", "task sections must be numbered")
    for name in sorted(sections, key=int):
        table = {f"tasks.{name}": sections[name]}
        section = f"tasks.{name}"
        tasks.append(
            TaskSpec(
                service_id=int(name),
                cycles=_number(table, section, "cycles"),
                input_bits=_number(table, section, "input_kb"),
                output_bits=_number(table, section, "output_kb"),
                probability=_number(table, section, "probability"),
            )
        )
    return tuple(tasks)


def quadrature_from_config(raw: Mapping[str, Any]) -> QuadratureSpec:
    section = raw.get("quadrature") or {}
    defaults = DEFAULT_CONFIG["quadrature"]
    try:
        return QuadratureSpec(
            abs_tol=float(section.get("abs_tol", defaults["abs_tol"])),
            rel_tol=float(section.get("rel_tol", defaults["rel_tol"])),
            max_subdivisions=int(section.get("max_subdivisions", defaults["max_subdivisions"])),
        )
    except ValueError as exc:
        raise ConfigError("quadrature", str(exc)) from None


def from_config(raw: Mapping[str, Any]) -> Tuple[SystemParams, ConstellationGeometry]:
    """Build validated linear-unit parameters from a scenario document.

    Args:
        raw (Mapping): Nested mapping with the sections of `DEFAULT_CONFIG`.

    Returns:
        Tuple of `SystemParams` and `ConstellationGeometry`.

    Raises:
        ConfigError: On a missing or unknown key, a non-positive value or a
            task probability sum different from 1. The offending key is named.
    """
    _check_known_keys(raw)
    for section in SCHEMA:
        if section not in OPTIONAL_SECTIONS and section not in raw:
            raise ConfigError(section, "missing section")

    try:
        sr = SRFadingParams(
            omega=_number(raw, "fading", "omega"),
            b0=_number(raw, "fading", "b0"),
            m=_number(raw, "fading", "m"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("fading", str(exc)) from None

    n_buf = raw.get("compute", {}).get("buffer")
    if isinstance(n_buf, float) and n_buf.is_integer():
        n_buf = int(n_buf)
    if isinstance(n_buf, bool) or not isinstance(n_buf, int):
        raise ConfigError("compute.buffer", f"must be an integer, got {n_buf!r}")

    params = SystemParams(
        p_u=_number(raw, "link", "p_u_dbm"),
        p_c=_number(raw, "link", "p_c_dbm"),
        p_s=_number(raw, "link", "p_s_dbm"),
        f_s=_number(raw, "link", "f_s_ghz"),
        f_c=_number(raw, "link", "f_c_ghz"),
        sigma2_u=_number(raw, "link", "sigma2_u_dbm"),
        sigma2_c=_number(raw, "link", "sigma2_c_dbm"),
        sigma2_s=_number(raw, "link", "sigma2_s_dbm"),
        alpha=_number(raw, "link", "alpha"),
        lambda_c=_number(raw, "ground", "lambda_c_per_km2"),
        lambda_u=_number(raw, "ground", "lambda_u_per_km2"),
        bias_ratio=_number(raw, "link", "bias_ratio"),
        bandwidth=_number(raw, "link", "bandwidth_mhz"),
        tau=_number(raw, "link", "tau_db"),
        sr=sr,
        tasks=_tasks_from_config(raw),
        cpu_sat=_number(raw, "compute", "f_sat_ghz"),
        cpu_cs=_number(raw, "compute", "f_cs_ghz"),
        n_buf=n_buf,
        fading_model=_option(raw, "fading", "model", FadingModel),
        shape_rounding=_option(raw, "fading", "shape_rounding", ShapeRounding),
        quadrature=quadrature_from_config(raw),
    )

    n_sats = raw.get("constellation", {}).get("n_sats")
    if isinstance(n_sats, float) and n_sats.is_integer():
        n_sats = int(n_sats)
    if isinstance(n_sats, bool) or not isinstance(n_sats, int):
        raise ConfigError("constellation.n_sats", f"must be an integer, got {n_sats!r}")
    geom = ConstellationGeometry(
        r_e=_number(raw, "constellation", "earth_radius_km"),
        a_s=_number(raw, "constellation", "altitude_km"),
        n_sats=n_sats,
        cap_law=_option(raw, "constellation", "cap_law", CapLaw),
    )
    return params, geom


__all__ = [
    "DEFAULT_CONFIG",
    "TaskSpec",
    "SystemParams",
    "ConstellationGeometry",
    "dbm_to_watts",
    "watts_to_dbm",
    "db_to_linear",
    "linear_to_db",
    "to_si",
    "derived_sat_density",
    "satellite_split",
    "load_config",
    "merge_config",
    "apply_overrides",
    "set_config_value",
    "from_config",
    "quadrature_from_config",
]
