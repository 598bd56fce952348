"""Monte Carlo oracle for association and coverage.

Trials run in fixed-size chunks. Chunk k of task i draws from its own stream
`SeedSequence(seed, spawn_key=(i, k))` and chunks are reduced in chunk order,
so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.random import Generator, SeedSequence
from scipy import stats

from ..Analysis.association import sat_wins
from ..Analysis.channel import link_budgets, sample_fading, snr
from ..Analysis.geometry import horizon
from ..Analysis.numerics import wilson_interval
from ..Core.Exception import ConfigError, SimulationError
from ..Core.Types import FadingKind, Tier

logger = logging.getLogger(name="leomec.montecarlo")

MAX_REDRAWS = 10
DISK_VOID_BOUND = 1e-12
DUMP_COLUMNS = (
    "trial",
    "tier",
    "d_sat",
    "d_cs",
    "snr_sat_down",
    "snr_sat_up",
    "snr_cs_down",
    "snr_cs_up",
    "covered_down",
    "covered_up",
)


@dataclass(frozen=True)
class SimConfig:
    trials: int = 100_000
    seed: int = 20241017
    ground_disk_radius: float = 5e3
    report_ci: bool = True
    chunk_size: int = 50_000
    workers: int = 1

    def __post_init__(self):
        for name in ("trials", "chunk_size", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"sim.{name}", f"must be an integer >= 1, got {value!r}")
        if not self.ground_disk_radius > 0:
            raise ConfigError("sim.ground_disk_radius_km", "must be > 0")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("sim.seed", f"must be a non-negative integer, got {self.seed!r}")

    def check_disk(self, lambda_c: float) -> None:
        """The disk must hold at least one cloud server except with negligible probability."""
        void = math.exp(-lambda_c * math.pi * self.ground_disk_radius**2)
        if not void < DISK_VOID_BOUND:
            raise ConfigError(
                "sim.ground_disk_radius_km",
                f"empty-disk probability {void:.3g} is not below {DISK_VOID_BOUND:g}; enlarge the disk",
            )

    @property
    def chunks(self) -> List[int]:
        full, rest = divmod(self.trials, self.chunk_size)
        return [self.chunk_size] * full + ([rest] if rest else [])


def sim_config_from(raw: Mapping) -> SimConfig:
    section = dict(raw.get("sim") or {})
    try:
        return SimConfig(
            trials=int(section.get("trials", SimConfig.trials)),
            seed=int(section.get("seed", SimConfig.seed)),
            ground_disk_radius=float(section.get("ground_disk_radius_km", SimConfig.ground_disk_radius / 1e3)) * 1e3,
            report_ci=bool(section.get("report_ci", SimConfig.report_ci)),
            chunk_size=int(section.get("chunk_size", SimConfig.chunk_size)),
            workers=int(section.get("workers", SimConfig.workers)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("sim", str(exc)) from None


@dataclass(frozen=True)
class TrialOutcome:
    assoc_tier: Tier
    covered_up: bool
    covered_down: bool
    d_sat: float
    d_cs: float
    snr_up: float
    snr_down: float


@dataclass
class TrialBatch:
    """Counts accumulated over a set of trials of one task class."""

    trials: int = 0
    redraws: int = 0
    visible: int = 0
    sat_assoc: int = 0
    cov_su_down: int = 0
    cov_us_up: int = 0
    cov_cu_down: int = 0
    cov_uc_up: int = 0
    covered_down: int = 0
    covered_up: int = 0
    records: Optional[Dict[str, np.ndarray]] = field(default=None, repr=False)

    def merge(self, other: "TrialBatch") -> "TrialBatch":
        merged = TrialBatch()
        for f in fields(self):
            if f.name != "records":
                setattr(merged, f.name, getattr(self, f.name) + getattr(other, f.name))
        if self.records is not None or other.records is not None:
            parts = [r for r in (self.records, other.records) if r is not None]
            merged.records = {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}
        return merged


@dataclass(frozen=True)
class Estimate:
    mean: float
    halfwidth: float
    lower: float
    upper: float
    n: int


def _z_value(confidence: float) -> float:
    return float(stats.norm.ppf(0.5 + confidence / 2.0))


def estimate_proportion(successes: int, n: int, confidence: float = 0.95) -> Estimate:
    """Sample proportion with its Wilson score interval."""
    _, half, lower, upper = wilson_interval(successes, n, _z_value(confidence))
    return Estimate(mean=successes / n, halfwidth=half, lower=max(0.0, lower), upper=min(1.0, upper), n=n)


def estimate(samples: Sequence[float], binomial: bool = False, confidence: float = 0.95) -> Estimate:
    """Mean and confidence interval of a metric over trials.

    Binomial metrics use the Wilson interval, others the normal approximation.
    """
    values = np.asarray(samples, dtype=float)
    n = int(values.size)
    if n == 0:
        raise ValueError("estimate needs at least one sample")
    if binomial:
        return estimate_proportion(int(np.count_nonzero(values)), n, confidence)
    if n < 30:
        logger.warning(f"Normal confidence interval from only {n} samples")
    mean = float(values.mean())
    half = _z_value(confidence) * float(values.std(ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return Estimate(mean=mean, halfwidth=half, lower=mean - half, upper=mean + half, n=n)


def summarize(batch: TrialBatch, confidence: float = 0.95) -> Dict[str, Estimate]:
    """Empirical association and coverage frequencies of a batch."""
    n = batch.trials
    return {
        "a_sat": estimate_proportion(batch.sat_assoc, n, confidence),
        "a_cs": estimate_proportion(n - batch.sat_assoc, n, confidence),
        "p_su_down": estimate_proportion(batch.cov_su_down, n, confidence),
        "p_us_up": estimate_proportion(batch.cov_us_up, n, confidence),
        "p_cu_down": estimate_proportion(batch.cov_cu_down, n, confidence),
        "p_uc_up": estimate_proportion(batch.cov_uc_up, n, confidence),
        "cov_down": estimate_proportion(batch.covered_down, n, confidence),
        "cov_up": estimate_proportion(batch.covered_up, n, confidence),
    }


def sample_constellation(
    n_sats: int,
    geom,
    rng: Generator,
    probabilities: Sequence[float] = (1.0,),
    split: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """N_s points uniform on the orbital sphere with service-type labels.

    Labels are i.i.d. with probabilities q_i, or follow the deterministic
    per-type counts in `split` when given.

    Returns:
        Tuple of (N_s, 3) cartesian positions in m and (N_s,) zero-based labels.
    """
    if n_sats < 1:
        raise ValueError("n_sats must be >= 1")
    z = rng.uniform(-geom.r_s, geom.r_s, size=n_sats)
    azimuth = rng.uniform(0.0, 2.0 * np.pi, size=n_sats)
    rho = np.sqrt(np.clip(geom.r_s**2 - z * z, 0.0, None))
    positions = np.column_stack((rho * np.cos(azimuth), rho * np.sin(azimuth), z))
    if split is not None:
        if sum(split) != n_sats:
            raise ValueError(f"split {list(split)} does not sum to {n_sats}")
        labels = np.repeat(np.arange(len(split)), split)
    else:
        labels = rng.choice(len(probabilities), size=n_sats, p=np.asarray(probabilities, dtype=float))
    return positions, labels


def sample_ground_ppp(lam: float, radius: float, rng: Generator) -> np.ndarray:
    """Poisson points of density lam on the disk of given radius around the origin."""
    if not (lam > 0 and radius > 0):
        raise ValueError("lam and radius must be > 0")
    count = rng.poisson(lam * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(count))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return np.column_stack((r * np.cos(angle), r * np.sin(angle)))


def _link_snrs(params, rng: Generator, d_sat: np.ndarray, d_cs: np.ndarray, size):
    links = link_budgets(params)
    h_sat_down = sample_fading(FadingKind.SHADOWED_RICIAN, rng, size, params.sr)
    h_sat_up = sample_fading(FadingKind.SHADOWED_RICIAN, rng, size, params.sr)
    h_cs_down = sample_fading(FadingKind.RAYLEIGH, rng, size)
    h_cs_up = sample_fading(FadingKind.RAYLEIGH, rng, size)
    return (
        snr(links["sat_down"], d_sat, h_sat_down),
        snr(links["sat_up"], d_sat, h_sat_up),
        snr(links["cs_down"], d_cs, h_cs_down),
        snr(links["cs_up"], d_cs, h_cs_up),
    )


def run_trial(params, geom, rng: Generator, p_ofld: Sequence[float], task_index: int = 0,
              sim: SimConfig = SimConfig(), split: Optional[Sequence[int]] = None) -> TrialOutcome:
    """One trial from explicit point patterns, for the typical UE at (0, 0, r_e).

    Raises:
        SimulationError: If neither an offloadable satellite nor a cloud server
            is found after MAX_REDRAWS redraws.
    """
    probabilities = [task.probability for task in params.tasks]
    for redraw in range(MAX_REDRAWS + 1):
        positions, labels = sample_constellation(geom.n_sats, geom, rng, probabilities, split)
        offloadable = rng.random(geom.n_sats) < np.asarray(p_ofld, dtype=float)[labels]
        candidates = positions[(labels == task_index) & offloadable & (positions[:, 2] >= geom.r_e)]
        ground = sample_ground_ppp(params.lambda_c, sim.ground_disk_radius, rng)
        if len(candidates) or len(ground):
            break
        logger.warning(f"Trial redrawn ({redraw + 1}): no visible satellite and empty ground disk")
    else:
        raise SimulationError(MAX_REDRAWS)

    ue = np.array([0.0, 0.0, geom.r_e])
    d_sat = float(np.min(np.linalg.norm(candidates - ue, axis=1))) if len(candidates) else math.nan
    d_cs = float(np.min(np.hypot(ground[:, 0], ground[:, 1]))) if len(ground) else math.inf
    visible = not math.isnan(d_sat)
    sat_tier = visible and bool(sat_wins(d_sat, d_cs, params))

    snr_sd, snr_su, snr_cd, snr_cu = _link_snrs(
        params, rng, np.array([d_sat if visible else geom.a_s]), np.array([d_cs if math.isfinite(d_cs) else 1.0]), 1
    )
    if sat_tier:
        snr_down, snr_up = float(snr_sd[0]), float(snr_su[0])
    else:
        snr_down, snr_up = float(snr_cd[0]), float(snr_cu[0])
    return TrialOutcome(
        assoc_tier=Tier.SAT if sat_tier else Tier.CS,
        covered_up=snr_up >= params.tau,
        covered_down=snr_down >= params.tau,
        d_sat=d_sat,
        d_cs=d_cs,
        snr_up=snr_up,
        snr_down=snr_down,
    )


def _nearest_sat(n_type: int, p_ofld: float, geom, rng: Generator, size: int):
    """Nearest offloadable type-i satellite by its cap-area order statistic.

    The cap fraction of one uniform satellite is uniform on [0, 1], so the
    minimum over n of them is 1 - V^(1/n).
    """
    counts = rng.binomial(n_type, p_ofld, size=size)
    v = rng.random(size)
    with np.errstate(divide="ignore"):
        u_min = -np.expm1(np.log(v) / np.maximum(counts, 1))
    horizon_fraction = 0.5 * (1.0 - geom.r_e / geom.r_s)
    visible = (counts > 0) & (u_min <= horizon_fraction)
    distance = np.sqrt(geom.a_s**2 + 4.0 * geom.r_e * geom.r_s * u_min)
    return visible, distance


def _nearest_cs(lambda_c: float, radius: float, rng: Generator, size: int):
    counts = rng.poisson(lambda_c * math.pi * radius * radius, size=size)
    v = rng.random(size)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = radius * np.sqrt(-np.expm1(np.log(v) / np.maximum(counts, 1)))
    return counts > 0, np.where(counts > 0, r, np.inf)


def simulate_chunk(params, geom, n_type: int, p_ofld: float, size: int, rng: Generator,
                   sim: SimConfig, dump: bool = False) -> TrialBatch:
    visible, d_sat = _nearest_sat(n_type, p_ofld, geom, rng, size)
    has_cs, d_cs = _nearest_cs(params.lambda_c, sim.ground_disk_radius, rng, size)

    redraws = 0
    stuck = ~visible & ~has_cs
    rounds = 0
    while np.any(stuck):
        rounds += 1
        if rounds > MAX_REDRAWS:
            raise SimulationError(rounds - 1)
        k = int(np.count_nonzero(stuck))
        redraws += k
        visible[stuck], d_sat[stuck] = _nearest_sat(n_type, p_ofld, geom, rng, k)
        has_cs[stuck], d_cs[stuck] = _nearest_cs(params.lambda_c, sim.ground_disk_radius, rng, k)
        stuck = ~visible & ~has_cs
    if redraws:
        logger.warning(f"Redrew {redraws} trials with no visible satellite and an empty ground disk")

    d_sat_safe = np.where(visible, d_sat, geom.a_s)
    d_cs_safe = np.where(has_cs, d_cs, 1.0)
    snr_sd, snr_su, snr_cd, snr_cu = _link_snrs(params, rng, d_sat_safe, d_cs_safe, size)
    tau = params.tau
    su_down = visible & (snr_sd >= tau)
    us_up = visible & (snr_su >= tau)
    cu_down = has_cs & (snr_cd >= tau)
    uc_up = has_cs & (snr_cu >= tau)
    sat_tier = visible & sat_wins(d_sat_safe, d_cs, params)
    covered_down = np.where(sat_tier, su_down, cu_down)
    covered_up = np.where(sat_tier, us_up, uc_up)

    batch = TrialBatch(
        trials=size,
        redraws=redraws,
        visible=int(np.count_nonzero(visible)),
        sat_assoc=int(np.count_nonzero(sat_tier)),
        cov_su_down=int(np.count_nonzero(su_down)),
        cov_us_up=int(np.count_nonzero(us_up)),
        cov_cu_down=int(np.count_nonzero(cu_down)),
        cov_uc_up=int(np.count_nonzero(uc_up)),
        covered_down=int(np.count_nonzero(covered_down)),
        covered_up=int(np.count_nonzero(covered_up)),
    )
    if dump:
        batch.records = {
            "tier": np.where(sat_tier, Tier.SAT.value, Tier.CS.value),
            "d_sat": np.where(visible, d_sat, np.nan),
            "d_cs": d_cs,
            "snr_sat_down": np.where(visible, snr_sd, 0.0),
            "snr_sat_up": np.where(visible, snr_su, 0.0),
            "snr_cs_down": np.where(has_cs, snr_cd, 0.0),
            "snr_cs_up": np.where(has_cs, snr_cu, 0.0),
            "covered_down": covered_down.astype(int),
            "covered_up": covered_up.astype(int),
        }
    return batch


def chunk_generator(seed: int, task_index: int, chunk_index: int) -> Generator:
    return np.random.default_rng(SeedSequence(seed, spawn_key=(task_index, chunk_index)))


def simulate_task(params, geom, n_type: int, p_ofld: float, sim: SimConfig,
                  task_index: int = 0, dump: bool = False) -> TrialBatch:
    """Run `sim.trials` trials for one task class.

    Args:
        params (SystemParams): Scenario parameters.
        geom (ConstellationGeometry): Constellation geometry.
        n_type (int): Number of satellites caching this service.
        p_ofld (float): Offloadability of each of them, from the analytic fixed point.
        sim (SimConfig): Trial count, seed, disk radius, chunking and workers.
        task_index (int): Stream key of the task class.
        dump (bool): Keep per-trial records.

    Returns:
        TrialBatch: Counts reduced in chunk order.
    """
    sim.check_disk(params.lambda_c)
    sizes = sim.chunks

    def work(item):
        index, size = item
        rng = chunk_generator(sim.seed, task_index, index)
        return simulate_chunk(params, geom, n_type, p_ofld, size, rng, sim, dump)

    if sim.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=sim.workers) as executor:
            parts = list(executor.map(work, enumerate(sizes)))
    else:
        parts = [work(item) for item in enumerate(sizes)]

    total = TrialBatch()
    for part in parts:
        total = total.merge(part)
    logger.debug(f"Task {task_index}: {total.trials} trials, {total.redraws} redraws")
    return total


def dump_rows(batch: TrialBatch, service_id: int) -> List[list]:
    """Per-trial records in `DUMP_COLUMNS` order, prefixed by the service id."""
    if batch.records is None:
        return []
    records = batch.records
    rows = []
    for i in range(batch.trials):
        rows.append([service_id, i] + [records[name][i] for name in DUMP_COLUMNS[1:]])
    return rows


__all__ = [
    "MAX_REDRAWS",
    "DUMP_COLUMNS",
    "SimConfig",
    "sim_config_from",
    "TrialOutcome",
    "TrialBatch",
    "Estimate",
    "estimate",
    "estimate_proportion",
    "summarize",
    "sample_constellation",
    "sample_ground_ppp",
    "run_trial",
    "simulate_chunk",
    "chunk_generator",
    "simulate_task",
    "dump_rows",
]
