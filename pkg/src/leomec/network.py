import asyncio
import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import aiofiles
import aiofiles.os

from .Analysis.association import AssociationResult, associate, assoc_prob_sat, q_s_constant
from .Analysis.coverage import (
    CoverageResult,
    cov_down_cs,
    cov_down_sat,
    cov_up_cs,
    cov_up_sat,
    total_cov,
    uplink_sat_success,
)
from .Analysis.queueing import (
    DelayBreakdown,
    FixedPoint,
    QueueInputs,
    TierLoad,
    average_delay,
    cs_response_time,
    mean_loads,
    sat_response_time,
    solve_offload_fixed_point,
    transmission_times,
)
from .Core.Exception import ConfigError, NumericalError, UnserviceableLinkError, run_async, status_for
from .Core.Types import (
    FixedPointMethod,
    NetworkMode,
    NetworkModeType,
    RunMode,
    SweepVariable,
    normalize_network_mode,
    normalize_sweep_values,
)
from .Simulation.montecarlo import (
    DUMP_COLUMNS,
    SimConfig,
    dump_rows,
    sim_config_from,
    simulate_task,
    summarize,
)
from .params import (
    DEFAULT_CONFIG,
    ConstellationGeometry,
    SystemParams,
    TaskSpec,
    apply_overrides,
    from_config,
    load_config,
    merge_config,
    satellite_split,
    set_config_value,
)
from .presets import resolve_preset

logger = logging.getLogger(name="leomec.network")

DEFAULT_N_SATS_GRID = (200, 500, 800, 1000, 1500, 2000, 2500)
SATELLITE_LOAD_NOTE = (
    "known result of the load model: each satellite shares W among 1 + 1.28 lambda_u A_s / lambda_s users, "
    "so the satellite tier is bandwidth-starved and its delays exceed the cloud-only network"
)
SIM_METRICS = ("a_sat", "p_su_down", "p_cu_down", "p_us_up", "p_uc_up")
ECHO_COLUMNS = [
    "point",
    "network_mode",
    "service_id",
    "altitude_km",
    "n_sats",
    "lambda_u_per_km2",
    "tau_db",
    "bias_ratio",
    "cap_law",
    "fading_model",
    "shape_rounding",
]
ANALYTIC_COLUMNS = [
    "n_type",
    "n_offloadable",
    "p_ofld",
    "a_sat",
    "a_cs",
    "p_su_down",
    "p_cu_down",
    "p_us_up",
    "p_uc_up",
    "mean_ues_sat",
    "mean_ues_cs",
    "w_sat",
    "w_cs",
    "rho_sat",
    "t_up_cs",
    "t_down_cs",
    "t_up_sat",
    "t_down_sat",
    "t_resp_cs",
    "t_resp_sat",
    "t_avg",
    "t_avg_system",
    "total_cov_down",
    "total_cov_up",
]
SIM_COLUMNS = ["trials", "seed", "redraws"] + [
    name for metric in SIM_METRICS for name in (f"sim_{metric}", f"sim_{metric}_ci")
] + ["sim_t_avg", "sim_t_avg_system"]
GAP_COLUMNS = [f"gap_{metric}" for metric in SIM_METRICS] + ["gap_t_avg"]

COLUMNS = {
    RunMode.ANALYTIC: ECHO_COLUMNS + ANALYTIC_COLUMNS + ["status"],
    RunMode.SIMULATE: ECHO_COLUMNS + ["n_type", "n_offloadable", "p_ofld"] + SIM_COLUMNS + ["status"],
    RunMode.COMPARE: ECHO_COLUMNS + ANALYTIC_COLUMNS + SIM_COLUMNS + GAP_COLUMNS + ["status"],
}


@dataclass(frozen=True)
class TaskEvaluation:
    task: TaskSpec
    n_type: int
    fixed_point: FixedPoint
    association: AssociationResult
    coverage: CoverageResult
    loads: Optional[TierLoad] = None
    queue: Optional[QueueInputs] = None
    delay: Optional[DelayBreakdown] = None
    status: str = "ok"


@dataclass(frozen=True)
class ScenarioResult:
    mode: NetworkMode
    tasks: Tuple[TaskEvaluation, ...]
    t_avg: float
    total_cov_down: float
    total_cov_up: float
    status: str = "ok"


@dataclass(frozen=True)
class SweepSpec:
    """A sweep over one scenario variable, optionally crossed with a series variable.

    Points are evaluated in (series value, value) order.
    """

    variable: SweepVariable
    values: Tuple[float, ...]
    mode: RunMode = RunMode.ANALYTIC
    output_path: Optional[str] = None
    series: Optional[SweepVariable] = None
    series_values: Tuple[float, ...] = ()
    network_mode: NetworkMode = NetworkMode.INTEGRATED

    def __post_init__(self):
        try:
            object.__setattr__(self, "variable", SweepVariable(self.variable))
            object.__setattr__(self, "values", tuple(normalize_sweep_values(self.values)))
            object.__setattr__(self, "mode", RunMode(self.mode))
            object.__setattr__(self, "network_mode", normalize_network_mode(self.network_mode))
        except ValueError as exc:
            raise ConfigError("sweep", str(exc)) from None
        if self.series is not None:
            try:
                object.__setattr__(self, "series", SweepVariable(self.series))
                object.__setattr__(self, "series_values", tuple(normalize_sweep_values(self.series_values)))
            except ValueError as exc:
                raise ConfigError("series", str(exc)) from None
            if self.series == self.variable:
                raise ConfigError("series", "series variable must differ from the sweep variable")

    def points(self) -> List[Tuple[str, Dict[str, float]]]:
        series = [(None, None)] if self.series is None else [(self.series, v) for v in self.series_values]
        points = []
        for series_var, series_value in series:
            for value in self.values:
                assignments = {}
                if series_var is not None:
                    assignments[series_var.config_key] = series_value
                assignments[self.variable.config_key] = value
                label = ";".join(f"{key.split('.')[-1]}={_format(v)}" for key, v in assignments.items())
                points.append((label, assignments))
        return points


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _sat_stage(task: TaskSpec, n_type: int, params: SystemParams, geom: ConstellationGeometry,
               mode: NetworkMode, conditional: float, method: FixedPointMethod):
    """Fixed point, association and satellite coverage of one task class."""
    tau = params.tau
    shell_area = 4.0 * math.pi * geom.r_s**2
    sat_density = n_type / shell_area
    mu_sat = params.cpu_sat / task.cycles
    users = params.task_user_density(task)

    def uplink(n: float) -> float:
        return cov_up_sat(tau, n, params, geom, conditional)

    def response(n: float) -> Tuple[float, float]:
        a_sat = 1.0 if mode == NetworkMode.SAT_ONLY else assoc_prob_sat(n, params, geom)
        return a_sat, a_sat * users * uplink(n) / sat_density / mu_sat

    q_s = q_s_constant(params, geom)
    if n_type <= 0:
        fixed_point = FixedPoint(n_offloadable=0.0, p_ofld=1.0, a_sat=0.0, iterations=0)
    elif mode == NetworkMode.CS_ONLY:
        fixed_point = FixedPoint(n_offloadable=float(n_type), p_ofld=1.0, a_sat=0.0, iterations=0)
    else:
        fixed_point = solve_offload_fixed_point(n_type, response, params.n_buf, method)
    n_i = fixed_point.n_offloadable

    if mode == NetworkMode.SAT_ONLY:
        association = AssociationResult(a_sat=1.0, a_cs=0.0, q_s_factor=q_s, n_offloadable=n_i)
    elif mode == NetworkMode.CS_ONLY or n_type <= 0:
        association = AssociationResult(a_sat=0.0, a_cs=1.0, q_s_factor=q_s, n_offloadable=n_i)
    else:
        association = associate(n_i, params, geom)
    return fixed_point, association, cov_down_sat(tau, n_i, params, geom), uplink(n_i)


def synthesize_delays(params: SystemParams, geom: ConstellationGeometry,
                      entries: Sequence[Tuple[TaskSpec, int, float, float, CoverageResult]]):
    """Loads, queues and delay breakdown per task from association and coverage.

    Args:
        params (SystemParams): Scenario parameters.
        geom (ConstellationGeometry): Constellation geometry.
        entries (Sequence): (task, n_type, a_sat, a_cs, coverage) per task class.

    Returns:
        List of (TierLoad, QueueInputs, DelayBreakdown, status) per task; the
        last three are None where the task failed, with the failure in status.
    """
    shell_area = 4.0 * math.pi * geom.r_s**2
    out: List[list] = []
    for task, n_type, a_sat, a_cs, coverage in entries:
        try:
            if a_sat > 0.0 and n_type <= 0:
                raise UnserviceableLinkError("su_down", params.tau)
            sat_density = n_type / shell_area
            loads = mean_loads(task, a_sat, a_cs, params, sat_density)
            users = params.task_user_density(task)
            lambda_sat = a_sat * users * coverage.p_us_up / sat_density if a_sat > 0.0 else 0.0
            mu_sat = params.cpu_sat / task.cycles
            queue = QueueInputs(
                lambda_sat=lambda_sat,
                lambda_cs_per_task=a_cs * users * coverage.p_uc_up / params.lambda_c,
                mu_sat=mu_sat,
                mu_cs=params.cpu_cs / task.cycles,
                rho_sat=lambda_sat / mu_sat,
                buffer=params.n_buf,
            )
            out.append([loads, queue, None, "ok"])
        except NumericalError as exc:
            out.append([None, None, None, status_for(exc)])

    live = [i for i, item in enumerate(out) if item[1] is not None]
    try:
        cs_times = dict(zip(live, cs_response_time([out[i][1] for i in live])))
    except NumericalError as exc:
        for i in live:
            out[i][3] = status_for(exc)
        return [tuple(item) for item in out]

    for i in live:
        task, _, a_sat, a_cs, coverage = entries[i]
        loads, queue = out[i][0], out[i][1]
        try:
            times = transmission_times(task, coverage, loads, params, a_sat=a_sat, a_cs=a_cs)
            t_resp_sat = sat_response_time(queue) if a_sat > 0.0 else 0.0
            out[i][2] = average_delay(a_sat, a_cs, times, cs_times[i], t_resp_sat)
        except NumericalError as exc:
            out[i][3] = status_for(exc)
    return [tuple(item) for item in out]


def evaluate_scenario(params: SystemParams, geom: ConstellationGeometry, mode: NetworkModeType = None,
                      method: FixedPointMethod = FixedPointMethod.DAMPED) -> ScenarioResult:
    """Full analytic pipeline for one scenario point.

    Order: fixed point, association, coverage, loads, transmission times,
    response times, delay. Identical task classes are evaluated once.
    """
    mode = normalize_network_mode(mode)
    tau = params.tau
    split = satellite_split(geom.n_sats, [task.probability for task in params.tasks])
    p_cu_down = cov_down_cs(tau, params)
    p_uc_up = cov_up_cs(tau, params)
    conditional = uplink_sat_success(tau, params, geom) if any(split) else 0.0

    cache: Dict[tuple, tuple] = {}
    stages = []
    for task, n_type in zip(params.tasks, split):
        key = (n_type, task.cycles, task.input_bits, task.output_bits, task.probability)
        if key not in cache:
            cache[key] = _sat_stage(task, n_type, params, geom, mode, conditional, FixedPointMethod(method))
        stages.append(cache[key])

    coverages = []
    for (_, association, p_su_down, p_us_up) in stages:
        coverages.append(
            CoverageResult(
                p_su_down=p_su_down,
                p_cu_down=p_cu_down,
                p_us_up=p_us_up,
                p_uc_up=p_uc_up,
                total_down=association.a_sat * p_su_down + association.a_cs * p_cu_down,
                total_up=association.a_sat * p_us_up + association.a_cs * p_uc_up,
                tau=tau,
            )
        )

    entries = [
        (task, n_type, stage[1].a_sat, stage[1].a_cs, coverage)
        for task, n_type, stage, coverage in zip(params.tasks, split, stages, coverages)
    ]
    synthesis = synthesize_delays(params, geom, entries)

    tasks = []
    for (task, n_type, _, _, coverage), stage, (loads, queue, delay, status) in zip(entries, stages, synthesis):
        tasks.append(
            TaskEvaluation(
                task=task,
                n_type=n_type,
                fixed_point=stage[0],
                association=stage[1],
                coverage=coverage,
                loads=loads,
                queue=queue,
                delay=delay,
                status=status,
            )
        )

    probabilities = [task.probability for task in params.tasks]
    failed = [t.status for t in tasks if t.status != "ok"]
    t_avg = math.nan if failed else math.fsum(q * t.delay.t_avg for q, t in zip(probabilities, tasks))
    return ScenarioResult(
        mode=mode,
        tasks=tuple(tasks),
        t_avg=t_avg,
        total_cov_down=total_cov(
            probabilities, [t.association.a_sat for t in tasks], [t.association.a_cs for t in tasks],
            [c.p_su_down for c in coverages], [c.p_cu_down for c in coverages],
        ),
        total_cov_up=total_cov(
            probabilities, [t.association.a_sat for t in tasks], [t.association.a_cs for t in tasks],
            [c.p_us_up for c in coverages], [c.p_uc_up for c in coverages],
        ),
        status=failed[0] if failed else "ok",
    )


def _echo(raw: Mapping, point: str, mode: NetworkMode, task: TaskSpec) -> Dict[str, Any]:
    return {
        "point": point,
        "network_mode": mode,
        "service_id": task.service_id,
        "altitude_km": raw["constellation"]["altitude_km"],
        "n_sats": raw["constellation"]["n_sats"],
        "lambda_u_per_km2": raw["ground"]["lambda_u_per_km2"],
        "tau_db": raw["link"]["tau_db"],
        "bias_ratio": raw["link"]["bias_ratio"],
        "cap_law": raw["constellation"]["cap_law"],
        "fading_model": raw["fading"]["model"],
        "shape_rounding": raw["fading"]["shape_rounding"],
    }


def _analytic_columns(result: ScenarioResult, item: TaskEvaluation) -> Dict[str, Any]:
    row = {
        "n_type": item.n_type,
        "n_offloadable": item.fixed_point.n_offloadable,
        "p_ofld": item.fixed_point.p_ofld,
        "a_sat": item.association.a_sat,
        "a_cs": item.association.a_cs,
        "p_su_down": item.coverage.p_su_down,
        "p_cu_down": item.coverage.p_cu_down,
        "p_us_up": item.coverage.p_us_up,
        "p_uc_up": item.coverage.p_uc_up,
        "t_avg_system": result.t_avg,
        "total_cov_down": result.total_cov_down,
        "total_cov_up": result.total_cov_up,
        "status": item.status,
    }
    if item.loads is not None:
        row.update(
            mean_ues_sat=item.loads.mean_ues_sat,
            mean_ues_cs=item.loads.mean_ues_cs,
            w_sat=item.loads.w_sat,
            w_cs=item.loads.w_cs,
            rho_sat=item.queue.rho_sat,
        )
    if item.delay is not None:
        row.update(
            t_up_cs=item.delay.t_up_cs,
            t_down_cs=item.delay.t_down_cs,
            t_up_sat=item.delay.t_up_sat,
            t_down_sat=item.delay.t_down_sat,
            t_resp_cs=item.delay.t_resp_cs,
            t_resp_sat=item.delay.t_resp_sat,
            t_avg=item.delay.t_avg,
        )
    else:
        row["t_avg"] = math.nan
    return row


def trend_summary(rows: Sequence[Mapping[str, Any]], key: str = "n_sats") -> Dict[str, Any]:
    """Qualitative comparisons over system-level delays, one row per point.

    Returns a mapping with the delays per network mode and `key` value,
    whether integrated <= min(sat-only, cs-only), the values where
    sat-only < cs-only, and the delay ordering of the points.
    """
    system: Dict[str, Dict[Any, float]] = {}
    ordering: Dict[str, float] = {}
    seen = set()
    for row in rows:
        mode = _format(row["network_mode"])
        marker = (row["point"], mode)
        if marker in seen:
            continue
        seen.add(marker)
        delay = row.get("t_avg_system", math.nan)
        system.setdefault(mode, {})[row[key]] = delay
        ordering[f"{row['point']} [{mode}]"] = delay

    integrated = system.get(NetworkMode.INTEGRATED.value, {})
    sat_only = system.get(NetworkMode.SAT_ONLY.value, {})
    cs_only = system.get(NetworkMode.CS_ONLY.value, {})
    integrated_best = {}
    for value, delay in integrated.items():
        if value in sat_only and value in cs_only:
            integrated_best[value] = delay <= min(sat_only[value], cs_only[value])
    return {
        "delays": system,
        "integrated_best": integrated_best,
        "sat_below_cs": [v for v in sat_only if v in cs_only and sat_only[v] < cs_only[v]],
        "ordering": sorted(ordering, key=lambda name: (math.isnan(ordering[name]), ordering[name])),
    }


def csv_text(columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(row.get(column)) for column in columns])
    return buffer.getvalue()


async def write_csv(path: str, columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> str:
    """Write rows as CSV with a fixed header; floats keep 17 significant digits."""
    output_dir = os.path.dirname(path)
    try:
        if output_dir:
            await aiofiles.os.makedirs(output_dir, exist_ok=True)
        async with aiofiles.open(path, mode="w", encoding="utf-8", newline="") as f:
            await f.write(csv_text(columns, rows))
    except OSError as exc:
        raise ConfigError("out", f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {len(rows)} row(s) to {path}")
    return path


class LeoMec:
    def __init__(
            self,
            config: Union[str, Mapping, None] = None,
            overrides: Sequence[str] = (),
            workers: int = 1,
            debug: bool = False,
            method: FixedPointMethod = FixedPointMethod.DAMPED,
        ) -> None:
        """
        Initialize an experiment runner for one scenario.

        Args:
            config (str | Mapping, optional): Path of a TOML scenario file, or a
                mapping merged over the defaults. Defaults to the built-in scenario.
            overrides (Sequence[str], optional): `section.key=value` overrides.
            workers (int, optional): Points evaluated at the same time; also the
                Monte Carlo chunk workers. Defaults to 1.
            debug (bool, optional): Whether to enable debug logging. Defaults to False.
            method (FixedPointMethod, optional): Offloadability fixed point solver.

        Raises:
            ConfigError: If the scenario is invalid.

        Note:
            The 'leomec' logger level is set to DEBUG when debug is True and back to INFO otherwise.
        """
        if isinstance(config, Mapping):
            raw = merge_config(DEFAULT_CONFIG, config)
        else:
            raw = load_config(config)
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError("workers", f"must be an integer >= 1, got {workers!r}")
        self.raw = apply_overrides(raw, list(overrides or ()) + [f"sim.workers={workers}"])
        self.params, self.geom = from_config(self.raw)
        self.sim: SimConfig = sim_config_from(self.raw)
        self.workers = workers
        self.method = FixedPointMethod(method)

        package_logger = logging.getLogger("leomec")
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
        handler.setFormatter(formatter)
        package_logger.handlers.clear()
        package_logger.addHandler(handler)
        package_logger.propagate = False
        package_logger.setLevel(logging.DEBUG if debug else logging.INFO)
        self.debug = debug

    def evaluate(self, mode: NetworkModeType = None) -> ScenarioResult:
        return evaluate_scenario(self.params, self.geom, mode, self.method)

    def _point_rows(self, raw: Mapping, point: str, run_mode: RunMode, network_mode: NetworkMode,
                    dump: bool = False) -> Tuple[List[Dict[str, Any]], List[list]]:
        """Rows of one point; numerical failures become the status column."""
        params, geom = from_config(raw)
        sim = sim_config_from(raw)
        try:
            result = evaluate_scenario(params, geom, network_mode, self.method)
        except NumericalError as exc:
            logger.warning(f"Point {point} failed: {exc}")
            return [dict(_echo(raw, point, network_mode, task), status=status_for(exc)) for task in params.tasks], []

        rows = []
        for item in result.tasks:
            row = _echo(raw, point, network_mode, item.task)
            row.update(_analytic_columns(result, item))
            rows.append(row)
        dumps: List[list] = []
        if run_mode != RunMode.ANALYTIC:
            dumps = self._simulate_rows(params, geom, sim, result, rows, dump)
        if run_mode == RunMode.SIMULATE:
            keep = set(COLUMNS[RunMode.SIMULATE])
            rows = [{k: v for k, v in row.items() if k in keep} for row in rows]
        if result.status != "ok":
            logger.warning(f"Point {point}: {result.status}")
        logger.info(f"Point {point} done")
        return rows, dumps

    def _simulate_rows(self, params, geom, sim: SimConfig, result: ScenarioResult,
                       rows: List[Dict[str, Any]], dump: bool) -> List[list]:
        batches = []
        dumps: List[list] = []
        for index, item in enumerate(result.tasks):
            batch = simulate_task(params, geom, item.n_type, item.fixed_point.p_ofld, sim, index, dump)
            batches.append(batch)
            dumps.extend(dump_rows(batch, item.task.service_id))

        entries = []
        summaries = []
        for item, batch in zip(result.tasks, batches):
            summary = summarize(batch)
            summaries.append(summary)
            a_sat = summary["a_sat"].mean
            coverage = CoverageResult(
                p_su_down=summary["p_su_down"].mean,
                p_cu_down=summary["p_cu_down"].mean,
                p_us_up=summary["p_us_up"].mean,
                p_uc_up=summary["p_uc_up"].mean,
                total_down=summary["cov_down"].mean,
                total_up=summary["cov_up"].mean,
                tau=params.tau,
            )
            entries.append((item.task, item.n_type, a_sat, 1.0 - a_sat, coverage))
        synthesis = synthesize_delays(params, geom, entries)

        sim_delays = [delay.t_avg if delay is not None else math.nan for _, _, delay, _ in synthesis]
        sim_system = math.fsum(t.probability * d for t, d in zip(params.tasks, sim_delays))
        for row, item, batch, summary, (_, _, _, sim_status), sim_t in zip(
                rows, result.tasks, batches, summaries, synthesis, sim_delays):
            row.update(trials=batch.trials, seed=sim.seed, redraws=batch.redraws,
                       sim_t_avg=sim_t, sim_t_avg_system=sim_system)
            for metric in SIM_METRICS:
                row[f"sim_{metric}"] = summary[metric].mean
                row[f"sim_{metric}_ci"] = summary[metric].halfwidth if sim.report_ci else None
                row[f"gap_{metric}"] = abs(row[metric] - summary[metric].mean)
            row["gap_t_avg"] = abs(row["t_avg"] - sim_t)
            if sim_status != "ok":
                row["status"] = f"{row['status']}; sim {sim_status}"
        return dumps

    async def _run_points(self, jobs: Sequence[Callable[[], Any]]) -> List[Any]:
        """Run jobs on the worker pool and return their results in job order."""
        results: List[Any] = [None] * len(jobs)
        loop = asyncio.get_running_loop()
        pending = set()

        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            async def process(index: int):
                try:
                    results[index] = await loop.run_in_executor(executor, jobs[index])
                except Exception as e:
                    results[index] = e

            for i in range(len(jobs)):
                while len(pending) >= self.workers:
                    _, pending = await asyncio.wait(pending, return_when=asyncio.FIRST_COMPLETED)
                pending.add(asyncio.create_task(process(i)))
            if pending:
                await asyncio.wait(pending)

        for result in results:
            if isinstance(result, BaseException):
                raise result
        return results

    async def run_sweep_back(self, spec: SweepSpec) -> List[Dict[str, Any]]:
        points = spec.points()
        logger.info(f"Sweep over {spec.variable.value} with {len(points)} point(s) in {spec.mode.value} mode")
        if spec.mode != RunMode.ANALYTIC and spec.network_mode != NetworkMode.INTEGRATED:
            raise ConfigError("mode", "simulation runs only the integrated network")

        jobs = []
        for label, assignments in points:
            raw = self.raw
            for key, value in assignments.items():
                raw = set_config_value(raw, key, value)
            jobs.append(lambda raw=raw, label=label: self._point_rows(raw, label, spec.mode, spec.network_mode))
        results = await self._run_points(jobs)
        rows = [row for point_rows, _ in results for row in point_rows]
        if spec.output_path:
            await write_csv(spec.output_path, COLUMNS[spec.mode], rows)
        logger.info(f"Sweep finished with {len(rows)} row(s)")
        return rows

    def run_sweep(self, spec: SweepSpec) -> List[Dict[str, Any]]:
        """Evaluate a sweep and optionally write it as CSV.

        Returns:
            List[dict]: One row per sweep point and task class, in sweep order.
        """
        return run_async(self.run_sweep_back(spec))

    async def run_preset_back(self, name: str, mode: RunMode = RunMode.ANALYTIC,
                              output_path: Optional[str] = None) -> List[Dict[str, Any]]:
        try:
            points = resolve_preset(name)
        except ValueError as exc:
            raise ConfigError("preset", str(exc)) from None
        mode = RunMode(mode)
        jobs = []
        for label, altitude, count in points:
            raw = set_config_value(self.raw, "constellation.altitude_km", altitude)
            raw = set_config_value(raw, "constellation.n_sats", count)
            jobs.append(lambda raw=raw, label=label: self._point_rows(raw, label, mode, NetworkMode.INTEGRATED))
        results = await self._run_points(jobs)
        rows = [row for point_rows, _ in results for row in point_rows]
        if output_path:
            await write_csv(output_path, COLUMNS[mode], rows)
        if mode != RunMode.SIMULATE:
            logger.info(f"Preset delay ordering, lowest first: {trend_summary(rows)['ordering']}")
        return rows

    def run_preset(self, name: str, mode: RunMode = RunMode.ANALYTIC,
                   output_path: Optional[str] = None) -> List[Dict[str, Any]]:
        """Evaluate a preset point, a preset family or `all` presets."""
        return run_async(self.run_preset_back(name, mode, output_path))

    async def run_baseline_comparison_back(self, values: Optional[Sequence[float]] = None,
                                           output_path: Optional[str] = None) -> List[Dict[str, Any]]:
        values = tuple(values) if values else DEFAULT_N_SATS_GRID
        rows: List[Dict[str, Any]] = []
        for mode in (NetworkMode.INTEGRATED, NetworkMode.CS_ONLY, NetworkMode.SAT_ONLY):
            spec = SweepSpec(variable=SweepVariable.N_SATS, values=values, network_mode=mode)
            rows.extend(await self.run_sweep_back(spec))
        if output_path:
            await write_csv(output_path, COLUMNS[RunMode.ANALYTIC], rows)
        trends = trend_summary(rows)
        logger.info(f"Integrated <= min(sat-only, cs-only) per N_s: {trends['integrated_best']}")
        logger.info(f"N_s where sat-only < cs-only: {trends['sat_below_cs']}")
        logger.info(SATELLITE_LOAD_NOTE)
        return rows

    def run_baseline_comparison(self, values: Optional[Sequence[float]] = None,
                                output_path: Optional[str] = None) -> List[Dict[str, Any]]:
        """Delay versus N_s for the integrated, CS-only and SAT-only networks."""
        return run_async(self.run_baseline_comparison_back(values, output_path))

    async def run_point_back(self, mode: RunMode, output_path: Optional[str] = None,
                             dump_path: Optional[str] = None) -> List[Dict[str, Any]]:
        mode = RunMode(mode)
        raw = self.raw
        label = f"n_sats={_format(raw['constellation']['n_sats'])}"
        rows, dumps = await asyncio.get_running_loop().run_in_executor(
            None, lambda: self._point_rows(raw, label, mode, NetworkMode.INTEGRATED, bool(dump_path))
        )
        if output_path:
            await write_csv(output_path, COLUMNS[mode], rows)
        if dump_path:
            dump_dicts = [dict(zip(("service_id",) + DUMP_COLUMNS, line)) for line in dumps]
            await write_csv(dump_path, ("service_id",) + DUMP_COLUMNS, dump_dicts)
        return rows

    def run_point(self, mode: RunMode = RunMode.ANALYTIC, output_path: Optional[str] = None,
                  dump_path: Optional[str] = None) -> List[Dict[str, Any]]:
        """Evaluate the configured scenario itself.

        Args:
            mode (RunMode): analytic, simulate or compare.
            output_path (str, optional): CSV output path.
            dump_path (str, optional): Per-trial CSV path for simulate and compare.
        """
        return run_async(self.run_point_back(mode, output_path, dump_path))


__all__ = [
    "LeoMec",
    "SweepSpec",
    "TaskEvaluation",
    "ScenarioResult",
    "COLUMNS",
    "DEFAULT_N_SATS_GRID",
    "SATELLITE_LOAD_NOTE",
    "evaluate_scenario",
    "synthesize_delays",
    "trend_summary",
    "csv_text",
    "write_csv",
]
