"""
Orquestación de escenarios: sorteo de canal -> estimación LS -> conjuntos
de error -> asignación -> verificación Monte Carlo, y los barridos sobre
τ_e, ζ, Γ, K y N.
"""

from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from backend.allocator import AllocationResult, allocate
from backend.benchmark import WorstCaseSpec, radius_from_errors, worst_case_from_spec
from backend.channel import (
    ErrorSet,
    EstimationSpec,
    build_scenario_models,
    draw_error_set,
    draw_true_channels,
    ls_estimate,
    pilot_matrix,
)
from backend.config import ScenarioConfig, build_config
from backend.errors import (
    ConfigurationError,
    DegenerateTailError,
    DomainError,
    FitConvergenceError,
    InfeasibleError,
    InsufficientSamplesError,
    InvariantError,
)
from backend.evt import GpdFit, gpd_cdf, gpd_fit
from backend.montecarlo import (
    EstimationSweepResult,
    empirical_outage,
    estimation_sweep,
    write_histogram_csv,
)
from backend.reporting import ResultRow, aggregate_rows, sort_key
from backend.seeding import SeedStreams, scenario_seeds
from backend.units import db_to_linear, dbm_to_watts, watts_to_dbm

logger = logging.getLogger(__name__)

# eje del barrido -> campo de ScenarioConfig
SWEEP_AXES: Dict[str, str] = {
    "tau_e": "pilot_length",
    "zeta": "outage_targets",
    "gamma_conf": "confidence",
    "K": "users",
    "N": "samples",
}

FIXED_CHANNEL = np.sqrt(1e-13) * np.array(
    [0.118 + 0.501j, 0.145 + 0.058j, -0.051 + 0.022j, 0.087 - 0.176j]
)
FIXED_TARGET_DB = 10.0
FIXED_PILOT_LENGTHS = (1, 2)
FIXED_POWERS_DBM = (23.0, 26.0)


@dataclass(frozen=True)
class ScenarioDraw:
    channels: np.ndarray  # (K, M) verdaderos
    estimates: np.ndarray  # (K, M) LS
    error_sets: Tuple[ErrorSet, ...]
    spec: EstimationSpec


def draw_scenario(config: ScenarioConfig, streams: SeedStreams) -> ScenarioDraw:
    rng = streams.generator("channel")
    models = build_scenario_models(
        kind=config.channel_model,
        antennas=config.antennas,
        users=config.users,
        gain=config.gain,
        angular_std=config.angular_std,
        clusters=config.clusters,
        rician_factor=config.rician_factor,
        rng=rng,
    )
    channels = draw_true_channels(models, rng)

    spec = config.estimation_spec()
    pilots = pilot_matrix(config.users, config.pilot_length)
    estimates = ls_estimate(channels, pilots, spec, streams.generator("pilot_noise"))
    error_sets = tuple(
        draw_error_set(spec, config.samples, config.antennas, streams.generator("errors", k))
        for k in range(config.users)
    )
    return ScenarioDraw(channels=channels, estimates=estimates, error_sets=error_sets, spec=spec)


def _dbm_list(powers) -> List[float]:
    return [float(v) for v in watts_to_dbm(np.asarray(powers, dtype=float))]


def _check_emitted(result: AllocationResult, zetas: Sequence[float], p_max: float) -> None:
    if not result.feasible:
        return
    for k, (ub, zeta) in enumerate(zip(result.upper_bounds, zetas)):
        if ub > zeta:
            raise InvariantError(f"UE {k}: O_UB={ub:.3e} > ζ={zeta:.3e} en una asignación factible")
    if result.total_power > p_max:
        raise InvariantError(f"p_total={result.total_power:.3e} W > p_max={p_max:.3e} W en una asignación factible")


def _allocation_row(
    config: ScenarioConfig,
    scenario: ScenarioDraw,
    streams: SeedStreams,
) -> Tuple[ResultRow, AllocationResult]:
    t0 = time.perf_counter()
    alloc_config = config.alloc_config(fit_seed=streams.integer("fit"))
    result = allocate(scenario.estimates, scenario.error_sets, alloc_config)
    _check_emitted(result, config.zetas, alloc_config.p_max)

    if result.feasible:
        outage = empirical_outage(
            result.precoders,
            scenario.estimates,
            scenario.spec,
            [config.sinr_target] * config.users,
            config.trials,
            streams.generator("montecarlo"),
        ).tolist()
    else:
        # una asignación infactible se declara outage
        outage = [1.0] * config.users

    row = ResultRow(
        seed=streams.master_seed,
        powers_dbm=_dbm_list(result.powers),
        total_power_dbm=float(watts_to_dbm(result.total_power)),
        upper_bounds=list(result.upper_bounds),
        lower_bounds=list(result.lower_bounds),
        empirical_outage=[float(v) for v in outage],
        outage_targets=list(config.zetas),
        feasible=result.feasible,
        iterations=result.iterations,
        wall_time=time.perf_counter() - t0,
    )
    return row, result


def run_allocate(config: ScenarioConfig, seed: Optional[int] = None) -> ResultRow:
    """Un escenario de punta a punta con la semilla del config (o la indicada)."""
    streams = SeedStreams(config.seed if seed is None else seed)
    scenario = draw_scenario(config, streams)
    row, _ = _allocation_row(config, scenario, streams)
    return row


# ---------------------------
# Barridos
# ---------------------------

def _axis_updates(config: ScenarioConfig, axis: str, value: Any) -> Dict[str, Any]:
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"Eje de barrido no soportado: {axis} (opciones: {', '.join(SWEEP_AXES)})")
    name = SWEEP_AXES[axis]

    if axis == "zeta":
        return {"outage_targets": [float(value)]}
    if axis == "gamma_conf":
        return {"confidence": float(value)}
    if axis == "K":
        users = int(value)
        updates: Dict[str, Any] = {"users": users, "pilot_length": max(config.pilot_length, users)}
        if len(config.outage_targets) != 1:
            updates["outage_targets"] = [config.outage_targets[0]]
        return updates
    return {name: int(value)}


def _sweep_job(payload: Tuple[Dict[str, Any], str, float, int]) -> ResultRow:
    values, axis, value, seed = payload
    config = build_config(values)
    row = run_allocate(config, seed=seed)
    return row.model_copy(update={"axis": axis, "value": float(value)})


def _map_jobs(job, payloads: List[Any], workers: int, desc: str, progress: bool) -> List[Any]:
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(tqdm(pool.map(job, payloads), total=len(payloads), desc=desc, disable=not progress))
    return [job(p) for p in tqdm(payloads, desc=desc, disable=not progress)]


def sweep_workers() -> int:
    return max(1, int(os.getenv("SWEEP_WORKERS", "1")))


def run_sweep(
    config: ScenarioConfig,
    axis: str,
    values: Sequence[float],
    seeds: Optional[Sequence[int]] = None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> List[ResultRow]:
    """
    Una fila por (valor, semilla) más las filas agregadas por valor.
    Las semillas son las mismas para todos los valores del eje.
    """
    values = list(values)
    if not values:
        return []
    seeds = list(seeds) if seeds is not None else scenario_seeds(config.seed, config.scenarios)
    workers = sweep_workers() if workers is None else max(1, int(workers))

    payloads = []
    for value in values:
        cfg = config.with_updates(**_axis_updates(config, axis, value))
        for seed in seeds:
            payloads.append((cfg.model_dump(), axis, float(value), int(seed)))

    logger.info(
        "🚀 Barrido | eje=%s | valores=%s | semillas=%s | workers=%s",
        axis, len(values), len(seeds), workers,
    )
    rows: List[ResultRow] = _map_jobs(_sweep_job, payloads, workers, f"sweep {axis}", progress)

    value_index = {float(v): i for i, v in enumerate(values)}
    for value in values:
        group = [r for r in rows if r.value == float(value)]
        rows.extend(aggregate_rows(group))

    rows.sort(key=lambda r: sort_key(r, value_index))
    logger.info("✅ Barrido listo | eje=%s | filas=%s", axis, len(rows))
    return rows


# ---------------------------
# Benchmark de peor caso
# ---------------------------

def _benchmark_pair(
    config: ScenarioConfig,
    seed: int,
    radius: Optional[float] = None,
) -> List[ResultRow]:
    if config.users != 1:
        raise ConfigurationError(f"El benchmark de peor caso es de un solo UE (users={config.users})")

    zeta = config.zetas[0]
    if radius is None and config.samples * zeta < 1.0:
        raise ConfigurationError(
            f"El radio necesita N >= 1/ζ = {1.0 / zeta:.0f} muestras, hay {config.samples}"
        )

    streams = SeedStreams(seed)
    scenario = draw_scenario(config, streams)
    evt_row, _ = _allocation_row(config, scenario, streams)

    t0 = time.perf_counter()
    eps = radius_from_errors(scenario.error_sets[0], zeta) if radius is None else float(radius)
    spec = WorstCaseSpec(
        radius=eps,
        outage_target=zeta,
        sinr_target=config.sinr_target,
        noise_power=config.noise_power,
    )
    p_max = float(dbm_to_watts(config.p_max_dbm))
    try:
        precoders = worst_case_from_spec(scenario.estimates[0], spec)
        feasible = precoders.total_power <= p_max
    except InfeasibleError as e:
        logger.warning("⚠️ Peor caso infactible | seed=%s | %s", seed, e)
        precoders, feasible = None, False

    if feasible:
        outage = empirical_outage(
            precoders,
            scenario.estimates,
            scenario.spec,
            [config.sinr_target],
            config.trials,
            streams.generator("benchmark"),
        ).tolist()
        powers_dbm = _dbm_list(precoders.powers)
    else:
        outage = [1.0]
        powers_dbm = [config.p_max_dbm] if precoders is None else _dbm_list(precoders.powers)

    wc_row = ResultRow(
        scheme="worst_case",
        seed=seed,
        powers_dbm=powers_dbm,
        total_power_dbm=float(watts_to_dbm(np.sum(dbm_to_watts(powers_dbm)))),
        upper_bounds=[],
        lower_bounds=[],
        empirical_outage=[float(v) for v in outage],
        outage_targets=[zeta],
        feasible=feasible,
        iterations=0,
        wall_time=time.perf_counter() - t0,
    )
    return [evt_row, wc_row]


def _benchmark_job(payload: Tuple[Dict[str, Any], int, Optional[float]]) -> List[ResultRow]:
    values, seed, radius = payload
    return _benchmark_pair(build_config(values), seed, radius)


def run_benchmark_compare(
    config: ScenarioConfig,
    seeds: Optional[Sequence[int]] = None,
    radius: Optional[float] = None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> List[ResultRow]:
    """
    Filas pareadas EVT vs peor caso por semilla (ambas verificadas con
    Monte Carlo); con más de una semilla se agregan por esquema.
    """
    seeds = [config.seed] if seeds is None else list(seeds)
    workers = sweep_workers() if workers is None else max(1, int(workers))
    payloads = [(config.model_dump(), int(s), radius) for s in seeds]

    pairs = _map_jobs(_benchmark_job, payloads, workers, "benchmark", progress)
    rows = [r for pair in pairs for r in pair]

    if len(seeds) > 1:
        for scheme in ("evt", "worst_case"):
            rows.extend(aggregate_rows([r for r in rows if r.scheme == scheme and r.row_type == "seed"]))

    rows.sort(key=lambda r: sort_key(r, {}))
    logger.info("✅ Benchmark listo | semillas=%s | filas=%s", len(seeds), len(rows))
    return rows


def power_gaps_db(rows: Sequence[ResultRow]) -> List[float]:
    """p_peor_caso − p_EVT [dB] por semilla, solo con ambas filas factibles."""
    evt = {r.seed: r for r in rows if r.scheme == "evt" and r.row_type == "seed" and r.feasible}
    wc = {r.seed: r for r in rows if r.scheme == "worst_case" and r.row_type == "seed" and r.feasible}
    return [wc[s].total_power_dbm - evt[s].total_power_dbm for s in sorted(evt.keys() & wc.keys())]


# ---------------------------
# Experimento de estimación con canal fijo
# ---------------------------

@dataclass(frozen=True)
class FixedChannelCase:
    pilot_length: int
    power_dbm: float
    result: EstimationSweepResult
    histogram_path: Optional[Path] = None

    def summary(self) -> Dict[str, Any]:
        return {
            "pilot_length": self.pilot_length,
            "power_dbm": self.power_dbm,
            "trials": self.result.trials,
            "fraction": self.result.fraction,
            "stderr": self.result.stderr,
            "histogram": str(self.histogram_path) if self.histogram_path else None,
        }


def run_fixed_channel(
    config: ScenarioConfig,
    trials: Optional[int] = None,
    out_dir: Optional[str] = None,
    pilot_lengths: Sequence[int] = FIXED_PILOT_LENGTHS,
    powers_dbm: Sequence[float] = FIXED_POWERS_DBM,
    channel=FIXED_CHANNEL,
    target_db: float = FIXED_TARGET_DB,
) -> List[FixedChannelCase]:
    """
    Canal fijo, MRT sobre ĥ = h + e y SINR en el h verdadero, para cada
    combinación (τ_e, p). Ruido y p_ul salen del config.
    """
    trials = config.trials if trials is None else int(trials)
    target = float(db_to_linear(target_db))
    streams = SeedStreams(config.seed)
    cases: List[FixedChannelCase] = []

    for i, tau in enumerate(pilot_lengths):
        spec = EstimationSpec(uplink_power=config.uplink_power, pilot_length=int(tau), noise_power=config.noise_power)
        for j, p_dbm in enumerate(powers_dbm):
            result = estimation_sweep(
                channel,
                spec,
                float(dbm_to_watts(p_dbm)),
                target,
                trials,
                streams.generator("montecarlo", i, j),
            )
            path = None
            if out_dir:
                path = write_histogram_csv(result, Path(out_dir) / f"fixed_tau{tau}_p{p_dbm:g}dBm.csv")
            cases.append(FixedChannelCase(pilot_length=int(tau), power_dbm=float(p_dbm), result=result, histogram_path=path))

    return cases


# nombre del contrato de la CLI para el experimento de canal fijo
run_fig2 = run_fixed_channel


# ---------------------------
# Elección del umbral en datos normales
# ---------------------------

THRESHOLD_STUDY_LEVELS = (0.0, 2.0, 4.0)
THRESHOLD_STUDY_SAMPLES = 1_000_000
THRESHOLD_STUDY_MIN_EXCESS = 10

_FIT_FAILURES = (DegenerateTailError, FitConvergenceError, InsufficientSamplesError, DomainError)


@dataclass(frozen=True)
class ThresholdCase:
    threshold: float
    excess_count: int
    edges: np.ndarray
    density: np.ndarray
    empirical_cdf: np.ndarray
    fit: Optional[GpdFit] = None
    fitted_cdf: Optional[np.ndarray] = None
    data_path: Optional[Path] = None

    @property
    def max_cdf_gap(self) -> Optional[float]:
        """Distancia de Kolmogorov entre la CDF empírica y la GPD ajustada, en los bordes."""
        if self.fitted_cdf is None:
            return None
        return float(np.max(np.abs(self.empirical_cdf - self.fitted_cdf)))

    def summary(self) -> Dict[str, Any]:
        return {
            "threshold": self.threshold,
            "excess_count": self.excess_count,
            "shape": self.fit.mle.shape if self.fit else None,
            "scale": self.fit.mle.scale if self.fit else None,
            "max_cdf_gap": self.max_cdf_gap,
            "data": str(self.data_path) if self.data_path else None,
        }


def _write_threshold_csv(case: ThresholdCase, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fitted = case.fitted_cdf if case.fitted_cdf is not None else [None] * case.density.size
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["z_lo", "z_hi", "density", "empirical_cdf", "gpd_cdf"])
        for lo, hi, d, e, g in zip(case.edges[:-1], case.edges[1:], case.density, case.empirical_cdf, fitted):
            writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(d)), repr(float(e)), "" if g is None else repr(float(g))])
    return path


def run_threshold_study(
    config: ScenarioConfig,
    samples: Optional[int] = None,
    thresholds: Sequence[float] = THRESHOLD_STUDY_LEVELS,
    bins: int = 50,
    out_dir: Optional[str] = None,
    min_excess: int = THRESHOLD_STUDY_MIN_EXCESS,
) -> List[ThresholdCase]:
    """
    Muestras N(0,1), excesos estrictos sobre cada μ y ajuste GPD. Por μ se
    entrega el histograma (densidad) de los excesos y la CDF empírica y la
    ajustada en los bordes derechos de cada bin.
    """
    samples = THRESHOLD_STUDY_SAMPLES if samples is None else int(samples)
    if samples < 1 or bins < 1:
        raise ConfigurationError(f"samples y bins deben ser >= 1: {samples}, {bins}")

    streams = SeedStreams(config.seed)
    draws = streams.generator("threshold_study").standard_normal(samples)
    cases: List[ThresholdCase] = []

    for i, mu in enumerate(thresholds):
        mu = float(mu)
        z = np.sort(draws[draws > mu] - mu)
        if z.size == 0:
            raise InsufficientSamplesError(f"Ninguna muestra supera μ={mu} con N={samples}")

        edges = np.linspace(0.0, float(z[-1]), bins + 1)
        density, _ = np.histogram(z, bins=edges, density=True)
        ecdf = np.searchsorted(z, edges[1:], side="right") / z.size

        fit, fitted = None, None
        try:
            fit = gpd_fit(z, confidence=config.confidence, min_excess=min_excess, seed=streams.integer("fit", i))
            fit = replace(fit, threshold=mu)
            fitted = gpd_cdf(edges[1:], fit.mle)
        except _FIT_FAILURES as e:
            logger.warning("⚠️ Ajuste GPD fallido | μ=%s | excesos=%s | %s", mu, z.size, e)

        case = ThresholdCase(
            threshold=mu,
            excess_count=int(z.size),
            edges=edges,
            density=density,
            empirical_cdf=ecdf,
            fit=fit,
            fitted_cdf=fitted,
        )
        if out_dir:
            path = _write_threshold_csv(case, Path(out_dir) / f"threshold_mu{mu:g}.csv")
            case = replace(case, data_path=path)
        logger.info(
            "📊 Umbral μ=%s | excesos=%s | brecha CDF=%s",
            mu, case.excess_count, case.max_cdf_gap,
        )
        cases.append(case)

    return cases
