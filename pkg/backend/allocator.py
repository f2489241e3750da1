"""
Asignación de potencia mínima con cota EVT.

Direcciones fijas (MRT/ZF) calculadas una vez desde los estimados; las
potencias arrancan en p_min y se escalan por UE, en barridos round-robin,
hasta que la cota superior O_UB de cada UE queda bajo su ζ_k con el mismo
vector de potencias, o hasta exceder el presupuesto p_max.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from backend.channel.estimation import ErrorSet, perturbed_channel_set
from backend.errors import (
    ConfigurationError,
    DegenerateTailError,
    DomainError,
    FitConvergenceError,
    InsufficientSamplesError,
)
from backend.evt import GpdFit, TailConfig, psi_transform, tail_outage
from backend.precoding import PrecoderSet, directions, sinr_samples

logger = logging.getLogger(__name__)

SEARCH_MODES = ("bisect", "linear")

# Fallas del ajuste que se tratan como outage declarado (cota = 1)
_FIT_FAILURES = (DegenerateTailError, FitConvergenceError, InsufficientSamplesError, DomainError)


@dataclass(frozen=True)
class AllocConfig:
    p_min: float
    p_max: float
    delta_p: float
    outage_targets: Tuple[float, ...]
    sinr_targets: Tuple[float, ...]
    noise_power: float
    tail: TailConfig = field(default_factory=TailConfig)
    method: str = "mrt"
    search: str = "bisect"
    fit_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "outage_targets", tuple(float(z) for z in np.atleast_1d(self.outage_targets)))
        object.__setattr__(self, "sinr_targets", tuple(float(g) for g in np.atleast_1d(self.sinr_targets)))
        object.__setattr__(self, "method", (self.method or "mrt").lower())
        object.__setattr__(self, "search", (self.search or "bisect").lower())

        if not 0 < self.p_min <= self.p_max:
            raise ConfigurationError(f"Se requiere 0 < p_min <= p_max (p_min={self.p_min}, p_max={self.p_max})")
        if not self.delta_p > 0:
            raise ConfigurationError(f"Δp debe ser > 0: {self.delta_p}")
        if not self.noise_power > 0:
            raise ConfigurationError(f"noise_power debe ser > 0: {self.noise_power}")
        if any(not 0.0 < z < 1.0 for z in self.outage_targets):
            raise ConfigurationError(f"Cada ζ_k debe estar en (0,1): {self.outage_targets}")
        if any(not g > 0 for g in self.sinr_targets):
            raise ConfigurationError(f"Cada γ_tar debe ser > 0: {self.sinr_targets}")
        if self.method not in ("mrt", "zf"):
            raise ConfigurationError(f"Método de precoding no soportado: {self.method}")
        if self.search not in SEARCH_MODES:
            raise ConfigurationError(f"Modo de búsqueda no soportado: {self.search}")

    def per_ue(self, users: int) -> Tuple[np.ndarray, np.ndarray]:
        """(ζ_k, γ_tar,k) extendidos a K UEs; un solo valor se replica."""
        out = []
        for name, values in (("outage_targets", self.outage_targets), ("sinr_targets", self.sinr_targets)):
            if len(values) == 1:
                out.append(np.full(users, values[0]))
            elif len(values) == users:
                out.append(np.asarray(values))
            else:
                raise ConfigurationError(f"{name} tiene {len(values)} valores para {users} UEs")
        return out[0], out[1]

    @property
    def max_increments(self) -> int:
        return math.ceil((self.p_max - self.p_min) / self.delta_p)


@dataclass(frozen=True)
class TrajectoryPoint:
    sweep: int
    ue: int
    power: float
    upper_bound: float
    passed: bool


@dataclass(frozen=True)
class AllocationResult:
    feasible: bool
    precoders: PrecoderSet
    upper_bounds: Tuple[float, ...]
    lower_bounds: Tuple[float, ...]
    fits: Tuple[Optional[GpdFit], ...]
    iterations: int
    sweeps: int
    evaluations: int
    trajectory: Tuple[TrajectoryPoint, ...] = field(default=(), repr=False)
    # O_UB en p_k − Δp la última vez que se probó (None si el UE nunca escaló)
    failing_bounds: Tuple[Optional[float], ...] = ()

    @property
    def powers(self) -> np.ndarray:
        return self.precoders.powers

    @property
    def total_power(self) -> float:
        return self.precoders.total_power


@dataclass(frozen=True)
class _Evaluation:
    upper: float
    lower: float
    fit: Optional[GpdFit]


class _BoundEvaluator:
    """Evalúa O_UB/O_LB de un UE sobre su ℋ_k fijo para un vector de potencias."""

    def __init__(self, unit_dirs: np.ndarray, perturbed: List[np.ndarray], targets: np.ndarray, config: AllocConfig):
        self.template = PrecoderSet(directions=unit_dirs, powers=np.ones(len(unit_dirs)))
        self.perturbed = perturbed
        self.targets = targets
        self.config = config
        self.count = 0

    def __call__(self, ue: int, powers: np.ndarray) -> _Evaluation:
        self.count += 1
        precoders = self.template.with_powers(powers)
        samples = sinr_samples(precoders, self.perturbed[ue], ue, self.config.noise_power)
        try:
            psi, phi = psi_transform(samples, float(self.targets[ue]))
            out = tail_outage(psi, phi, self.config.tail, seed=self.config.fit_seed)
        except _FIT_FAILURES as e:
            logger.warning("⚠️ Ajuste fallido, se declara outage | ue=%s | p=%.3e W | %s", ue, powers[ue], e)
            return _Evaluation(upper=1.0, lower=1.0, fit=None)
        return _Evaluation(upper=out.upper, lower=out.lower, fit=out.fit)


def allocate(
    estimates,
    error_sets: Sequence[ErrorSet],
    config: AllocConfig,
) -> AllocationResult:
    H = np.atleast_2d(np.asarray(estimates, dtype=complex))
    users = H.shape[0]
    if len(error_sets) != users:
        raise ConfigurationError(f"{len(error_sets)} conjuntos de error para {users} UEs")
    for es in error_sets:
        config.tail.check_sample_size(es.size)

    zetas, gammas = config.per_ue(users)
    unit_dirs = directions(H, config.method)
    perturbed = [perturbed_channel_set(H[k], error_sets[k]) for k in range(users)]
    evaluate = _BoundEvaluator(unit_dirs, perturbed, gammas, config)

    powers = np.full(users, config.p_min)
    upper = np.ones(users)
    lower = np.ones(users)
    fits: List[Optional[GpdFit]] = [None] * users
    failing: List[Optional[float]] = [None] * users
    trajectory: List[TrajectoryPoint] = []
    increments = 0
    sweeps = 0

    logger.info(
        "🚀 Asignación | K=%s | método=%s | búsqueda=%s | ζ=%s",
        users, config.method, config.search, zetas.tolist(),
    )

    def finish(feasible: bool) -> AllocationResult:
        result = AllocationResult(
            feasible=feasible,
            precoders=evaluate.template.with_powers(powers.copy()),
            upper_bounds=tuple(float(u) for u in upper),
            lower_bounds=tuple(float(v) for v in lower),
            fits=tuple(fits),
            iterations=increments,
            sweeps=sweeps,
            evaluations=evaluate.count,
            trajectory=tuple(trajectory),
            failing_bounds=tuple(failing),
        )
        if feasible:
            logger.info(
                "✅ Asignación lista | p_total=%.3e W | incrementos=%s | barridos=%s | evaluaciones=%s",
                result.total_power, increments, sweeps, evaluate.count,
            )
        else:
            logger.warning(
                "⚠️ Asignación infactible | p_total=%.3e W > p_max=%.3e W | incrementos=%s",
                result.total_power, config.p_max, increments,
            )
        return result

    if powers.sum() > config.p_max:
        return finish(False)

    def record(ue: int, ev: _Evaluation, power: float) -> bool:
        passed = ev.upper <= zetas[ue]
        trajectory.append(TrajectoryPoint(sweep=sweeps, ue=ue, power=float(power), upper_bound=ev.upper, passed=passed))
        logger.debug("sweep=%s ue=%s p=%.4e W O_UB=%.3e pasa=%s", sweeps, ue, power, ev.upper, passed)
        return passed

    def accept(ue: int, ev: _Evaluation) -> None:
        upper[ue], lower[ue], fits[ue] = ev.upper, ev.lower, ev.fit

    while True:
        sweeps += 1
        sweep_increments = 0

        for k in range(users):
            ev = evaluate(k, powers)
            if record(k, ev, powers[k]):
                accept(k, ev)
                continue

            if config.search == "linear":
                steps, ev = _escalate_linear(k, powers, ev, config, evaluate, record, failing)
            else:
                steps, ev = _escalate_bisect(k, powers, ev, config, evaluate, record, failing)

            increments += steps
            sweep_increments += steps
            if ev is None:
                return finish(False)
            accept(k, ev)

        if sweep_increments == 0:
            return finish(True)


def _escalate_linear(k, powers, ev, config, evaluate, record, failing):
    """p_k ← p_k + Δp hasta pasar; devuelve (pasos, evaluación) o (pasos, None) si se agota el presupuesto."""
    steps = 0
    while True:
        failing[k] = ev.upper
        powers[k] += config.delta_p
        steps += 1
        if powers.sum() > config.p_max:
            return steps, None
        ev = evaluate(k, powers)
        if record(k, ev, powers[k]):
            return steps, ev


def _escalate_bisect(k, powers, ev, config, evaluate, record, failing):
    """
    Misma grilla p_k + jΔp que la escalada lineal: bracket exponencial en j y
    luego bisección hasta que j pasa y j−1 falla.
    """
    base = float(powers[k])
    others = float(powers.sum() - base)
    j_max = math.floor((config.p_max - others - base) / config.delta_p)
    while j_max >= 0 and others + base + j_max * config.delta_p > config.p_max:
        j_max -= 1

    cache: Dict[int, _Evaluation] = {0: ev}

    def passes_at(j: int) -> bool:
        powers[k] = base + j * config.delta_p
        cache[j] = evaluate(k, powers)
        return record(k, cache[j], powers[k])

    j_fail, j_pass = 0, None
    j = 1
    while j <= j_max:
        if passes_at(j):
            j_pass = j
            break
        j_fail = j
        j *= 2
    if j_pass is None and j_fail < j_max:
        if passes_at(j_max):
            j_pass = j_max
        else:
            j_fail = j_max

    if j_pass is None:
        failing[k] = cache[j_fail].upper
        powers[k] = base + (j_max + 1) * config.delta_p
        return j_max + 1, None

    while j_pass - j_fail > 1:
        mid = (j_pass + j_fail) // 2
        if passes_at(mid):
            j_pass = mid
        else:
            j_fail = mid

    failing[k] = cache[j_fail].upper
    powers[k] = base + j_pass * config.delta_p
    return j_pass, cache[j_pass]
