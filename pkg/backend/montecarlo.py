from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from backend.channel.estimation import EstimationSpec
from backend.channel.rayleigh import complex_normal
from backend.errors import ConfigurationError, DomainError
from backend.precoding import PrecoderSet, sinr_samples
from backend.units import linear_to_db

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 100_000
# bordes del histograma de SINR en dB; valores fuera se acumulan en los extremos
DEFAULT_EDGES_DB = np.arange(-40.0, 60.0 + 0.25, 0.25)


def binomial_stderr(fraction: float, trials: int) -> float:
    if trials < 1:
        raise ConfigurationError(f"trials debe ser >= 1: {trials}")
    return float(np.sqrt(fraction * (1.0 - fraction) / trials))


def _chunks(trials: int, chunk: int):
    if trials < 1:
        raise ConfigurationError(f"trials debe ser >= 1: {trials}")
    if chunk < 1:
        raise ConfigurationError(f"chunk debe ser >= 1: {chunk}")
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        yield n
        done += n


def _noise(spec: EstimationSpec, noise_power: Optional[float]) -> float:
    sigma2 = spec.noise_power if noise_power is None else noise_power
    if not sigma2 > 0:
        raise DomainError(f"σ_v² debe ser > 0: {sigma2}")
    return float(sigma2)


def empirical_outage(
    precoders: PrecoderSet,
    estimates,
    spec: EstimationSpec,
    targets: Sequence[float],
    trials: int,
    rng: np.random.Generator,
    noise_power: Optional[float] = None,
    chunk: int = DEFAULT_CHUNK,
) -> np.ndarray:
    """
    Fracción de trials con SINR < γ_tar por UE, con canales frescos
    h_k = ĥ_k + e_k y e_k ~ CN(0, σ_e² I) independientes de los ℰ_k.
    """
    H = np.atleast_2d(np.asarray(estimates, dtype=complex))
    users, antennas = H.shape
    gammas = np.broadcast_to(np.asarray(targets, dtype=float), (users,))
    sigma2 = _noise(spec, noise_power)

    below = np.zeros(users, dtype=np.int64)
    for n in _chunks(trials, chunk):
        errors = complex_normal(rng, (n, users, antennas), spec.error_variance)
        for k in range(users):
            s = sinr_samples(precoders, H[k][None, :] + errors[:, k, :], k, sigma2)
            below[k] += int(np.count_nonzero(s < gammas[k]))

    fractions = below / trials
    logger.debug("Outage empírico | trials=%s | fracciones=%s", trials, fractions.tolist())
    return fractions


@dataclass(frozen=True)
class EstimationSweepResult:
    fraction: float
    trials: int
    edges_db: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def stderr(self) -> float:
        return binomial_stderr(self.fraction, self.trials)


def estimation_sweep(
    channel,
    spec: EstimationSpec,
    power: float,
    sinr_target: float,
    trials: int,
    rng: np.random.Generator,
    noise_power: Optional[float] = None,
    keep_samples: bool = False,
    chunk: int = DEFAULT_CHUNK,
    edges_db: Optional[np.ndarray] = None,
) -> EstimationSweepResult:
    """
    Por trial: ĥ = h + e, MRT sobre ĥ con potencia p, SINR evaluada en el h
    verdadero. Los trials se procesan por bloques; solo se guardan las
    muestras si keep_samples.
    """
    h = np.asarray(channel, dtype=complex).ravel()
    sigma2 = _noise(spec, noise_power)
    if power < 0:
        raise ConfigurationError(f"power debe ser >= 0: {power}")
    edges = DEFAULT_EDGES_DB if edges_db is None else np.asarray(edges_db, dtype=float)

    counts = np.zeros(edges.size - 1, dtype=np.int64)
    below = 0
    kept: List[np.ndarray] = []

    for n in _chunks(trials, chunk):
        estimates = h[None, :] + complex_normal(rng, (n, h.size), spec.error_variance)
        norms = np.linalg.norm(estimates, axis=1)
        # |h^H ĥ|² / ‖ĥ‖²; un ĥ nulo no transmite nada
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.abs(estimates @ h.conj()) ** 2 / norms**2
        gain = np.where(norms > 0, gain, 0.0)
        s = power * gain / sigma2

        below += int(np.count_nonzero(s < sinr_target))
        s_db = linear_to_db(s)
        counts += np.histogram(np.clip(s_db, edges[0], edges[-1]), bins=edges)[0]
        if keep_samples:
            kept.append(s)

    fraction = below / trials
    logger.info(
        "✅ Barrido de estimación listo | trials=%s | p=%.3e W | fracción=%.4e",
        trials, power, fraction,
    )
    return EstimationSweepResult(
        fraction=fraction,
        trials=trials,
        edges_db=edges,
        counts=counts,
        samples=np.concatenate(kept) if keep_samples else None,
    )


def histogram_rows(result: EstimationSweepResult) -> List[Dict[str, float]]:
    return [
        {"bin_lo_db": float(lo), "bin_hi_db": float(hi), "count": int(c)}
        for lo, hi, c in zip(result.edges_db[:-1], result.edges_db[1:], result.counts)
    ]


def write_histogram_csv(result: EstimationSweepResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["bin_lo_db", "bin_hi_db", "count"])
        writer.writeheader()
        writer.writerows(histogram_rows(result))
    return path
