from __future__ import annotations

import logging
from typing import List

import numpy as np

from backend.channel.base_fading import FadingModel
from backend.channel.correlation import CorrelationSpec, correlation_matrix, draw_cluster_angles
from backend.channel.rayleigh import CorrelatedRayleigh
from backend.channel.rician import Rician
from backend.errors import ConfigurationError

logger = logging.getLogger(__name__)

SUPPORTED_MODELS = ("rayleigh", "rician")


def build_fading_model(
    kind: str,
    correlation: np.ndarray,
    rician_factor: float = 0.0,
    gain: float | None = None,
    azimuth: float = 0.0,
) -> FadingModel:
    kind = (kind or "rayleigh").lower()

    if kind == "rayleigh":
        return CorrelatedRayleigh(correlation)

    if kind == "rician":
        return Rician(rician_factor, correlation, gain=gain, azimuth=azimuth)

    raise ConfigurationError(f"Modelo de canal no soportado: {kind}")


def build_scenario_models(
    *,
    kind: str,
    antennas: int,
    users: int,
    gain: float,
    angular_std: float,
    clusters: int,
    rician_factor: float,
    rng: np.random.Generator,
) -> List[FadingModel]:
    """
    Un modelo por UE: azimut φ̄_k ~ U(0, 2π) y ángulos de cluster sorteados una
    sola vez (R_k queda fija para todo el escenario).
    """
    models: List[FadingModel] = []
    for k in range(users):
        azimuth = float(rng.uniform(0.0, 2.0 * np.pi))
        base = CorrelationSpec(
            antennas=antennas,
            gain=gain,
            azimuth=azimuth,
            angular_std=angular_std,
            clusters=clusters,
        )
        angles = draw_cluster_angles(base, rng)
        spec = CorrelationSpec(
            antennas=antennas,
            gain=gain,
            azimuth=azimuth,
            angular_std=angular_std,
            clusters=clusters,
            cluster_angles=tuple(float(a) for a in angles),
        )
        R = correlation_matrix(spec)
        models.append(build_fading_model(kind, R, rician_factor=rician_factor, gain=gain, azimuth=azimuth))

        logger.debug("UE %s | azimut=%.3f rad | modelo=%s", k, azimuth, kind)

    return models


def draw_true_channels(models: List[FadingModel], rng: np.random.Generator) -> np.ndarray:
    """Matriz (K, M) con una realización por UE."""
    return np.stack([m.sample(rng) for m in models])
