from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from backend.channel.rayleigh import complex_normal
from backend.errors import ConfigurationError


@dataclass(frozen=True)
class EstimationSpec:
    """
    Estimación LS con pilotos ortogonales.
    uplink_power [W], pilot_length [símbolos], noise_power σ_n² [W].
    """

    uplink_power: float
    pilot_length: int
    noise_power: float

    def __post_init__(self):
        if not self.uplink_power > 0:
            raise ConfigurationError(f"uplink_power debe ser > 0: {self.uplink_power}")
        if self.pilot_length < 1:
            raise ConfigurationError(f"pilot_length debe ser >= 1: {self.pilot_length}")
        if self.noise_power < 0:
            raise ConfigurationError(f"noise_power debe ser >= 0: {self.noise_power}")

    @property
    def error_variance(self) -> float:
        """σ_e² = σ_n² / (p_ul · τ_e) por entrada."""
        return self.noise_power / (self.uplink_power * self.pilot_length)


@dataclass(frozen=True)
class ErrorSet:
    """N vectores de error de estimación guardados (filas de samples)."""

    samples: np.ndarray
    spec: EstimationSpec

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ConfigurationError(f"ErrorSet necesita forma (N>=1, M), llegó {self.samples.shape}")

    @property
    def size(self) -> int:
        return self.samples.shape[0]

    @property
    def antennas(self) -> int:
        return self.samples.shape[1]

    @property
    def variance(self) -> float:
        return self.spec.error_variance

    def empirical_variance(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


def pilot_matrix(users: int, pilot_length: int) -> np.ndarray:
    """
    Columnas DFT escaladas: ortogonales entre sí y con ‖s_k‖² = τ_e.
    """
    if pilot_length < users:
        raise ConfigurationError(
            f"pilot_length={pilot_length} < users={users}: contaminación de pilotos no modelada"
        )
    n = np.arange(pilot_length)[:, None]
    k = np.arange(users)[None, :]
    return np.exp(-2j * np.pi * n * k / pilot_length)


def ls_estimate(
    channels: np.ndarray,
    pilots: np.ndarray,
    spec: EstimationSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Y = √p_ul Σ_k h_k s_k^H + V,  ĥ_k = Y s_k / (√p_ul τ_e).

    channels: (K, M). Devuelve (K, M).
    """
    channels = np.atleast_2d(channels)
    users, antennas = channels.shape
    tau = pilots.shape[0]

    if pilots.shape[1] != users:
        raise ConfigurationError(f"Pilotos para {pilots.shape[1]} UEs, canales para {users}")
    if tau != spec.pilot_length:
        raise ConfigurationError(f"Pilotos de largo {tau}, spec dice {spec.pilot_length}")

    sqrt_p = np.sqrt(spec.uplink_power)
    H = channels.T  # (M, K)
    V = complex_normal(rng, (antennas, tau), spec.noise_power)
    Y = sqrt_p * H @ pilots.conj().T + V

    estimates = (Y @ pilots) / (sqrt_p * tau)
    return estimates.T


def draw_error_set(spec: EstimationSpec, size: int, antennas: int, rng: np.random.Generator) -> ErrorSet:
    if size < 1:
        raise ConfigurationError(f"size debe ser >= 1: {size}")
    samples = complex_normal(rng, (size, antennas), spec.error_variance)
    return ErrorSet(samples=samples, spec=spec)


def perturbed_channel_set(estimate: np.ndarray, errors: ErrorSet) -> np.ndarray:
    """ℋ_k: fila n = ĥ_k + e_n."""
    estimate = np.asarray(estimate)
    if estimate.ndim != 1 or estimate.shape[0] != errors.antennas:
        raise ConfigurationError(
            f"Dimensión del estimado {estimate.shape} no coincide con M={errors.antennas}"
        )
    return estimate[None, :] + errors.samples
