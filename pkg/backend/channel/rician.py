from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from backend.channel.base_fading import FadingModel
from backend.channel.rayleigh import CorrelatedRayleigh
from backend.errors import ConfigurationError


def ula_phases(antennas: int, azimuth: float) -> np.ndarray:
    """θ_m = π m sin φ̄ para m = 1..M−1 (fase relativa a la primera antena)."""
    return np.pi * np.arange(1, antennas) * np.sin(azimuth)


class Rician(FadingModel):
    """
    h = sqrt(κ/(κ+1)) · √β · [1, e^{iθ_1}, ..., e^{iθ_{M−1}}] + sqrt(1/(κ+1)) · h_NLOS
    con h_NLOS ~ CN(0, R). Con κ = 0 es exactamente CorrelatedRayleigh(R).
    """

    def __init__(
        self,
        rician_factor: float,
        correlation: np.ndarray,
        los_phases: Optional[Sequence[float]] = None,
        gain: Optional[float] = None,
        azimuth: float = 0.0,
    ):
        if rician_factor < 0:
            raise ConfigurationError(f"El factor de Rice debe ser >= 0: {rician_factor}")

        self.rician_factor = float(rician_factor)
        self.scatter = CorrelatedRayleigh(correlation)
        self.antennas = self.scatter.antennas
        self.gain = float(gain) if gain is not None else float(np.real(np.trace(self.scatter.R)) / self.antennas)

        if los_phases is None:
            los_phases = ula_phases(self.antennas, azimuth)
        los_phases = np.asarray(los_phases, dtype=float)
        if los_phases.shape != (self.antennas - 1,):
            raise ConfigurationError(
                f"Se esperaban {self.antennas - 1} fases LOS, llegaron {los_phases.shape}"
            )

        self.los = np.sqrt(self.gain) * np.exp(1j * np.concatenate([[0.0], los_phases]))

    @property
    def _los_weight(self) -> float:
        k = self.rician_factor
        return float(np.sqrt(k / (k + 1.0)))

    @property
    def _nlos_weight(self) -> float:
        return float(np.sqrt(1.0 / (self.rician_factor + 1.0)))

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        scattered = self.scatter.nlos(rng, size)
        return self._los_weight * self.los + self._nlos_weight * scattered

    def mean(self) -> np.ndarray:
        return self._los_weight * self.los

    def covariance(self) -> np.ndarray:
        return self._nlos_weight**2 * self.scatter.R
