from __future__ import annotations

from typing import Optional

import numpy as np

from backend.channel.base_fading import FadingModel
from backend.errors import ConfigurationError


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Muestras i.i.d. CN(0, variance)."""
    draws = rng.standard_normal((*np.atleast_1d(shape), 2))
    return np.sqrt(variance / 2.0) * (draws[..., 0] + 1j * draws[..., 1])


def _psd_sqrt(R: np.ndarray) -> np.ndarray:
    # A tal que A A^H = R; autovalores negativos de redondeo se recortan a 0
    eigval, eigvec = np.linalg.eigh(R)
    return eigvec * np.sqrt(np.clip(eigval, 0.0, None))[None, :]


class CorrelatedRayleigh(FadingModel):
    """h ~ CN(0, R)."""

    def __init__(self, correlation: np.ndarray):
        R = np.asarray(correlation, dtype=complex)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ConfigurationError(f"R debe ser cuadrada, llegó {R.shape}")
        self.R = R
        self.antennas = R.shape[0]
        self._sqrt = _psd_sqrt(R)

    def nlos(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        n = 1 if size is None else int(size)
        w = complex_normal(rng, (n, self.antennas))
        h = w @ self._sqrt.T
        return h[0] if size is None else h

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        return self.nlos(rng, size)

    def mean(self) -> np.ndarray:
        return np.zeros(self.antennas, dtype=complex)

    def covariance(self) -> np.ndarray:
        return self.R.copy()
