from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from backend.errors import ConfigurationError

DEFAULT_CLUSTER_HALF_WIDTH = 2.0 * np.pi / 9.0


@dataclass(frozen=True)
class CorrelationSpec:
    """
    Modelo de scattering local (aproximación gaussiana, arreglo lineal con
    separación de media longitud de onda).

    - gain: β lineal (ya convertido desde dB)
    - azimuth, angular_std, cluster_half_width: radianes
    - cluster_angles: ángulos nominales fijos por cluster; si es None se
      sortean una vez con el rng que recibe correlation_matrix
    """

    antennas: int
    gain: float
    azimuth: float
    angular_std: float
    clusters: int = 1
    cluster_half_width: float = DEFAULT_CLUSTER_HALF_WIDTH
    cluster_angles: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.antennas < 1:
            raise ConfigurationError(f"antennas debe ser >= 1: {self.antennas}")
        if self.clusters < 1:
            raise ConfigurationError(f"clusters debe ser >= 1: {self.clusters}")
        if not self.angular_std > 0:
            raise ConfigurationError(f"angular_std debe ser > 0: {self.angular_std}")
        if not self.gain > 0:
            raise ConfigurationError(f"gain debe ser > 0: {self.gain}")
        if self.cluster_angles is not None and len(self.cluster_angles) != self.clusters:
            raise ConfigurationError(
                f"Se esperaban {self.clusters} ángulos de cluster, llegaron {len(self.cluster_angles)}"
            )


def draw_cluster_angles(spec: CorrelationSpec, rng: np.random.Generator) -> np.ndarray:
    lo = spec.azimuth - spec.cluster_half_width
    hi = spec.azimuth + spec.cluster_half_width
    return rng.uniform(lo, hi, size=spec.clusters)


def correlation_matrix(spec: CorrelationSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    [R]_{t,m} = β/L Σ_l exp(iπ(t−m) sin φ_l) · exp(−½ σ_φ² (π(t−m) cos φ_l)²)

    El exponente de amortiguamiento va al cuadrado: así R es hermítica y PSD.
    """
    if spec.cluster_angles is not None:
        angles = np.asarray(spec.cluster_angles, dtype=float)
    else:
        if rng is None:
            raise ConfigurationError("Sin cluster_angles fijos hace falta un rng")
        angles = draw_cluster_angles(spec, rng)

    idx = np.arange(spec.antennas)
    dist = (idx[:, None] - idx[None, :]).astype(float)

    # (L, M, M)
    phase = np.exp(1j * np.pi * dist[None, :, :] * np.sin(angles)[:, None, None])
    damping = np.exp(
        -0.5 * spec.angular_std**2 * (np.pi * dist[None, :, :] * np.cos(angles)[:, None, None]) ** 2
    )
    R = spec.gain * np.mean(phase * damping, axis=0)

    R = 0.5 * (R + R.conj().T)
    np.fill_diagonal(R, spec.gain)
    return R
