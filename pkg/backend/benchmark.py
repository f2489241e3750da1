"""
Benchmark robusto de peor caso para un solo UE.

Con la incertidumbre acotada a una bola ‖e‖ <= ε alrededor de ĥ, el óptimo
es MRT sobre ĥ con potencia γ_tar·σ_v²/(‖ĥ‖ − ε)².
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from backend.channel.estimation import ErrorSet
from backend.channel.rayleigh import complex_normal
from backend.errors import ConfigurationError, InfeasibleError, InsufficientSamplesError
from backend.evt import empirical_quantile
from backend.precoding import PrecoderSet, mrt_directions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WorstCaseSpec:
    radius: float
    outage_target: float
    sinr_target: float
    noise_power: float
    shape: float = 1.0  # Υ; solo la esfera

    def __post_init__(self):
        if self.radius < 0:
            raise ConfigurationError(f"El radio ε debe ser >= 0: {self.radius}")
        if self.shape != 1.0:
            raise ConfigurationError("Solo se soporta incertidumbre esférica (Υ = 1)")
        if not 0.0 < self.outage_target < 1.0:
            raise ConfigurationError(f"ζ debe estar en (0,1): {self.outage_target}")
        if not self.noise_power > 0:
            raise ConfigurationError(f"noise_power debe ser > 0: {self.noise_power}")


def radius_from_errors(errors: ErrorSet, outage_target: float) -> float:
    """ε = cuantil (1−ζ) de las normas ‖e_n‖; exige N >= 1/ζ."""
    if not 0.0 < outage_target < 1.0:
        raise ConfigurationError(f"ζ debe estar en (0,1): {outage_target}")
    if errors.size * outage_target < 1.0:
        raise InsufficientSamplesError(
            f"El radio necesita N >= 1/ζ = {1.0 / outage_target:.0f} muestras, hay {errors.size}"
        )
    norms = np.linalg.norm(errors.samples, axis=1)
    return empirical_quantile(norms, 1.0 - outage_target)


def worst_case_power(estimate, radius: float, sinr_target: float, noise_power: float) -> float:
    h_norm = float(np.linalg.norm(estimate))
    if radius < 0:
        raise ConfigurationError(f"El radio ε debe ser >= 0: {radius}")
    if radius >= h_norm:
        raise InfeasibleError(f"ε={radius:.3e} >= ‖ĥ‖={h_norm:.3e}: el peor canal anula el enlace")
    return float(sinr_target * noise_power / (h_norm - radius) ** 2)


def worst_case_sinr(weight, estimate, radius: float, noise_power: float) -> float:
    """min sobre ‖e‖<=ε de |(ĥ+e)^H w|²/σ_v²."""
    weight = np.asarray(weight, dtype=complex).ravel()
    estimate = np.asarray(estimate, dtype=complex).ravel()
    margin = abs(np.vdot(estimate, weight)) - radius * np.linalg.norm(weight)
    return float(max(margin, 0.0) ** 2 / noise_power)


def worst_case_precoder(estimate, radius: float, sinr_target: float, noise_power: float) -> PrecoderSet:
    power = worst_case_power(estimate, radius, sinr_target, noise_power)
    return PrecoderSet(directions=mrt_directions(estimate), powers=[power])


def worst_case_from_spec(estimate, spec: WorstCaseSpec) -> PrecoderSet:
    return worst_case_precoder(estimate, spec.radius, spec.sinr_target, spec.noise_power)


def sphere_samples(antennas: int, radius: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Puntos uniformes sobre la esfera compleja de radio ε en C^M, (size, M)."""
    g = complex_normal(rng, (size, antennas), 1.0)
    return radius * g / np.linalg.norm(g, axis=1)[:, None]
