"""
Peaks-over-threshold sobre la SINR transformada.

Pipeline por UE:
    SINR (lineal) -> ψ = 10·log10(1/γ) -> umbral μ (cuantil ρ)
    -> excesos ψ − μ -> ajuste GPD por máxima verosimilitud + bandas Wald
    -> cota de outage (1−ρ)(1 + ξ/υ (φ−μ))^(−1/ξ)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from backend.errors import (
    ConfigurationError,
    DegenerateTailError,
    DomainError,
    FitConvergenceError,
    InsufficientSamplesError,
)

logger = logging.getLogger(__name__)

MIN_EXCESS_COUNT = 30
EXPONENTIAL_LIMIT = 1e-8

# Región de búsqueda del shape; fuera de ella el log-likelihood no es útil
_SHAPE_BOUNDS = (-0.99, 10.0)
_BARRIER = 1e20


@dataclass(frozen=True)
class TailConfig:
    quantile: float = 0.95
    confidence: float = 0.8
    min_excess: int = MIN_EXCESS_COUNT
    max_restarts: int = 5

    def __post_init__(self):
        if not 0.0 < self.quantile < 1.0:
            raise ConfigurationError(f"quantile debe estar en (0,1): {self.quantile}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigurationError(f"confidence debe estar en (0,1): {self.confidence}")
        if self.min_excess < 1:
            raise ConfigurationError(f"min_excess debe ser >= 1: {self.min_excess}")

    def check_sample_size(self, size: int) -> None:
        if size * (1.0 - self.quantile) < self.min_excess:
            raise InsufficientSamplesError(
                f"N={size} con ρ={self.quantile} deja menos de {self.min_excess} excesos"
            )


@dataclass(frozen=True)
class GpdParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"El scale de la GPD debe ser > 0: {self.scale}")


@dataclass(frozen=True)
class GpdFit:
    mle: GpdParams
    lower: GpdParams
    upper: GpdParams
    threshold: float
    excess_count: int
    confidence: float
    log_likelihood: float = float("nan")
    stderr: Tuple[float, float] = (float("nan"), float("nan"))  # (ξ, υ)


@dataclass(frozen=True)
class TailOutage:
    lower: float
    mle: float
    upper: float
    fit: GpdFit = field(repr=False)


# ---------------------------
# Transformación y umbral
# ---------------------------

def psi_transform(samples, target: float) -> Tuple[np.ndarray, float]:
    """ψ_n = 10log10(1/γ_n), φ = 10log10(1/γ_tar), ambos en dB."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0 or np.any(~(samples > 0)):
        raise DomainError("Las muestras de SINR deben ser > 0")
    if not target > 0:
        raise DomainError(f"γ_tar debe ser > 0: {target}")
    return -10.0 * np.log10(samples), float(-10.0 * np.log10(target))


def _order_index(size: int, quantile: float) -> int:
    # índice 1-based ⌈Nρ⌉; el redondeo evita que 10⁴·0.95 caiga en 9500.000000000002
    return max(1, math.ceil(round(size * quantile, 9)))


def empirical_quantile(values, quantile: float) -> float:
    """Cuantil empírico tipo 1: el estadístico de orden ⌈Nq⌉."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise InsufficientSamplesError("Sin muestras para el cuantil")
    return float(np.sort(values)[_order_index(values.size, quantile) - 1])


def threshold(
    psi,
    quantile: float,
    min_excess: int = MIN_EXCESS_COUNT,
) -> Tuple[float, np.ndarray]:
    """
    μ = ψ_(⌈Nρ⌉) (cuantil empírico tipo 1) y los índices con ψ > μ.
    """
    psi = np.asarray(psi, dtype=float)
    size = psi.size
    if size * (1.0 - quantile) < min_excess:
        raise InsufficientSamplesError(
            f"N={size} con ρ={quantile} deja menos de {min_excess} excesos"
        )
    if np.ptp(psi) == 0:
        raise DegenerateTailError("Todas las muestras ψ son iguales")

    mu = empirical_quantile(psi, quantile)
    idx = np.flatnonzero(psi > mu)
    if idx.size < min_excess:
        raise DegenerateTailError(f"Solo {idx.size} excesos estrictos sobre μ (empates)")
    return mu, idx


# ---------------------------
# GPD
# ---------------------------

def _log_survival(z: np.ndarray, params: GpdParams) -> np.ndarray:
    """log(1 − F(z)); −inf más allá del extremo del soporte."""
    xi, scale = params.shape, params.scale
    x = z / scale
    if abs(xi) < EXPONENTIAL_LIMIT:
        return -x
    t = xi * x
    out = np.full_like(x, -np.inf, dtype=float)
    inside = t > -1.0
    out[inside] = -np.log1p(t[inside]) / xi
    return out


def _check_args(z, params: GpdParams) -> np.ndarray:
    if not params.scale > 0:
        raise DomainError(f"El scale de la GPD debe ser > 0: {params.scale}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("La GPD se evalúa solo para z >= 0")
    return z


def gpd_cdf(z, params: GpdParams):
    """F(z) = 1 − (1 + ξz/υ)^(−1/ξ); límite exponencial si |ξ| < 1e-8."""
    z = _check_args(z, params)
    out = -np.expm1(_log_survival(np.atleast_1d(z), params))
    return float(out[0]) if z.ndim == 0 else out


def gpd_sf(z, params: GpdParams):
    """1 − F(z) sin cancelación."""
    z = _check_args(z, params)
    out = np.exp(_log_survival(np.atleast_1d(z), params))
    return float(out[0]) if z.ndim == 0 else out


def _neg_log_likelihood(shape: float, scale: float, excesses: np.ndarray) -> float:
    if not scale > 0 or not _SHAPE_BOUNDS[0] < shape < _SHAPE_BOUNDS[1]:
        return _BARRIER
    x = excesses / scale
    n = excesses.size
    if shape == 0.0:
        return float(n * np.log(scale) + np.sum(x))
    t = shape * x
    if np.any(t <= -1.0):
        return _BARRIER
    logs = np.log1p(t)
    total = np.sum(logs)
    return float(n * np.log(scale) + total / shape + total)


def _pwm_start(excesses: np.ndarray) -> Tuple[float, float]:
    """Arranque por momentos ponderados (probability-weighted moments)."""
    x = np.sort(excesses)
    n = x.size
    a0 = float(np.mean(x))
    weights = (n - np.arange(1, n + 1)) / (n - 1)
    a1 = float(np.mean(weights * x))
    denom = a0 - 2.0 * a1

    if denom > 0 and a0 > 0:
        shape = 2.0 - a0 / denom
        scale = 2.0 * a0 * a1 / denom
    else:
        shape, scale = 0.1, max(a0, 1e-12)

    shape = float(np.clip(shape, -0.45, 0.9))
    scale = float(scale) if scale > 0 else max(a0, 1e-12)
    if shape < 0 and 1.0 + shape * x[-1] / scale <= 0:
        scale = -shape * x[-1] * 1.1
    return shape, scale


def _observed_information(shape: float, scale: float, excesses: np.ndarray) -> Optional[np.ndarray]:
    """Hessiano del −log-likelihood en (ξ, υ) por diferencias centrales."""
    theta = np.array([shape, scale])
    steps = np.array([1e-4, 1e-4 * scale])

    def f(v):
        return _neg_log_likelihood(float(v[0]), float(v[1]), excesses)

    f0 = f(theta)
    H = np.empty((2, 2))
    for i in range(2):
        e_i = np.zeros(2)
        e_i[i] = steps[i]
        H[i, i] = (f(theta + e_i) - 2.0 * f0 + f(theta - e_i)) / steps[i] ** 2
    e0 = np.array([steps[0], 0.0])
    e1 = np.array([0.0, steps[1]])
    H[0, 1] = H[1, 0] = (
        f(theta + e0 + e1) - f(theta + e0 - e1) - f(theta - e0 + e1) + f(theta - e0 - e1)
    ) / (4.0 * steps[0] * steps[1])

    if not np.all(np.isfinite(H)) or np.any(np.abs(H) >= _BARRIER / 10):
        return None
    if np.any(np.linalg.eigvalsh(H) <= 0):
        return None
    return H


def _expected_covariance(shape: float, scale: float, n: int) -> np.ndarray:
    xi = max(shape, -0.45)
    return (1.0 + xi) / n * np.array([[1.0 + xi, -scale], [-scale, 2.0 * scale**2]])


def gpd_fit(
    excesses,
    confidence: float,
    min_excess: int = MIN_EXCESS_COUNT,
    max_restarts: int = 5,
    seed: int = 0,
) -> GpdFit:
    """
    MLE de (ξ, υ) sobre los excesos + intervalos Wald por parámetro al nivel Γ.

    Optimiza en (ξ, log υ) con Nelder-Mead; el soporte se impone con barrera.
    """
    z = np.asarray(excesses, dtype=float).ravel()
    n = z.size
    if n < min_excess:
        raise InsufficientSamplesError(f"Solo {n} excesos, se necesitan {min_excess}")
    if np.any(z < 0):
        raise DomainError("Los excesos deben ser >= 0")
    if not 0.0 < confidence < 1.0:
        raise ConfigurationError(f"confidence debe estar en (0,1): {confidence}")
    if np.ptp(z) == 0:
        raise DegenerateTailError("Excesos constantes, la GPD no es identificable")

    def objective(v):
        return _neg_log_likelihood(float(v[0]), float(np.exp(v[1])), z)

    shape0, scale0 = _pwm_start(z)
    start = np.array([shape0, np.log(scale0)])
    f0 = objective(start)
    options = {
        "xatol": 1e-9,
        "fatol": 1e-12 * max(1.0, abs(f0)),
        "maxiter": 4000,
        "maxfev": 8000,
    }

    rng = np.random.default_rng(seed)
    best = None
    for attempt in range(max_restarts + 1):
        x0 = start if attempt == 0 else start + rng.normal(0.0, [0.1, 0.3])
        if best is not None and attempt == 1:
            # un reinicio desde el mejor punto pule el simplex colapsado
            x0 = best.x
        res = minimize(objective, x0, method="Nelder-Mead", options=options)
        if np.isfinite(res.fun) and res.fun < _BARRIER and (best is None or res.fun < best.fun):
            best = res
        if best is not None and best.success and attempt >= 1:
            break
        logger.debug("GPD fit intento %s | fun=%s | success=%s", attempt, res.fun, res.success)

    if best is None or not best.fun < _BARRIER:
        raise FitConvergenceError(f"El ajuste GPD no convergió tras {max_restarts} reinicios")

    shape = float(best.x[0])
    scale = float(np.exp(best.x[1]))

    H = _observed_information(shape, scale, z)
    if H is not None:
        cov = np.linalg.inv(H)
    else:
        logger.debug("Información observada no PD, uso la esperada | n=%s ξ=%.4f", n, shape)
        cov = _expected_covariance(shape, scale, n)

    se_shape, se_scale = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    q = float(norm.ppf(0.5 + confidence / 2.0))

    lower = GpdParams(shape - q * se_shape, max(scale - q * se_scale, scale * 1e-6))
    upper = GpdParams(shape + q * se_shape, scale + q * se_scale)

    return GpdFit(
        mle=GpdParams(shape, scale),
        lower=lower,
        upper=upper,
        threshold=float("nan"),
        excess_count=n,
        confidence=confidence,
        log_likelihood=-float(best.fun),
        stderr=(float(se_shape), float(se_scale)),
    )


def outage_bound(params: GpdParams, phi: float, mu: float, quantile: float) -> float:
    """
    (1−ρ)(1 + ξ/υ (φ−μ))^(−1/ξ).

    Con φ <= μ satura en 1−ρ: la GPD solo describe la cola sobre μ.
    """
    if not params.scale > 0:
        raise DomainError(f"El scale de la GPD debe ser > 0: {params.scale}")
    distance = phi - mu
    if distance <= 0:
        return 1.0 - quantile
    return float((1.0 - quantile) * gpd_sf(distance, params))


def tail_outage(psi, phi: float, tail: TailConfig, seed: int = 0) -> TailOutage:
    """Umbral -> excesos -> ajuste -> cotas inferior / MLE / superior."""
    mu, idx = threshold(psi, tail.quantile, tail.min_excess)
    excesses = np.asarray(psi, dtype=float)[idx] - mu
    fit = gpd_fit(
        excesses,
        tail.confidence,
        min_excess=tail.min_excess,
        max_restarts=tail.max_restarts,
        seed=seed,
    )
    fit = GpdFit(
        mle=fit.mle,
        lower=fit.lower,
        upper=fit.upper,
        threshold=mu,
        excess_count=fit.excess_count,
        confidence=fit.confidence,
        log_likelihood=fit.log_likelihood,
        stderr=fit.stderr,
    )
    return TailOutage(
        lower=outage_bound(fit.lower, phi, mu, tail.quantile),
        mle=outage_bound(fit.mle, phi, mu, tail.quantile),
        upper=outage_bound(fit.upper, phi, mu, tail.quantile),
        fit=fit,
    )
