"""
Configuración de escenarios.

Archivo plano KEY=value (python-dotenv), claves = nombres de campo sin
importar mayúsculas. Potencias en dBm, ganancias en dB, ángulos en grados.
Precedencia: defaults < archivo < overrides explícitos (CLI / body de la API).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from backend.allocator import AllocConfig
from backend.channel.estimation import EstimationSpec
from backend.errors import ConfigurationError
from backend.evt import TailConfig
from backend.precoding import SinrTargetSpec, sinr_target
from backend.units import db_to_linear, dbm_to_watts, noise_power_watts

logger = logging.getLogger(__name__)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    # Arreglo y usuarios
    antennas: int = 8
    users: int = 1

    # Canal
    channel_model: Literal["rayleigh", "rician"] = "rayleigh"
    rician_factor_db: float = 0.0
    gain_db: float = -115.0
    angular_std_deg: float = 5.0
    clusters: int = 10

    # Trama y estimación
    frame_length: int = 42
    pilot_length: int = 1
    payload_bits: float = 256.0
    uplink_power_dbm: float = 20.0
    bandwidth_hz: float = 60e3
    noise_figure_db: float = 7.0

    # EVT
    samples: int = 10_000
    quantile: float = 0.95
    confidence: float = 0.8
    min_excess: int = 30
    outage_targets: List[float] = [1e-3]

    # Asignación
    p_min_dbm: float = -30.0
    p_max_dbm: float = 47.0
    delta_p_dbm: float = -25.0
    method: Literal["mrt", "zf"] = "mrt"
    search: Literal["bisect", "linear"] = "bisect"

    # Monte Carlo / barridos
    trials: int = 100_000
    seed: int = 0
    scenarios: int = 50

    @field_validator("outage_targets", mode="before")
    @classmethod
    def _split_targets(cls, v: Any):
        if isinstance(v, str):
            return [float(p) for p in v.replace(";", ",").split(",") if p.strip()]
        if isinstance(v, (int, float)):
            return [float(v)]
        return v

    @field_validator("channel_model", "method", "search", mode="before")
    @classmethod
    def _lower(cls, v: Any):
        return v.strip().lower() if isinstance(v, str) else v

    @model_validator(mode="after")
    def _check_ranges(self):
        positive = {
            "antennas": self.antennas,
            "users": self.users,
            "clusters": self.clusters,
            "frame_length": self.frame_length,
            "pilot_length": self.pilot_length,
            "samples": self.samples,
            "trials": self.trials,
            "scenarios": self.scenarios,
            "min_excess": self.min_excess,
            "bandwidth_hz": self.bandwidth_hz,
            "angular_std_deg": self.angular_std_deg,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} debe ser > 0: {value}")

        if self.payload_bits < 0:
            raise ValueError(f"payload_bits debe ser >= 0: {self.payload_bits}")
        if self.seed < 0:
            raise ValueError(f"seed debe ser >= 0: {self.seed}")
        if self.pilot_length >= self.frame_length:
            raise ValueError(f"pilot_length={self.pilot_length} debe ser < frame_length={self.frame_length}")
        if self.pilot_length < self.users:
            raise ValueError(f"pilot_length={self.pilot_length} < users={self.users}: pilotos no ortogonales")
        if self.method == "zf" and self.users > self.antennas:
            raise ValueError(f"ZF necesita users <= antennas ({self.users} > {self.antennas})")
        if not 0.0 < self.quantile < 1.0:
            raise ValueError(f"quantile debe estar en (0,1): {self.quantile}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence debe estar en (0,1): {self.confidence}")
        if self.samples * (1.0 - self.quantile) < self.min_excess:
            raise ValueError(
                f"samples={self.samples} con quantile={self.quantile} deja menos de {self.min_excess} excesos"
            )
        if self.p_min_dbm > self.p_max_dbm:
            raise ValueError(f"p_min_dbm={self.p_min_dbm} > p_max_dbm={self.p_max_dbm}")
        if len(self.outage_targets) not in (1, self.users):
            raise ValueError(f"outage_targets necesita 1 o {self.users} valores, tiene {len(self.outage_targets)}")
        if any(not 0.0 < z < 1.0 for z in self.outage_targets):
            raise ValueError(f"Cada ζ_k debe estar en (0,1): {self.outage_targets}")
        return self

    # ---------------------------
    # Derivados (unidades internas: watts, lineal, radianes)
    # ---------------------------

    @property
    def noise_power(self) -> float:
        """σ_n² = σ_v² en watts."""
        return noise_power_watts(self.bandwidth_hz, self.noise_figure_db)

    @property
    def uplink_power(self) -> float:
        return float(dbm_to_watts(self.uplink_power_dbm))

    @property
    def gain(self) -> float:
        return float(db_to_linear(self.gain_db))

    @property
    def rician_factor(self) -> float:
        return float(db_to_linear(self.rician_factor_db))

    @property
    def angular_std(self) -> float:
        return float(np.deg2rad(self.angular_std_deg))

    @property
    def sinr_target(self) -> float:
        return sinr_target(SinrTargetSpec(self.payload_bits, self.frame_length, self.pilot_length))

    @property
    def zetas(self) -> List[float]:
        if len(self.outage_targets) == 1:
            return [self.outage_targets[0]] * self.users
        return list(self.outage_targets)

    def estimation_spec(self) -> EstimationSpec:
        return EstimationSpec(
            uplink_power=self.uplink_power,
            pilot_length=self.pilot_length,
            noise_power=self.noise_power,
        )

    def tail_config(self) -> TailConfig:
        return TailConfig(quantile=self.quantile, confidence=self.confidence, min_excess=self.min_excess)

    def alloc_config(self, fit_seed: int = 0) -> AllocConfig:
        return AllocConfig(
            p_min=float(dbm_to_watts(self.p_min_dbm)),
            p_max=float(dbm_to_watts(self.p_max_dbm)),
            delta_p=float(dbm_to_watts(self.delta_p_dbm)),
            outage_targets=tuple(self.zetas),
            sinr_targets=(self.sinr_target,),
            noise_power=self.noise_power,
            tail=self.tail_config(),
            method=self.method,
            search=self.search,
            fit_seed=fit_seed,
        )

    def with_updates(self, **updates) -> "ScenarioConfig":
        return build_config({**self.model_dump(), **updates})


FIELD_NAMES = tuple(ScenarioConfig.model_fields)


def build_config(values: Dict[str, Any]) -> ScenarioConfig:
    """ScenarioConfig desde un dict; los errores de validación salen como ConfigurationError."""
    try:
        return ScenarioConfig(**values)
    except ValidationError as e:
        raise ConfigurationError(f"Configuración inválida: {e}") from e


def read_config_file(path) -> Dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"No existe el archivo de configuración: {path}")

    raw = dotenv_values(path)
    values: Dict[str, str] = {}
    for key, value in raw.items():
        name = key.strip().lower()
        if name not in FIELD_NAMES:
            raise ConfigurationError(f"Clave desconocida en {path.name}: {key}")
        if value is not None:
            values[name] = value
    return values


def load_config(path: Optional[str] = None, **overrides) -> ScenarioConfig:
    values: Dict[str, Any] = {}
    if path:
        values.update(read_config_file(path))
    values.update({k: v for k, v in overrides.items() if v is not None})

    config = build_config(values)
    logger.info(
        "✅ Configuración lista | M=%s | K=%s | canal=%s | τ_e=%s | N=%s | método=%s | origen=%s",
        config.antennas, config.users, config.channel_model, config.pilot_length,
        config.samples, config.method, path or "defaults",
    )
    return config
