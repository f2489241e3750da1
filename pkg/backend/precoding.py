from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from backend.errors import ConfigurationError, DegenerateChannelError, DomainError, RankDeficientError

ZF_CONDITION_LIMIT = 1e10
UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PrecoderSet:
    """
    directions: (K, M), filas de norma 1
    powers: (K,) en watts
    """

    directions: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.directions, dtype=complex))
        p = np.atleast_1d(np.asarray(self.powers, dtype=float))
        if p.shape != (d.shape[0],):
            raise ConfigurationError(f"{d.shape[0]} direcciones y {p.shape} potencias")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ConfigurationError(f"Potencias inválidas: {p}")
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise ConfigurationError(f"Direcciones sin norma unitaria: {norms}")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "powers", p)

    @property
    def users(self) -> int:
        return self.directions.shape[0]

    @property
    def antennas(self) -> int:
        return self.directions.shape[1]

    @property
    def weights(self) -> np.ndarray:
        """w_k = √p_k u_k, (K, M)."""
        return np.sqrt(self.powers)[:, None] * self.directions

    @property
    def total_power(self) -> float:
        return float(np.sum(self.powers))

    def with_powers(self, powers) -> "PrecoderSet":
        return PrecoderSet(directions=self.directions, powers=np.asarray(powers, dtype=float))


@dataclass(frozen=True)
class SinrTargetSpec:
    payload_bits: float
    frame_length: int
    pilot_length: int

    def __post_init__(self):
        if self.pilot_length >= self.frame_length:
            raise ConfigurationError(
                f"pilot_length={self.pilot_length} debe ser < frame_length={self.frame_length}"
            )
        if self.payload_bits < 0:
            raise ConfigurationError(f"payload_bits debe ser >= 0: {self.payload_bits}")

    @property
    def downlink_length(self) -> int:
        return self.frame_length - self.pilot_length

    @property
    def rate(self) -> float:
        return self.payload_bits / self.downlink_length


def sinr_target(spec: SinrTargetSpec) -> float:
    """γ_tar = 2^(B/(τ_f − τ_e)) − 1, lineal."""
    return float(np.expm1(spec.rate * np.log(2.0)))


# ---------------------------
# Direcciones
# ---------------------------

def _as_matrix(estimates) -> np.ndarray:
    return np.atleast_2d(np.asarray(estimates, dtype=complex))


def mrt_directions(estimates) -> np.ndarray:
    H = _as_matrix(estimates)
    norms = np.linalg.norm(H, axis=1)
    if np.any(norms == 0):
        raise DegenerateChannelError(f"Estimado nulo para UE(s) {np.flatnonzero(norms == 0).tolist()}")
    return H / norms[:, None]


def zf_directions(estimates) -> np.ndarray:
    """
    [z_1 … z_K] = Ĥ (Ĥ^H Ĥ)^{-1}, con Ĥ = [ĥ_1 … ĥ_K] (M×K); u_k = z_k/‖z_k‖.
    """
    H = _as_matrix(estimates)
    users, antennas = H.shape
    if users > antennas:
        raise RankDeficientError(f"ZF necesita K <= M (K={users}, M={antennas})")

    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > ZF_CONDITION_LIMIT:
        raise RankDeficientError(f"Ĥ mal condicionada para ZF (cond={cond:.3e})")

    # pinv(Ĥ^H) = Ĥ (Ĥ^H Ĥ)^{-1} para rango columna completo
    Z = np.linalg.pinv(H.conj()).T  # filas z_k
    return Z / np.linalg.norm(Z, axis=1)[:, None]


def directions(estimates, method: str) -> np.ndarray:
    method = (method or "mrt").lower()
    if method == "mrt":
        return mrt_directions(estimates)
    if method == "zf":
        return zf_directions(estimates)
    raise ConfigurationError(f"Método de precoding no soportado: {method}")


# ---------------------------
# SINR
# ---------------------------

def _gains(channels: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """
    |h_n^H w_i|² para cada canal n y precoder i: (N, K).
    Producto elemento a elemento + suma sobre el último eje: el resultado de
    cada fila no depende de cuántas filas se evalúan juntas.
    """
    proj = np.sum(channels.conj()[:, None, :] * weights[None, :, :], axis=-1)
    return np.abs(proj) ** 2


def _sinr_from_gains(gains: np.ndarray, ue: int, noise_power: float) -> np.ndarray:
    mask = np.ones(gains.shape[1], dtype=bool)
    mask[ue] = False
    interference = np.sum(gains[:, mask], axis=1)
    return gains[:, ue] / (interference + noise_power)


def _check_noise(noise_power: float) -> None:
    if not noise_power > 0:
        raise DomainError(f"noise_power debe ser > 0: {noise_power}")


def sinr(precoders: PrecoderSet, channel, ue: int, noise_power: float) -> float:
    """SINR: |h^H w_k|² / (Σ_{i≠k} |h^H w_i|² + σ_v²)."""
    _check_noise(noise_power)
    h = np.asarray(channel, dtype=complex).reshape(1, -1)
    return float(_sinr_from_gains(_gains(h, precoders.weights), ue, noise_power)[0])


def sinr_samples(precoders: PrecoderSet, perturbed, ue: int, noise_power: float) -> np.ndarray:
    """SINR evaluada en cada canal de ℋ_k, mismo orden."""
    _check_noise(noise_power)
    H = np.atleast_2d(np.asarray(perturbed, dtype=complex))
    return _sinr_from_gains(_gains(H, precoders.weights), ue, noise_power)


def sinr_all(precoders: PrecoderSet, channels, noise_power: float) -> np.ndarray:
    """SINR de cada UE k evaluada en su propio canal channels[k]."""
    _check_noise(noise_power)
    H = np.atleast_2d(np.asarray(channels, dtype=complex))
    gains = _gains(H, precoders.weights)  # fila k = canal del UE k
    return np.array([_sinr_from_gains(gains[k:k + 1], k, noise_power)[0] for k in range(H.shape[0])])
