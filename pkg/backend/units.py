from __future__ import annotations

import numpy as np

# Densidad espectral de ruido térmico a 290 K [dBm/Hz]
THERMAL_NOISE_DBM_HZ = -173.8


def db_to_linear(x_db):
    return np.power(10.0, np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watts(x_dbm):
    return np.power(10.0, (np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(x_w):
    # 0 W -> -inf dBm
    return linear_to_db(x_w) + 30.0


def noise_power_watts(bandwidth_hz: float, noise_figure_db: float) -> float:
    """
    Potencia de ruido σ_n² en watts:
    -173.8 + 10·log10(BW) + NF [dBm]
    """
    if bandwidth_hz <= 0:
        raise ValueError(f"Ancho de banda inválido: {bandwidth_hz}")
    noise_dbm = THERMAL_NOISE_DBM_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db
    return float(dbm_to_watts(noise_dbm))
