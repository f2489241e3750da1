import numpy as np
import pytest

from backend.units import (
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    noise_power_watts,
    watts_to_dbm,
)


def test_dbm_watts_reference_points():
    assert float(dbm_to_watts(30.0)) == pytest.approx(1.0)
    assert float(dbm_to_watts(0.0)) == pytest.approx(1e-3)
    assert float(watts_to_dbm(1e-3)) == pytest.approx(0.0, abs=1e-12)


def test_dbm_round_trip_within_tolerance():
    values = np.linspace(-60.0, 60.0, 241)
    back = watts_to_dbm(dbm_to_watts(values))
    assert np.max(np.abs(back - values)) < 1e-10


def test_zero_watts_is_minus_infinity():
    assert float(watts_to_dbm(0.0)) == -np.inf


def test_db_linear_round_trip():
    assert float(db_to_linear(10.0)) == pytest.approx(10.0)
    assert float(linear_to_db(100.0)) == pytest.approx(20.0)


def test_noise_power_table_parameters():
    expected_dbm = -173.8 + 10 * np.log10(60e3) + 7.0
    sigma2 = noise_power_watts(60e3, 7.0)
    assert sigma2 == pytest.approx(10 ** ((expected_dbm - 30.0) / 10.0), rel=1e-12)
    assert sigma2 == pytest.approx(1.2536e-15, rel=1e-3)


def test_noise_power_rejects_bad_bandwidth():
    with pytest.raises(ValueError):
        noise_power_watts(0.0, 7.0)
