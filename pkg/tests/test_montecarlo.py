import numpy as np
import pytest

from backend.channel import EstimationSpec
from backend.montecarlo import (
    binomial_stderr,
    empirical_outage,
    estimation_sweep,
    histogram_rows,
    write_histogram_csv,
)
from backend.precoding import PrecoderSet, mrt_directions

H = np.array([[1.0, 0.5j, -0.2, 0.1]])
SPEC = EstimationSpec(uplink_power=1.0, pilot_length=1, noise_power=0.05)


def _precoders(power):
    return PrecoderSet(directions=mrt_directions(H), powers=[power])


def test_zero_target_never_outage():
    out = empirical_outage(_precoders(1.0), H, SPEC, [0.0], 5000, np.random.default_rng(0), noise_power=1.0)
    assert out.tolist() == [0.0]


def test_huge_power_no_outage():
    out = empirical_outage(_precoders(1e6), H, SPEC, [1.0], 5000, np.random.default_rng(0), noise_power=1.0)
    assert out[0] == 0.0


def test_outage_deterministic_and_chunk_independent_in_law():
    a = empirical_outage(_precoders(1.0), H, SPEC, [1.0], 20_000, np.random.default_rng(1), noise_power=1.0)
    b = empirical_outage(_precoders(1.0), H, SPEC, [1.0], 20_000, np.random.default_rng(1), noise_power=1.0)
    c = empirical_outage(_precoders(1.0), H, SPEC, [1.0], 20_000, np.random.default_rng(1), noise_power=1.0, chunk=999)
    assert np.array_equal(a, b)
    assert abs(a[0] - c[0]) < 5 * binomial_stderr(a[0], 20_000) + 1e-3


def test_sweep_without_estimation_error():
    c = 0.3
    h = np.array([c, 0.0, 0.0, 0.0])
    spec = EstimationSpec(uplink_power=1.0, pilot_length=1, noise_power=0.0)
    res = estimation_sweep(h, spec, 2.0, 1.0, 1000, np.random.default_rng(0), noise_power=0.1, keep_samples=True)
    assert np.allclose(res.samples, 2.0 * c**2 / 0.1)
    assert res.fraction in (0.0, 1.0)
    assert res.counts.sum() == 1000


def test_sweep_matches_empirical_fraction(rng):
    h = H[0]
    res = estimation_sweep(h, SPEC, 1.0, 1.0, 30_000, rng, noise_power=1.0, keep_samples=True, chunk=7000)
    assert res.samples.shape == (30_000,)
    assert res.fraction == pytest.approx(np.mean(res.samples < 1.0))
    assert res.stderr == pytest.approx(binomial_stderr(res.fraction, 30_000))


def test_histogram_dump(tmp_path, rng):
    res = estimation_sweep(H[0], SPEC, 1.0, 1.0, 2000, rng, noise_power=1.0)
    rows = histogram_rows(res)
    assert sum(r["count"] for r in rows) == 2000
    assert rows[0]["bin_hi_db"] == rows[1]["bin_lo_db"]
    path = write_histogram_csv(res, tmp_path / "h.csv")
    assert path.read_text().splitlines()[0] == "bin_lo_db,bin_hi_db,count"


def test_binomial_stderr_halves_with_four_times_trials():
    assert binomial_stderr(0.1, 400) == pytest.approx(2 * binomial_stderr(0.1, 1600))
