import numpy as np
import pytest

from backend.channel import (
    CorrelatedRayleigh,
    CorrelationSpec,
    EstimationSpec,
    Rician,
    build_fading_model,
    build_scenario_models,
    correlation_matrix,
    draw_error_set,
    draw_true_channels,
    ls_estimate,
    perturbed_channel_set,
    pilot_matrix,
)
from backend.channel.rician import ula_phases
from backend.errors import ConfigurationError


def _spec(**kw):
    base = dict(antennas=6, gain=2.0, azimuth=0.7, angular_std=np.deg2rad(5.0), clusters=10)
    base.update(kw)
    return CorrelationSpec(**base)


def test_correlation_is_hermitian_psd_with_gain_diagonal(rng):
    R = correlation_matrix(_spec(), rng)
    assert np.allclose(R, R.conj().T)
    assert np.allclose(np.diag(R).real, 2.0)
    assert np.min(np.linalg.eigvalsh(R)) > -1e-10


def test_fixed_cluster_angles_need_no_rng():
    spec = _spec(clusters=2, cluster_angles=(0.5, 0.9))
    assert np.array_equal(correlation_matrix(spec), correlation_matrix(spec))
    with pytest.raises(ConfigurationError):
        correlation_matrix(_spec())


def test_two_antenna_single_cluster_correlation():
    spec = CorrelationSpec(
        antennas=2, gain=1.0, azimuth=0.0, angular_std=np.pi / 36, clusters=1, cluster_angles=(0.0,)
    )
    R = correlation_matrix(spec)
    # exp(−½ (π/36)² π²) en broadside
    assert abs(R[0, 1]) == pytest.approx(0.9631, abs=1e-4)
    assert abs(R[0, 1]) == pytest.approx(np.exp(-0.5 * (np.pi**2 / 36) ** 2), rel=1e-12)


def test_rayleigh_empirical_covariance(rng):
    R = correlation_matrix(_spec(antennas=4, gain=1.0), rng)
    model = CorrelatedRayleigh(R)
    h = model.sample(rng, size=40_000)
    assert h.shape == (40_000, 4)
    emp = h.T @ h.conj() / h.shape[0]
    assert np.max(np.abs(emp - R)) < 0.05
    assert model.sample(rng).shape == (4,)


def test_rician_zero_factor_is_rayleigh():
    R = correlation_matrix(_spec(antennas=4, clusters=1, cluster_angles=(0.3,)))
    a = Rician(0.0, R, azimuth=0.3).sample(np.random.default_rng(5), size=10)
    b = CorrelatedRayleigh(R).sample(np.random.default_rng(5), size=10)
    assert np.allclose(a, b, rtol=0, atol=0)


def test_rician_mean_and_los_phases():
    R = correlation_matrix(_spec(antennas=4, clusters=1, cluster_angles=(0.3,)))
    model = Rician(10.0, R, gain=2.0, azimuth=0.3)
    mean = model.mean()
    assert np.allclose(np.abs(mean), np.sqrt(10.0 / 11.0) * np.sqrt(2.0))
    expected_phase = np.pi * np.arange(4) * np.sin(0.3)
    assert np.allclose(np.angle(mean * np.exp(-1j * expected_phase)), 0.0, atol=1e-12)
    assert np.allclose(model.covariance(), R / 11.0)


def test_rician_huge_factor_is_pure_los():
    gain, azimuth = 1e-11, 0.4
    R = correlation_matrix(_spec(antennas=4, gain=gain, clusters=1, cluster_angles=(azimuth,)))
    h = Rician(1e12, R, gain=gain, azimuth=azimuth).sample(np.random.default_rng(9))
    los = np.sqrt(gain) * np.exp(1j * np.concatenate([[0.0], ula_phases(4, azimuth)]))
    assert np.allclose(h, los, rtol=0, atol=1e-5 * np.sqrt(gain))


def test_factory_rejects_unknown_model():
    with pytest.raises(ConfigurationError):
        build_fading_model("nakagami", np.eye(2))


def test_scenario_models_have_expected_power(rng):
    models = build_scenario_models(
        kind="rayleigh", antennas=4, users=3, gain=1e-3,
        angular_std=np.deg2rad(5.0), clusters=10, rician_factor=1.0, rng=rng,
    )
    assert len(models) == 3
    for m in models:
        assert np.trace(m.covariance()).real == pytest.approx(4e-3)
    assert draw_true_channels(models, rng).shape == (3, 4)


def test_pilots_are_orthogonal():
    P = pilot_matrix(3, 5)
    assert np.allclose(P.conj().T @ P, 5 * np.eye(3))
    with pytest.raises(ConfigurationError):
        pilot_matrix(3, 2)


def test_ls_estimate_without_noise_is_exact(rng):
    H = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    spec = EstimationSpec(uplink_power=0.1, pilot_length=3, noise_power=0.0)
    est = ls_estimate(H, pilot_matrix(2, 3), spec, rng)
    assert np.allclose(est, H)


def test_ls_error_variance(rng):
    H = np.ones((2, 4), dtype=complex)
    spec = EstimationSpec(uplink_power=0.5, pilot_length=2, noise_power=0.2)
    pilots = pilot_matrix(2, 2)
    errs = np.concatenate([ls_estimate(H, pilots, spec, rng) - H for _ in range(3000)])
    assert spec.error_variance == pytest.approx(0.2)
    assert np.mean(np.abs(errs) ** 2) == pytest.approx(0.2, rel=0.05)


def test_error_set_and_perturbed_channels(rng):
    spec = EstimationSpec(uplink_power=1.0, pilot_length=1, noise_power=0.5)
    errors = draw_error_set(spec, 20_000, 3, rng)
    assert errors.size == 20_000 and errors.antennas == 3
    assert errors.empirical_variance() == pytest.approx(errors.variance, rel=0.03)

    est = np.array([1.0, 2.0j, -1.0])
    H = perturbed_channel_set(est, errors)
    assert H.shape == (20_000, 3)
    assert np.allclose(H - est, errors.samples, atol=1e-12)

    with pytest.raises(ConfigurationError):
        perturbed_channel_set(np.ones(4), errors)
