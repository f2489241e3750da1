import numpy as np
import pytest

from backend.benchmark import (
    WorstCaseSpec,
    radius_from_errors,
    sphere_samples,
    worst_case_from_spec,
    worst_case_power,
    worst_case_precoder,
    worst_case_sinr,
)
from backend.channel import ErrorSet, EstimationSpec, draw_error_set
from backend.errors import ConfigurationError, InfeasibleError, InsufficientSamplesError
from backend.precoding import sinr_samples

SPEC = EstimationSpec(uplink_power=1.0, pilot_length=1, noise_power=0.1)


def test_radius_is_norm_quantile(rng):
    errors = draw_error_set(SPEC, 101, 4, rng)
    norms = np.linalg.norm(errors.samples, axis=1)
    assert radius_from_errors(errors, 0.5) == pytest.approx(np.median(norms))


def test_radius_of_zero_errors():
    zeros = ErrorSet(samples=np.zeros((10, 3), dtype=complex), spec=SPEC)
    assert radius_from_errors(zeros, 0.5) == 0.0


def test_radius_needs_enough_samples(rng):
    with pytest.raises(InsufficientSamplesError):
        radius_from_errors(draw_error_set(SPEC, 100, 4, rng), 1e-3)


def test_closed_form_power():
    h = np.array([2.0, 0.0])
    assert worst_case_power(h, 0.0, 3.0, 0.5) == pytest.approx(3.0 * 0.5 / 4.0)
    assert worst_case_power(h, 1.0, 1.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(InfeasibleError):
        worst_case_power(h, 2.0, 1.0, 1.0)


def test_worst_case_sinr_examples():
    h = np.array([2.0, 0.0])
    w = np.array([1.0, 0.0])
    assert worst_case_sinr(w, h, 0.0, 0.5) == pytest.approx(8.0)
    assert worst_case_sinr(w, h, 1.0, 0.25) == pytest.approx(4.0)
    assert worst_case_sinr(w, h, 3.0, 1.0) == 0.0


def test_power_feeds_back_to_target(rng):
    h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    eps = 0.3 * np.linalg.norm(h)
    p = worst_case_precoder(h, eps, 2.5, 0.7)
    assert worst_case_sinr(p.weights[0], h, eps, 0.7) == pytest.approx(2.5, rel=1e-9)


def test_power_increases_with_radius_and_target():
    h = np.array([1.0, 1.0j, 0.5])
    radii = [worst_case_power(h, e, 1.0, 1.0) for e in (0.0, 0.2, 0.5, 1.0)]
    targets = [worst_case_power(h, 0.2, g, 1.0) for g in (0.5, 1.0, 4.0)]
    assert all(a < b for a, b in zip(radii, radii[1:]))
    assert all(a < b for a, b in zip(targets, targets[1:]))


def test_closed_form_lower_bounds_sphere_samples(rng):
    for _ in range(100):
        m = int(rng.integers(2, 17))
        h = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        eps = float(rng.uniform(0.05, 0.9)) * np.linalg.norm(h)
        p = worst_case_precoder(h, eps, 1.0, 0.3)
        errors = sphere_samples(m, eps, 10_000, rng)
        assert np.allclose(np.linalg.norm(errors, axis=1), eps)
        s = sinr_samples(p, h[None, :] + errors, 0, 0.3)
        assert s.min() >= worst_case_sinr(p.weights[0], h, eps, 0.3) - 1e-9


def test_spec_validation_and_helper():
    with pytest.raises(ConfigurationError):
        WorstCaseSpec(radius=0.1, outage_target=1e-3, sinr_target=1.0, noise_power=1.0, shape=2.0)
    with pytest.raises(ConfigurationError):
        WorstCaseSpec(radius=-0.1, outage_target=1e-3, sinr_target=1.0, noise_power=1.0)
    spec = WorstCaseSpec(radius=0.0, outage_target=1e-3, sinr_target=1.0, noise_power=1.0)
    p = worst_case_from_spec(np.array([2.0, 0.0]), spec)
    assert p.total_power == pytest.approx(0.25)
