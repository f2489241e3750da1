import numpy as np
import pytest

from backend.allocator import AllocConfig, allocate
from backend.channel import ErrorSet, EstimationSpec, draw_error_set
from backend.errors import ConfigurationError, InsufficientSamplesError
from backend.evt import TailConfig

H1 = np.array([1.0, 1.0j, -1.0, 0.5])
NOISE = 1.0


def _errors(variance, size=2000, antennas=4, seed=0, users=1):
    spec = EstimationSpec(uplink_power=1.0, pilot_length=1, noise_power=variance)
    return [draw_error_set(spec, size, antennas, np.random.default_rng(seed + k)) for k in range(users)]


def _config(**kw):
    base = dict(
        p_min=1e-3,
        p_max=1e3,
        delta_p=1e-3,
        outage_targets=(1e-3,),
        sinr_targets=(1.0,),
        noise_power=NOISE,
        tail=TailConfig(quantile=0.95, confidence=0.8),
    )
    base.update(kw)
    return AllocConfig(**base)


def test_budget_exhaustion_is_infeasible():
    result = allocate(H1, _errors(0.05), _config(sinr_targets=(1e15,)))
    assert not result.feasible
    assert result.total_power > 1e3
    assert result.iterations > 0


def test_feasible_result_honors_bounds_and_budget():
    cfg = _config()
    result = allocate(H1, _errors(0.05), cfg)
    assert result.feasible
    assert all(ub <= z for ub, z in zip(result.upper_bounds, cfg.outage_targets))
    assert result.total_power <= cfg.p_max
    assert result.lower_bounds[0] <= result.upper_bounds[0]
    assert result.fits[0] is not None


def test_near_perfect_csi_matches_closed_form():
    cfg = _config(delta_p=1e-4)
    result = allocate(H1, _errors(1e-16), cfg)
    p_star = 1.0 * NOISE / np.sum(np.abs(H1) ** 2)
    p = result.powers[0]
    assert result.feasible
    assert p_star * (1 - 1e-6) <= p <= p_star + cfg.delta_p * (1 + 1e-6)


def test_stricter_target_needs_more_power():
    errors = _errors(0.05)
    loose = allocate(H1, errors, _config(outage_targets=(1e-3,)))
    strict = allocate(H1, errors, _config(outage_targets=(1e-5,)))
    assert loose.feasible and strict.feasible
    assert strict.powers[0] >= loose.powers[0]


def test_last_step_below_failed():
    cfg = _config()
    result = allocate(H1, _errors(0.05), cfg)
    p = result.powers[0]
    assert result.failing_bounds[0] is not None
    assert result.failing_bounds[0] > cfg.outage_targets[0]
    below = [t for t in result.trajectory if np.isclose(t.power, p - cfg.delta_p, rtol=1e-12, atol=0)]
    assert below and not below[-1].passed


def test_single_user_bound_decreases_with_power():
    result = allocate(H1, _errors(0.05), _config())
    points = sorted(result.trajectory, key=lambda t: t.power)
    bounds = [t.upper_bound for t in points]
    assert all(b <= a * (1 + 1e-4) + 1e-12 for a, b in zip(bounds, bounds[1:]))


def test_linear_and_bisect_agree():
    errors = _errors(0.05)
    kw = dict(p_min=0.3, delta_p=0.01)
    linear = allocate(H1, errors, _config(search="linear", **kw))
    bisect = allocate(H1, errors, _config(search="bisect", **kw))
    assert linear.feasible and bisect.feasible
    assert linear.powers[0] == pytest.approx(bisect.powers[0], rel=1e-9)
    assert linear.iterations == bisect.iterations
    assert bisect.evaluations <= linear.evaluations


def test_zf_two_users_final_sweep_is_clean():
    H = np.array([[1.0, 0.2j, -0.3, 0.1], [0.1, -0.5, 1.0j, 0.4]])
    cfg = _config(method="zf", outage_targets=(1e-3, 1e-2))
    result = allocate(H, _errors(0.01, users=2), cfg)
    assert result.feasible
    assert result.upper_bounds[0] <= 1e-3 and result.upper_bounds[1] <= 1e-2
    last = [t for t in result.trajectory if t.sweep == result.sweeps]
    assert len(last) == 2 and all(t.passed for t in last)
    assert result.iterations <= 2 * cfg.max_increments + 2


def test_fit_failure_counts_as_outage():
    spec = EstimationSpec(uplink_power=1.0, pilot_length=1, noise_power=0.0)
    flat = [ErrorSet(samples=np.zeros((2000, 4), dtype=complex), spec=spec)]
    result = allocate(H1, flat, _config(p_max=1.0))
    assert not result.feasible
    assert result.upper_bounds == (1.0,)
    assert result.fits == (None,)


def test_minimum_powers_over_budget():
    H = np.vstack([H1, H1[::-1]])
    result = allocate(H, _errors(0.05, users=2), _config(p_min=1.0, p_max=1.5))
    assert not result.feasible
    assert result.evaluations == 0


def test_input_validation():
    with pytest.raises(ConfigurationError):
        _config(p_min=2.0, p_max=1.0)
    with pytest.raises(ConfigurationError):
        _config(outage_targets=(1.0,))
    with pytest.raises(ConfigurationError):
        _config(delta_p=0.0)
    with pytest.raises(ConfigurationError):
        _config(search="golden")
    with pytest.raises(ConfigurationError):
        allocate(H1, _errors(0.05, users=2), _config())
    with pytest.raises(InsufficientSamplesError):
        allocate(H1, _errors(0.05, size=200), _config())
