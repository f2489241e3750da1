import numpy as np
import pytest

from backend.seeding import SeedStreams, scenario_seeds


def test_same_key_same_stream():
    a = SeedStreams(42).generator("errors", 0).standard_normal(8)
    b = SeedStreams(42).generator("errors", 0).standard_normal(8)
    assert np.array_equal(a, b)


def test_named_streams_are_independent():
    s = SeedStreams(42)
    a = s.generator("channel").standard_normal(8)
    b = s.generator("errors").standard_normal(8)
    c = s.generator("errors", 1).standard_normal(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(b, c)


def test_scenario_index_changes_stream():
    a = SeedStreams(42, scenario=0).generator("channel").standard_normal(4)
    b = SeedStreams(42, scenario=1).generator("channel").standard_normal(4)
    assert not np.array_equal(a, b)


def test_more_draws_do_not_perturb_prefix():
    short = SeedStreams(7).generator("montecarlo").standard_normal(10)
    long = SeedStreams(7).generator("montecarlo").standard_normal(1000)
    assert np.array_equal(short, long[:10])


def test_unknown_stream_and_bad_seed():
    with pytest.raises(KeyError):
        SeedStreams(1).generator("nope")
    with pytest.raises(ValueError):
        SeedStreams(-1)


def test_scenario_seeds_deterministic():
    a = scenario_seeds(0, 5)
    assert a == scenario_seeds(0, 5)
    assert len(set(a)) == 5
    assert scenario_seeds(0, 3) == a[:3]
