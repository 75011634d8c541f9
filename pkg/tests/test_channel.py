import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lasercov import channel
from lasercov.model import ENVIRONMENTS, EnvironmentParams, default_config
from oracles import los_prob


def test_los_examples():
    urban = ENVIRONMENTS["Urban"]
    assert channel.los_probability(urban, 100, 100) == pytest.approx(0.1118, abs=5e-5)
    assert channel.los_probability(urban, 100, 100) == pytest.approx(los_prob(1, 0.151, 1, 100, 100), rel=1e-12)
    sub = ENVIRONMENTS["SubUrban"]
    assert channel.los_probability(sub, 100, 0.0) == pytest.approx(1 - math.exp(-6.581 * math.pi / 2), rel=1e-12)
    assert channel.los_probability(urban, 100, 1e12) == pytest.approx(0.0, abs=1e-9)


@given(st.floats(0.01, 20), st.floats(0.5, 1.5), st.floats(0.1, 1), st.floats(1, 300), st.floats(0, 1e5))
def test_los_probability_in_unit_interval(b, a, c, h, r):
    p = channel.los_probability(EnvironmentParams(a, b, c), h, r)
    assert 0.0 <= p <= 1.0


def test_class_split_is_a_partition():
    cfg = default_config()
    r = np.linspace(0, 5000, 50)
    lu = channel.class_probability(cfg.classes["Lu"], cfg.env, r)
    nu = channel.class_probability(cfg.classes["Nu"], cfg.env, r)
    assert lu + nu == pytest.approx(np.ones_like(r))
    assert channel.thinned_density(cfg.classes["Lu"], 3e-6, cfg.env, r) == pytest.approx(3e-6 * lu)


def test_mean_power_example():
    cfg = default_config()
    assert channel.mean_received_power(cfg.classes["Lu"], 0.0) == pytest.approx(9.0e-5)


def test_fading_moments():
    rng = np.random.default_rng(1)
    g1 = channel.sample_power_fading(1, rng, 10**6)
    assert g1.mean() == pytest.approx(1.0, abs=0.01)
    x = np.linspace(0, 5, 101)
    emp = np.searchsorted(np.sort(g1), x, side="right") / g1.size
    assert np.max(np.abs(emp - (1 - np.exp(-x)))) < 0.01
    g3 = channel.sample_power_fading(3, rng, 10**6)
    assert g3.var() == pytest.approx(1 / 3, abs=0.01)
    with pytest.raises(ValueError):
        channel.sample_power_fading(0, rng, 3)
