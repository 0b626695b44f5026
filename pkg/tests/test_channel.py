import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contactgt.channel import NoiseParams, apply_noise, noiseless_outcomes
from contactgt.design import DesignParams, bernoulli_design, from_rows


def test_or_semantics():
    a = from_rows(4, [[0, 1], [2], [], [1, 3]])
    assert noiseless_outcomes(a, np.array([0, 1, 0, 0])).tolist() == [1, 0, 0, 1]
    assert noiseless_outcomes(a, np.zeros(4, dtype=np.uint8)).tolist() == [0, 0, 0, 0]


def test_shape_mismatch():
    with pytest.raises(ValueError):
        noiseless_outcomes(from_rows(3, [[0]]), np.zeros(4))


def test_noise_params_range():
    with pytest.raises(ValueError):
        NoiseParams(0.6)
    with pytest.raises(ValueError):
        apply_noise(np.zeros(3, dtype=np.uint8), 1.5, np.random.default_rng(0))


def test_full_flip_and_none():
    y = np.array([0, 1, 1, 0], dtype=np.uint8)
    rng = np.random.default_rng(0)
    assert np.array_equal(apply_noise(y, 1.0, rng), 1 - y)
    assert np.array_equal(apply_noise(y, NoiseParams(0.0), rng), y)


def test_flip_rate():
    y = np.zeros(200000, dtype=np.uint8)
    flips = apply_noise(y, NoiseParams(0.05), np.random.default_rng(9)).mean()
    assert abs(flips - 0.05) < 3 * np.sqrt(0.05 * 0.95 / y.size)


@given(n=st.integers(1, 20), m=st.integers(0, 15), seed=st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_outcomes_monotone(n, m, seed):
    rng = np.random.default_rng(seed)
    a = bernoulli_design(n, m, DesignParams(0.3, 1.0), rng)
    x = rng.integers(0, 2, n)
    x_more = x | rng.integers(0, 2, n)
    assert np.all(noiseless_outcomes(a, x) <= noiseless_outcomes(a, x_more))


@given(y=st.lists(st.integers(0, 1), max_size=50), seed=st.integers(0, 10**6))
def test_zero_noise_is_identity(y, seed):
    y = np.array(y, dtype=np.uint8)
    assert np.array_equal(apply_noise(y, NoiseParams(0.0), np.random.default_rng(seed)), y)
