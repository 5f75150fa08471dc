import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fhn_ap.model import ModelParams, adaptation, cubic_roots, nonlinearity

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_defaults():
    p = ModelParams()
    assert (p.theta, p.tau, p.gamma) == (0.1, 0.005, 5.0)
    assert not p.is_linear


@pytest.mark.parametrize("kwargs", [{"theta": 0.0}, {"theta": 1.0}, {"tau": -1e-3}, {"gamma": 0.0}])
def test_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_nonlinearity_values():
    p = ModelParams()
    for root in (0.0, p.theta, 1.0):
        assert nonlinearity(root, p) == 0.0
    assert nonlinearity(0.5, p) == pytest.approx(0.1, abs=1e-15)


def test_nonlinearity_sign_pattern():
    p = ModelParams(theta=0.1)
    assert np.all(nonlinearity(np.linspace(0.001, 0.099, 50), p) < 0)
    assert np.all(nonlinearity(np.linspace(0.101, 0.999, 50), p) > 0)
    assert np.all(nonlinearity(np.linspace(-5, -0.01, 50), p) > 0)
    assert np.all(nonlinearity(np.linspace(1.01, 5, 50), p) < 0)
    np.testing.assert_array_equal(cubic_roots(p), [0.0, 0.1, 1.0])


def test_adaptation_values():
    p = ModelParams()
    assert adaptation(1.0, 0.0, p) == pytest.approx(0.005)
    assert adaptation(2.5, 0.5, p) == 0.0
    assert adaptation(3.0, -7.0, ModelParams(tau=0.0)) == 0.0


def test_linear_variant():
    p = ModelParams.linear(0.001)
    assert p.is_linear and p.tau == 0.0
    np.testing.assert_allclose(nonlinearity(np.array([1.0, -2.0]), p), [-0.001, 0.002])


@given(finite, finite, finite, finite, finite, finite)
def test_adaptation_is_linear(v1, w1, v2, w2, a, b):
    p = ModelParams()
    lhs = adaptation(a * v1 + b * v2, a * w1 + b * w2, p)
    rhs = a * adaptation(v1, w1, p) + b * adaptation(v2, w2, p)
    scale = 1 + abs(a) * (abs(v1) + 5 * abs(w1)) + abs(b) * (abs(v2) + 5 * abs(w2))
    assert abs(lhs - rhs) <= 1e-14 * scale


@given(st.floats(0.01, 0.99))
def test_three_roots_for_any_threshold(theta):
    p = ModelParams(theta=theta)
    assert all(nonlinearity(r, p) == 0.0 for r in cubic_roots(p))
