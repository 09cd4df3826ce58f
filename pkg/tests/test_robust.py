import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssvd.errors import EmptyInput
from ssvd.robust import abs_quantile, estimate_sigma, huber_rho, mad, median

finite = st.floats(-1e6, 1e6, allow_nan=False)


@pytest.mark.parametrize("v, expected", [((1, 2, 3), 2), ((1, 2, 3, 4), 2.5), ((5, 1, 1, 1), 1)])
def test_median(v, expected):
    assert median(v) == expected


@pytest.mark.parametrize("v, expected", [((1, 1, 1), 0), ((1, 2, 3, 4, 5), 1), ((0, 0, 0, 10), 0)])
def test_mad_is_unscaled(v, expected):
    assert mad(v) == expected


@pytest.mark.parametrize("fn", [median, mad, estimate_sigma])
def test_empty_input(fn):
    with pytest.raises(EmptyInput):
        fn([])


def test_sigma_examples():
    assert estimate_sigma(np.zeros((4, 4))) == 0.0
    assert estimate_sigma(np.array([[-1.0, -1.0], [1.0, 1.0]])) == pytest.approx(1.4826)


def test_sigma_consistent_for_normal_noise():
    x = np.random.default_rng(7).standard_normal((200, 200))
    assert 0.9 <= estimate_sigma(x) <= 1.1


def test_huber_branches():
    assert huber_rho(0.5, 1.0) == 0.25
    assert huber_rho(2.0, 1.0) == 3.0
    for x in (1.5, -1.5):
        assert huber_rho(x, 1.5) == pytest.approx(2.25)
        assert huber_rho(np.nextafter(x, 2 * x), 1.5) == pytest.approx(2.25)
    np.testing.assert_allclose(huber_rho(np.array([-3.0, 0.0, 0.5]), 1.0), [5.0, 0.0, 0.25])


def test_abs_quantile():
    assert abs_quantile(np.full((3, 3), -2.0), 0.3) == 2.0
    assert abs_quantile(np.array([-4, -3, -2, -1, 1, 2, 3, 4.0]), 0.5) == 2.5
    x = np.random.default_rng(1).standard_normal(50)
    assert abs_quantile(x, 1 - 1e-12) == pytest.approx(np.max(np.abs(x)))
    with pytest.raises(ValueError):
        abs_quantile(x, 1.0)


@pytest.mark.property
@given(st.lists(finite, min_size=1, max_size=40), finite, st.floats(-50, 50))
def test_location_scale_properties(v, shift, c):
    a = np.array(v)
    perm = np.random.default_rng(len(v)).permutation(a.size)
    assert median(a[perm]) == median(a)
    assert mad(a[perm]) == mad(a)
    assert median(a + shift) == pytest.approx(median(a) + shift, abs=1e-6 * (1 + abs(shift)))
    assert mad(c * a) == pytest.approx(abs(c) * mad(a), rel=1e-9, abs=1e-9)
    assert estimate_sigma(c * a) == pytest.approx(abs(c) * estimate_sigma(a), rel=1e-9, abs=1e-9)


@pytest.mark.property
@given(finite, st.floats(0, 1e3))
def test_huber_bounded_by_square(x, delta):
    rho = huber_rho(x, delta)
    assert rho <= x * x * (1 + 1e-12) + 1e-300
    if abs(x) <= delta:
        assert rho == x * x
    else:
        assert rho < x * x or x * x == 0.0  # x * x may underflow
