import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bagley_torvik import _altseries as alt

finite = st.floats(-1e150, 1e150, allow_nan=False, allow_infinity=False)


@given(finite, finite)
@settings(max_examples=200, deadline=None)
def test_two_sum_is_error_free(a, b):
    s, e = alt._two_sum(np.float64(a), np.float64(b))
    assert mp.mpf(float(s)) + mp.mpf(float(e)) == mp.mpf(a) + mp.mpf(b)


# keep the product clear of the subnormal range, where no split is exact
moderate = st.floats(-1e100, 1e100).filter(lambda x: x == 0 or abs(x) > 1e-100)


@given(moderate, moderate)
@settings(max_examples=200, deadline=None)
def test_two_prod_is_error_free(a, b):
    p, e = alt._two_prod(np.float64(a), np.float64(b))
    with mp.workdps(80):
        assert mp.mpf(float(p)) + mp.mpf(float(e)) == mp.mpf(a) * mp.mpf(b)


def test_double_double_division_precision():
    with mp.workdps(60):
        x = alt.dd_from_mp([mp.mpf(1)])
        y = alt.dd_from_mp([mp.mpf(3)])
        hi, lo = alt.dd_div(x, y)
        err = mp.mpf(float(hi[0])) + mp.mpf(float(lo[0])) - mp.mpf(1) / 3
        assert abs(err) < mp.mpf(2) ** -100


@pytest.mark.parametrize("n", [16, 64, 256])
def test_crvz_weights_approach_alternating_signs(n):
    w = alt.crvz_weights(n)
    k = np.arange(n)
    # the leading weights are (-1)**k up to the 5.828**-n error of the scheme
    np.testing.assert_allclose(w[: n // 8], (-1.0) ** k[: n // 8], atol=1e-10)


def test_positive_series_matches_oracle():
    with mp.workdps(40):
        exact = mp.fsum(mp.factorial(j + 2) / mp.factorial(j) * mp.mpf(1.5) ** j
                        * mp.rgamma(mp.mpf(j + 2) / 2 + 1) for j in range(400))
    assert alt.positive_series(0.5, 1.0, 2, 1.5) == pytest.approx(float(exact), rel=1e-13)


def test_alternating_vectorised_shapes():
    vals, errs = alt.alternating_ml_derivative(
        0.5, np.array([1.0, 2.5]), np.array([0, 3]), np.array([0.5, 1.0, 2.0])
    )
    assert vals.shape == errs.shape == (2, 3)
    assert np.all(errs <= 1e-9 * np.abs(vals) + 1e-300)


def test_double_double_requires_half_alpha():
    with pytest.raises(ValueError):
        alt.alternating_ml_derivative(0.7, np.array([1.0]), np.array([0]), np.array([1.0]),
                                      precision="double-double")
