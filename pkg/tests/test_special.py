import csv
import math
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bagley_torvik import special
from bagley_torvik.errors import NonConvergence, UnsupportedParameter

GOLDEN = Path(__file__).parent / "data" / "special_golden.csv"
# rows whose tolerance is absolute; the others are relative
ABSOLUTE = {"fresnel", "bessel_j0"}


def _golden_rows():
    with GOLDEN.open() as fh:
        return list(csv.DictReader(fh))


def _evaluate(name, z):
    if name == "rgamma":
        return complex(special.rgamma(z.real))
    if name == "scaled_erfc":
        return complex(special.scaled_erfc(z))
    if name == "fresnel":
        S, C = special.fresnel(z.real)
        return complex(S, C)
    if name == "bessel_j0":
        return complex(special.bessel_j0(z.real))
    if name.startswith("mld:"):
        _, a, b, k = name.split(":")
        return complex(special.ml_derivative(float(a), float(b), int(k), z.real))
    if name.startswith("ml:"):
        _, a, b = name.split(":")
        return special.mittag_leffler(float(a), float(b), z)
    raise KeyError(name)


@pytest.mark.parametrize(
    "row", _golden_rows(), ids=lambda r: f"{r['function']}({r['re_in']},{r['im_in']})"
)
def test_golden_values(row):
    z = complex(float(row["re_in"]), float(row["im_in"]))
    expected = complex(float(row["re_out"]), float(row["im_out"]))
    tol = float(row["tol"])
    got = _evaluate(row["function"], z)
    if row["function"] in ABSOLUTE or expected == 0:
        assert abs(got - expected) <= tol
    else:
        assert abs(got - expected) <= tol * abs(expected)


# ---------------------------------------------------------------- rgamma


@pytest.mark.parametrize(
    "x, expected",
    [(1.0, 1.0), (0.5, 1 / math.sqrt(math.pi)), (-0.5, -1 / (2 * math.sqrt(math.pi))), (0.0, 0.0)],
)
def test_rgamma_examples(x, expected):
    assert special.rgamma(x) == pytest.approx(expected, rel=1e-13, abs=0.0)


@pytest.mark.parametrize("n", [0, -1, -2, -7])
def test_rgamma_exact_zero_at_poles(n):
    assert special.rgamma(float(n)) == 0.0


# ---------------------------------------------------------------- W(z)


def test_scaled_erfc_at_origin():
    assert special.scaled_erfc(0.0) == 1.0


def test_scaled_erfc_large_negative_matches_asymptotic():
    x = 10.0
    approx = 1 / (x * math.sqrt(math.pi)) * (1 - 1 / (2 * x * x) + 3 / (4 * x ** 4))
    assert special.scaled_erfc(-x).real == pytest.approx(approx, rel=1e-5)


@given(st.floats(-15, 15), st.floats(-15, 15))
@settings(max_examples=200, deadline=None)
def test_scaled_erfc_conjugate_symmetry(x, y):
    z = complex(x, y)
    if (z * z).real > 600:
        return
    assert special.scaled_erfc(z.conjugate()) == pytest.approx(
        special.scaled_erfc(z).conjugate(), rel=1e-14, abs=1e-300
    )


@given(st.floats(-20, 20))
@settings(max_examples=100, deadline=None)
def test_scaled_erfc_real_axis_is_real(x):
    assert special.scaled_erfc(x).imag == 0.0


@pytest.mark.parametrize("x", [0.3, 1.0, 2.5, 5.0])
def test_scaled_erfc_reflection(x):
    # W(x) + W(-x) = 2 exp(x**2)
    lhs = special.scaled_erfc(x).real
    rhs = 2 * math.exp(x * x) - special.scaled_erfc(-x).real
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_scaled_erfc_overflow_is_signalled():
    with pytest.raises(OverflowError):
        special.scaled_erfc(30.0)


# ---------------------------------------------------------------- Fresnel


def test_fresnel_examples():
    assert special.fresnel(0.0) == (0.0, 0.0)
    S, C = special.fresnel(1.0)
    assert S == pytest.approx(0.4382591473903548, abs=1e-12)
    assert C == pytest.approx(0.7798934003768228, abs=1e-12)
    S, C = special.fresnel(50.0)
    assert abs(S - 0.5) < 0.01 and abs(C - 0.5) < 0.01


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_fresnel_sine_cosine_integrals(t):
    # S(sqrt(2t/pi)) = (2 pi)**(-1/2) int_0^t sin(tau)/sqrt(tau) dtau, likewise for C
    S, C = special.fresnel(math.sqrt(2 * t / math.pi))
    # substitute tau = u**2 to remove the endpoint singularity
    s_int, _ = integrate.quad(lambda u: 2 * math.sin(u * u), 0, math.sqrt(t), epsabs=1e-13)
    c_int, _ = integrate.quad(lambda u: 2 * math.cos(u * u), 0, math.sqrt(t), epsabs=1e-13)
    assert S == pytest.approx(s_int / math.sqrt(2 * math.pi), abs=1e-9)
    assert C == pytest.approx(c_int / math.sqrt(2 * math.pi), abs=1e-9)


# ---------------------------------------------------------------- Bessel J0


def test_bessel_j0_examples():
    assert special.bessel_j0(0.0) == 1.0
    assert abs(special.bessel_j0(2.404825557695773)) <= 1e-10


# ---------------------------------------------------------------- acceleration


def test_accelerate_alternating_abel_sum():
    res = special.accelerate_alternating([1.0] * 10, 10)
    assert res.value == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize(
    "term, exact",
    [(lambda k: 1.0 / (k + 1), math.log(2.0)), (lambda k: 1.0 / (2 * k + 1), math.pi / 4)],
    ids=["log2", "pi/4"],
)
def test_accelerate_alternating_classic_series(term, exact):
    res = special.accelerate_alternating(term, 12)
    assert res.value == pytest.approx(exact, abs=1e-9)
    assert res.error > 0
    assert abs(res.value - exact) <= 10 * res.error


def test_accelerate_alternating_error_shrinks_geometrically():
    term = lambda k: 1.0 / (k + 1)
    e8 = special.accelerate_alternating(term, 8).error
    e16 = special.accelerate_alternating(term, 16).error
    assert e16 < e8 / 5.8 ** 7


# ---------------------------------------------------------------- Mittag-Leffler


SQRT_PI = math.sqrt(math.pi)

# closed forms of E_{1/2,beta}(z) written with W = scaled_erfc
REDUCTIONS = {
    1.0: lambda z, W: W,
    0.5: lambda z, W: 1 / SQRT_PI + z * W,
    1.5: lambda z, W: (W - 1) / z,
    0.0: lambda z, W: z * (1 / SQRT_PI + z * W),
    -0.5: lambda z, W: (z * z - 0.5) / SQRT_PI + z ** 3 * W,
}


def _ml_oracle(alpha, beta, z, terms=200):
    with mp.workdps(40):
        al, be = mp.mpf(alpha), mp.mpf(beta)
        return complex(mp.fsum(mp.mpc(z) ** k * mp.rgamma(al * k + be) for k in range(terms)))


def test_mittag_leffler_examples():
    assert special.mittag_leffler(0.5, 1.0, 0) == 1.0
    expected = (math.exp(4) * math.erfc(2) - 1) / (-2)
    assert special.mittag_leffler(0.5, 1.5, -2).real == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("beta", sorted(REDUCTIONS))
@given(r=st.floats(0.05, 3.0), phi=st.floats(-math.pi, math.pi))
@settings(max_examples=40, deadline=None)
def test_mittag_leffler_reductions(beta, r, phi):
    z = r * complex(math.cos(phi), math.sin(phi))
    got = special.mittag_leffler(0.5, beta, z)
    closed = REDUCTIONS[beta](z, special.scaled_erfc(z))
    oracle = _ml_oracle(0.5, beta, z)
    assert abs(got - closed) <= 1e-11 * abs(closed)
    assert abs(got - oracle) <= 1e-11 * abs(oracle)


@given(
    alpha=st.floats(0.3, 2.0),
    beta=st.floats(-1.0, 3.0),
    r=st.floats(0.0, 5.0),
    phi=st.floats(-math.pi, math.pi),
)
@settings(max_examples=60, deadline=None)
def test_mittag_leffler_recurrence(alpha, beta, r, phi):
    z = r * complex(math.cos(phi), math.sin(phi))
    lhs = special.mittag_leffler(alpha, beta, z)
    rhs = special.rgamma(beta) + z * special.mittag_leffler(alpha, alpha + beta, z)
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))


@pytest.mark.parametrize(
    "alpha, beta, z",
    [(0.5, 2.7, -3.0), (0.5, 2.7, -12.0), (0.8, 1.3, 20 + 5j), (0.5, 0.8, 35j), (1.2, 0.4, -30.0)],
)
def test_mittag_leffler_against_series_oracle(alpha, beta, z):
    with mp.workdps(250):
        # Gamma arguments must be formed in high precision: the cancellation
        # amplifies any rounding in them
        al, be = mp.mpf(alpha), mp.mpf(beta)
        exact = complex(mp.fsum(mp.mpc(z) ** k * mp.rgamma(al * k + be) for k in range(3000)))
    got = special.mittag_leffler(alpha, beta, z)
    assert abs(got - exact) <= 1e-10 * max(abs(exact), 1e-300)


@pytest.mark.parametrize("kwargs", [dict(alpha=3.0, beta=1.0, z=1.0), dict(alpha=0.5, beta=11.0, z=1.0),
                                    dict(alpha=0.5, beta=1.0, z=60.0)])
def test_mittag_leffler_outside_certified_region(kwargs):
    with pytest.raises(UnsupportedParameter):
        special.mittag_leffler(**kwargs)


def test_mlparams_dispatch():
    assert special.MLParams(0.5, 1.0)(0.3) == special.mittag_leffler(0.5, 1.0, 0.3)
    assert special.MLParams(0.5, 2.0, 1)(0.0) == pytest.approx(4 / (3 * SQRT_PI), rel=1e-14)
    with pytest.raises(ValueError):
        special.MLParams(0.0, 1.0)


# ---------------------------------------------------------------- derivatives


def _mld_oracle(beta, k, z):
    with mp.workdps(150):
        return float(mp.fsum(
            mp.factorial(j + k) / mp.factorial(j) * mp.mpf(z) ** j
            * mp.rgamma(mp.mpf(j + k) / 2 + mp.mpf(beta))
            for j in range(2500)
        ))


def test_ml_derivative_examples():
    assert special.ml_derivative(0.5, 1.0, 0, 0.0) == 1.0
    assert special.ml_derivative(0.5, 2.0, 1, 0.0) == pytest.approx(4 / (3 * SQRT_PI), rel=1e-14)


@pytest.mark.parametrize("beta, k", [(1.0, 0), (2.0, 1), (2.0, 2)])
@pytest.mark.parametrize("z", [-0.5, -2.0, -4.0, -6.3])
def test_ml_derivative_accuracy_over_series_range(beta, k, z):
    assert special.ml_derivative(0.5, beta, k, z) == pytest.approx(_mld_oracle(beta, k, z), rel=1e-9)


@given(st.floats(-6.3, 3.0))
@settings(max_examples=40, deadline=None)
def test_ml_derivative_k0_matches_function(z):
    got = special.ml_derivative(0.5, 1.3, 0, z)
    ref = special.mittag_leffler(0.5, 1.3, z).real
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_ml_derivative_signals_rather_than_guesses():
    # deep cancellation at high order: either a certified value or an error
    try:
        got = special.ml_derivative(0.5, 9.5, 20, -6.0)
    except NonConvergence:
        return
    assert got == pytest.approx(_mld_oracle(9.5, 20, -6.0), rel=1e-9)


def test_ml_derivative_plain_double_gives_up_honestly():
    with pytest.raises(NonConvergence):
        special.ml_derivative(0.5, 2.0, 2, -6.3, precision="double")


def test_ml_derivative_order_cap():
    with pytest.raises(UnsupportedParameter):
        special.ml_derivative(0.5, 1.0, 61, -1.0)


def test_ml_half_array_matches_scalar():
    z = np.array([0.1 + 0.2j, -1.0, 2.0 - 3.0j, -0.01])
    for beta in (2.5, 3.0, -1.5):
        vec = special.ml_half_array(beta, z)
        ref = np.array([special.mittag_leffler(0.5, beta, x) for x in z])
        np.testing.assert_allclose(vec, ref, rtol=1e-11)
