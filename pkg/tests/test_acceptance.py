"""Acceptance criteria for the solver, one test per criterion.

Each test records a PASS/FAIL line, collected in an ``acceptance criteria``
section at the end of the pytest run.  Runtime limits are measured on the
package code only; the independent oracles run outside the timed regions.
"""

import math
import time

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from bagley_torvik import asymptotics as asy
from bagley_torvik import closed_form as cf
from bagley_torvik import reference as ref
from bagley_torvik import special
from bagley_torvik.errors import NonConvergence
from bagley_torvik.roots import BTCoefficients, RootSystem, weight_A

A, B, C = 1.3, 2.6, 3.4
OMEGA = 2.5
COEFFS = BTCoefficients(A, B, C)
HOMOGENEOUS = cf.InitialConditions()
UNIT = cf.InitialConditions(1.0, 1.0)
SQRT_FORCE = cf.PowerSum(((1.0, 0.0), (1.0, 0.5)))
SINE = cf.Sinusoid(1.0, OMEGA)
SQRT_PI = math.sqrt(math.pi)


def _best_time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


# ---------------------------------------------------------------- 1


def test_criterion_01_root_identities(criterion):
    rs = RootSystem.from_coefficients(COEFFS)
    scale = max(abs(A), abs(B), abs(C)) * max(1.0, float(np.max(np.abs(rs.roots)))) ** 4
    residual = float(np.max(np.abs(A * rs.roots ** 4 + B * rs.roots ** 3 + C)))
    weights = {ell: abs(weight_A(rs, ell)) for ell in (0, -1, -2)}
    elapsed = _best_time(lambda: RootSystem.from_coefficients(COEFFS), 20)
    ok = residual <= 1e-10 * scale and max(weights.values()) <= 1e-10 and elapsed < 1e-3
    criterion(1, "root identities", ok,
              f"residual {residual:.1e}, max|A0,A-1,A-2| {max(weights.values()):.1e}, "
              f"{elapsed * 1e3:.3f} ms")
    assert residual <= 1e-10 * scale
    assert max(weights.values()) <= 1e-10
    assert elapsed < 1e-3


# ---------------------------------------------------------------- 2

REDUCTIONS = {
    1.0: lambda z, W: W,
    0.5: lambda z, W: 1 / SQRT_PI + z * W,
    1.5: lambda z, W: (W - 1) / z,
    0.0: lambda z, W: z * (1 / SQRT_PI + z * W),
    -0.5: lambda z, W: (z * z - 0.5) / SQRT_PI + z ** 3 * W,
}


def _ml_series(beta, z):
    with mp.workdps(40):
        be, zz = mp.mpf(beta), mp.mpc(z)
        return complex(mp.fsum(zz ** k * mp.rgamma(k / mp.mpf(2) + be) for k in range(160)))


def test_criterion_02_mittag_leffler_reductions(criterion, rng):
    r = 3.0 * np.sqrt(rng.uniform(0.0, 1.0, 200))
    z = r * np.exp(1j * rng.uniform(-math.pi, math.pi, 200))

    def run():
        out = {}
        for beta, closed in REDUCTIONS.items():
            w = special.scaled_erfc(z)
            out[beta] = (np.array([special.mittag_leffler(0.5, beta, zz) for zz in z]), closed(z, w))
        return out

    start = time.perf_counter()
    values = run()
    elapsed = time.perf_counter() - start
    worst_closed = worst_oracle = 0.0
    for beta, (got, closed) in values.items():
        oracle = np.array([_ml_series(beta, zz) for zz in z])
        worst_closed = max(worst_closed, float(np.max(np.abs(got - closed) / np.abs(oracle))))
        worst_oracle = max(worst_oracle, float(np.max(np.abs(got - oracle) / np.abs(oracle))))
        # the closed reduction itself, against the independent series
        worst_oracle = max(worst_oracle, float(np.max(np.abs(closed - oracle) / np.abs(oracle))))
    ok = worst_closed <= 1e-11 and worst_oracle <= 1e-11 and elapsed < 1.0
    criterion(2, "Mittag-Leffler reductions", ok,
              f"vs reduction {worst_closed:.1e}, vs series {worst_oracle:.1e}, {elapsed:.2f} s")
    assert worst_closed <= 1e-11
    assert worst_oracle <= 1e-11
    assert elapsed < 1.0


# ---------------------------------------------------------------- 3


def test_criterion_03_method_triangle(criterion):
    start = time.perf_counter()
    t_series = np.linspace(0.1, 8.0, 80)
    grid = ref.FDGrid.over(10.0, 200)
    series_dev, fd_dev = {}, {}
    for name, forcing in (("J0", cf.BesselJ0(1.0)), ("1+sqrt(t)", SQRT_FORCE), ("sin", SINE)):
        problem = cf.BTProblem(COEFFS, HOMOGENEOUS, forcing)
        closed = cf.solve(problem, t_series).y
        series = ref.podlubny_solve(problem, t_series).y
        dev = np.abs(series - closed)
        series_dev[name] = float(np.max(dev)) if np.all(np.isfinite(dev)) else math.inf
        fd = ref.finite_difference_solve(problem, grid)
        fd_dev[name] = float(np.max(np.abs(fd.y[1:] - cf.solve(problem, fd.t[1:]).y)))
    elapsed = time.perf_counter() - start
    ok = max(series_dev.values()) <= 1e-4 and max(fd_dev.values()) <= 2e-2 and elapsed < 60
    detail = ", ".join(f"{k}: series {series_dev[k]:.1e} fd {fd_dev[k]:.1e}" for k in series_dev)
    criterion(3, "method triangle", ok, f"{detail}, {elapsed:.1f} s")
    assert max(series_dev.values()) <= 1e-4
    assert max(fd_dev.values()) <= 2e-2
    assert elapsed < 60


# ---------------------------------------------------------------- 4


def test_criterion_04_specialised_vs_generic(criterion):
    rs = RootSystem.from_coefficients(COEFFS)
    t = np.linspace(0.5, 10.0, 20)
    start = time.perf_counter()
    sine_quad = np.array([cf.yf_convolution(rs, SINE, ti) for ti in t])
    sqrt_quad = np.array([cf.yf_convolution(rs, SQRT_FORCE, ti) for ti in t])
    sine = cf.yf_sinusoid(rs, 1.0, OMEGA, t)
    power = cf.yf_power(rs, SQRT_FORCE.terms, t)
    elapsed = time.perf_counter() - start
    dev_sine = float(np.max(np.abs(sine - sine_quad)))
    dev_power = float(np.max(np.abs(power - sqrt_quad)))
    ok = dev_sine <= 1e-8 and dev_power <= 1e-8 and elapsed < 10
    criterion(4, "specialised vs convolution", ok,
              f"sin {dev_sine:.1e}, power {dev_power:.1e}, {elapsed:.2f} s")
    assert dev_sine <= 1e-8 and dev_power <= 1e-8
    assert elapsed < 10


# ---------------------------------------------------------------- 5


def _h_r_quad(r, t):
    # int_0^t sin(t - tau) W(r sqrt(tau)) dtau with tau = u**2
    f = lambda u: 2 * u * math.sin(t - u * u) * complex(special.scaled_erfc(r * u))
    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=400)
    re = integrate.quad(lambda u: f(u).real, 0, math.sqrt(t), **kw)[0]
    im = integrate.quad(lambda u: f(u).imag, 0, math.sqrt(t), **kw)[0]
    return complex(re, im)


def test_criterion_05_appendix_integrals(criterion, rng):
    start = time.perf_counter()
    worst_h = 0.0
    for _ in range(10):
        r = complex(rng.uniform(-2, 1), rng.uniform(-2, 2))
        t = float(rng.uniform(0.1, 6.0))
        worst_h = max(worst_h, abs(cf.h_r(r, t) - _h_r_quad(r, t)))
    worst_f = 0.0
    for t in (0.3, 1.0, 2.5, 7.0, 20.0):
        S, Cf = special.fresnel(math.sqrt(2 * t / math.pi))
        kw = dict(epsabs=1e-13, epsrel=1e-13, limit=400)
        s_int = integrate.quad(lambda u: 2 * math.sin(u * u), 0, math.sqrt(t), **kw)[0]
        c_int = integrate.quad(lambda u: 2 * math.cos(u * u), 0, math.sqrt(t), **kw)[0]
        worst_f = max(worst_f, abs(S - s_int / math.sqrt(2 * math.pi)),
                      abs(Cf - c_int / math.sqrt(2 * math.pi)))
    elapsed = time.perf_counter() - start
    ok = worst_h <= 1e-9 and worst_f <= 1e-9 and elapsed < 10
    criterion(5, "h_r and Fresnel identities", ok,
              f"h_r {worst_h:.1e}, Fresnel {worst_f:.1e}, {elapsed:.2f} s")
    assert worst_h <= 1e-9 and worst_f <= 1e-9
    assert elapsed < 10


# ---------------------------------------------------------------- 6


def test_criterion_06_half_power_instability(criterion):
    problem = cf.BTProblem(COEFFS, UNIT, SQRT_FORCE)
    halves = [(1.0, 0), (1.0, 1)]
    early = np.linspace(0.05, 2.0, 40)
    late = np.linspace(6.0, 10.0, 41)
    dev_early = max(abs(ref.arora_series(COEFFS, UNIT, halves, t) - cf.solve(problem, t).y) for t in early)
    dev_late = []
    for t in late:
        d = abs(ref.arora_series(COEFFS, UNIT, halves, t) - cf.solve(problem, t).y)
        dev_late.append(d if math.isfinite(d) else math.inf)
    worst_late = max(dev_late)
    ok = dev_early <= 1e-6 and worst_late > 0.1
    criterion(6, "half-power series instability", ok,
              f"max dev on (0,2] {dev_early:.1e}, max dev on [6,10] {worst_late:.1e}")
    assert dev_early <= 1e-6
    assert worst_late > 0.1


# ---------------------------------------------------------------- 7


def test_criterion_07_asymptotics(criterion):
    rs = RootSystem.from_coefficients(COEFFS)
    power_terms = SQRT_FORCE.terms
    t0 = 0.01
    small = {
        "yc": abs(asy.yc_asymptotic(COEFFS, UNIT, asy.SMALL_T, t0) - cf.yc(rs, UNIT, t0)),
        "power": abs(asy.yf_power_asymptotic(rs, power_terms, asy.SMALL_T, t0)
                     - cf.yf_power(rs, power_terms, t0)),
        "sin": abs(asy.yf_smallt_general(rs, 0.0, OMEGA, t0) - cf.yf_sinusoid(rs, 1.0, OMEGA, t0)),
    }
    t1 = 100.0
    large = {
        "constant": abs(asy.yf_power_asymptotic(rs, [(1.0, 0.0)], asy.LARGE_T, t1)
                        / cf.yf_constant(rs, 1.0, t1) - 1),
        "power": abs(asy.yf_power_asymptotic(rs, power_terms, asy.LARGE_T, t1)
                     / cf.yf_power(rs, power_terms, t1) - 1),
    }
    sine_dev = abs(asy.yf_sinusoid_asymptotic(rs, 1.0, OMEGA, 50.0) - cf.yf_sinusoid(rs, 1.0, OMEGA, 50.0))
    ok_small = max(small.values()) <= 1e-4
    ok_large = max(large.values()) <= 0.1
    ok_sine = sine_dev <= 1e-3
    criterion(7, "asymptotic forms", ok_small and ok_large and ok_sine,
              "small-t abs " + ", ".join(f"{k} {v:.1e}" for k, v in small.items())
              + "; large-t rel " + ", ".join(f"{k} {v:.1e}" for k, v in large.items())
              + f"; sinusoid t=50 abs {sine_dev:.3e}")
    assert ok_small
    assert ok_large
    assert ok_sine


# ---------------------------------------------------------------- 8


def test_criterion_08_discrete_residual(criterion):
    t = np.arange(0.5, 9.51, 0.5)
    rows = []
    ok = True
    for name, ics, forcing in (("sin", HOMOGENEOUS, SINE), ("1+sqrt(t)", UNIT, SQRT_FORCE)):
        problem = cf.BTProblem(COEFFS, ics, forcing)
        fmax = float(np.max(np.abs(forcing(np.linspace(0.0, 10.0, 10001)))))
        coarse = float(np.max(np.abs(cf.discrete_residual(problem, 1e-3, t))))
        fine = float(np.max(np.abs(cf.discrete_residual(problem, 5e-4, t))))
        ok &= coarse <= 0.02 * fmax and coarse / fine >= 1.5
        rows.append(f"{name}: {coarse / fmax:.1e} max|f|, ratio {coarse / fine:.2f}")
    criterion(8, "discrete residual", ok, "; ".join(rows))
    assert ok


# ---------------------------------------------------------------- 9


@pytest.mark.slow
def test_criterion_09_benchmark_ordering(criterion):
    from bagley_torvik import cli

    chis = {}
    for forcing in ("besselj0:1", "constant:1", "sin:1,2.5"):
        report = cli.cmd_bench(cli.ProblemConfig(forcing=forcing))
        chis[forcing] = report["chi"]
    ok = all(chi > 1 for chi in chis.values())
    criterion(9, "benchmark ordering", ok, ", ".join(f"{k} chi={v:.3g}" for k, v in chis.items()))
    assert ok


# ---------------------------------------------------------------- 10


def test_criterion_10_generalised_transform(criterion):
    elementary = cf.GeneralizedKernelSpec(m=1, p=1, q=1, lam=0.0, a=1.0, b=0.0, c=1.0)
    kspec = cf.GeneralizedKernelSpec(m=2, p=3, q=2, lam=-1.0, a=A, b=B, c=C)
    t = np.array([0.25, 1.0, 2.5, 5.0])
    start = time.perf_counter()
    exp_vals = cf.inverse_laplace_general(elementary, t)
    got = cf.inverse_laplace_general(kspec, t)
    elapsed = time.perf_counter() - start
    exp_dev = float(np.max(np.abs(exp_vals - np.exp(-t))))
    with mp.workdps(30):
        F = lambda s: 1 / (s * (A * s ** 2 + B * s ** mp.mpf(1.5) + C))
        oracle = np.array([float(mp.invertlaplace(F, ti, method="talbot")) for ti in t])
    dev = float(np.max(np.abs(got - oracle)))
    ok = exp_dev <= 1e-6 and dev <= 1e-6 and elapsed < 5
    criterion(10, "generalised inverse transform", ok,
              f"e^-t {exp_dev:.1e}, Talbot {dev:.1e}, {elapsed:.2f} s")
    assert exp_dev <= 1e-6 and dev <= 1e-6
    assert elapsed < 5
