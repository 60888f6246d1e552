"""Closed-form solution of ``a y'' + b D^{3/2} y + c y = f(t)``.

The solution splits as ``y = y_c + y_f``: ``y_c`` carries the initial
conditions and ``y_f`` is the response to the force, a convolution of ``f``
with the kernel

    K(tau) = sum_k W(r_k sqrt(tau)) / ((4 a r_k + 3 b) r_k),

where ``W(z) = exp(z**2) erfc(-z)`` and ``r_k`` are the roots of
``a r**4 + b r**3 + c``.  Constant, power-law, sinusoidal and pulse forces
have closed forms; anything else goes through adaptive quadrature.

All root sums are formed in complex arithmetic; the imaginary part left
over after conjugate pairs cancel is checked against a tolerance and then
discarded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from . import special
from .errors import (
    DegenerateRoots,
    ImaginaryResidue,
    QuadratureFailure,
    ResonantDenominator,
    UnsupportedParameter,
)
from .roots import BTCoefficients, RootSystem, solve_poly_general, weight_B

IMAG_TOL = 1e-9


# --------------------------------------------------------------------------
# problem description


@dataclass(frozen=True)
class InitialConditions:
    y0: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.y0) and math.isfinite(self.v0)):
            raise ValueError("initial conditions must be finite")

    @property
    def homogeneous(self) -> bool:
        return self.y0 == 0.0 and self.v0 == 0.0


class _ForcingBase:
    kind = "?"

    def maclaurin(self) -> Tuple[float, float]:
        """``(f(0), f'(0))`` for the small-time expansion."""
        raise UnsupportedParameter(f"{self.kind} forcing has no Maclaurin data")


@dataclass(frozen=True)
class Zero(_ForcingBase):
    kind = "zero"

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def maclaurin(self):
        return 0.0, 0.0

    def descriptor(self) -> str:
        return "zero"


@dataclass(frozen=True)
class Constant(_ForcingBase):
    C0: float
    kind = "constant"

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.C0)

    def maclaurin(self):
        return float(self.C0), 0.0

    def descriptor(self) -> str:
        return f"constant:{self.C0!r}"


@dataclass(frozen=True)
class PowerSum(_ForcingBase):
    """``f(t) = sum_l C_l t**alpha_l`` with every ``alpha_l > -1``."""

    terms: Tuple[Tuple[float, float], ...]
    kind = "power"

    def __post_init__(self):
        terms = tuple((float(c), float(al)) for c, al in self.terms)
        if not terms:
            raise ValueError("PowerSum needs at least one term")
        for _, al in terms:
            if not al > -1.0:
                raise UnsupportedParameter(
                    f"exponent {al} <= -1: t**alpha is not locally integrable"
                )
        object.__setattr__(self, "terms", terms)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, al in self.terms:
            with np.errstate(divide="ignore"):
                out = out + c * t ** al
        return out

    def descriptor(self) -> str:
        return "power:" + ",".join(f"{c!r},{al!r}" for c, al in self.terms)


@dataclass(frozen=True)
class Sinusoid(_ForcingBase):
    """``f(t) = Omega sin(omega t)``."""

    Omega: float
    omega: float
    kind = "sin"

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    def __call__(self, t):
        return self.Omega * np.sin(self.omega * np.asarray(t, dtype=float))

    def maclaurin(self):
        return 0.0, float(self.Omega * self.omega)

    def descriptor(self) -> str:
        return f"sin:{self.Omega!r},{self.omega!r}"


@dataclass(frozen=True)
class Pulse(_ForcingBase):
    """Rectangular pulse ``amplitude [H(t) - H(t - t_off)]``."""

    amplitude: float
    t_off: float
    kind = "pulse"

    def __post_init__(self):
        if not self.t_off > 0:
            raise ValueError("t_off must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < self.t_off, self.amplitude, 0.0)

    def maclaurin(self):
        return float(self.amplitude), 0.0

    def descriptor(self) -> str:
        return f"pulse:{self.amplitude!r},{self.t_off!r}"


@dataclass(frozen=True)
class BesselJ0(_ForcingBase):
    amplitude: float = 1.0
    kind = "besselj0"

    def __call__(self, t):
        return self.amplitude * special.bessel_j0(np.asarray(t, dtype=float))

    def maclaurin(self):
        return float(self.amplitude), 0.0

    def descriptor(self) -> str:
        return f"besselj0:{self.amplitude!r}"


@dataclass(frozen=True)
class CallableForcing(_ForcingBase):
    """Arbitrary force given as a function of time.

    ``smoothness_hint`` is the number of continuous derivatives the caller
    vouches for; below 1 the quadrature accuracy is not guaranteed (the CLI
    warns).  ``breakpoints`` lists known discontinuities, handed to the
    quadrature.
    """

    f: Callable[[float], float]
    smoothness_hint: int = 2
    breakpoints: Tuple[float, ...] = ()
    kind = "callable"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return float(self.f(float(t)))
        return np.array([self.f(float(x)) for x in t.ravel()]).reshape(t.shape)

    def descriptor(self) -> str:
        return f"callable:{getattr(self.f, '__name__', 'f')}"


Forcing = Union[Zero, Constant, PowerSum, Sinusoid, Pulse, BesselJ0, CallableForcing]


@dataclass(frozen=True)
class BTProblem:
    coeffs: BTCoefficients
    ics: InitialConditions = field(default_factory=InitialConditions)
    forcing: Forcing = field(default_factory=Zero)

    @cached_property
    def roots(self) -> RootSystem:
        return RootSystem.from_coefficients(self.coeffs)


@dataclass(frozen=True)
class GeneralizedKernelSpec:
    """``s**lambda / (a s**m + b s**(p/q) + c)``."""

    m: int
    p: int
    q: int
    lam: float
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("m", "p", "q"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError("p/q must be in lowest terms")

    def polynomial(self) -> np.ndarray:
        """Coefficients (highest first) of ``a r**(m q) + b r**p + c``."""
        n = max(self.m * self.q, self.p)
        coef = np.zeros(n + 1)
        coef[n - self.m * self.q] += self.a
        coef[n - self.p] += self.b
        coef[n] += self.c
        return np.trim_zeros(coef, "f")


class Solution(NamedTuple):
    y: Union[float, np.ndarray]
    yc: Union[float, np.ndarray]
    yf: Union[float, np.ndarray]


# --------------------------------------------------------------------------
# helpers


def _as_time(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("t must be finite and non-negative")
    return arr


def _finish(total, magnitude, tol, what, scalar):
    """Check the imaginary residue of a root sum and return its real part."""
    total = np.asarray(total)
    bad = np.abs(total.imag) > tol * np.maximum(magnitude, 1.0)
    if np.any(bad):
        worst = float(np.max(np.abs(total.imag)))
        raise ImaginaryResidue(f"{what}: imaginary residue {worst:.3g}")
    real = np.real(total)
    return float(real) if scalar else real


def _W_grid(rs: RootSystem, t):
    """``W(r_k sqrt(t))`` with shape ``(4,) + t.shape``."""
    z = rs.roots.reshape((-1,) + (1,) * np.ndim(t)) * np.sqrt(t)
    return special.scaled_erfc(z)


def _root_sum(weights, values):
    """``sum_k weights[k] * values[k, ...]`` summing conjugate pairs first."""
    w = weights.reshape((-1,) + (1,) * (values.ndim - 1))
    terms = w * values
    return np.sum(terms, axis=0), np.sum(np.abs(terms), axis=0)


# --------------------------------------------------------------------------
# initial-condition part and kernel


def yc(rs: RootSystem, ics: InitialConditions, t):
    """Response to the initial conditions ``y(0) = y0``, ``y'(0) = v0``.

    ``sum_k (a r_k + b)(r_k**2 y0 + v0) / ((4 a r_k + 3 b) r_k**2) W(r_k sqrt(t))``
    """
    t = _as_time(t)
    if ics.homogeneous:
        return 0.0 if t.ndim == 0 else np.zeros_like(t)
    a, b = rs.coeffs.a, rs.coeffs.b
    r = rs.roots
    weights = (a * r + b) * (r * r * ics.y0 + ics.v0) / (rs.denom * r * r)
    total, mag = _root_sum(weights, _W_grid(rs, t))
    tol = 1e-10 * (abs(ics.y0) + abs(ics.v0) + 1.0)
    return _finish(total, mag, tol, "yc", t.ndim == 0)


def kernel(rs: RootSystem, tau):
    """Convolution kernel ``K(tau) = sum_k W(r_k sqrt(tau)) / ((4 a r_k + 3 b) r_k)``."""
    tau = _as_time(tau)
    total, mag = _root_sum(1.0 / (rs.denom * rs.roots), _W_grid(rs, tau))
    return _finish(total, mag, 1e-11, "kernel", tau.ndim == 0)


# --------------------------------------------------------------------------
# force response


def _quad(func, lo, hi, epsabs, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                func, lo, hi, epsabs=epsabs, epsrel=0.0, limit=400, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from None
    if not err <= epsabs:
        raise QuadratureFailure(
            f"quadrature error estimate {err:.3g} exceeds {epsabs:.3g}",
            achieved_error=err,
        )
    return val, err


def convolve(f: Callable, K: Callable, t: float, *, epsabs: float = 1e-9,
             breakpoints: Sequence[float] = ()) -> float:
    """``int_0^t f(t - tau) K(tau) dtau`` with endpoint-absorbing substitutions.

    The interval is split at ``s = min(1, t)/2``.  On ``[0, s]`` the
    substitution ``tau = u**2`` removes the half-integer powers of the kernel
    at the origin; on ``[s, t]`` the substitution ``tau = t - v**2`` does the
    same for power-law forces ``f(t) ~ t**alpha``.
    """
    if t == 0.0:
        return 0.0
    s = min(1.0, t) / 2.0

    def left(u):
        tau = u * u
        return float(f(t - tau)) * float(K(tau)) * 2.0 * u

    def right(v):
        tau = t - v * v
        return float(f(v * v)) * float(K(tau)) * 2.0 * v

    # discontinuities of f at f-argument x sit at tau = t - x
    lp = [math.sqrt(t - x) for x in breakpoints if 0 < t - x < s]
    rp = [math.sqrt(x) for x in breakpoints if 0 < x < t - s]
    v1, _ = _quad(left, 0.0, math.sqrt(s), epsabs / 2.0, lp or None)
    v2, _ = _quad(right, 0.0, math.sqrt(t - s), epsabs / 2.0, rp or None)
    return v1 + v2


def yf_convolution(rs: RootSystem, f, t, *, epsabs: float = 1e-9):
    """Force response ``int_0^t f(t - tau) K(tau) dtau`` by adaptive quadrature.

    ``f`` is any forcing object or plain callable.  Raises
    :class:`QuadratureFailure` when the requested absolute accuracy cannot be
    certified.
    """
    t = _as_time(t)
    if isinstance(f, Zero):
        return 0.0 if t.ndim == 0 else np.zeros_like(t)
    breakpoints = getattr(f, "breakpoints", ())
    if isinstance(f, Pulse):
        breakpoints = (f.t_off,)
    K = lambda tau: kernel(rs, tau)  # noqa: E731
    out = np.array([
        convolve(f, K, float(ti), epsabs=epsabs, breakpoints=breakpoints)
        for ti in t.ravel()
    ]).reshape(t.shape)
    return float(out) if t.ndim == 0 else out


def yf_constant(rs: RootSystem, C0: float, t):
    """Response to ``f = C0``: ``C0 sum_k (W(r_k sqrt t) - 1) / (r_k**3 (4 a r_k + 3 b))``."""
    t = _as_time(t)
    total, mag = _root_sum(1.0 / (rs.roots ** 3 * rs.denom), _W_grid(rs, t) - 1.0)
    return C0 * _finish(total, mag, 1e-10, "yf_constant", t.ndim == 0)


def _ml_grid(alpha_ml, beta, z):
    """Mittag-Leffler values on an array, closed forms where available."""
    if alpha_ml == 0.5 and special._half_integer(beta):
        return special.ml_half_array(beta, z)
    flat = np.array([special.mittag_leffler(alpha_ml, beta, zz) for zz in z.ravel()])
    return flat.reshape(z.shape)


def yf_power(rs: RootSystem, terms: Sequence[Tuple[float, float]], t):
    """Response to ``f = sum_l C_l t**alpha_l``.

    ``sum_l C_l Gamma(alpha_l + 1) t**(1/2 + alpha_l)
    sum_k E_{1/2, 3/2 + alpha_l}(r_k sqrt t) / (4 a r_k**3 + 3 b r_k**2)``
    """
    t = _as_time(t)
    out = np.zeros(t.shape)
    pos = t > 0
    tp = t[pos]
    weights = 1.0 / rs.dP
    for C, al in terms:
        if not al > -1.0:
            raise UnsupportedParameter(f"exponent {al} <= -1")
        if C == 0 or tp.size == 0:
            continue
        z = rs.roots[:, None] * np.sqrt(tp)[None, :]
        total, mag = _root_sum(weights, _ml_grid(0.5, 1.5 + al, z))
        inner = _finish(total, mag, 1e-9, "yf_power", False)
        out[pos] += C * math.gamma(al + 1.0) * tp ** (0.5 + al) * inner
    return float(out) if t.ndim == 0 else out


def yf_sinusoid(rs: RootSystem, Omega: float, omega: float, t):
    """Response to ``f = Omega sin(omega t)`` in closed form (Fresnel integrals)."""
    t = _as_time(t)
    if Omega == 0:
        return 0.0 if t.ndim == 0 else np.zeros_like(t)
    B = {m: weight_B(rs, m, omega) for m in (-1, 0, 1, 2)}
    r = rs.roots
    weights = 1.0 / (r * rs.denom * (omega ** 2 + r ** 4))
    total, mag = _root_sum(weights, _W_grid(rs, t))
    wsum = _finish(total, mag, 1e-9, "yf_sinusoid", t.ndim == 0)
    S, C = special.fresnel(np.sqrt(2.0 * omega * t / math.pi))
    cs, sn = np.cos(omega * t), np.sin(omega * t)
    out = Omega * (omega * (wsum - B[-1] * cs) - B[1] * sn)
    out = out + Omega * math.sqrt(2.0 / omega) * (
        S * (B[2] * cs - B[0] * omega * sn) - C * (B[2] * sn + B[0] * omega * cs)
    )
    return float(out) if t.ndim == 0 else out


def yf_pulse(rs: RootSystem, amplitude: float, t_off: float, t):
    """Response to ``amplitude [H(t) - H(t - t_off)]`` by superposition."""
    if not t_off > 0:
        raise ValueError("t_off must be positive")
    t = _as_time(t)
    out = yf_constant(rs, 1.0, t)
    late = t > t_off
    if np.any(late):
        shifted = yf_constant(rs, 1.0, np.where(late, t - t_off, 0.0))
        out = out - np.where(late, shifted, 0.0)
    out = amplitude * out
    return float(out) if t.ndim == 0 else out


def yf(rs: RootSystem, forcing: Forcing, t, *, epsabs: float = 1e-9):
    """Dispatch the force response to its closed form when one exists."""
    if isinstance(forcing, Zero):
        t = _as_time(t)
        return 0.0 if t.ndim == 0 else np.zeros_like(t)
    if isinstance(forcing, Constant):
        return yf_constant(rs, forcing.C0, t)
    if isinstance(forcing, PowerSum):
        return yf_power(rs, forcing.terms, t)
    if isinstance(forcing, Sinusoid):
        return yf_sinusoid(rs, forcing.Omega, forcing.omega, t)
    if isinstance(forcing, Pulse):
        return yf_pulse(rs, forcing.amplitude, forcing.t_off, t)
    return yf_convolution(rs, forcing, t, epsabs=epsabs)


def solve(problem: BTProblem, t) -> Solution:
    """``y(t) = y_c(t) + y_f(t)`` for the given problem."""
    rs = problem.roots
    c_part = yc(rs, problem.ics, t)
    f_part = yf(rs, problem.forcing, t)
    return Solution(c_part + f_part, c_part, f_part)


# --------------------------------------------------------------------------
# auxiliary integral and generalised inverse transform


def h_r(r: complex, t: float) -> complex:
    """``int_0^t sin(t - tau) W(r sqrt(tau)) dtau`` in closed form."""
    r = complex(r)
    if t < 0:
        raise ValueError("t must be non-negative")
    den = 1.0 + r ** 4
    if abs(den) < 1e-12:
        raise ResonantDenominator(f"1 + r^4 vanishes for r={r}")
    w = special.scaled_erfc(r * math.sqrt(t))
    S, C = special.fresnel(math.sqrt(2.0 * t / math.pi))
    st, ct = math.sin(t), math.cos(t)
    r2 = r * r
    body = w - r2 * st - ct + math.sqrt(2.0) * r * (
        S * (r2 * ct - st) - C * (r2 * st + ct)
    )
    return body / den


def sine_convolution(r: complex, omega: float, t: float) -> complex:
    """``int_0^t sin(omega (t - tau)) W(r sqrt(tau)) dtau = h_{r/sqrt(omega)}(omega t) / omega``."""
    return h_r(complex(r) / math.sqrt(omega), omega * t) / omega


def inverse_laplace_general(kspec: GeneralizedKernelSpec, t) -> float:
    """Inverse transform of ``s**lambda / (a s**m + b s**(p/q) + c)``.

    ``t**(1/q - lambda - 1) sum_k E_{1/q, 1/q - lambda}(r_k t**(1/q)) / P'(r_k)``
    with ``r_k`` the roots of ``P(r) = a r**(m q) + b r**p + c``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    coef = kspec.polynomial()
    roots = solve_poly_general(coef)
    if roots.size >= 2:
        sep = min(abs(x - y) for i, x in enumerate(roots) for y in roots[i + 1:])
        if sep <= 1e-8 * max(1.0, float(np.max(np.abs(roots)))):
            raise DegenerateRoots("generalised characteristic polynomial has a repeated root")
    dP = np.polyval(np.polyder(coef), roots)
    alpha = 1.0 / kspec.q
    beta = 1.0 / kspec.q - kspec.lam
    out = []
    for ti in t.ravel():
        z = roots * ti ** alpha
        vals = np.array([special.mittag_leffler(alpha, beta, zz) for zz in z])
        terms = vals / dP
        total = complex(np.sum(terms))
        val = _finish(total, float(np.sum(np.abs(terms))), 1e-9, "inverse transform", True)
        out.append(ti ** (alpha - kspec.lam - 1.0) * val)
    out = np.array(out).reshape(t.shape)
    return float(out) if t.ndim == 0 else out


# --------------------------------------------------------------------------
# residual check


def discrete_residual(problem: BTProblem, h: float, t_eval) -> np.ndarray:
    """Discrete residual of the closed-form solution at the points ``t_eval``.

    ``a y''(t) + b D^{3/2} y(t) + c y(t) - f(t)`` with ``y''`` a central
    second difference and ``D^{3/2}`` the Grunwald-Letnikov sum applied to
    ``z = y - y(0) - y'(0) t`` on the grid ``0, h, 2h, ...``.  Every point of
    ``t_eval`` must be a grid node at least one step from the origin.
    The residual is ``O(h)`` for smooth forces.
    """
    from .reference import gl_weights  # reference builds on this module

    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    idx = np.rint(t_eval / h).astype(int)
    if np.any(np.abs(idx * h - t_eval) > 1e-9 * np.maximum(t_eval, 1.0)) or np.any(idx < 1):
        raise ValueError("t_eval must lie on the grid m h with m >= 1")
    n = int(idx.max()) + 1
    grid = h * np.arange(n + 1)
    y = solve(problem, grid).y
    ics = problem.ics
    z = y - ics.y0 - ics.v0 * grid
    w = gl_weights(1.5, n)
    a, b, c = problem.coeffs.a, problem.coeffs.b, problem.coeffs.c
    out = np.empty(idx.size)
    for i, m in enumerate(idx):
        frac = np.dot(w[:m + 1], z[m::-1]) / h ** 1.5
        ydd = (y[m + 1] - 2.0 * y[m] + y[m - 1]) / (h * h)
        out[i] = a * ydd + b * frac + c * y[m] - float(problem.forcing(t_eval[i]))
    return out
