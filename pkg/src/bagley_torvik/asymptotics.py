"""Small-time and large-time expansions of the solution.

Near ``t = 0`` the response is governed by the large-``s`` behaviour of the
Laplace transform, near ``t = oo`` by the small-``s`` behaviour.  The module
never switches regime by itself: the caller picks ``SmallT`` or ``LargeT``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import special
from .closed_form import InitialConditions, _finish
from .errors import UnsupportedParameter
from .roots import BTCoefficients, RootSystem, weight_A, weight_B

SQRT_PI = special.SQRT_PI


class RegimeKind(str, enum.Enum):
    SmallT = "SmallT"
    LargeT = "LargeT"


@dataclass(frozen=True)
class AsymptoticRegime:
    kind: RegimeKind
    order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", RegimeKind(self.kind))
        limit = 2 if self.kind is RegimeKind.SmallT else 1
        if not 1 <= self.order <= limit:
            raise UnsupportedParameter(
                f"order {self.order} not implemented for {self.kind.value}"
            )


SMALL_T = AsymptoticRegime(RegimeKind.SmallT)
LARGE_T = AsymptoticRegime(RegimeKind.LargeT)


def _positive(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    return t


def yc_asymptotic(coeffs: BTCoefficients, ics: InitialConditions,
                  regime: AsymptoticRegime, t):
    """Leading behaviour of the initial-condition response.

    SmallT: ``y0 (1 - c t**2 / (2 a)) + v0 t`` (error ``O(t**(5/2))``).
    LargeT: ``b / (c sqrt(pi t)) (v0 - y0 / (2 t))``.
    """
    t = _positive(t)
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    if regime.kind is RegimeKind.SmallT:
        out = ics.y0 * (1.0 - c * t * t / (2.0 * a)) + ics.v0 * t
    else:
        if c == 0:
            raise UnsupportedParameter("the large-time form needs c != 0")
        out = b / (c * np.sqrt(math.pi * t)) * (ics.v0 - ics.y0 / (2.0 * t))
    return float(out) if out.ndim == 0 else out


_SERIES_RADIUS = 1.0


def _In(nu, t, n, poly):
    """``t**(n+1) E_{1/2,n+2}(nu sqrt t)``, by series where the closed form cancels."""
    nu = np.asarray(nu, dtype=complex)
    t = np.asarray(t, dtype=float)
    nu, t = np.broadcast_arrays(nu, t)
    z = nu * np.sqrt(t)
    small = np.abs(z) < _SERIES_RADIUS
    out = np.empty(z.shape, dtype=complex)
    if np.any(~small):
        zb, nb = z[~small], nu[~small]
        out[~small] = (special.scaled_erfc(zb) - poly(zb)) / nb ** (2 * n + 2)
    if np.any(small):
        zs = z[small]
        # E_{1/2,beta}(z) = sum_m z**m / Gamma(m/2 + beta) with beta = n + 2
        coef = [1.0 / math.gamma(m / 2.0 + n + 2.0) for m in range(64)]
        acc = np.zeros(zs.shape, dtype=complex)
        for cm in reversed(coef):
            acc = acc * zs + cm
        out[small] = t[small] ** (n + 1) * acc
    return out if out.ndim else out[()]


def I0(nu, t):
    """``int_0^t W(nu sqrt(tau)) dtau`` in closed form."""
    return _In(nu, t, 0, lambda z: 1.0 + 2.0 * z / SQRT_PI)


def I1(nu, t):
    """``int_0^t (t - tau) W(nu sqrt(tau)) dtau`` in closed form."""
    return _In(nu, t, 1, lambda z: 1.0 + 2.0 * z / SQRT_PI + z ** 2 + 4.0 * z ** 3 / (3.0 * SQRT_PI))


def yf_smallt_general(rs: RootSystem, f0: float, f1: float, t):
    """First-order small-time force response from ``f(0)`` and ``f'(0)``.

    ``sum_k [f0 I0(r_k, t) + f1 I1(r_k, t)] / ((4 a r_k + 3 b) r_k)``
    """
    t = _positive(t)
    r = rs.roots.reshape((-1,) + (1,) * t.ndim)
    weight = 1.0 / (rs.denom * rs.roots)
    weight = weight.reshape(r.shape)
    terms = weight * (f0 * I0(r, t) + f1 * I1(r, t))
    return _finish(np.sum(terms, axis=0), np.sum(np.abs(terms), axis=0), 1e-10,
                   "yf_smallt_general", t.ndim == 0)


def yf_power_asymptotic(rs: RootSystem, terms: Sequence[Tuple[float, float]],
                        regime: AsymptoticRegime, t):
    """Leading behaviour of the response to ``sum_l C_l t**alpha_l``.

    SmallT: ``A_1 sum_l C_l t**(2+alpha_l) / ((alpha_l+1)(alpha_l+2))``.
    LargeT: ``-A_{-3} sum_l C_l t**alpha_l``.

    Raises
    ------
    UnsupportedParameter
        If the weight multiplying the leading term vanishes numerically,
        in which case the quoted term is not the leading one.
    """
    t = _positive(t)
    out = np.zeros(t.shape)
    if regime.kind is RegimeKind.SmallT:
        A1 = weight_A(rs, 1)
        if abs(A1) < 1e-12 * max(1.0, 1.0 / abs(rs.coeffs.a)):
            raise UnsupportedParameter("A_1 vanishes: small-time term is of higher order")
        for C, al in terms:
            out += C * t ** (2.0 + al) / ((al + 1.0) * (al + 2.0))
        out *= A1
    else:
        if rs.coeffs.c == 0:
            raise UnsupportedParameter("the large-time form needs c != 0")
        Am3 = weight_A(rs, -3)
        for C, al in terms:
            out += C * t ** al
        out *= -Am3
    return float(out) if out.ndim == 0 else out


def yf_sinusoid_asymptotic(rs: RootSystem, Omega: float, omega: float, t):
    """Large-time response to ``Omega sin(omega t)``: Fresnel and steady-state terms."""
    t = _positive(t)
    if Omega == 0:
        return 0.0 if t.ndim == 0 else np.zeros_like(t)
    B = {m: weight_B(rs, m, omega) for m in (-1, 0, 1, 2)}
    S, C = special.fresnel(np.sqrt(2.0 * omega * t / math.pi))
    cs, sn = np.cos(omega * t), np.sin(omega * t)
    out = Omega * math.sqrt(2.0 / omega) * (
        S * (B[2] * cs - B[0] * omega * sn) - C * (B[2] * sn + B[0] * omega * cs)
    ) - Omega * (B[-1] * omega * cs + B[1] * sn)
    return float(out) if np.ndim(out) == 0 else out
