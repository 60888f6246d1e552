"""Roots of the characteristic quartic ``P(r) = a r**4 + b r**3 + c``.

With ``r = s**(1/2)`` the Laplace-domain denominator ``a s**2 + b s**(3/2) + c``
becomes the quartic ``P``.  Its four roots, the derivative values
``P'(r_k) = r_k**2 (4 a r_k + 3 b)`` and the root sums

    A_l = sum_k r_k**l / (4 a r_k + 3 b)
    B_m = sum_k r_k**m / ((4 a r_k + 3 b)(omega**2 + r_k**4))

are the backbone of every closed-form solution in this package.

The explicit solver follows Ferrari-style radicals and then polishes each
root with a few Newton steps; :func:`solve_poly_general` is an independent
companion-matrix route used for cross-checks and for higher-degree
polynomials.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateRoots,
    ImaginaryResidue,
    NonConvergence,
    ResonantDenominator,
    ZeroLeadingCoefficient,
)

RESIDUAL_TOL = 1e-10
SEPARATION_TOL = 1e-8
IMAG_TOL = 1e-12


@dataclass(frozen=True)
class BTCoefficients:
    """Coefficients of ``a y'' + b D^{3/2} y + c y``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"coefficient {name} must be finite")
            object.__setattr__(self, name, v)
        if self.a == 0.0:
            raise ZeroLeadingCoefficient("leading coefficient a must be nonzero")

    def poly(self, r):
        return self.a * r ** 4 + self.b * r ** 3 + self.c

    def dpoly(self, r):
        return r * r * (4.0 * self.a * r + 3.0 * self.b)

    def scale(self, rmax: float) -> float:
        """Magnitude used to normalise residuals of ``P``."""
        return abs(self.a) * rmax ** 4 + abs(self.b) * rmax ** 3 + abs(self.c)


@dataclass(frozen=True)
class RootSystem:
    """The four roots of ``P`` together with the radical intermediates.

    ``roots`` are sorted by real part, then imaginary part.  ``dP`` stores
    ``P'(r_k) = 4 a r_k**3 + 3 b r_k**2``.
    """

    coeffs: BTCoefficients
    roots: np.ndarray
    dP: np.ndarray
    beta: complex
    gamma: complex
    delta: complex
    R: complex
    Tplus: complex
    Tminus: complex
    residuals: np.ndarray = field(repr=False)

    @property
    def denom(self) -> np.ndarray:
        """``4 a r_k + 3 b`` for every root."""
        return 4.0 * self.coeffs.a * self.roots + 3.0 * self.coeffs.b

    @classmethod
    def from_coefficients(cls, a, b=None, c=None) -> "RootSystem":
        coeffs = a if isinstance(a, BTCoefficients) else BTCoefficients(a, b, c)
        return solve_quartic_explicit(coeffs)


def _sort_roots(roots):
    roots = np.asarray(roots, dtype=complex)
    # tiny imaginary parts of real roots would make the ordering unstable
    key = [(round(r.real, 12), round(r.imag, 12)) for r in roots]
    order = sorted(range(len(roots)), key=lambda i: key[i])
    return roots[order]


def _newton_polish(coeffs: BTCoefficients, r: complex, iterations: int = 5) -> complex:
    for _ in range(iterations):
        d = coeffs.dpoly(r)
        if d == 0:
            break
        step = coeffs.poly(r) / d
        r = r - step
        if abs(step) <= 1e-17 * max(abs(r), 1e-300):
            break
    return r


def _check_distinct(roots, scale_r):
    for i, j in itertools.combinations(range(len(roots)), 2):
        if abs(roots[i] - roots[j]) <= SEPARATION_TOL * scale_r:
            raise DegenerateRoots(
                f"roots {roots[i]:.6g} and {roots[j]:.6g} are not distinct"
            )


def _vieta_ok(coeffs: BTCoefficients, roots, tol=1e-10) -> bool:
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    e = np.poly(roots)  # monic: r^4 - e1 r^3 + e2 r^2 - e3 r + e4
    rmax = max(abs(r) for r in roots)
    targets = [b / a, 0.0, 0.0, c / a]
    scales = [rmax, rmax ** 2, rmax ** 3, rmax ** 4]
    return all(
        abs(e[i + 1] - targets[i]) <= tol * max(scales[i], abs(targets[i]), 1e-300) * 6
        for i in range(4)
    )


def quartic_intermediates(coeffs: BTCoefficients):
    """Radical intermediates ``beta, gamma, delta, u, R, T+, T-``."""
    beta = complex(coeffs.b / coeffs.a)
    gamma = complex(coeffs.c / coeffs.a)
    delta = (9.0 * beta ** 2 + cmath.sqrt(81.0 * beta ** 4 - 768.0 * gamma)) * gamma
    if delta == 0:
        raise DegenerateRoots("delta vanishes: the quartic has a multiple root")
    u = (delta / 18.0) ** (1.0 / 3.0) + 4.0 * gamma * (2.0 / (3.0 * delta)) ** (1.0 / 3.0)
    R = 0.5 * cmath.sqrt(beta ** 2 / 4.0 + u)
    if R == 0:
        shift = 0j
    else:
        shift = beta ** 3 / (8.0 * R)
    Tplus = 0.5 * cmath.sqrt(beta ** 2 / 2.0 - u - shift)
    Tminus = 0.5 * cmath.sqrt(beta ** 2 / 2.0 - u + shift)
    return beta, gamma, delta, u, R, Tplus, Tminus


def solve_quartic_explicit(coeffs: BTCoefficients) -> RootSystem:
    """Roots of ``a r**4 + b r**3 + c`` from the radical formulas.

    The sign pairing between ``R`` and ``T+-`` is not fixed a priori: every
    assignment is tried and the first whose polished roots pass the
    residual and Vieta checks is kept.

    Raises
    ------
    ZeroLeadingCoefficient
        If ``a == 0``.
    DegenerateRoots
        If two roots coincide (e.g. ``c == 0`` gives a triple root at 0).
    """
    if not isinstance(coeffs, BTCoefficients):
        coeffs = BTCoefficients(*coeffs)
    if coeffs.c == 0.0:
        raise DegenerateRoots("c = 0 gives a triple root at r = 0")
    beta, gamma, delta, u, R, Tp, Tm = quartic_intermediates(coeffs)
    base = -beta / 4.0

    candidates = []
    for t_with_plus_R, t_with_minus_R in ((Tp, Tm), (Tm, Tp)):
        raw = [
            base + R + t_with_plus_R,
            base - R + t_with_minus_R,
            base + R - t_with_plus_R,
            base - R - t_with_minus_R,
        ]
        candidates.append(raw)

    best = None
    for raw in candidates:
        polished = np.array([_newton_polish(coeffs, r) for r in raw])
        rmax = float(np.max(np.abs(polished)))
        res = np.abs(coeffs.poly(polished)) / coeffs.scale(rmax)
        ok = np.all(res <= RESIDUAL_TOL) and _vieta_ok(coeffs, polished)
        score = float(np.max(res))
        if ok and (best is None or score < best[0]):
            best = (score, polished, res)
    if best is None:
        raise NonConvergence(
            "no branch assignment of the radical formulas satisfies the residual "
            "and Vieta checks",
            beta=beta, gamma=gamma, delta=delta, R=R,
        )
    _, roots, _ = best
    roots = _sort_roots(roots)
    rmax = float(np.max(np.abs(roots)))
    _check_distinct(roots, rmax)
    residuals = np.abs(coeffs.poly(roots)) / coeffs.scale(rmax)
    return RootSystem(
        coeffs=coeffs,
        roots=roots,
        dP=coeffs.dpoly(roots),
        beta=beta,
        gamma=gamma,
        delta=delta,
        R=R,
        Tplus=Tp,
        Tminus=Tm,
        residuals=residuals,
    )


def solve_poly_general(coefficients: Sequence[float], *, tol: float = 1e-9) -> np.ndarray:
    """All roots of ``sum_i coefficients[i] r**(N-i)`` (highest degree first).

    Companion-matrix eigenvalues followed by Newton polishing; every root
    must satisfy ``|P(r)| <= tol * sum_i |c_i| |r|**(N-i)``.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.size < 2:
        raise ValueError("need a polynomial of degree >= 1")
    if coefficients[0] == 0:
        raise ZeroLeadingCoefficient("leading coefficient must be nonzero")
    n = coefficients.size - 1
    dcoef = np.polyder(coefficients)
    roots = np.roots(coefficients).astype(complex)
    out = []
    for r in roots:
        for _ in range(8):
            d = np.polyval(dcoef, r)
            if d == 0:
                break
            step = np.polyval(coefficients, r) / d
            r = r - step
            if abs(step) <= 1e-16 * max(abs(r), 1e-300):
                break
        scale = np.sum(np.abs(coefficients) * np.abs(r) ** np.arange(n, -1, -1))
        if not abs(np.polyval(coefficients, r)) <= tol * scale:
            raise NonConvergence(
                f"root {r} not certified", residual=abs(np.polyval(coefficients, r))
            )
        out.append(r)
    return _sort_roots(out)


def _real_part(total: complex, magnitude: float, what: str, tol: float = IMAG_TOL) -> float:
    if abs(total.imag) > tol * max(magnitude, 1.0):
        raise ImaginaryResidue(f"{what} has imaginary residue {total.imag:.3g}")
    return float(total.real)


def weight_A(rs: RootSystem, ell: int) -> float:
    """``A_l = sum_k r_k**l / (4 a r_k + 3 b)`` (real part, residue checked)."""
    terms = rs.roots.astype(complex) ** ell / rs.denom
    return _real_part(complex(np.sum(terms)), float(np.sum(np.abs(terms))), f"A_{ell}")


def weight_B(rs: RootSystem, m: int, omega: float) -> float:
    """``B_m = sum_k r_k**m / ((4 a r_k + 3 b)(omega**2 + r_k**4))``.

    Raises
    ------
    ResonantDenominator
        If ``|omega**2 + r_k**4| < 1e-12 omega**2`` for some root.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    r = rs.roots.astype(complex)
    den = omega ** 2 + r ** 4
    if np.any(np.abs(den) < 1e-12 * omega ** 2):
        raise ResonantDenominator(f"omega={omega} resonates with a root of P")
    terms = r ** m / (rs.denom * den)
    return _real_part(complex(np.sum(terms)), float(np.sum(np.abs(terms))), f"B_{m}")
