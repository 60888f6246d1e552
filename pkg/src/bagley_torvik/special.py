"""Scalar special-function kernels.

Everything the closed forms need: reciprocal gamma, the scaled complementary
error function ``W(z) = exp(z**2) * erfc(-z)``, Fresnel integrals, Bessel
``J0``, the two-parameter Mittag-Leffler function and its derivatives, and
the Cohen-Rodriguez Villegas-Zagier acceleration of alternating series.

Mittag-Leffler certified region
-------------------------------
``mittag_leffler`` is certified to 1e-10 relative accuracy for
``0.05 <= alpha <= 2``, any real ``beta`` with ``|beta| <= 10`` and
``|z| <= 50``.  Inside that region the evaluation path is

* the closed ``alpha = 1/2`` reductions for ``beta`` in {-1/2, 0, 1/2, 1, 3/2}
  (and every other half-integer ``beta`` through the beta recurrence);
* the power series when it is well conditioned (cancellation check);
* the large-``|z|`` expansion when ``|z| >= 15``, ``|z|**(1/alpha) >= 40``
  and the algebraic tail drops below round-off within 60 terms;
* otherwise numerical inversion of the Laplace transform
  ``s**(alpha-beta) / (s**alpha - z)`` on an optimal parabolic contour plus the
  residues of the poles that lie to the right of it.

Parameters outside the region raise :class:`UnsupportedParameter`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy import special as _sp

from . import _altseries
from .errors import NonConvergence, UnsupportedParameter

SQRT_PI = math.sqrt(math.pi)
_EPS = np.finfo(float).eps
_LOG_EPS = math.log(_EPS)

ALPHA_RANGE = (0.05, 2.0)
BETA_MAX = 10.0
Z_MAX = 50.0


# --------------------------------------------------------------------------
# elementary kernels


def rgamma(x):
    """Reciprocal gamma function, exactly zero at the poles of Gamma."""
    return _sp.rgamma(x)


def scaled_erfc(z):
    """Return ``W(z) = exp(z**2) * erfc(-z)`` for complex ``z``.

    ``W`` is the Faddeeva function rotated onto the real axis,
    ``W(z) = w(-i z)``, so it inherits the conjugate symmetry
    ``W(conj(z)) = conj(W(z))`` and is real for real ``z``.

    Raises
    ------
    OverflowError
        If the value is not representable, which happens for large
        positive ``Re(z**2)`` with ``Re(z) > 0``.
    """
    zz = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        w = _sp.wofz(-1j * zz)
    if not np.all(np.isfinite(w)):
        raise OverflowError(f"exp(z^2) erfc(-z) overflows at z={z!r}")
    if zz.ndim == 0:
        return complex(w)
    return w


def fresnel(x):
    """Fresnel integrals ``(S(x), C(x))`` with the ``pi t**2 / 2`` kernel.

    Negative arguments are handled through odd symmetry.
    """
    s, c = _sp.fresnel(x)
    if np.ndim(s) == 0:
        return float(s), float(c)
    return s, c


def bessel_j0(x):
    return _sp.j0(x)


# --------------------------------------------------------------------------
# alternating series acceleration


class AcceleratedSum(NamedTuple):
    value: float
    error: float


def accelerate_alternating(
    terms: Union[Sequence[float], Callable[[int], float]], n: int
) -> AcceleratedSum:
    """Sum ``sum_k (-1)**k a_k`` with the CRVZ algorithm.

    Parameters
    ----------
    terms
        Either a sequence holding at least ``n`` magnitudes ``a_k >= 0`` or a
        callable ``k -> a_k``.
    n
        Number of stages; only ``a_0 .. a_{n-1}`` are read.

    Returns
    -------
    AcceleratedSum
        ``value`` and the algorithm's own error estimate
        ``2 |value| / (3 + sqrt 8)**n``, which is a rigorous bound when the
        ``a_k`` are moments of a positive measure on [0, 1].
    """
    if n < 1:
        raise ValueError("n must be positive")
    get = terms if callable(terms) else terms.__getitem__
    value = _altseries.crvz_float([get(k) for k in range(n)])
    d = (3.0 + math.sqrt(8.0)) ** n
    return AcceleratedSum(value, 2.0 * abs(value) / d)


# --------------------------------------------------------------------------
# Mittag-Leffler function


@dataclass(frozen=True)
class MLParams:
    """Address of ``E_{alpha,beta}^{(k)}``."""

    alpha: float
    beta: float
    deriv_order: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.deriv_order < 0:
            raise ValueError("deriv_order must be non-negative")

    def __call__(self, z):
        if self.deriv_order == 0:
            return mittag_leffler(self.alpha, self.beta, z)
        return ml_derivative(self.alpha, self.beta, self.deriv_order, z)


def _half_integer(beta):
    two = 2.0 * beta
    return abs(two - round(two)) < 1e-14


def _ml_half(beta_twice: int, z: complex) -> complex:
    """``E_{1/2, beta}(z)`` for ``beta = beta_twice / 2`` in closed form."""
    w = scaled_erfc(z)
    if beta_twice == 2:
        return w
    if beta_twice == 1:
        return 1.0 / SQRT_PI + z * w
    if beta_twice == 3:
        return (w - 1.0) / z
    if beta_twice == 0:
        return z * (1.0 / SQRT_PI + z * w)
    if beta_twice == -1:
        return (z * z - 0.5) / SQRT_PI + z ** 3 * w
    # walk the beta recurrence towards the closed forms
    if beta_twice > 3:
        e = _ml_half(beta_twice - 1, z)
        return (e - rgamma((beta_twice - 1) / 2.0)) / z
    return rgamma(beta_twice / 2.0) + z * _ml_half(beta_twice + 1, z)


def _ml_series(alpha, beta, z, max_terms=2000):
    """Power series with a cancellation check; ``None`` when ill conditioned."""
    total = 0j
    abs_total = 0.0
    zn = 1.0 + 0j
    small = 0
    for n in range(max_terms):
        term = zn * rgamma(alpha * n + beta)
        total += term
        abs_total += abs(term)
        if abs(term) <= 1e-17 * abs(total) and alpha * n + beta > 1:
            # terms are eventually decreasing; demand a few in a row
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        zn *= z
        if not cmath.isfinite(zn):
            return None
    else:
        return None
    if abs_total * 64 * _EPS > 1e-12 * abs(total):
        return None
    return total


def _ml_asymptotic(alpha, beta, z, max_terms=60):
    """Large-|z| expansion; ``None`` if the tail cannot be certified."""
    az = abs(z)
    if az < 15.0 or az ** (1.0 / alpha) < 40.0:
        return None
    residue = _ml_residues(alpha, beta, z, _ml_poles(alpha, z))
    algebraic = 0j
    zinv = 1.0 / z
    zn = 1.0 + 0j
    prev = math.inf
    for n in range(1, max_terms + 1):
        zn *= zinv
        term = zn * rgamma(beta - alpha * n)
        mag = abs(term)
        if rgamma(beta - alpha * n) != 0 and mag > prev:
            return None  # started to diverge before reaching round-off
        algebraic -= term
        scale = max(abs(residue + algebraic), 1e-300)
        if mag <= 1e-17 * scale and n >= 2:
            return residue + algebraic
        if rgamma(beta - alpha * n) != 0:
            prev = mag
    return None


def _ml_poles(alpha, z):
    """Solutions of ``s**alpha = z`` on the principal sheet."""
    theta = cmath.phase(z)
    kmin = math.ceil(-alpha / 2.0 - theta / (2.0 * math.pi))
    kmax = math.floor(alpha / 2.0 - theta / (2.0 * math.pi))
    r = abs(z) ** (1.0 / alpha)
    return [
        r * cmath.exp(1j * (theta + 2.0 * math.pi * k) / alpha)
        for k in range(kmin, kmax + 1)
    ]


def _ml_residues(alpha, beta, z, poles):
    res = 0j
    for s in poles:
        try:
            res += s ** (1.0 - beta) * cmath.exp(s) / alpha
        except OverflowError:
            raise OverflowError(
                f"E_{{{alpha},{beta}}}({z}) exceeds the floating-point range"
            ) from None
    return res


def _param_bounded(phi_j, phi_j1, pj, qj, log_eps):
    """Optimal parabola inside a strip bounded by two singularities."""
    fac = 1.01
    f_max = math.exp(log_eps - _LOG_EPS)
    sq_j = math.sqrt(phi_j)
    threshold = 2.0 * math.sqrt(log_eps - _LOG_EPS)
    sq_j1 = min(math.sqrt(phi_j1), threshold - sq_j)
    if pj < 1e-14 and qj < 1e-14:
        sqb_j, sqb_j1, f_bar = sq_j, sq_j1, 1.0
    elif pj < 1e-14:
        sqb_j = sq_j
        f_min = fac * (sq_j / (sq_j1 - sq_j)) ** qj if sq_j > 0 else fac
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fq = f_bar ** (-1.0 / qj)
        sqb_j1 = (2.0 * sq_j1 - fq * sq_j) / (2.0 + fq)
    elif qj < 1e-14:
        sqb_j1 = sq_j1
        f_min = fac * (sq_j1 / (sq_j1 - sq_j)) ** pj
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1.0 / pj)
        sqb_j = (2.0 * sq_j + fp * sq_j1) / (2.0 - fp)
    else:
        f_min = fac * (sq_j + sq_j1) / (sq_j1 - sq_j) ** max(pj, qj)
        if f_min >= f_max:
            return None
        f_min = max(f_min, 1.5)
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1.0 / pj)
        fq = f_bar ** (-1.0 / qj)
        w = -phi_j1 / log_eps
        den = 2.0 + w - (1.0 + w) * fp + fq
        sqb_j = ((2.0 + w + fq) * sq_j + fp * sq_j1) / den
        sqb_j1 = (-(1.0 + w) * fq * sq_j + (2.0 + w - (1.0 + w) * fp) * sq_j1) / den
    log_eps = log_eps - math.log(f_bar)
    w = -sqb_j1 ** 2 / log_eps
    mu = (((1.0 + w) * sqb_j + sqb_j1) / (2.0 + w)) ** 2
    h = (
        -2.0 * math.pi / log_eps * (sqb_j1 - sqb_j)
        / ((1.0 + w) * sqb_j + sqb_j1)
    )
    if not (mu > 0 and h > 0):
        return None
    n = math.ceil(math.sqrt(1.0 - log_eps / mu) / h)
    return mu, h, n


def _param_unbounded(phi_j, pj, log_eps):
    """Optimal parabola to the right of the last singularity."""
    sq_phi_j = math.sqrt(phi_j)
    phib = phi_j * 1.01 if phi_j > 0 else 0.01
    sqb = math.sqrt(phib)
    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    for _ in range(100):
        log_eps_phi = log_eps / phib
        n = math.ceil(phib / math.pi * (1.0 - 1.5 * log_eps_phi + math.sqrt(1.0 - 2.0 * log_eps_phi)))
        a = math.pi * n / phib
        sq_mu = sqb * abs(4.0 - a) / abs(7.0 - math.sqrt(1.0 + 12.0 * a))
        fbar = ((sqb - sq_phi_j) / sq_mu) ** (-pj)
        if pj < 1e-14 or f_min < fbar < f_max:
            break
        sqb = f_tar ** (-1.0 / pj) * sq_mu + sq_phi_j
        phib = sqb ** 2
    mu = sq_mu ** 2
    h = (-3.0 * a - 2.0 + 2.0 * math.sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n
    threshold = log_eps - _LOG_EPS
    if mu > threshold:
        q = 0.0 if abs(pj) < 1e-14 else f_tar ** (-1.0 / pj) * math.sqrt(mu)
        phib = (q + math.sqrt(phi_j)) ** 2
        if phib < threshold:
            w = math.sqrt(_LOG_EPS / (_LOG_EPS - log_eps))
            u = math.sqrt(-phib / _LOG_EPS)
            mu = threshold
            n = math.ceil(w * log_eps / 2.0 / math.pi / (u * w - 1.0))
            h = w / n
        else:
            return None
    return mu, h, n


def _ml_contour(alpha, beta, z, tol=1e-15):
    """Laplace-transform inversion on an optimal parabolic contour."""
    log_eps = math.log(tol)
    poles = _ml_poles(alpha, z)
    levels = sorted(((s.real + abs(s)) / 2.0, i) for i, s in enumerate(poles))
    levels = [(phi, i) for phi, i in levels if phi > 1e-15]
    sing = [0j] + [poles[i] for _, i in levels]
    phi = [0.0] + [p for p, _ in levels] + [math.inf]
    n_sing = len(sing)
    p = [max(0.0, -2.0 * (alpha - beta + 1.0))] + [1.0] * (n_sing - 1)
    q = [1.0] * (n_sing - 1) + [math.inf]

    for _ in range(8):
        admissible = [
            j for j in range(n_sing)
            if phi[j] < log_eps - _LOG_EPS and phi[j] < phi[j + 1]
        ]
        best = None
        for j in admissible:
            if j < n_sing - 1:
                par = _param_bounded(phi[j], phi[j + 1], p[j], q[j], log_eps)
            else:
                par = _param_unbounded(phi[j], p[j], log_eps)
            if par is not None and (best is None or par[2] < best[1][2]):
                best = (j, par)
        if best is not None and best[1][2] <= 200:
            break
        log_eps += math.log(10.0)
    else:
        raise UnsupportedParameter(
            f"no admissible contour for E_{{{alpha},{beta}}}({z})"
        )

    j, (mu, h, n) = best
    u = h * np.arange(-n, n + 1)
    s = mu * (1j * u + 1.0) ** 2
    ds = -2.0 * mu * u + 2.0j * mu
    with np.errstate(all="ignore"):
        f = np.exp(s) * s ** (alpha - beta) / (s ** alpha - z) * ds
    integral = h * np.sum(f) / (2j * math.pi)
    return integral + _ml_residues(alpha, beta, z, sing[j + 1:])


def mittag_leffler(alpha: float, beta: float, z) -> complex:
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)``.

    See the module docstring for the certified region and the evaluation
    strategy.  Raises :class:`UnsupportedParameter` outside that region.
    """
    alpha = float(alpha)
    beta = float(beta)
    z = complex(z)
    if not ALPHA_RANGE[0] <= alpha <= ALPHA_RANGE[1]:
        raise UnsupportedParameter(f"alpha={alpha} outside {ALPHA_RANGE}")
    if abs(beta) > BETA_MAX:
        raise UnsupportedParameter(f"|beta|={abs(beta)} exceeds {BETA_MAX}")
    if abs(z) > Z_MAX:
        raise UnsupportedParameter(f"|z|={abs(z)} exceeds {Z_MAX}")
    if z == 0:
        return complex(rgamma(beta))

    real_axis = z.imag == 0.0
    value = _ml_asymptotic(alpha, beta, z)
    half = alpha == 0.5 and _half_integer(beta)
    if value is None and half and -1 <= round(2.0 * beta) <= 3:
        value = _ml_half(int(round(2.0 * beta)), z)
    if value is None and abs(z) <= 8.0:
        value = _ml_series(alpha, beta, z)
    if value is None and half and abs(z) >= 1.0:
        # the recurrence away from the five base cases divides by z
        value = _ml_half(int(round(2.0 * beta)), z)
    if value is None:
        value = _ml_contour(alpha, beta, z)
    if real_axis:
        return complex(value.real, 0.0)
    return complex(value)


def ml_half_array(beta: float, z: np.ndarray) -> np.ndarray:
    """Vectorised ``E_{1/2,beta}`` for half-integer ``beta`` (closed forms only).

    Used on hot paths where the argument is an array of ``r_k sqrt(t)``.
    Small arguments of the divided-difference forms fall back to the scalar
    routine to avoid cancellation.
    """
    if not _half_integer(beta):
        raise UnsupportedParameter("ml_half_array needs a half-integer beta")
    bt = int(round(2.0 * beta))
    z = np.asarray(z, dtype=complex)
    w = scaled_erfc(z)
    out = _ml_half_vec(bt, z, w)
    if bt >= 3:
        small = np.abs(z) < 0.5
        if np.any(small):
            out = np.array(out, copy=True)
            flat = out.reshape(-1)
            zf = z.reshape(-1)
            for i in np.flatnonzero(small.reshape(-1)):
                flat[i] = mittag_leffler(0.5, beta, zf[i])
    return out


def _ml_half_vec(bt, z, w):
    if bt == 2:
        return w
    if bt == 1:
        return 1.0 / SQRT_PI + z * w
    if bt == 3:
        with np.errstate(all="ignore"):
            return (w - 1.0) / z
    if bt == 0:
        return z * (1.0 / SQRT_PI + z * w)
    if bt == -1:
        return (z * z - 0.5) / SQRT_PI + z ** 3 * w
    if bt > 3:
        with np.errstate(all="ignore"):
            return (_ml_half_vec(bt - 1, z, w) - rgamma((bt - 1) / 2.0)) / z
    return rgamma(bt / 2.0) + z * _ml_half_vec(bt + 1, z, w)


# --------------------------------------------------------------------------
# derivatives of the Mittag-Leffler function


def ml_derivative(
    alpha: float,
    beta: float,
    k: int,
    z: float,
    *,
    tol: float = 1e-9,
    precision: str = "auto",
) -> float:
    """k-th derivative ``sum_j (j+k)! z**j / (j! Gamma(alpha (j+k) + beta))``.

    For ``z < 0`` the series alternates and is summed with
    :func:`accelerate_alternating`, doubling the number of stages until two
    successive estimates agree to ``tol`` (relative).  ``precision`` selects
    the working arithmetic of the summation: ``"double"``,
    ``"double-double"`` (only for ``alpha = 1/2``) or ``"auto"``, which
    picks double-double whenever it is available.  The cancellation grows
    like ``exp(|z|**(1/alpha))``; once it swamps ``tol`` the routine raises
    :class:`NonConvergence` rather than return an inaccurate value.  With
    ``alpha = 1/2`` and double-double this happens only for ``k >~ 5`` near
    ``|z| ~ 6``.
    """
    if precision == "auto":
        precision = "double-double" if alpha == 0.5 else "double"
    if k < 0 or k > 60:
        raise UnsupportedParameter("derivative order must lie in [0, 60]")
    z = float(z)
    if z == 0.0:
        return math.factorial(k) * float(rgamma(alpha * k + beta))
    if z > 0:
        return _altseries.positive_series(alpha, beta, k, z)
    value, _ = _altseries.alternating_ml_derivative(
        alpha, beta, np.array([k]), np.array([-z]), tol=tol, precision=precision
    )
    return float(value[0, 0])
