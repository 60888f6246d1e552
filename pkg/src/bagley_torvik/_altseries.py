"""Summation engines for alternating Mittag-Leffler derivative series.

The series

    E^{(k)}_{alpha,beta}(-x) = sum_j (-1)**j (j+k)! x**j / (j! Gamma(alpha (j+k) + beta))

alternates for ``x > 0`` and its terms peak near ``j ~ 2 x**2`` (for
``alpha = 1/2``) at a size of roughly ``exp(x**2)``, so any summation loses
that many digits to cancellation.  Two engines are provided:

* a double-precision engine valid for any ``alpha`` (terms in log space);
* a double-double engine (about 32 significant digits) for ``alpha = 1/2``,
  built on error-free transformations and vectorised over both the
  derivative order and the argument.

Both sum the terms with Cohen-Rodriguez Villegas-Zagier (CRVZ) weights and
double the number of stages until successive estimates agree.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special as _sp

from .errors import NonConvergence, UnsupportedParameter

MAX_TERMS = 10_000
_START_STAGES = 16
_EPS = np.finfo(float).eps
_DD_EPS = 2.0 ** -104
_SPLITTER = 134217729.0  # 2**27 + 1


# --------------------------------------------------------------------------
# CRVZ weights


@lru_cache(maxsize=64)
def _crvz_weights_mp(n: int):
    """Signed CRVZ weights ``w_k`` with ``sum (-1)^k a_k ~ sum w_k a_k``."""
    with mpmath.workprec(160):
        d = (3 + mpmath.sqrt(8)) ** n
        d = (d + 1 / d) / 2
        b = mpmath.mpf(-1)
        c = -d
        out = []
        for k in range(n):
            c = b - c
            out.append(c / d)
            b = (k + n) * (k - n) * b / ((k + mpmath.mpf(0.5)) * (k + 1))
        hi = np.array([float(w) for w in out])
        lo = np.array([float(w - mpmath.mpf(float(w))) for w in out])
    return hi, lo


def crvz_weights(n: int) -> np.ndarray:
    return _crvz_weights_mp(n)[0]


def crvz_float(terms) -> float:
    """CRVZ sum of ``sum_k (-1)**k terms[k]`` using all supplied terms."""
    a = np.asarray(terms, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.dot(crvz_weights(a.size), a))


# --------------------------------------------------------------------------
# double-double arithmetic on numpy arrays (hi, lo) pairs


def _two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _quick_two_sum(a, b):
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def dd_add(x, y):
    s, e = _two_sum(x[0], y[0])
    t, f = _two_sum(x[1], y[1])
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    return _quick_two_sum(s, e)


def dd_mul(x, y):
    p, e = _two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return _quick_two_sum(p, e)


def dd_mul_d(x, b):
    p, e = _two_prod(x[0], b)
    e = e + x[1] * b
    return _quick_two_sum(p, e)


def dd_div(x, y):
    q1 = x[0] / y[0]
    r = dd_add(x, dd_mul_d(y, -q1))
    q2 = r[0] / y[0]
    r = dd_add(r, dd_mul_d(y, -q2))
    q3 = r[0] / y[0]
    q = _quick_two_sum(q1, q2)
    return dd_add(q, (q3, np.zeros_like(q3)))


def dd_from_mp(values):
    values = list(values)
    hi = np.array([float(v) for v in values])
    lo = np.array([float(v - mpmath.mpf(float(v))) for v in values])
    return hi, lo


# --------------------------------------------------------------------------
# positive arguments: no cancellation


def positive_series(alpha: float, beta: float, k: int, x: float) -> float:
    """``E^{(k)}_{alpha,beta}(x)`` for ``x > 0`` by direct summation."""
    total = 0.0
    small = 0
    lx = math.log(x)
    for j in range(MAX_TERMS):
        arg = alpha * (j + k) + beta
        rg = float(_sp.rgamma(arg))
        if rg == 0.0:
            continue
        la = (
            math.lgamma(j + k + 1) - math.lgamma(j + 1) + j * lx
            - float(_sp.gammaln(arg))
        )
        term = math.copysign(math.exp(la), rg) if la < 709 else math.inf
        if not math.isfinite(term):
            raise OverflowError(f"E^({k})_{{{alpha},{beta}}}({x}) overflows")
        total += term
        if arg > 1 and abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
    raise NonConvergence("positive Mittag-Leffler series did not converge", terms=MAX_TERMS)


# --------------------------------------------------------------------------
# alternating arguments


def _float_terms(alpha, beta, k, xs, n, start):
    """Magnitudes ``a_j`` for ``j = start .. start+n-1`` (shape ``(n, M)``)."""
    j = np.arange(start, start + n, dtype=float)[:, None]
    arg = alpha * (j + k) + beta
    lx = np.log(xs)[None, :]
    la = _sp.gammaln(j + k + 1) - _sp.gammaln(j + 1) + j * lx - _sp.gammaln(arg)
    sign = _sp.gammasgn(arg)
    pole = (arg <= 0) & (arg == np.round(arg))
    with np.errstate(over="ignore"):
        a = np.where(pole, 0.0, sign * np.exp(la))
    return a


def _stage_loop(evaluate, tol, label, atol=0.0, start=_START_STAGES):
    """Double the number of stages until consecutive sums agree.

    Past the largest term a converging sum gains orders of magnitude per
    doubling; once the error stops halving there the estimate sits on its
    rounding floor and further doublings are pointless, so the loop gives up.
    """
    n = max(2, int(start))
    prev, _, _ = evaluate(n)
    last_excess = np.inf
    while True:
        n *= 2
        if n > MAX_TERMS:
            break
        cur, mag, peak = evaluate(n)
        diff = np.abs(cur - prev)
        err = diff + mag
        scale = np.abs(cur)
        target = np.maximum(tol * scale, atol) + 1e-300
        if n > 2 * peak and np.all(np.isfinite(cur)) and np.all(err <= target):
            return cur, err
        if n > 4 * peak and np.all(np.isfinite(cur)):
            excess = float(np.max(err / target))
            if excess > 0.5 * last_excess:
                break
            last_excess = excess
        prev = cur
    err = np.where(err <= atol, 0.0, err)
    worst = float(np.nanmax(err / np.maximum(scale, 1e-300)))
    raise NonConvergence(
        f"{label}: stage doubling stalled at relative error {worst:.3g}",
        stages=n // 2, relative_error=worst,
    )


def _alternating_float(alpha, betas, ks, xs, tol, atol, start):
    out = np.empty((len(ks), len(xs)))
    err = np.empty_like(out)
    for i, (k, beta) in enumerate(zip(ks, betas)):
        # first index from which every gamma argument is positive
        j0 = max(0, math.floor(-beta / alpha - k) + 1)
        head = np.zeros(len(xs))
        if j0:
            a = _float_terms(alpha, beta, k, xs, j0, 0)
            head = np.sum(a * ((-1.0) ** np.arange(j0))[:, None], axis=0)
        sgn = (-1.0) ** j0

        def evaluate(n, k=k, beta=beta, j0=j0, head=head, sgn=sgn):
            a = _float_terms(alpha, beta, k, xs, n, j0)
            w = crvz_weights(n)
            s = head + sgn * (w @ a)
            # rounding of the sum plus the log-space error of each term,
            # calibrated against a double-double evaluation
            mag = 16.0 * _EPS * np.sum(a, axis=0)
            peak = int(np.max(np.argmax(a, axis=0)))
            return s, mag, peak

        out[i], err[i] = _stage_loop(
            evaluate, tol, f"E^({k})_{{{alpha},{beta}}} in double precision", atol[i], start
        )
    return out, err


def _dd_start(alpha, betas, ks):
    """``k!/Gamma(alpha k + beta)`` and ``(k+1)!/Gamma(alpha(k+1) + beta)``."""
    with mpmath.workdps(40):
        a0 = [mpmath.factorial(k) * mpmath.rgamma(alpha * k + mpmath.mpf(b))
              for k, b in zip(ks, betas)]
        a1 = [mpmath.factorial(k + 1) * mpmath.rgamma(alpha * (k + 1) + mpmath.mpf(b))
              for k, b in zip(ks, betas)]
        return dd_from_mp(a0), dd_from_mp(a1)


def _dd_terms(betas, ks, xs, n, start):
    """Double-double magnitudes for ``alpha = 1/2``; arrays of shape (n, K, M)."""
    K, M = len(ks), len(xs)
    kk = np.asarray(ks, dtype=float)[:, None] * np.ones((1, M))
    x2 = _two_prod(xs, xs)
    x2 = (np.broadcast_to(x2[0], (K, M)), np.broadcast_to(x2[1], (K, M)))
    bh = np.asarray(betas, dtype=float)[:, None] * np.ones((1, M))
    hi = np.empty((n, K, M))
    lo = np.empty((n, K, M))
    (s0h, s0l), (s1h, s1l) = start
    prev = [
        (s0h[:, None] * np.ones((1, M)), s0l[:, None] * np.ones((1, M))),
        dd_mul_d((s1h[:, None] * np.ones((1, M)), s1l[:, None] * np.ones((1, M))), xs[None, :]),
    ]
    hi[0], lo[0] = prev[0]
    if n > 1:
        hi[1], lo[1] = prev[1]
    for j in range(2, n):
        src = prev[j % 2]
        # a_j = a_{j-2} (j+k)(j+k-1) / (j (j-1)) * x^2 / ((j-2+k)/2 + beta)
        num = (j + kk) * (j + kk - 1.0)  # exact integers
        t = dd_mul_d(src, num)
        t = dd_div(t, (np.full((K, M), float(j * (j - 1))), np.zeros((K, M))))
        t = dd_mul(t, x2)
        y = _two_sum((j - 2 + kk) / 2.0, bh)
        t = dd_div(t, y)
        prev[j % 2] = t
        hi[j], lo[j] = t
    return hi, lo


def _alternating_dd(betas, ks, xs, tol, atol, start):
    if np.any(np.asarray(betas) + 0.5 * np.asarray(ks) <= 0):
        raise UnsupportedParameter("double-double engine needs alpha*k + beta > 0")
    seeds = _dd_start(0.5, betas, ks)
    cache = {}

    def evaluate(n):
        if n not in cache:
            cache.clear()
            cache[n] = _dd_terms(betas, ks, xs, n, seeds)
        hi, lo = cache[n]
        wh, wl = _crvz_weights_mp(n)
        acc = (np.zeros(hi.shape[1:]), np.zeros(hi.shape[1:]))
        for j in range(n):
            acc = dd_add(acc, dd_mul((hi[j], lo[j]), (wh[j], wl[j])))
        mag = 4.0 * _DD_EPS * np.sum(hi, axis=0)
        peak = int(np.max(np.argmax(hi, axis=0)))
        return acc[0] + acc[1], mag, peak

    return _stage_loop(evaluate, tol, "E^(k)_{1/2,beta} in double-double precision", atol, start)


def alternating_ml_derivative(alpha, betas, ks, xs, *, tol=1e-9, atol=0.0,
                              precision="double", start_stages=_START_STAGES):
    """``E^{(k_i)}_{alpha,beta_i}(-x_m)`` for all ``i`` and ``m``.

    Parameters
    ----------
    alpha : float
    betas : float or array_like, shape (K,)
        One ``beta`` per derivative order (a scalar is broadcast).
    ks : array_like of int, shape (K,)
    xs : array_like, shape (M,)
        Positive magnitudes of the (negative) arguments.
    tol : float
        Relative agreement demanded of two successive stage counts.
    atol : float or array_like, shape (K, M)
        Absolute error that is accepted regardless of ``tol``; lets callers
        that multiply the values by known factors ask only for the accuracy
        they need.
    precision : {"double", "double-double"}
    start_stages : int
        First CRVZ stage count; it is doubled until two estimates agree.

    Returns
    -------
    values : ndarray, shape (K, M)
    errors : ndarray, shape (K, M)
        Absolute error estimates (stage difference plus rounding bound).
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    betas = np.broadcast_to(np.asarray(betas, dtype=float), ks.shape)
    if np.any(xs <= 0):
        raise ValueError("xs must be positive")
    atol = np.broadcast_to(np.asarray(atol, dtype=float), (ks.size, xs.size))
    if precision == "double":
        return _alternating_float(float(alpha), betas, ks, xs, tol, atol, start_stages)
    if precision == "double-double":
        if alpha != 0.5:
            raise UnsupportedParameter("double-double engine is specialised to alpha = 1/2")
        return _alternating_dd(betas, ks, xs, tol, atol, start_stages)
    raise ValueError(f"unknown precision {precision!r}")
