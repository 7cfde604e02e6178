"""Gamma-family and Mittag-Leffler evaluation.

The Mittag-Leffler function E_{a,d}(z) = sum_n z^n / Gamma(a n + d) is the
workhorse behind every integral representation here.  Three regimes are
used on the negative axis:

* defining series (certified tail, doubles) for moderate ``|z|``,
* a cached Chebyshev fit of high-precision values on a per-``(a, d)``
  mid-range window (validated against mpmath at build time),
* the large-argument expansion, which for a in (1,2) must include the
  exponentially damped oscillatory pair on top of the algebraic tail
  -(sum_k z^{-k}/Gamma(d - a k)); dropping it loses several digits for
  a near 2 even at |z| ~ 100.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy.special import gammaln, rgamma

from .enclosure import Enclosure

_LOG_PI = math.log(math.pi)

# switchover points for E_{a,d} on the negative axis
_ML_SERIES_MAX = 10.0     # defining series in doubles for z >= -10
_ML_CHEB_MAX = 100.0      # Chebyshev window (-100, -10); asymptotic beyond


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def gamma_neg(alpha: float) -> float:
    """Gamma(-alpha) > 0 for alpha in (1,2), via the reflection formula.

    Gamma(-a) = pi / (sin(-pi a) Gamma(1+a)) = pi / (sin(pi(a-1)) Gamma(1+a)).
    Diverges to +inf as alpha -> 1+ (pole of Gamma at -1).
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError(f"gamma_neg requires alpha in (1,2), got {alpha}")
    return math.pi / (math.sin(math.pi * (alpha - 1.0)) * math.gamma(1.0 + alpha))


def _ml_series(a: float, d: float, z: float) -> Enclosure:
    """Defining series with certified geometric tail (double precision)."""
    total = 0.0
    max_abs = 0.0
    term = 1.0 / math.gamma(d)
    n = 0
    while True:
        total += term
        max_abs = max(max_abs, abs(term))
        n += 1
        if n > 1200:
            raise RuntimeError("mittag_leffler series did not converge")
        nxt = z ** n * math.exp(-gammaln(a * n + d))
        # certified once |z| <= (1/2) Gamma(a(n+1)+d)/Gamma(an+d); the Gamma
        # ratio increases in n, so all later term ratios stay below 1/2
        ratio_den = math.exp(gammaln(a * (n + 1) + d) - gammaln(a * n + d))
        if abs(z) <= 0.5 * ratio_den and abs(nxt) < 1e-18 * max(abs(total), 1e-300):
            tail = 2.0 * abs(nxt)
            round_err = 4e-16 * max_abs * n
            return Enclosure(total, tail + round_err)
        term = nxt


def _ml_asym_neg(a: float, d: float, s: float) -> Enclosure:
    """E_{a,d}(-s) for large s > 0, a in (0,2).

    Exponentially damped oscillatory pair (for a > 1) plus the algebraic
    tail truncated at its smallest term.  Heuristic error: magnitude of the
    smallest algebraic term plus a multiple of the exponential pair size.
    """
    w = s ** (1.0 / a)
    expterm = 0.0
    exp_mag = 0.0
    if a > 1.0:
        damp = math.exp(w * math.cos(math.pi / a))
        exp_mag = (2.0 / a) * s ** ((1.0 - d) / a) * damp
        expterm = exp_mag * math.cos(math.pi * (1.0 - d) / a + w * math.sin(math.pi / a))
    tot = 0.0
    best = math.inf
    for k in range(1, 200):
        c = float(rgamma(d - a * k))
        if c == 0.0:
            continue
        term = (-1.0) ** (k + 1) * s ** (-float(k)) * c
        if abs(term) > best:
            break
        tot += term
        best = abs(term)
    err = best + exp_mag * min(1.0, (3.0 / w) ** 4)
    return Enclosure(expterm + tot, err, degraded=True)


@lru_cache(maxsize=32)
def _ml_neg_cheb(a: float, d: float):
    """Chebyshev fit of x -> E_{a,d}(-e^x) on [log 10, log 100].

    Built from mpmath reference values; returns (coeffs, lo, hi, err_bound).
    """
    deg = 120
    nodes = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    lo, hi = math.log(_ML_SERIES_MAX), math.log(_ML_CHEB_MAX)
    xs = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    svals = np.exp(xs)
    with mp.workdps(40):
        ref = np.array([float(_mp_ml(a, d, -float(s))) for s in svals])
    coeffs = np.polynomial.chebyshev.chebfit(nodes, ref, deg - 2)
    fit = np.polynomial.chebyshev.chebval(nodes, coeffs)
    resid = float(np.max(np.abs(fit - ref)))
    # validate off-node
    xv = np.linspace(lo, hi, 257)
    sv = np.exp(xv)
    with mp.workdps(40):
        rv = np.array([float(_mp_ml(a, d, -float(s))) for s in sv])
    tv = np.polynomial.chebyshev.chebval(2.0 * (xv - lo) / (hi - lo) - 1.0, coeffs)
    resid = max(resid, float(np.max(np.abs(tv - rv))))
    return coeffs, lo, hi, 10.0 * resid + 1e-16


def _mp_ml(a, d, z):
    """mpmath reference for E_{a,d}(z); dps set by caller via workdps."""
    a = mp.mpf(a)
    d = mp.mpf(d)
    z = mp.mpf(z)
    if z < -5:
        # raise working precision to cover alternating-series cancellation
        extra = int(3.0 * float(a * abs(z) ** (1.0 / a))) + 20
        with mp.workdps(mp.mp.dps + extra):
            return mp.nsum(lambda n: z ** n / mp.gamma(a * n + d), [0, mp.inf])
    return mp.nsum(lambda n: z ** n / mp.gamma(a * n + d), [0, mp.inf])


def mittag_leffler_mp(a: float, d: float, z: float, dps: int = 50):
    """Extended-precision oracle for E_{a,d}(z) (mpmath, >= 50 digits)."""
    with mp.workdps(dps):
        return _mp_ml(a, d, z)


def mittag_leffler(a: float, d: float, z: float) -> Enclosure:
    """E_{a,d}(z) with a certified (series) or documented-heuristic error.

    Preconditions: a in (0,2], d > 0, z real.
    """
    if not (0.0 < a <= 2.0):
        raise ValueError(f"mittag_leffler requires a in (0,2], got {a}")
    if not d > 0.0:
        raise ValueError(f"mittag_leffler requires d > 0, got {d}")
    if z >= -_ML_SERIES_MAX:
        return _ml_series(a, d, z)
    s = -z
    if s <= _ML_CHEB_MAX:
        coeffs, lo, hi, err = _ml_neg_cheb(a, d)
        xi = 2.0 * (math.log(s) - lo) / (hi - lo) - 1.0
        val = float(np.polynomial.chebyshev.chebval(xi, coeffs))
        return Enclosure(val, err, degraded=True)
    return _ml_asym_neg(a, d, s)


def ml_aa_neg_vec(alpha: float, s: np.ndarray) -> np.ndarray:
    """Vectorized E_{alpha,alpha}(-s) for s >= 0 (quadrature integrands).

    Uses the same three branches as :func:`mittag_leffler`.
    """
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    small = s <= _ML_SERIES_MAX
    mid = (~small) & (s <= _ML_CHEB_MAX)
    big = s > _ML_CHEB_MAX
    if small.any():
        z = -s[small]
        acc = np.zeros_like(z)
        term = np.full_like(z, 1.0 / math.gamma(alpha))
        n = 0
        while True:
            acc += term
            n += 1
            if n > 260:
                break
            term = z ** n * math.exp(-gammaln(alpha * n + alpha))
            if np.max(np.abs(term)) < 1e-18:
                acc += term
                break
        out[small] = acc
    if mid.any():
        coeffs, lo, hi, _ = _ml_neg_cheb(alpha, alpha)
        xi = 2.0 * (np.log(s[mid]) - lo) / (hi - lo) - 1.0
        out[mid] = np.polynomial.chebyshev.chebval(xi, coeffs)
    if big.any():
        sb = s[big]
        w = sb ** (1.0 / alpha)
        expterm = ((2.0 / alpha) * sb ** ((1.0 - alpha) / alpha)
                   * np.exp(w * math.cos(math.pi / alpha))
                   * np.cos(math.pi * (1.0 - alpha) / alpha + w * math.sin(math.pi / alpha)))
        alg = np.zeros_like(sb)
        for k in range(1, 12):
            c = float(rgamma(alpha - alpha * k))
            if c == 0.0:
                continue
            alg += (-1.0) ** (k + 1) * sb ** (-float(k)) * c
        out[big] = expterm + alg
    return out


def ml_aa_pos_log_vec(alpha: float, s: np.ndarray) -> np.ndarray:
    """Vectorized log E_{alpha,alpha}(s) for s >= 0 (all-positive series)."""
    s = np.asarray(s, dtype=float)
    logs = np.where(s > 0, np.log(np.maximum(s, 1e-300)), -1e306)
    # peak term index ~ s^(1/alpha); build enough terms then log-sum-exp
    nmax = int(np.max(s) ** (1.0 / alpha) * 2.5) + 80
    n = np.arange(0, nmax, dtype=float)[:, None]
    with np.errstate(over="ignore"):
        logterm = n * logs[None, :] - gammaln(alpha * n + alpha)
    logterm = np.nan_to_num(logterm, nan=-np.inf, neginf=-np.inf)
    lmax = np.max(logterm, axis=0)
    out = lmax + np.log(np.sum(np.exp(logterm - lmax[None, :]), axis=0))
    out = np.where(s == 0, -gammaln(alpha), out)
    return out


def ml_aa_pos_vec(alpha: float, s: np.ndarray) -> np.ndarray:
    """Vectorized E_{alpha,alpha}(s) for s >= 0 (all-positive series)."""
    return np.exp(np.minimum(ml_aa_pos_log_vec(alpha, s), 709.0))
