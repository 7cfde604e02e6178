"""Certified evaluation of the alternating double series in m_{k,n}.

Everything here works with

    m_{k,n}(s,u) = Gamma(k/alpha + n) s^k u^n / (pi k! Gamma(alpha n)),

the positive term grid whose signed sum over k,n >= 1 with signs
(-1)^(k+n) sin(pi k / alpha) equals h_1(x,t) at s = (1-x) t^(-1/alpha),
u = 1/t.  Sums are evaluated over an adaptive rectangle with certified
remainder bounds:

* columns beyond K: per-row geometric tails, valid once the ratio bound
  rho_k(K,N) = s (K/alpha + N)^(1/alpha) / (K+1) drops below 1/2 (it is
  decreasing in k and increasing in n);
* entire rows beyond N: the closed-form row majorant
  ROW(n) <= e^shat (2u)^n Gamma(n) / (pi Gamma(alpha n)),  where
  shat = (1 - 1/alpha) s (2s/alpha)^(1/(alpha-1)) comes from
  s y^(1/alpha) <= y/2 + shat, with a geometric tail in n once
  q(n) = 2u (alpha n + 1)^(2-alpha) / (alpha (alpha n + alpha - 1)) <= 1/2.

Together these cover the whole complement of the rectangle, so no
separate corner bound is needed.  Rounding error is tracked against the
sum of absolute terms; when the certified error exceeds the requested
resolution the evaluation escalates to mpmath at an adaptively chosen
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.special import digamma, gammaln

from .enclosure import Enclosure

_LOG_PI = math.log(math.pi)
_EXACT_ENUM_CAP = 900        # largest frontier square enumerated cell by cell
_DPS_DEFAULT_CAP = 1400


def rho_k_bound(alpha: float, s: float, k, n):
    """Upper bound on m_{k+1,n}/m_{k,n}; decreasing in k, increasing in n."""
    return s * (k / alpha + n) ** (1.0 / alpha) / (k + 1.0)


def rho_n_bound(alpha: float, u: float, k, n):
    """Upper bound on m_{k,n+1}/m_{k,n}; decreasing in n, increasing in k."""
    z = alpha * n
    return u * (k / alpha + n) * (z + 1.0) ** (2.0 - alpha) / ((z + alpha - 1.0) * z)


def row_ratio_bound(alpha: float, u: float, n):
    """Upper bound on ROW(n+1)/ROW(n) for the full-row majorant; decreasing."""
    z = alpha * n
    return 2.0 * u * (z + 1.0) ** (2.0 - alpha) / (alpha * (z + alpha - 1.0))


def shat(alpha: float, s: float) -> float:
    """max_y (s y^(1/alpha) - y/2), so e^(s y^(1/alpha)) <= e^shat e^(y/2)."""
    if s <= 0.0:
        return 0.0
    return (1.0 - 1.0 / alpha) * s * (2.0 * s / alpha) ** (1.0 / (alpha - 1.0))


def log_row_majorant(alpha: float, s: float, u: float, n: float) -> float:
    """log of the full-row bound e^shat (2u)^n Gamma(n)/(pi Gamma(alpha n))."""
    return (shat(alpha, s) + n * math.log(2.0 * u) + math.lgamma(n)
            - math.lgamma(alpha * n) - _LOG_PI)


def log_m(alpha: float, log_s: float, log_u: float, k, n):
    """log m_{k,n}; accepts scalars or arrays."""
    return (gammaln(k / alpha + n) - gammaln(k + 1.0) - gammaln(alpha * n)
            + k * log_s + n * log_u - _LOG_PI)


def sin_k(alpha: float, kmax: int) -> np.ndarray:
    k = np.arange(1, kmax + 1)
    return np.sin(np.pi * k / alpha)


def pick_rectangle(alpha: float, s: float, u: float, tol_log: float,
                   kn_cap: float = 4e7) -> tuple[int, int]:
    """Smallest rectangle (K,N) whose certified remainder is below e^tol_log.

    Grows K and N until the edge ratio bounds certify geometric tails and
    the edge terms (and full-row majorants) have decayed past tol_log
    relative to the interior maximum.
    """
    log_s = math.log(s) if s > 0 else -math.inf
    log_u = math.log(u)
    K, N = 8, 6
    for _ in range(200):
        ok = True
        # row-majorant tail must be certified and small
        if row_ratio_bound(alpha, u, N + 1) > 0.45:
            ok = False
        elif rho_k_bound(alpha, s, K, N) > 0.45:
            ok = False
        else:
            # interior max along edges must be well past decay
            ks = np.unique(np.clip(np.geomspace(1, K, 24).astype(int), 1, K))
            ns = np.unique(np.clip(np.geomspace(1, N, 18).astype(int), 1, N))
            interior = float(np.max(log_m(alpha, log_s, log_u,
                                          ks[:, None].astype(float),
                                          ns[None, :].astype(float))))
            edge_k = float(np.max(log_m(alpha, log_s, log_u, float(K), ns.astype(float))))
            edge_n = float(np.max(log_m(alpha, log_s, log_u, ks.astype(float), float(N))))
            rowmaj = log_row_majorant(alpha, s, u, N + 1.0)
            lim = max(interior + tol_log, tol_log)
            if edge_k > lim or edge_n > lim or rowmaj > lim:
                ok = False
        if ok:
            return K, N
        if rho_k_bound(alpha, s, K, N) > 0.45 or K < 4 * N:
            K = int(K * 1.6) + 4
        N = int(N * 1.5) + 2
        if K * N > kn_cap:
            raise RuntimeError(
                f"series rectangle exceeded {kn_cap:.0f} cells "
                f"(alpha={alpha}, s={s:.3g}, u={u:.3g})")
    raise RuntimeError("pick_rectangle failed to converge")


@dataclass
class GridSum:
    """Result of a certified (partial) quadrant sum."""
    value: float
    err: float
    abs_sum: float
    max_log: float
    K: int
    N: int
    dps: int  # 0 means double precision
    tail: float

    @property
    def enclosure(self) -> Enclosure:
        return Enclosure(self.value, self.err)


def _tail_bounds(alpha: float, s: float, u: float, K: int, N: int,
                 log_s: float, log_u: float) -> float:
    """Certified bound on the sum of m over the complement of the rectangle."""
    n_idx = np.arange(1, N + 1, dtype=float)
    rk = rho_k_bound(alpha, s, float(K), n_idx)
    if rk[-1] > 0.5:
        return math.inf
    col_edge = np.exp(log_m(alpha, log_s, log_u, float(K), n_idx))
    t2 = float(np.sum(col_edge * 2.0 * rk))
    q = row_ratio_bound(alpha, u, N + 1.0)
    if q > 0.5:
        return math.inf
    t_rows = 2.0 * math.exp(min(log_row_majorant(alpha, s, u, N + 1.0), 700.0))
    return t2 + t_rows


def quadrant_sum(alpha: float, s: float, u: float, *,
                 rel_target: float = 1e-12, floor_abs: float = 0.0,
                 dps_cap: int = _DPS_DEFAULT_CAP) -> GridSum:
    """Signed sum over the full quadrant k,n >= 1 with certified error.

    Doubles first; escalates to mpmath when cancellation eats the target.
    The returned ``err`` always includes the rectangle truncation tail.
    """
    if s < 0 or u <= 0:
        raise ValueError("quadrant_sum requires s >= 0, u > 0")
    if s == 0.0:
        return GridSum(0.0, 0.0, 0.0, -math.inf, 0, 0, 0, 0.0)
    log_s, log_u = math.log(s), math.log(u)
    K, N = pick_rectangle(alpha, s, u, tol_log=math.log(1e-20))
    tail = _tail_bounds(alpha, s, u, K, N, log_s, log_u)

    k = np.arange(1, K + 1, dtype=float)[:, None]
    n = np.arange(1, N + 1, dtype=float)[None, :]
    logm = log_m(alpha, log_s, log_u, k, n)
    L = float(np.max(logm))
    signs = ((-1.0) ** (k + n)) * np.sin(np.pi * k / alpha)
    scaled = np.exp(logm - L)
    ssum = float(np.sum(signs * scaled))
    asum = float(np.sum(scaled))
    value = _safe_exp_mul(L, ssum)
    abs_sum = _safe_exp_mul(L, asum)
    round_err = abs_sum * (1.1e-16 * (math.log2(K * N + 2) + 4.0) + 3e-16 * K)
    err = round_err + tail
    need = max(rel_target * abs(value), floor_abs)
    if err <= need or not math.isfinite(L):
        return GridSum(value, err, abs_sum, L, K, N, 0, tail)

    # escalate to mpmath
    denom = max(need, tail, 1e-320)
    dps = int((L + math.log(K * N + 1) - math.log(denom)) / math.log(10.0)) + 12
    dps = max(dps, 25)
    if dps > dps_cap:
        return GridSum(value, err, abs_sum, L, K, N, 0, tail)
    value_mp, abs_mp = _mp_rect_sum(alpha, s, u, K, N, dps)
    err = abs_mp * 10.0 ** (-dps + 3) + tail
    return GridSum(value_mp, err, abs_mp, L, K, N, dps, tail)


def _safe_exp_mul(L: float, scaled: float) -> float:
    if scaled == 0.0:
        return 0.0
    lg = L + math.log(abs(scaled))
    if lg > 709.0:
        return math.copysign(math.inf, scaled)
    if lg < -745.0:
        return math.copysign(0.0, scaled)
    return math.copysign(math.exp(lg), scaled)


def _mp_rect_sum(alpha: float, s: float, u: float, K: int, N: int,
                 dps: int) -> tuple[float, float]:
    """Rectangle sum in mpmath; returns (value, abs_sum) as floats."""
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        ms = mp.mpf(s)
        mu = mp.mpf(u)
        inv_gamma_an = [mp.one / mp.gamma(a * nn) for nn in range(1, N + 1)]
        u_pow = [mu ** nn for nn in range(1, N + 1)]
        total = mp.mpf(0)
        abs_total = mp.mpf(0)
        fact = mp.one
        s_pow = mp.one
        for kk in range(1, K + 1):
            fact *= kk
            s_pow *= ms
            sk = mp.sinpi(mp.mpf(kk) / a)
            g = mp.gamma(mp.mpf(kk) / a + 1)
            base = s_pow / (fact * mp.pi)
            row = mp.mpf(0)
            row_abs = mp.mpf(0)
            for nn in range(1, N + 1):
                # Gamma(k/a + n) by recurrence from Gamma(k/a + 1)
                term = g * inv_gamma_an[nn - 1] * u_pow[nn - 1]
                g *= (mp.mpf(kk) / a + nn)
                signed = term if (kk + nn) % 2 == 0 else -term
                row += signed
                row_abs += term
            total += sk * base * row
            abs_total += abs(sk) * base * row_abs
        return float(total), float(abs_total)


# ---------------------------------------------------------------------------
# boundary sums of the frontier square S_R


def log_boundary_max(alpha: float, s: float, u: float, R: float) -> float:
    """Upper bound on max of log m over the boundary of S_R.

    log m is concave along the row n=R (in k) and the column k=R (in n), so
    the continuous maximum located by bisection on the derivative bounds the
    discrete one.
    """
    log_s, log_u = math.log(s), math.log(u)

    def max_along_k():
        def deriv(kk):
            return digamma(kk / alpha + R) / alpha - digamma(kk + 1.0) + log_s
        lo, hi = 1.0, float(R)
        if deriv(lo) <= 0:
            return float(log_m(alpha, log_s, log_u, lo, float(R)))
        if deriv(hi) >= 0:
            return float(log_m(alpha, log_s, log_u, hi, float(R)))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if deriv(mid) > 0:
                lo = mid
            else:
                hi = mid
        return float(log_m(alpha, log_s, log_u, 0.5 * (lo + hi), float(R)))

    def max_along_n():
        def deriv(nn):
            return digamma(R / alpha + nn) - alpha * digamma(alpha * nn) + log_u
        lo, hi = 1.0, float(R)
        if deriv(lo) <= 0:
            return float(log_m(alpha, log_s, log_u, float(R), lo))
        if deriv(hi) >= 0:
            return float(log_m(alpha, log_s, log_u, float(R), hi))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if deriv(mid) > 0:
                lo = mid
            else:
                hi = mid
        return float(log_m(alpha, log_s, log_u, float(R), 0.5 * (lo + hi)))

    return max(max_along_k(), max_along_n())


def boundary_sum_ub(alpha: float, s: float, u: float, R) -> float:
    """Certified upper bound on sum of m over the boundary of S_R."""
    if not math.isfinite(R):
        return 0.0
    if R <= 4096:
        log_s, log_u = math.log(s), math.log(u)
        idx = np.arange(1, int(R) + 1, dtype=float)
        row = log_m(alpha, log_s, log_u, idx, float(R))
        col = log_m(alpha, log_s, log_u, float(R), idx[:-1]) if R > 1 else np.array([])
        allv = np.concatenate([row, col])
        L = float(np.max(allv))
        if L < -745.0:
            return 0.0
        return float(np.exp(L) * np.sum(np.exp(allv - L))) * (1.0 + 1e-12)
    lmax = log_boundary_max(alpha, s, u, float(R))
    total_log = lmax + math.log(2.0 * float(R))
    return 0.0 if total_log < -745.0 else math.exp(min(total_log, 709.0))
