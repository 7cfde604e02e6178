"""Stability index with all derived constants used across the package.

``StableIndex`` validates alpha in (1,2) and caches the gamma factors plus
the quantities controlling the exact sampler: the parity window width
d_alpha, the anchor search range L_alpha, delta_alpha = sin(pi d_alpha),
eps = delta_alpha/24, and (lazily) the envelope constants.

Two envelope variants exist. The corrected one uses the tail exponent
-1/alpha - 1, which is what the domination proof actually yields and what
the true decay of h_1 in t allows; its mixture weight is 1/alpha.  The
printed variant (tail exponent -1 - alpha, weight alpha^2/(alpha^2+alpha-1))
is kept behind ``paper_constants=True`` together with the loose constant
D(theta^alpha e^theta + 4); it fails the grid domination check and is
retained for comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .special import gamma_neg, ml_aa_pos_log_vec

_B_CERT_CACHE: dict[float, tuple[float, float]] = {}


def _envelope_bound_quadrature(alpha: float) -> tuple[float, float]:
    """Certified upper bound on B = int_0^inf E_{a,a}(s) e^(s^(1/a) - s) ds.

    Upper Riemann-type sum: on each cell the integrand is bounded by the
    (increasing) E factor at the right endpoint times exp of the maximum of
    g(s) = s^(1/a) - s over the cell; the tail beyond S0 uses
    E_{a,a}(s) <= D e^(s/2) and s^(1/a) <= s/4 for s >= theta^alpha.
    Returns (estimate, certified_upper).
    """
    theta = 4.0 ** (1.0 / (alpha - 1.0))
    s0 = max(theta ** alpha, 60.0)
    grid = np.concatenate([np.linspace(0.0, 10.0, 2001),
                           np.geomspace(10.0, s0, 1800)])
    grid = np.unique(grid)
    log_e = ml_aa_pos_log_vec(alpha, grid)
    g = grid ** (1.0 / alpha) - grid
    smax = alpha ** (-alpha / (alpha - 1.0))  # argmax of g
    a, b = grid[:-1], grid[1:]
    gmax = np.maximum(g[:-1], g[1:])
    inside = (a < smax) & (smax < b)
    gmax[inside] = smax ** (1.0 / alpha) - smax
    upper_cells = np.exp(np.minimum(log_e[1:] + gmax, 700.0)) * (b - a)
    mid = np.exp(np.minimum(0.5 * (log_e[:-1] + log_e[1:])
                            + 0.5 * (g[:-1] + g[1:]), 700.0)) * (b - a)
    d_const = sup_2pow_gamma_ratio(alpha)
    tail = 4.0 * d_const * math.exp(-s0 / 4.0)
    return float(np.sum(mid)), float(np.sum(upper_cells) + tail)


def sup_2pow_gamma_ratio(alpha: float) -> float:
    """D >= sup_n 2^(n-1) Gamma(n)/Gamma(alpha n), by enumeration.

    The term ratio 2 n Gamma(alpha n)/Gamma(alpha n + alpha) is eventually
    below 1 and certifiably decreasing, so the sup is attained on the
    enumerated prefix.
    """
    best = 0.0
    n = 1
    while True:
        val = math.exp((n - 1) * math.log(2.0) + math.lgamma(n) - math.lgamma(alpha * n))
        best = max(best, val)
        z = alpha * n
        # ratio upper bound via Gamma(z)/Gamma(z+alpha) <= (z+1)^(2-alpha)/((z+alpha-1) z)
        ratio_ub = 2.0 * n * (z + 1.0) ** (2.0 - alpha) / ((z + alpha - 1.0) * z)
        if ratio_ub < 1.0 and n > 2:
            break
        n += 1
        if n > 500000:
            raise RuntimeError("sup_2pow_gamma_ratio failed to terminate")
    return best * (1.0 + 1e-12)


@dataclass(frozen=True)
class AlphaConstants:
    """Constants of the exact sampling scheme for one alpha."""

    alpha: float
    D: float                 # sup_n 2^(n-1) Gamma(n)/Gamma(alpha n)
    theta_lemma: float       # 4^(1/(alpha-1))
    B_cert: float            # certified bound on the h-series integral
    C_alpha: float           # envelope scale actually used
    C_paper: float           # the loose printed constant (may overflow to inf)
    theta_env: float         # mass of the envelope's (0,1) branch
    tail_exponent: float     # envelope tail: t^(-tail_exponent) on t > 1
    m1: float
    m2: float
    theta_xi: float          # undershoot mixture weight
    paper_constants: bool = False

    @property
    def envelope_mass(self) -> float:
        """Total mass of the unnormalized envelope C (t^-1/a ^ t^-tail)."""
        alpha = self.alpha
        head = alpha / (alpha - 1.0)
        tail = 1.0 / (self.tail_exponent - 1.0)
        return self.C_alpha * (head + tail)


def _build_constants(alpha: float, paper_constants: bool) -> AlphaConstants:
    d_const = sup_2pow_gamma_ratio(alpha)
    theta = 4.0 ** (1.0 / (alpha - 1.0))
    if alpha not in _B_CERT_CACHE:
        _B_CERT_CACHE[alpha] = _envelope_bound_quadrature(alpha)
    _, b_cert = _B_CERT_CACHE[alpha]
    g0 = 1.0 / (alpha * math.gamma(1.0 - 1.0 / alpha))
    try:
        c_paper = max(g0, d_const * (theta ** alpha * math.exp(theta) + 4.0))
    except OverflowError:
        c_paper = math.inf
    m1 = 1.0 / (alpha - 1.0)
    m2 = math.pi / math.sin((alpha - 1.0) * math.pi) - m1
    if paper_constants:
        c_alpha = c_paper
        tail_exponent = 1.0 + alpha
        theta_env = alpha * alpha / (alpha * alpha + alpha - 1.0)
    else:
        c_alpha = max(g0, b_cert)
        tail_exponent = 1.0 / alpha + 1.0
        theta_env = 1.0 / alpha
    return AlphaConstants(alpha=alpha, D=d_const, theta_lemma=theta,
                          B_cert=b_cert, C_alpha=c_alpha, C_paper=c_paper,
                          theta_env=theta_env, tail_exponent=tail_exponent,
                          m1=m1, m2=m2, theta_xi=m1 / (m1 + m2),
                          paper_constants=paper_constants)


@dataclass(frozen=True)
class StableIndex:
    """Validated stability index alpha in (1,2) with cached constants."""

    alpha: float
    paper_constants: bool = False
    inv_alpha: float = field(init=False)
    gamma_alpha: float = field(init=False)
    gamma_1m_inv: float = field(init=False)     # Gamma(1 - 1/alpha)
    gamma_neg_alpha: float = field(init=False)  # Gamma(-alpha) > 0
    d_alpha: float = field(init=False)
    L_alpha: int = field(init=False)
    delta_alpha: float = field(init=False)
    eps: float = field(init=False)

    def __post_init__(self):
        a = float(self.alpha)
        if not (1.0 < a < 2.0):
            raise ValueError(f"alpha must lie strictly in (1,2), got {a}")
        ra = 1.0 / a
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "inv_alpha", ra)
        object.__setattr__(self, "gamma_alpha", math.gamma(a))
        object.__setattr__(self, "gamma_1m_inv", math.gamma(1.0 - ra))
        object.__setattr__(self, "gamma_neg_alpha", gamma_neg(a))
        d_alpha = min(ra - 0.5, 0.5 - 0.5 * ra)
        object.__setattr__(self, "d_alpha", d_alpha)
        object.__setattr__(self, "L_alpha", int(math.floor((a - 0.5) / (a - 1.0))) + 1)
        object.__setattr__(self, "delta_alpha", math.sin(d_alpha * math.pi))
        object.__setattr__(self, "eps", math.sin(d_alpha * math.pi) / 24.0)
        assert self.d_alpha > 0.0 and self.L_alpha >= 2
        assert 0.0 < self.eps < 0.5

    @property
    def constants(self) -> AlphaConstants:
        key = (self.alpha, self.paper_constants)
        cached = _CONSTANTS_CACHE.get(key)
        if cached is None:
            cached = _build_constants(self.alpha, self.paper_constants)
            _CONSTANTS_CACHE[key] = cached
        return cached

    @property
    def g1_at_zero(self) -> float:
        """g_1(0) = 1/(alpha Gamma(1 - 1/alpha))."""
        return 1.0 / (self.alpha * self.gamma_1m_inv)

    @property
    def x0_deriv_domain(self) -> float:
        """x_0 = 1/cos(pi/(2 alpha)): guaranteed-convergence depth for the
        derivative-series representation."""
        return 1.0 / math.cos(math.pi / (2.0 * self.alpha))


_CONSTANTS_CACHE: dict[tuple[float, bool], AlphaConstants] = {}


def make_index(alpha: float, paper_constants: bool = False) -> StableIndex:
    return StableIndex(alpha, paper_constants)
