"""Closed-form constants and explicit stability lower bounds.

Every Gamma ratio is assembled in log space so that dimensions in the
hundreds do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, OptimizerError

INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class Params:
    """Dimension ``n`` and fractional order ``s`` with derived exponents.

    ``n`` may be 1 so that boundary problems of a two-dimensional trace
    inequality can be posed; everything else requires ``0 < s < n/2``.
    """

    n: int
    s: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", float(self.s))
        if not 0.0 < self.s < self.n / 2.0:
            raise DomainError(f"need 0 < s < n/2, got n={self.n}, s={self.s}")

    @property
    def lam(self) -> float:
        """Riesz kernel exponent n - 2s."""
        return self.n - 2.0 * self.s

    @property
    def sob_exp(self) -> float:
        """Critical Sobolev exponent 2n/(n-2s)."""
        return 2.0 * self.n / (self.n - 2.0 * self.s)

    @property
    def hls_exp(self) -> float:
        """HLS exponent 2n/(n+2s), the conjugate of ``sob_exp``."""
        return 2.0 * self.n / (self.n + 2.0 * self.s)

    def boundary(self) -> "Params":
        """Parameters (n-1, s-1/2) of the boundary HLS problem."""
        return Params(self.n - 1, self.s - 0.5)


class BoundSet(NamedTuple):
    S_ns: float
    K_ns: float
    hls_bound: float
    sob_bound: float
    koenig_upper: float


class TraceConstants(NamedTuple):
    C_ns: float
    D_ns: float
    flat_bound: float
    sphere_bound: float


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x!r}")
    return math.lgamma(x)


def log_sphere_area(d: int) -> float:
    """Log of the surface area of the unit sphere S^d in R^(d+1)."""
    if d < 0:
        raise DomainError(f"sphere dimension must be >= 0, got {d}")
    return math.log(2.0) + 0.5 * (d + 1) * math.log(math.pi) - log_gamma(0.5 * (d + 1))


def sphere_area(d: int) -> float:
    """Surface area |S^d| = 2 pi^((d+1)/2) / Gamma((d+1)/2)."""
    return math.exp(log_sphere_area(d))


def gen_binom(q: float, k: int) -> float:
    """Generalized binomial coefficient q(q-1)...(q-k+1)/k!."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    out = 1.0
    for j in range(k):
        out *= (q - j) / (j + 1)
    return out


def sobolev_sharp_constant_forms(P: Params) -> tuple[float, float]:
    """Sharp fractional Sobolev constant evaluated by two equivalent formulas.

    The first uses (4 pi)^s and a Gamma ratio of n/2 and n, the second the
    area of S^n. Both are returned so callers can cross-check them.
    """
    n, s = P.n, P.s
    ratio = log_gamma((n + 2 * s) / 2) - log_gamma((n - 2 * s) / 2)
    first = s * math.log(4 * math.pi) + ratio + (2 * s / n) * (
        log_gamma(n / 2) - log_gamma(n)
    )
    second = ratio + (2 * s / n) * log_sphere_area(n)
    return math.exp(-first), math.exp(-second)


def sobolev_sharp_constant(P: Params) -> float:
    """Sharp constant S with S ||(-Delta)^(s/2) f||_2^2 >= ||f||_{2n/(n-2s)}^2."""
    return sobolev_sharp_constant_forms(P)[0]


def lieb_sharp_diagonal(n: int, lam: float) -> float:
    """Sharp diagonal HLS constant for the kernel |x-y|^(-lam)."""
    if not 0 < lam < n:
        raise DomainError(f"need 0 < lam < n, got n={n}, lam={lam}")
    log_c = (
        0.5 * lam * math.log(math.pi)
        + log_gamma(n / 2 - lam / 2)
        - log_gamma(n - lam / 2)
        + (1 - lam / n) * (log_gamma(n) - log_gamma(n / 2))
    )
    return math.exp(log_c)


def liebloss_upper_bound(n: int, lam: float, p: float, qp: float) -> float:
    """Layer-cake upper bound on the HLS constant for exponents (p, q').

    The exponents must satisfy 1/p + 1/q' + lam/n = 2.
    """
    if not (0 < lam < n and p > 1 and qp > 1):
        raise DomainError("need 0 < lam < n and p, q' > 1")
    if abs(1 / p + 1 / qp + lam / n - 2) > INTEGER_TOL:
        raise DomainError("exponents violate 1/p + 1/q' + lam/n = 2")
    base = math.exp((lam / n) * (0.5 * lam * math.log(math.pi) - log_gamma(1 + n / 2)))
    tail = (lam * qp / (n * (qp - 1))) ** (lam / n) + (lam * p / (n * (p - 1))) ** (lam / n)
    return n / (n - lam) * base * tail / (qp * p)


def l_of_delta(delta):
    """sqrt(delta / (1 - delta)) for delta in (0, 1)."""
    d = np.asarray(delta, dtype=float)
    if np.any((d <= 0) | (d >= 1)):
        raise DomainError("delta must lie in (0, 1)")
    out = np.sqrt(d / (1 - d))
    return float(out) if out.ndim == 0 else out


def _is_integer(x: float) -> bool:
    return abs(x - round(x)) < INTEGER_TOL


def m_of_delta(P: Params, delta):
    """Local spectral-gap lower bound m(delta), vectorized over ``delta``.

    The gap 4s/(n+2s+2) is reduced by the Taylor coefficients of the
    critical power; a trailing |l|^(2*-2) term is added when 2* is not an
    integer.
    """
    q = P.sob_exp
    l = np.asarray(l_of_delta(delta), dtype=float)
    out = np.full_like(l, 4 * P.s / (P.n + 2 * P.s + 2))
    integer = _is_integer(q)
    top = int(round(q)) if integer else int(math.floor(q))
    for k in range(3, top + 1):
        out -= (2 / q) * gen_binom(q, k) * l ** (k - 2)
    if not integer:
        out -= (2 / q) * l ** (q - 2)
    return float(out) if out.ndim == 0 else out


def _k_objective(P: Params, delta):
    a = (P.n - 2 * P.s) / (P.n + 2 * P.s)
    m = np.asarray(m_of_delta(P, 2 * np.asarray(delta)))
    return 0.5 * np.asarray(delta) * a * np.minimum(m * a, 1.0)


def K_constant(P: Params, n_scan: int = 20001) -> float:
    """Supremum over delta in (0, 1/2) of (delta/2) a min(m(2 delta) a, 1).

    Here a = (n-2s)/(n+2s). A dense scan locates the best bracket which is
    then refined by golden-section search. The scan is linear plus a
    logarithmic part down to 1e-300, since for orders close to 0 the
    objective is positive only for very small delta. OptimizerError is
    raised when no positive value is representable in double precision.
    """
    lin = np.linspace(0.0, 0.5, n_scan + 2)[1:-1]
    delta = np.union1d(np.geomspace(1e-300, lin[0], 3001)[:-1], lin)
    vals = _k_objective(P, delta)
    k = int(np.argmax(vals))
    if not vals[k] > 0:
        raise OptimizerError("no positive value of the K objective found")
    lo = delta[max(k - 1, 0)]
    hi = delta[min(k + 1, len(delta) - 1)]
    if 0 < k < len(delta) - 1:
        res = minimize_scalar(
            lambda d: -float(_k_objective(P, d)),
            bracket=(lo, delta[k], hi),
            method="golden",
            tol=1e-12,
        )
        if lo <= res.x <= hi and -res.fun >= vals[k]:
            return float(-res.fun)
    return float(vals[k])


def _split_gap(q: float) -> float:
    return min(2.0 ** q - 2.0, 1.0)


def stability_bounds(P: Params) -> BoundSet:
    """Explicit lower bounds for the HLS and Sobolev stability ratios."""
    S = sobolev_sharp_constant(P)
    K = K_constant(P)
    core = min(K, _split_gap((P.n + 2 * P.s) / P.n))
    sob = S * core / 4
    koenig = S * 4 * P.s / (P.n + 2 + 2 * P.s)
    if not sob < koenig:
        raise OptimizerError("Sobolev bound is not below the third-order upper bound")
    return BoundSet(S, K, 0.5 * core, sob, koenig)


def sphere_hls_constant(P: Params) -> float:
    """Constant B multiplying the HLS double integral on S^n."""
    n, s = P.n, P.s
    log_b = (
        -0.5 * (n - 2 * s) * math.log(math.pi)
        + (2 * s / n) * (log_gamma(n / 2) - log_gamma(n))
        + log_gamma(n / 2 + s)
        - log_gamma(s)
    )
    return math.exp(log_b)


def trace_constants(P: Params) -> TraceConstants:
    """Sharp restriction constants onto R^(n-1) and S^(n-1), with bounds."""
    n, s = P.n, P.s
    if n < 2 or not s > 0.5:
        raise DomainError("trace constants need n >= 2 and s > 1/2")
    shared = (
        -s * math.log(4 * math.pi)
        + log_gamma(s - 0.5)
        - log_gamma(s)
        + (2 * s - 1) / (n - 1) * (log_gamma(n - 1) - log_gamma((n - 1) / 2))
    )
    C = math.exp(shared + log_gamma(n / 2 - s) - log_gamma(n / 2 + s - 1))
    D = math.exp(shared + log_gamma((n - 2 * s) / 2) - log_gamma((n - 2 + 2 * s) / 2))
    K = K_constant(P.boundary())
    core = min(K, _split_gap((n - 2 + 2 * s) / (n - 1)))
    return TraceConstants(C, D, C * core / 4, D * core / 4)
