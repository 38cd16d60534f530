"""Exact checks of the binomial tail bound sum_{j <= floor(gamma d)} C(d, j) <= e^(kappa d).

Binomial sums are exact integers. Comparisons with transcendental quantities
are made in mpmath interval arithmetic, so a pass is a rigorous certificate.
"""

import logging
import math
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath
import numpy as np
from mpmath import iv

from soficlab.exceptions import CertificateViolation, DomainError, InvalidParameterError
from soficlab.models.stirling import TailBoundReport, TailBoundRow

logger = logging.getLogger(__name__)

WORKING_DPS = 30
MAX_IDENTITY_SIZE = 30
GRID_STEPS = 100


def _gamma(gamma) -> Fraction:
    gamma = gamma if isinstance(gamma, Fraction) else Fraction(str(gamma))
    if not 0 < gamma < Fraction(1, 2):
        raise DomainError(f"gamma must lie in (0, 1/2), got {gamma}")
    return gamma


def _kappa_interval(gamma: Fraction):
    g = iv.mpf(gamma.numerator) / gamma.denominator
    return -2 * (g * iv.log(g) + (1 - g) * iv.log(1 - g))


def kappa(gamma) -> float:
    """kappa(gamma) = -2 (gamma ln gamma + (1 - gamma) ln(1 - gamma))."""
    gamma = _gamma(gamma)
    with mpmath.workdps(WORKING_DPS):
        g = mpmath.mpf(gamma.numerator) / gamma.denominator
        return float(-2 * (g * mpmath.log(g) + (1 - g) * mpmath.log(1 - g)))


def _h(k: float, x: float) -> float:
    """ln G-sign function: G(x) = e^(kx/2) - x^3 > 0 iff kx/2 - 3 ln x > 0."""
    return k * x / 2 - 3 * math.log(x)


def _positive(k_iv, x: int) -> bool:
    """Rigorous G(x) > 0."""
    return (k_iv * x / 2 - 3 * iv.log(x)).a > 0


def d_zero(gamma) -> int:
    """Least d0 >= ceil(2/gamma) with e^(kappa x/2) > x^3 for all x >= d0.

    kx/2 - 3 ln x is convex with its minimum at x* = 6/k, so past x* the first
    positive integer settles the question.
    """
    gamma = _gamma(gamma)
    k = kappa(gamma)
    k_iv = _kappa_interval(gamma)
    start = math.ceil(2 / gamma)
    x_star = 6 / k
    if _h(k, x_star) > 0 or (start >= x_star and _positive(k_iv, start)):
        d0 = start
    else:
        d0 = max(start, math.ceil(x_star))
        while not _positive(k_iv, d0):
            d0 += 1
    for step in range(GRID_STEPS + 1):
        if not _positive(k_iv, d0 + step):
            raise CertificateViolation(f"G(x) = e^(kappa x/2) - x^3 is not positive at x = {d0 + step}")
    logger.debug(f"d0({gamma}) = {d0} (kappa = {k:.9f}, x* = {x_star:.3f})")
    return d0


def _log_interval(n: int):
    return iv.log(iv.mpf(n))


def verify_tail_bound(gamma, d_range: Optional[Tuple[int, int]] = None, span: int = 500) -> TailBoundReport:
    """Check the tail bound and its two intermediate forms for every d in [lo, hi].

    With m = floor(gamma d): sum_{j <= m} C(d, j) <= (m + 1) C(d, m) <= 2m C(d, m) <= e^(kappa d).
    """
    gamma = _gamma(gamma)
    d0 = d_zero(gamma)
    lo, hi = d_range if d_range is not None else (d0, d0 + span)
    if lo < d0:
        raise InvalidParameterError(f"the tail bound is only claimed for d >= d0 = {d0}, got {lo}")
    k = kappa(gamma)
    k_iv = _kappa_interval(gamma)
    report = TailBoundReport(gamma=str(gamma), kappa=k, d0=d0)
    for d in range(lo, hi + 1):
        m = gamma.numerator * d // gamma.denominator
        term, total = 1, 1
        for j in range(1, m + 1):
            term = term * (d - j + 1) // j
            total += term
        weighted = (m + 1) * term
        doubled = 2 * m * term
        exponent = k_iv * d
        for name, value in (("sum", total), ("(m+1)C(d,m)", weighted), ("2mC(d,m)", doubled)):
            if _log_interval(value).b > exponent.a:
                raise CertificateViolation(f"tail bound {name} <= e^(kappa d) fails for gamma={gamma}, d={d}")
        with mpmath.workdps(WORKING_DPS):
            log_sum = float(mpmath.log(total))
            log_weighted = float(mpmath.log(weighted))
            log_doubled = float(mpmath.log(doubled)) if doubled else 0.0
        report.rows.append(TailBoundRow(
            d=d,
            m=m,
            log_sum=log_sum,
            kappa_d=k * d,
            slack=k * d - log_sum,
            weighted_slack=k * d - log_weighted,
            doubled_slack=k * d - log_doubled,
        ))
    if len(report.rows) > 1:
        ds = np.array([r.d for r in report.rows], dtype=float)
        slacks = np.array([r.slack for r in report.rows])
        report.slope = float(np.polyfit(ds, slacks, 1)[0])
    logger.info(
        f"Tail bound for gamma={gamma} verified on [{lo}, {hi}]: min slack {report.min_slack:.6f}, "
        f"slope {report.slope:.6f}"
    )
    return report


def binomial_subset_identity(n: int, t) -> Tuple[Fraction, Fraction]:
    """sum_j C(n, j) t^j and (1 + t)^n, asserted equal in exact arithmetic."""
    if n < 0 or n > MAX_IDENTITY_SIZE:
        raise InvalidParameterError(f"n must lie in [0, {MAX_IDENTITY_SIZE}], got {n}")
    t = t if isinstance(t, Fraction) else Fraction(str(t))
    lhs = sum(math.comb(n, j) * t ** j for j in range(n + 1))
    rhs = (1 + t) ** n
    if lhs != rhs:
        raise CertificateViolation(f"binomial identity fails for n={n}, t={t}")
    return Fraction(lhs), Fraction(rhs)


def stirling_factorial_bounds(m: int):
    """(e (m/e)^m, m!, e m (m/e)^m), with the chain checked rigorously.

    In logarithms the chain reads m ln m <= ln m! + m - 1 <= (m + 1) ln m, which
    is an exact equality at m = 1 even in interval arithmetic.
    """
    if m < 1:
        raise InvalidParameterError(f"m must be positive, got {m}")
    factorial = math.factorial(m)
    middle = _log_interval(factorial) + (m - 1)
    log_m = _log_interval(m)
    if not ((middle - m * log_m).a >= 0 and ((m + 1) * log_m - middle).a >= 0):
        raise CertificateViolation(f"factorial bounds fail at m={m}")
    with mpmath.workdps(WORKING_DPS):
        e = mpmath.e
        return e * (m / e) ** m, factorial, e * m * (m / e) ** m


class TailBoundVerifier:
    """Tail-bound, factorial-chain and binomial-identity checks over fixed ranges."""

    def __init__(self, span: int = 500, factorial_max: int = 100, identity_max: int = MAX_IDENTITY_SIZE):
        if span < 0 or factorial_max < 1:
            raise InvalidParameterError(f"span must be >= 0 and factorial >= 1, got {span} and {factorial_max}")
        self.span = span
        self.factorial_max = factorial_max
        self.identity_max = min(identity_max, MAX_IDENTITY_SIZE)

    def verify(self, gamma) -> TailBoundReport:
        return verify_tail_bound(gamma, span=self.span)

    def factorial_chain(self) -> List[Tuple[int, float, int, float]]:
        rows = []
        for m in range(1, self.factorial_max + 1):
            lower, exact, upper = stirling_factorial_bounds(m)
            rows.append((m, float(lower), exact, float(upper)))
        return rows

    def binomial_identities(self, t) -> int:
        for n in range(self.identity_max + 1):
            binomial_subset_identity(n, t)
        return self.identity_max
