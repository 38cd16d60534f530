#!/usr/bin/env python3
"""
Unit tests for the binomial tail bound and the factorial bounds
"""

import importlib
import math
import unittest
from fractions import Fraction

import mpmath
import pytest

from soficlab.exceptions import DomainError, InvalidParameterError
from soficlab.models.stirling import StirlingParams
from soficlab.services import stirling_bounds
from soficlab.services.stirling_bounds import (
    TailBoundVerifier,
    binomial_subset_identity,
    d_zero,
    kappa,
    stirling_factorial_bounds,
    verify_tail_bound,
)


@pytest.mark.unit
class TestKappa(unittest.TestCase):
    """Test cases for kappa(gamma) and d0(gamma)"""

    def test_kappa_quarter(self):
        self.assertAlmostEqual(kappa("1/4"), 1.1246704, delta=1e-6)
        self.assertAlmostEqual(kappa(Fraction(1, 4)), kappa(0.25), places=15)

    def test_kappa_is_twice_binary_entropy_in_nats(self):
        g = 0.1
        self.assertAlmostEqual(kappa("1/10"), -2 * (g * math.log(g) + (1 - g) * math.log(1 - g)), places=12)

    def test_kappa_decreases_towards_zero(self):
        values = [kappa(Fraction(1, 2 ** k)) for k in range(2, 11)]
        for k, (bigger, smaller) in enumerate(zip(values, values[1:]), start=2):
            self.assertGreater(bigger, smaller, f"gamma=1/2^{k}")
        self.assertGreater(values[-1], 0)

    def test_gamma_domain(self):
        for bad in ("0", "1/2", "3/4", "-1/8"):
            with self.assertRaises(DomainError):
                kappa(bad)

    def test_d_zero(self):
        self.assertEqual(d_zero("1/4"), 15)
        self.assertGreaterEqual(d_zero("1/20"), 40)

    def test_d_zero_threshold_holds(self):
        for gamma in ("1/20", "1/10", "1/4", "2/5"):
            d0 = d_zero(gamma)
            k = kappa(gamma)
            for x in range(d0, d0 + 200):
                self.assertGreater(k * x / 2, 3 * math.log(x), f"gamma={gamma}, x={x}")

    def test_params_model(self):
        params = StirlingParams.for_gamma("1/4")
        self.assertEqual(params.gamma, Fraction(1, 4))
        self.assertEqual(params.d0, 15)
        with self.assertRaises(DomainError):
            StirlingParams(gamma="1/2", kappa=1.0, d0=1)


@pytest.mark.unit
class TestTailBound(unittest.TestCase):
    """Test cases for verify_tail_bound"""

    def test_quarter_passes_with_positive_slack(self):
        report = verify_tail_bound("1/4", span=60)
        self.assertEqual(report.d0, 15)
        self.assertEqual(len(report.rows), 61)
        self.assertEqual(report.rows[0].d, 15)
        self.assertGreater(report.min_slack, 0)
        self.assertGreater(report.slope, 0)

    def test_rows_are_exact(self):
        report = verify_tail_bound("1/4", d_range=(20, 20))
        row = report.rows[0]
        self.assertEqual(row.m, 5)
        expected = sum(math.comb(20, j) for j in range(6))
        self.assertAlmostEqual(row.log_sum, math.log(expected), places=9)
        self.assertLessEqual(row.weighted_slack, row.slack + 1e-12)

    def test_range_below_d_zero(self):
        with self.assertRaises(InvalidParameterError):
            verify_tail_bound("1/4", d_range=(5, 10))


@pytest.mark.unit
class TestExactIdentities(unittest.TestCase):
    """Test cases for the binomial identity and factorial bounds"""

    def test_binomial_identity(self):
        for n in (0, 1, 7, 30):
            lhs, rhs = binomial_subset_identity(n, "1/3")
            self.assertEqual(lhs, rhs)
            self.assertEqual(rhs, Fraction(4, 3) ** n)

    def test_binomial_identity_size_limit(self):
        with self.assertRaises(InvalidParameterError):
            binomial_subset_identity(31, "1/3")

    def test_factorial_bounds(self):
        for m in range(1, 101):
            lower, factorial, upper = stirling_factorial_bounds(m)
            self.assertEqual(factorial, math.factorial(m))
            self.assertLessEqual(float(lower), factorial * (1 + 1e-12), f"m={m}")
            self.assertGreaterEqual(float(upper), factorial * (1 - 1e-12), f"m={m}")

    def test_factorial_bounds_tight_at_one(self):
        lower, factorial, upper = stirling_factorial_bounds(1)
        self.assertAlmostEqual(float(lower), 1.0, places=12)
        self.assertAlmostEqual(float(upper), 1.0, places=12)

    def test_factorial_needs_positive_m(self):
        with self.assertRaises(InvalidParameterError):
            stirling_factorial_bounds(0)


@pytest.mark.unit
class TestWorkingPrecision(unittest.TestCase):
    """Test cases for the scoping of mpmath precision"""

    def test_import_and_calls_leave_global_precision_alone(self):
        before = mpmath.mp.dps
        importlib.reload(stirling_bounds)
        self.assertEqual(mpmath.mp.dps, before)
        kappa("1/4")
        verify_tail_bound("1/4", span=3)
        stirling_factorial_bounds(10)
        self.assertEqual(mpmath.mp.dps, before)

    def test_calls_inside_a_caller_context(self):
        with mpmath.workdps(50):
            kappa("1/3")
            self.assertEqual(mpmath.mp.dps, 50)


@pytest.mark.unit
class TestTailBoundVerifier(unittest.TestCase):
    """Test cases for the TailBoundVerifier service"""

    def test_verify_uses_the_span(self):
        report = TailBoundVerifier(span=10).verify("1/4")
        self.assertEqual([r.d for r in report.rows], list(range(15, 26)))

    def test_factorial_chain(self):
        rows = TailBoundVerifier(factorial_max=5).factorial_chain()
        self.assertEqual([m for m, _, _, _ in rows], [1, 2, 3, 4, 5])
        self.assertEqual(rows[-1][2], 120)
        self.assertLessEqual(rows[-1][1], 120)
        self.assertGreaterEqual(rows[-1][3], 120)

    def test_identity_size_is_capped(self):
        self.assertEqual(TailBoundVerifier(identity_max=99).binomial_identities("1/3"), 30)

    def test_rejects_bad_ranges(self):
        with self.assertRaises(InvalidParameterError):
            TailBoundVerifier(factorial_max=0)


if __name__ == "__main__":
    unittest.main()
