#!/usr/bin/env python3
"""
Unit tests for subshift builders, pattern enumeration and expansivity
"""

import math
import unittest
from fractions import Fraction

import pytest

from soficlab.exceptions import (
    InvalidParameterError,
    UnsupportedGroupError,
    UnsupportedWindowError,
)
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.models.shift import Alphabet, Configuration, Subshift, dyadic_level
from soficlab.services.group_model import ball, box, interval
from soficlab.services.shift_space import (
    enumerate_patterns,
    expansivity_certificate,
    full_shift,
    golden_mean,
    hard_ball,
    pattern_complexity_bound,
    pattern_complexity_profile,
    pattern_count,
    periodic_points,
    periodic_words,
    preset,
    uniform_expansivity_witness,
    unit_steps,
    weiss_sft,
    zero_shift,
)

LUCAS = {1: 1, 2: 3, 3: 4, 4: 7, 5: 11, 6: 18, 8: 47, 12: 322}


@pytest.mark.unit
class TestSubshiftModels(unittest.TestCase):
    """Test cases for Alphabet and Subshift validation"""

    def test_alphabet_rejects_duplicates(self):
        with self.assertRaises(InvalidParameterError):
            Alphabet.of("0", "0")

    def test_alphabet_encode_decode(self):
        a = Alphabet.of("a", "b", "c")
        self.assertEqual(a.encode("cab"), (2, 0, 1))
        self.assertEqual(a.decode((2, 0, 1)), "cab")

    def test_admissible_patterns_are_normalised(self):
        z = GroupModel.lattice(1)
        s = Subshift(
            alphabet=Alphabet.of("0", "1"), group=z, memory=FiniteSubset.of(z, [0, 1]),
            admissible=[(1, 0), (0, 0), (1, 0)],
        )
        self.assertEqual(s.admissible, ((0, 0), (1, 0)))
        self.assertEqual(s.forbidden(), ((0, 1), (1, 1)))

    def test_pattern_outside_alphabet_rejected(self):
        z = GroupModel.lattice(1)
        with self.assertRaises(InvalidParameterError):
            Subshift(alphabet=Alphabet.of("0", "1"), group=z, memory=FiniteSubset.of(z, [0]), admissible=[(2,)])

    def test_free_group_subshift_unsupported(self):
        free = GroupModel.free(2)
        with self.assertRaises(UnsupportedGroupError):
            Subshift(
                alphabet=Alphabet.of("0"), group=free, memory=FiniteSubset(model=free, elements=[free.identity()]),
                admissible=[(0,)],
            )

    def test_dyadic_level(self):
        self.assertEqual(dyadic_level(Fraction(1, 4)), 2)
        self.assertEqual(dyadic_level(1), 0)
        with self.assertRaises(InvalidParameterError):
            dyadic_level(Fraction(1, 3))


@pytest.mark.unit
class TestConfigurations(unittest.TestCase):
    """Test cases for the canonical configuration form"""

    def test_periods_are_minimised(self):
        self.assertEqual(Configuration.periodic((4,), (0, 1, 0, 1)), Configuration.periodic((2,), (0, 1)))
        self.assertEqual(Configuration.periodic((3,), (1, 1, 1)), Configuration.constant(1))

    def test_redundant_overrides_dropped(self):
        x = Configuration.periodic((2,), (0, 1), override=[((2,), 0), ((3,), 0)])
        self.assertEqual(x.override, (((3,), 0),))
        self.assertEqual(x.value_at((3,)), 0)
        self.assertEqual(x.value_at((5,)), 1)

    def test_two_tailed_point(self):
        x = Configuration.from_segments((0,), (1,), (2,))
        self.assertTrue(x.two_tailed)
        self.assertEqual([x.value_at((h,)) for h in range(-2, 3)], [0, 0, 1, 2, 2])
        self.assertEqual(x.describe(), "(0)^inf 0:1 (2)^inf")

    def test_two_tailed_with_equal_tails_collapses(self):
        x = Configuration.from_segments((0,), (), (0,))
        self.assertEqual(x, Configuration.constant(0))

    def test_rank_two_periodic(self):
        x = Configuration.periodic((2, 2), (0, 1, 1, 0))
        self.assertEqual(x.value_at((0, 1)), 1)
        self.assertEqual(x.value_at((3, 3)), 0)


@pytest.mark.unit
class TestBuilders(unittest.TestCase):
    """Test cases for preset subshifts"""

    def test_presets_resolve(self):
        self.assertEqual(preset("golden-mean"), golden_mean())
        self.assertEqual(preset("weiss"), weiss_sft())
        self.assertEqual(preset("zero"), zero_shift())
        self.assertEqual(len(preset("full-shift:k=3").alphabet), 3)
        self.assertEqual(preset("hard-ball:d=2").rank, 2)

    def test_unknown_preset(self):
        with self.assertRaises(InvalidParameterError):
            preset("sierpinski")
        with self.assertRaises(InvalidParameterError):
            preset("full-shift:k=two")

    def test_hard_ball_patterns(self):
        z2 = GroupModel.lattice(2)
        hb = hard_ball(z2, unit_steps(z2))
        self.assertEqual(hb.name, "hard-ball:d=2")
        self.assertEqual(len(hb.admissible), 5)

    def test_hard_ball_needs_identity_outside_f(self):
        z = GroupModel.lattice(1)
        with self.assertRaises(InvalidParameterError):
            hard_ball(z, FiniteSubset.of(z, [0, 1]))


@pytest.mark.unit
class TestPatternEnumeration(unittest.TestCase):
    """Test cases for admissible patterns and periodic points"""

    def test_golden_mean_counts_are_fibonacci(self):
        x = golden_mean()
        self.assertEqual([pattern_count(x, n) for n in range(1, 7)], [2, 3, 5, 8, 13, 21])

    def test_enumerate_patterns_on_z(self):
        x = golden_mean()
        patterns = enumerate_patterns(x, interval(0, 2))
        self.assertTrue(patterns.exact)
        self.assertEqual(
            patterns.words, ((0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 0, 1))
        )
        self.assertIn((1, 0, 1), patterns)
        self.assertNotIn((1, 1, 0), patterns)

    def test_weiss_forbids_zero_then_two(self):
        words = enumerate_patterns(weiss_sft(), interval(0, 1)).words
        self.assertNotIn((0, 2), words)
        self.assertIn((1, 2), words)

    def test_non_box_window_rejected(self):
        z = GroupModel.lattice(1)
        with self.assertRaises(UnsupportedWindowError):
            enumerate_patterns(golden_mean(), FiniteSubset.of(z, [0, 2]))

    def test_periodic_words_are_lucas_numbers(self):
        x = golden_mean()
        for d, count in LUCAS.items():
            self.assertEqual(len(periodic_words(x, d)), count, f"d={d}")

    def test_periodic_points_of_zero_shift(self):
        self.assertEqual(periodic_points(zero_shift(), 5), [Configuration.constant(0)])

    def test_hard_ball_torus_words(self):
        z2 = GroupModel.lattice(2)
        hb = hard_ball(z2, unit_steps(z2))
        # On the 2x2 torus each 1 kills both neighbours: 0, one 1, or a diagonal pair.
        self.assertEqual(len(periodic_words(hb, 2)), 7)

    def test_lattice_enumeration_is_marked_inexact(self):
        z2 = GroupModel.lattice(2)
        hb = hard_ball(z2, unit_steps(z2))
        patterns = enumerate_patterns(hb, box(z2, (0, 0), (1, 1)))
        self.assertFalse(patterns.exact)
        self.assertEqual(patterns.margin, 2)
        self.assertEqual(len(patterns), 7)


@pytest.mark.unit
class TestComplexity(unittest.TestCase):
    """Test cases for pattern complexity"""

    def test_bound_dominates_golden_ratio(self):
        oracle = math.log((1 + math.sqrt(5)) / 2)
        self.assertGreaterEqual(pattern_complexity_bound(golden_mean(), 12), oracle)
        self.assertAlmostEqual(pattern_complexity_bound(golden_mean(), 12), math.log(377) / 12, places=12)

    def test_full_shift_bound_is_exact(self):
        self.assertAlmostEqual(pattern_complexity_bound(full_shift(3), 5), math.log(3), places=12)

    def test_zero_shift_bound_is_zero(self):
        self.assertEqual(pattern_complexity_bound(zero_shift(), 4), 0.0)

    def test_profile_is_non_increasing_for_golden_mean(self):
        rates = [rate for _, _, rate in pattern_complexity_profile(golden_mean(), 8)]
        self.assertEqual(len(rates), 8)
        for a, b in zip(rates, rates[1:]):
            self.assertLessEqual(b, a + 1e-12)


@pytest.mark.unit
class TestExpansivity(unittest.TestCase):
    """Test cases for the uniform expansivity witness"""

    def test_witness_is_a_ball(self):
        k = uniform_expansivity_witness(golden_mean(), Fraction(1, 4))
        self.assertEqual(k, ball(GroupModel.lattice(1), 3))

    def test_certificate(self):
        cert = expansivity_certificate(weiss_sft(), levels=(0, 1))
        self.assertEqual(cert.constant, Fraction(1, 2))
        self.assertEqual(cert.verified_levels, (0, 1))
        self.assertEqual(len(cert.witness(Fraction(1, 2))), 3)

    def test_epsilon_must_be_dyadic(self):
        with self.assertRaises(InvalidParameterError):
            uniform_expansivity_witness(golden_mean(), Fraction(1, 3))


if __name__ == "__main__":
    unittest.main()
