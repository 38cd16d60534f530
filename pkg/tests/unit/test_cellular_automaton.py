#!/usr/bin/env python3
"""
Unit tests for local rules, endomorphisms and the injectivity/surjectivity decisions
"""

import unittest

import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from soficlab.config import settings
from soficlab.exceptions import (
    BudgetExceededError,
    DomainError,
    InvalidParameterError,
    ModelMismatchError,
    UnsupportedGroupError,
)
from soficlab.models.automaton import Endomorphism, LocalRule, RuleVerdict
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.models.shift import Configuration
from soficlab.services.cellular_automaton import (
    CellularAutomatonService,
    apply,
    decide_injective,
    decide_rule,
    decide_surjective,
    preserves_subshift,
    search_orphan,
    search_periodic_collision,
    shift_rule,
    surjunctivity_sweep,
    weiss_rule,
)
from soficlab.services.configurations import shift_apply
from soficlab.services.group_model import interval
from soficlab.services.shift_space import full_shift, golden_mean, preset, weiss_sft
from soficlab.workers.sweep_worker import decide_rule_job

Z = GroupModel.lattice(1)
Z2 = GroupModel.lattice(2)


def _constant_rule(group=Z, value=0):
    memory = FiniteSubset(model=group, elements=[group.identity()])
    return LocalRule(alphabet_size=2, memory=memory, table=(value, value))


@pytest.mark.unit
class TestLocalRule(unittest.TestCase):
    """Test cases for rule tables and indices"""

    def test_table_order(self):
        rule = weiss_rule()
        # Patterns (x(-1), x(0)) in lexicographic order: 00 01 02 10 11 12 20 21 22.
        self.assertEqual(rule.table, (0, 1, 2, 0, 1, 1, 0, 1, 2))
        self.assertEqual(rule.output((1, 2)), 1)
        self.assertEqual(rule.output((2, 1)), 1)

    def test_index_roundtrip(self):
        rule = weiss_rule()
        self.assertEqual(LocalRule.from_index(3, rule.memory, rule.rule_index), rule)
        self.assertEqual(shift_rule(2).rule_index, 1)

    def test_index_out_of_range(self):
        with self.assertRaises(InvalidParameterError):
            LocalRule.from_index(2, interval(0, 1), 16)

    def test_table_size_checked(self):
        with self.assertRaises(InvalidParameterError):
            LocalRule(alphabet_size=2, memory=interval(0, 1), table=(0, 1, 1))

    def test_identity_rule(self):
        rule = LocalRule.identity(3)
        self.assertEqual(rule.table, (0, 1, 2))


@pytest.mark.unit
class TestEndomorphism(unittest.TestCase):
    """Test cases for invariance checks and application"""

    def test_weiss_rule_preserves_weiss_sft(self):
        self.assertTrue(preserves_subshift(weiss_rule(), weiss_sft()))

    def test_flip_does_not_preserve_golden_mean(self):
        flip = LocalRule(alphabet_size=2, memory=FiniteSubset.of(Z, [0]), table=(1, 0))
        self.assertFalse(preserves_subshift(flip, golden_mean()))
        with self.assertRaises(DomainError):
            Endomorphism(rule=flip, domain=golden_mean())

    def test_alphabet_mismatch(self):
        with self.assertRaises(ModelMismatchError):
            Endomorphism(rule=weiss_rule(), domain=golden_mean())

    def test_apply_grows_the_block_of_ones(self):
        f = Endomorphism(rule=weiss_rule(), domain=weiss_sft())
        x = Configuration.from_segments((0,), (1,), (2,))
        self.assertEqual(apply(f, x), Configuration.from_segments((0,), (1, 1), (2,)))

    def test_apply_matches_the_local_rule_cellwise(self):
        f = Endomorphism(rule=shift_rule(2), domain=golden_mean())
        x = Configuration.periodic((1,), (0,), override=[((0,), 1), ((3,), 1)])
        y = apply(f, x)
        for h in range(-6, 8):
            self.assertEqual(y.value_at((h,)), x.value_at((h - 1,)), f"h={h}")

    def test_apply_outside_domain(self):
        f = Endomorphism(rule=weiss_rule(), domain=weiss_sft())
        with self.assertRaises(DomainError):
            apply(f, Configuration.from_segments((2,), (), (0,)))


@pytest.mark.unit
class TestDecisions(unittest.TestCase):
    """Test cases for the pair-graph and subset-construction decisions over Z"""

    def test_weiss_rule_is_injective_with_orphan(self):
        f = Endomorphism(rule=weiss_rule(), domain=weiss_sft())
        self.assertEqual(decide_injective(f).outcome, "injective")
        surj = decide_surjective(f)
        self.assertEqual(surj.outcome, "not_surjective")
        self.assertEqual(surj.orphan_word, "012")
        self.assertEqual(len(surj.orphan.support), 3)

    def test_constant_rule_collapses_points(self):
        f = Endomorphism(rule=_constant_rule(), domain=golden_mean())
        inj = decide_injective(f)
        self.assertEqual(inj.outcome, "not_injective")
        x, y = inj.witness
        self.assertNotEqual(x, y)
        self.assertEqual(apply(f, x), apply(f, y))
        self.assertEqual(decide_surjective(f).orphan_word, "1")

    def test_shift_is_bijective(self):
        f = Endomorphism(rule=shift_rule(2), domain=golden_mean())
        self.assertEqual(decide_injective(f).outcome, "injective")
        self.assertEqual(decide_surjective(f).outcome, "surjective")

    def test_decide_rule_verdict(self):
        verdict = decide_rule(weiss_rule(), weiss_sft())
        self.assertTrue(verdict.injective)
        self.assertFalse(verdict.surjective)
        self.assertTrue(verdict.violates_surjunctivity)
        self.assertEqual(verdict.orphan, "012")


@pytest.mark.unit
class TestLatticeSemiDecisions(unittest.TestCase):
    """Test cases for periodic collisions and orphan searches over Z^2"""

    def setUp(self):
        self.f = Endomorphism(rule=_constant_rule(Z2), domain=preset("hard-ball:d=2"))

    def test_periodic_collision(self):
        decision = search_periodic_collision(self.f, max_period=2)
        self.assertEqual(decision.outcome, "not_injective")
        self.assertEqual(decision.method, "periodic-collision")
        x, y = decision.witness
        self.assertEqual(apply(self.f, x), apply(self.f, y))

    def test_orphan_search(self):
        decision = search_orphan(self.f, max_side=1)
        self.assertEqual(decision.outcome, "not_surjective")
        self.assertEqual(decision.orphan_word, "1")

    def test_identity_has_no_periodic_collision(self):
        f = Endomorphism(rule=LocalRule.identity(2, Z2), domain=preset("hard-ball:d=2"))
        self.assertEqual(search_periodic_collision(f, max_period=2).outcome, "unknown")


@pytest.mark.unit
class TestSurjunctivitySweep(unittest.TestCase):
    """Test cases for the exhaustive rule sweep"""

    def test_golden_mean_sweep_has_no_violations(self):
        report = surjunctivity_sweep(golden_mean(), interval(0, 1), threads=1)
        self.assertEqual(report.total_rules, 16)
        self.assertEqual(report.scanned, 16)
        self.assertGreater(report.preserving, 0)
        self.assertEqual(report.violations, [])
        for verdict in report.verdicts:
            if verdict.injective:
                self.assertTrue(verdict.surjective, f"rule {verdict.index}")

    @pytest.mark.slow
    def test_weiss_sft_sweep_finds_the_weiss_rule(self):
        report = surjunctivity_sweep(weiss_sft(), interval(-1, 0), threads=1)
        indices = [v.index for v in report.violations]
        self.assertIn(weiss_rule().rule_index, indices)

    def test_budget_keeps_partial_report(self):
        with self.assertRaises(BudgetExceededError) as ctx:
            surjunctivity_sweep(golden_mean(), interval(0, 1), budget=4, threads=1)
        self.assertEqual(ctx.exception.partial.scanned, 4)
        self.assertEqual(ctx.exception.partial.total_rules, 16)

    def test_lattice_sweep_unsupported(self):
        with self.assertRaises(UnsupportedGroupError):
            surjunctivity_sweep(preset("hard-ball:d=2"), FiniteSubset.of(Z2, [(0, 0)]))

    def test_parallel_sweep_matches_serial(self):
        serial = surjunctivity_sweep(golden_mean(), interval(0, 1), threads=1)
        parallel = surjunctivity_sweep(golden_mean(), interval(0, 1), threads=2)
        self.assertEqual(parallel.verdicts, serial.verdicts)

    def test_worker_job_round_trips_plain_dicts(self):
        result = decide_rule_job(weiss_sft().model_dump(), weiss_rule().model_dump())
        self.assertIsInstance(result, dict)
        self.assertEqual(RuleVerdict(**result), decide_rule(weiss_rule(), weiss_sft()))
        self.assertEqual(result["orphan"], "012")


@pytest.mark.unit
class TestShiftCommutation(unittest.TestCase):
    """Sliding block codes commute with the shift on random points and rules"""

    @hyp_settings(max_examples=200, deadline=None)
    @given(
        st.integers(0, 2 ** 8 - 1),
        st.lists(st.integers(0, 1), min_size=1, max_size=6),
        st.lists(st.tuples(st.integers(-6, 6), st.integers(0, 1)), max_size=2, unique_by=lambda m: m[0]),
        st.integers(-5, 5),
    )
    def test_apply_commutes_with_shift(self, index, period, marks, step):
        f = Endomorphism(rule=LocalRule.from_index(2, interval(-1, 1), index), domain=full_shift(2))
        x = Configuration.periodic((len(period),), period, override=[((h,), s) for h, s in marks])
        g = Z.element(step)
        left = apply(f, shift_apply(g, x))
        right = shift_apply(g, apply(f, x))
        for h in range(-24, 25):
            self.assertEqual(left.value_at((h,)), right.value_at((h,)), f"rule {index}, g={step}, h={h}")


@pytest.mark.unit
class TestCellularAutomatonService(unittest.TestCase):
    """Test cases for the CellularAutomatonService"""

    def test_defaults_come_from_settings(self):
        service = CellularAutomatonService()
        self.assertEqual(service.threads, settings.THREADS)
        self.assertEqual(service.sweep_budget, settings.SWEEP_BUDGET)

    def test_decide_weiss_rule(self):
        injective, surjective = CellularAutomatonService().decide(weiss_rule(), weiss_sft())
        self.assertEqual(injective.outcome, "injective")
        self.assertEqual(surjective.outcome, "not_surjective")
        self.assertEqual(surjective.orphan_word, "012")

    def test_sweep_uses_its_budget(self):
        with self.assertRaises(BudgetExceededError) as ctx:
            CellularAutomatonService(threads=1, sweep_budget=4).sweep(golden_mean(), interval(0, 1))
        self.assertEqual(ctx.exception.partial.scanned, 4)
        report = CellularAutomatonService(threads=1).sweep(golden_mean(), interval(0, 1))
        self.assertEqual(report.violations, [])


if __name__ == "__main__":
    unittest.main()
