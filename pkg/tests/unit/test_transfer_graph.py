#!/usr/bin/env python3
"""
Unit tests for transfer graphs of Z-SFTs
"""

import math
import unittest

import networkx as nx
import pytest

from soficlab.exceptions import BudgetExceededError, InvalidParameterError, UnsupportedGroupError
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.models.shift import Alphabet, Subshift
from soficlab.services.configurations import contains
from soficlab.services.shift_space import full_shift, golden_mean, preset, weiss_sft, zero_shift
from soficlab.services.transfer_graph import TransferGraph, cyclic_nodes, essential_nodes

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


@pytest.mark.unit
class TestEssentialNodes(unittest.TestCase):
    """Test cases for trimming dead ends"""

    def test_dead_ends_removed(self):
        g = nx.DiGraph([(0, 0), (0, 1), (1, 2), (3, 0)])
        self.assertEqual(essential_nodes(g), {0})
        self.assertEqual(cyclic_nodes(g), {0})

    def test_cycle_with_tail(self):
        g = nx.DiGraph([(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)])
        self.assertEqual(essential_nodes(g), {0, 1, 2, 3})


@pytest.mark.unit
class TestTransferGraph(unittest.TestCase):
    """Test cases for TransferGraph"""

    def test_golden_mean_graph(self):
        graph = TransferGraph(golden_mean())
        self.assertEqual(graph.vertices, ((0,), (1,)))
        self.assertEqual(graph.graph.number_of_edges(), 3)
        self.assertEqual(graph.count_words(10), 144)

    def test_spectral_radius_of_golden_mean(self):
        low, high = TransferGraph(golden_mean()).spectral_radius()
        self.assertLessEqual(low, GOLDEN_RATIO + 1e-9)
        self.assertGreaterEqual(high, GOLDEN_RATIO - 1e-9)
        self.assertLess(high - low, 1e-8)

    def test_spectral_radius_of_zero_shift(self):
        low, high = TransferGraph(zero_shift()).spectral_radius()
        self.assertAlmostEqual(low, 1.0)
        self.assertAlmostEqual(high, 1.0)

    def test_words_are_lexicographic_and_counted(self):
        graph = TransferGraph(weiss_sft())
        words = graph.words(3)
        self.assertEqual(words, sorted(words))
        self.assertEqual(len(words), graph.count_words(3))
        self.assertIn((0, 1, 2), words)

    def test_word_budget(self):
        with self.assertRaises(BudgetExceededError):
            TransferGraph(full_shift(2)).words(12, budget=1000)

    def test_is_admissible(self):
        graph = TransferGraph(golden_mean())
        self.assertTrue(graph.is_admissible((1, 0, 1, 0)))
        self.assertFalse(graph.is_admissible((0, 1, 1)))
        self.assertTrue(graph.is_admissible((1,)))

    def test_transient_symbols_are_not_globally_admissible(self):
        # 2 may follow 0 but nothing may follow 2.
        z = GroupModel.lattice(1)
        x = Subshift(
            alphabet=Alphabet.of("0", "1", "2"), group=z, memory=FiniteSubset.of(z, [0, 1]),
            admissible=[(0, 0), (0, 1), (1, 0), (0, 2)],
        )
        graph = TransferGraph(x)
        self.assertFalse(graph.is_admissible((0, 2)))
        self.assertEqual(graph.count_words(1), 2)

    def test_point_through(self):
        x = weiss_sft()
        point = TransferGraph(x).point_through((0, 1, 2))
        self.assertEqual([point.value_at((h,)) for h in range(3)], [0, 1, 2])
        self.assertTrue(contains(x, point))

    def test_vertex_path_rejects_forbidden_words(self):
        with self.assertRaises(InvalidParameterError):
            TransferGraph(golden_mean()).vertex_path((1, 1))

    def test_lattice_rejected(self):
        with self.assertRaises(UnsupportedGroupError):
            TransferGraph(preset("hard-ball:d=2"))

    def test_longer_blocks(self):
        graph = TransferGraph(golden_mean(), block_length=4)
        self.assertEqual(graph.block_length, 4)
        self.assertEqual(len(graph.vertices), 5)
        self.assertEqual(graph.count_words(6), 21)


if __name__ == "__main__":
    unittest.main()
