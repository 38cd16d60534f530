"""Transfer graphs of Z-SFTs.

Vertices are words of length K-1 and edges words of length K, for a block
length K at least the memory span. The graph is trimmed to its essential part,
so bi-infinite paths correspond exactly to points of the subshift and a word
is globally admissible iff it spells a path.
"""

import logging
from collections import deque
from typing import Dict, Hashable, List, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from soficlab.config import settings
from soficlab.exceptions import BudgetExceededError, CertificateViolation, InvalidParameterError, UnsupportedGroupError
from soficlab.models.shift import Configuration, Subshift

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


def essential_nodes(graph: nx.DiGraph) -> Set[Hashable]:
    """Nodes lying on some bi-infinite path: reachable from a cycle and reaching a cycle."""
    if graph.number_of_nodes() == 0:
        return set()
    condensed = nx.condensation(graph)
    members = nx.get_node_attributes(condensed, "members")
    cyclic = {
        c for c, nodes in members.items()
        if len(nodes) > 1 or any(graph.has_edge(v, v) for v in nodes)
    }
    order = list(nx.topological_sort(condensed))
    forward: Set[int] = set()
    for c in order:
        if c in cyclic or any(p in forward for p in condensed.predecessors(c)):
            forward.add(c)
    backward: Set[int] = set()
    for c in reversed(order):
        if c in cyclic or any(s in backward for s in condensed.successors(c)):
            backward.add(c)
    return {v for c in forward & backward for v in members[c]}


def cyclic_nodes(graph: nx.DiGraph) -> Set[Hashable]:
    nodes = set()
    for comp in nx.strongly_connected_components(graph):
        if len(comp) > 1 or any(graph.has_edge(v, v) for v in comp):
            nodes |= comp
    return nodes


def _cycle_through(graph: nx.DiGraph, node: Hashable) -> List[Hashable]:
    """Node list of a shortest cycle starting at `node` (closing edge back to `node` implied)."""
    if graph.has_edge(node, node):
        return [node]
    best = None
    for succ in sorted(graph.successors(node)):
        try:
            path = nx.shortest_path(graph, succ, node)
        except nx.NetworkXNoPath:
            continue
        if best is None or len(path) < len(best):
            best = path
    if best is None:
        raise InvalidParameterError(f"node {node} lies on no cycle")
    return [node] + best[:-1]


def _nearest_cyclic(graph: nx.DiGraph, start: Hashable, cyclic: Set[Hashable], reverse: bool) -> List[Hashable]:
    """Shortest path from start to a cyclic node (or from one, when reverse)."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node in cyclic:
            path = [node]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path if reverse else list(reversed(path))
        neighbours = graph.predecessors(node) if reverse else graph.successors(node)
        for nxt in sorted(neighbours):
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    raise InvalidParameterError(f"node {start} is not essential")


def bi_infinite_extension(graph: nx.DiGraph, path: Sequence[Hashable]):
    """Extend a finite path to an eventually periodic bi-infinite one.

    Returns (left_cycle, middle, right_cycle, offset): the middle node list is
    preceded by left_cycle repeated and followed by right_cycle repeated, and
    path[0] sits at index `offset` of the middle list.
    """
    cyclic = cyclic_nodes(graph)
    lead_in = _nearest_cyclic(graph, path[0], cyclic, reverse=True)
    lead_out = _nearest_cyclic(graph, path[-1], cyclic, reverse=False)
    left_cycle = _cycle_through(graph, lead_in[0])
    out_cycle = _cycle_through(graph, lead_out[-1])
    right_cycle = out_cycle[1:] + out_cycle[:1]
    middle = list(lead_in) + list(path[1:]) + list(lead_out[1:])
    return left_cycle, middle, right_cycle, len(lead_in) - 1


class TransferGraph:
    """Essential higher-block graph of a Z-SFT."""

    def __init__(self, subshift: Subshift, block_length: int = 0):
        if subshift.rank != 1:
            raise UnsupportedGroupError(f"transfer graphs need a Z-SFT, got {subshift.group.declaration()}")
        self.subshift = subshift
        low = subshift.memory.bounds()[0][0]
        self.window = tuple(o[0] - low for o in subshift.offsets)
        self.memory_span = subshift.span[0]
        self.block_length = max(self.memory_span, 2, block_length)
        self.symbols = range(len(subshift.alphabet))
        self._allowed = subshift.admissible_set
        full = nx.DiGraph()
        for word in self._local_words(self.block_length):
            full.add_edge(word[:-1], word[1:])
        keep = essential_nodes(full)
        self.graph: nx.DiGraph = full.subgraph(keep).copy()
        self.vertices: Tuple[Word, ...] = tuple(sorted(self.graph.nodes))
        self._prefixes: Dict[int, Set[Word]] = {}
        logger.debug(
            f"Transfer graph for {subshift.label()}: block {self.block_length}, "
            f"{len(self.vertices)} vertices, {self.graph.number_of_edges()} edges"
        )

    def _window_ok(self, word: Sequence[int], start: int) -> bool:
        return tuple(word[start + o] for o in self.window) in self._allowed

    def _local_words(self, n: int) -> List[Word]:
        """Words of length n all of whose memory windows are admissible."""
        span = self.memory_span
        out: List[Word] = []
        word: List[int] = []

        def extend():
            if len(word) == n:
                out.append(tuple(word))
                return
            for a in self.symbols:
                word.append(a)
                start = len(word) - span
                if start < 0 or self._window_ok(word, start):
                    extend()
                word.pop()

        extend()
        return out

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def _prefix_set(self, n: int) -> Set[Word]:
        if n not in self._prefixes:
            self._prefixes[n] = {v[:n] for v in self.vertices}
        return self._prefixes[n]

    def count_words(self, n: int) -> int:
        """Exact number of globally admissible words of length n."""
        if self.is_empty:
            return 0
        if n <= self.block_length - 1:
            return len(self._prefix_set(n))
        counts = {v: 1 for v in self.vertices}
        for _ in range(n - (self.block_length - 1)):
            nxt = dict.fromkeys(self.vertices, 0)
            for u, v in self.graph.edges:
                nxt[v] += counts[u]
            counts = nxt
        return sum(counts.values())

    def words(self, n: int, budget: int = 0) -> List[Word]:
        """Globally admissible words of length n, in lexicographic order."""
        budget = budget or settings.ENUMERATION_BUDGET
        total = self.count_words(n)
        if total > budget:
            raise BudgetExceededError("shift_space", f"{total} words of length {n} exceed the budget of {budget}")
        if n <= self.block_length - 1:
            return sorted(self._prefix_set(n))
        out: List[Word] = []
        succ = {v: sorted(self.graph.successors(v)) for v in self.vertices}

        def walk(vertex: Word, word: List[int]):
            if len(word) == n:
                out.append(tuple(word))
                return
            for nxt in succ[vertex]:
                word.append(nxt[-1])
                walk(nxt, word)
                word.pop()

        for v in self.vertices:
            walk(v, list(v))
        return out

    def is_admissible(self, word: Sequence[int]) -> bool:
        word = tuple(word)
        k = self.block_length
        if len(word) <= k - 1:
            return word in self._prefix_set(len(word))
        if word[: k - 1] not in self.graph:
            return False
        return all(self.graph.has_edge(word[i: i + k - 1], word[i + 1: i + k]) for i in range(len(word) - k + 1))

    def vertex_path(self, word: Sequence[int]) -> List[Word]:
        word = tuple(word)
        k = self.block_length
        if len(word) < k - 1:
            matches = [v for v in self.vertices if v[: len(word)] == word]
            if not matches:
                raise InvalidParameterError(f"word {word} is not globally admissible")
            return [matches[0]]
        if not self.is_admissible(word):
            raise InvalidParameterError(f"word {word} is not globally admissible")
        return [word[i: i + k - 1] for i in range(len(word) - k + 2)]

    def point_through(self, word: Sequence[int]) -> Configuration:
        """An eventually periodic point of X carrying `word` at coordinates 0..len-1."""
        left, middle, right, offset = bi_infinite_extension(self.graph, self.vertex_path(word))
        return Configuration.from_segments(
            [v[0] for v in left], [v[0] for v in middle], [v[0] for v in right], start=-offset
        )

    def spectral_radius(self) -> Tuple[float, float]:
        """Perron root of the adjacency matrix as a Collatz-Wielandt bracket (low, high).

        Each nontrivial strongly connected component is iterated on A + I, which
        is primitive, so the bracket closes geometrically.
        """
        tolerance = settings.POWER_ITERATION_TOLERANCE
        best = (0.0, 0.0)
        for comp in nx.strongly_connected_components(self.graph):
            nodes = sorted(comp)
            if len(nodes) == 1 and not self.graph.has_edge(nodes[0], nodes[0]):
                continue
            matrix = nx.to_numpy_array(self.graph, nodelist=nodes, weight=None) + np.eye(len(nodes))
            vector = np.ones(len(nodes))
            low, high = 0.0, float("inf")
            for _ in range(settings.POWER_ITERATION_MAX):
                image = matrix @ vector
                ratios = image / vector
                low, high = float(ratios.min()), float(ratios.max())
                if high - low < tolerance:
                    break
                vector = image / image.max()
            else:
                raise CertificateViolation(f"power iteration bracket [{low}, {high}] did not close")
            if low - 1.0 > best[0]:
                best = (low - 1.0, high - 1.0)
        return best
