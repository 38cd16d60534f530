"""Sliding block codes on SFTs and the decision procedures behind the surjunctivity sweep.

Over Z injectivity and surjectivity are decided exactly on the transfer
graph. Over Z^r only semi-decisions are offered: a periodic collision
certifies non-injectivity and an orphan pattern certifies non-surjectivity.
"""

import logging
from collections import defaultdict, deque
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from soficlab.config import settings
from soficlab.exceptions import (
    BudgetExceededError,
    CertificateViolation,
    DomainError,
    InvalidParameterError,
    ModelMismatchError,
    UnsupportedGroupError,
)
from soficlab.models.automaton import (
    Endomorphism,
    InjectivityDecision,
    LocalRule,
    RuleVerdict,
    SurjectivityDecision,
    SweepReport,
)
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.models.shift import Configuration, Coord, Pattern, Subshift, _box_coords, _row_major
from soficlab.services.configurations import contains
from soficlab.services.group_model import box
from soficlab.services.shift_space import lattice_patterns, periodic_points, transfer_graph
from soficlab.services.transfer_graph import bi_infinite_extension, essential_nodes

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


# -- rule builders -----------------------------------------------------------

def weiss_rule() -> LocalRule:
    """mu(s, t) = t except mu(1, 2) = 1 on S = {-1, 0}: grows a finite block of 1's by one cell."""
    memory = FiniteSubset.of(GroupModel.lattice(1), [-1, 0])
    return LocalRule.from_function(3, memory, lambda p: 1 if p == (1, 2) else p[1])


def shift_rule(alphabet_size: int, step: int = 1) -> LocalRule:
    """f(x) = step . x, realised by projecting onto the single memory cell -step."""
    memory = FiniteSubset.of(GroupModel.lattice(1), [-step])
    return LocalRule.from_function(alphabet_size, memory, lambda p: p[0])


def rule_index(rule: LocalRule) -> int:
    return rule.rule_index


def rule_from_index(alphabet_size: int, memory: FiniteSubset, index: int) -> LocalRule:
    return LocalRule.from_index(alphabet_size, memory, index)


def endomorphism(rule: LocalRule, domain: Subshift) -> Endomorphism:
    return Endomorphism(rule=rule, domain=domain)


# -- application -------------------------------------------------------------

def _add(a: Coord, b: Coord) -> Coord:
    return tuple(x + y for x, y in zip(a, b))


def _image_background(rule: LocalRule, periods: Coord, cells: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(
        rule.output(tuple(cells[_row_major(_add(h, s), periods)] for s in rule.offsets))
        for h in _box_coords(periods)
    )


def apply(f: Endomorphism, x: Configuration) -> Configuration:
    """f(x)(h) = mu(x(h + s) for s in S), computed on the backgrounds and the cells near the overrides."""
    if not contains(f.domain, x):
        raise DomainError(f"configuration {x.describe()} is not a point of {f.domain.label()}")
    rule = f.rule
    cells = _image_background(rule, x.periods, x.cells)
    right_cells = None
    if x.two_tailed:
        right_cells = _image_background(rule, x.right_periods, x.right_cells)
    marks = [coord for coord, _ in x.override]
    if x.two_tailed:
        marks.extend([(-1,), (0,)])
    override = []
    if marks:
        s_lo, s_hi = rule.memory.bounds()
        ranges = [
            range(min(m[i] for m in marks) - s_hi[i], max(m[i] for m in marks) - s_lo[i] + 1)
            for i in range(x.rank)
        ]
        for h in product(*ranges):
            override.append((h, rule.output(tuple(x.value_at(_add(h, s)) for s in rule.offsets))))
    return Configuration(
        rank=x.rank,
        periods=x.periods,
        cells=cells,
        right_periods=x.right_periods,
        right_cells=right_cells,
        override=override,
    )


def _check_compatible(rule: LocalRule, subshift: Subshift) -> None:
    if rule.memory.model != subshift.group:
        raise ModelMismatchError("rule and subshift live over different groups")
    if rule.alphabet_size != len(subshift.alphabet):
        raise ModelMismatchError("rule and subshift use alphabets of different size")


class _PreservationCheck:
    """Preimage words of size span(S) + span(Omega) - 1, whose images each fill one memory window."""

    def __init__(self, subshift: Subshift, memory: FiniteSubset):
        self.subshift = subshift
        r = subshift.rank
        s_lo, s_hi = memory.bounds()
        o_lo, _ = subshift.memory.bounds()
        sides = tuple((s_hi[i] - s_lo[i] + 1) + subshift.span[i] - 1 for i in range(r))
        if r == 1:
            self.words = transfer_graph(subshift).words(sides[0])
            self.exact = True
        else:
            self.words = lattice_patterns(subshift, (0,) * r, tuple(n - 1 for n in sides), settings.LATTICE_MARGIN)
            self.exact = False
        self.sides = sides
        # For each window offset, the preimage positions feeding it, in memory order.
        shifted = [tuple(s[i] - s_lo[i] for i in range(r)) for s in memory.payloads]
        self.feeds = [
            tuple(_row_major(_add(tuple(o[i] - o_lo[i] for i in range(r)), s), sides) for s in shifted)
            for o in subshift.offsets
        ]

    def holds(self, rule: LocalRule) -> bool:
        allowed = self.subshift.admissible_set
        for w in self.words:
            window = tuple(rule.output(tuple(w[j] for j in feed)) for feed in self.feeds)
            if window not in allowed:
                return False
        return True


def preserves_subshift(rule: LocalRule, subshift: Subshift) -> bool:
    """True iff every admissible preimage word maps onto an admissible window.

    Exact over Z. Over Z^r the preimages are the patterns admissible at the
    lattice margin, so a False may be conservative.
    """
    _check_compatible(rule, subshift)
    return _PreservationCheck(subshift, rule.memory).holds(rule)


# -- injectivity -------------------------------------------------------------

def _rule_window(rule: LocalRule) -> Tuple[int, Tuple[int, ...]]:
    s_lo = rule.memory.bounds()[0][0]
    rel = tuple(s[0] - s_lo for s in rule.offsets)
    return max(rel) + 1, rel


def _labelled_graph(f: Endomorphism):
    """Transfer graph whose blocks cover the rule window, with edge labels mu(edge word)."""
    width, rel = _rule_window(f.rule)
    graph = transfer_graph(f.domain, max(width, 2))
    labels = {}
    for u, v in graph.graph.edges:
        word = u + v[-1:]
        labels[(u, v)] = f.rule.output(tuple(word[i] for i in rel))
    return graph, labels, width


def decide_injective(f: Endomorphism) -> InjectivityDecision:
    """Pair-graph decision over Z; a periodic collision search otherwise."""
    if f.domain.rank != 1:
        return search_periodic_collision(f)
    graph, labels, _ = _labelled_graph(f)
    by_label: Dict[int, List[Tuple[Word, Word]]] = defaultdict(list)
    for edge, label in labels.items():
        by_label[label].append(edge)
    pairs = nx.DiGraph()
    for edges in by_label.values():
        for (u1, v1), (u2, v2) in product(edges, repeat=2):
            pairs.add_edge((u1, u2), (v1, v2))
    essential = essential_nodes(pairs)
    off_diagonal = sorted(n for n in essential if n[0] != n[1])
    logger.debug(
        f"Pair graph for rule {f.rule.rule_index}: {pairs.number_of_nodes()} nodes, "
        f"{len(essential)} essential, {len(off_diagonal)} off the diagonal"
    )
    if not off_diagonal:
        return InjectivityDecision(outcome="injective")
    core = pairs.subgraph(essential).copy()
    left, middle, right, offset = bi_infinite_extension(core, [off_diagonal[0]])

    def track(k: int) -> Configuration:
        return Configuration.from_segments(
            [n[k][0] for n in left], [n[k][0] for n in middle], [n[k][0] for n in right], start=-offset
        )

    x, y = track(0), track(1)
    if x == y or apply(f, x) != apply(f, y):
        raise CertificateViolation(f"pair-graph witness for rule {f.rule.rule_index} failed direct application")
    return InjectivityDecision(outcome="not_injective", witness=(x, y), detail=f"{x.describe()} vs {y.describe()}")


def search_periodic_collision(f: Endomorphism, max_period: int = 4) -> InjectivityDecision:
    """Two distinct periodic points of period at most max_period with equal images, if any."""
    seen: Dict[Configuration, Configuration] = {}
    for d in range(1, max_period + 1):
        for point in periodic_points(f.domain, d):
            image = apply(f, point)
            other = seen.setdefault(image, point)
            if other != point:
                return InjectivityDecision(
                    outcome="not_injective",
                    witness=(other, point),
                    method="periodic-collision",
                    detail=f"collision at period {d}",
                )
    return InjectivityDecision(
        outcome="unknown", method="periodic-collision", detail=f"no collision up to period {max_period}"
    )


# -- surjectivity ------------------------------------------------------------

def _has_preimage(f: Endomorphism, word: Word) -> bool:
    """Brute-force oracle: some admissible word of length |w| + width - 1 maps onto w."""
    width, rel = _rule_window(f.rule)
    for u in transfer_graph(f.domain).words(len(word) + width - 1):
        if all(f.rule.output(tuple(u[i + j] for j in rel)) == word[i] for i in range(len(word))):
            return True
    return False


def _orphan_pattern(f: Endomorphism, word: Word) -> Pattern:
    support = box(f.domain.group, (0,), (len(word) - 1,))
    return Pattern(support=support, symbols=word)


def decide_surjective(f: Endomorphism) -> SurjectivityDecision:
    """Subset construction over Z, reading words in shortlex order; an orphan search otherwise.

    A state pairs the transfer-graph vertices reachable in X with those
    reachable in the labelled graph of f(X). The first word killing the second
    set while keeping the first is the shortlex-least orphan.
    """
    if f.domain.rank != 1:
        return search_orphan(f)
    base = transfer_graph(f.domain)
    graph, labels, _ = _labelled_graph(f)
    step: Dict[Tuple[Word, int], set] = defaultdict(set)
    for (u, v), label in labels.items():
        step[(u, label)].add(v)
    symbols = range(len(f.domain.alphabet))
    start = (frozenset(base.vertices), frozenset(graph.vertices))
    queue = deque([(start, ())])
    visited = {start}
    budget = settings.SUBSET_STATE_BUDGET
    while queue:
        (in_x, in_image), word = queue.popleft()
        for a in symbols:
            nxt_x = frozenset(v[1:] + (a,) for v in in_x if base.graph.has_edge(v, v[1:] + (a,)))
            if not nxt_x:
                continue
            nxt_image = frozenset(w for u in in_image for w in step.get((u, a), ()))
            candidate = word + (a,)
            if not nxt_image:
                if _has_preimage(f, candidate) or not base.is_admissible(candidate):
                    raise CertificateViolation(
                        f"orphan {candidate} for rule {f.rule.rule_index} failed the exhaustive preimage search"
                    )
                text = f.domain.alphabet.decode(candidate)
                logger.debug(f"Rule {f.rule.rule_index} has orphan {text!r} after {len(visited)} subset states")
                return SurjectivityDecision(
                    outcome="not_surjective", orphan=_orphan_pattern(f, candidate), orphan_word=text
                )
            state = (nxt_x, nxt_image)
            if state not in visited:
                visited.add(state)
                if len(visited) > budget:
                    return SurjectivityDecision(
                        outcome="unknown", detail=f"more than {budget} subset states"
                    )
                queue.append((state, candidate))
    return SurjectivityDecision(outcome="surjective", detail=f"{len(visited)} subset states")


def _box_patterns_of_points(points: Sequence[Configuration], n: int, rank: int) -> List[Word]:
    found = set()
    cells = list(product(range(n), repeat=rank))
    for point in points:
        for t in _box_coords(point.periods):
            found.add(tuple(point.value_at(_add(t, c)) for c in cells))
    return sorted(found)


def search_orphan(f: Endomorphism, max_side: int = 3) -> SurjectivityDecision:
    """Look for a box pattern of some periodic point that no locally admissible preimage maps onto.

    Targets come from periodic points, so they are globally admissible; the
    preimage candidates over-approximate the admissible ones, so a miss is a
    genuine orphan.
    """
    subshift = f.domain
    r = subshift.rank
    rule = f.rule
    s_lo, s_hi = rule.memory.bounds()
    for n in range(1, max_side + 1):
        points = [p for d in range(n, n + 3) for p in periodic_points(subshift, d)]
        targets = _box_patterns_of_points(points, n, r)
        sides = tuple(n + s_hi[i] - s_lo[i] for i in range(r))
        pre = lattice_patterns(subshift, (0,) * r, tuple(a - 1 for a in sides), settings.LATTICE_MARGIN)
        feeds = [
            tuple(_row_major(tuple(c[i] + s[i] - s_lo[i] for i in range(r)), sides) for s in rule.offsets)
            for c in product(range(n), repeat=r)
        ]
        images = {tuple(rule.output(tuple(w[j] for j in feed)) for feed in feeds) for w in pre}
        for target in targets:
            if target not in images:
                support = box(subshift.group, (0,) * r, (n - 1,) * r)
                return SurjectivityDecision(
                    outcome="not_surjective",
                    orphan=Pattern(support=support, symbols=target),
                    orphan_word=subshift.alphabet.decode(target),
                    method="orphan-search",
                )
    return SurjectivityDecision(
        outcome="unknown", method="orphan-search", detail=f"no orphan on boxes up to side {max_side}"
    )


# -- sweep -------------------------------------------------------------------

def decide_rule(rule: LocalRule, subshift: Subshift) -> RuleVerdict:
    f = Endomorphism(rule=rule, domain=subshift)
    injective = decide_injective(f)
    surjective = decide_surjective(f)
    return RuleVerdict(
        index=rule.rule_index,
        table=rule.table,
        preserves=True,
        injective=None if injective.outcome == "unknown" else injective.outcome == "injective",
        surjective=None if surjective.outcome == "unknown" else surjective.outcome == "surjective",
        orphan=surjective.orphan_word,
    )


def _decide_batch(subshift: Subshift, rules: List[LocalRule], threads: int) -> List[RuleVerdict]:
    if threads <= 1 or len(rules) < 2:
        return [decide_rule(rule, subshift) for rule in rules]
    from soficlab.workers.sweep_worker import decide_rule_job

    payload = subshift.model_dump()
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = pool.map(decide_rule_job, [payload] * len(rules), [r.model_dump() for r in rules])
        return [RuleVerdict(**r) for r in results]


def surjunctivity_sweep(subshift: Subshift, memory: FiniteSubset, budget: Optional[int] = None,
                        threads: Optional[int] = None) -> SweepReport:
    """Decide injectivity and surjectivity for every rule on `memory` that preserves the subshift."""
    if subshift.rank != 1:
        raise UnsupportedGroupError("the surjunctivity sweep decides rules over Z only")
    if memory.model != subshift.group:
        raise ModelMismatchError("memory set and subshift live over different groups")
    if not memory.elements:
        raise InvalidParameterError("rule memory must be nonempty")
    budget = budget or settings.SWEEP_BUDGET
    threads = threads or settings.THREADS
    k = len(subshift.alphabet)
    total = k ** (k ** len(memory))
    report = SweepReport(subshift=subshift.label(), memory=memory.describe(), total_rules=total)
    check = _PreservationCheck(subshift, memory)
    logger.info(f"Sweeping {total} rules on {memory.describe()} over {subshift.label()}")

    preserving = []
    for index in range(min(total, budget)):
        rule = LocalRule.from_index(k, memory, index)
        report.scanned += 1
        if check.holds(rule):
            preserving.append(rule)
    report.preserving = len(preserving)

    for verdict in _decide_batch(subshift, preserving, threads):
        report.verdicts.append(verdict)
        report.injective += bool(verdict.injective)
        report.surjective += bool(verdict.surjective)
        if verdict.violates_surjunctivity:
            logger.warning(f"Rule {verdict.index} on {subshift.label()} is injective but not surjective")

    logger.info(
        f"Sweep done: {report.preserving} preserving, {report.injective} injective, "
        f"{len(report.violations)} injective and not surjective"
    )
    if total > budget:
        raise BudgetExceededError(
            "cellular_automaton", f"{total} rules exceed the sweep budget of {budget}", partial=report
        )
    return report


class CellularAutomatonService:
    """Decides single rules and runs sweeps with the worker and budget settings."""

    def __init__(self, threads: Optional[int] = None, sweep_budget: Optional[int] = None):
        self.threads = threads or settings.THREADS
        self.sweep_budget = sweep_budget or settings.SWEEP_BUDGET

    def decide(self, rule: LocalRule, subshift: Subshift) -> Tuple[InjectivityDecision, SurjectivityDecision]:
        f = endomorphism(rule, subshift)
        logger.info(f"Deciding rule {rule.rule_index} on {subshift.label()}")
        return decide_injective(f), decide_surjective(f)

    def sweep(self, subshift: Subshift, memory: FiniteSubset) -> SweepReport:
        return surjunctivity_sweep(subshift, memory, budget=self.sweep_budget, threads=self.threads)
