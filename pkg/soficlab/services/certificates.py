"""Budgeted certificate searches for strong irreducibility, splicability and specification.

Over Z the searches are exact inside the window: patterns come from the
transfer graph and joint realisability is decided on globally admissible
words. Over Z^r (r >= 2) they run on patterns that are locally admissible at a
margin, refutations are reported as inconclusive, and the supports tried are
the sub-boxes of the window.
"""

import logging
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from soficlab.config import settings
from soficlab.exceptions import BudgetExceededError, InvalidParameterError, ModelMismatchError
from soficlab.models.group import FiniteSubset
from soficlab.models.shift import CheckResult, Coord, Pattern, Subshift
from soficlab.services.shift_space import lattice_patterns, transfer_graph
from soficlab.workers.pool import parallel_map

logger = logging.getLogger(__name__)

MAX_LINE_BUDGET = 14

Cells = Tuple[Coord, ...]


def _check_delta(subshift: Subshift, delta: FiniteSubset, budget: int) -> None:
    if delta.model != subshift.group:
        raise ModelMismatchError("gap set and subshift live over different groups")
    if subshift.group.identity() not in delta:
        raise InvalidParameterError(f"gap set {delta.describe()} must contain the identity")
    if budget < 1:
        raise InvalidParameterError(f"window budget must be positive, got {budget}")


def _add(a: Coord, b: Coord) -> Coord:
    return tuple(x + y for x, y in zip(a, b))


class _Window:
    """Cells of the search window with the admissible patterns on it."""

    def __init__(self, subshift: Subshift, lo: Coord, hi: Coord, margin: int):
        self.subshift = subshift
        self.cells: List[Coord] = list(product(*(range(a, b + 1) for a, b in zip(lo, hi))))
        self.position = {c: i for i, c in enumerate(self.cells)}
        self.exact = subshift.rank == 1
        if self.exact:
            self.words = transfer_graph(subshift).words(hi[0] - lo[0] + 1)
        else:
            self.words = lattice_patterns(subshift, lo, hi, margin)
        self.cell_set = set(self.cells)

    def project(self, word: Sequence[int], cells: Iterable[Coord]) -> Tuple[int, ...]:
        return tuple(word[self.position[c]] for c in cells)

    def jointly_realised(self, constraints: Dict[Coord, int]) -> bool:
        items = [(self.position[c], v) for c, v in constraints.items()]
        return any(all(w[i] == v for i, v in items) for w in self.words)


def _supports(subshift: Subshift, lo: Coord, hi: Coord) -> Iterable[Cells]:
    """All subsets of a line window, or all sub-boxes of a lattice window."""
    cells = list(product(*(range(a, b + 1) for a, b in zip(lo, hi))))
    if subshift.rank == 1:
        if len(cells) > MAX_LINE_BUDGET:
            raise BudgetExceededError("certificates", f"window of {len(cells)} cells exceeds {MAX_LINE_BUDGET}")
        for mask in range(1, 2 ** len(cells)):
            yield tuple(c for i, c in enumerate(cells) if mask >> i & 1)
        return
    axes = [[(a, b) for a in range(l, h + 1) for b in range(a, h + 1)] for l, h in zip(lo, hi)]
    for bounds in product(*axes):
        yield tuple(product(*(range(a, b + 1) for a, b in bounds)))


def _pattern(subshift: Subshift, cells: Sequence[Coord], values: Sequence[int]) -> Pattern:
    order = sorted(range(len(cells)), key=lambda i: cells[i])
    support = FiniteSubset.of(subshift.group, [cells[i] for i in order])
    return Pattern(support=support, symbols=tuple(values[i] for i in order))


def _minimise(window: _Window, first: Dict[Coord, int], second: Dict[Coord, int]):
    """Drop cells from a non-extendable pair while it stays non-extendable."""
    changed = True
    while changed:
        changed = False
        for side, other in ((first, second), (second, first)):
            for cell in sorted(side):
                if len(side) == 1:
                    break
                value = side.pop(cell)
                if window.jointly_realised({**side, **other}):
                    side[cell] = value
                else:
                    changed = True
    return first, second


def check_strong_irreducibility(subshift: Subshift, delta: FiniteSubset, window_budget: int,
                                margin: Optional[int] = None) -> CheckResult:
    """Search for patterns p1 on A1, p2 on A2 with A1*Delta disjoint from A2 and no common extension."""
    _check_delta(subshift, delta, window_budget)
    margin = settings.LATTICE_MARGIN if margin is None else margin
    r = subshift.rank
    lo, hi = (0,) * r, (window_budget - 1,) * r
    window = _Window(subshift, lo, hi, margin)
    steps = delta.payloads
    logger.info(
        f"Strong irreducibility search on {subshift.label()}: Delta={delta.describe()}, "
        f"budget {window_budget}, {len(window.words)} window patterns"
    )
    pairs: Set[Tuple[Cells, Cells]] = set()
    for a1 in _supports(subshift, lo, hi):
        blocked = {_add(a, s) for a in a1 for s in steps}
        a2 = tuple(c for c in window.cells if c not in blocked)
        if not a2:
            continue
        a2_set = set(a2)
        closure = tuple(c for c in window.cells if all(_add(c, s) not in a2_set for s in steps))
        pairs.add((closure, a2))

    if not pairs:
        return CheckResult(
            property_name="strong_irreducibility", outcome="inconclusive", delta=delta, budget=window_budget,
            exact=window.exact, margin=None if window.exact else margin,
            detail="no pair of Delta-separated supports fits in the window",
        )

    def verdict(pair: Tuple[Cells, Cells]):
        a1, a2 = pair
        joint = {(window.project(w, a1), window.project(w, a2)) for w in window.words}
        left = sorted({j[0] for j in joint})
        right = sorted({j[1] for j in joint})
        if len(joint) == len(left) * len(right):
            return None
        for p1 in left:
            for p2 in right:
                if (p1, p2) not in joint:
                    return a1, a2, p1, p2
        return None

    ordered = sorted(pairs)
    for found in parallel_map(verdict, ordered):
        if found is None:
            continue
        a1, a2, p1, p2 = found
        first, second = _minimise(window, dict(zip(a1, p1)), dict(zip(a2, p2)))
        counterexample = (
            _pattern(subshift, list(first), list(first.values())),
            _pattern(subshift, list(second), list(second.values())),
        )
        alphabet = subshift.alphabet
        detail = f"no common extension of {counterexample[0].describe(alphabet)} and {counterexample[1].describe(alphabet)}"
        outcome = "refuted" if window.exact else "inconclusive"
        if not window.exact:
            detail += f" among patterns locally admissible at margin {margin}"
        logger.info(f"Strong irreducibility {outcome}: {detail}")
        return CheckResult(
            property_name="strong_irreducibility", outcome=outcome, delta=delta, budget=window_budget,
            exact=window.exact, margin=None if window.exact else margin, cases_checked=len(ordered),
            counterexample=counterexample, detail=detail,
        )
    logger.info(f"Strong irreducibility certified on {len(ordered)} maximal support pairs")
    return CheckResult(
        property_name="strong_irreducibility", outcome="certified", delta=delta, budget=window_budget,
        exact=window.exact, margin=None if window.exact else margin, cases_checked=len(ordered),
    )


def check_splicable(subshift: Subshift, delta: FiniteSubset, window_budget: int,
                    margin: Optional[int] = None) -> CheckResult:
    """Splice x on A with y elsewhere whenever x, y agree on A*Delta minus A, and test admissibility."""
    _check_delta(subshift, delta, window_budget)
    margin = settings.LATTICE_MARGIN if margin is None else margin
    r = subshift.rank
    offsets = subshift.offsets
    steps = delta.payloads
    o_lo, o_hi = subshift.memory.bounds()
    reach = [b - a for a, b in zip(o_lo, o_hi)]
    if r == 1:
        low = min(min(s[0] for s in steps), -reach[0])
        high = window_budget - 1 + max(max(s[0] for s in steps), reach[0])
        window = _Window(subshift, (low,), (high,), margin)
        candidates = _supports(subshift, (0,), (window_budget - 1,))
    else:
        lo, hi = (0,) * r, (window_budget - 1,) * r
        window = _Window(subshift, lo, hi, margin)
        candidates = _supports(subshift, lo, hi)
    allowed = subshift.admissible_set
    checked = 0
    fitted = 0
    for a in candidates:
        a_set = set(a)
        collar = sorted({_add(c, s) for c in a for s in steps} - a_set)
        translates = sorted({tuple(x - y for x, y in zip(c, o)) for c in a for o in offsets})
        touched = {_add(t, o) for t in translates for o in offsets}
        rest = sorted(touched - a_set - set(collar))
        if not (set(collar) | touched) <= window.cell_set:
            continue
        fitted += 1
        inside: Dict[Tuple[int, ...], Set[Tuple[int, ...]]] = {}
        outside: Dict[Tuple[int, ...], Set[Tuple[int, ...]]] = {}
        for w in window.words:
            key = window.project(w, collar)
            inside.setdefault(key, set()).add(window.project(w, a))
            outside.setdefault(key, set()).add(window.project(w, rest))
        for key in sorted(inside):
            if key not in outside:
                continue
            for x_part in sorted(inside[key]):
                for y_part in sorted(outside[key]):
                    checked += 1
                    z = dict(zip(a, x_part))
                    z.update(zip(collar, key))
                    z.update(zip(rest, y_part))
                    if all(tuple(z[_add(t, o)] for o in offsets) in allowed for t in translates):
                        continue
                    x_pattern = _pattern(subshift, list(a) + collar, list(x_part) + list(key))
                    y_pattern = _pattern(subshift, collar + rest, list(key) + list(y_part))
                    outcome = "refuted" if window.exact else "inconclusive"
                    detail = (
                        f"splicing {x_pattern.describe(subshift.alphabet)} into "
                        f"{y_pattern.describe(subshift.alphabet)} along A of size {len(a)} is inadmissible"
                    )
                    logger.info(f"Splicability {outcome}: {detail}")
                    return CheckResult(
                        property_name="splicable", outcome=outcome, delta=delta, budget=window_budget,
                        exact=window.exact, margin=None if window.exact else margin, cases_checked=checked,
                        counterexample=(x_pattern, y_pattern), detail=detail,
                    )
    if not fitted:
        return CheckResult(
            property_name="splicable", outcome="inconclusive", delta=delta, budget=window_budget,
            exact=window.exact, margin=None if window.exact else margin,
            detail="no support with its collar fits in the window",
        )
    logger.info(f"Splicability certified: {fitted} supports, {checked} splices")
    return CheckResult(
        property_name="splicable", outcome="certified", delta=delta, budget=window_budget,
        exact=window.exact, margin=None if window.exact else margin, cases_checked=checked,
    )


def check_specification(subshift: Subshift, delta: FiniteSubset, supports: Sequence[FiniteSubset],
                        margin: Optional[int] = None) -> CheckResult:
    """Joint realisability of patterns on several pairwise Delta-separated supports."""
    if not supports:
        raise InvalidParameterError("at least one support is needed")
    margin = settings.LATTICE_MARGIN if margin is None else margin
    steps = delta.payloads
    cell_lists = [s.payloads for s in supports]
    for i, a in enumerate(cell_lists):
        grown = {_add(c, s) for c in a for s in steps}
        for j, b in enumerate(cell_lists):
            if i != j and grown & set(b):
                raise InvalidParameterError(f"supports {i} and {j} are not Delta-separated")
    every = [c for cells in cell_lists for c in cells]
    lo = tuple(min(c[k] for c in every) for k in range(subshift.rank))
    hi = tuple(max(c[k] for c in every) for k in range(subshift.rank))
    _check_delta(subshift, delta, max(b - a + 1 for a, b in zip(lo, hi)))
    window = _Window(subshift, lo, hi, margin)
    joint = {tuple(window.project(w, cells) for cells in cell_lists) for w in window.words}
    marginals = [sorted({j[k] for j in joint}) for k in range(len(cell_lists))]
    expected = 1
    for m in marginals:
        expected *= len(m)
    if len(joint) == expected:
        return CheckResult(
            property_name="specification", outcome="certified", delta=delta, budget=len(window.cells),
            exact=window.exact, margin=None if window.exact else margin, cases_checked=expected,
        )
    for combo in product(*marginals):
        if combo not in joint:
            patterns = tuple(_pattern(subshift, list(cells), list(vals)) for cells, vals in zip(cell_lists, combo))
            return CheckResult(
                property_name="specification", outcome="refuted" if window.exact else "inconclusive",
                delta=delta, budget=len(window.cells), exact=window.exact,
                margin=None if window.exact else margin, cases_checked=expected, counterexample=patterns,
                detail="patterns on separated supports without a common extension",
            )
    raise AssertionError("unreachable")


class CertificateChecker:
    """Runs the certificate searches at one window budget and lattice margin."""

    PROPERTIES = ("both", "irreducibility", "splicable")

    def __init__(self, window_budget: int = 8, margin: Optional[int] = None):
        self.window_budget = window_budget
        self.margin = settings.LATTICE_MARGIN if margin is None else margin

    def check(self, subshift: Subshift, delta: FiniteSubset, wanted: str = "both") -> List[CheckResult]:
        if wanted not in self.PROPERTIES:
            raise InvalidParameterError(f"property must be irreducibility, splicable or both, got {wanted!r}")
        results = []
        if wanted in ("both", "irreducibility"):
            results.append(check_strong_irreducibility(subshift, delta, self.window_budget, margin=self.margin))
        if wanted in ("both", "splicable"):
            results.append(check_splicable(subshift, delta, self.window_budget, margin=self.margin))
        return results
