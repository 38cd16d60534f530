import logging
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Iterator, Optional, Tuple

from soficlab.exceptions import CertificateViolation, InvalidParameterError, ModelMismatchError
from soficlab.models.group import FiniteSubset, GroupElement
from soficlab.models.shift import Configuration, Coord, Subshift, _box_coords, _row_major

logger = logging.getLogger(__name__)


def shift_apply(g: GroupElement, x: Configuration) -> Configuration:
    """The shift action (gx)(h) = x(h - g)."""
    v = g.payload
    if len(v) != x.rank:
        raise ModelMismatchError(f"element {v} does not act on a rank-{x.rank} configuration")
    if not any(v):
        return x
    cells = tuple(x.cells[_row_major(tuple(c - a for c, a in zip(h, v)), x.periods)] for h in _box_coords(x.periods))
    override = [(tuple(c + a for c, a in zip(coord, v)), s) for coord, s in x.override]
    right_cells = None
    if x.two_tailed:
        span = x.right_periods[0]
        right_cells = tuple(x.right_cells[(i - v[0]) % span] for i in range(span))
        lo, hi = min(0, v[0]), max(0, v[0])
        moved = {coord for coord, _ in override}
        override.extend(((h,), x.value_at((h - v[0],))) for h in range(lo, hi) if (h,) not in moved)
    return Configuration(
        rank=x.rank,
        periods=x.periods,
        cells=cells,
        right_periods=x.right_periods,
        right_cells=right_cells,
        override=override,
    )


def ring(rank: int, r: int) -> Iterator[Coord]:
    """Coordinates of sup-norm exactly r."""
    if r == 0:
        yield (0,) * rank
        return
    for h in product(range(-r, r + 1), repeat=rank):
        if max(abs(c) for c in h) == r:
            yield h


def _search_radius(x: Configuration, y: Configuration) -> int:
    period = 1
    for c in (x, y):
        for p in c.periods + (c.right_periods or ()):
            period = lcm(period, p)
    return max(x.extent(), y.extent()) + period + 1


def first_difference(x: Configuration, y: Configuration) -> Optional[Coord]:
    """A coordinate of least sup-norm where x and y differ, or None when they are equal."""
    if x.rank != y.rank:
        raise ModelMismatchError("configurations over lattices of different rank")
    if x == y:
        return None
    for r in range(_search_radius(x, y) + 1):
        for h in ring(x.rank, r):
            if x.value_at(h) != y.value_at(h):
                return h
    raise CertificateViolation(f"distinct descriptions {x.describe()} and {y.describe()} agree on the search window")


def config_distance(x: Configuration, y: Configuration) -> Fraction:
    """rho(x, y) = 2^-n where n is the largest index with x, y agreeing on Omega_n."""
    h = first_difference(x, y)
    if h is None:
        return Fraction(0)
    return Fraction(1, 2 ** max(abs(c) for c in h))


def orbit_distance(a: FiniteSubset, x: Configuration, y: Configuration) -> Fraction:
    if not a.elements:
        raise InvalidParameterError("rho_A needs a nonempty set A")
    return max(config_distance(shift_apply(g, x), shift_apply(g, y)) for g in a.elements)


def separating_element(x: Configuration, y: Configuration) -> GroupElement:
    """An element g with rho(gx, gy) = 1 for distinct x, y."""
    h = first_difference(x, y)
    if h is None:
        raise InvalidParameterError("equal configurations have no separating element")
    return GroupElement(payload=tuple(-c for c in h))


def _background_windows_ok(subshift: Subshift, periods: Coord, cells: Tuple[int, ...]) -> bool:
    allowed = subshift.admissible_set
    for t in _box_coords(periods):
        window = tuple(cells[_row_major(tuple(a + b for a, b in zip(t, o)), periods)] for o in subshift.offsets)
        if window not in allowed:
            return False
    return True


def contains(subshift: Subshift, x: Configuration) -> bool:
    """Membership test scanning every memory translate that meets a period box, the overrides or the tail split."""
    if x.rank != subshift.rank:
        raise ModelMismatchError(f"rank-{x.rank} configuration tested against {subshift.label()}")
    if x.max_symbol() >= len(subshift.alphabet) or min(x.cells) < 0:
        return False
    if not _background_windows_ok(subshift, x.periods, x.cells):
        return False
    if x.two_tailed and not _background_windows_ok(subshift, x.right_periods, x.right_cells):
        return False
    marks = [coord for coord, _ in x.override]
    if x.two_tailed:
        marks.extend([(-1,), (0,)])
    if not marks:
        return True
    lo = [min(m[i] for m in marks) for i in range(x.rank)]
    hi = [max(m[i] for m in marks) for i in range(x.rank)]
    o_lo, o_hi = subshift.memory.bounds()
    ranges = [range(lo[i] - o_hi[i], hi[i] - o_lo[i] + 1) for i in range(x.rank)]
    allowed = subshift.admissible_set
    for t in product(*ranges):
        window = tuple(x.value_at(tuple(a + b for a, b in zip(t, o))) for o in subshift.offsets)
        if window not in allowed:
            return False
    return True
