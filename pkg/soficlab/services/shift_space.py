import logging
import math
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from soficlab.config import settings
from soficlab.exceptions import (
    BudgetExceededError,
    CertificateViolation,
    InvalidParameterError,
    ModelMismatchError,
    UnsupportedWindowError,
)
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.models.shift import (
    Alphabet,
    Configuration,
    Coord,
    ExpansivityCertificate,
    PatternEnumeration,
    Subshift,
    dyadic_level,
)
from soficlab.services.group_model import ball, box
from soficlab.services.transfer_graph import TransferGraph

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


# -- builders --------------------------------------------------------------

def full_shift(alphabet=2, group: Optional[GroupModel] = None) -> Subshift:
    if isinstance(alphabet, int):
        alphabet = Alphabet(symbols=tuple(str(i) for i in range(alphabet)))
    group = group or GroupModel.lattice(1)
    memory = FiniteSubset(model=group, elements=[group.identity()])
    return Subshift(
        name=f"full-shift:k={len(alphabet)}",
        alphabet=alphabet,
        group=group,
        memory=memory,
        admissible=[(a,) for a in range(len(alphabet))],
    )


def golden_mean() -> Subshift:
    z = GroupModel.lattice(1)
    return Subshift(
        name="golden-mean",
        alphabet=Alphabet.of("0", "1"),
        group=z,
        memory=FiniteSubset.of(z, [0, 1]),
        admissible=[(0, 0), (0, 1), (1, 0)],
    )


def weiss_sft() -> Subshift:
    """Points of the form ...000111222... with at most one block of 1s."""
    z = GroupModel.lattice(1)
    return Subshift(
        name="weiss",
        alphabet=Alphabet.of("0", "1", "2"),
        group=z,
        memory=FiniteSubset.of(z, [0, 1]),
        admissible=[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)],
    )


def zero_shift() -> Subshift:
    """The single point 0^inf, as the SFT over {0,1} forbidding the symbol 1."""
    z = GroupModel.lattice(1)
    return Subshift(
        name="zero",
        alphabet=Alphabet.of("0", "1"),
        group=z,
        memory=FiniteSubset.of(z, [0]),
        admissible=[(0,)],
    )


def hard_ball(group: GroupModel, forbidden_steps: FiniteSubset) -> Subshift:
    """Hard-ball model: x(g) x(g+s) = 0 for every s in F."""
    if forbidden_steps.model != group:
        raise ModelMismatchError("F must live over the model's group")
    if group.identity() in forbidden_steps:
        raise InvalidParameterError("the hard-ball model needs 1_G outside F")
    memory = FiniteSubset(model=group, elements=(group.identity(),) + forbidden_steps.elements)
    origin = memory.payloads.index(group.identity().payload)
    others = [i for i in range(len(memory)) if i != origin]
    admissible = [
        p for p in product((0, 1), repeat=len(memory))
        if not (p[origin] == 1 and any(p[i] == 1 for i in others))
    ]
    name = f"hard-ball:d={group.rank}" if forbidden_steps == unit_steps(group) else "hard-ball"
    return Subshift(name=name, alphabet=Alphabet.of("0", "1"), group=group, memory=memory, admissible=admissible)


def unit_steps(group: GroupModel) -> FiniteSubset:
    steps = [tuple(1 if i == j else 0 for i in range(group.rank)) for j in range(group.rank)]
    return FiniteSubset.of(group, steps)


def preset(name: str) -> Subshift:
    """Resolve a CLI preset such as golden-mean, weiss, zero, full-shift:k=3 or hard-ball:d=2."""
    base, _, arg = name.partition(":")
    value = None
    if arg:
        key, _, raw = arg.partition("=")
        if not raw.isdigit():
            raise InvalidParameterError(f"preset argument must look like {key}=N, got {arg!r}")
        value = int(raw)
    if base == "golden-mean":
        return golden_mean()
    if base == "weiss":
        return weiss_sft()
    if base == "zero":
        return zero_shift()
    if base == "full-shift":
        return full_shift(value or 2)
    if base == "hard-ball":
        group = GroupModel.lattice(value or 2)
        return hard_ball(group, unit_steps(group))
    raise InvalidParameterError(f"unknown preset {name!r}")


# -- lattice backtracking ----------------------------------------------------

class LatticeRegion:
    """Cells of a box or torus with the memory windows that close at each cell.

    Windows are listed at the position of their last cell in row-major order,
    so a left-to-right backtracking search can test each window once.
    """

    def __init__(self, subshift: Subshift, lo: Coord, hi: Coord, torus: bool = False):
        self.lo, self.hi = tuple(lo), tuple(hi)
        self.cells: List[Coord] = list(product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi))))
        self.index: Dict[Coord, int] = {c: i for i, c in enumerate(self.cells)}
        sides = [b - a + 1 for a, b in zip(self.lo, self.hi)]
        self.closing: List[List[Tuple[int, ...]]] = [[] for _ in self.cells]
        if torus:
            translates = self.cells
        else:
            o_lo, o_hi = subshift.memory.bounds()
            translates = product(*(range(a - c, b - e + 1) for a, b, e, c in zip(self.lo, self.hi, o_lo, o_hi)))
        for t in translates:
            members = []
            for o in subshift.offsets:
                c = tuple(a + b for a, b in zip(t, o))
                if torus:
                    c = tuple(lo_i + (ci - lo_i) % side for ci, lo_i, side in zip(c, self.lo, sides))
                elif c not in self.index:
                    members = None
                    break
                members.append(self.index[c])
            if members is not None:
                self.closing[max(members)].append(tuple(members))
        self.allowed = subshift.admissible_set
        self.symbols = range(len(subshift.alphabet))

    def search(self, fixed: Optional[Dict[int, int]] = None, limit: int = 0, budget: int = 0) -> List[Word]:
        fixed = fixed or {}
        n = len(self.cells)
        assign = [0] * n
        out: List[Word] = []

        def rec(i: int) -> bool:
            if i == n:
                out.append(tuple(assign))
                if budget and len(out) > budget:
                    raise BudgetExceededError("shift_space", f"more than {budget} patterns on {self.lo}..{self.hi}")
                return bool(limit) and len(out) >= limit
            choices = (fixed[i],) if i in fixed else self.symbols
            for a in choices:
                assign[i] = a
                if all(tuple(assign[j] for j in w) in self.allowed for w in self.closing[i]):
                    if rec(i + 1):
                        return True
            return False

        rec(0)
        return out


def lattice_patterns(subshift: Subshift, lo: Coord, hi: Coord, margin: int, budget: int = 0) -> List[Word]:
    """Patterns on the box [lo, hi] extending to a locally admissible pattern on the box grown by `margin`."""
    budget = budget or settings.ENUMERATION_BUDGET
    inner = LatticeRegion(subshift, lo, hi).search(budget=budget)
    if margin <= 0:
        return inner
    grown = LatticeRegion(subshift, tuple(a - margin for a in lo), tuple(b + margin for b in hi))
    inner_cells = list(product(*(range(a, b + 1) for a, b in zip(lo, hi))))
    positions = [grown.index[c] for c in inner_cells]
    kept = []
    for word in inner:
        if grown.search(fixed=dict(zip(positions, word)), limit=1):
            kept.append(word)
    return kept


# -- enumeration -------------------------------------------------------------

@lru_cache(maxsize=64)
def transfer_graph(subshift: Subshift, block_length: int = 0) -> TransferGraph:
    return TransferGraph(subshift, block_length)


def enumerate_patterns(subshift: Subshift, window: FiniteSubset, margin: Optional[int] = None) -> PatternEnumeration:
    """Globally admissible patterns on a box window (locally admissible at `margin` for rank >= 2)."""
    if window.model != subshift.group:
        raise ModelMismatchError("window and subshift live over different groups")
    if not window.is_box():
        raise UnsupportedWindowError(f"window {window.describe()} is not a lattice box")
    lo, hi = window.bounds()
    if subshift.rank == 1:
        words = transfer_graph(subshift).words(hi[0] - lo[0] + 1)
        return PatternEnumeration(window=window, words=words, exact=True)
    margin = settings.LATTICE_MARGIN if margin is None else margin
    words = lattice_patterns(subshift, lo, hi, margin)
    return PatternEnumeration(window=window, words=words, exact=False, margin=margin)


def window_box(subshift: Subshift, length: int, start: int = 0) -> FiniteSubset:
    """Cube [start, start+length-1]^r in the subshift's lattice."""
    r = subshift.rank
    return box(subshift.group, (start,) * r, (start + length - 1,) * r)


def periodic_words(subshift: Subshift, d: int, budget: int = 0) -> List[Word]:
    """Fundamental domains (row-major) of the points fixed by the index-d lattice, in lexicographic order."""
    if d < 1:
        raise InvalidParameterError(f"period must be positive, got {d}")
    region = LatticeRegion(subshift, (0,) * subshift.rank, (d - 1,) * subshift.rank, torus=True)
    return region.search(budget=budget or settings.ENUMERATION_BUDGET)


def periodic_points(subshift: Subshift, d: int) -> List[Configuration]:
    periods = (d,) * subshift.rank
    return [Configuration.periodic(periods, w) for w in periodic_words(subshift, d)]


def pattern_count(subshift: Subshift, n: int) -> int:
    if subshift.rank == 1:
        return transfer_graph(subshift).count_words(n)
    return len(lattice_patterns(subshift, (0,) * subshift.rank, (n - 1,) * subshift.rank, settings.LATTICE_MARGIN))


def pattern_complexity_bound(subshift: Subshift, n: int) -> float:
    """(1/|box|) log of the number of admissible patterns on the n-box."""
    if n < 1:
        raise InvalidParameterError(f"box size must be positive, got {n}")
    count = pattern_count(subshift, n)
    if count == 0:
        return float("-inf")
    return math.log(count) / n ** subshift.rank


def pattern_complexity_profile(subshift: Subshift, n_max: int) -> List[Tuple[int, int, float]]:
    profile = []
    for n in range(1, n_max + 1):
        count = pattern_count(subshift, n)
        rate = math.log(count) / n ** subshift.rank if count else float("-inf")
        if profile and rate > profile[-1][2] + 1e-12:
            logger.warning(f"Complexity rate of {subshift.label()} increased at n={n}: {profile[-1][2]:.9f} -> {rate:.9f}")
        profile.append((n, count, rate))
    return profile


# -- expansivity -------------------------------------------------------------

def _truncated_distance_level(p: Dict[Coord, int], q: Dict[Coord, int], g: Coord, radius: int) -> int:
    """Largest m <= radius + 1 with gx, gy agreeing on Omega_m, read from finite patterns."""
    for r in range(radius + 1):
        for h in product(range(-r, r + 1), repeat=len(g)):
            if max(abs(c) for c in h) != r:
                continue
            cell = tuple(a - b for a, b in zip(h, g))
            if p[cell] != q[cell]:
                return r
    return radius + 1


def uniform_expansivity_witness(subshift: Subshift, epsilon, verify: bool = True) -> FiniteSubset:
    """K = Omega_(n+1) for epsilon = 2^-n, checked against every pattern pair on K + Omega_(n+1)."""
    n = dyadic_level(epsilon)
    k = ball(subshift.group, n + 1)
    if not verify:
        return k
    window = window_box(subshift, 2 * (2 * n) + 1, start=-2 * n)
    patterns = enumerate_patterns(subshift, window)
    if len(patterns) ** 2 > settings.ENUMERATION_BUDGET * 10:
        raise BudgetExceededError("shift_space", f"{len(patterns)} window patterns are too many for a pairwise check")
    cells = window.payloads
    maps = [dict(zip(cells, w)) for w in patterns.words]
    checked = 0
    for p in maps:
        for q in maps:
            orbit_level = min(_truncated_distance_level(p, q, g, n) for g in k.payloads)
            if orbit_level >= 1:
                own_level = _truncated_distance_level(p, q, (0,) * subshift.rank, n)
                if own_level <= n:
                    raise CertificateViolation(
                        f"rho_K <= 1/2 but rho >= 2^-{n} on {subshift.label()} for epsilon={epsilon}"
                    )
            checked += 1
    logger.info(f"Expansivity witness for {subshift.label()}: K = Omega_{n + 1}, {checked} pattern pairs verified")
    return k


def expansivity_certificate(subshift: Subshift, levels: Sequence[int] = (0, 1, 2)) -> ExpansivityCertificate:
    for n in levels:
        uniform_expansivity_witness(subshift, Fraction(1, 2 ** n))
    return ExpansivityCertificate(group=subshift.group, constant=Fraction(1, 2), verified_levels=tuple(levels))
