import logging
from itertools import product
from typing import List

from soficlab.exceptions import InvalidParameterError, ModelMismatchError
from soficlab.models.group import FiniteSubset, GroupElement, GroupModel

logger = logging.getLogger(__name__)


def ball(model: GroupModel, n: int) -> FiniteSubset:
    """Return Omega_n: empty for n = 0, {1_G} for n = 1, then elements of norm at most n - 1."""
    if n < 0:
        raise InvalidParameterError(f"ball radius must be nonnegative, got {n}")
    if n == 0:
        return FiniteSubset(model=model, elements=())
    radius = n - 1
    if model.kind == "lattice":
        span = range(-radius, radius + 1)
        return FiniteSubset(model=model, elements=[GroupElement(payload=p) for p in product(span, repeat=model.rank)])
    if model.kind == "cyclic":
        residues = {k % model.rank for k in range(-radius, radius + 1)}
        return FiniteSubset(model=model, elements=[GroupElement(payload=(r,)) for r in residues])
    return FiniteSubset(model=model, elements=_free_words(model, radius))


def _free_words(model: GroupModel, max_length: int) -> List[GroupElement]:
    letters = [i for g in range(1, model.rank + 1) for i in (g, -g)]
    layer = [()]
    words = [GroupElement(payload=())]
    for _ in range(max_length):
        nxt = []
        for word in layer:
            for letter in letters:
                if word and word[-1] == -letter:
                    continue
                nxt.append(word + (letter,))
        words.extend(GroupElement(payload=w) for w in nxt)
        layer = nxt
    return words


def box(model: GroupModel, lo, hi) -> FiniteSubset:
    """Lattice box [lo, hi] (inclusive, per coordinate)."""
    if model.kind != "lattice":
        raise InvalidParameterError("boxes exist only in integer lattices")
    lo, hi = tuple(lo), tuple(hi)
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    return FiniteSubset(model=model, elements=[GroupElement(payload=p) for p in product(*ranges)])


def interval(lo: int, hi: int) -> FiniteSubset:
    return box(GroupModel.lattice(1), (lo,), (hi,))


def set_product(f1: FiniteSubset, f2: FiniteSubset) -> FiniteSubset:
    if f1.model != f2.model:
        raise ModelMismatchError(
            f"cannot multiply subsets of {f1.model.declaration()} and {f2.model.declaration()}"
        )
    model = f1.model
    return FiniteSubset(model=model, elements=[model.multiply(a, b) for a in f1.elements for b in f2.elements])


def is_separated(f: FiniteSubset, v: FiniteSubset) -> bool:
    """True iff the right translates F·s, s in V, are pairwise disjoint."""
    if not f.elements:
        raise InvalidParameterError("F must be nonempty")
    if f.model != v.model:
        raise ModelMismatchError("F and V live over different group models")
    seen = set()
    for s in v.elements:
        translate = f.translate(s).payload_set
        if seen & translate:
            return False
        seen |= translate
    return True
