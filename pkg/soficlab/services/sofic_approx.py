"""Explicit sofic approximations and their quality at finite scale.

Lattices get exact actions (cyclic shifts of Z/dZ, translations of the torus
(Z/dZ)^r). Free groups get random permutations for the generators, extended
multiplicatively over a ball of reduced words.
"""

import logging
from fractions import Fraction
from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np

from soficlab.config import settings
from soficlab.exceptions import InvalidParameterError, SizeMismatchError, SupportError, UnsupportedGroupError
from soficlab.models.group import FiniteSubset, GroupElement, GroupModel
from soficlab.models.sofic import QualityReport, SoficApproximation
from soficlab.services.group_model import ball, box
from soficlab.workers.pool import parallel_map

logger = logging.getLogger(__name__)

FREE_SUPPORT_RADIUS = 3


def hamming_distance(sigma: Sequence[int], tau: Sequence[int]) -> Fraction:
    """(1/d) |{a : sigma(a) != tau(a)}|."""
    sigma, tau = np.asarray(sigma), np.asarray(tau)
    if sigma.shape != tau.shape:
        raise SizeMismatchError(f"permutations of [{sigma.size}] and [{tau.size}] cannot be compared")
    if sigma.size == 0:
        raise SizeMismatchError("permutations of the empty set have no Hamming distance")
    return Fraction(int(np.count_nonzero(sigma != tau)), int(sigma.size))


def cyclic_approximation(d: int, support_radius: Optional[int] = None) -> SoficApproximation:
    """sigma(k)(a) = a + k mod d on the support {-R, ..., R}."""
    if d < 1:
        raise InvalidParameterError(f"approximation size must be positive, got {d}")
    radius = settings.SUPPORT_RADIUS if support_radius is None else support_radius
    group = GroupModel.lattice(1)
    support = ball(group, radius + 1)
    points = np.arange(d)
    table = tuple(tuple(((points + g.payload[0]) % d).tolist()) for g in support.elements)
    return SoficApproximation(group=group, d=d, construction="cyclic", support=support, table=table)


def torus_approximation(d: int, rank: int, support_radius: Optional[int] = None) -> SoficApproximation:
    """Translations of (Z/dZ)^r acting on [d^r], points numbered in row-major order."""
    if d < 1:
        raise InvalidParameterError(f"approximation size must be positive, got {d}")
    radius = settings.SUPPORT_RADIUS if support_radius is None else support_radius
    group = GroupModel.lattice(rank)
    support = box(group, (-radius,) * rank, (radius,) * rank)
    shape = (d,) * rank
    grid = np.indices(shape).reshape(rank, -1)
    table = []
    for g in support.elements:
        moved = (grid + np.asarray(g.payload).reshape(rank, 1)) % d
        table.append(tuple(np.ravel_multi_index(tuple(moved), shape).tolist()))
    return SoficApproximation(group=group, d=d ** rank, construction="torus", support=support, table=tuple(table))


def word_extension_random(k: int, d: int, seed: Optional[int] = None,
                          support_radius: Optional[int] = None) -> SoficApproximation:
    """Seeded uniform permutations for the generators of F_k, multiplied out along reduced words.

    Defects vanish on the support because sigma(st) is built as sigma(s)sigma(t).
    """
    if d < 2:
        raise InvalidParameterError(f"random approximations need d >= 2, got {d}")
    seed = settings.SEED if seed is None else seed
    radius = FREE_SUPPORT_RADIUS if support_radius is None else support_radius
    group = GroupModel.free(k)
    rng = np.random.default_rng(seed)
    letters = {}
    for i in range(1, k + 1):
        perm = rng.permutation(d)
        letters[i] = perm
        letters[-i] = np.argsort(perm)
    support = ball(group, radius + 1)
    perms = {(): np.arange(d)}
    # Shorter words come first in the ball, so every suffix is already built.
    for g in support.elements:
        word = g.payload
        if word:
            perms[word] = letters[word[0]][perms[word[1:]]]
    table = tuple(tuple(perms[g.payload].tolist()) for g in support.elements)
    logger.debug(f"Random approximation of free:{k}: d={d}, seed={seed}, {len(support)} support words")
    return SoficApproximation(
        group=group, d=d, construction="word-extension-random", seed=seed, support=support, table=table
    )


def build_approximation(kind: str, d: int, group: GroupModel, seed: Optional[int] = None,
                        support_radius: Optional[int] = None) -> SoficApproximation:
    if kind == "cyclic":
        if group != GroupModel.lattice(1):
            raise UnsupportedGroupError("cyclic approximations act by Z")
        return cyclic_approximation(d, support_radius)
    if kind == "torus":
        if group.kind != "lattice":
            raise UnsupportedGroupError("torus approximations need a lattice")
        return torus_approximation(d, group.rank, support_radius)
    if kind == "word-extension-random":
        if group.kind != "free":
            raise UnsupportedGroupError("random word extensions need a free group")
        return word_extension_random(group.rank, d, seed, support_radius)
    raise InvalidParameterError(f"unknown approximation kind {kind!r}")


def separation(approx: SoficApproximation, s: GroupElement, t: GroupElement) -> Fraction:
    return hamming_distance(approx.permutation(s), approx.permutation(t))


def defect(approx: SoficApproximation, s: GroupElement, t: GroupElement) -> Fraction:
    """eta(sigma(st), sigma(s) sigma(t))."""
    product_perm = approx.permutation(approx.group.multiply(s, t))
    composed = approx.permutation(s)[approx.permutation(t)]
    return hamming_distance(product_perm, composed)


def quality(approx: SoficApproximation, test_set: FiniteSubset, threads: Optional[int] = None) -> QualityReport:
    if test_set.model != approx.group:
        raise InvalidParameterError("test set and approximation live over different groups")
    group = approx.group
    support = approx.support.payload_set
    for s, t in product(test_set.elements, repeat=2):
        st = group.multiply(s, t)
        if st.payload not in support:
            raise SupportError(group.format(st), f"product {group.format(st)} of the test set leaves the support")

    ordered = list(product(test_set.elements, repeat=2))
    unordered = list(combinations(test_set.elements, 2))
    defects = parallel_map(lambda p: defect(approx, *p), ordered, threads)
    separations = parallel_map(lambda p: separation(approx, *p), unordered, threads)
    report = QualityReport(
        d=approx.d,
        construction=approx.tag,
        defects=tuple((group.format(s), group.format(t), v) for (s, t), v in zip(ordered, defects)),
        separations=tuple((group.format(s), group.format(t), v) for (s, t), v in zip(unordered, separations)),
    )
    logger.info(
        f"Quality of {approx.tag} at d={approx.d}: max defect {float(report.max_defect):.6f}, "
        f"min separation {float(report.min_separation):.6f}"
    )
    return report


class ApproximationBuilder:
    """Builds approximations for one group and measures them on a test ball."""

    def __init__(self, group: GroupModel, seed: Optional[int] = None, support_radius: Optional[int] = None,
                 threads: Optional[int] = None):
        self.group = group
        self.seed = settings.SEED if seed is None else seed
        self.support_radius = support_radius
        self.threads = threads or settings.THREADS

    def default_kind(self) -> str:
        if self.group.kind == "free":
            return "word-extension-random"
        return "cyclic" if self.group.rank == 1 else "torus"

    def default_test_set(self) -> FiniteSubset:
        return ball(self.group, 2 if self.group.kind == "free" else 3)

    def build(self, d: int, kind: Optional[str] = None) -> SoficApproximation:
        return build_approximation(kind or self.default_kind(), d, self.group, seed=self.seed,
                                   support_radius=self.support_radius)

    def measure(self, approx: SoficApproximation, test_set: Optional[FiniteSubset] = None) -> QualityReport:
        return quality(approx, test_set or self.default_test_set(), threads=self.threads)
