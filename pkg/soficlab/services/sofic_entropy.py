"""Microstate spaces, separated counts and sofic entropy estimates.

Spaces are seeded from periodic lifts phi_x(a) = a.x, which intertwine the
cyclic or torus approximation with the shift exactly. Counting distances are
exact dyadic rationals; only the final logarithm is floating point.
"""

import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from soficlab.config import settings
from soficlab.exceptions import (
    BudgetExceededError,
    CertificateViolation,
    ContainmentError,
    ModelMismatchError,
    PeriodMismatchError,
    PreconditionError,
    SizeMismatchError,
    UnsupportedGroupError,
)
from soficlab.models.entropy import (
    ConfigurationDictionary,
    EntropyEstimate,
    EntropyParams,
    EntropyTraceRow,
    GapReport,
    Microstate,
    MicrostateSpace,
    as_fraction,
)
from soficlab.models.group import FiniteSubset
from soficlab.models.shift import Configuration, Subshift
from soficlab.models.sofic import SoficApproximation
from soficlab.services.configurations import config_distance, contains, shift_apply
from soficlab.services.group_model import ball
from soficlab.services.shift_space import pattern_complexity_bound, periodic_words, transfer_graph
from soficlab.services.sofic_approx import cyclic_approximation, torus_approximation

logger = logging.getLogger(__name__)


# -- lattice bookkeeping -----------------------------------------------------

def _side(approx: SoficApproximation) -> int:
    rank = approx.group.rank
    side = int(round(approx.d ** (1.0 / rank)))
    if side ** rank != approx.d:
        raise SizeMismatchError(f"approximation on [{approx.d}] is not a torus of rank {rank}")
    return side


def _torus_tables(side: int, rank: int) -> Tuple[np.ndarray, np.ndarray]:
    """plus[a, b] = a + b and minus[a, c] = c - a on the torus, points in row-major order."""
    shape = (side,) * rank
    grid = np.indices(shape).reshape(rank, -1)
    total = grid[:, :, None] + grid[:, None, :]
    plus = np.ravel_multi_index(tuple(total % side), shape)
    diff = grid[:, None, :] - grid[:, :, None]
    minus = np.ravel_multi_index(tuple(diff % side), shape)
    return plus, minus


def _approximation_for(subshift: Subshift, d: int) -> SoficApproximation:
    if subshift.rank == 1:
        return cyclic_approximation(d)
    return torus_approximation(d, subshift.rank)


def default_params(subshift: Subshift, d: int, delta=None, epsilon=None) -> EntropyParams:
    """F = Omega_2 on the cyclic (Z) or torus (Z^r) approximation of side d."""
    return EntropyParams(
        F=ball(subshift.group, 2),
        delta=as_fraction(delta if delta is not None else settings.DEFAULT_DELTA),
        epsilon=as_fraction(epsilon if epsilon is not None else settings.DEFAULT_EPSILON),
        approximation=_approximation_for(subshift, d),
    )


# -- distances ---------------------------------------------------------------

class _DistanceCache:
    """Memoised rho between dictionary entries."""

    def __init__(self, dictionary: ConfigurationDictionary):
        self.dictionary = dictionary
        side, rank = dictionary.side, dictionary.rank
        coords = np.indices((side,) * rank).reshape(rank, -1)
        self.cell_norm = np.minimum(coords, side - coords).max(axis=0)
        self._cache: Dict[Tuple[int, int], Fraction] = {}

    def __call__(self, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        key = (i, j) if i < j else (j, i)
        value = self._cache.get(key)
        if value is None:
            value = self._cache[key] = self._compute(i, j)
        return value

    def _compute(self, i: int, j: int) -> Fraction:
        dictionary = self.dictionary
        if dictionary.is_word(i) and dictionary.is_word(j):
            differ = np.asarray(dictionary.word(i)) != np.asarray(dictionary.word(j))
            return Fraction(1, 2 ** int(self.cell_norm[differ].min()))
        return config_distance(dictionary.configuration(i), dictionary.configuration(j))


def _distance(dictionary: ConfigurationDictionary) -> _DistanceCache:
    if dictionary.distance_cache is None:
        dictionary.distance_cache = _DistanceCache(dictionary)
    return dictionary.distance_cache


def _check_pair(phi: Microstate, psi: Microstate) -> None:
    if phi.d != psi.d:
        raise SizeMismatchError(f"microstates on [{phi.d}] and [{psi.d}]")
    if phi.dictionary is not psi.dictionary:
        raise ModelMismatchError("microstates must share a configuration dictionary")


def map_distance_inf(phi: Microstate, psi: Microstate) -> Fraction:
    """rho_inf(phi, psi) = max_a rho(phi(a), psi(a))."""
    _check_pair(phi, psi)
    rho = _distance(phi.dictionary)
    return max(rho(i, j) for i, j in zip(phi.assignment, psi.assignment))


def map_distance_2(phi: Microstate, psi: Microstate) -> float:
    """rho_2(phi, psi) = ((1/d) sum_a rho(phi(a), psi(a))^2)^(1/2)."""
    _check_pair(phi, psi)
    rho = _distance(phi.dictionary)
    total = sum(rho(i, j) ** 2 for i, j in zip(phi.assignment, psi.assignment))
    return math.sqrt(total / phi.d)


# -- good maps ---------------------------------------------------------------

def _defects(phi: Microstate, s, approx: SoficApproximation) -> List[Fraction]:
    """rho(phi(sigma_s a), s.phi(a)) for every a in [d]."""
    perm = approx.permutation(s)
    out = []
    for a in range(phi.d):
        out.append(config_distance(phi.point(int(perm[a])), shift_apply(s, phi.point(a))))
    return out


def is_good_map(phi: Microstate, params: EntropyParams) -> bool:
    """sum_a rho(phi(sigma_s a), s.phi(a))^2 < d delta^2 for every s in F."""
    approx = params.approximation
    if phi.d != approx.d:
        raise SizeMismatchError(f"microstate on [{phi.d}] against an approximation on [{approx.d}]")
    bound = phi.d * params.delta ** 2
    for s in params.F.elements:
        if sum(v ** 2 for v in _defects(phi, s, approx)) >= bound:
            return False
    return True


def good_coordinate_set(phi: Microstate, K: FiniteSubset, delta, approx: SoficApproximation) -> List[int]:
    """W_phi = {a : rho(phi(sigma_s a), s.phi(a)) < delta^(1/2) for all s in K}, with |W_phi| >= d(1 - |K| delta)."""
    delta = as_fraction(delta)
    params = EntropyParams(F=K, delta=delta, approximation=approx)
    if not is_good_map(phi, params):
        raise PreconditionError(f"microstate is not in Map(X, rho, K, {delta}, sigma)")
    good = set(range(phi.d))
    for s in K.elements:
        for a, v in enumerate(_defects(phi, s, approx)):
            if v ** 2 >= delta:
                good.discard(a)
    if len(good) < phi.d * (1 - len(K) * delta):
        raise CertificateViolation(
            f"|W_phi| = {len(good)} < d(1 - |K| delta) = {float(phi.d * (1 - len(K) * delta)):.6f}"
        )
    return sorted(good)


# -- microstate spaces -------------------------------------------------------

def periodic_lift(x: Configuration, approx: SoficApproximation,
                  dictionary: Optional[ConfigurationDictionary] = None) -> Microstate:
    """phi_x(a) = a.x, for a point x fixed by the index-d lattice."""
    side = _side(approx)
    rank = approx.group.rank
    if x.rank != rank:
        raise ModelMismatchError(f"rank-{x.rank} point lifted to a rank-{rank} approximation")
    if not x.is_periodic or any(side % p for p in x.periods):
        raise PeriodMismatchError(f"{x.describe()} is not fixed by the sublattice of side {side}")
    if dictionary is None:
        dictionary = ConfigurationDictionary(rank, side)
    plus, minus = _torus_tables(side, rank)
    word = np.asarray([x.background_at(h) for h in np.ndindex(*(side,) * rank)])
    assignment = tuple(dictionary.word_id(tuple(row)) for row in word[minus].tolist())
    return Microstate(d=approx.d, assignment=assignment, dictionary=dictionary)


def _perturbations(subshift: Subshift, space: MicrostateSpace) -> List[Microstate]:
    """Single-cell edits of phi(0) at radius R = ceil(log2(1/delta)) + 2 that stay in X and stay good."""
    params = space.params
    radius = math.ceil(math.log2(1 / params.delta)) + 2
    cell = (radius,) + (0,) * (subshift.rank - 1)
    added: List[Microstate] = []
    examined = 0
    for phi in list(space.members):
        if examined >= settings.PERTURBATION_BUDGET:
            break
        base = phi.point(0)
        kept = 0
        for symbol in range(len(subshift.alphabet)):
            if symbol == base.value_at(cell) or kept >= settings.PERTURBATIONS_PER_LIFT:
                continue
            if examined >= settings.PERTURBATION_BUDGET:
                break
            examined += 1
            edited = Configuration(
                rank=base.rank, periods=base.periods, cells=base.cells, override=base.override + ((cell, symbol),)
            )
            if not contains(subshift, edited):
                continue
            candidate = phi.with_point(0, space.dictionary.config_id(edited))
            if is_good_map(candidate, params):
                added.append(candidate)
                kept += 1
    logger.debug(f"Perturbation pass: {examined} edits examined at radius {radius}, {len(added)} kept")
    return added


def lift_space(subshift: Subshift, params: EntropyParams, perturb: bool = False) -> MicrostateSpace:
    """All periodic lifts for the approximation's lattice, optionally followed by the perturbation pass.

    Lifts of the points in one shift orbit are rotations of each other, so
    each orbit's index list is computed once and permuted.
    """
    approx = params.approximation
    if approx.group != subshift.group:
        raise ModelMismatchError("approximation and subshift live over different groups")
    side = _side(approx)
    rank = subshift.rank
    words = periodic_words(subshift, side)
    dictionary = ConfigurationDictionary(rank, side)
    dictionary.register_words(words)
    plus, minus = _torus_tables(side, rank)
    assignments: Dict[int, Tuple[int, ...]] = {}
    for idx, word in enumerate(words):
        if idx in assignments:
            continue
        rotations = np.asarray(word)[minus]
        base = np.asarray([dictionary.word_id(tuple(row)) for row in rotations.tolist()])
        for b in range(approx.d):
            member = int(base[b])
            if member not in assignments:
                assignments[member] = tuple(base[plus[:, b]].tolist())
    members = [Microstate(d=approx.d, assignment=assignments[i], dictionary=dictionary) for i in range(len(words))]
    space = MicrostateSpace(params=params, dictionary=dictionary, members=members, lifts_only=True)
    if perturb and members:
        extra = _perturbations(subshift, space)
        space.members.extend(extra)
        space.perturbed = len(extra)
        space.lifts_only = not extra
    logger.debug(f"Microstate space for {subshift.label()} at d={approx.d}: {len(words)} lifts, {space.perturbed} perturbed")
    return space


# -- separated counts --------------------------------------------------------

def _closeness_graph(members: Sequence[Microstate], epsilon: Fraction) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(members)))
    buckets: Dict[Tuple[int, ...], List[int]] = {}
    if members:
        dictionary = members[0].dictionary
        for i, phi in enumerate(members):
            signature = tuple(dictionary.origin_symbol(p) for p in phi.assignment)
            buckets.setdefault(signature, []).append(i)
    # Maps whose origin symbols differ somewhere are at rho_inf-distance 1.
    for group in buckets.values():
        for k, i in enumerate(group):
            for j in group[k + 1:]:
                if map_distance_inf(members[i], members[j]) < epsilon:
                    graph.add_edge(i, j)
    return graph


def count_separated(space: MicrostateSpace, epsilon, mode: str = "auto") -> int:
    """Size of a (rho_inf, epsilon)-separated family: maximal (greedy) or maximum (exact)."""
    if mode not in ("auto", "greedy", "exact"):
        raise PreconditionError(f"unknown counting mode {mode!r}")
    epsilon = as_fraction(epsilon)
    members = space.members
    if not members:
        return 0
    if epsilon > 1:
        return 1
    if space.lifts_only:
        return len({phi.assignment for phi in members})
    graph = _closeness_graph(members, epsilon)
    if mode == "greedy":
        return len(nx.maximal_independent_set(graph, seed=settings.SEED))
    total = 0
    for comp in nx.connected_components(graph):
        if len(comp) == 1:
            total += 1
            continue
        sub = graph.subgraph(comp)
        if len(comp) > settings.EXACT_COUNT_BUDGET:
            if mode == "exact":
                raise BudgetExceededError(
                    "sofic_entropy",
                    f"closeness component of {len(comp)} maps exceeds the exact budget of "
                    f"{settings.EXACT_COUNT_BUDGET}; use greedy counting",
                )
            total += len(nx.maximal_independent_set(sub, seed=settings.SEED))
            continue
        clique, _ = nx.max_weight_clique(nx.complement(sub), weight=None)
        total += len(clique)
    return total


# -- entropy -----------------------------------------------------------------

def transfer_matrix_entropy(subshift: Subshift) -> float:
    """log of the Perron root of the transfer graph; -inf for the empty subshift."""
    if subshift.rank != 1:
        raise UnsupportedGroupError("transfer matrices exist for Z-SFTs only")
    graph = transfer_graph(subshift)
    if graph.is_empty:
        return float("-inf")
    low, high = graph.spectral_radius()
    if high <= 0:
        return float("-inf")
    return math.log((low + high) / 2)


def complexity_upper_bound(subshift: Subshift) -> float:
    limit = settings.COMPLEXITY_LENGTH if subshift.rank == 1 else settings.COMPLEXITY_BOX
    return min(pattern_complexity_bound(subshift, n) for n in range(1, limit + 1))


def _rate(count: int, d: int) -> float:
    return math.log(count) / d if count else float("-inf")


def estimate_entropy(subshift: Subshift, schedule: Sequence[Tuple[int, object]], epsilon=None,
                     perturb: bool = False, mode: str = "auto") -> EntropyEstimate:
    """Lower bound max_d (1/d) log N_eps over the schedule, against the complexity bound and the oracle."""
    if not schedule:
        raise PreconditionError("the entropy schedule is empty")
    epsilon = as_fraction(epsilon if epsilon is not None else settings.DEFAULT_EPSILON)
    label = subshift.label()
    logger.info(f"Step 1: Counting separated microstates of {label} over {len(schedule)} sizes")
    trace = []
    for d, delta in schedule:
        params = default_params(subshift, d, delta=delta, epsilon=epsilon)
        space = lift_space(subshift, params, perturb=perturb)
        count = count_separated(space, epsilon, mode=mode)
        points = params.approximation.d
        row = EntropyTraceRow(
            d=d,
            points=points,
            microstates=len(space),
            perturbed=space.perturbed,
            separated=count,
            rate=_rate(count, points),
        )
        logger.debug(f"d={d}: {row.microstates} microstates, N_eps={count}, rate={row.rate:.9f}")
        trace.append(row)
    lower = max(row.rate for row in trace)

    logger.info(f"Step 2: Bounding {label} from above by pattern complexity")
    upper = complexity_upper_bound(subshift)
    oracle = transfer_matrix_entropy(subshift) if subshift.rank == 1 else None

    tolerance = settings.REPORT_TOLERANCE
    if lower > upper + tolerance:
        logger.warning(f"Lower bound {lower:.9f} exceeds the complexity bound {upper:.9f} for {label}")
    if oracle is not None and not (lower <= oracle + tolerance and oracle <= upper + tolerance):
        logger.warning(f"Oracle {oracle:.9f} falls outside [{lower:.9f}, {upper:.9f}] for {label}")
    logger.info(f"Entropy of {label}: lower {lower:.9f}, upper {upper:.9f}")
    return EntropyEstimate(
        subshift=label, epsilon=str(epsilon), lower=lower, upper=upper, exact_oracle=oracle, trace=trace
    )


def entropy_plateau(subshift: Subshift, d: int, epsilons: Sequence[object], perturb: bool = False,
                    delta=None) -> List[Tuple[Fraction, int, float]]:
    """(epsilon, N_eps, (1/d) log N_eps) on one microstate space for several epsilons."""
    params = default_params(subshift, d, delta=delta)
    space = lift_space(subshift, params, perturb=perturb)
    out = []
    for eps in epsilons:
        eps = as_fraction(eps)
        count = count_separated(space, eps)
        out.append((eps, count, _rate(count, params.approximation.d)))
    return out


def _window_ok(subshift: Subshift, word: Sequence[int]) -> bool:
    low = subshift.memory.bounds()[0][0]
    rel = [o[0] - low for o in subshift.offsets]
    allowed = subshift.admissible_set
    span = subshift.span[0]
    return all(tuple(word[i + o] for o in rel) in allowed for i in range(len(word) - span + 1))


def proper_subsystem_witness(x_shift: Subshift, y_shift: Subshift) -> Configuration:
    """Check Y is a proper subsystem of X and return a point of X outside Y."""
    if x_shift.rank != 1 or y_shift.rank != 1:
        raise UnsupportedGroupError("containment is decided over Z only")
    if y_shift.alphabet.symbols != x_shift.alphabet.symbols:
        raise ModelMismatchError(
            f"X and Y must share one alphabet, got {x_shift.alphabet.symbols} and {y_shift.alphabet.symbols}"
        )
    y_graph = transfer_graph(y_shift)
    for word in y_graph.words(x_shift.span[0]):
        if not _window_ok(x_shift, word):
            raise ContainmentError(f"{y_shift.label()} admits {word}, which {x_shift.label()} forbids")
    x_graph = transfer_graph(x_shift)
    for word in x_graph.words(y_shift.span[0]):
        if not _window_ok(y_shift, word):
            witness = x_graph.point_through(word)
            if not contains(x_shift, witness) or contains(y_shift, witness):
                raise CertificateViolation(f"containment witness {witness.describe()} failed re-verification")
            return witness
    raise ContainmentError(f"{y_shift.label()} is not a proper subsystem of {x_shift.label()}")


def entropy_gap_experiment(x_shift: Subshift, y_shift: Subshift, schedule: Sequence[Tuple[int, object]],
                           epsilon=None, margin: Optional[float] = None) -> GapReport:
    """Estimate both entropies on one schedule; strict gap iff lower(X) > upper(Y) + margin."""
    margin = settings.GAP_MARGIN if margin is None else margin
    logger.info(f"Step 1: Verifying {y_shift.label()} is a proper subsystem of {x_shift.label()}")
    witness = proper_subsystem_witness(x_shift, y_shift)
    logger.info(f"Step 2: Estimating entropy of {x_shift.label()}")
    ex = estimate_entropy(x_shift, schedule, epsilon)
    logger.info(f"Step 3: Estimating entropy of {y_shift.label()}")
    ey = estimate_entropy(y_shift, schedule, epsilon)
    report = GapReport(
        x=x_shift.label(),
        y=y_shift.label(),
        lower_x=ex.lower,
        upper_y=ey.upper,
        oracle_x=ex.exact_oracle,
        oracle_y=ey.exact_oracle,
        margin=margin,
        strict_gap=ex.lower > ey.upper + margin,
        witness=witness.describe(x_shift.alphabet),
    )
    logger.info(f"Gap {x_shift.label()} vs {y_shift.label()}: {report.lower_x:.9f} vs {report.upper_y:.9f} ({report.verdict})")
    return report


class EntropyEstimator:
    """Entropy estimates at one separation scale and good-map tolerance.

    Unset parameters fall back to DEFAULT_EPSILON and DEFAULT_DELTA from settings.
    """

    MODES = ("auto", "greedy", "exact")

    def __init__(self, epsilon=None, delta=None, mode: str = "auto", perturb: bool = False):
        if mode not in self.MODES:
            raise PreconditionError(f"unknown counting mode {mode!r}")
        self.epsilon = as_fraction(epsilon if epsilon is not None else settings.DEFAULT_EPSILON)
        self.delta = as_fraction(delta if delta is not None else settings.DEFAULT_DELTA)
        self.mode = mode
        self.perturb = perturb

    def schedule(self, ds: Sequence[int]) -> List[Tuple[int, Fraction]]:
        return [(d, self.delta) for d in ds]

    def estimate(self, subshift: Subshift, ds: Sequence[int]) -> EntropyEstimate:
        return estimate_entropy(subshift, self.schedule(ds), self.epsilon, perturb=self.perturb, mode=self.mode)

    def plateau(self, subshift: Subshift, d: int, epsilons: Sequence[object]) -> List[Tuple[Fraction, int, float]]:
        return entropy_plateau(subshift, d, epsilons, perturb=self.perturb, delta=self.delta)

    def gap(self, x_shift: Subshift, y_shift: Subshift, ds: Sequence[int],
            margin: Optional[float] = None) -> GapReport:
        return entropy_gap_experiment(x_shift, y_shift, self.schedule(ds), self.epsilon, margin=margin)
