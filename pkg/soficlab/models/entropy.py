from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from soficlab.exceptions import InvalidParameterError, SizeMismatchError
from soficlab.models.group import FiniteSubset
from soficlab.models.shift import Configuration, Coord, _box_coords
from soficlab.models.sofic import SoficApproximation


def as_fraction(value: Any) -> Fraction:
    """Read 1/4, "1/4", "1e-3" or 0.25 as an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidParameterError(f"cannot read {value!r} as a rational number")


class ConfigurationDictionary:
    """Shared store of the points a family of microstates takes values in.

    Periodic points are kept as their expanded fundamental-domain word over the
    box of side `side` and built into Configuration objects only on demand;
    other points are stored as configurations.
    """

    def __init__(self, rank: int, side: int):
        self.rank = rank
        self.side = side
        self.periods: Coord = (side,) * rank
        self._entries: List[Union[Tuple[int, ...], Configuration]] = []
        self._ids: Dict[Any, int] = {}
        self._built: Dict[int, Configuration] = {}
        self.distance_cache = None

    def __len__(self) -> int:
        return len(self._entries)

    def word_id(self, word: Tuple[int, ...]) -> int:
        word = tuple(word)
        if len(word) != self.side ** self.rank:
            raise SizeMismatchError(f"word of length {len(word)} does not fill a box of side {self.side}")
        idx = self._ids.get(word)
        if idx is None:
            idx = self._ids[word] = len(self._entries)
            self._entries.append(word)
        return idx

    def register_words(self, words) -> None:
        for word in words:
            self.word_id(word)

    def config_id(self, config: Configuration) -> int:
        if config.is_periodic and all(self.side % p == 0 for p in config.periods):
            return self.word_id(tuple(config.background_at(h) for h in _box_coords(self.periods)))
        idx = self._ids.get(config)
        if idx is None:
            idx = self._ids[config] = len(self._entries)
            self._entries.append(config)
        return idx

    def is_word(self, idx: int) -> bool:
        return isinstance(self._entries[idx], tuple)

    def word(self, idx: int) -> Tuple[int, ...]:
        return self._entries[idx]

    def configuration(self, idx: int) -> Configuration:
        entry = self._entries[idx]
        if isinstance(entry, Configuration):
            return entry
        built = self._built.get(idx)
        if built is None:
            built = self._built[idx] = Configuration.periodic(self.periods, entry)
        return built

    def origin_symbol(self, idx: int) -> int:
        entry = self._entries[idx]
        if isinstance(entry, tuple):
            return entry[0]
        return entry.value_at((0,) * self.rank)


class Microstate(BaseModel):
    """A map phi: [d] -> X, stored as indices into a shared dictionary."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    d: int
    assignment: Tuple[int, ...]
    dictionary: ConfigurationDictionary

    @model_validator(mode="after")
    def _check_total(self) -> "Microstate":
        if len(self.assignment) != self.d:
            raise SizeMismatchError(f"microstate on [{self.d}] assigns {len(self.assignment)} points")
        if any(i < 0 or i >= len(self.dictionary) for i in self.assignment):
            raise InvalidParameterError("microstate refers to points outside its dictionary")
        return self

    def point(self, a: int) -> Configuration:
        return self.dictionary.configuration(self.assignment[a])

    def with_point(self, a: int, idx: int) -> "Microstate":
        assignment = list(self.assignment)
        assignment[a] = idx
        return Microstate(d=self.d, assignment=tuple(assignment), dictionary=self.dictionary)


class EntropyParams(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    F: FiniteSubset
    delta: Fraction
    epsilon: Fraction = Fraction(1, 4)
    approximation: SoficApproximation

    @field_validator("delta", "epsilon", mode="before")
    @classmethod
    def _rational(cls, value: Any) -> Fraction:
        value = as_fraction(value)
        if value <= 0:
            raise InvalidParameterError(f"delta and epsilon must be positive, got {value}")
        return value

    @model_validator(mode="after")
    def _check_support(self) -> "EntropyParams":
        if not self.F.elements:
            raise InvalidParameterError("F must be nonempty")
        support = self.approximation.support.payload_set
        missing = [g for g in self.F.elements if g.payload not in support]
        if missing:
            raise InvalidParameterError(
                f"F element {self.F.model.format(missing[0])} is outside the approximation support"
            )
        return self


class MicrostateSpace(BaseModel):
    """Finite stand-in for the good maps Map(X, rho, F, delta, sigma).

    `lifts_only` marks spaces made of distinct periodic lifts, whose members are
    pairwise at rho_inf-distance 1.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: EntropyParams
    dictionary: ConfigurationDictionary
    members: List[Microstate] = []
    lifts_only: bool = False
    perturbed: int = 0

    def __len__(self) -> int:
        return len(self.members)

    @classmethod
    def from_periodic_lifts(cls, subshift, params: EntropyParams, perturb: bool = False) -> "MicrostateSpace":
        from soficlab.services.sofic_entropy import lift_space

        return lift_space(subshift, params, perturb=perturb)


class EntropyTraceRow(BaseModel):
    d: int
    points: int
    microstates: int
    perturbed: int
    separated: int
    rate: float


class EntropyEstimate(BaseModel):
    subshift: str
    epsilon: str
    lower: float
    upper: float
    exact_oracle: Optional[float] = None
    trace: List[EntropyTraceRow] = []


class GapReport(BaseModel):
    x: str
    y: str
    lower_x: float
    upper_y: float
    oracle_x: Optional[float] = None
    oracle_y: Optional[float] = None
    margin: float
    strict_gap: bool
    witness: str

    @property
    def gap(self) -> float:
        return self.lower_x - self.upper_y

    @property
    def verdict(self) -> str:
        return "strict-gap" if self.strict_gap else "no-gap"
