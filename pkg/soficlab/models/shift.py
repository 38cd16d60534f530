"""Alphabets, patterns, subshifts of finite type and finitely described configurations."""

from fractions import Fraction
from functools import cached_property
from itertools import product
from math import prod
from typing import Any, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from soficlab.exceptions import InvalidParameterError, ModelMismatchError, UnsupportedGroupError
from soficlab.models.group import FiniteSubset, GroupModel

Coord = Tuple[int, ...]


class Alphabet(BaseModel):
    model_config = ConfigDict(frozen=True)

    symbols: Tuple[str, ...]

    @model_validator(mode="after")
    def _check_symbols(self) -> "Alphabet":
        if not self.symbols:
            raise InvalidParameterError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidParameterError(f"alphabet symbols must be distinct: {self.symbols}")
        return self

    @classmethod
    def of(cls, *symbols: str) -> "Alphabet":
        return cls(symbols=tuple(symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise InvalidParameterError(f"symbol {symbol!r} is not in alphabet {self.symbols}")

    def encode(self, word: str) -> Tuple[int, ...]:
        return tuple(self.index(ch) for ch in word)

    def decode(self, indices) -> str:
        return "".join(self.symbols[i] for i in indices)


class Pattern(BaseModel):
    """Assignment of symbol indices to the elements of `support`, in support order."""

    model_config = ConfigDict(frozen=True)

    support: FiniteSubset
    symbols: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_total(self) -> "Pattern":
        if len(self.symbols) != len(self.support):
            raise InvalidParameterError(
                f"pattern assigns {len(self.symbols)} symbols to a support of size {len(self.support)}"
            )
        return self

    def as_dict(self) -> Dict[Coord, int]:
        return dict(zip(self.support.payloads, self.symbols))

    def word(self, alphabet: Alphabet) -> str:
        return alphabet.decode(self.symbols)

    def describe(self, alphabet: Alphabet) -> str:
        model = self.support.model
        return " ".join(f"{model.format(g)}:{alphabet.symbols[s]}" for g, s in zip(self.support.elements, self.symbols))


class Subshift(BaseModel):
    """Subshift of finite type over an integer lattice.

    `admissible` lists the allowed patterns on `memory`, each aligned with the
    sorted order of the memory elements.
    """

    model_config = ConfigDict(frozen=True)

    name: str = ""
    alphabet: Alphabet
    group: GroupModel
    memory: FiniteSubset
    admissible: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="before")
    @classmethod
    def _sort_admissible(cls, data: Any) -> Any:
        if isinstance(data, dict) and "admissible" in data:
            data = dict(data)
            data["admissible"] = tuple(sorted({tuple(p) for p in data["admissible"]}))
        return data

    @model_validator(mode="after")
    def _check_data(self) -> "Subshift":
        if self.group.kind != "lattice":
            raise UnsupportedGroupError(f"subshifts are supported over integer lattices only, not {self.group.declaration()}")
        if self.memory.model != self.group:
            raise ModelMismatchError("memory set lives over a different group")
        if not self.memory.elements:
            raise InvalidParameterError("memory set must be nonempty")
        size = len(self.alphabet)
        for pattern in self.admissible:
            if len(pattern) != len(self.memory):
                raise InvalidParameterError(f"admissible pattern {pattern} does not match memory size {len(self.memory)}")
            if any(s < 0 or s >= size for s in pattern):
                raise InvalidParameterError(f"admissible pattern {pattern} uses a symbol outside the alphabet")
        return self

    @property
    def rank(self) -> int:
        return self.group.rank

    @cached_property
    def admissible_set(self) -> frozenset:
        return frozenset(self.admissible)

    @cached_property
    def offsets(self) -> Tuple[Coord, ...]:
        return self.memory.payloads

    @cached_property
    def span(self) -> Tuple[int, ...]:
        lo, hi = self.memory.bounds()
        return tuple(b - a + 1 for a, b in zip(lo, hi))

    def admissible_patterns(self) -> Tuple[Pattern, ...]:
        return tuple(Pattern(support=self.memory, symbols=p) for p in self.admissible)

    def forbidden(self) -> Tuple[Tuple[int, ...], ...]:
        every = product(range(len(self.alphabet)), repeat=len(self.memory))
        return tuple(p for p in every if p not in self.admissible_set)

    def label(self) -> str:
        return self.name or f"sft[{self.group.declaration()}]"


def _row_major(h: Coord, periods: Coord) -> int:
    idx = 0
    for c, p in zip(h, periods):
        idx = idx * p + (c % p)
    return idx


def _box_coords(periods: Coord):
    return product(*(range(p) for p in periods))


def _minimal_background(periods: Coord, cells: Tuple[int, ...]) -> Tuple[Coord, Tuple[int, ...]]:
    """Shrink each axis period to the least one that still describes the same periodic function."""
    periods = tuple(periods)
    for axis, p in enumerate(periods):
        for q in range(1, p + 1):
            if p % q:
                continue
            step = tuple(q if i == axis else 0 for i in range(len(periods)))
            if all(
                cells[_row_major(h, periods)] == cells[_row_major(tuple(a + b for a, b in zip(h, step)), periods)]
                for h in _box_coords(periods)
            ):
                if q < p:
                    reduced = periods[:axis] + (q,) + periods[axis + 1:]
                    cells = tuple(cells[_row_major(h, periods)] for h in _box_coords(reduced))
                    periods = reduced
                break
    return periods, tuple(cells)


class Configuration(BaseModel):
    """Eventually periodic point of A^(Z^r), stored in a canonical form.

    The point equals the periodic background `cells` (row-major over the box of
    `periods`), except at the `override` coordinates. Over Z a second tail may
    be given: it is used at coordinates h >= 0, the first background at h < 0.
    Backgrounds carry minimal periods and overrides never repeat the default,
    so two configurations are equal as points iff they are equal as models.
    """

    model_config = ConfigDict(frozen=True)

    rank: int
    periods: Coord
    cells: Tuple[int, ...]
    right_periods: Optional[Coord] = None
    right_cells: Optional[Tuple[int, ...]] = None
    override: Tuple[Tuple[Coord, int], ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _canonical(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        rank = int(data["rank"])
        periods = tuple(int(p) for p in data["periods"])
        cells = tuple(int(c) for c in data["cells"])
        if len(periods) != rank or any(p < 1 for p in periods) or prod(periods) != len(cells):
            raise InvalidParameterError(f"background of periods {periods} cannot hold {len(cells)} cells")
        periods, cells = _minimal_background(periods, cells)
        right_periods = data.get("right_periods")
        right_cells = data.get("right_cells")
        if right_periods is not None:
            if rank != 1:
                raise UnsupportedGroupError("two-tailed configurations exist only over Z")
            right_periods = tuple(int(p) for p in right_periods)
            right_cells = tuple(int(c) for c in right_cells)
            if prod(right_periods) != len(right_cells):
                raise InvalidParameterError("right tail period does not match its cells")
            right_periods, right_cells = _minimal_background(right_periods, right_cells)
            if right_periods == periods and right_cells == cells:
                right_periods = right_cells = None
        entries: Dict[Coord, int] = {}
        for coord, symbol in data.get("override", ()):
            coord = tuple(int(c) for c in coord)
            if len(coord) != rank:
                raise InvalidParameterError(f"override coordinate {coord} has the wrong rank")
            entries[coord] = int(symbol)
        kept = []
        for coord in sorted(entries):
            if right_periods is not None and coord[0] >= 0:
                default = right_cells[coord[0] % right_periods[0]]
            else:
                default = cells[_row_major(coord, periods)]
            if entries[coord] != default:
                kept.append((coord, entries[coord]))
        return {
            "rank": rank,
            "periods": periods,
            "cells": cells,
            "right_periods": right_periods,
            "right_cells": right_cells,
            "override": tuple(kept),
        }

    @classmethod
    def periodic(cls, periods, cells, override=()) -> "Configuration":
        periods = tuple(periods)
        return cls(rank=len(periods), periods=periods, cells=tuple(cells), override=tuple(override))

    @classmethod
    def constant(cls, symbol: int, rank: int = 1) -> "Configuration":
        return cls(rank=rank, periods=(1,) * rank, cells=(symbol,))

    @classmethod
    def from_segments(cls, left, middle, right, start: int = 0) -> "Configuration":
        """Point over Z reading `left` periodically before `start`, then `middle`, then `right` periodically."""
        left, middle, right = tuple(left), tuple(middle), tuple(right)
        if not left or not right:
            raise InvalidParameterError("both tails need at least one symbol")
        end = start + len(middle)

        def value(h: int) -> int:
            if h < start:
                return left[(h - start) % len(left)]
            if h < end:
                return middle[h - start]
            return right[(h - end) % len(right)]

        left_cells = tuple(left[(h - start) % len(left)] for h in range(len(left)))
        right_cells = tuple(right[(h - end) % len(right)] for h in range(len(right)))
        lo, hi = min(start, 0), max(end, 0)
        override = [((h,), value(h)) for h in range(lo - len(left), hi + len(right))]
        return cls(
            rank=1,
            periods=(len(left),),
            cells=left_cells,
            right_periods=(len(right),),
            right_cells=right_cells,
            override=override,
        )

    @cached_property
    def _override_map(self) -> Dict[Coord, int]:
        return dict(self.override)

    @property
    def two_tailed(self) -> bool:
        return self.right_periods is not None

    @property
    def is_periodic(self) -> bool:
        return not self.override and not self.two_tailed

    def background_at(self, h: Coord) -> int:
        if self.right_periods is not None and h[0] >= 0:
            return self.right_cells[h[0] % self.right_periods[0]]
        return self.cells[_row_major(h, self.periods)]

    def value_at(self, h: Coord) -> int:
        value = self._override_map.get(h)
        if value is not None:
            return value
        return self.background_at(h)

    def extent(self) -> int:
        """Sup-norm radius beyond which only the backgrounds matter."""
        return max((max(abs(c) for c in coord) for coord, _ in self.override), default=0)

    def max_symbol(self) -> int:
        values = list(self.cells) + list(self.right_cells or ()) + [s for _, s in self.override]
        return max(values)

    def describe(self, alphabet: Optional[Alphabet] = None) -> str:
        def word(cells):
            return alphabet.decode(cells) if alphabet else "".join(str(c) for c in cells)

        def symbol(s):
            return alphabet.symbols[s] if alphabet else str(s)

        text = f"({word(self.cells)})^inf"
        if self.rank > 1:
            text = f"periods {self.periods} [{word(self.cells)}]"
        if self.override:
            text += " " + " ".join(f"{','.join(str(c) for c in coord)}:{symbol(s)}" for coord, s in self.override)
        if self.two_tailed:
            text += f" ({word(self.right_cells)})^inf"
        return text


class ExpansivityCertificate(BaseModel):
    """Expansivity constant c with witness map eps = 2^-n -> K = Omega_(n+1)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    group: GroupModel
    constant: Fraction = Fraction(1, 2)
    verified_levels: Tuple[int, ...] = ()

    def witness(self, epsilon: Fraction) -> FiniteSubset:
        from soficlab.services.group_model import ball

        return ball(self.group, dyadic_level(epsilon) + 1)


def dyadic_level(epsilon) -> int:
    """Return n with epsilon = 2^-n."""
    eps = Fraction(epsilon)
    if eps <= 0 or eps > 1 or eps.numerator != 1 or eps.denominator & (eps.denominator - 1):
        raise InvalidParameterError(f"epsilon must be of the form 2^-n with n >= 0, got {epsilon}")
    return eps.denominator.bit_length() - 1


class IrreducibilityCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: FiniteSubset
    budget: int
    margin: Optional[int] = None


class SplicabilityCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: FiniteSubset
    budget: int
    margin: Optional[int] = None


CheckOutcome = Literal["certified", "refuted", "inconclusive"]


class CheckResult(BaseModel):
    """Three-valued outcome of a budgeted certificate search."""

    model_config = ConfigDict(frozen=True)

    property_name: str
    outcome: CheckOutcome
    delta: FiniteSubset
    budget: int
    exact: bool = True
    margin: Optional[int] = None
    cases_checked: int = 0
    counterexample: Tuple[Pattern, ...] = ()
    detail: str = ""

    @property
    def certificate(self):
        if self.outcome != "certified":
            return None
        if self.property_name == "splicable":
            return SplicabilityCertificate(delta=self.delta, budget=self.budget, margin=self.margin)
        return IrreducibilityCertificate(delta=self.delta, budget=self.budget, margin=self.margin)


class PatternEnumeration(BaseModel):
    """Patterns on a box window; `exact` is False for results that are only locally admissible at `margin`."""

    model_config = ConfigDict(frozen=True)

    window: FiniteSubset
    words: Tuple[Tuple[int, ...], ...]
    exact: bool = True
    margin: Optional[int] = None

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, Pattern):
            return item.support == self.window and item.symbols in self.word_set
        return tuple(item) in self.word_set if isinstance(item, (tuple, list)) else False

    @cached_property
    def word_set(self) -> frozenset:
        return frozenset(self.words)

    def patterns(self) -> Tuple[Pattern, ...]:
        return tuple(Pattern(support=self.window, symbols=w) for w in self.words)
