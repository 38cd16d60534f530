"""Group models: integer lattices, free groups and finite cyclic groups.

Elements are stored in normal form so that payload equality is group
equality. Lattice payloads are coordinate tuples, free-group payloads are
reduced words over the letters +-(i+1), cyclic payloads are a single residue.
"""

import string
from typing import Any, Iterable, Literal, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from soficlab.exceptions import InvalidParameterError, ModelMismatchError

GroupKind = Literal["lattice", "free", "cyclic"]


class GroupElement(BaseModel):
    model_config = ConfigDict(frozen=True)

    payload: Tuple[int, ...]


class GroupModel(BaseModel):
    """A finitely generated group with exact normal forms.

    `rank` is the lattice rank, the number of free generators, or the order
    of the cyclic group, depending on `kind`.
    """

    model_config = ConfigDict(frozen=True)

    kind: GroupKind
    rank: int

    @model_validator(mode="after")
    def _check_rank(self) -> "GroupModel":
        if self.rank < 1:
            raise InvalidParameterError(f"{self.kind} group needs a positive rank/order, got {self.rank}")
        if self.kind == "free" and self.rank > 26:
            raise InvalidParameterError("free groups are limited to 26 generators")
        return self

    @classmethod
    def parse(cls, text: str) -> "GroupModel":
        kind, _, rank = text.strip().partition(":")
        if kind not in ("lattice", "free", "cyclic") or not rank.strip().isdigit():
            raise InvalidParameterError(f"group declaration must look like lattice:2, free:2 or cyclic:12, got {text!r}")
        return cls(kind=kind, rank=int(rank))

    @classmethod
    def lattice(cls, rank: int = 1) -> "GroupModel":
        return cls(kind="lattice", rank=rank)

    @classmethod
    def free(cls, rank: int = 2) -> "GroupModel":
        return cls(kind="free", rank=rank)

    @classmethod
    def cyclic(cls, order: int) -> "GroupModel":
        return cls(kind="cyclic", rank=order)

    def declaration(self) -> str:
        return f"{self.kind}:{self.rank}"

    @property
    def generators(self) -> Tuple[str, ...]:
        if self.kind == "free":
            return tuple(string.ascii_lowercase[: self.rank])
        if self.kind == "lattice":
            return tuple(f"e{i + 1}" for i in range(self.rank))
        return ("g",)

    # -- normal forms -----------------------------------------------------

    def normalize(self, payload: Iterable[int]) -> Tuple[int, ...]:
        payload = tuple(int(v) for v in payload)
        if self.kind == "lattice":
            if len(payload) != self.rank:
                raise InvalidParameterError(f"lattice:{self.rank} element needs {self.rank} coordinates, got {payload}")
            return payload
        if self.kind == "cyclic":
            if len(payload) != 1:
                raise InvalidParameterError(f"cyclic element needs one residue, got {payload}")
            return (payload[0] % self.rank,)
        reduced = []
        for letter in payload:
            if letter == 0 or abs(letter) > self.rank:
                raise InvalidParameterError(f"letter {letter} is not a generator of free:{self.rank}")
            if reduced and reduced[-1] == -letter:
                reduced.pop()
            else:
                reduced.append(letter)
        return tuple(reduced)

    def element(self, *payload: int) -> GroupElement:
        return GroupElement(payload=self.normalize(payload))

    def identity(self) -> GroupElement:
        if self.kind == "lattice":
            return GroupElement(payload=(0,) * self.rank)
        if self.kind == "cyclic":
            return GroupElement(payload=(0,))
        return GroupElement(payload=())

    def multiply(self, g: GroupElement, h: GroupElement) -> GroupElement:
        if self.kind == "lattice":
            return GroupElement(payload=tuple(a + b for a, b in zip(g.payload, h.payload)))
        if self.kind == "cyclic":
            return GroupElement(payload=((g.payload[0] + h.payload[0]) % self.rank,))
        return GroupElement(payload=self.normalize(g.payload + h.payload))

    def inverse(self, g: GroupElement) -> GroupElement:
        if self.kind == "lattice":
            return GroupElement(payload=tuple(-a for a in g.payload))
        if self.kind == "cyclic":
            return GroupElement(payload=((-g.payload[0]) % self.rank,))
        return GroupElement(payload=tuple(-letter for letter in reversed(g.payload)))

    def norm(self, g: GroupElement) -> int:
        """Word length for free groups, sup-norm for lattices, symmetric residue for cyclic groups."""
        if self.kind == "lattice":
            return max((abs(a) for a in g.payload), default=0)
        if self.kind == "cyclic":
            r = g.payload[0]
            return min(r, self.rank - r)
        return len(g.payload)

    def sort_key(self, g: GroupElement) -> Tuple[Any, ...]:
        if self.kind == "free":
            return (len(g.payload), tuple((abs(letter), letter < 0) for letter in g.payload))
        return g.payload

    # -- text forms -------------------------------------------------------

    def format(self, g: GroupElement) -> str:
        if self.kind == "free":
            if not g.payload:
                return "1"
            return "".join(
                string.ascii_lowercase[abs(l) - 1] if l > 0 else string.ascii_uppercase[abs(l) - 1]
                for l in g.payload
            )
        if self.kind == "lattice" and self.rank > 1:
            return ",".join(str(a) for a in g.payload)
        return str(g.payload[0])

    def parse_element(self, text: str) -> GroupElement:
        text = text.strip().strip("()")
        try:
            if self.kind == "free":
                if text in ("", "1", "e"):
                    return self.identity()
                letters = []
                for ch in text:
                    if ch in string.ascii_lowercase:
                        letters.append(string.ascii_lowercase.index(ch) + 1)
                    elif ch in string.ascii_uppercase:
                        letters.append(-(string.ascii_uppercase.index(ch) + 1))
                    else:
                        raise ValueError(ch)
                return self.element(*letters)
            return self.element(*(int(part) for part in text.split(",")))
        except ValueError as e:
            raise InvalidParameterError(f"cannot read {text!r} as an element of {self.declaration()}: {e}")


class FiniteSubset(BaseModel):
    """Deduplicated finite subset, sorted by normal form."""

    model_config = ConfigDict(frozen=True)

    model: GroupModel
    elements: Tuple[GroupElement, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        model = data.get("model")
        if isinstance(model, dict):
            model = GroupModel(**model)
        if not isinstance(model, GroupModel):
            return data
        unique = {}
        for item in data.get("elements", ()):
            if isinstance(item, GroupElement):
                payload = item.payload
            elif isinstance(item, dict):
                payload = item["payload"]
            else:
                payload = item
            g = GroupElement(payload=model.normalize(payload))
            unique[g.payload] = g
        ordered = sorted(unique.values(), key=model.sort_key)
        return {"model": model, "elements": tuple(ordered)}

    @classmethod
    def of(cls, model: GroupModel, payloads: Iterable[Any]) -> "FiniteSubset":
        """Build from raw payloads; integers are accepted for rank-one lattices and cyclic groups."""
        items = []
        for p in payloads:
            if isinstance(p, GroupElement):
                items.append(p)
            elif isinstance(p, int):
                items.append(GroupElement(payload=(p,)))
            else:
                items.append(GroupElement(payload=tuple(p)))
        return cls(model=model, elements=items)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g: object) -> bool:
        if isinstance(g, GroupElement):
            return g.payload in self.payload_set
        return False

    @property
    def payloads(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(g.payload for g in self.elements)

    @property
    def payload_set(self) -> frozenset:
        return frozenset(self.payloads)

    def _same_model(self, other: "FiniteSubset") -> None:
        if self.model != other.model:
            raise ModelMismatchError(f"{self.model.declaration()} vs {other.model.declaration()}")

    def union(self, other: "FiniteSubset") -> "FiniteSubset":
        self._same_model(other)
        return FiniteSubset(model=self.model, elements=self.elements + other.elements)

    def inverse(self) -> "FiniteSubset":
        return FiniteSubset(model=self.model, elements=[self.model.inverse(g) for g in self.elements])

    def translate(self, g: GroupElement) -> "FiniteSubset":
        """Right translate F·g."""
        return FiniteSubset(model=self.model, elements=[self.model.multiply(f, g) for f in self.elements])

    def is_box(self) -> bool:
        if self.model.kind != "lattice" or not self.elements:
            return False
        lo, hi = self.bounds()
        volume = 1
        for a, b in zip(lo, hi):
            volume *= b - a + 1
        return volume == len(self.elements)

    def bounds(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        if self.model.kind != "lattice" or not self.elements:
            raise InvalidParameterError("bounds are defined for nonempty lattice subsets only")
        coords = list(zip(*self.payloads))
        return tuple(min(c) for c in coords), tuple(max(c) for c in coords)

    def describe(self) -> str:
        return "{" + ", ".join(self.model.format(g) for g in self.elements) + "}"
