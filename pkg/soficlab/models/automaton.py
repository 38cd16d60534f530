from typing import Callable, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from soficlab.exceptions import InvalidParameterError, ModelMismatchError
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.models.shift import Configuration, Pattern, Subshift


class LocalRule(BaseModel):
    """Local rule mu: A^S -> A.

    `table` lists mu over A^S in lexicographic order, reading patterns in the
    sorted order of the memory set S.
    """

    model_config = ConfigDict(frozen=True)

    alphabet_size: int
    memory: FiniteSubset
    table: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_table(self) -> "LocalRule":
        if not self.memory.elements:
            raise InvalidParameterError("rule memory must be nonempty")
        expected = self.alphabet_size ** len(self.memory)
        if len(self.table) != expected:
            raise InvalidParameterError(f"rule table has {len(self.table)} entries, A^S has {expected}")
        if any(v < 0 or v >= self.alphabet_size for v in self.table):
            raise InvalidParameterError("rule table maps outside the alphabet")
        return self

    @property
    def offsets(self) -> Tuple[Tuple[int, ...], ...]:
        return self.memory.payloads

    def entry_index(self, pattern: Tuple[int, ...]) -> int:
        idx = 0
        for s in pattern:
            idx = idx * self.alphabet_size + s
        return idx

    def output(self, pattern: Tuple[int, ...]) -> int:
        return self.table[self.entry_index(pattern)]

    @property
    def rule_index(self) -> int:
        idx = 0
        for v in self.table:
            idx = idx * self.alphabet_size + v
        return idx

    @classmethod
    def from_index(cls, alphabet_size: int, memory: FiniteSubset, index: int) -> "LocalRule":
        entries = alphabet_size ** len(memory)
        if index < 0 or index >= alphabet_size ** entries:
            raise InvalidParameterError(f"rule index {index} out of range")
        digits = []
        for _ in range(entries):
            index, digit = divmod(index, alphabet_size)
            digits.append(digit)
        return cls(alphabet_size=alphabet_size, memory=memory, table=tuple(reversed(digits)))

    @classmethod
    def from_function(cls, alphabet_size: int, memory: FiniteSubset,
                      fn: Callable[[Tuple[int, ...]], int]) -> "LocalRule":
        from itertools import product

        table = tuple(fn(p) for p in product(range(alphabet_size), repeat=len(memory)))
        return cls(alphabet_size=alphabet_size, memory=memory, table=table)

    @classmethod
    def identity(cls, alphabet_size: int, group: Optional[GroupModel] = None) -> "LocalRule":
        group = group or GroupModel.lattice(1)
        memory = FiniteSubset(model=group, elements=[group.identity()])
        return cls(alphabet_size=alphabet_size, memory=memory, table=tuple(range(alphabet_size)))


class Endomorphism(BaseModel):
    """Sliding block code f(x)(g) = mu((g^-1 x)|_S), checked to map `domain` into itself."""

    model_config = ConfigDict(frozen=True)

    rule: LocalRule
    domain: Subshift

    @model_validator(mode="after")
    def _check_invariance(self) -> "Endomorphism":
        from soficlab.exceptions import DomainError
        from soficlab.services.cellular_automaton import preserves_subshift

        if self.rule.memory.model != self.domain.group:
            raise ModelMismatchError("rule and subshift live over different groups")
        if self.rule.alphabet_size != len(self.domain.alphabet):
            raise ModelMismatchError("rule and subshift use alphabets of different size")
        if not preserves_subshift(self.rule, self.domain):
            raise DomainError(f"rule {self.rule.rule_index} does not map {self.domain.label()} into itself")
        return self


class InjectivityDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    outcome: Literal["injective", "not_injective", "unknown"]
    witness: Tuple[Configuration, ...] = ()
    method: str = "pair-graph"
    detail: str = ""


class SurjectivityDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    outcome: Literal["surjective", "not_surjective", "unknown"]
    orphan: Optional[Pattern] = None
    orphan_word: str = ""
    method: str = "subset-construction"
    detail: str = ""


class RuleVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    table: Tuple[int, ...]
    preserves: bool
    injective: Optional[bool] = None
    surjective: Optional[bool] = None
    orphan: str = ""

    @property
    def violates_surjunctivity(self) -> bool:
        return bool(self.injective) and self.surjective is False


class SweepReport(BaseModel):
    subshift: str
    memory: str
    total_rules: int
    scanned: int = 0
    preserving: int = 0
    injective: int = 0
    surjective: int = 0
    verdicts: List[RuleVerdict] = []

    @property
    def violations(self) -> List[RuleVerdict]:
        return [v for v in self.verdicts if v.violates_surjunctivity]
