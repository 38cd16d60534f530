from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from soficlab.exceptions import InvalidParameterError, SupportError
from soficlab.models.group import FiniteSubset, GroupElement, GroupModel

Construction = Literal["cyclic", "torus", "word-extension-random"]


class SoficApproximation(BaseModel):
    """Permutations of [d] attached to a finite support of group elements.

    Row i of `table` is the permutation of the i-th support element, listed
    as the images of 0..d-1.
    """

    model_config = ConfigDict(frozen=True)

    group: GroupModel
    d: int
    construction: Construction
    seed: Optional[int] = None
    support: FiniteSubset
    table: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_table(self) -> "SoficApproximation":
        if self.d < 1:
            raise InvalidParameterError(f"approximation size must be positive, got {self.d}")
        if len(self.table) != len(self.support):
            raise InvalidParameterError("one permutation per support element is required")
        if self.group.identity() not in self.support:
            raise InvalidParameterError("support must contain the identity")
        support = self.support.payload_set
        for g in self.support.elements:
            if self.group.inverse(g).payload not in support:
                raise InvalidParameterError(f"support is not closed under the inverse of {self.group.format(g)}")
        identity = list(range(self.d))
        for row in self.table:
            if sorted(row) != identity:
                raise InvalidParameterError("table rows must be permutations of [d]")
        return self

    @cached_property
    def _rows(self) -> Dict[Tuple[int, ...], int]:
        return {g.payload: i for i, g in enumerate(self.support.elements)}

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    @property
    def tag(self) -> str:
        if self.seed is None:
            return self.construction
        return f"{self.construction}(seed={self.seed})"

    def permutation(self, g: GroupElement) -> np.ndarray:
        row = self._rows.get(g.payload)
        if row is None:
            raise SupportError(self.group.format(g))
        return self.matrix[row]

    def act(self, g: GroupElement, a: int) -> int:
        return int(self.permutation(g)[a])


class ApproximationSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    approximations: Tuple[SoficApproximation, ...]

    @model_validator(mode="after")
    def _check_increasing(self) -> "ApproximationSequence":
        sizes = [a.d for a in self.approximations]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidParameterError(f"approximation sizes must increase strictly, got {sizes}")
        return self

    def __len__(self) -> int:
        return len(self.approximations)

    @classmethod
    def from_schedule(cls, kind: Construction, sizes, group: Optional[GroupModel] = None,
                      seed: Optional[int] = None, support_radius: Optional[int] = None) -> "ApproximationSequence":
        from soficlab.services.sofic_approx import build_approximation

        group = group or GroupModel.lattice(1)
        return cls(approximations=tuple(
            build_approximation(kind, d, group, seed=seed, support_radius=support_radius) for d in sizes
        ))


class QualityReport(BaseModel):
    """Defects eta(sigma(st), sigma(s)sigma(t)) per ordered pair and separations per unordered pair."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    d: int
    construction: str
    defects: Tuple[Tuple[str, str, Fraction], ...]
    separations: Tuple[Tuple[str, str, Fraction], ...]

    @property
    def max_defect(self) -> Fraction:
        return max((v for _, _, v in self.defects), default=Fraction(0))

    @property
    def min_separation(self) -> Fraction:
        return min((v for _, _, v in self.separations), default=Fraction(1))

    def rows(self) -> List[Tuple[str, str, str, Fraction]]:
        return [("defect",) + r for r in self.defects] + [("separation",) + r for r in self.separations]
