from fractions import Fraction
from typing import Any, List

from pydantic import BaseModel, ConfigDict, field_validator

from soficlab.exceptions import DomainError


class StirlingParams(BaseModel):
    """gamma in (0, 1/2), kappa(gamma) and the threshold d0(gamma) of the binomial tail bound."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gamma: Fraction
    kappa: float
    d0: int

    @field_validator("gamma", mode="before")
    @classmethod
    def _check_gamma(cls, value: Any) -> Fraction:
        value = Fraction(str(value)) if not isinstance(value, Fraction) else value
        if not 0 < value < Fraction(1, 2):
            raise DomainError(f"gamma must lie in (0, 1/2), got {value}")
        return value

    @classmethod
    def for_gamma(cls, gamma) -> "StirlingParams":
        from soficlab.services.stirling_bounds import d_zero, kappa

        return cls(gamma=gamma, kappa=kappa(gamma), d0=d_zero(gamma))


class TailBoundRow(BaseModel):
    d: int
    m: int
    log_sum: float
    kappa_d: float
    slack: float
    weighted_slack: float
    doubled_slack: float


class TailBoundReport(BaseModel):
    gamma: str
    kappa: float
    d0: int
    rows: List[TailBoundRow] = []
    slope: float = 0.0

    @property
    def min_slack(self) -> float:
        return min(r.slack for r in self.rows)
