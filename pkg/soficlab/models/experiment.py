# soficlab/models/experiment.py
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from soficlab.config import settings
from soficlab.exceptions import InvalidParameterError

ExperimentKind = Literal["entropy", "gap", "sweep", "decide", "certify", "stirling", "approx-quality"]

REQUIRED_INPUTS: Dict[str, tuple] = {
    "entropy": ("subshift",),
    "gap": ("x", "y"),
    "sweep": ("subshift",),
    "decide": ("subshift", "rule"),
    "certify": ("subshift",),
    "stirling": (),
    "approx-quality": (),
}


def default_params(kind: str) -> Dict[str, str]:
    """Parameters a run of `kind` uses when the config leaves them out."""
    if kind in ("entropy", "gap"):
        params = {"d": "8,12,16", "epsilon": settings.DEFAULT_EPSILON, "delta": settings.DEFAULT_DELTA}
        if kind == "entropy":
            params["mode"] = "auto"
        else:
            params["margin"] = str(settings.GAP_MARGIN)
        return params
    if kind == "sweep":
        return {"memory": "0 1", "budget": str(settings.SWEEP_BUDGET)}
    if kind == "certify":
        return {"property": "both", "delta": "box:1", "budget": "8", "margin": str(settings.LATTICE_MARGIN)}
    if kind == "stirling":
        return {"gamma": "1/4", "span": "500", "factorial": "100", "t": "1/3", "identity": "30"}
    if kind == "approx-quality":
        return {"group": "lattice:1", "d": "64"}
    return {}


class ExperimentConfig(BaseModel):
    """One experiment run, as read from a config file or assembled by the CLI.

    `inputs` maps roles (subshift, x, y, rule) to a file path or a `preset:NAME`
    reference; `params` holds the remaining keys verbatim and `report` names
    the main CSV inside the output directory.
    """
    kind: ExperimentKind
    inputs: Dict[str, str] = {}
    params: Dict[str, str] = {}
    out: Optional[str] = None
    report: Optional[str] = None
    seed: int
    source: Optional[str] = None

    @model_validator(mode="after")
    def _check_inputs(self) -> "ExperimentConfig":
        missing = [role for role in REQUIRED_INPUTS[self.kind] if role not in self.inputs]
        if missing:
            raise InvalidParameterError(f"{self.kind} experiment needs input(s): {', '.join(missing)}")
        for role, ref in self.inputs.items():
            if ref.startswith("preset:"):
                continue
            if not Path(ref).is_file():
                raise InvalidParameterError(f"input {role} = {ref} does not exist")
        if self.report is not None and (Path(self.report).name != self.report or not self.report.endswith(".csv")):
            raise InvalidParameterError(f"report must be a bare .csv file name, got {self.report!r}")
        return self

    def effective_params(self) -> Dict[str, str]:
        """`params` over the defaults of this kind, read when the run starts."""
        params = default_params(self.kind)
        params.update(self.params)
        return params

    def resolved(self) -> Dict[str, str]:
        """Flat view echoed at the top of every report, defaults included."""
        echo = {"kind": self.kind, "seed": str(self.seed)}
        echo.update(self.inputs)
        echo.update(self.effective_params())
        if self.out:
            echo["out"] = self.out
        if self.report:
            echo["report"] = self.report
        return echo


class RunResult(BaseModel):
    """Outcome of one run: exit status, written files and headline values."""
    status: int = 0
    artifacts: List[str] = []
    summary: Dict[str, str] = Field(default_factory=dict)
