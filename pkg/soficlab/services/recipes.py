"""Named reproduction recipes: fixed experiment configs plus the outcome each must show."""

import logging
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional

from soficlab.config import settings
from soficlab.exceptions import CertificateViolation, InvalidParameterError
from soficlab.models.experiment import ExperimentConfig, RunResult
from soficlab.services.experiment_runner import run

logger = logging.getLogger(__name__)

Check = Callable[[Dict[str, str]], Optional[str]]


class Step(NamedTuple):
    kind: str
    inputs: Dict[str, str]
    params: Dict[str, str]
    check: Check


def _equals(key: str, expected: str) -> Check:
    def check(summary: Dict[str, str]) -> Optional[str]:
        if summary.get(key) != expected:
            return f"{key} = {summary.get(key)!r}, expected {expected!r}"
        return None
    return check


def _all(*checks: Check) -> Check:
    def check(summary: Dict[str, str]) -> Optional[str]:
        failures = [msg for msg in (c(summary) for c in checks) if msg]
        return "; ".join(failures) or None
    return check


def _close(key: str, expected: float, tolerance: float) -> Check:
    def check(summary: Dict[str, str]) -> Optional[str]:
        value = float(summary.get(key, "nan"))
        if not abs(value - expected) <= tolerance:
            return f"{key} = {value}, expected {expected} +- {tolerance}"
        return None
    return check


def _at_least(key: str, bound: float) -> Check:
    def check(summary: Dict[str, str]) -> Optional[str]:
        value = float(summary.get(key, "nan"))
        if not value >= bound:
            return f"{key} = {value}, expected at least {bound}"
        return None
    return check


RECIPES: Dict[str, List[Step]] = {
    "gromov-weiss": [
        Step("sweep", {"subshift": "preset:full-shift:k=2"}, {"memory": "0 1"}, _equals("violations", "0")),
    ],
    "weiss-counterexample": [
        Step(
            "decide", {"subshift": "preset:weiss", "rule": "preset:weiss"}, {},
            _all(_equals("injective", "injective"), _equals("surjective", "not_surjective"), _equals("orphan", "012")),
        ),
        Step(
            "certify", {"subshift": "preset:weiss"}, {"delta": "-1 0 1", "budget": "8"},
            _all(_equals("strong_irreducibility", "refuted"), _equals("splicable", "certified")),
        ),
    ],
    "golden-gap": [
        Step(
            "gap", {"x": "preset:golden-mean", "y": "preset:zero"}, {"d": "8,12,16,24"},
            _all(_equals("verdict", "strict-gap"), _at_least("gap", 0.4)),
        ),
    ],
    "hardball-certify": [
        Step(
            "certify", {"subshift": "preset:hard-ball:d=2"}, {"delta": "box:1", "budget": "4", "margin": "2"},
            _all(_equals("strong_irreducibility", "certified"), _equals("splicable", "certified")),
        ),
    ],
    "stirling-appendix": [
        Step(
            "stirling", {}, {"gamma": "1/20,1/10,1/4,2/5", "span": "500"},
            _close("kappa(1/4)", 1.1246704, 1e-6),
        ),
    ],
}


def recipe_configs(name: str, out: Optional[str] = None, seed: Optional[int] = None) -> List[ExperimentConfig]:
    if name not in RECIPES:
        raise InvalidParameterError(f"unknown recipe {name!r}; choose from {', '.join(sorted(RECIPES))}")
    root = Path(out) if out else Path(settings.OUTPUT_DIR)
    seed = settings.SEED if seed is None else seed
    steps = RECIPES[name]
    return [
        ExperimentConfig(
            kind=step.kind,
            inputs=step.inputs,
            params=step.params,
            out=str(root / name / (f"{i + 1}-{step.kind}" if len(steps) > 1 else step.kind)),
            seed=seed,
            source=f"recipe:{name}",
        )
        for i, step in enumerate(steps)
    ]


def run_recipe(name: str, out: Optional[str] = None, seed: Optional[int] = None) -> List[RunResult]:
    """Run every step of a recipe and check its expected outcome."""
    results = []
    configs = recipe_configs(name, out, seed)
    for i, (step, config) in enumerate(zip(RECIPES[name], configs), 1):
        logger.info(f"Step {i}: {name} runs a {step.kind} experiment")
        result = run(config)
        failure = step.check(result.summary)
        if failure:
            logger.error(f"Error in recipe {name}: {failure}")
            raise CertificateViolation(f"recipe {name} step {i} ({step.kind}): {failure}")
        results.append(result)
    logger.info(f"Recipe {name} reproduced its expected outcome in {len(results)} step(s)")
    return results
