"""Runs one ExperimentConfig end to end and writes its CSV reports."""

import logging
import re
from pathlib import Path
from typing import Callable, Dict, List, Optional

from soficlab.config import settings
from soficlab.exceptions import BudgetExceededError, InvalidParameterError
from soficlab.models.experiment import ExperimentConfig, RunResult
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.services import reports
from soficlab.services.cellular_automaton import CellularAutomatonService
from soficlab.services.certificates import CertificateChecker
from soficlab.services.file_formats import dump_approximation, load_rule, load_subshift
from soficlab.services.group_model import ball, box
from soficlab.services.reports import ReportWriter
from soficlab.services.sofic_approx import ApproximationBuilder
from soficlab.services.sofic_entropy import EntropyEstimator
from soficlab.services.stirling_bounds import TailBoundVerifier

logger = logging.getLogger(__name__)

Handler = Callable[[ExperimentConfig, ReportWriter], Dict[str, object]]


# -- parameter parsing -------------------------------------------------------

def int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise InvalidParameterError(f"expected a comma-separated list of integers, got {text!r}")


def flag(text: Optional[str]) -> bool:
    return (text or "").strip().lower() in ("1", "true", "yes", "on")


def subset(group: GroupModel, text: str) -> FiniteSubset:
    """`ball:N`, `box:N` (the cube [-N, N]^r) or an element list.

    Elements are separated by whitespace or `;`. Over Z and the free groups a
    comma separates elements too; over Z^r it joins the coordinates of one
    element, e.g. `0,0 0,1` or `(0,0),(0,1)`.
    """
    text = text.strip()
    kind, sep, arg = text.partition(":")
    if sep and kind in ("ball", "box") and arg.isdigit():
        n = int(arg)
        if kind == "ball":
            return ball(group, n)
        return box(group, (-n,) * group.rank, (n,) * group.rank)
    if group.kind == "lattice" and group.rank > 1:
        tokens = [t.strip(",") for t in re.findall(r"\([^)]*\)|[^\s;()]+", text) if t.strip(",")]
    else:
        tokens = [t for t in re.split(r"[\s,;]+", text) if t]
    if not tokens:
        raise InvalidParameterError(f"empty element list {text!r}")
    return FiniteSubset(model=group, elements=[group.parse_element(t) for t in tokens])


def _words(text: str) -> List[str]:
    return text.replace(",", " ").split()


# -- handlers ------------------------------------------------------------------

def _entropy(config: ExperimentConfig, writer: ReportWriter) -> Dict[str, object]:
    params = config.effective_params()
    subshift = load_subshift(config.inputs["subshift"])
    estimator = EntropyEstimator(
        params["epsilon"], params["delta"], mode=params["mode"], perturb=flag(params.get("perturb"))
    )
    ds = int_list(params["d"])
    estimate = estimator.estimate(subshift, ds)
    writer.write("entropy", reports.ENTROPY_FIELDS, reports.entropy_rows(estimate), primary=True)
    summary = {"lower": estimate.lower, "upper": estimate.upper, "oracle": estimate.exact_oracle}
    if "plateau" in params:
        d = ds[-1]
        rows = [
            {"d": d, "epsilon": eps, "separated": count, "rate": rate}
            for eps, count, rate in estimator.plateau(subshift, d, _words(params["plateau"]))
        ]
        writer.write("plateau", ("d", "epsilon", "separated", "rate"), rows)
        summary["plateau_spread"] = max(r["rate"] for r in rows) - min(r["rate"] for r in rows)
    return summary


def _gap(config: ExperimentConfig, writer: ReportWriter) -> Dict[str, object]:
    params = config.effective_params()
    x = load_subshift(config.inputs["x"])
    y = load_subshift(config.inputs["y"])
    estimator = EntropyEstimator(params["epsilon"], params["delta"])
    report = estimator.gap(x, y, int_list(params["d"]), margin=float(params["margin"]))
    writer.write("gap", reports.GAP_FIELDS, reports.gap_rows(report), primary=True)
    return {"verdict": report.verdict, "gap": report.gap, "lower_x": report.lower_x, "upper_y": report.upper_y}


def _sweep(config: ExperimentConfig, writer: ReportWriter) -> Dict[str, object]:
    params = config.effective_params()
    subshift = load_subshift(config.inputs["subshift"])
    memory = subset(subshift.group, params["memory"])
    service = CellularAutomatonService(threads=settings.THREADS, sweep_budget=int(params["budget"]))
    try:
        report = service.sweep(subshift, memory)
    except BudgetExceededError as e:
        if e.partial is not None:
            writer.write("sweep", reports.SWEEP_FIELDS, reports.sweep_rows(e.partial), primary=True)
        logger.error(f"Error in sweep over {subshift.label()}: {str(e)}")
        raise
    writer.write("sweep", reports.SWEEP_FIELDS, reports.sweep_rows(report), primary=True)
    return {
        "rules": report.total_rules,
        "preserving": report.preserving,
        "injective": report.injective,
        "surjective": report.surjective,
        "violations": len(report.violations),
    }


def _decide(config: ExperimentConfig, writer: ReportWriter) -> Dict[str, object]:
    subshift = load_subshift(config.inputs["subshift"])
    rule = load_rule(config.inputs["rule"])
    injective, surjective = CellularAutomatonService().decide(rule, subshift)
    rows = reports.decision_rows(injective, surjective, subshift.alphabet)
    writer.write("decide", reports.DECISION_FIELDS, rows, primary=True)
    return {
        "rule": rule.rule_index,
        "injective": injective.outcome,
        "surjective": surjective.outcome,
        "orphan": surjective.orphan_word,
    }


def _certify(config: ExperimentConfig, writer: ReportWriter) -> Dict[str, object]:
    params = config.effective_params()
    subshift = load_subshift(config.inputs["subshift"])
    delta = subset(subshift.group, params["delta"])
    checker = CertificateChecker(int(params["budget"]), margin=int(params["margin"]))
    results = checker.check(subshift, delta, params["property"])
    writer.write("certify", reports.CERTIFICATE_FIELDS, reports.certificate_rows(results, subshift.alphabet),
                 primary=True)
    return {r.property_name: r.outcome for r in results}


def _stirling(config: ExperimentConfig, writer: ReportWriter) -> Dict[str, object]:
    params = config.effective_params()
    verifier = TailBoundVerifier(
        span=int(params["span"]), factorial_max=int(params["factorial"]), identity_max=int(params["identity"])
    )
    summary: Dict[str, object] = {}
    rows = []
    for gamma in _words(params["gamma"]):
        report = verifier.verify(gamma)
        rows.extend(reports.tail_rows(report))
        summary[f"kappa({report.gamma})"] = report.kappa
        summary[f"d0({report.gamma})"] = report.d0
        summary[f"min_slack({report.gamma})"] = report.min_slack
    writer.write("tail_bound", reports.TAIL_FIELDS, rows, primary=True)

    factorial_rows = [
        {"m": m, "lower": lower, "factorial": float(exact), "upper": upper}
        for m, lower, exact, upper in verifier.factorial_chain()
    ]
    writer.write("factorial_bounds", ("m", "lower", "factorial", "upper"), factorial_rows)

    identity_max = verifier.binomial_identities(params["t"])
    summary["factorial_chain"] = f"m=1..{verifier.factorial_max}"
    summary["binomial_identity"] = f"n=0..{identity_max}, t={params['t']}"
    return summary


def _dump_path(writer: ReportWriter, target: str, kind: str, d: int, several: bool) -> Path:
    """`dump = true` names files per construction and size; any other value is a file path."""
    if flag(target):
        return writer.out_dir / f"approximation-{kind}-{d}.txt"
    path = Path(target)
    return path.with_name(f"{path.stem}-{d}{path.suffix}") if several else path


def _approx_quality(config: ExperimentConfig, writer: ReportWriter) -> Dict[str, object]:
    params = config.effective_params()
    group = GroupModel.parse(params["group"])
    support_radius = int(params["support"]) if "support" in params else None
    builder = ApproximationBuilder(group, seed=config.seed, support_radius=support_radius, threads=settings.THREADS)
    kind = params.get("construction") or builder.default_kind()
    test_set = ball(group, int(params["test"])) if "test" in params else builder.default_test_set()
    dump = params.get("dump", "")
    sizes = int_list(params["d"])
    rows = []
    summary: Dict[str, object] = {}
    for d in sizes:
        approx = builder.build(d, kind)
        report = builder.measure(approx, test_set)
        rows.extend(reports.quality_rows(report))
        summary[f"max_defect(d={d})"] = report.max_defect
        summary[f"min_separation(d={d})"] = report.min_separation
        if dump and dump.strip().lower() not in ("0", "false", "no", "off"):
            path = dump_approximation(approx, _dump_path(writer, dump, kind, d, len(sizes) > 1))
            writer.written.append(path)
    writer.write("approx_quality", reports.QUALITY_FIELDS, rows, primary=True)
    return summary


HANDLERS: Dict[str, Handler] = {
    "entropy": _entropy,
    "gap": _gap,
    "sweep": _sweep,
    "decide": _decide,
    "certify": _certify,
    "stirling": _stirling,
    "approx-quality": _approx_quality,
}


def output_dir(config: ExperimentConfig) -> Path:
    return Path(config.out) if config.out else Path(settings.OUTPUT_DIR) / config.kind


def run(config: ExperimentConfig) -> RunResult:
    """Run one experiment; reports are deterministic given (config, seed)."""
    out_dir = output_dir(config)
    writer = ReportWriter(out_dir, config.resolved(), primary_name=config.report)
    previous_seed = settings.SEED
    settings.SEED = config.seed
    try:
        logger.info(f"Running {config.kind} experiment into {out_dir}")
        summary = HANDLERS[config.kind](config, writer)
        writer.write_summary(f"{config.kind} experiment", summary)
    except Exception as e:
        logger.error(f"Error running {config.kind} experiment: {str(e)}")
        raise
    finally:
        settings.SEED = previous_seed
    return RunResult(
        status=0,
        artifacts=[str(p) for p in writer.written],
        summary={k: reports.format_value(v) for k, v in summary.items()},
    )
