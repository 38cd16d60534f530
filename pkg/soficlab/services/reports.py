import csv
import io
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from soficlab.config import settings
from soficlab.models.automaton import InjectivityDecision, SurjectivityDecision, SweepReport
from soficlab.models.entropy import EntropyEstimate, GapReport
from soficlab.models.shift import CheckResult
from soficlab.models.sofic import QualityReport
from soficlab.models.stirling import TailBoundReport

logger = logging.getLogger(__name__)

Row = Dict[str, Any]


def format_value(value: Any) -> str:
    """Floats get fixed decimals so reruns diff cleanly; exact rationals stay exact."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return str(value)
        return f"{value:.{settings.FLOAT_DIGITS}f}"
    if isinstance(value, Fraction):
        return str(value)
    if value is None:
        return ""
    return str(value)


def render_csv(echo: Dict[str, str], fieldnames: Sequence[str], rows: Sequence[Row]) -> str:
    buf = io.StringIO()
    for key, value in echo.items():
        buf.write(f"# {key} = {value}\n")
    writer = csv.DictWriter(buf, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format_value(v) for k, v in row.items()})
    return buf.getvalue()


def render_table(fieldnames: Sequence[str], rows: Sequence[Row]) -> str:
    """Fixed-width text table for the terminal."""
    cells = [[format_value(row.get(f)) for f in fieldnames] for row in rows]
    widths = [max([len(f)] + [len(r[i]) for r in cells]) for i, f in enumerate(fieldnames)]
    lines = ["  ".join(f.ljust(w) for f, w in zip(fieldnames, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells)
    return "\n".join(lines)


class ReportWriter:
    """Writes the CSV reports of one run into `out_dir`, each headed by the resolved config.

    The primary table of a run goes to `primary_name` when one is given.
    """

    def __init__(self, out_dir: Path, echo: Dict[str, str], primary_name: Optional[str] = None):
        self.out_dir = Path(out_dir)
        self.echo = dict(echo)
        self.primary_name = primary_name
        self.written: List[Path] = []

    def write(self, name: str, fieldnames: Sequence[str], rows: Sequence[Row], primary: bool = False) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        filename = self.primary_name if primary and self.primary_name else f"{name}.csv"
        path = self.out_dir / filename
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(render_csv(self.echo, fieldnames, rows))
        self.written.append(path)
        logger.info(f"Report saved to: {path}")
        return path

    def write_summary(self, title: str, summary: Dict[str, Any]) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / "summary.md"
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# {title}\n\n")
            f.write("## Configuration\n")
            for key, value in self.echo.items():
                f.write(f"- **{key}:** {value}\n")
            f.write("\n## Results\n")
            for key, value in summary.items():
                f.write(f"- **{key}:** {format_value(value)}\n")
        self.written.append(path)
        logger.info(f"Summary saved to: {path}")
        return path


# -- row builders --------------------------------------------------------------

# Over Z^r the rate divides by the points of the torus, d^r.
ENTROPY_FIELDS = ("d", "|microstates|", "N_eps", "log N_eps / d", "oracle", "upper_bound", "points", "perturbed")


def entropy_rows(estimate: EntropyEstimate) -> List[Row]:
    return [
        {
            "d": row.d,
            "|microstates|": row.microstates,
            "N_eps": row.separated,
            "log N_eps / d": row.rate,
            "oracle": estimate.exact_oracle,
            "upper_bound": estimate.upper,
            "points": row.points,
            "perturbed": row.perturbed,
        }
        for row in estimate.trace
    ]


GAP_FIELDS = ("x", "y", "lower_x", "upper_y", "oracle_x", "oracle_y", "gap", "margin", "verdict", "witness")


def gap_rows(report: GapReport) -> List[Row]:
    row = report.model_dump()
    row.update(gap=report.gap, verdict=report.verdict)
    return [row]


SWEEP_FIELDS = ("index", "table", "preserves", "injective", "surjective", "orphan", "violation")


def sweep_rows(report: SweepReport) -> List[Row]:
    return [
        {
            "index": v.index,
            "table": "".join(str(s) for s in v.table),
            "preserves": v.preserves,
            "injective": v.injective,
            "surjective": v.surjective,
            "orphan": v.orphan,
            "violation": v.violates_surjunctivity,
        }
        for v in report.verdicts
    ]


DECISION_FIELDS = ("question", "outcome", "method", "evidence", "detail")


def decision_rows(injective: InjectivityDecision, surjective: SurjectivityDecision, alphabet=None) -> List[Row]:
    witness = " | ".join(x.describe(alphabet) for x in injective.witness)
    return [
        {"question": "injective", "outcome": injective.outcome, "method": injective.method,
         "evidence": witness, "detail": injective.detail},
        {"question": "surjective", "outcome": surjective.outcome, "method": surjective.method,
         "evidence": surjective.orphan_word, "detail": surjective.detail},
    ]


CERTIFICATE_FIELDS = ("property", "outcome", "delta", "budget", "exact", "margin", "cases", "counterexample", "detail")


def certificate_rows(results: Sequence[CheckResult], alphabet) -> List[Row]:
    return [
        {
            "property": r.property_name,
            "outcome": r.outcome,
            "delta": r.delta.describe(),
            "budget": r.budget,
            "exact": r.exact,
            "margin": r.margin,
            "cases": r.cases_checked,
            "counterexample": " / ".join(p.describe(alphabet) for p in r.counterexample),
            "detail": r.detail,
        }
        for r in results
    ]


QUALITY_FIELDS = ("d", "construction", "kind", "s", "t", "value")


def quality_rows(report: QualityReport) -> List[Row]:
    return [
        {"d": report.d, "construction": report.construction, "kind": kind, "s": s, "t": t, "value": float(v)}
        for kind, s, t, v in report.rows()
    ]


TAIL_FIELDS = ("gamma", "kappa", "d0", "d", "m", "log_sum", "kappa_d", "slack", "weighted_slack", "doubled_slack")


def tail_rows(report: TailBoundReport) -> List[Row]:
    return [dict(gamma=report.gamma, kappa=report.kappa, d0=report.d0, **row.model_dump()) for row in report.rows]
