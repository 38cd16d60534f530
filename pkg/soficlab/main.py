"""Command-line entry point: `python -m soficlab <verb> ...`."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from soficlab.config import settings
from soficlab.exceptions import CertificateViolation, InvalidParameterError, SoficLabError
from soficlab.models.experiment import ExperimentConfig, RunResult
from soficlab.services.experiment_runner import run
from soficlab.services.file_formats import parse_experiment_file
from soficlab.services.recipes import RECIPES, run_recipe
from soficlab.services.reports import render_table

logger = logging.getLogger(__name__)

EXIT_ERROR = 2
EXIT_VIOLATION = 3


# Two-word forms accepted in front of the verb, e.g. `ca decide` or `entropy estimate`.
VERB_ALIASES: Dict[Tuple[str, str], str] = {
    ("ca", "decide"): "decide",
    ("ca", "sweep"): "sweep",
    ("ca", "certify"): "certify",
    ("entropy", "estimate"): "entropy",
    ("entropy", "gap"): "gap",
    ("approx", "build"): "approx",
    ("stirling", "verify"): "stirling",
}
GLOBAL_VALUE_FLAGS = ("--threads", "--seed", "--log-level", "--out")


def normalise_verbs(argv: List[str]) -> List[str]:
    """Fold a two-word verb into the single verb the parser knows."""
    argv = list(argv)
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in GLOBAL_VALUE_FLAGS:
            i += 2
            continue
        if token.startswith("-"):
            i += 1
            continue
        if i + 1 < len(argv) and (token, argv[i + 1]) in VERB_ALIASES:
            argv[i:i + 2] = [VERB_ALIASES[(token, argv[i + 1])]]
        break
    return argv


def _ref(text: str) -> str:
    """A subshift or rule argument: an existing file, `preset:NAME` or a bare preset name."""
    if text.startswith("preset:") or Path(text).is_file():
        return text
    return f"preset:{text}"


def _input(args: argparse.Namespace, name: str) -> str:
    """`--name VALUE` or the positional of the same role."""
    value = getattr(args, name, None) or getattr(args, f"{name}_arg", None)
    if value is None:
        raise InvalidParameterError(f"{args.verb} needs --{name} (or a positional {name})")
    return _ref(value)


def _params(args: argparse.Namespace, names: List[str]) -> Dict[str, str]:
    params = {}
    for name in names:
        value = getattr(args, name, None)
        if value is None or value is False:
            continue
        params[name] = "true" if value is True else str(value)
    return params


def _add_input(p: argparse.ArgumentParser, name: str, help_text: str) -> None:
    p.add_argument(f"{name}_arg", nargs="?", metavar=name.upper(), help=help_text)
    p.add_argument(f"--{name}", help=help_text)


def _add_report(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", dest="report", help="report directory, or a .csv file for the main table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soficlab", description="Sofic entropy, subshifts and cellular automata")
    parser.add_argument("--threads", type=int, default=None, help="cap on worker threads/processes")
    parser.add_argument("--seed", type=int, default=None, help="seed recorded in every report header")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--out", default=None, help="output directory for reports")
    verbs = parser.add_subparsers(dest="verb", required=True)

    p = verbs.add_parser("entropy", help="estimate sofic entropy of a subshift (also `entropy estimate`)")
    _add_input(p, "subshift", "subshift file or preset name")
    p.add_argument("--d", default="8,12,16")
    p.add_argument("--epsilon", "--eps", dest="epsilon")
    p.add_argument("--delta")
    p.add_argument("--mode", choices=["auto", "greedy", "exact"])
    p.add_argument("--perturb", action="store_true")
    p.add_argument("--plateau", help="comma-separated epsilons evaluated at the largest d")
    _add_report(p)

    p = verbs.add_parser("gap", help="entropy gap between X and a proper subsystem Y (also `entropy gap`)")
    _add_input(p, "x", "the larger subshift")
    _add_input(p, "y", "the proper subsystem")
    p.add_argument("--d", default="8,12,16,24")
    p.add_argument("--epsilon", "--eps", dest="epsilon")
    p.add_argument("--delta")
    p.add_argument("--margin")
    _add_report(p)

    p = verbs.add_parser("sweep", help="decide every rule on a memory set (also `ca sweep`)")
    _add_input(p, "subshift", "subshift file or preset name")
    p.add_argument("--memory", default="0 1", help="elements split by spaces, commas or `;` (`x,y` over Z^2)")
    p.add_argument("--budget")
    _add_report(p)

    p = verbs.add_parser("decide", help="decide injectivity and surjectivity of one rule (also `ca decide`)")
    _add_input(p, "subshift", "subshift file or preset name")
    _add_input(p, "rule", "rule file or preset name")
    _add_report(p)

    p = verbs.add_parser("certify", help="strong irreducibility and splicability certificates")
    _add_input(p, "subshift", "subshift file or preset name")
    p.add_argument("--property", choices=["both", "irreducibility", "splicable"])
    p.add_argument("--delta", default="box:1")
    p.add_argument("--budget", default="8")
    p.add_argument("--margin")
    _add_report(p)

    p = verbs.add_parser("approx", help="quality of sofic approximations (also `approx build`)")
    p.add_argument("--group", default="lattice:1")
    p.add_argument("--construction", "--kind", dest="construction",
                   choices=["cyclic", "torus", "word-extension-random"])
    p.add_argument("--d", default="64")
    p.add_argument("--test")
    p.add_argument("--support")
    p.add_argument("--dump", action="store_true")
    p.add_argument("--out", dest="report", help="report directory, a .csv file, or any other file for the table dump")

    p = verbs.add_parser("stirling", help="binomial tail and factorial bounds (also `stirling verify`)")
    p.add_argument("--gamma", default="1/4")
    p.add_argument("--span", default="500")
    p.add_argument("--factorial", default="100")
    _add_report(p)

    p = verbs.add_parser("recipe", help="run a named reproduction recipe")
    p.add_argument("name", choices=sorted(RECIPES))

    p = verbs.add_parser("run", help="run an experiment config file")
    p.add_argument("config")
    return parser


def _placement(args: argparse.Namespace) -> Tuple[Optional[str], Optional[str], Optional[str]]:
    """(output directory, main CSV name, dump file) from the global and per-verb --out."""
    report = getattr(args, "report", None)
    if not report:
        return args.out, None, None
    path = Path(report)
    if path.suffix == ".csv":
        return str(path.parent), path.name, None
    if args.verb == "approx" and path.suffix:
        return args.out or str(path.parent), None, report
    return report, None, None


def _config(args: argparse.Namespace, seed: int) -> ExperimentConfig:
    verb = args.verb
    out, report, dump = _placement(args)
    common = dict(seed=seed, out=out, report=report)
    if verb == "entropy":
        return ExperimentConfig(
            kind="entropy", inputs={"subshift": _input(args, "subshift")}, **common,
            params=_params(args, ["d", "epsilon", "delta", "mode", "perturb", "plateau"]),
        )
    if verb == "gap":
        return ExperimentConfig(
            kind="gap", inputs={"x": _input(args, "x"), "y": _input(args, "y")}, **common,
            params=_params(args, ["d", "epsilon", "delta", "margin"]),
        )
    if verb == "sweep":
        return ExperimentConfig(
            kind="sweep", inputs={"subshift": _input(args, "subshift")}, **common,
            params=_params(args, ["memory", "budget"]),
        )
    if verb == "decide":
        return ExperimentConfig(
            kind="decide", inputs={"subshift": _input(args, "subshift"), "rule": _input(args, "rule")}, **common,
        )
    if verb == "certify":
        return ExperimentConfig(
            kind="certify", inputs={"subshift": _input(args, "subshift")}, **common,
            params=_params(args, ["property", "delta", "budget", "margin"]),
        )
    if verb == "approx":
        params = _params(args, ["group", "construction", "d", "test", "support", "dump"])
        if dump:
            params["dump"] = dump
        return ExperimentConfig(kind="approx-quality", params=params, **common)
    return ExperimentConfig(kind="stirling", params=_params(args, ["gamma", "span", "factorial"]), **common)


def _print_result(result: RunResult) -> None:
    rows = [{"key": k, "value": v} for k, v in result.summary.items()]
    print(render_table(["key", "value"], rows))
    for path in result.artifacts:
        print(f"wrote {path}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(normalise_verbs(sys.argv[1:] if argv is None else argv))
    if args.log_level:
        settings.LOG_LEVEL = args.log_level
    if args.threads:
        settings.THREADS = args.threads
    if args.seed is not None:
        settings.SEED = args.seed

    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        if args.verb == "recipe":
            results = run_recipe(args.name, out=args.out, seed=settings.SEED)
        elif args.verb == "run":
            config = parse_experiment_file(args.config)
            if args.out:
                config = config.model_copy(update={"out": args.out})
            if args.seed is not None:
                config = config.model_copy(update={"seed": args.seed})
            results = [run(config)]
        else:
            results = [run(_config(args, settings.SEED))]
    except CertificateViolation as e:
        logger.error(f"Certificate violation: {str(e)}")
        return EXIT_VIOLATION
    except (SoficLabError, ValueError) as e:
        logger.error(f"Error: {str(e)}")
        return EXIT_ERROR
    for result in results:
        _print_result(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
