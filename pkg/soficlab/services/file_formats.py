"""Line-based text formats for subshifts, local rules, approximation tables and experiment configs.

Every format is a sequence of `key = value` lines; blank lines and lines
starting with `#` are ignored. Patterns are written as words of one-character
symbols read in the order the memory line lists its elements, so a file
author never has to know the internal sort order.
"""

import logging
from itertools import product
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

from soficlab.config import settings
from soficlab.exceptions import InvalidParameterError, ParseError, SoficLabError
from soficlab.models.automaton import LocalRule
from soficlab.models.experiment import ExperimentConfig
from soficlab.models.group import FiniteSubset, GroupModel
from soficlab.models.shift import Alphabet, Subshift
from soficlab.models.sofic import SoficApproximation
from soficlab.services.cellular_automaton import shift_rule, weiss_rule
from soficlab.services.shift_space import preset

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Line = Tuple[int, str]

INPUT_ROLES = ("subshift", "x", "y", "rule")


def _lines(path: PathLike) -> Iterator[Line]:
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            yield number, raw


def _key_value(path: PathLike, number: int, raw: str, expected: str) -> Tuple[str, str]:
    key, sep, value = raw.partition("=")
    if not sep or not key.strip():
        raise ParseError(str(path), number, raw, expected)
    return key.strip(), value.strip()


class _Header:
    """Collects the group/alphabet/memory declarations shared by subshift and rule files."""

    def __init__(self, path: PathLike):
        self.path = str(path)
        self.group: Optional[GroupModel] = None
        self.alphabet: Optional[Alphabet] = None
        self.memory_order: List[Tuple[int, ...]] = []
        self.memory: Optional[FiniteSubset] = None

    def read(self, key: str, value: str, number: int, raw: str) -> bool:
        try:
            if key == "group":
                self.group = GroupModel.parse(value)
            elif key == "alphabet":
                symbols = tuple(value.split())
                if any(len(s) != 1 for s in symbols):
                    raise ParseError(self.path, number, raw, "alphabet = <one-character symbols separated by spaces>")
                self.alphabet = Alphabet(symbols=symbols)
            elif key == "memory":
                group = self.group or GroupModel.lattice(1)
                elements = [group.parse_element(token) for token in value.split()]
                self.memory_order = [g.payload for g in elements]
                self.memory = FiniteSubset(model=group, elements=elements)
                if len(self.memory) != len(self.memory_order):
                    raise ParseError(self.path, number, raw, "memory = <distinct group elements>")
            else:
                return False
        except ParseError:
            raise
        except SoficLabError as e:
            raise ParseError(self.path, number, raw, f"{key} declaration ({e})")
        return True

    def require(self, number: int) -> None:
        for key in ("alphabet", "memory"):
            if getattr(self, key) is None:
                raise ParseError(self.path, number, "", f"a `{key} = ...` line before any pattern")
        if self.group is None:
            self.group = GroupModel.lattice(1)
        if self.memory.model != self.group:
            raise ParseError(self.path, number, "", "the group line before the memory line")

    def word(self, text: str, number: int, raw: str) -> Tuple[int, ...]:
        """Pattern word in file order, returned in sorted memory order."""
        if len(text) != len(self.memory_order):
            raise ParseError(self.path, number, raw, f"a pattern of {len(self.memory_order)} symbols")
        by_payload = {}
        for payload, ch in zip(self.memory_order, text):
            if ch not in self.alphabet.symbols:
                raise ParseError(self.path, number, raw, f"symbols from {{{', '.join(self.alphabet.symbols)}}}")
            by_payload[payload] = self.alphabet.symbols.index(ch)
        return tuple(by_payload[p] for p in self.memory.payloads)


# -- subshifts ---------------------------------------------------------------

def parse_subshift_file(path: PathLike) -> Subshift:
    header = _Header(path)
    name = ""
    admissible: List[Tuple[int, ...]] = []
    seen = set()
    last = 0
    for number, raw in _lines(path):
        last = number
        key, value = _key_value(path, number, raw, "key = value")
        if header.read(key, value, number, raw):
            continue
        if key == "name":
            name = value
        elif key == "admissible":
            header.require(number)
            for token in value.split():
                word = header.word(token, number, raw)
                if word in seen:
                    logger.warning(f"{path}:{number}: duplicate admissible pattern {token} ignored")
                    continue
                seen.add(word)
                admissible.append(word)
        else:
            raise ParseError(str(path), number, raw, "one of name, group, alphabet, memory, admissible")
    header.require(last + 1)
    try:
        subshift = Subshift(
            name=name, alphabet=header.alphabet, group=header.group, memory=header.memory, admissible=admissible
        )
    except SoficLabError as e:
        raise ParseError(str(path), last, "", f"a valid subshift ({e})")
    logger.debug(f"Parsed {subshift.label()} from {path}: {len(subshift.admissible)} admissible patterns")
    return subshift


def serialize_subshift(subshift: Subshift) -> str:
    group = subshift.group
    lines = []
    if subshift.name:
        lines.append(f"name = {subshift.name}")
    lines.append(f"group = {group.declaration()}")
    lines.append(f"alphabet = {' '.join(subshift.alphabet.symbols)}")
    lines.append(f"memory = {' '.join(group.format(g) for g in subshift.memory.elements)}")
    words = [subshift.alphabet.decode(p) for p in subshift.admissible]
    for start in range(0, len(words), 16):
        lines.append(f"admissible = {' '.join(words[start:start + 16])}")
    return "\n".join(lines) + "\n"


# -- local rules -------------------------------------------------------------

def parse_rule_file(path: PathLike) -> LocalRule:
    """Read `pattern -> symbol` lines; every pattern of A^S must appear exactly once."""
    header = _Header(path)
    outputs: Dict[Tuple[int, ...], int] = {}
    last = 0
    for number, raw in _lines(path):
        last = number
        if "->" in raw:
            header.require(number)
            lhs, _, rhs = raw.partition("->")
            lhs, rhs = lhs.strip(), rhs.strip()
            if len(rhs) != 1 or rhs not in header.alphabet.symbols:
                raise ParseError(str(path), number, raw, "pattern -> <one alphabet symbol>")
            word = header.word(lhs, number, raw)
            symbol = header.alphabet.symbols.index(rhs)
            if word in outputs and outputs[word] != symbol:
                raise ParseError(str(path), number, raw, f"a single output for pattern {lhs}")
            outputs[word] = symbol
            continue
        key, value = _key_value(path, number, raw, "key = value or pattern -> symbol")
        if not header.read(key, value, number, raw):
            raise ParseError(str(path), number, raw, "one of group, alphabet, memory or a pattern -> symbol line")
    header.require(last + 1)
    size = len(header.alphabet)
    table = []
    for word in product(range(size), repeat=len(header.memory)):
        if word not in outputs:
            by_sorted = dict(zip(header.memory.payloads, word))
            shown = header.alphabet.decode(by_sorted[p] for p in header.memory_order)
            raise ParseError(str(path), last + 1, "", f"a line `{shown} -> symbol` (the rule must be total)")
        table.append(outputs[word])
    return LocalRule(alphabet_size=size, memory=header.memory, table=tuple(table))


def serialize_rule(rule: LocalRule, alphabet: Optional[Alphabet] = None) -> str:
    alphabet = alphabet or Alphabet(symbols=tuple(str(i) for i in range(rule.alphabet_size)))
    if len(alphabet) != rule.alphabet_size:
        raise InvalidParameterError("alphabet size does not match the rule")
    group = rule.memory.model
    lines = [
        f"group = {group.declaration()}",
        f"alphabet = {' '.join(alphabet.symbols)}",
        f"memory = {' '.join(group.format(g) for g in rule.memory.elements)}",
    ]
    for word, value in zip(product(range(rule.alphabet_size), repeat=len(rule.memory)), rule.table):
        lines.append(f"{alphabet.decode(word)} -> {alphabet.symbols[value]}")
    return "\n".join(lines) + "\n"


# -- approximation tables ----------------------------------------------------

def dump_approximation(approx: SoficApproximation, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    group = approx.group
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"group = {group.declaration()}\n")
        f.write(f"construction = {approx.construction}\n")
        f.write(f"d = {approx.d}\n")
        if approx.seed is not None:
            f.write(f"seed = {approx.seed}\n")
        for g, row in zip(approx.support.elements, approx.table):
            f.write(f"{group.format(g)} : {' '.join(str(v) for v in row)}\n")
    logger.info(f"Approximation table ({approx.tag}, d={approx.d}) written to {path}")
    return path


def parse_approximation_file(path: PathLike) -> SoficApproximation:
    header: Dict[str, str] = {}
    elements, rows = [], []
    group: Optional[GroupModel] = None
    last = 0
    for number, raw in _lines(path):
        last = number
        if ":" in raw and "=" not in raw:
            if group is None:
                raise ParseError(str(path), number, raw, "a `group = ...` line before the table")
            lhs, _, rhs = raw.partition(" : ")
            try:
                elements.append(group.parse_element(lhs))
                rows.append(tuple(int(v) for v in rhs.split()))
            except (SoficLabError, ValueError):
                raise ParseError(str(path), number, raw, "element : image image ...")
            continue
        key, value = _key_value(path, number, raw, "key = value or element : images")
        if key not in ("group", "construction", "d", "seed"):
            raise ParseError(str(path), number, raw, "one of group, construction, d, seed")
        header[key] = value
        if key == "group":
            try:
                group = GroupModel.parse(value)
            except SoficLabError:
                raise ParseError(str(path), number, raw, "group = lattice:N | free:N | cyclic:N")
    for key in ("group", "construction", "d"):
        if key not in header:
            raise ParseError(str(path), last + 1, "", f"a `{key} = ...` header line")
    # Rows follow the sorted support order once the subset is normalised.
    order = {g.payload: row for g, row in zip(elements, rows)}
    support = FiniteSubset(model=group, elements=elements)
    try:
        return SoficApproximation(
            group=group,
            d=int(header["d"]),
            construction=header["construction"],
            seed=int(header["seed"]) if "seed" in header else None,
            support=support,
            table=tuple(order[g.payload] for g in support.elements),
        )
    except (SoficLabError, ValueError) as e:
        raise ParseError(str(path), last, "", f"a consistent approximation table ({e})")


# -- experiment configs --------------------------------------------------------

def load_subshift(ref: str) -> Subshift:
    """Resolve `preset:NAME` or a subshift file path."""
    if ref.startswith("preset:"):
        return preset(ref[len("preset:"):])
    return parse_subshift_file(ref)


def load_rule(ref: str) -> LocalRule:
    if ref.startswith("preset:"):
        name = ref[len("preset:"):]
        if name == "weiss":
            return weiss_rule()
        if name.startswith("shift"):
            _, _, k = name.partition(":k=")
            return shift_rule(int(k) if k.isdigit() else 2)
        raise InvalidParameterError(f"unknown rule preset {name!r}")
    return parse_rule_file(ref)


def parse_experiment_file(path: PathLike) -> ExperimentConfig:
    """Read an experiment config; relative input paths resolve against the file's directory."""
    base = Path(path).resolve().parent
    values: Dict[str, str] = {}
    for number, raw in _lines(path):
        key, value = _key_value(path, number, raw, "key = value")
        if key in values:
            raise ParseError(str(path), number, raw, f"a single `{key}` line")
        values[key] = value
    if "kind" not in values:
        raise ParseError(str(path), 1, "", "a `kind = ...` line")
    kind = values.pop("kind")
    inputs = {}
    for role in INPUT_ROLES:
        if role in values:
            ref = values.pop(role)
            inputs[role] = ref if ref.startswith("preset:") or Path(ref).is_absolute() else str(base / ref)
    seed = values.pop("seed", str(settings.SEED))
    out = values.pop("out", None)
    report = values.pop("report", None)
    try:
        return ExperimentConfig(
            kind=kind, inputs=inputs, params=values, out=out, report=report, seed=int(seed), source=str(path)
        )
    except (SoficLabError, ValueError) as e:
        raise ParseError(str(path), 1, "", f"a valid experiment config ({e})")
