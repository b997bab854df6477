"""Type-1 Mamdani fuzzy inference.

Systems are described in a small line-oriented text format::

    # comment
    var input severity 0 10
    var output treatDuration 10 60
    term severity Low tri 0 0 5
    term treatDuration Long trap 40 50 60 60
    rule IF severity IS Low AND mentalState IS High THEN treatDuration IS Short

Inference uses min for AND and implication, max for aggregation and a
discretised centroid for defuzzification.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1001


class FLSError(ValueError):
    """Base class for fuzzy system definition and inference errors."""


class FLSParseError(FLSError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class OrderingError(FLSError):
    pass


class UnknownTermError(FLSError):
    pass


class IncompleteRuleBaseError(FLSError):
    def __init__(self, message: str, point: Mapping[str, float]):
        self.point = dict(point)
        super().__init__(message)


class InferenceError(FLSError):
    pass


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular ``tri(a, b, c)`` or trapezoidal ``trap(a, b, c, d)`` set."""

    shape: str
    params: tuple[float, ...]

    def __post_init__(self):
        expected = {"tri": 3, "trap": 4}.get(self.shape)
        if expected is None:
            raise FLSError(f"unknown membership shape {self.shape!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != expected:
            raise FLSError(f"{self.shape} needs {expected} parameters, got {len(params)}")
        if not all(np.isfinite(params)):
            raise FLSError(f"non-finite parameter in {self.shape}{params}")
        if any(lo > hi for lo, hi in zip(params, params[1:])):
            raise OrderingError(f"parameters of {self.shape}{params} are not non-decreasing")
        object.__setattr__(self, "params", params)

    @classmethod
    def tri(cls, a, b, c):
        return cls("tri", (a, b, c))

    @classmethod
    def trap(cls, a, b, c, d):
        return cls("trap", (a, b, c, d))

    @property
    def corners(self) -> tuple[float, float, float, float]:
        """The (foot, shoulder, shoulder, foot) form shared by both shapes."""
        p = self.params
        if self.shape == "tri":
            return p[0], p[1], p[1], p[2]
        return p

    @property
    def support(self) -> tuple[float, float]:
        return self.params[0], self.params[-1]

    def __call__(self, x):
        return membership(self, x)

    def __str__(self):
        return f"{self.shape} " + " ".join(f"{p:g}" for p in self.params)


def membership(mf: MembershipFunction, x):
    """Degree of ``x`` in ``mf``; accepts scalars or numpy arrays."""
    a, b, c, d = mf.corners
    xs = np.asarray(x, dtype=float)
    out = np.zeros_like(xs)
    if b > a:
        rising = (xs > a) & (xs < b)
        out = np.where(rising, (xs - a) / (b - a), out)
    out = np.where((xs >= b) & (xs <= c), 1.0, out)
    if d > c:
        falling = (xs > c) & (xs < d)
        out = np.where(falling, (d - xs) / (d - c), out)
    if np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    lo: float
    hi: float
    terms: Mapping[str, MembershipFunction] = field(default_factory=dict)

    def __post_init__(self):
        if not self.lo < self.hi:
            raise OrderingError(f"variable {self.name}: universe [{self.lo}, {self.hi}] is empty")
        for term, mf in self.terms.items():
            lo, hi = mf.support
            if lo < self.lo or hi > self.hi:
                raise FLSError(
                    f"variable {self.name}: term {term} support [{lo:g}, {hi:g}] "
                    f"leaves universe [{self.lo:g}, {self.hi:g}]"
                )

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def clamp(self, x: float) -> float:
        return min(max(float(x), self.lo), self.hi)

    def breakpoints(self) -> list[float]:
        pts = {self.lo, self.hi}
        for mf in self.terms.values():
            pts.update(p for p in mf.params if self.lo <= p <= self.hi)
        return sorted(pts)


def fuzzify(var: LinguisticVariable, x: float) -> dict[str, float]:
    """Membership degree of ``x`` in every term of ``var``.

    Callers clamp ``x`` into the universe first; anything outside is a
    contract violation.
    """
    if not var.lo <= x <= var.hi:
        raise InferenceError(f"{var.name}={x} is outside [{var.lo:g}, {var.hi:g}]; clamp first")
    return {name: membership(mf, x) for name, mf in var.terms.items()}


@dataclass(frozen=True)
class Rule:
    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]
    line: int | None = None

    def __str__(self):
        ante = " AND ".join(f"{v} IS {t}" for v, t in self.antecedents)
        return f"IF {ante} THEN {self.consequent[0]} IS {self.consequent[1]}"


@dataclass(frozen=True)
class AggregatedOutput:
    """Max of the consequent sets, each clipped at its rule's firing strength."""

    variable: LinguisticVariable
    activations: tuple[tuple[float, MembershipFunction], ...]

    def degree(self, y):
        ys = np.asarray(y, dtype=float)
        out = np.zeros_like(ys)
        for strength, mf in self.activations:
            if strength > 0.0:
                out = np.maximum(out, np.minimum(strength, membership(mf, ys)))
        if np.ndim(y) == 0:
            return float(out)
        return out

    @property
    def is_empty(self) -> bool:
        return all(s <= 0.0 for s, _ in self.activations)


@dataclass(frozen=True)
class FuzzySystem:
    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    rules: tuple[Rule, ...]
    resolution: int = DEFAULT_RESOLUTION
    name: str = ""

    def __post_init__(self):
        if not self.rules:
            raise FLSError("a fuzzy system needs at least one rule")
        if self.resolution < 3:
            raise FLSError("resolution must be at least 3")
        names = [v.name for v in self.inputs]
        if len(set(names)) != len(names) or self.output.name in names:
            raise FLSError("variable names must be unique")
        by_name = {v.name: v for v in self.inputs}
        for rule in self.rules:
            where = f" (line {rule.line})" if rule.line is not None else ""
            seen = set()
            for var, term in rule.antecedents:
                if var not in by_name:
                    raise UnknownTermError(f"rule '{rule}'{where}: unknown input variable {var!r}")
                if term not in by_name[var].terms:
                    raise UnknownTermError(f"rule '{rule}'{where}: unknown term {term!r} of {var}")
                if var in seen:
                    raise FLSError(f"rule '{rule}'{where}: {var} appears twice")
                seen.add(var)
            var, term = rule.consequent
            if var != self.output.name:
                raise UnknownTermError(f"rule '{rule}'{where}: consequent must use output {self.output.name!r}")
            if term not in self.output.terms:
                raise UnknownTermError(f"rule '{rule}'{where}: unknown term {term!r} of {var}")
        used = {v for rule in self.rules for v, _ in rule.antecedents}
        for name in names:
            if name not in used:
                raise FLSError(f"input variable {name!r} is not used by any rule")

    @property
    def input_names(self) -> list[str]:
        return [v.name for v in self.inputs]

    def infer(self, **inputs: float) -> float:
        return infer(self, inputs)

    def describe(self) -> str:
        lines = []
        for kind, var in [("input", v) for v in self.inputs] + [("output", self.output)]:
            lines.append(f"{kind} {var.name} [{var.lo:g}, {var.hi:g}]")
            for term, mf in var.terms.items():
                lines.append(f"  {term}: {mf}")
        lines.append(f"{len(self.rules)} rules")
        for rule in self.rules:
            lines.append(f"  {rule}")
        return "\n".join(lines)


def _firing_strengths(fs: FuzzySystem, inputs: Mapping[str, float]) -> list[float]:
    degrees = {}
    for var in fs.inputs:
        if var.name not in inputs:
            raise InferenceError(f"missing input {var.name!r}")
        degrees[var.name] = fuzzify(var, var.clamp(inputs[var.name]))
    return [min(degrees[v][t] for v, t in rule.antecedents) for rule in fs.rules]


def evaluate_rules(fs: FuzzySystem, inputs: Mapping[str, float]) -> AggregatedOutput:
    strengths = _firing_strengths(fs, inputs)
    activations = tuple(
        (s, fs.output.terms[rule.consequent[1]]) for s, rule in zip(strengths, fs.rules)
    )
    return AggregatedOutput(fs.output, activations)


def defuzzify_centroid(agg: AggregatedOutput, universe: tuple[float, float], resolution: int = DEFAULT_RESOLUTION) -> float:
    if resolution < 3:
        raise FLSError("resolution must be at least 3")
    lo, hi = universe
    ys = np.linspace(lo, hi, resolution)
    mu = agg.degree(ys)
    total = mu.sum()
    if total <= 0.0:
        logger.warning("no-rule-fired: %s falls back to universe midpoint", agg.variable.name)
        return (lo + hi) / 2.0
    crisp = float((ys * mu).sum() / total)
    return min(max(crisp, lo), hi)


def infer(fs: FuzzySystem, inputs: Mapping[str, float]) -> float:
    agg = evaluate_rules(fs, inputs)
    return defuzzify_centroid(agg, (fs.output.lo, fs.output.hi), fs.resolution)


def coverage_grid(fs: FuzzySystem) -> list[list[float]]:
    """Per-input probe points: every breakpoint plus the midpoints between them.

    Memberships are linear between consecutive breakpoints, so a rule base
    that fires at all of these points fires everywhere in the input box.
    """
    axes = []
    for var in fs.inputs:
        bps = var.breakpoints()
        mids = [(a + b) / 2.0 for a, b in zip(bps, bps[1:])]
        axes.append(sorted(set(bps) | set(mids)))
    return axes


def check_completeness(fs: FuzzySystem) -> None:
    names = fs.input_names
    for point in itertools.product(*coverage_grid(fs)):
        inputs = dict(zip(names, point))
        if max(_firing_strengths(fs, inputs)) <= 0.0:
            where = ", ".join(f"{k}={v:g}" for k, v in inputs.items())
            raise IncompleteRuleBaseError(f"incomplete rule base: no rule fires at {where}", inputs)


def _parse_number(token: str, line: int, col: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FLSParseError(f"expected a number, got {token!r}", line, col) from None
    if not np.isfinite(value):
        raise FLSParseError(f"non-finite number {token!r}", line, col)
    return value


def _tokens(text: str):
    """Yield (token, column) pairs with 1-based columns."""
    col = 0
    for tok in text.split():
        col = text.index(tok, col)
        yield tok, col + 1
        col += len(tok)


def load_fls_definition(text: str, name: str = "", check: bool = True) -> FuzzySystem:
    inputs: dict[str, dict] = {}
    output: dict | None = None
    raw_rules: list[tuple[int, list[tuple[str, int]]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = list(_tokens(line))
        if not toks:
            continue
        keyword, kcol = toks[0]
        if keyword == "var":
            if len(toks) != 5:
                raise FLSParseError("expected 'var input|output <name> <lo> <hi>'", lineno, kcol)
            (kind, kindcol), (vname, ncol) = toks[1], toks[2]
            if kind not in ("input", "output"):
                raise FLSParseError(f"expected 'input' or 'output', got {kind!r}", lineno, kindcol)
            if vname in inputs or (output is not None and output["name"] == vname):
                raise FLSParseError(f"variable {vname!r} defined twice", lineno, ncol)
            lo = _parse_number(toks[3][0], lineno, toks[3][1])
            hi = _parse_number(toks[4][0], lineno, toks[4][1])
            entry = {"name": vname, "lo": lo, "hi": hi, "terms": {}, "line": lineno}
            if kind == "output":
                if output is not None:
                    raise FLSParseError("only one output variable per file", lineno, kindcol)
                output = entry
            else:
                inputs[vname] = entry
        elif keyword == "term":
            if len(toks) < 4:
                raise FLSParseError("expected 'term <var> <name> tri a b c | trap a b c d'", lineno, kcol)
            (vname, vcol), (tname, tcol), (shape, scol) = toks[1:4]
            var = inputs.get(vname) or (output if output and output["name"] == vname else None)
            if var is None:
                raise UnknownTermError(f"line {lineno}, column {vcol}: term {tname!r} refers to undefined variable {vname!r}")
            if tname in var["terms"]:
                raise FLSParseError(f"term {tname!r} of {vname} defined twice", lineno, tcol)
            if shape not in ("tri", "trap"):
                raise FLSParseError(f"unknown shape {shape!r}, expected tri or trap", lineno, scol)
            params = [_parse_number(tok, lineno, c) for tok, c in toks[4:]]
            try:
                mf = MembershipFunction(shape, tuple(params))
            except FLSError as exc:
                raise type(exc)(f"line {lineno}, column {scol}: term {vname}.{tname}: {exc}") from None
            var["terms"][tname] = mf
        elif keyword == "rule":
            raw_rules.append((lineno, toks[1:]))
        else:
            raise FLSParseError(f"unknown keyword {keyword!r}", lineno, kcol)

    if output is None:
        raise FLSParseError("no output variable defined")
    if not inputs:
        raise FLSParseError("no input variable defined")

    rules = [_parse_rule(lineno, toks) for lineno, toks in raw_rules]

    def build(entry):
        try:
            return LinguisticVariable(entry["name"], entry["lo"], entry["hi"], dict(entry["terms"]))
        except FLSError as exc:
            raise type(exc)(f"line {entry['line']}: {exc}") from None

    fs = FuzzySystem(
        inputs=tuple(build(e) for e in inputs.values()),
        output=build(output),
        rules=tuple(rules),
        name=name,
    )
    if check:
        check_completeness(fs)
    return fs


def _parse_rule(lineno: int, toks: Sequence[tuple[str, int]]) -> Rule:
    words = [t for t, _ in toks]
    cols = [c for _, c in toks]

    def expect(i, word):
        if i >= len(words) or words[i] != word:
            got = words[i] if i < len(words) else "end of line"
            raise FLSParseError(f"expected {word!r}, got {got!r}", lineno, cols[i] if i < len(cols) else None)

    def clause(i):
        if i + 2 >= len(words):
            raise FLSParseError("incomplete '<var> IS <term>' clause", lineno, cols[i] if i < len(cols) else None)
        expect(i + 1, "IS")
        return (words[i], words[i + 2]), i + 3

    expect(0, "IF")
    antecedents = []
    pair, i = clause(1)
    antecedents.append(pair)
    while i < len(words) and words[i] == "AND":
        pair, i = clause(i + 1)
        antecedents.append(pair)
    expect(i, "THEN")
    consequent, i = clause(i + 1)
    if i != len(words):
        raise FLSParseError(f"unexpected {words[i]!r} after consequent", lineno, cols[i])
    return Rule(tuple(antecedents), consequent, line=lineno)


def load_fls_file(path) -> FuzzySystem:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_fls_definition(text, name=str(path))


SHIPPED_FLS = ("doctor", "robot", "visitor_propensity", "visitor_duration")


def shipped_fls_text(name: str) -> str:
    if name not in SHIPPED_FLS:
        raise KeyError(f"no shipped fuzzy system named {name!r}")
    return resources.files("wardsim.data").joinpath(f"{name}.fls").read_text(encoding="utf-8")


def load_shipped(name: str) -> FuzzySystem:
    return load_fls_definition(shipped_fls_text(name), name=f"{name}.fls")
