"""Hybrid automata, their quantized-state form, and the guard algebra.

Guards are trees of :class:`Atom` (``var op constant``), :class:`And` and
:class:`Or`.  There is no negation node; a negated atom is written by
reversing its comparator.  Atom constants are exact rationals so that
guard text round-trips; they become floats only when the level-crossing
matrix is built.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .expr import Expr, mark_quantized, variables as expr_variables

COMPARATORS = (">=", "<=", ">", "<")
REVERSED = {">=": "<", "<=": ">", ">": "<=", "<": ">="}


class ModelError(ValueError):
    pass


class GuardSyntaxError(ModelError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


@dataclass(frozen=True)
class Atom:
    var: str
    op: str
    constant: Fraction

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise ModelError(f"unknown comparator {self.op!r}")
        if not isinstance(self.constant, Fraction):
            object.__setattr__(self, "constant", to_fraction(self.constant))

    @property
    def level(self) -> float:
        return float(self.constant)

    def negated(self) -> "Atom":
        return Atom(self.var, REVERSED[self.op], self.constant)


@dataclass(frozen=True)
class And:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class Or:
    left: "Guard"
    right: "Guard"


Guard = Union[Atom, And, Or]


def to_fraction(value) -> Fraction:
    """Exact rational from a decimal literal, int, float or Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ModelError(f"guard constant must be finite, got {value}")
        return Fraction(repr(value))
    return Fraction(value)


def atoms(g: Guard) -> Iterator[Atom]:
    if isinstance(g, Atom):
        yield g
    else:
        yield from atoms(g.left)
        yield from atoms(g.right)


def guard_variables(g: Guard) -> set[str]:
    return {a.var for a in atoms(g)}


def equality(var: str, constant) -> And:
    """``var = c`` as the closed band ``var >= c & var <= c``."""
    c = to_fraction(constant)
    return And(Atom(var, ">=", c), Atom(var, "<=", c))


# -- evaluation -------------------------------------------------------------


def eval_atom(a: Atom, valuation: Mapping[str, float], tol: float = 0.0, closed: bool = False) -> bool:
    """Evaluate one atom.

    With ``tol > 0`` non-strict comparators accept values within ``tol``
    of the level and strict comparators require clearing it by ``tol``.
    With ``closed`` strict comparators are read as their non-strict
    closure, so boundary points within ``tol`` are accepted too.
    """
    try:
        x = valuation[a.var]
    except KeyError:
        raise ModelError(f"valuation has no value for {a.var!r}") from None
    c = a.level
    if closed and a.op in (">", "<"):
        return x >= c - tol if a.op == ">" else x <= c + tol
    if a.op == ">=":
        return x >= c - tol
    if a.op == "<=":
        return x <= c + tol
    if a.op == ">":
        return x > c + tol
    return x < c - tol


def eval_guard(g: Guard, valuation: Mapping[str, float], tol: float = 0.0, closed: bool = False) -> bool:
    if isinstance(g, Atom):
        return eval_atom(g, valuation, tol, closed)
    # evaluate both sides so a missing variable is always reported
    left = eval_guard(g.left, valuation, tol, closed)
    right = eval_guard(g.right, valuation, tol, closed)
    return (left and right) if isinstance(g, And) else (left or right)


def guard_to_dnf(g: Guard) -> list[list[Atom]]:
    """Disjunctive normal form; duplicates are kept."""
    if isinstance(g, Atom):
        return [[g]]
    if isinstance(g, Or):
        return guard_to_dnf(g.left) + guard_to_dnf(g.right)
    return [l + r for l in guard_to_dnf(g.left) for r in guard_to_dnf(g.right)]


# -- text form --------------------------------------------------------------

_GUARD_TOKEN = re.compile(
    r"\s*(?:(?P<NUMBER>-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<NAME>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<OP>>=|<=|==|=|>|<|&|\||\(|\)))"
)


def parse_guard(text: str, constants: Mapping[str, float] | None = None) -> Guard:
    """Parse ``var op number`` atoms joined by ``&`` and ``|``.

    ``&`` binds tighter than ``|``.  ``number op var`` is accepted and
    flipped, ``var == c`` expands to a closed band, and names found in
    ``constants`` may stand for the number.
    """
    constants = constants or {}
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _GUARD_TOKEN.match(text, pos)
        if m is None:
            raise GuardSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(("END", "", len(text)))
    i = 0

    def tok():
        return tokens[i]

    def number(kind, value, where) -> Fraction:
        if kind == "NUMBER":
            return Fraction(value)
        if kind == "NAME" and value in constants:
            return to_fraction(constants[value])
        raise GuardSyntaxError(f"expected a number, found {value or 'end of input'!r}", where)

    def disj() -> Guard:
        nonlocal i
        g = conj()
        while tok()[1] == "|":
            i += 1
            g = Or(g, conj())
        return g

    def conj() -> Guard:
        nonlocal i
        g = primary()
        while tok()[1] == "&":
            i += 1
            g = And(g, primary())
        return g

    def primary() -> Guard:
        nonlocal i
        kind, value, where = tok()
        if value == "(" and kind == "OP":
            i += 1
            g = disj()
            if tok()[1] != ")":
                raise GuardSyntaxError("expected ')'", tok()[2])
            i += 1
            return g
        if i + 2 >= len(tokens):
            raise GuardSyntaxError("incomplete comparison", where)
        (k1, v1, p1), (k2, v2, p2), (k3, v3, p3) = tokens[i : i + 3]
        if k2 != "OP" or v2 not in (*COMPARATORS, "==", "="):
            raise GuardSyntaxError(f"expected a comparator, found {v2 or 'end of input'!r}", p2)
        i += 3
        if k1 == "NAME" and v1 not in constants:
            var, op, c = v1, v2, number(k3, v3, p3)
        elif k3 == "NAME" and v3 not in constants:
            var, c = v3, number(k1, v1, p1)
            op = {">=": "<=", "<=": ">=", ">": "<", "<": ">"}.get(v2, v2)
        else:
            raise GuardSyntaxError("a comparison needs exactly one variable", p1)
        if op in ("==", "="):
            return equality(var, c)
        return Atom(var, op, c)

    g = disj()
    if tok()[0] != "END":
        raise GuardSyntaxError(f"unexpected {tok()[1]!r}", tok()[2])
    return g


def _decimal_text(c: Fraction) -> str:
    den = c.denominator
    while den % 2 == 0:
        den //= 2
    while den % 5 == 0:
        den //= 5
    if den != 1:
        return repr(float(c))
    with localcontext() as ctx:
        ctx.prec = 200
        text = format(Decimal(c.numerator) / Decimal(c.denominator), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def format_guard(g: Guard) -> str:
    if isinstance(g, Atom):
        return f"{g.var} {g.op} {_decimal_text(g.constant)}"
    if isinstance(g, And):
        parts = [
            f"({format_guard(side)})" if isinstance(side, Or) or (side is g.right and isinstance(side, And)) else format_guard(side)
            for side in (g.left, g.right)
        ]
        return " & ".join(parts)
    left = format_guard(g.left)
    right = format_guard(g.right)
    if isinstance(g.right, Or):
        right = f"({right})"
    return f"{left} | {right}"


# -- automata ---------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: Guard
    resets: Mapping[str, Expr] = field(default_factory=dict)


@dataclass(frozen=True)
class HybridAutomaton:
    """Locations, variables, vector field, invariants, guarded edges."""

    name: str
    locations: tuple[str, ...]
    variables: tuple[str, ...]
    initial_location: str
    initial_valuation: Mapping[str, float]
    flows: Mapping[str, Mapping[str, Expr]]
    invariants: Mapping[str, Guard]
    edges: tuple[Edge, ...]

    def outgoing(self, location: str) -> list[tuple[int, Edge]]:
        return [(i, e) for i, e in enumerate(self.edges) if e.source == location]


@dataclass(frozen=True)
class QSHA:
    base: HybridAutomaton
    quantized_variables: tuple[str, ...]
    quantized_flows: Mapping[str, Mapping[str, Expr]]


@dataclass
class ValidationReport:
    errors: list[tuple[str, str]] = field(default_factory=list)
    well_formedness_warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        lines = [f"error [{rule}]: {msg}" for rule, msg in self.errors]
        lines += [f"warning: {msg}" for msg in self.well_formedness_warnings]
        return "\n".join(lines) or "ok"


def validate(ha: HybridAutomaton) -> ValidationReport:
    """Check the structural rules; violations are returned, not raised."""
    report = ValidationReport()
    err = lambda rule, msg: report.errors.append((rule, msg))  # noqa: E731

    locs, vars_ = set(ha.locations), set(ha.variables)
    if len(locs) != len(ha.locations):
        err("duplicate-location", "location names must be unique")
    if len(vars_) != len(ha.variables):
        err("duplicate-variable", "variable names must be unique")
    if ha.initial_location not in locs:
        err("initial-location", f"initial location {ha.initial_location!r} is not declared")

    for v in ha.variables:
        value = ha.initial_valuation.get(v)
        if value is None:
            err("initial-valuation", f"no initial value for {v!r}")
        elif not isinstance(value, (int, float)) or not math.isfinite(value):
            err("initial-valuation", f"initial value of {v!r} is not a finite real")
    for v in ha.initial_valuation:
        if v not in vars_:
            err("undeclared-variable", f"initial valuation assigns undeclared {v!r}")

    def check_expr(e: Expr, where: str):
        for name in sorted(expr_variables(e) - vars_):
            err("undeclared-variable", f"{where} reads undeclared {name!r}")

    def check_guard(g: Guard, where: str):
        for name in sorted(guard_variables(g) - vars_):
            err("undeclared-variable", f"{where} constrains undeclared {name!r}")

    for loc, flow in ha.flows.items():
        if loc not in locs:
            err("unknown-location", f"flow given for undeclared location {loc!r}")
        for v, e in flow.items():
            if v not in vars_:
                err("undeclared-variable", f"flow of {loc!r} defines undeclared {v!r}")
            check_expr(e, f"flow {loc}.{v}")
    for loc in ha.locations:
        for v in ha.variables:
            if v not in ha.flows.get(loc, {}):
                err("missing-flow", f"location {loc!r} has no flow for {v!r}")
    for loc, inv in ha.invariants.items():
        if loc not in locs:
            err("unknown-location", f"invariant given for undeclared location {loc!r}")
        check_guard(inv, f"invariant of {loc!r}")

    for i, e in enumerate(ha.edges):
        tag = f"edge {i} ({e.source}->{e.target})"
        for end in (e.source, e.target):
            if end not in locs:
                err("edge-endpoint", f"{tag} references undeclared location {end!r}")
        check_guard(e.guard, f"guard of {tag}")
        for v, r in e.resets.items():
            if v not in vars_:
                err("reset-target", f"{tag} resets undeclared {v!r}")
            check_expr(r, f"reset {v} of {tag}")

    if not report.errors:
        sources = {e.source for e in ha.edges}
        for loc in ha.locations:
            if loc not in sources:
                report.well_formedness_warnings.append(f"location {loc!r} has no outgoing edges")
        reached, frontier = {ha.initial_location}, [ha.initial_location]
        while frontier:
            here = frontier.pop()
            for e in ha.edges:
                if e.source == here and e.target not in reached:
                    reached.add(e.target)
                    frontier.append(e.target)
        for loc in ha.locations:
            if loc not in reached:
                report.well_formedness_warnings.append(f"location {loc!r} is unreachable")
    return report


def quantize(ha: HybridAutomaton) -> QSHA:
    """Mark every state-variable read in every flow as a quantized read."""
    report = validate(ha)
    if not report.ok:
        raise ModelError(f"cannot quantize an invalid automaton:\n{report}")
    qflows = {
        loc: {v: mark_quantized(e, ha.variables) for v, e in flow.items()}
        for loc, flow in ha.flows.items()
    }
    return QSHA(base=ha, quantized_variables=tuple(f"q_{v}" for v in ha.variables), quantized_flows=qflows)


# -- level crossings --------------------------------------------------------

UNCONSTRAINED: tuple[float, ...] = ()


@dataclass(frozen=True)
class LevelCrossingMatrix:
    """Boundary values of one edge guard, one row per DNF term.

    ``rows[k][v]`` holds the levels that the atoms of term ``k`` put on
    variable ``v`` (usually one; two for a closed band), or
    :data:`UNCONSTRAINED`.  ``per_variable_levels`` is the column
    projection that drives event scheduling.
    """

    edge: int
    rows: tuple[Mapping[str, tuple[float, ...]], ...]
    per_variable_levels: Mapping[str, frozenset[float]]


def level_crossing_matrix(ha: HybridAutomaton, location: str, edge: int) -> LevelCrossingMatrix:
    e = ha.edges[edge]
    if e.source != location:
        raise ModelError(f"edge {edge} leaves {e.source!r}, not {location!r}")
    rows = []
    for term in guard_to_dnf(e.guard):
        row = {v: [] for v in ha.variables}
        for a in term:
            row.setdefault(a.var, []).append(a.level)
        rows.append({v: tuple(levels) for v, levels in row.items()})
    columns = {
        v: frozenset(level for row in rows for level in row.get(v, UNCONSTRAINED))
        for v in ha.variables
    }
    return LevelCrossingMatrix(edge=edge, rows=tuple(rows), per_variable_levels=columns)


def compile_guard(g: Guard, names: tuple[str, ...] | list[str]):
    """Compile ``g`` into ``pred(values) -> bool`` over positional values."""
    index = {n: i for i, n in enumerate(names)}

    def src(node: Guard) -> str:
        if isinstance(node, Atom):
            if node.var not in index:
                raise ModelError(f"guard reads undeclared {node.var!r}")
            return f"(v[{index[node.var]}] {node.op} {node.level!r})"
        joiner = " and " if isinstance(node, And) else " or "
        return f"({src(node.left)}{joiner}{src(node.right)})"

    return eval(f"lambda v: {src(g)}", {})
