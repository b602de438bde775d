"""YAML model files.

Schema::

    name: th
    description: free text            # optional
    constants: {K: 5.0, h: 30.0}      # optional, substituted everywhere
    variables: [x]
    initial:
      location: on
      valuation: {x: 20}              # numbers or expressions over constants
    locations:
      on:
        flow: {x: "K*(h - x)"}
        invariant: "x <= 22"          # optional guard text
      off:
        flow: {x: "-K*x"}
    edges:                            # declaration order breaks ties
      - {from: on, to: off, guard: "x >= 22"}
      - {from: off, to: on, guard: "x <= 18", reset: {x: "x"}}

Flows and resets use the expression grammar of :mod:`qsha.expr`; guards
use the grammar of :func:`qsha.model.parse_guard`.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Mapping

import yaml

from .expr import Const, Expr, ParseError, evaluate, parse_expression, substitute, to_text, variables
from .model import Edge, GuardSyntaxError, HybridAutomaton, format_guard, parse_guard, validate

TOP_KEYS = {"name", "description", "constants", "variables", "initial", "locations", "edges"}
LOCATION_KEYS = {"flow", "invariant"}
EDGE_KEYS = {"from", "to", "guard", "reset"}


class ModelFileError(ValueError):
    """Schema, parse or validation failure, with the offending field path."""

    def __init__(self, where: str, message: str, errors: list | None = None):
        self.where = where
        self.errors = errors or []
        super().__init__(f"{where}: {message}" if where else message)


class ModelValidationError(ModelFileError):
    pass


def _require(mapping: Any, where: str) -> Mapping:
    if not isinstance(mapping, Mapping):
        raise ModelFileError(where, f"expected a mapping, got {type(mapping).__name__}")
    return mapping


def _check_keys(mapping: Mapping, allowed: set[str], required: set[str], where: str):
    unknown = set(mapping) - allowed
    if unknown:
        raise ModelFileError(where, f"unknown keys {sorted(map(str, unknown))}")
    missing = required - set(mapping)
    if missing:
        raise ModelFileError(where, f"missing keys {sorted(missing)}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFileError(where, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ModelFileError(where, f"expected a finite number, got {value!r}")
    return value


def _expression(text: Any, constants: Mapping[str, Expr], where: str) -> Expr:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise ModelFileError(where, f"expected expression text, got {text!r}")
    try:
        e = parse_expression(text)
        return substitute(e, constants) if constants else e
    except (ParseError, ValueError) as exc:
        raise ModelFileError(where, str(exc)) from None


def model_from_dict(doc: Any) -> tuple[HybridAutomaton, dict[str, float]]:
    """Build an automaton from a parsed document; also return its constants."""
    doc = _require(doc, "")
    _check_keys(doc, TOP_KEYS, {"name", "variables", "initial", "locations", "edges"}, "")
    name = str(doc["name"])

    constants = {str(k): _number(v, f"constants.{k}") for k, v in _require(doc.get("constants") or {}, "constants").items()}
    const_exprs = {k: Const(v) for k, v in constants.items()}

    vars_ = doc["variables"]
    if not isinstance(vars_, list) or not all(isinstance(v, str) for v in vars_):
        raise ModelFileError("variables", "expected a list of names")
    clash = sorted(set(vars_) & set(constants))
    if clash:
        raise ModelFileError("variables", f"names declared both as constant and variable: {clash}")

    init = _require(doc["initial"], "initial")
    _check_keys(init, {"location", "valuation"}, {"location", "valuation"}, "initial")
    valuation = {}
    for v, raw in _require(init["valuation"], "initial.valuation").items():
        where = f"initial.valuation.{v}"
        e = _expression(raw, const_exprs, where)
        if variables(e):
            raise ModelFileError(where, f"initial value may only use constants, found {sorted(variables(e))}")
        valuation[str(v)] = evaluate(e, {})

    locations, flows, invariants = [], {}, {}
    for loc, body in _require(doc["locations"], "locations").items():
        loc = str(loc)
        where = f"locations.{loc}"
        body = _require(body, where)
        _check_keys(body, LOCATION_KEYS, {"flow"}, where)
        locations.append(loc)
        flows[loc] = {
            str(v): _expression(text, const_exprs, f"{where}.flow.{v}")
            for v, text in _require(body["flow"], f"{where}.flow").items()
        }
        if body.get("invariant") is not None:
            invariants[loc] = _guard(body["invariant"], constants, f"{where}.invariant")

    edges = []
    raw_edges = doc["edges"] or []
    if not isinstance(raw_edges, list):
        raise ModelFileError("edges", "expected a list")
    for i, raw in enumerate(raw_edges):
        where = f"edges[{i}]"
        raw = _require(raw, where)
        _check_keys(raw, EDGE_KEYS, {"from", "to", "guard"}, where)
        resets = {
            str(v): _expression(text, const_exprs, f"{where}.reset.{v}")
            for v, text in _require(raw.get("reset") or {}, f"{where}.reset").items()
        }
        edges.append(Edge(str(raw["from"]), str(raw["to"]), _guard(raw["guard"], constants, f"{where}.guard"), resets))

    ha = HybridAutomaton(
        name=name,
        locations=tuple(locations),
        variables=tuple(vars_),
        initial_location=str(init["location"]),
        initial_valuation=valuation,
        flows=flows,
        invariants=invariants,
        edges=tuple(edges),
    )
    report = validate(ha)
    if not report.ok:
        raise ModelValidationError(name, f"invalid model\n{report}", report.errors)
    return ha, constants


def _guard(text: Any, constants: Mapping[str, float], where: str):
    if not isinstance(text, str):
        raise ModelFileError(where, f"expected guard text, got {text!r}")
    try:
        return parse_guard(text, constants)
    except GuardSyntaxError as exc:
        raise ModelFileError(where, str(exc)) from None


def load_model_with_constants(path: str | Path) -> tuple[HybridAutomaton, dict[str, float]]:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ModelFileError(str(path), f"not valid YAML: {exc}") from None
    return model_from_dict(doc)


def load_model(path: str | Path) -> HybridAutomaton:
    return load_model_with_constants(path)[0]


def loads_model(text: str) -> HybridAutomaton:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ModelFileError("", f"not valid YAML: {exc}") from None
    return model_from_dict(doc)[0]


def model_to_dict(ha: HybridAutomaton) -> dict:
    """Document form of an automaton; constants appear inlined."""
    locations = {}
    for loc in ha.locations:
        body: dict[str, Any] = {"flow": {v: to_text(ha.flows[loc][v]) for v in ha.variables}}
        if loc in ha.invariants:
            body["invariant"] = format_guard(ha.invariants[loc])
        locations[loc] = body
    edges = []
    for e in ha.edges:
        item: dict[str, Any] = {"from": e.source, "to": e.target, "guard": format_guard(e.guard)}
        if e.resets:
            item["reset"] = {v: to_text(r) for v, r in e.resets.items()}
        edges.append(item)
    return {
        "name": ha.name,
        "variables": list(ha.variables),
        "initial": {
            "location": ha.initial_location,
            "valuation": {v: float(ha.initial_valuation[v]) for v in ha.variables},
        },
        "locations": locations,
        "edges": edges,
    }


def dump_model(ha: HybridAutomaton) -> str:
    return yaml.safe_dump(model_to_dict(ha), sort_keys=False)
