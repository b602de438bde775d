"""Numeric evaluation of expression trees."""

from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence

from .nodes import (
    Add,
    Const,
    Cos,
    Div,
    Exp,
    Expr,
    Mul,
    Neg,
    Pow,
    QuantizedVar,
    Sin,
    Sub,
    Tan,
    Time,
    Var,
)


class EvaluationError(ArithmeticError):
    pass


def _eval(e: Expr, env: Mapping[str, float], t: float) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, (Var, QuantizedVar)):
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError(f"unbound name {e.name!r}") from None
    if isinstance(e, Time):
        return t
    if isinstance(e, Neg):
        return -_eval(e.arg, env, t)
    if isinstance(e, Add):
        return _eval(e.left, env, t) + _eval(e.right, env, t)
    if isinstance(e, Sub):
        return _eval(e.left, env, t) - _eval(e.right, env, t)
    if isinstance(e, Mul):
        return _eval(e.left, env, t) * _eval(e.right, env, t)
    if isinstance(e, Div):
        den = _eval(e.right, env, t)
        if den == 0:
            raise EvaluationError("division by zero")
        return _eval(e.left, env, t) / den
    if isinstance(e, Pow):
        return _eval(e.base, env, t) ** e.exponent
    if isinstance(e, Sin):
        return math.sin(_eval(e.arg, env, t))
    if isinstance(e, Cos):
        return math.cos(_eval(e.arg, env, t))
    if isinstance(e, Tan):
        return math.tan(_eval(e.arg, env, t))
    if isinstance(e, Exp):
        return math.exp(_eval(e.arg, env, t))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, env: Mapping[str, float], t: float = 0.0) -> float:
    """Evaluate ``e`` with variable bindings ``env`` at time ``t``.

    Quantized reads use the same binding as the plain variable; callers
    apply hysteresis by choosing what they bind.
    """
    try:
        value = _eval(e, env, t)
    except OverflowError as exc:
        raise EvaluationError(f"overflow: {exc}") from None
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite result {value!r}")
    return value


_FUNC_SRC = {Sin: "_sin", Cos: "_cos", Tan: "_tan", Exp: "_exp"}
_BIN_SRC = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _source(e: Expr, index: Mapping[str, int]) -> str:
    if isinstance(e, Const):
        return f"({e.value!r})"
    if isinstance(e, (Var, QuantizedVar)):
        if e.name not in index:
            raise EvaluationError(f"unbound name {e.name!r}")
        return f"v[{index[e.name]}]"
    if isinstance(e, Time):
        return "t"
    if isinstance(e, Neg):
        return f"(-{_source(e.arg, index)})"
    if type(e) in _BIN_SRC:
        return f"({_source(e.left, index)} {_BIN_SRC[type(e)]} {_source(e.right, index)})"
    if isinstance(e, Pow):
        return f"({_source(e.base, index)} ** {e.exponent})"
    if type(e) in _FUNC_SRC:
        return f"{_FUNC_SRC[type(e)]}({_source(e.arg, index)})"
    raise TypeError(f"not an expression node: {e!r}")


_NAMESPACE = {"_sin": math.sin, "_cos": math.cos, "_tan": math.tan, "_exp": math.exp}


def compile_vector(
    exprs: Sequence[Expr], names: Sequence[str]
) -> Callable[[Sequence[float], float], tuple[float, ...]]:
    """Compile several expressions into one ``f(values, t) -> tuple``.

    ``values`` is positional, ordered like ``names``.  The compiled
    function raises ``ZeroDivisionError``/``OverflowError`` natively and
    does not check finiteness; it is the hot path of the simulators.
    """
    index = {name: i for i, name in enumerate(names)}
    body = ", ".join(_source(e, index) for e in exprs)
    return eval(f"lambda v, t: ({body},)", dict(_NAMESPACE))


def compile_expression(e: Expr, names: Sequence[str]) -> Callable[[Sequence[float], float], float]:
    index = {name: i for i, name in enumerate(names)}
    return eval(f"lambda v, t: {_source(e, index)}", dict(_NAMESPACE))
