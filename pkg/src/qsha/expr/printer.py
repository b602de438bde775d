"""Render expressions back to the text grammar with minimal parentheses."""

from __future__ import annotations

from .nodes import (
    FUNCTION_NAMES,
    Add,
    Const,
    Div,
    Expr,
    Mul,
    Neg,
    Pow,
    QuantizedVar,
    Sub,
    Time,
    Var,
    _Func,
)

# binding strength; higher binds tighter
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _number(value: float) -> str:
    text = repr(float(value))
    return f"({text})" if value < 0 or text.startswith("-") else text


def _render(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        return _number(e.value), _ATOM
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, QuantizedVar):
        return f"q({e.name})", _ATOM
    if isinstance(e, Time):
        return "t", _ATOM
    if isinstance(e, _Func):
        return f"{FUNCTION_NAMES[type(e)]}({to_text(e.arg)})", _ATOM
    if isinstance(e, Neg):
        if isinstance(e.arg, Const):
            # "-2.0" would re-parse as a negative literal
            return f"-({to_text(e.arg)})", _NEG
        return "-" + _wrap(e.arg, _NEG), _NEG
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _ATOM)}^{e.exponent}", _POW
    if isinstance(e, (Add, Sub)):
        op = " + " if isinstance(e, Add) else " - "
        return _wrap(e.left, _ADD) + op + _wrap(e.right, _MUL), _ADD
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        return _wrap(e.left, _MUL) + op + _wrap(e.right, _NEG), _MUL
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e: Expr, minimum: int) -> str:
    text, strength = _render(e)
    return text if strength >= minimum else f"({text})"


def to_text(e: Expr) -> str:
    return _render(e)[0]
