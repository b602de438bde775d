"""Expression language: AST, parser, evaluation and Taylor-series expansion."""

from .evaluate import EvaluationError, compile_expression, compile_vector, evaluate
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
    mark_quantized,
    substitute,
    unmark_quantized,
    variables,
    walk,
)
from .parser import ParseError, parse_expression
from .printer import to_text
from .series import SeriesError, SeriesPolynomial, integrate_series, taylor_series

__all__ = [
    "Add",
    "Const",
    "Cos",
    "Div",
    "EvaluationError",
    "Exp",
    "Expr",
    "Mul",
    "Neg",
    "ParseError",
    "Pow",
    "QuantizedVar",
    "SeriesError",
    "SeriesPolynomial",
    "Sin",
    "Sub",
    "Tan",
    "Time",
    "Var",
    "compile_expression",
    "compile_vector",
    "evaluate",
    "integrate_series",
    "mark_quantized",
    "parse_expression",
    "substitute",
    "taylor_series",
    "to_text",
    "unmark_quantized",
    "variables",
    "walk",
]
