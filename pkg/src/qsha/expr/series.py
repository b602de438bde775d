"""Truncated power-series arithmetic.

A :class:`SeriesPolynomial` of order ``n`` holds the coefficients
``c0..cn`` of a power series in local time ``t`` around ``t = 0``.
All operations below are exact up to the truncation at order ``n``;
there is no other approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

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


class SeriesError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SeriesPolynomial:
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("a series needs at least one coefficient")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise SeriesError(f"non-finite series coefficient in {self.coefficients}")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def derivative(self) -> "SeriesPolynomial":
        cs = self.coefficients
        if len(cs) == 1:
            return SeriesPolynomial((0.0,))
        return SeriesPolynomial(tuple(k * cs[k] for k in range(1, len(cs))))


def integrate_series(p: SeriesPolynomial) -> SeriesPolynomial:
    """Antiderivative with zero constant term; the order grows by one."""
    return SeriesPolynomial((0.0,) + tuple(c / (k + 1) for k, c in enumerate(p.coefficients)))


# Coefficient-list kernels.  All lists have the same length n + 1.


def _mul(a: Sequence[float], b: Sequence[float]) -> list[float]:
    n = len(a)
    return [math.fsum(a[j] * b[k - j] for j in range(k + 1)) for k in range(n)]


def _div(a: Sequence[float], b: Sequence[float]) -> list[float]:
    if b[0] == 0:
        raise SeriesError("series division by a series with zero constant term")
    q: list[float] = []
    for k in range(len(a)):
        acc = a[k] - math.fsum(b[j] * q[k - j] for j in range(1, k + 1))
        q.append(acc / b[0])
    return q


def _exp(u: Sequence[float]) -> list[float]:
    e = [math.exp(u[0])]
    for k in range(1, len(u)):
        e.append(math.fsum(j * u[j] * e[k - j] for j in range(1, k + 1)) / k)
    return e


def _sin_cos(u: Sequence[float]) -> tuple[list[float], list[float]]:
    s, c = [math.sin(u[0])], [math.cos(u[0])]
    for k in range(1, len(u)):
        s.append(math.fsum(j * u[j] * c[k - j] for j in range(1, k + 1)) / k)
        c.append(-math.fsum(j * u[j] * s[k - j] for j in range(1, k + 1)) / k)
    return s, c


def _pow(u: Sequence[float], n: int) -> list[float]:
    result = [1.0] + [0.0] * (len(u) - 1)
    base = list(u)
    while n:
        if n & 1:
            result = _mul(result, base)
        n >>= 1
        if n:
            base = _mul(base, base)
    return result


def _expand(
    e: Expr,
    env0: Mapping[str, float],
    q_lines: Mapping[str, tuple[float, float]],
    n: int,
    t0: float,
) -> list[float]:
    zeros = [0.0] * n
    if isinstance(e, Const):
        return [e.value] + zeros
    if isinstance(e, QuantizedVar):
        if e.name not in q_lines:
            raise SeriesError(f"no quantized line for {e.name!r}")
        value, slope = q_lines[e.name]
        return ([value, slope] + zeros)[: n + 1]
    if isinstance(e, Var):
        if e.name not in env0:
            raise SeriesError(f"unbound name {e.name!r}")
        return [env0[e.name]] + zeros
    if isinstance(e, Time):
        return ([t0, 1.0] + zeros)[: n + 1]
    if isinstance(e, Neg):
        return [-c for c in _expand(e.arg, env0, q_lines, n, t0)]
    if isinstance(e, Pow):
        return _pow(_expand(e.base, env0, q_lines, n, t0), e.exponent)
    if isinstance(e, (Add, Sub, Mul, Div)):
        a = _expand(e.left, env0, q_lines, n, t0)
        b = _expand(e.right, env0, q_lines, n, t0)
        if isinstance(e, Add):
            return [x + y for x, y in zip(a, b)]
        if isinstance(e, Sub):
            return [x - y for x, y in zip(a, b)]
        if isinstance(e, Mul):
            return _mul(a, b)
        return _div(a, b)
    if isinstance(e, Exp):
        return _exp(_expand(e.arg, env0, q_lines, n, t0))
    if isinstance(e, (Sin, Cos, Tan)):
        s, c = _sin_cos(_expand(e.arg, env0, q_lines, n, t0))
        if isinstance(e, Sin):
            return s
        if isinstance(e, Cos):
            return c
        return _div(s, c)
    raise TypeError(f"not an expression node: {e!r}")


def taylor_series(
    e: Expr,
    env0: Mapping[str, float],
    q_lines: Mapping[str, tuple[float, float]],
    order: int,
    t0: float = 0.0,
) -> SeriesPolynomial:
    """Truncated series of ``e`` in local time around ``t = 0``.

    Each quantized read ``q(x)`` follows the line ``value + slope * t``
    given by ``q_lines[x]``; plain variable reads are constants taken from
    ``env0``; absolute time is ``t0 + t``.
    """
    if order < 0:
        raise SeriesError(f"order must be non-negative, got {order}")
    try:
        coeffs = _expand(e, env0, q_lines, order, t0)
    except OverflowError as exc:
        raise SeriesError(f"overflow while expanding: {exc}") from None
    return SeriesPolynomial(tuple(coeffs))
