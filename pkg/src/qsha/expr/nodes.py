"""Expression tree for flow right-hand sides and reset maps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator


class Expr:
    """Base class of all expression nodes.

    Nodes are frozen dataclasses, so structural equality and hashing come
    for free and trees can be shared between automata.
    """

    __slots__ = ()

    def children(self) -> tuple["Expr", ...]:
        return ()

    def __str__(self) -> str:
        from .printer import to_text

        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class QuantizedVar(Expr):
    """Read of the quantized signal q(t) of a state variable."""

    name: str


@dataclass(frozen=True)
class Time(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr

    def __post_init__(self):
        pass

    def children(self):
        return (self.left, self.right)


class Add(_Binary):
    pass


class Sub(_Binary):
    pass


class Mul(_Binary):
    pass


class Div(_Binary):
    def __post_init__(self):
        if isinstance(self.right, Const) and self.right.value == 0:
            raise ValueError("division by the constant zero")


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or isinstance(self.exponent, bool):
            raise TypeError("Pow exponent must be an int")
        if self.exponent < 0:
            raise ValueError("Pow exponent must be non-negative")

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class _Func(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


class Sin(_Func):
    pass


class Cos(_Func):
    pass


class Tan(_Func):
    pass


class Exp(_Func):
    pass


FUNCTIONS: dict[str, type[_Func]] = {"sin": Sin, "cos": Cos, "tan": Tan, "exp": Exp}
FUNCTION_NAMES: dict[type, str] = {cls: name for name, cls in FUNCTIONS.items()}


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def variables(e: Expr) -> set[str]:
    """Names read by ``e``, plain or quantized."""
    return {n.name for n in walk(e) if isinstance(n, (Var, QuantizedVar))}


def transform(e: Expr, fn: Callable[[Expr], Expr | None]) -> Expr:
    """Rebuild ``e`` bottom-up; ``fn`` may return a replacement or None."""
    replaced = fn(e)
    if replaced is not None:
        return replaced
    if isinstance(e, Neg):
        return Neg(transform(e.arg, fn))
    if isinstance(e, _Binary):
        return type(e)(transform(e.left, fn), transform(e.right, fn))
    if isinstance(e, Pow):
        return Pow(transform(e.base, fn), e.exponent)
    if isinstance(e, _Func):
        return type(e)(transform(e.arg, fn))
    return e


def substitute(e: Expr, bindings: dict[str, Expr]) -> Expr:
    """Replace plain variable reads by the bound expressions."""
    return transform(e, lambda n: bindings.get(n.name) if isinstance(n, Var) else None)


def mark_quantized(e: Expr, names) -> Expr:
    names = set(names)
    return transform(
        e, lambda n: QuantizedVar(n.name) if isinstance(n, Var) and n.name in names else None
    )


def unmark_quantized(e: Expr) -> Expr:
    return transform(e, lambda n: Var(n.name) if isinstance(n, QuantizedVar) else None)
