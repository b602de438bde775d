"""Step sizes from quantized-state integration.

``qss1_time`` holds the flow at its current value (first order),
``mqss2_time`` lets every quantized read follow its current tangent line
and solves the integrated Taylor polynomial (second order, modified).
``dqss`` halves the quantum until both predictions agree, and
``next_event`` picks the earliest level for one variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .expr import Expr, evaluate, integrate_series, taylor_series
from .poly import Polynomial, attach_quantum, smallest_positive_real_root


@dataclass(frozen=True)
class StepSettings:
    eps_t: float = 1e-3
    eps_zero: float = 1e-9
    taylor_order: int = 4
    max_halvings: int = 60
    min_quantum_ratio: float = 1e-12

    def __post_init__(self):
        if not self.eps_t > 0:
            raise ValueError(f"eps_t must be positive, got {self.eps_t}")
        if not self.eps_zero >= 0:
            raise ValueError(f"eps_zero must be non-negative, got {self.eps_zero}")
        if self.taylor_order < 1:
            raise ValueError(f"taylor_order must be at least 1, got {self.taylor_order}")
        if self.max_halvings < 1:
            raise ValueError(f"max_halvings must be at least 1, got {self.max_halvings}")
        if not self.min_quantum_ratio > 0:
            raise ValueError("min_quantum_ratio must be positive")


@dataclass(frozen=True)
class StepQuery:
    """One variable's step problem.

    ``slopes`` are the current derivatives of the state variables; they
    define the tangent lines followed by quantized reads in the second
    order prediction (missing entries count as 0).  ``time`` is the
    absolute time at which the query is posed.
    """

    ode: Expr
    current_valuation: Mapping[str, float]
    quantum: float
    eps_t: float = 1e-3
    taylor_order: int = 4
    min_quantum: float | None = None
    max_halvings: int = 60
    slopes: Mapping[str, float] = field(default_factory=dict)
    time: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.quantum) and self.quantum != 0):
            raise ValueError(f"quantum must be finite and nonzero, got {self.quantum}")
        if not self.eps_t > 0:
            raise ValueError(f"eps_t must be positive, got {self.eps_t}")
        if self.taylor_order < 1:
            raise ValueError(f"taylor_order must be at least 1, got {self.taylor_order}")
        if self.max_halvings < 1:
            raise ValueError(f"max_halvings must be at least 1, got {self.max_halvings}")
        if self.min_quantum is None:
            object.__setattr__(self, "min_quantum", 1e-12 * abs(self.quantum))
        elif not self.min_quantum > 0:
            raise ValueError(f"min_quantum must be positive, got {self.min_quantum}")


@dataclass(frozen=True, order=True)
class EventTime:
    """Time until the next event; ``value`` is ``inf`` when none is reachable.

    ``halvings`` and ``converged`` describe how the value was obtained and
    do not take part in comparisons.
    """

    value: float
    halvings: int = field(default=0, compare=False)
    converged: bool = field(default=True, compare=False)

    def __post_init__(self):
        if math.isnan(self.value) or self.value < 0:
            raise ValueError(f"event time must be non-negative, got {self.value}")

    @classmethod
    def never(cls, converged: bool = True, halvings: int = 0) -> "EventTime":
        return cls(math.inf, halvings, converged)

    @property
    def reachable(self) -> bool:
        return math.isfinite(self.value)


def current_slope(q: StepQuery) -> float:
    """Flow value with every quantized read pinned to its current value."""
    s = evaluate(q.ode, q.current_valuation, q.time)
    if not math.isfinite(s):
        raise ArithmeticError(f"non-finite slope {s}")
    return s


def qss1_time(q: StepQuery) -> EventTime:
    s = current_slope(q)
    if s == 0.0:
        return EventTime.never()
    return EventTime(abs(q.quantum) / abs(s))


def displacement_polynomial(q: StepQuery) -> Polynomial:
    """``x(T_n + t) - x(T_n)`` from the integrated Taylor expansion."""
    lines = {v: (x, q.slopes.get(v, 0.0)) for v, x in q.current_valuation.items()}
    series = taylor_series(q.ode, q.current_valuation, lines, q.taylor_order, q.time)
    return Polynomial(integrate_series(series).coefficients)


def _root_for(disp: Polynomial, magnitude: float) -> float:
    """Earliest time at which ``|disp|`` reaches ``magnitude``.

    The displacement is matched in the direction it starts moving.  Only
    when it starts flat is the sign left to the Descartes rule.
    """
    if disp.is_zero():
        return math.inf
    cs = disp.coefficients
    if len(cs) > 1 and cs[1] != 0.0:
        shifted = Polynomial((-math.copysign(magnitude, cs[1]),) + cs[1:])
    else:
        shifted = attach_quantum(disp, magnitude)
    root = smallest_positive_real_root(shifted)
    return math.inf if root is None else root


def mqss2_time(q: StepQuery) -> EventTime:
    root = _root_for(displacement_polynomial(q), abs(q.quantum))
    return EventTime(root) if math.isfinite(root) else EventTime.never()


def dqss(q: StepQuery) -> EventTime:
    """Halve the quantum until the two predictions agree within ``eps_t``.

    Returns the first order time of the accepted quantum.  Gives up after
    ``max_halvings`` halvings or below ``min_quantum`` and returns the last
    first order time, flagged as not converged.
    """
    s = current_slope(q)
    if s == 0.0:
        # no halving can make the first order time finite
        disp = displacement_polynomial(q)
        return EventTime.never(converged=disp.is_zero())
    disp = displacement_polynomial(q)
    quantum = abs(q.quantum)
    halvings = 0
    while True:
        t1 = quantum / abs(s)
        t2 = _root_for(disp, quantum)
        if abs(t1 - t2) < q.eps_t:
            return EventTime(t1, halvings, True)
        if halvings >= q.max_halvings or quantum / 2 < q.min_quantum:
            return EventTime(t1, halvings, False)
        quantum /= 2
        halvings += 1


def next_event(
    ode: Expr,
    current_valuation: Mapping[str, float],
    level_crossings: Iterable[float],
    config: StepSettings = StepSettings(),
    slopes: Mapping[str, float] | None = None,
    time: float = 0.0,
) -> EventTime:
    """Earliest step towards any level, given as signed ``level - value``.

    A difference within ``eps_zero`` of zero means the variable already
    sits on a level, and the step is 0.
    """
    diffs = list(level_crossings)
    if not diffs:
        return EventTime.never(converged=False)
    if any(abs(d) <= config.eps_zero for d in diffs):
        return EventTime(0.0)
    best = EventTime.never()
    for d in diffs:
        query = StepQuery(
            ode=ode,
            current_valuation=current_valuation,
            quantum=d,
            eps_t=config.eps_t,
            taylor_order=config.taylor_order,
            min_quantum=config.min_quantum_ratio * abs(d),
            max_halvings=config.max_halvings,
            slopes=slopes or {},
            time=time,
        )
        best = min(best, dqss(query))
    return best
