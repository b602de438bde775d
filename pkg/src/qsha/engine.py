"""Discrete-event simulation of quantized-state hybrid automata.

Every loop iteration either takes an enabled edge (zero duration) or
advances all variables by one forward Euler step whose length was chosen
so that no guard level of the current location is passed.  A classical
fixed-step simulator with bisection localization is provided for
comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .expr import compile_vector, evaluate, EvaluationError
from .model import (
    QSHA,
    HybridAutomaton,
    ModelError,
    compile_guard,
    eval_guard,
    guard_to_dnf,
    level_crossing_matrix,
    quantize,
)
from .qss import EventTime, StepSettings, next_event
from .trace import INTER, INTRA, Trace, TraceEntry, count_steps, crossing_times

__all__ = [
    "SimConfig",
    "SimState",
    "SimulationError",
    "ZenoError",
    "Simulator",
    "compute_next_event",
    "step",
    "simulate",
    "baseline_simulate",
    "audit_trace",
    "count_steps",
    "crossing_times",
]


class SimulationError(RuntimeError):
    def __init__(self, message: str, trace: Trace | None = None):
        super().__init__(message)
        self.trace = trace


class ZenoError(SimulationError):
    pass


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 1.0
    eps_t: float = 1e-3
    eps_zero: float = 1e-9
    taylor_order: int = 4
    max_halvings: int = 60
    zeno_cap: int = 1000
    check_invariants: bool = True
    edge_order: str = "declaration"

    def __post_init__(self):
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be a finite non-negative time, got {self.horizon}")
        if self.zeno_cap < 1:
            raise ValueError(f"zeno_cap must be at least 1, got {self.zeno_cap}")
        if self.edge_order != "declaration":
            raise ValueError(f"unsupported edge order {self.edge_order!r}")
        self.step_settings()  # validates the remaining fields

    def step_settings(self) -> StepSettings:
        return StepSettings(
            eps_t=self.eps_t,
            eps_zero=self.eps_zero,
            taylor_order=self.taylor_order,
            max_halvings=self.max_halvings,
        )


@dataclass(frozen=True)
class SimState:
    t_now: float
    t_pre: float
    x_pre: Mapping[str, float]
    x_now: Mapping[str, float]
    enabled: str
    next_dt: float = 0.0
    zero_streak: int = 0

    @classmethod
    def initial(cls, ha: HybridAutomaton) -> "SimState":
        x0 = {v: float(ha.initial_valuation[v]) for v in ha.variables}
        return cls(0.0, 0.0, x0, dict(x0), ha.initial_location)


class Simulator:
    """One automaton prepared for repeated stepping."""

    def __init__(self, model: QSHA | HybridAutomaton, config: SimConfig):
        self.qsha = model if isinstance(model, QSHA) else quantize(model)
        self.ha = self.qsha.base
        self.config = config
        self.settings = config.step_settings()
        ha = self.ha
        self.outgoing = {loc: ha.outgoing(loc) for loc in ha.locations}
        self.levels = {
            i: {v: sorted(ls) for v, ls in level_crossing_matrix(ha, e.source, i).per_variable_levels.items() if ls}
            for i, e in enumerate(ha.edges)
        }
        self.flows = {
            loc: compile_vector([ha.flows[loc][v] for v in ha.variables], ha.variables) for loc in ha.locations
        }
        self.non_converged = 0

    # -- pieces -------------------------------------------------------------

    def derivatives(self, location: str, x: Mapping[str, float], t: float) -> dict[str, float]:
        try:
            ds = self.flows[location]([x[v] for v in self.ha.variables], t)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise SimulationError(f"flow of {location!r} failed at t={t}: {exc}") from None
        if not all(math.isfinite(d) for d in ds):
            raise SimulationError(f"non-finite derivative in {location!r} at t={t}")
        return dict(zip(self.ha.variables, ds))

    def enabled_edge(self, location: str, x: Mapping[str, float]) -> int | None:
        """First outgoing edge, in declaration order, whose guard holds."""
        for i, e in self.outgoing[location]:
            if eval_guard(e.guard, x, self.config.eps_zero):
                return i
        return None

    def compute_next_event(self, location: str, x_now: Mapping[str, float], t: float = 0.0) -> EventTime:
        out = self.outgoing[location]
        if not out:
            return EventTime.never()
        if self.enabled_edge(location, x_now) is not None:
            return EventTime(0.0)
        slopes = self.derivatives(location, x_now, t)
        flows = self.qsha.quantized_flows[location]
        eps = self.config.eps_zero
        best = EventTime.never()
        for i, _ in out:
            for v, levels in self.levels[i].items():
                # a level the variable already sits on does not enable the
                # guard here (checked above); it is passed through
                diffs = [lv - x_now[v] for lv in levels if abs(lv - x_now[v]) > eps]
                if not diffs:
                    continue
                try:
                    r = next_event(flows[v], x_now, diffs, self.settings, slopes, t)
                except (ArithmeticError, ValueError) as exc:
                    raise SimulationError(f"step computation for {v!r} failed at t={t}: {exc}") from None
                if not r.converged:
                    self.non_converged += 1
                best = min(best, r)
        return best

    def step(self, state: SimState) -> tuple[SimState, TraceEntry]:
        ha, cfg = self.ha, self.config
        x_pre = state.x_pre
        taken = self.enabled_edge(state.enabled, x_pre)
        if taken is not None:
            e = ha.edges[taken]
            x_now = dict(x_pre)
            try:
                for v, r in e.resets.items():
                    x_now[v] = evaluate(r, x_pre, state.t_now)
            except EvaluationError as exc:
                raise SimulationError(f"reset of edge {taken} failed at t={state.t_now}: {exc}") from None
            enabled, next_dt, kind = e.target, 0.0, INTER
            streak = state.zero_streak + 1
            if streak > cfg.zeno_cap:
                raise ZenoError(f"Zeno behaviour: {streak} consecutive zero-time switches at t={state.t_now}")
        else:
            delta = state.t_now - state.t_pre
            enabled, kind, streak = state.enabled, INTRA, state.zero_streak
            if delta > 0:
                ds = self.derivatives(enabled, x_pre, state.t_pre)
                x_now = {v: x_pre[v] + ds[v] * delta for v in ha.variables}
                streak = 0
            else:
                x_now = dict(x_pre)
            if not all(math.isfinite(x) for x in x_now.values()):
                raise SimulationError(f"non-finite state at t={state.t_now}")
            next_dt = self.compute_next_event(enabled, x_now, state.t_now).value
            if math.isinf(next_dt) and state.t_now < cfg.horizon:
                next_dt = cfg.horizon - state.t_now  # idle until the horizon
        entry = TraceEntry(state.t_now, enabled, x_now, kind, taken)
        new = SimState(
            t_now=state.t_now + next_dt,
            t_pre=state.t_now,
            x_pre=x_now,
            x_now=x_now,
            enabled=enabled,
            next_dt=next_dt,
            zero_streak=streak,
        )
        return new, entry

    def check_invariant(self, entry: TraceEntry, trace: Trace):
        inv = self.ha.invariants.get(entry.location)
        if inv is not None and not eval_guard(inv, entry.valuation, self.config.eps_zero, closed=True):
            trace.diagnostics.append(f"invariant of {entry.location!r} violated at t={entry.time!r}")

    def run(self) -> Trace:
        ha, cfg = self.ha, self.config
        trace = Trace(ha.variables)
        state = SimState.initial(ha)
        trace.append_entry(TraceEntry(0.0, state.enabled, state.x_pre, INTRA))
        first = True
        try:
            while state.t_now <= cfg.horizon:
                state, entry = self.step(state)
                if first and entry.kind == INTRA:
                    # zero-length first step: this is the initial entry
                    first = False
                    continue
                first = False
                trace.append_entry(entry)
                if cfg.check_invariants and entry.kind == INTRA:
                    self.check_invariant(entry, trace)
        except SimulationError as exc:
            exc.trace = trace
            trace.diagnostics.append(str(exc))
            raise
        if self.non_converged:
            trace.diagnostics.append(f"step-size halving did not converge on {self.non_converged} queries")
        return trace


def compute_next_event(qsha: QSHA, enabled: str, x_now: Mapping[str, float], config: SimConfig, t: float = 0.0) -> EventTime:
    if enabled not in qsha.base.locations:
        raise ModelError(f"unknown location {enabled!r}")
    return Simulator(qsha, config).compute_next_event(enabled, x_now, t)


def step(qsha: QSHA, state: SimState, config: SimConfig) -> tuple[SimState, TraceEntry]:
    return Simulator(qsha, config).step(state)


def simulate(model: QSHA | HybridAutomaton, config: SimConfig) -> Trace:
    return Simulator(model, config).run()


# -- classical fixed-step baseline -------------------------------------------


def baseline_simulate(ha: HybridAutomaton, config: SimConfig, fixed_dt: float, record: str = "all") -> Trace:
    """Fixed-step Euler with guard detection by sign comparison.

    Each step compares every outgoing guard before and after a tentative
    step of ``fixed_dt``.  A false-to-true change is localized by
    bisection and the edge is taken at the first time the guard holds.
    A guard that becomes true and false again within one step goes
    unnoticed, as in any integrate-then-detect scheme.  With
    ``record="events"`` only the initial entry, switch points and the
    final entry are stored.
    """
    if not (fixed_dt > 0 and math.isfinite(fixed_dt)):
        raise ValueError(f"fixed_dt must be positive, got {fixed_dt}")
    if record not in ("all", "events"):
        raise ValueError(f"record must be 'all' or 'events', got {record!r}")
    names = ha.variables
    flows = {loc: compile_vector([ha.flows[loc][v] for v in names], names) for loc in ha.locations}
    guards = [compile_guard(e.guard, names) for e in ha.edges]
    outgoing = {loc: [i for i, _ in ha.outgoing(loc)] for loc in ha.locations}
    horizon = config.horizon
    trace = Trace(names)

    loc = ha.initial_location
    x = [float(ha.initial_valuation[v]) for v in names]
    t = 0.0
    trace.append(t, loc, x)
    t_start, k = 0.0, 0  # step times are t_start + k * dt, without drift
    streak = 0

    def advance(f, x, h):
        return [xi + di * h for xi, di in zip(x, f)]

    def finite(values):
        return all(math.isfinite(v) for v in values)

    while t < horizon:
        # an edge already enabled on arrival is taken at once
        now = next((i for i in outgoing[loc] if guards[i](x)), None)
        if now is not None:
            streak += 1
            if streak > config.zeno_cap:
                raise ZenoError(f"Zeno behaviour: {streak} consecutive zero-time switches at t={t}", trace)
            x, loc = _take(ha, now, x, t)
            trace.append(t, loc, x, INTER, now)
            t_start, k = t, 0
            continue
        try:
            f = flows[loc](x, t)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise SimulationError(f"flow of {loc!r} failed at t={t}: {exc}", trace) from None
        t_next = t_start + (k + 1) * fixed_dt
        h = t_next - t
        x_new = advance(f, x, h)
        if not finite(x_new):
            raise SimulationError(f"non-finite state at t={t_next}", trace)
        hit, hit_h = None, h
        for i in outgoing[loc]:
            if guards[i](x_new):
                lo, hi = 0.0, h
                while hi - lo > h * 2.0**-52:
                    mid = 0.5 * (lo + hi)
                    if mid <= lo or mid >= hi:
                        break
                    if guards[i](advance(f, x, mid)):
                        hi = mid
                    else:
                        lo = mid
                if hi < hit_h or hit is None:
                    hit, hit_h = i, hi
        if hit is None:
            t, x, k = t_next, x_new, k + 1
            streak = 0
            if record == "all" or t >= horizon:
                trace.append(t, loc, x)
            else:
                trace.unrecorded += 1
            continue
        t = t + hit_h
        x = advance(f, x, hit_h)
        trace.append(t, loc, x)
        streak = 1
        x, loc = _take(ha, hit, x, t)
        trace.append(t, loc, x, INTER, hit)
        t_start, k = t, 0
    return trace


def _take(ha: HybridAutomaton, edge: int, x: list[float], t: float) -> tuple[list[float], str]:
    e = ha.edges[edge]
    env = dict(zip(ha.variables, x))
    out = [evaluate(e.resets[v], env, t) if v in e.resets else env[v] for v in ha.variables]
    return out, e.target


# -- trace auditing ------------------------------------------------------------


def audit_trace(ha: HybridAutomaton, trace: Trace, eps: float = 1e-9) -> list[str]:
    """Check a trace for ordering, guard and never-overshoot violations.

    * times never decrease, and a switch keeps the time of its predecessor;
    * the state just before a switch satisfies the guard of the edge taken;
    * a switch reached by a timed step happens on a level of that guard;
    * between consecutive entries in one location no variable moves from
      one side of a level of that location's guards to the other side
      without stopping on it.
    """
    problems = []
    levels = {}
    for loc in ha.locations:
        acc: dict[str, set[float]] = {}
        for i, _ in ha.outgoing(loc):
            for v, ls in level_crossing_matrix(ha, loc, i).per_variable_levels.items():
                acc.setdefault(v, set()).update(ls)
        levels[loc] = acc
    idx = {v: k for k, v in enumerate(trace.variables)}
    for n in range(1, len(trace)):
        t0, t1 = trace.times[n - 1], trace.times[n]
        if t1 < t0:
            problems.append(f"entry {n}: time decreases from {t0!r} to {t1!r}")
        prev = trace.row(n - 1)
        if trace.kinds[n] == INTER:
            if t1 != t0:
                problems.append(f"entry {n}: switch at {t1!r} does not share its predecessor's time {t0!r}")
            edge = trace.edges[n]
            if edge is None:
                continue
            g = ha.edges[edge].guard
            env = dict(zip(trace.variables, prev))
            if not eval_guard(g, env, eps):
                problems.append(f"entry {n}: guard of edge {edge} does not hold before the switch")
                continue
            timed = n >= 2 and trace.kinds[n - 1] == INTRA and trace.times[n - 2] < t0
            if timed:
                on_level = any(
                    all(eval_guard(a, env, eps) for a in term)
                    and any(abs(env[a.var] - a.level) <= eps for a in term)
                    for term in guard_to_dnf(g)
                )
                if not on_level:
                    problems.append(f"entry {n}: switch at {t1!r} does not sit on a level of edge {edge}")
            continue
        if trace.kinds[n - 1] == INTER and trace.locations[n - 1] != trace.locations[n]:
            continue
        cur = trace.row(n)
        for v, ls in levels[trace.locations[n]].items():
            a, b = prev[idx[v]], cur[idx[v]]
            for lv in ls:
                if (a < lv - eps and b > lv + eps) or (a > lv + eps and b < lv - eps):
                    problems.append(f"entry {n}: {v} passes level {lv!r} ({a!r} -> {b!r}) at t={t1!r}")
    return problems
