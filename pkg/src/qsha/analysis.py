"""Step counts, crossing times and crossing-time correlation."""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

from . import benchmarks
from .engine import SimConfig, SimulationError, baseline_simulate, simulate
from .trace import Trace, count_steps, crossing_times


class CorrelationError(ValueError):
    pass


def correlate_crossings(a: Trace | Sequence[float], b: Trace | Sequence[float]) -> float:
    """Pearson correlation of two crossing-time sequences.

    Traces are reduced to their crossing times; the first
    ``min(len(a), len(b))`` crossings are paired.
    """
    ta = crossing_times(a) if isinstance(a, Trace) else list(a)
    tb = crossing_times(b) if isinstance(b, Trace) else list(b)
    n = min(len(ta), len(tb))
    if n < 2:
        raise CorrelationError(f"need at least 2 paired crossings, have {n}")
    ta, tb = ta[:n], tb[:n]
    if len(set(ta)) == 1 or len(set(tb)) == 1:
        raise CorrelationError("a crossing-time sequence has zero variance")
    try:
        r = statistics.correlation(ta, tb)
    except statistics.StatisticsError as exc:
        raise CorrelationError(str(exc)) from None
    return max(-1.0, min(1.0, r))


@dataclass
class AnalysisReport:
    step_count: int
    crossing_times: list[float]
    correlation: float | None = None
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.correlation is not None and not -1.0 <= self.correlation <= 1.0:
            raise ValueError(f"correlation out of range: {self.correlation}")

    def to_dict(self) -> dict:
        return asdict(self)


def analyze(trace: Trace, reference: Trace | None = None) -> AnalysisReport:
    corr = None
    diagnostics = list(trace.diagnostics)
    if reference is not None:
        try:
            corr = correlate_crossings(trace, reference)
        except CorrelationError as exc:
            diagnostics.append(f"correlation unavailable: {exc}")
    return AnalysisReport(count_steps(trace), crossing_times(trace), corr, diagnostics)


@dataclass
class BenchRow:
    name: str
    horizon: float
    steps: int
    first_crossing: float | None
    baseline_dt: float
    baseline_steps: int
    baseline_first_crossing: float | None
    trace: Trace = field(repr=False)
    baseline_trace: Trace = field(repr=False)
    diagnostics: list[str] = field(default_factory=list)


def default_baseline_dt(horizon: float) -> float:
    return horizon / 500


def bench(name: str = "all", config: SimConfig | None = None, baseline_dt: float | None = None) -> list[BenchRow]:
    """Run bundled benchmarks with the engine and the fixed-step baseline.

    ``config`` supplies everything but the horizon, which comes from the
    catalog.  The baseline step defaults to 1/500 of the horizon.
    """
    names = benchmarks.NAMES if name == "all" else (name,)
    for n in names:
        if n not in benchmarks.HORIZONS:
            raise KeyError(f"unknown benchmark {n!r}; choose from {', '.join(benchmarks.NAMES)}")
    rows = []
    for n in names:
        horizon = benchmarks.HORIZONS[n]
        cfg = SimConfig(horizon=horizon) if config is None else replace(config, horizon=horizon)
        ha = benchmarks.load_benchmark(n)
        try:
            trace = simulate(ha, cfg)
        except SimulationError as exc:
            trace = exc.trace
        dt = baseline_dt or default_baseline_dt(horizon)
        try:
            base = baseline_simulate(ha, cfg, dt)
        except SimulationError as exc:
            base = exc.trace
        first = crossing_times(trace)[:1]
        bfirst = crossing_times(base)[:1]
        rows.append(
            BenchRow(
                name=n,
                horizon=horizon,
                steps=count_steps(trace),
                first_crossing=first[0] if first else None,
                baseline_dt=dt,
                baseline_steps=count_steps(base),
                baseline_first_crossing=bfirst[0] if bfirst else None,
                trace=trace,
                baseline_trace=base,
                diagnostics=list(trace.diagnostics),
            )
        )
    return rows


def format_bench(rows: list[BenchRow]) -> str:
    def t(x):
        return "-" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6g}"

    lines = [f"{'model':<8} {'horizon':>8} {'steps':>6} {'first':>10} {'base dt':>9} {'base steps':>10} {'base first':>10}"]
    for r in rows:
        lines.append(
            f"{r.name:<8} {r.horizon:>8g} {r.steps:>6d} {t(r.first_crossing):>10} "
            f"{r.baseline_dt:>9.3g} {r.baseline_steps:>10d} {t(r.baseline_first_crossing):>10}"
        )
    return "\n".join(lines)
