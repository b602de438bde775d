"""Command line: ``qsha run|bench|correlate|validate``.

Exit codes: 0 success, 1 usage or parse error, 2 validation failure,
3 simulation aborted (Zeno or numerical failure).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import benchmarks
from .analysis import CorrelationError, analyze, bench, correlate_crossings, default_baseline_dt, format_bench
from .engine import SimConfig, SimulationError, baseline_simulate, simulate
from .model import validate
from .modelfile import ModelFileError, ModelValidationError, load_model
from .traceio import TraceFormatError, load_trace, save_trace, write_trace

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_ABORT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load(model: str):
    """A bundled benchmark name or a model file path."""
    if model in benchmarks.HORIZONS and not Path(model).exists():
        return benchmarks.load_benchmark(model), benchmarks.HORIZONS[model]
    if not Path(model).exists():
        raise UsageError(f"no model file or bundled benchmark named {model!r}")
    return load_model(model), None


def cmd_run(args) -> int:
    ha, horizon = _load(args.model)
    horizon = args.horizon if args.horizon is not None else horizon
    if horizon is None:
        raise UsageError("--horizon is required for model files")
    cfg = SimConfig(
        horizon=horizon,
        eps_t=args.eps_t,
        taylor_order=args.taylor_order,
        check_invariants=not args.no_invariant_check,
    )
    status = EXIT_OK
    try:
        if args.baseline:
            trace = baseline_simulate(ha, cfg, args.dt or default_baseline_dt(horizon))
        else:
            trace = simulate(ha, cfg)
    except SimulationError as exc:
        trace, status = exc.trace, EXIT_ABORT
        if str(exc) not in trace.diagnostics:
            trace.diagnostics.append(str(exc))
    report = json.dumps(analyze(trace).to_dict(), indent=2)
    if args.trace_out:
        if args.trace_out == "-":
            write_trace(trace, sys.stdout)
        else:
            save_trace(trace, args.trace_out)
    if args.report_out:
        Path(args.report_out).write_text(report + "\n")
    if args.trace_out != "-":
        print(report)
    return status


def cmd_bench(args) -> int:
    if args.name != "all" and args.name not in benchmarks.HORIZONS:
        raise UsageError(f"unknown benchmark {args.name!r}; choose from all, {', '.join(benchmarks.NAMES)}")
    cfg = SimConfig(eps_t=args.eps_t, taylor_order=args.taylor_order)
    rows = bench(args.name, cfg)
    print(format_bench(rows))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for r in rows:
            save_trace(r.trace, out / f"{r.name}.csv")
            save_trace(r.baseline_trace, out / f"{r.name}.baseline.csv")
    return EXIT_OK


def cmd_correlate(args) -> int:
    try:
        a, b = load_trace(args.trace_a), load_trace(args.trace_b)
    except (OSError, TraceFormatError) as exc:
        raise UsageError(str(exc)) from None
    try:
        r = correlate_crossings(a, b)
    except CorrelationError as exc:
        raise UsageError(str(exc)) from None
    print(f"{r:.17g}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        ha, _ = _load(args.model)
    except ModelValidationError as exc:
        print(exc)
        return EXIT_INVALID
    report = validate(ha)
    print(report)
    return EXIT_OK if report.ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsha", description="Quantized-state hybrid automaton simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def sim_options(sp):
        sp.add_argument("--eps-t", type=float, default=1e-3, help="time-domain tolerance (default 1e-3)")
        sp.add_argument("--taylor-order", type=int, default=4, help="Taylor expansion order (default 4)")

    run = sub.add_parser("run", help="simulate one model")
    run.add_argument("model", help="model file or bundled benchmark name")
    run.add_argument("--horizon", type=float, help="simulated seconds (bundled models have a default)")
    sim_options(run)
    run.add_argument("--baseline", action="store_true", help="use the fixed-step baseline instead")
    run.add_argument("--dt", type=float, help="baseline step (default horizon/500)")
    run.add_argument("--no-invariant-check", action="store_true")
    run.add_argument("--trace-out", help="write the trace as CSV ('-' for stdout)")
    run.add_argument("--report-out", help="write the JSON report here as well")
    run.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="run bundled benchmarks")
    b.add_argument("name", help=f"all or one of {', '.join(benchmarks.NAMES)}")
    sim_options(b)
    b.add_argument("--out", help="directory for trace files")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("correlate", help="correlate the crossing times of two trace files")
    c.add_argument("trace_a")
    c.add_argument("trace_b")
    c.set_defaults(func=cmd_correlate)

    v = sub.add_parser("validate", help="check a model file")
    v.add_argument("model")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ModelFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
