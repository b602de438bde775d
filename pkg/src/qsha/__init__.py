"""Discrete-event simulation of quantized-state hybrid automata."""

from .engine import SimConfig, Simulator, SimulationError, ZenoError, audit_trace, baseline_simulate, simulate
from .model import QSHA, Edge, HybridAutomaton, parse_guard, quantize, validate
from .modelfile import dump_model, load_model, loads_model
from .trace import Trace, TraceEntry, count_steps, crossing_times

__all__ = [
    "QSHA",
    "Edge",
    "HybridAutomaton",
    "SimConfig",
    "SimulationError",
    "Simulator",
    "Trace",
    "TraceEntry",
    "ZenoError",
    "audit_trace",
    "baseline_simulate",
    "count_steps",
    "crossing_times",
    "dump_model",
    "load_model",
    "loads_model",
    "parse_guard",
    "quantize",
    "simulate",
    "validate",
]
