"""One test per acceptance criterion; each prints a pass/fail line."""

import math
import random
import time

import pytest

from qsha import benchmarks
from qsha.analysis import CorrelationError, correlate_crossings
from qsha.cli import main
from qsha.engine import SimConfig, audit_trace, baseline_simulate, simulate
from qsha.expr import Const, mark_quantized, parse_expression
from qsha.poly import Polynomial, attach_quantum, smallest_positive_real_root
from qsha.qss import StepQuery, StepSettings, dqss, next_event, qss1_time
from qsha.trace import crossing_times

from corpus import CORPUS_HORIZON, corpus_models
from oracle import dense_crossings

ROBOT_HORIZON = 0.07


@pytest.fixture(scope="module")
def robot():
    return benchmarks.load_benchmark("robot")


def test_1_robot_collision(robot, criterion):
    start = time.perf_counter()
    trace = simulate(robot, SimConfig(horizon=ROBOT_HORIZON, eps_t=1e-3, taylor_order=5))
    elapsed = time.perf_counter() - start
    crossings = crossing_times(trace)
    steps = len(trace) - 1 + trace.unrecorded
    ok = bool(crossings) and crossings[0] < ROBOT_HORIZON and 41 / 2 <= steps <= 41 * 2 and elapsed < 1.0
    first = f"{crossings[0]:.6g}" if crossings else "none"
    criterion(1, "robot collision before 0.07 s", ok, f"first={first} s, steps={steps}, {elapsed:.3f} s")
    assert ok


def test_2_baseline_misses_robot_collision(robot, criterion):
    cfg = SimConfig(horizon=ROBOT_HORIZON)
    start = time.perf_counter()
    base = crossing_times(baseline_simulate(robot, cfg, 1.4e-4))
    engine = crossing_times(simulate(robot, cfg))
    elapsed = time.perf_counter() - start
    ok = not base and bool(engine) and elapsed < 5.0
    detail = f"baseline={base[:1] or 'none'}, engine={engine[:1] or 'none'}, {elapsed:.2f} s"
    criterion(2, "fixed-step baseline at 1.4e-4 misses the collision", ok, detail)
    assert not base, "baseline detected the collision"
    assert engine and elapsed < 5.0


def _random_displacement(rng):
    while True:
        degree = rng.randint(1, 6)
        cs = [0.0] + [rng.choice([0.0, rng.uniform(-10, 10)]) for _ in range(degree)]
        if any(cs):
            return Polynomial(tuple(cs))


def test_3_attach_quantum_always_has_root(criterion):
    rng = random.Random(20240601)
    failures = 0
    start = time.perf_counter()
    for _ in range(1000):
        p = _random_displacement(rng)
        dq = 10 ** rng.uniform(-6, 2)
        shifted = attach_quantum(p, dq)
        root = smallest_positive_real_root(shifted)
        if root is None or not root > 0:
            failures += 1
            continue
        scale = sum(abs(c) * root**k for k, c in enumerate(shifted.coefficients))
        if abs(shifted(root)) > 1e-8 * scale:
            failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10.0
    criterion(3, "attach_quantum yields a positive root", ok, f"{failures} failures in 1000, {elapsed:.2f} s")
    assert ok


def test_4_constant_slope_steps_are_exact(criterion):
    rng = random.Random(7)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(1000):
        slope = rng.choice([-1, 1]) * 10 ** rng.uniform(-4, 4)
        quantum = rng.choice([-1, 1]) * 10 ** rng.uniform(-6, 3)
        x0 = rng.uniform(-100, 100)
        t = qss1_time(StepQuery(Const(slope), {"x": x0}, quantum)).value
        moved = abs(t * slope)
        worst = max(worst, abs(moved - abs(quantum)) / abs(quantum))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1.0
    criterion(4, "Euler step of qss1_time moves by exactly the quantum", ok, f"worst rel err={worst:.2e}, {elapsed:.3f} s")
    assert ok


def test_5_first_crossing_matches_oracle(criterion):
    start = time.perf_counter()
    worst_name, worst_excess = None, -math.inf
    misses, low_corr = [], []
    for name, ha in corpus_models().items():
        engine = crossing_times(simulate(ha, SimConfig(horizon=CORPUS_HORIZON)))
        oracle = dense_crossings(ha, CORPUS_HORIZON)
        if not engine or not oracle:
            misses.append(f"{name}: engine={len(engine)} oracle={len(oracle)} crossings")
            continue
        tol = max(1e-3, 1e-3 * oracle[0])
        err = abs(engine[0] - oracle[0])
        if err - tol > worst_excess:
            worst_name, worst_excess = name, err - tol
        if err > tol:
            misses.append(f"{name}: |{engine[0]:.6f} - {oracle[0]:.6f}| = {err:.2e}")
        try:
            r = correlate_crossings(engine, oracle)
        except CorrelationError:
            continue  # fewer than two crossings: first-crossing check only
        if r < 0.999:
            low_corr.append(f"{name}: r={r:.6f}")
    elapsed = time.perf_counter() - start
    ok = not misses and not low_corr and elapsed < 120.0
    detail = f"{len(misses)} first-crossing misses, {len(low_corr)} low correlations, {elapsed:.1f} s"
    if misses:
        detail += "; " + "; ".join(misses)
    criterion(5, "first crossings match the dense oracle", ok, detail)
    assert not misses, "\n".join(misses)
    assert not low_corr, "\n".join(low_corr)
    assert elapsed < 120.0


def test_6_never_overshoot(criterion):
    problems = {}
    for name in benchmarks.NAMES:
        ha = benchmarks.load_benchmark(name)
        trace = simulate(ha, SimConfig(horizon=benchmarks.HORIZONS[name]))
        found = audit_trace(ha, trace, eps=1e-9)
        if found:
            problems[name] = found
    ok = not problems
    criterion(6, "no benchmark trace passes a guard level", ok, f"{sum(map(len, problems.values()))} problems")
    assert ok, problems


def test_7_dqss_worked_example(criterion):
    growth = mark_quantized(parse_expression("x"), ["x"])
    r = dqss(StepQuery(growth, {"x": 1.0}, 1.0, eps_t=1e-3, slopes={"x": 1.0}))
    via_levels = next_event(growth, {"x": 1.0}, [1.0], StepSettings(eps_t=1e-3), slopes={"x": 1.0})
    ok = r.value == 0.03125 and r.halvings == 5 and r.converged and via_levels.value == 0.03125
    criterion(7, "dqss on x' = x gives 0.03125 after 5 halvings", ok, f"t={r.value!r}, halvings={r.halvings}")
    assert ok


def test_8_bench_is_deterministic(tmp_path, capsys, criterion):
    outs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["bench", "all", "--out", str(d)]) for d in outs]
    capsys.readouterr()
    files = sorted(p.name for p in outs[0].iterdir())
    same = files == sorted(p.name for p in outs[1].iterdir()) and all(
        (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes() for f in files
    )
    ok = codes == [0, 0] and same and len(files) == 2 * len(benchmarks.NAMES)
    criterion(8, "two bench all runs write identical traces", ok, f"{len(files)} files compared")
    assert ok
