"""Dense fixed-step reference simulator for the first-crossing tests.

Forward Euler with a tiny step.  Between two steps the trajectory is a
straight segment, so the first point on it where a guard holds is found
exactly: every atom bounds the segment parameter from one side, a
conjunctive term is an intersection of such bounds, and the guard takes
the earliest point of any term.  Strict comparators are read as their
closure.  Unlike a sign test at the step ends this also catches
equality bands.
"""

from __future__ import annotations

from qsha.expr import compile_vector, evaluate
from qsha.model import guard_to_dnf


def _first_point(terms, a, b):
    """Smallest s in [0, 1] where a + (b - a) s satisfies some term."""
    best = None
    for term in terms:
        lo, hi = 0.0, 1.0
        for i, op, c in term:
            d = b[i] - a[i]
            upper = op in ("<=", "<")
            if d == 0.0:
                ok = a[i] <= c if upper else a[i] >= c
                if not ok:
                    lo, hi = 1.0, 0.0
                continue
            s = (c - a[i]) / d
            # x <= c holds for s >= s* when falling, s <= s* when rising
            if (d < 0) == upper:
                lo = max(lo, s)
            else:
                hi = min(hi, s)
        if lo <= hi and (best is None or lo < best):
            best = lo
    return best


def dense_crossings(ha, horizon: float, dt: float = 1e-6, max_switches: int = 10_000) -> list[float]:
    names = ha.variables
    index = {v: i for i, v in enumerate(names)}
    flows = {loc: compile_vector([ha.flows[loc][v] for v in names], names) for loc in ha.locations}
    out = {loc: [] for loc in ha.locations}
    for k, e in enumerate(ha.edges):
        terms = [[(index[a.var], a.op, a.level) for a in term] for term in guard_to_dnf(e.guard)]
        levels = sorted({(i, c) for term in terms for i, _, c in term})
        src = " or ".join(f"(a[{i}] - {c!r}) * (b[{i}] - {c!r}) <= 0.0" for i, c in levels) or "False"
        touches = eval(f"lambda a, b: {src}")
        out[e.source].append((k, terms, touches))

    loc = ha.initial_location
    x = [float(ha.initial_valuation[v]) for v in names]
    t, t_start, n = 0.0, 0.0, 0
    crossings = []
    while t < horizon and len(crossings) < max_switches:
        f = flows[loc](x, t)
        t_next = t_start + (n + 1) * dt
        h = t_next - t
        y = [xi + fi * h for xi, fi in zip(x, f)]
        hit = None
        for k, terms, touches in out[loc]:
            if touches(x, y) or _first_point(terms, x, x) == 0.0:
                s = _first_point(terms, x, y)
                if s is not None and (hit is None or s < hit[1]):
                    hit = (k, s)
        if hit is None:
            x, t, n = y, t_next, n + 1
            continue
        k, s = hit
        t = t + s * h
        x = [xi + fi * s * h for xi, fi in zip(x, f)]
        e = ha.edges[k]
        env = dict(zip(names, x))
        x = [evaluate(e.resets[v], env, t) if v in e.resets else env[v] for v in names]
        loc = e.target
        crossings.append(t)
        t_start, n = t, 0
    return crossings
