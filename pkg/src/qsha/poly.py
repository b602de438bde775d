"""Real univariate polynomials for the quantized-state step equations.

Coefficients are stored in ascending powers.  The step equations built
by :mod:`qsha.qss` have a zero constant term (they are displacements
from the current value); :func:`attach_quantum` supplies the constant
``±Δq`` so that Descartes' rule guarantees a positive real root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


class ZeroPolynomialError(ValueError):
    pass


@dataclass(frozen=True)
class Polynomial:
    coefficients: tuple[float, ...]

    def __init__(self, coefficients: Sequence[float]):
        cs = [float(c) for c in coefficients]
        if not all(math.isfinite(c) for c in cs):
            raise ValueError(f"non-finite coefficient in {cs}")
        while len(cs) > 1 and cs[-1] == 0.0:
            cs.pop()
        object.__setattr__(self, "coefficients", tuple(cs) or (0.0,))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coefficients)

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        cs = self.coefficients
        return Polynomial([k * cs[k] for k in range(1, len(cs))] or [0.0])

    def scale(self) -> float:
        return max(abs(c) for c in self.coefficients)


def descartes_sign_changes(p: Polynomial) -> int:
    """Sign alternations in the nonzero coefficients, zeros skipped."""
    if p.is_zero():
        raise ZeroPolynomialError("sign changes of the zero polynomial")
    signs = [c > 0 for c in p.coefficients if c != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def attach_quantum(p_no_const: Polynomial, delta_q_magnitude: float) -> Polynomial:
    """Return ``p ± Δq`` with an odd number of coefficient sign changes.

    If the nonzero coefficients of ``p`` alternate an even number of times,
    the constant takes the sign opposite to the lowest nonzero coefficient;
    otherwise it takes the same sign.  Either way the count becomes odd, so
    at least one positive real root exists.
    """
    if p_no_const.is_zero():
        raise ZeroPolynomialError("cannot attach a quantum to the zero polynomial")
    if p_no_const.coefficients[0] != 0.0:
        raise ValueError("polynomial must have a zero constant term")
    if not delta_q_magnitude > 0:
        raise ValueError(f"quantum magnitude must be positive, got {delta_q_magnitude}")
    lowest = next(c for c in p_no_const.coefficients if c != 0.0)
    if descartes_sign_changes(p_no_const) % 2 == 0:
        const = -math.copysign(delta_q_magnitude, lowest)
    else:
        const = math.copysign(delta_q_magnitude, lowest)
    return Polynomial((const,) + p_no_const.coefficients[1:])


def cauchy_bound(p: Polynomial) -> float:
    """Every real root lies in ``[-bound, bound]``."""
    cs = p.coefficients
    lead = abs(cs[-1])
    return 1.0 + max(abs(c) / lead for c in cs[:-1])


def _refine(p: Polynomial, dp: Polynomial, lo: float, hi: float, f_lo: float, tol: float) -> float:
    """Root of ``p`` inside a bracket where ``p`` is monotone.

    Safeguarded Newton: take the Newton step when it stays inside the
    bracket, otherwise bisect.
    """
    x = 0.5 * (lo + hi)
    for _ in range(200):
        fx = p(x)
        if fx == 0.0:
            return x
        if (fx > 0) == (f_lo > 0):
            lo, f_lo = x, fx
        else:
            hi = x
        if hi - lo <= tol * max(abs(hi), abs(lo)):
            break
        d = dp(x)
        x = x - fx / d if d != 0.0 else lo
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


def _eval_noise(p: Polynomial, x: float) -> float:
    """Rounding-error bound of Horner evaluation of ``p`` at ``x``."""
    acc = 0.0
    for c in reversed(p.coefficients):
        acc = acc * abs(x) + abs(c)
    return 4 * len(p.coefficients) * math.ulp(1.0) * acc


def _roots_in(p: Polynomial, lo: float, hi: float, tol: float, first: bool = False) -> list[float]:
    """All real roots of ``p`` in ``(lo, hi]``, ascending.

    The interval is cut at the critical points of ``p`` (found by the same
    routine applied to the derivative); ``p`` is monotone on each piece, so
    each piece holds at most one root, found from a sign change.  An
    interior critical point where ``p`` vanishes to within rounding is an
    even-multiplicity root and is reported as such.
    """
    if p.degree <= 0:
        return []
    if p.degree == 1:
        r = -p.coefficients[0] / p.coefficients[1]
        return [r] if lo < r <= hi else []
    dp = p.derivative()
    cuts = [lo] + _roots_in(dp, lo, hi, tol) + [hi]
    roots = []
    f_a = p(lo)
    for i in range(1, len(cuts)):
        a, b = cuts[i - 1], cuts[i]
        f_b = p(b)
        if f_b == 0.0:
            roots.append(b)
        elif f_a != 0.0 and (f_a > 0) != (f_b > 0):
            roots.append(_refine(p, dp, a, b, f_a, tol))
        elif i < len(cuts) - 1 and abs(f_b) <= _eval_noise(p, b):
            roots.append(b)
            f_b = 0.0
        if first and roots:
            break
        f_a = f_b
    return roots


def smallest_positive_real_root(p: Polynomial, tol: float = 1e-12) -> float | None:
    """Smallest strictly positive real root of ``p``, or ``None``.

    A root at ``t = 0`` never counts; the next strictly positive root is
    returned instead.
    """
    if p.is_zero():
        raise ZeroPolynomialError("roots of the zero polynomial")
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    cs = list(p.coefficients)
    while cs[0] == 0.0 and len(cs) > 1:
        cs.pop(0)  # divide out t; roots at zero are not candidates
    q = Polynomial(cs)
    if q.degree == 0:
        return None
    bound = cauchy_bound(q)
    roots = _roots_in(q, 0.0, bound, tol, first=True)
    return roots[0] if roots else None
