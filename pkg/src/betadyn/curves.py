"""Curves of constant kneading: parameters sharing the coding ``u`` of 0.

Along ``alpha(beta) = (beta - 1) sum_j u_j beta^-(j+1)`` the coding of 0 stays
equal to ``u`` for every ``beta`` above a threshold ``beta_u``; for eventually
periodic ``u`` the orbit of 0 is then a periodic cycle, so 0 is not normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NotAttainable, OutsideParameterSpace
from .interval_maps import Params, exact_orbit_points
from .measures import parry_density
from .normality import TestSuite, default_suite, density_integrals, normality_defect
from .numerics import ComputableReal, to_number
from .symbolic import EventuallyPeriodic, code

DEFAULT_DEPTH = 64


def _as_word(u) -> EventuallyPeriodic:
    if isinstance(u, EventuallyPeriodic):
        return u
    if isinstance(u, str):
        return EventuallyPeriodic.parse(u)
    raise DomainError("u must be an eventually periodic word")


def curve_alpha(u, beta):
    """``alpha(beta)`` in closed form; exact for exact ``beta``.

    Raises ``OutsideParameterSpace`` when the value leaves ``[0, 1)``.
    """
    u = _as_word(u)
    beta = to_number(beta)
    if not beta > 1:
        raise DomainError("beta must exceed 1")
    pre, per = u.preperiod, u.period
    s = Fraction(0)
    inv = 1 / beta
    w = inv
    for d in pre:
        s = s + d * w
        w = w * inv
    c = Fraction(0)
    v = inv
    for d in per:
        c = c + d * v
        v = v * inv
    # v is now beta^-(L+1); the periodic tail is beta^-P * c / (1 - beta^-L)
    tail = (w * beta) * c / (1 - v * beta)
    alpha = (beta - 1) * (s + tail)
    if not isinstance(alpha, ComputableReal) and not (0 <= alpha < 1):
        raise OutsideParameterSpace(f"alpha({beta}) = {alpha} is outside [0, 1)")
    return alpha


def curve_alpha_partial(u, beta, terms: int):
    """Partial sum of the defining series over ``terms`` digits (an oracle for ``curve_alpha``)."""
    u = _as_word(u)
    beta = to_number(beta)
    return (beta - 1) * sum((Fraction(u.digit(j)) / beta ** (j + 1) for j in range(terms)), Fraction(0))


@dataclass(frozen=True)
class CodingCheck:
    beta: object
    alpha: object
    valid: bool
    boundary_hits: tuple = ()
    reason: str = ""


def verify_constant_coding_detail(u, beta, depth: int = DEFAULT_DEPTH) -> CodingCheck:
    """Code 0 under ``(alpha(beta), beta)`` and compare with ``u``.

    ``boundary_hits`` lists the steps where the orbit of 0 landed exactly on a
    breakpoint; right-continuity sends such a point to the upper branch.
    """
    u = _as_word(u)
    beta = to_number(beta)
    try:
        alpha = curve_alpha(u, beta)
    except OutsideParameterSpace as exc:
        return CodingCheck(beta, None, False, (), str(exc))
    p = Params(alpha, beta)
    if max(u.preperiod + u.period) >= p.k:
        return CodingCheck(beta, alpha, False, (), f"digits exceed alphabet size {p.k}")
    x = Fraction(0)
    hits = []
    for n in range(depth):
        y = beta * x + alpha
        j = math.floor(y)
        if y == j and j >= 1:
            hits.append(n)
        if j != u.digit(n):
            return CodingCheck(beta, alpha, False, tuple(hits), f"digit {n} is {j}, expected {u.digit(n)}")
        x = y - j
    return CodingCheck(beta, alpha, True, tuple(hits))


def verify_constant_coding(u, betas: Sequence, depth: int = DEFAULT_DEPTH) -> list[bool]:
    """Per ``beta``: does 0 code to ``u`` (to ``depth`` digits) on the curve?"""
    return [verify_constant_coding_detail(u, b, depth).valid for b in betas]


@dataclass(frozen=True)
class BetaBracket:
    """``beta_u`` lies in ``[lo, hi]``; the predicate value at both ends is recorded.

    ``valid_lo`` is ``None`` when ``lo = 1`` (not a parameter of the family).
    """

    lo: object
    hi: object
    valid_lo: Optional[bool]
    valid_hi: bool

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, x):
        return self.lo <= x <= self.hi


def beta_u_search(u, tolerance=Fraction(1, 10 ** 6), depth: int = DEFAULT_DEPTH,
                  beta_max=Fraction(64)) -> BetaBracket:
    """Bisection for the left end of the validity range of the curve ``[u]``.

    Validity is assumed to be upward closed in ``beta``.  Raises ``NotAttainable``
    when no ``beta`` up to ``beta_max`` codes 0 as ``u``.
    """
    u = _as_word(u)
    tol = Fraction(tolerance)
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if u.is_zero:
        return BetaBracket(Fraction(1), Fraction(1), None, True)
    pred = lambda b: verify_constant_coding_detail(u, b, depth).valid
    hi = Fraction(2)
    while not pred(hi):
        hi *= 2
        if hi > beta_max:
            raise NotAttainable(f"{u.pretty()} is not the coding of 0 for any beta up to {beta_max}")
    lo = Fraction(1)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return BetaBracket(lo, hi, None if lo == 1 else pred(lo), True)


@dataclass
class KneadingCurve:
    """The curve ``[u]`` with its threshold bracket and the slopes checked so far."""

    u: EventuallyPeriodic
    beta_u: Optional[BetaBracket] = None
    validated: list = field(default_factory=list)

    def alpha_of(self, beta):
        return curve_alpha(self.u, beta)

    def validate(self, betas: Sequence, depth: int = DEFAULT_DEPTH) -> list[CodingCheck]:
        checks = [verify_constant_coding_detail(self.u, b, depth) for b in betas]
        self.validated.extend(checks)
        return checks

    @property
    def validated_range(self) -> list:
        return [c.beta for c in self.validated if c.valid]


def kneading_curve(u, betas: Sequence = (), depth: int = DEFAULT_DEPTH, search: bool = True,
                   tolerance=Fraction(1, 10 ** 6)) -> KneadingCurve:
    u = _as_word(u)
    bracket = None
    if search:
        try:
            bracket = beta_u_search(u, tolerance, depth)
        except NotAttainable:
            bracket = None
    curve = KneadingCurve(u, bracket)
    curve.validate(betas, depth)
    return curve


def zero_coding(p: Params, window: int = 4096) -> Optional[EventuallyPeriodic]:
    """The coding of 0 as an eventually periodic word, when the orbit of 0 cycles within ``window``."""
    points, period = exact_orbit_points(p, Fraction(0), window)
    if period is None:
        return None
    start, length = period
    digits = code(p, 0, start + length).digits
    return EventuallyPeriodic(digits[:start], digits[start:])


@dataclass(frozen=True)
class DefectDemo:
    """Defect of ``x0 = 0`` on the curve: empirical at ``n`` and its exact limit."""

    beta: object
    alpha: object
    n: int
    defect: float
    asymptotic_defect: Optional[float]
    cycle: tuple
    cycle_means: tuple
    integrals: tuple


def curve_defect_demo(u, beta, n: int = 10 ** 5, suite: Optional[TestSuite] = None,
                      n_terms: int = 80) -> DefectDemo:
    """Normality defect of 0 at ``(alpha(beta), beta)`` with the exact cycle limit."""
    u = _as_word(u)
    suite = suite or default_suite()
    beta = to_number(beta)
    alpha = curve_alpha(u, beta)
    p = Params(alpha, beta)
    d = parry_density(p, n_terms)
    ints = density_integrals(suite, d)
    defect = normality_defect(p, 0, suite, n, d, integrals=ints)
    cycle, means, asym = (), (), None
    if p.exact:
        points, period = exact_orbit_points(p, Fraction(0), 4096)
        if period is not None:
            start, length = period
            cycle = tuple(points[start:start + length])
            xs = np.array([float(c) for c in cycle])
            means = tuple(float(np.mean(np.asarray(f(xs), dtype=float))) for f in suite.functions)
            asym = max(abs(a - b) / (1 + s) for a, b, s in zip(means, ints, suite.sups))
    return DefectDemo(beta, alpha, n, defect, asym, cycle, means, tuple(ints))
