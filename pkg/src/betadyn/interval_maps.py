"""The two map families and their orbit engines.

``Params`` is ``x -> beta*x + alpha mod 1`` on ``[0, 1)``, made right-continuous
at its breakpoints ``a_j = (j - alpha)/beta``.  ``GenParams`` is a generalized
beta-map: lap ``j`` is ``beta*x - j`` or ``1 - (beta*x - j)`` according to the
sign ``s_j``, with breakpoints ``a_j = j/beta`` where the map is left undefined.

Orbits come from three engines:

* ``RationalOrbit``: exact iteration with integer numerators over a known
  denominator (no gcd per step), for rational parameters and points;
* ``FieldOrbit``: exact iteration with the generic number protocol, used for
  quadratic irrationals;
* ``fixed_point_floats``: interval iteration whose working precision shrinks as
  the remaining horizon shrinks, for long orbits and non-exact parameters.

Every engine accepts a ``side``: ``None`` evaluates the map at the point itself,
``+1``/``-1`` follow the limit from the right/left, which is how kneading
sequences are obtained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

import gmpy2
import numpy as np

from .errors import BreakpointHit, DomainError, UndecidableBranch
from .numerics import (
    DEFAULT_MAX_BITS,
    Approx,
    QuadraticNumber,
    is_exact,
    to_number,
)

_HASH_PRIME = (1 << 61) - 1


@dataclass(frozen=True)
class SignSeq:
    """Orientation of each lap: ``+1`` increasing, ``-1`` decreasing."""

    signs: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if len(signs) < 2:
            raise DomainError("a sign sequence needs at least two laps")
        if any(s not in (1, -1) for s in signs):
            raise DomainError("signs must be +1 or -1")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def parse(cls, text: str) -> "SignSeq":
        """``'+-'`` is the tent map, ``'++'`` the beta-map, ``'--'`` the reversed one."""
        table = {"+": 1, "-": -1}
        try:
            return cls(tuple(table[c] for c in text.strip()))
        except KeyError as exc:
            raise DomainError(f"bad sign string {text!r}") from exc

    @classmethod
    def increasing(cls, k: int) -> "SignSeq":
        return cls((1,) * k)

    @property
    def k(self) -> int:
        return len(self.signs)

    def delta(self, word) -> int:
        """Product of the signs of the letters of ``word`` (``+1`` for the empty word)."""
        d = 1
        for letter in word:
            d *= self.signs[letter]
        return d

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self.signs)


def _ceil(x) -> int:
    return math.ceil(x)


@dataclass(frozen=True)
class Params:
    """A point ``(alpha, beta)`` of the parameter rectangle ``[0,1) x (1, inf)``."""

    alpha: object
    beta: object

    def __post_init__(self):
        alpha, beta = to_number(self.alpha), to_number(self.beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if not (0 <= alpha < 1):
            raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
        if not beta > 1:
            raise DomainError(f"beta must exceed 1, got {beta}")

    @property
    def k(self) -> int:
        return _ceil(self.alpha + self.beta)

    @property
    def signs(self) -> SignSeq:
        return SignSeq.increasing(self.k)

    @property
    def exact(self) -> bool:
        return is_exact(self.alpha) and is_exact(self.beta)

    @property
    def rational(self) -> bool:
        return isinstance(self.alpha, Fraction) and isinstance(self.beta, Fraction)

    def breakpoints(self) -> list:
        """``a_1 < ... < a_{k-1}`` in ``(0, 1)``."""
        return [(j - self.alpha) / self.beta for j in range(1, self.k)]

    def partition(self) -> list:
        """``a_0 = 0, a_1, ..., a_{k-1}, a_k = 1``."""
        return [Fraction(0)] + self.breakpoints() + [Fraction(1)]

    def branch(self, j: int, x):
        return self.beta * x + self.alpha - j

    def step(self, x, side: Optional[int] = None):
        """One step ``(T(x), digit, new_side)``.

        ``side`` ``None``/``+1`` is the right-continuous convention (digit is the
        floor), ``-1`` the left-continuous one, which returns values in ``(0, 1]``.
        """
        y = self.beta * x + self.alpha
        j = math.floor(y)
        if side == -1 and j >= 1 and y == j:
            j -= 1
        return y - j, j, side

    def describe(self) -> str:
        return f"T(alpha={self.alpha}, beta={self.beta})"


@dataclass(frozen=True)
class GenParams:
    """A generalized beta-map with slope ``beta`` in ``(k-1, k]`` and lap signs ``signs``."""

    beta: object
    signs: SignSeq

    def __post_init__(self):
        beta = to_number(self.beta)
        signs = self.signs if isinstance(self.signs, SignSeq) else (
            SignSeq.parse(self.signs) if isinstance(self.signs, str) else SignSeq(tuple(self.signs)))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "signs", signs)
        k = signs.k
        if not (k - 1 < beta <= k):
            raise DomainError(f"beta must lie in ({k - 1}, {k}] for {k} laps, got {beta}")
        if not beta > 1:
            raise DomainError("beta must exceed 1")

    @property
    def k(self) -> int:
        return self.signs.k

    @property
    def alpha(self):
        return Fraction(0)

    @property
    def exact(self) -> bool:
        return is_exact(self.beta)

    @property
    def rational(self) -> bool:
        return isinstance(self.beta, Fraction)

    def breakpoints(self) -> list:
        return [j / self.beta for j in range(1, self.k)]

    def partition(self) -> list:
        return [Fraction(0)] + self.breakpoints() + [Fraction(1)]

    def branch(self, j: int, x):
        t = self.beta * x - j
        return t if self.signs.signs[j] == 1 else 1 - t

    def step(self, x, side: Optional[int] = None):
        """One step ``(T(x), lap, new_side)``; ``BreakpointHit`` at ``a_j`` when ``side`` is None.

        ``x = 1`` belongs to the last lap, closed at 1, and laps are extended by
        continuity to their endpoints.
        """
        z = self.beta * x
        j = math.floor(z)
        k = self.k
        if j >= k:
            j = k - 1
        elif j >= 1 and z == j:
            if side is None:
                raise BreakpointHit(f"x = {x} is the breakpoint a_{j}", point=x)
            if side == -1:
                j -= 1
        t = z - j
        s = self.signs.signs[j]
        y = t if s == 1 else 1 - t
        return y, j, (None if side is None else side * s)

    def describe(self) -> str:
        return f"T(beta={self.beta}, signs={self.signs})"


IntervalMap = Union[Params, GenParams]


@dataclass(frozen=True)
class OrbitPoint:
    x: object
    step: int
    hit_breakpoint: bool = False


class FieldOrbit:
    """Exact orbit using the arithmetic of the parameter's number field."""

    def __init__(self, m: IntervalMap, x0, side: Optional[int] = None):
        self.map = m
        self.x = to_number(x0) if not isinstance(x0, (Fraction, QuadraticNumber)) else x0
        self.side = side
        self.n = 0

    def step(self) -> int:
        try:
            y, j, side = self.map.step(self.x, self.side)
        except BreakpointHit as exc:
            raise BreakpointHit(str(exc), step=self.n, point=self.x) from None
        self.x, self.side = y, side
        self.n += 1
        return j

    @property
    def value(self):
        return self.x

    def float_value(self) -> float:
        return float(self.x)

    def key(self):
        return self.x, self.side

    def same_point(self, other_state) -> bool:
        return other_state == (self.x, self.side)

    def state(self):
        return self.x, self.side


class RationalOrbit:
    """Exact orbit for rational parameters with numerator ``N`` over denominator ``D``.

    The denominator after ``n`` steps is ``q**n * D0`` where ``beta = p/q``;
    keeping it unreduced avoids a gcd per step.
    """

    def __init__(self, m: IntervalMap, x0, side: Optional[int] = None):
        if not m.rational:
            raise TypeError("RationalOrbit needs rational parameters")
        x0 = Fraction(x0)
        self.map = m
        self.side = side
        self.n = 0
        beta = m.beta
        alpha = m.alpha
        self._p = gmpy2.mpz(beta.numerator)
        self._q = gmpy2.mpz(beta.denominator)
        self._a = gmpy2.mpz(alpha.numerator)
        b = alpha.denominator
        self._gen = isinstance(m, GenParams)
        self._k = m.k
        self._signs = m.signs.signs
        self.N = gmpy2.mpz(x0.numerator * b)
        self.D = gmpy2.mpz(x0.denominator * b)
        # E = D / b, so alpha * q * D = a * q * E
        self._E = gmpy2.mpz(x0.denominator)

    def step(self) -> int:
        p, q, N, D = self._p, self._q, self.N, self.D
        qD = q * D
        if not self._gen:
            Y = p * N + self._a * q * self._E
            j, r = gmpy2.f_divmod(Y, qD)
            if self.side == -1 and r == 0 and j >= 1:
                j -= 1
            self.N = Y - j * qD
        else:
            Z = p * N
            j, r = gmpy2.f_divmod(Z, qD)
            k = self._k
            if j >= k:
                j = gmpy2.mpz(k - 1)
            elif j >= 1 and r == 0:
                if self.side is None:
                    raise BreakpointHit(f"orbit hit a_{int(j)}", step=self.n, point=self.value)
                if self.side == -1:
                    j -= 1
            t = Z - j * qD
            s = self._signs[int(j)]
            self.N = t if s == 1 else qD - t
            if self.side is not None:
                self.side *= s
        self.D = qD
        self._E = q * self._E
        self.n += 1
        return int(j)

    @property
    def value(self) -> Fraction:
        return Fraction(int(self.N), int(self.D))

    def float_value(self) -> float:
        return int(self.N) / int(self.D)

    def key(self):
        d = self.D % _HASH_PRIME
        if d == 0:
            return self.value, self.side
        return int(self.N % _HASH_PRIME) * pow(int(d), -1, _HASH_PRIME) % _HASH_PRIME, self.side

    def state(self):
        return self.N, self.D, self.side

    def same_point(self, other_state) -> bool:
        N, D, side = other_state
        return side == self.side and N * self.D == self.N * D


def exact_orbit(m: IntervalMap, x0, side: Optional[int] = None):
    """Pick the fastest exact engine for ``m`` and ``x0``."""
    x0 = to_number(x0)
    if not m.exact or not is_exact(x0):
        raise TypeError("exact orbits need exact parameters and starting point")
    if m.rational and isinstance(x0, Fraction):
        return RationalOrbit(m, x0, side)
    return FieldOrbit(m, x0, side)


def _check_domain(m: IntervalMap, x, side=None):
    if isinstance(m, Params):
        if side == -1:
            if not (0 < x <= 1):
                raise DomainError("left-continuous orbits live on (0, 1]")
        elif not (0 <= x < 1):
            raise DomainError("T_{alpha,beta} is defined on [0, 1)")
    elif not (0 <= x <= 1):
        raise DomainError("generalized beta-maps act on [0, 1]")


def t_ab_step(p: Params, x, side: Optional[int] = None):
    """``(T(x), digit)`` for the right-continuous ``T_{alpha,beta}`` (or left-continuous with ``side=-1``)."""
    x = to_number(x)
    _check_domain(p, x, side)
    y, j, _ = p.step(x, side)
    return y, j


def t_ab_digits(p: Params, x, n: int, side: Optional[int] = None) -> list[int]:
    orbit = exact_orbit(p, x, side)
    return [orbit.step() for _ in range(n)]


def t_ab_power(p: Params, x, n: int, side: Optional[int] = None):
    """``T^n(x)`` by repeated stepping."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    x = to_number(x)
    _check_domain(p, x, side)
    if n == 0:
        return x
    if p.exact and is_exact(x):
        orbit = exact_orbit(p, x, side)
        for _ in range(n):
            orbit.step()
        return orbit.value
    for _ in range(n):
        x, _, side = p.step(x, side)
    return x


def t_ab_power_closed(p: Params, x, digits) -> object:
    """Closed form ``beta^n x + alpha (beta^n - 1)/(beta - 1) - sum_j i_j beta^(n-j-1)``.

    ``digits`` are ``i_0, ..., i_{n-1}`` of ``x``; Horner evaluation keeps it exact.
    """
    x = to_number(x)
    n = len(digits)
    beta, alpha = p.beta, p.alpha
    power = beta ** n if n else Fraction(1)
    geometric = sum((beta ** i for i in range(n)), Fraction(0))
    acc = Fraction(0)
    for d in digits:
        acc = acc * beta + d
    return power * x + alpha * geometric - acc


def gen_step(g: GenParams, x, side: Optional[int] = None):
    """``(T(x), lap)`` for a generalized beta-map; ``BreakpointHit`` on ``a_j``."""
    x = to_number(x)
    _check_domain(g, x)
    y, j, _ = g.step(x, side)
    return y, j


def detect_critical(g: IntervalMap, x0, horizon: int) -> Optional[int]:
    """First ``n <= horizon`` with ``T^n(x0)`` a breakpoint, or ``None``.

    Only generalized maps have undefined breakpoints; for exact input the answer
    is exact, otherwise ``UndecidableBranch`` carries the step index.
    """
    if horizon < 0:
        raise DomainError("horizon must be nonnegative")
    if isinstance(g, Params):
        return None
    x0 = to_number(x0)
    _check_domain(g, x0)
    if g.exact and is_exact(x0):
        orbit = exact_orbit(g, x0)
        for n in range(horizon + 1):
            try:
                orbit.step()
            except BreakpointHit:
                return n
        return None
    try:
        fixed_point_floats(g, x0, horizon + 1)
    except BreakpointHit as exc:
        return exc.step
    return None


def iter_orbit(m: IntervalMap, x0, n: int, side: Optional[int] = None) -> Iterator[OrbitPoint]:
    """Yield ``OrbitPoint`` for ``T^0(x0), ..., T^{n-1}(x0)``; a breakpoint ends the orbit."""
    orbit = exact_orbit(m, x0, side)
    for i in range(n):
        x = orbit.value
        try:
            orbit.step()
        except BreakpointHit:
            yield OrbitPoint(x, i, True)
            return
        yield OrbitPoint(x, i, False)


@dataclass
class FloatOrbit:
    """Floating-point record of an orbit: points ``T^i(x0)`` and their digits."""

    values: np.ndarray
    digits: np.ndarray
    truncated_at: Optional[int] = None
    period: Optional[tuple] = None
    engine: str = ""
    guard_bits: Optional[int] = None

    def __len__(self):
        return len(self.values)


def _log2_upper(beta) -> float:
    return math.log2(float(beta)) * (1 + 1e-9) + 1e-12


def _approx_params(m: IntervalMap, bits: int):
    return Approx.from_value(m.beta, bits), Approx.from_value(m.alpha, bits)


def fixed_point_floats(m: IntervalMap, x0, n: int, *, side: Optional[int] = None,
                       guard_bits: Optional[int] = None, start: int = 0) -> FloatOrbit:
    """Orbit of length ``n`` in fixed-point interval arithmetic.

    Working precision at step ``i`` is ``(n - i) * log2(beta) + guard_bits`` so
    each point is known to about ``2**-guard_bits`` when it is recorded.  Raises
    ``UndecidableBranch`` (``step`` set, offset by ``start``) when an interval
    touches a branch threshold and ``BreakpointHit`` is never raised here.
    """
    if guard_bits is None:
        guard_bits = 64 + 2 * max(n, 1).bit_length()
    gen = isinstance(m, GenParams)
    k = m.k
    signs = m.signs.signs
    lb = _log2_upper(m.beta)
    P = int(math.ceil(n * lb)) + guard_bits
    one = gmpy2.mpz(1) << P
    x_enc = Approx.from_value(x0, P)
    L, H = gmpy2.mpz(x_enc.lo), gmpy2.mpz(x_enc.hi)
    values = np.empty(n, dtype=np.float64)
    digits = np.empty(n, dtype=np.int16)
    rational = m.rational
    if rational:
        pb = gmpy2.mpz(m.beta.numerator * m.alpha.denominator)
        qb = gmpy2.mpz(m.beta.denominator * m.alpha.denominator)
        aq = gmpy2.mpz(m.alpha.numerator * m.beta.denominator)
    else:
        PB = P + guard_bits
        b_enc, a_enc = _approx_params(m, PB)
        bL, bH = gmpy2.mpz(b_enc.lo), gmpy2.mpz(b_enc.hi)
        aL, aH = gmpy2.mpz(a_enc.lo), gmpy2.mpz(a_enc.hi)
    cur_side = side
    for i in range(n):
        if P > 60:
            values[i] = float(int(L >> (P - 60))) / 1152921504606846976.0
        else:
            values[i] = float(int(L)) / float(1 << P)
        one = gmpy2.mpz(1) << P
        if rational:
            lo = gmpy2.f_div(pb * L + (aq << P), qb)
            hi = gmpy2.c_div(pb * H + (aq << P), qb)
        else:
            lo = gmpy2.f_div(bL * L, gmpy2.mpz(1) << PB) + (aL >> (PB - P))
            hi = gmpy2.c_div(bH * H, gmpy2.mpz(1) << PB) + gmpy2.c_div(aH, gmpy2.mpz(1) << (PB - P))
        j_lo, j_hi = int(lo >> P), int(hi >> P)
        if gen:
            j_lo, j_hi = min(j_lo, k - 1), min(j_hi, k - 1)
            if j_lo != j_hi or (1 <= j_lo and lo == j_lo * one and not (L == H == one)):
                raise UndecidableBranch(f"step {start + i}: interval meets a breakpoint",
                                        step=start + i, bits=P)
            j = j_lo
            t_lo, t_hi = lo - j * one, hi - j * one
            if signs[j] == -1:
                t_lo, t_hi = one - t_hi, one - t_lo
                if cur_side is not None:
                    cur_side = -cur_side
        else:
            if side == -1:
                j_lo = int((lo - 1) >> P) if lo > 0 else j_lo
                j_hi = int((hi - 1) >> P) if hi > 0 else j_hi
            if j_lo != j_hi:
                raise UndecidableBranch(f"step {start + i}: interval straddles a breakpoint",
                                        step=start + i, bits=P)
            j = j_lo
            t_lo, t_hi = lo - j * one, hi - j * one
        digits[i] = j
        P_next = int(math.ceil((n - i - 1) * lb)) + guard_bits
        s = P - P_next
        if s > 0:
            L = t_lo >> s
            H = -((-t_hi) >> s)
        else:
            L, H = t_lo << (-s), t_hi << (-s)
        P = P_next
    return FloatOrbit(values, digits, None, None, "fixed-point", guard_bits)


def _exact_prefix(m: IntervalMap, x0, limit: int, side=None):
    """Run the exact engine up to ``limit`` steps with cycle detection.

    Returns ``(values, digits, orbit, truncated_at, period)`` where ``period`` is
    ``(start, length)`` once a point repeats.
    """
    orbit = exact_orbit(m, x0, side)
    values: list[float] = []
    digits: list[int] = []
    seen: dict = {}
    for i in range(limit):
        key = orbit.key()
        bucket = seen.setdefault(key, [])
        for idx, st in bucket:
            if orbit.same_point(st):
                return values, digits, orbit, None, (idx, i - idx)
        bucket.append((i, orbit.state()))
        values.append(orbit.float_value())
        try:
            digits.append(orbit.step())
        except BreakpointHit:
            digits.append(-1)
            return values, digits, orbit, i, None
    return values, digits, orbit, None, None


def orbit_floats(m: IntervalMap, x0, n: int, *, side: Optional[int] = None,
                 exact_limit: int = 2048, guard_bits: Optional[int] = None,
                 max_guard_bits: int = DEFAULT_MAX_BITS) -> FloatOrbit:
    """``n`` orbit points of ``x0`` as floats, each located to well under ``1e-12``.

    Exact parameters: exact iteration with cycle detection for the first
    ``exact_limit`` steps, then fixed-point intervals from the exact point
    reached.  A fixed-point step that touches a threshold is resolved by exact
    iteration from the last exact checkpoint.  A breakpoint of a generalized map
    truncates the orbit (``truncated_at``).
    """
    x0 = to_number(x0)
    _check_domain(m, x0, side)
    if n <= 0:
        return FloatOrbit(np.empty(0), np.empty(0, dtype=np.int16))
    if not (m.exact and is_exact(x0)):
        return _fixed_point_with_escalation(m, x0, n, side, guard_bits, max_guard_bits)

    values, digits, orbit, trunc, period = _exact_prefix(m, x0, min(n, exact_limit), side)
    if trunc is not None:
        return FloatOrbit(np.array(values[:trunc]), np.array(digits[:trunc], dtype=np.int16),
                          trunc, None, "exact")
    if period is not None:
        start, length = period
        reps = n - len(values)
        cyc_v = values[start:start + length]
        cyc_d = digits[start:start + length]
        idx = np.arange(reps) % length
        vals = np.concatenate([np.array(values), np.array(cyc_v)[idx]]) if reps > 0 else np.array(values[:n])
        digs = np.concatenate([np.array(digits), np.array(cyc_d)[idx]]) if reps > 0 else np.array(digits[:n])
        return FloatOrbit(vals[:n], digs[:n].astype(np.int16), None, period, "exact")
    if len(values) >= n:
        return FloatOrbit(np.array(values[:n]), np.array(digits[:n], dtype=np.int16), None, None, "exact")

    chunks_v = [np.array(values)]
    chunks_d = [np.array(digits, dtype=np.int16)]
    done = len(values)
    checkpoint = orbit
    cur_side = orbit.side
    while done < n:
        remaining = n - done
        try:
            fo = fixed_point_floats(m, checkpoint.value, remaining, side=cur_side,
                                    guard_bits=guard_bits, start=done)
        except UndecidableBranch as exc:
            # advance the exact checkpoint to the ambiguous step and resume from there
            target = exc.step
            local_v, local_d = [], []
            while checkpoint.n < target + 1:
                local_v.append(checkpoint.float_value())
                try:
                    local_d.append(checkpoint.step())
                except BreakpointHit:
                    chunks_v.append(np.array(local_v))
                    chunks_d.append(np.array(local_d, dtype=np.int16))
                    vals = np.concatenate(chunks_v)
                    return FloatOrbit(vals, np.concatenate(chunks_d), checkpoint.n, None, "hybrid")
            chunks_v.append(np.array(local_v))
            chunks_d.append(np.array(local_d, dtype=np.int16))
            done = checkpoint.n
            cur_side = checkpoint.side
            checkpoint = exact_orbit(m, checkpoint.value, cur_side)
            checkpoint.n = done
            continue
        chunks_v.append(fo.values)
        chunks_d.append(fo.digits)
        done = n
    return FloatOrbit(np.concatenate(chunks_v)[:n], np.concatenate(chunks_d)[:n], None, None, "hybrid",
                      guard_bits)


def _fixed_point_with_escalation(m, x0, n, side, guard_bits, max_guard_bits) -> FloatOrbit:
    g = guard_bits or 64 + 2 * max(n, 1).bit_length()
    while True:
        try:
            return fixed_point_floats(m, x0, n, side=side, guard_bits=g)
        except UndecidableBranch as exc:
            if 2 * g > max_guard_bits:
                if isinstance(m, GenParams) and exc.step is not None:
                    fo = fixed_point_floats(m, x0, exc.step, side=side, guard_bits=g) if exc.step else None
                    vals = fo.values if fo is not None else np.empty(0)
                    digs = fo.digits if fo is not None else np.empty(0, dtype=np.int16)
                    return FloatOrbit(vals, digs, exc.step, None, "fixed-point", g)
                raise
            g *= 2


def exact_orbit_points(m: IntervalMap, x0, limit: int, keep: Optional[int] = None):
    """Exact points ``T^0(x0), ...`` with cycle detection over ``limit`` steps.

    Returns ``(points, period)``; ``period = (start, length)`` means the orbit is
    ``points[:start]`` followed by ``points[start:start+length]`` repeated, and
    ``points`` then holds exactly preperiod plus one cycle.  Without a cycle only
    the first ``keep`` points are returned (all of them when ``keep`` is None).
    """
    orbit = exact_orbit(m, x0)
    points: list = []
    seen: dict = {}
    for i in range(limit):
        bucket = seen.setdefault(orbit.key(), [])
        for idx, st in bucket:
            if orbit.same_point(st):
                return points, (idx, i - idx)
        bucket.append((i, orbit.state()))
        if keep is None or i < keep:
            points.append(orbit.value)
        orbit.step()
    return points, None
