"""Words, lazily realized digit streams, the sign-twisted order and kneading data."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

from .errors import (
    BreakpointHit,
    DomainError,
    IndeterminateOrder,
    InternalInconsistency,
    UndecidableBranch,
)
from .interval_maps import GenParams, IntervalMap, Params, SignSeq, _check_domain, exact_orbit, fixed_point_floats
from .numerics import is_exact, to_number

DEFAULT_PROBE = 256


class Order(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class SymbolWord:
    """A finite word over ``{0, ..., k-1}``.

    ``stop`` records why a coding ended early: ``'breakpoint'`` or
    ``'undecidable'``; ``None`` means the word simply has the requested length.
    """

    digits: tuple
    k: int = 10
    stop: Optional[str] = None

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        object.__setattr__(self, "digits", digits)
        if any(d < 0 or d >= self.k for d in digits):
            raise DomainError(f"digits of {digits} do not fit alphabet size {self.k}")

    @classmethod
    def parse(cls, text: str, k: Optional[int] = None) -> "SymbolWord":
        """ASCII digit string (``'0101'``) or comma separated integers (``'0,10,3'``)."""
        text = text.strip()
        if "," in text:
            digits = [int(t) for t in text.split(",") if t.strip()]
        else:
            digits = [int(c) for c in text]
        if k is None:
            k = max(2, max(digits, default=0) + 1)
        return cls(tuple(digits), k)

    def __len__(self):
        return len(self.digits)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return SymbolWord(self.digits[i], self.k)
        return self.digits[i]

    def __iter__(self):
        return iter(self.digits)

    def __add__(self, other):
        return SymbolWord(self.digits + tuple(other), max(self.k, getattr(other, "k", 0)))

    def shift(self, m: int = 1) -> "SymbolWord":
        return SymbolWord(self.digits[m:], self.k)

    @property
    def truncated(self) -> bool:
        return self.stop is not None

    def __str__(self):
        if self.k <= 10:
            return "".join(map(str, self.digits))
        return ",".join(map(str, self.digits))


class SymbolStream:
    """A digit sequence realized on demand and memoized.

    A ``BreakpointHit`` or ``UndecidableBranch`` raised by the producer ends the
    stream; ``status(i)`` then reports ``'breakpoint'``/``'undecidable'`` for
    every index from the stop on.  Extension is guarded by a lock so concurrent
    readers always see a consistent prefix.
    """

    def __init__(self, producer: Iterator[int], k: int, label: str = ""):
        self._producer = producer
        self.k = k
        self.label = label
        self._digits: list[int] = []
        self._stop: Optional[str] = None
        self._lock = threading.Lock()

    def _extend(self, n: int) -> None:
        if len(self._digits) >= n or self._stop is not None:
            return
        with self._lock:
            while len(self._digits) < n and self._stop is None:
                try:
                    self._digits.append(int(next(self._producer)))
                except StopIteration:
                    self._stop = "end"
                except BreakpointHit:
                    self._stop = "breakpoint"
                except UndecidableBranch:
                    self._stop = "undecidable"

    def digit(self, i: int) -> Optional[int]:
        """Digit ``i`` or ``None`` when the stream stopped before it."""
        self._extend(i + 1)
        return self._digits[i] if i < len(self._digits) else None

    def __getitem__(self, i: int) -> int:
        d = self.digit(i)
        if d is None:
            raise IndexError(f"stream stopped at {len(self._digits)} ({self._stop})")
        return d

    def status(self, i: int) -> str:
        self._extend(i + 1)
        return "ok" if i < len(self._digits) else self._stop

    def prefix(self, n: int) -> SymbolWord:
        self._extend(n)
        digits = self._digits[:n]
        stop = self._stop if len(digits) < n else None
        return SymbolWord(tuple(digits), self.k, stop)

    @property
    def realized(self) -> SymbolWord:
        return SymbolWord(tuple(self._digits), self.k)

    @property
    def stopped_at(self) -> Optional[int]:
        return len(self._digits) if self._stop is not None else None

    @property
    def stop_reason(self) -> Optional[str]:
        return self._stop

    def shift(self, m: int = 1) -> "SymbolStream":
        def gen():
            i = m
            while True:
                d = self.digit(i)
                if d is None:
                    if self._stop == "breakpoint":
                        raise BreakpointHit("source stream stopped", step=i)
                    if self._stop == "undecidable":
                        raise UndecidableBranch("source stream stopped", step=i)
                    return
                yield d
                i += 1
        return SymbolStream(gen(), self.k, f"shift^{m}({self.label})")

    def __repr__(self):
        shown = "".join(map(str, self._digits[:24]))
        return f"SymbolStream({self.label or shown}...)"


@dataclass(frozen=True)
class EventuallyPeriodic:
    """``w = p q q q ...`` given by a preperiod ``p`` and a nonempty period ``q``."""

    preperiod: tuple
    period: tuple

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(d) for d in self.preperiod))
        object.__setattr__(self, "period", tuple(int(d) for d in self.period))
        if not self.period:
            raise DomainError("period must be nonempty")
        if any(d < 0 for d in self.preperiod + self.period):
            raise DomainError("digits must be nonnegative")

    @classmethod
    def parse(cls, text: str) -> "EventuallyPeriodic":
        """``'digits:preperiod,period'``, for example ``'01:0,2'`` for ``(01)^inf``."""
        try:
            digits, lengths = text.strip().split(":")
            pre, per = (int(t) for t in lengths.split(","))
        except ValueError as exc:
            raise DomainError(f"expected digits:preperiod,period, got {text!r}") from exc
        ds = [int(c) for c in digits.strip()]
        if pre < 0 or per < 1 or pre + per != len(ds):
            raise DomainError(f"lengths {pre},{per} do not match digits {digits!r}")
        return cls(tuple(ds[:pre]), tuple(ds[pre:]))

    @classmethod
    def periodic(cls, word) -> "EventuallyPeriodic":
        if isinstance(word, str):
            word = [int(c) for c in word]
        return cls((), tuple(word))

    @property
    def k(self) -> int:
        return max(2, max(self.preperiod + self.period) + 1)

    def digit(self, i: int) -> int:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def __getitem__(self, i: int) -> int:
        return self.digit(i)

    def word(self, n: int) -> SymbolWord:
        return SymbolWord(tuple(self.digit(i) for i in range(n)), self.k)

    def stream(self) -> SymbolStream:
        def gen():
            i = 0
            while True:
                yield self.digit(i)
                i += 1
        return SymbolStream(gen(), self.k, str(self))

    @property
    def is_zero(self) -> bool:
        return all(d == 0 for d in self.preperiod + self.period)

    def __str__(self):
        digits = "".join(map(str, self.preperiod + self.period))
        return f"{digits}:{len(self.preperiod)},{len(self.period)}"

    def pretty(self) -> str:
        pre = "".join(map(str, self.preperiod))
        return f"{pre}({''.join(map(str, self.period))})^inf"


Digits = Union[SymbolWord, SymbolStream, EventuallyPeriodic, Sequence[int]]

_END = -1
_STOP = -2


def _digit_at(x, i: int) -> int:
    """Digit ``i`` of ``x``; ``_END`` past a finite word, ``_STOP`` past a stopped stream."""
    if isinstance(x, SymbolStream):
        d = x.digit(i)
        if d is None:
            return _END if x.stop_reason == "end" else _STOP
        return d
    if isinstance(x, EventuallyPeriodic):
        return x.digit(i)
    digits = x.digits if isinstance(x, SymbolWord) else x
    return digits[i] if i < len(digits) else _END


def order_compare(x: Digits, y: Digits, signs: SignSeq, probe: int = DEFAULT_PROBE) -> Order:
    """Compare ``x`` and ``y`` in the order twisted by the lap signs.

    At the first disagreement ``n`` the lexicographic answer is flipped when the
    common prefix has ``delta = -1``.  A finite word ending before any
    disagreement compares ``EQ`` (prefix semantics); a stream stopped by a
    breakpoint raises ``IndeterminateOrder``.
    """
    s = signs.signs
    delta = 1
    for n in range(probe):
        a, b = _digit_at(x, n), _digit_at(y, n)
        if a == _STOP or b == _STOP:
            raise IndeterminateOrder(f"a stream stopped at index {n} before the comparison was decided")
        if a == _END or b == _END:
            return Order.EQ
        if a != b:
            less = a < b
            if delta == -1:
                less = not less
            return Order.LT if less else Order.GT
        delta *= s[a] if a < len(s) else 1
    return Order.EQ


def _shifted(x, m: int):
    if isinstance(x, SymbolStream):
        return x.shift(m)
    if isinstance(x, EventuallyPeriodic):
        if m <= len(x.preperiod):
            return EventuallyPeriodic(x.preperiod[m:], x.period)
        r = (m - len(x.preperiod)) % len(x.period)
        return EventuallyPeriodic((), x.period[r:] + x.period[:r])
    digits = x.digits if isinstance(x, SymbolWord) else tuple(x)
    return digits[m:]


def shift(x: Digits, m: int = 1):
    """``sigma^m x``."""
    return _shifted(x, m)


def _orbit_producer(m: IntervalMap, x, side: Optional[int]) -> Iterator[int]:
    if m.exact and is_exact(x):
        orbit = exact_orbit(m, x, side)
        while True:
            yield orbit.step()
    depth = 64
    done = 0
    while True:
        fo = fixed_point_floats(m, x, depth, side=side)
        for d in fo.digits[done:]:
            yield int(d)
        done = depth
        depth *= 2


def code_stream(m: IntervalMap, x, side: Optional[int] = None) -> SymbolStream:
    """Lazy coding of ``x``; ``side=+1/-1`` codes the right/left limit at ``x``."""
    x = to_number(x)
    _check_domain(m, x, side)
    return SymbolStream(_orbit_producer(m, x, side), m.k, f"i({x})")


def code(m: IntervalMap, x, n: int, side: Optional[int] = None) -> SymbolWord:
    """The first ``n`` branch indices of the orbit of ``x``.

    For generalized maps an orbit that lands on a breakpoint yields a shorter
    word with ``stop='breakpoint'``.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    return code_stream(m, x, side).prefix(n)


@dataclass
class KneadingData:
    """Critical codings: ``u`` and ``v`` for ``T_{alpha,beta}``, or ``eta`` for a generalized map."""

    signs: SignSeq
    depth: int
    u: Optional[SymbolStream] = None
    v: Optional[SymbolStream] = None
    eta: Optional[SymbolStream] = None

    @property
    def generalized(self) -> bool:
        return self.eta is not None

    @classmethod
    def from_words(cls, u=None, v=None, eta=None, signs: Optional[SignSeq] = None, depth: int = DEFAULT_PROBE,
                   validate: bool = True):
        """Kneading data from explicit sequences (words, eventually periodic words or streams).

        With ``validate`` the kneading inequalities are checked up to ``depth``
        (or the shortest finite sequence) and ``InternalInconsistency`` is raised
        on a violation.
        """
        def as_stream(w):
            if w is None or isinstance(w, SymbolStream):
                return w
            if isinstance(w, EventuallyPeriodic):
                return w.stream()
            if isinstance(w, str):
                w = SymbolWord.parse(w)
            w = w if isinstance(w, SymbolWord) else SymbolWord(tuple(w), max(2, max(w) + 1))
            return SymbolStream(iter(w.digits), w.k, str(w))
        u, v, eta = as_stream(u), as_stream(v), as_stream(eta)
        if signs is None:
            k = max(s.k for s in (u, v, eta) if s is not None)
            signs = SignSeq.increasing(k)
        kd = cls(signs, depth, u, v, eta)
        if validate:
            _validate_kneading(kd, depth)
        return kd


def _validate_kneading(kd: KneadingData, depth: int) -> int:
    """Check the kneading inequalities for shifts ``n < depth``; returns the depth actually validated."""
    signs = kd.signs
    streams = [s for s in (kd.u, kd.v, kd.eta) if s is not None]
    avail = depth
    for s in streams:
        s.prefix(depth)
        if s.stopped_at is not None:
            avail = min(avail, s.stopped_at)
    words = {name: getattr(kd, name).prefix(avail) for name in ("u", "v", "eta") if getattr(kd, name) is not None}
    for n in range(avail):
        if kd.eta is not None:
            e = words["eta"]
            if order_compare(e.shift(n), e, signs, avail) == Order.GT:
                raise InternalInconsistency(f"sigma^{n} eta exceeds eta")
        else:
            u, v = words["u"], words["v"]
            for name, w in (("u", u), ("v", v)):
                t = w.shift(n)
                if order_compare(u, t, signs, avail) == Order.GT or order_compare(t, v, signs, avail) == Order.GT:
                    raise InternalInconsistency(f"sigma^{n} {name} leaves [u, v]")
    return avail


def kneading(p: Params, depth: int = DEFAULT_PROBE) -> KneadingData:
    """``u`` = coding of 0 (right-continuous), ``v`` = coding of the left limit at 1."""
    if not isinstance(p, Params):
        raise TypeError("kneading expects Params; use kneading_gen for generalized maps")
    u = code_stream(p, 0, side=1)
    v = code_stream(p, 1, side=-1)
    kd = KneadingData(p.signs, depth, u=u, v=v)
    kd.depth = _validate_kneading(kd, depth)
    return kd


def kneading_gen(g: GenParams, depth: int = DEFAULT_PROBE) -> KneadingData:
    """``eta`` = coding of the left limit at 1, followed one-sidedly through breakpoints."""
    if not isinstance(g, GenParams):
        raise TypeError("kneading_gen expects GenParams")
    eta = code_stream(g, 1, side=-1)
    kd = KneadingData(g.signs, depth, eta=eta)
    kd.depth = _validate_kneading(kd, depth)
    return kd


def admissible(x: Digits, kd: KneadingData, signs: Optional[SignSeq] = None) -> bool:
    """Prefix-admissibility: ``u <= sigma^n x <= v`` (or ``sigma^n x <= eta``) for ``n < |x|``."""
    signs = signs or kd.signs
    digits = x.digits if isinstance(x, SymbolWord) else tuple(x)
    if any(d >= signs.k or d < 0 for d in digits):
        return False
    n_max = len(digits)
    for n in range(n_max):
        t = digits[n:]
        probe = n_max - n
        if kd.eta is not None:
            if order_compare(t, kd.eta, signs, probe) == Order.GT:
                return False
        else:
            if order_compare(kd.u, t, signs, probe) == Order.GT:
                return False
            if order_compare(t, kd.v, signs, probe) == Order.GT:
                return False
    return True


@dataclass(frozen=True)
class PhiValue:
    """Partial sum of the expansion and a bound on the omitted tail.

    For an admissible sequence the tail equals ``T^n(x)/beta^n`` which lies in
    ``[0, beta^-n]``; ``tail_bound`` is never smaller than that.
    """

    value: object
    tail_bound: object
    n: int

    @property
    def lower(self):
        return self.value

    @property
    def upper(self):
        return self.value + self.tail_bound

    def contains(self, x) -> bool:
        return self.value - self.tail_bound <= x <= self.value + self.tail_bound


def phi_series(x: Digits, p: Params, n: int) -> PhiValue:
    """``sum_{j<n} (i_j - alpha)/beta^(j+1)`` with a certified tail bound."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    alpha, beta = p.alpha, p.beta
    acc = Fraction(0)
    for j in range(n):
        d = _digit_at(x, j)
        if d < 0:
            raise DomainError(f"sequence ends before index {j}")
        acc = acc * beta + (d - alpha)
    scale = beta ** n if n else Fraction(1)
    value = acc / scale
    spread = max(alpha, 1 - alpha) / (beta - 1)
    tail = (spread if spread > 1 else Fraction(1)) / scale
    return PhiValue(value, tail, n)


@dataclass(frozen=True)
class Distance:
    """``value`` is 0 when no disagreement was found; ``bound`` is then ``beta^-probe``."""

    value: object
    truncated: bool
    index: Optional[int]
    bound: object = 0


def symbol_distance(x: Digits, y: Digits, beta, probe: int = DEFAULT_PROBE) -> Distance:
    """``beta^-n`` for the first disagreement ``n``; 0 flagged truncated if none is found by ``probe``.

    A stream that stops before disagreeing also yields a truncated result whose
    ``bound`` is ``beta^-n`` at the stop.
    """
    beta = to_number(beta)
    for n in range(probe):
        a, b = _digit_at(x, n), _digit_at(y, n)
        if a < 0 or b < 0:
            return Distance(0, True, None, 1 / beta ** n)
        if a != b:
            d = 1 / beta ** n if n else Fraction(1)
            return Distance(d, False, n, d)
    return Distance(0, True, None, 1 / beta ** probe)


def first_disagreement(x: Digits, y: Digits, probe: int = DEFAULT_PROBE) -> Optional[int]:
    for n in range(probe):
        a, b = _digit_at(x, n), _digit_at(y, n)
        if a < 0 or b < 0:
            raise IndeterminateOrder(f"a sequence stopped at index {n}")
        if a != b:
            return n
    return None


@dataclass(frozen=True)
class SeparationResult:
    """Outcome of a coding-separation audit for one pair of slopes.

    ``l`` is the first index where the codings differ (a lower bound when
    ``truncated``), ``bound`` the right-hand side of the inequality and
    ``k_tight`` the smallest constant making ``delta <= K beta_2^-l`` hold.
    """

    l: Optional[int]
    bound_ok: bool
    bound: object
    delta: object
    truncated: bool = False
    k_used: object = None
    k_tight: object = None
    in_hypothesis: bool = True
    note: str = ""


def separation_check(p1: Params, p2: Params, x, probe: int = DEFAULT_PROBE) -> SeparationResult:
    """Codings of ``x`` separate at a rate tied to ``beta_2 - beta_1``.

    ``delta <= beta_2^(1-l)/x`` for ``x != 0`` and ``delta <= beta_2^(2-l)/alpha`` for ``x = 0``.
    """
    x = to_number(x)
    if p1.alpha != p2.alpha:
        raise DomainError("both maps must share alpha")
    if not p1.beta <= p2.beta:
        raise DomainError("need beta_1 <= beta_2")
    alpha = p1.alpha
    if x == 0 and alpha == 0:
        raise DomainError("(x, alpha) = (0, 0) is excluded")
    delta = p2.beta - p1.beta
    c1, c2 = code(p1, x, probe), code(p2, x, probe)
    l = first_disagreement(c1, c2, probe)
    if l is None:
        return SeparationResult(probe, True, None, delta, truncated=True, note="codings agree to probe depth")
    b2 = p2.beta
    bound = b2 ** (1 - l) / x if x != 0 else b2 ** (2 - l) / alpha
    k_tight = delta * b2 ** l
    return SeparationResult(l, delta <= bound, bound, delta, k_used=(1 / x if x else b2 ** 2 / alpha) * b2,
                            k_tight=k_tight)


# slope below which the third iterate of 1 under s = (-1, -1) no longer separates
NEG_NEG_BETA0 = Fraction(153, 100)


def _orbit_points(g: GenParams, n: int) -> list:
    orbit = exact_orbit(g, Fraction(1) if g.exact else 1, side=-1)
    pts = [orbit.value]
    for _ in range(n):
        orbit.step()
        pts.append(orbit.value)
    return pts


def separation_constant(signs: SignSeq, beta_1, beta_2, beta_0=None):
    """The constant ``K`` of the separation inequality for a sign family, or ``None`` when it is empirical."""
    s = signs.signs
    if signs.k >= 3:
        b0 = beta_0 if beta_0 is not None else beta_1
        return beta_2 * (b0 - 1) / (b0 - 2)
    if s == (1, 1):
        return beta_2
    if s == (-1, -1):
        b0 = beta_0 if beta_0 is not None else NEG_NEG_BETA0
        c0 = (b0 - 1) * (3 * b0 - 1) - 1 / (b0 - 1)
        return beta_2 ** 3 / c0
    return None


def hypothesis_floor(signs: SignSeq):
    """Smallest ``beta_1`` covered by the separation statement for this family."""
    if signs.k >= 3:
        return Fraction(2)
    if signs.signs == (-1, -1):
        return NEG_NEG_BETA0
    return Fraction(1)


def separation_check_gen(g1: GenParams, g2: GenParams, probe: int = DEFAULT_PROBE) -> SeparationResult:
    """Separation of the kneading sequences ``eta`` of two maps of one sign family.

    For families with an explicit constant the inequality ``delta <= K beta_2^-l``
    is checked.  For the tent-like families ``K`` is reported as ``k_tight`` and
    the check is the growth mechanism behind the inequality: while the codings
    agree, ``beta_2^(l-m) (|T_2^m(1) - T_1^m(1)| - delta/(beta_2 - 1)) <= 1``.
    """
    if g1.signs != g2.signs:
        raise DomainError("both maps must share the sign sequence")
    if not g1.beta <= g2.beta:
        raise DomainError("need beta_1 <= beta_2")
    signs = g1.signs
    delta = g2.beta - g1.beta
    in_hyp = g1.beta > hypothesis_floor(signs) or (signs.k < 3 and signs.signs == (1, 1))
    if signs.k >= 3:
        in_hyp = g1.beta > 2
    e1, e2 = kneading_gen(g1, probe).eta, kneading_gen(g2, probe).eta
    l = first_disagreement(e1.prefix(probe), e2.prefix(probe), probe)
    if l is None:
        return SeparationResult(probe, True, None, delta, truncated=True, in_hypothesis=in_hyp,
                                note="codings agree to probe depth")
    b2 = g2.beta
    k_tight = delta * b2 ** l
    K = separation_constant(signs, g1.beta, g2.beta)
    if K is not None:
        bound = K * b2 ** (-l)
        ok = delta <= bound
    else:
        bound = None
        ok = True
    if g1.exact and g2.exact:
        o1, o2 = _orbit_points(g1, l), _orbit_points(g2, l)
        c = delta / (b2 - 1)
        for m in range(l + 1):
            if b2 ** (l - m) * (abs(o2[m] - o1[m]) - c) > 1:
                ok = False
                break
    return SeparationResult(l, ok, bound, delta, k_used=K, k_tight=k_tight, in_hypothesis=in_hyp)
