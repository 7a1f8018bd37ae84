"""Exact and interval arithmetic for orbit computations.

Three kinds of numbers flow through the package:

* ``Fraction`` (aliased ``Exact``) for rational parameters and points;
* ``QuadraticNumber`` for exact elements ``a + b*sqrt(d)`` of a real quadratic
  field, so that the golden ratio or ``sqrt(2)`` can be iterated without any
  rounding at all;
* ``Approx``, a fixed-point interval with outward rounding, used when a value
  is only available to finite precision.  ``ComputableReal`` produces
  ``Approx`` enclosures of arbitrary width on demand.

Orbit digits need roughly ``n * log2(beta)`` correct bits at depth ``n``; the
interval types never silently pick a branch they cannot decide.
"""

from __future__ import annotations

import ast
import math
from fractions import Fraction
from numbers import Rational
from typing import Callable, Union

import gmpy2

from .errors import DomainError, PrecisionExhausted, UndecidableBranch

Exact = Fraction

DEFAULT_MAX_BITS = 4096


def exact_from_ratio(num: int, den: int) -> Fraction:
    """Return ``num/den`` in lowest terms."""
    if den == 0:
        raise DomainError("zero denominator")
    if den < 0:
        raise DomainError("denominator must be positive")
    return Fraction(num, den)


def _squarefree_split(n: int) -> tuple[int, int]:
    """Write ``n = m**2 * d`` with ``d`` squarefree; return ``(m, d)``."""
    m, d = 1, n
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            m *= f
        f += 1
    return m, d


def _sqrt_scaled(q: Fraction, bits: int) -> tuple[int, int]:
    """Integers ``lo <= sqrt(q) * 2**bits <= hi`` with ``hi - lo <= 1``."""
    if q < 0:
        raise DomainError("square root of a negative number")
    p, r = q.numerator, q.denominator
    s = math.isqrt((p * r) << (2 * bits))
    lo = s // r
    hi = -((-(s + 1)) // r)
    return lo, hi


class QuadraticNumber:
    """Exact real number ``a + b*sqrt(d)`` with rational ``a, b`` and squarefree ``d > 1``.

    Arithmetic with ``int`` and ``Fraction`` is closed; results with a zero
    irrational part collapse back to ``Fraction``.  Mixing two different
    radicands raises ``TypeError``.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        if d < 2:
            raise DomainError("radicand must be at least 2")
        m, sf = _squarefree_split(d)
        if sf == 1:
            raise DomainError(f"{d} is a perfect square")
        self.a = Fraction(a)
        self.b = Fraction(b) * m
        self.d = sf

    @staticmethod
    def make(a, b, d: int) -> Union["QuadraticNumber", Fraction]:
        if b == 0:
            return Fraction(a)
        return QuadraticNumber(a, b, d)

    def _parts(self, other) -> tuple[Fraction, Fraction]:
        if isinstance(other, QuadraticNumber):
            if other.d != self.d:
                raise TypeError(f"cannot mix sqrt({self.d}) and sqrt({other.d})")
            return other.a, other.b
        if isinstance(other, (int, Rational)):
            return Fraction(other), Fraction(0)
        return NotImplemented

    def __add__(self, other):
        parts = self._parts(other)
        if parts is NotImplemented:
            return NotImplemented
        return QuadraticNumber.make(self.a + parts[0], self.b + parts[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        parts = self._parts(other)
        if parts is NotImplemented:
            return NotImplemented
        return QuadraticNumber.make(self.a - parts[0], self.b - parts[1], self.d)

    def __rsub__(self, other):
        parts = self._parts(other)
        if parts is NotImplemented:
            return NotImplemented
        return QuadraticNumber.make(parts[0] - self.a, parts[1] - self.b, self.d)

    def __mul__(self, other):
        parts = self._parts(other)
        if parts is NotImplemented:
            return NotImplemented
        c, e = parts
        return QuadraticNumber.make(self.a * c + self.b * e * self.d, self.a * e + self.b * c, self.d)

    __rmul__ = __mul__

    def _inverse(self):
        norm = self.a * self.a - self.b * self.b * self.d
        return QuadraticNumber(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        parts = self._parts(other)
        if parts is NotImplemented:
            return NotImplemented
        if parts[1] == 0:
            if parts[0] == 0:
                raise ZeroDivisionError("division by zero")
            return QuadraticNumber.make(self.a / parts[0], self.b / parts[0], self.d)
        return self * QuadraticNumber(parts[0], parts[1], self.d)._inverse()

    def __rtruediv__(self, other):
        parts = self._parts(other)
        if parts is NotImplemented:
            return NotImplemented
        return self._inverse() * QuadraticNumber.make(parts[0], parts[1], self.d)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (self._inverse()) ** (-n)
        result: Union[QuadraticNumber, Fraction] = Fraction(1)
        base: Union[QuadraticNumber, Fraction] = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sign(self) -> int:
        a, b = self.a, self.b
        if a >= 0 and b >= 0:
            return 0 if (a == 0 and b == 0) else 1
        if a <= 0 and b <= 0:
            return -1
        diff = a * a - b * b * self.d
        if diff == 0:
            return 0
        s = 1 if diff > 0 else -1
        return s if a > 0 else -s

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, QuadraticNumber):
            return diff.sign()
        return (diff > 0) - (diff < 0)

    def __eq__(self, other):
        if isinstance(other, (QuadraticNumber, int, Rational)):
            try:
                return self._cmp(other) == 0
            except TypeError:
                return False
        return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def approx(self, bits: int) -> "Approx":
        return Approx.from_value(self, bits)

    def __floor__(self):
        bits = 64 + max(self.a.numerator.bit_length(), self.b.numerator.bit_length(), 1)
        enclosure = self.approx(bits)
        lo = enclosure.lo >> enclosure.bits
        # the enclosure is at most a few ulps wide, so the floor is lo or lo+1
        return lo + 1 if self >= lo + 1 else lo

    def __ceil__(self):
        return -math.floor(-self)

    def __float__(self):
        return float(self.approx(80).midpoint)

    def conjugate(self):
        return QuadraticNumber(self.a, -self.b, self.d)

    def __repr__(self):
        return f"QuadraticNumber({self.a!s}, {self.b!s}, {self.d})"

    def __str__(self):
        sign = "+" if self.b >= 0 else "-"
        mag = abs(self.b)
        coeff = "" if mag == 1 else f"{mag}*"
        head = "" if self.a == 0 else f"{self.a}{sign}"
        if not head and sign == "-":
            head = "-"
        return f"{head}{coeff}sqrt({self.d})"


def sqrt_exact(q) -> Union[QuadraticNumber, Fraction]:
    """Exact square root of a nonnegative rational."""
    q = Fraction(q)
    if q < 0:
        raise DomainError("square root of a negative number")
    if q == 0:
        return Fraction(0)
    p, r = q.numerator, q.denominator
    m, d = _squarefree_split(p * r)
    if d == 1:
        return Fraction(m, r)
    return QuadraticNumber(0, Fraction(m, r), d)


def golden_ratio() -> QuadraticNumber:
    return QuadraticNumber(Fraction(1, 2), Fraction(1, 2), 5)


class Approx:
    """Closed interval ``[lo, hi] / 2**bits`` with integer endpoints.

    Every operation rounds its lower endpoint down and its upper endpoint up,
    so the true value always stays enclosed.  Precision is absolute: ``bits``
    fractional bits.
    """

    __slots__ = ("lo", "hi", "bits")

    def __init__(self, lo: int, hi: int, bits: int):
        if hi < lo:
            raise ValueError("empty interval")
        self.lo = int(lo)
        self.hi = int(hi)
        self.bits = int(bits)

    @classmethod
    def from_value(cls, x, bits: int) -> "Approx":
        if isinstance(x, Approx):
            return x.with_bits(bits)
        if isinstance(x, ComputableReal):
            return x.approx(bits)
        if isinstance(x, QuadraticNumber):
            sq_lo, sq_hi = _sqrt_scaled(x.b * x.b * x.d, bits + 2)
            if x.b < 0:
                sq_lo, sq_hi = -sq_hi, -sq_lo
            a = x.a
            a_lo = (a.numerator << (bits + 2)) // a.denominator
            a_hi = -((-(a.numerator << (bits + 2))) // a.denominator)
            return cls((a_lo + sq_lo) >> 2, -((-(a_hi + sq_hi)) >> 2), bits)
        if isinstance(x, float):
            x = Fraction(x)
        if isinstance(x, (int, Rational)):
            x = Fraction(x)
            lo = (x.numerator << bits) // x.denominator
            hi = -((-(x.numerator << bits)) // x.denominator)
            return cls(lo, hi, bits)
        raise TypeError(f"cannot enclose {type(x).__name__}")

    @property
    def precision_bits(self) -> int:
        return self.bits

    @property
    def midpoint(self) -> Fraction:
        return Fraction(self.lo + self.hi, 1 << (self.bits + 1))

    @property
    def radius(self) -> Fraction:
        return Fraction(self.hi - self.lo, 1 << (self.bits + 1))

    @property
    def lower(self) -> Fraction:
        return Fraction(self.lo, 1 << self.bits)

    @property
    def upper(self) -> Fraction:
        return Fraction(self.hi, 1 << self.bits)

    def with_bits(self, bits: int) -> "Approx":
        if bits >= self.bits:
            s = bits - self.bits
            return Approx(self.lo << s, self.hi << s, bits)
        s = self.bits - bits
        return Approx(self.lo >> s, -((-self.hi) >> s), bits)

    def contains(self, x) -> bool:
        if isinstance(x, Approx):
            return self.lower <= x.lower and x.upper <= self.upper
        return self.lower <= x <= self.upper

    def _coerce(self, other) -> "Approx":
        if isinstance(other, Approx):
            return other
        return Approx.from_value(other, self.bits)

    def __add__(self, other):
        o = self._coerce(other)
        b = max(self.bits, o.bits)
        x, y = self.with_bits(b), o.with_bits(b)
        return Approx(x.lo + y.lo, x.hi + y.hi, b)

    __radd__ = __add__

    def __neg__(self):
        return Approx(-self.hi, -self.lo, self.bits)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        b = max(self.bits, o.bits)
        shift = self.bits + o.bits - b
        return Approx(min(products) >> shift, -((-max(products)) >> shift), b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        b = max(self.bits, o.bits)
        quotients = [p / q for p in (self.lower, self.upper) for q in (o.lower, o.upper)]
        lo, hi = min(quotients), max(quotients)
        return Approx(math.floor(lo * (1 << b)), math.ceil(hi * (1 << b)), b)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sqrt(self) -> "Approx":
        if self.lo < 0:
            raise DomainError("square root of an interval reaching below zero")
        lo = math.isqrt(self.lo << self.bits)
        hi = math.isqrt(self.hi << self.bits)
        if hi * hi != self.hi << self.bits:
            hi += 1
        return Approx(lo, hi, self.bits)

    def nth_root(self, n: int) -> "Approx":
        if self.lo < 0:
            raise DomainError("root of an interval reaching below zero")
        shift = self.bits * (n - 1)
        lo, _ = gmpy2.iroot(gmpy2.mpz(self.lo) << shift, n)
        hi, exact = gmpy2.iroot(gmpy2.mpz(self.hi) << shift, n)
        return Approx(int(lo), int(hi) + (0 if exact else 1), self.bits)

    def floor(self) -> int:
        """Floor of the enclosed value, or ``UndecidableBranch`` if it is ambiguous."""
        f_lo = self.lo >> self.bits
        f_hi = self.hi >> self.bits
        if f_lo != f_hi:
            raise UndecidableBranch(f"interval straddles the integer {f_hi}", bits=self.bits)
        return f_lo

    def __float__(self):
        return float(self.midpoint)

    def __repr__(self):
        return f"Approx(midpoint={float(self.midpoint)!r}, radius={float(self.radius):.3g}, bits={self.bits})"


class ComputableReal:
    """A real number given by a procedure returning enclosures of requested precision.

    ``fn(bits)`` must return an ``Approx`` whose radius is at most a few units
    in the last place at ``bits`` fractional bits.
    """

    __slots__ = ("_fn", "label")

    GUARD = 16

    def __init__(self, fn: Callable[[int], Approx], label: str = "real"):
        self._fn = fn
        self.label = label

    def approx(self, bits: int) -> Approx:
        return self._fn(bits)

    @staticmethod
    def lift(x) -> "ComputableReal":
        if isinstance(x, ComputableReal):
            return x
        return ComputableReal(lambda bits, x=x: Approx.from_value(x, bits), str(x))

    def _binary(self, other, op, symbol, swap=False):
        o = ComputableReal.lift(other)
        a, b = (o, self) if swap else (self, o)
        g = ComputableReal.GUARD

        def fn(bits):
            return op(a.approx(bits + g), b.approx(bits + g)).with_bits(bits)

        return ComputableReal(fn, f"({a.label}{symbol}{b.label})")

    def __add__(self, o):
        return self._binary(o, lambda x, y: x + y, "+")

    def __radd__(self, o):
        return self._binary(o, lambda x, y: x + y, "+", swap=True)

    def __sub__(self, o):
        return self._binary(o, lambda x, y: x - y, "-")

    def __rsub__(self, o):
        return self._binary(o, lambda x, y: x - y, "-", swap=True)

    def __mul__(self, o):
        return self._binary(o, lambda x, y: x * y, "*")

    def __rmul__(self, o):
        return self._binary(o, lambda x, y: x * y, "*", swap=True)

    def __truediv__(self, o):
        return self._binary(o, lambda x, y: x / y, "/")

    def __rtruediv__(self, o):
        return self._binary(o, lambda x, y: x / y, "/", swap=True)

    def __neg__(self):
        return ComputableReal(lambda bits: -self.approx(bits), f"-{self.label}")

    def compare(self, other, max_bits: int = DEFAULT_MAX_BITS) -> int:
        diff = self - other
        bits = 64
        while bits <= max_bits:
            enc = diff.approx(bits)
            if enc.lo > 0:
                return 1
            if enc.hi < 0:
                return -1
            bits *= 2
        raise UndecidableBranch("comparison undecided at the precision ceiling", bits=max_bits)

    def __lt__(self, o):
        return self.compare(o) < 0

    def __le__(self, o):
        return self.compare(o) <= 0

    def __gt__(self, o):
        return self.compare(o) > 0

    def __ge__(self, o):
        return self.compare(o) >= 0

    def __floor__(self):
        return _floor_computable(self)

    def __ceil__(self):
        return -math.floor(-self)

    def __float__(self):
        return float(self.approx(80).midpoint)

    def __repr__(self):
        return f"ComputableReal({self.label})"


def _floor_computable(x: ComputableReal, max_bits: int = DEFAULT_MAX_BITS) -> int:
    bits = 64
    while True:
        try:
            return x.approx(bits).floor()
        except UndecidableBranch:
            if bits >= max_bits:
                raise UndecidableBranch("floor undecided at the precision ceiling", bits=bits)
            bits = min(2 * bits, max_bits)


def nth_root(x, n: int) -> ComputableReal:
    """Computable ``n``-th root of a nonnegative exact number."""
    g = ComputableReal.GUARD

    def fn(bits):
        return Approx.from_value(x, bits + g * n).nth_root(n).with_bits(bits)

    return ComputableReal(fn, f"root({x},{n})")


def approx_eval(expr: Callable[[int], Approx], target_radius, bits: int = 64,
                max_bits: int = DEFAULT_MAX_BITS) -> Approx:
    """Evaluate ``expr`` at doubling precision until its radius is at most ``target_radius``.

    ``expr(bits)`` builds an ``Approx`` at the given working precision and may
    raise ``UndecidableBranch`` from a floor test; that also triggers a retry.
    At the ceiling an undecided branch is re-raised and an unmet radius raises
    ``PrecisionExhausted``.
    """
    target = Fraction(target_radius)
    if target <= 0:
        raise DomainError("target radius must be positive")
    while True:
        try:
            result = expr(bits)
        except UndecidableBranch as exc:
            if bits >= max_bits:
                raise UndecidableBranch(str(exc), step=exc.step, bits=bits) from exc
        else:
            if result.radius <= target:
                return result
            if bits >= max_bits:
                raise PrecisionExhausted(f"radius {float(result.radius):.3g} above target at {bits} bits")
        bits = min(2 * bits, max_bits)


def is_exact(x) -> bool:
    return isinstance(x, (int, Rational, QuadraticNumber)) and not isinstance(x, bool)


def to_number(x):
    """Convert user input to the package's number types.

    Strings go through ``parse_real``; floats are taken at their exact binary
    value.
    """
    if isinstance(x, str):
        return parse_real(x)
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, (Rational, QuadraticNumber, ComputableReal)):
        return x
    raise TypeError(f"unsupported number type {type(x).__name__}")


_NAMES = {"golden": golden_ratio, "phi": golden_ratio}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return Fraction(repr(node.value)) if isinstance(node.value, float) else Fraction(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]()
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        left, right = _eval_node(node.left), _eval_node(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            return left / right
        if isinstance(node.op, ast.Pow) and isinstance(right, Fraction) and right.denominator == 1:
            return left ** int(right)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        args = [_eval_node(a) for a in node.args]
        if node.func.id == "sqrt" and len(args) == 1 and isinstance(args[0], Fraction):
            return sqrt_exact(args[0])
        if node.func.id == "root" and len(args) == 2 and isinstance(args[1], Fraction):
            return nth_root(args[0], int(args[1]))
    raise DomainError(f"unsupported expression: {ast.dump(node)}")


def parse_real(text: str):
    """Parse ``'1/3'``, ``'0.95'``, ``'golden'``, ``'sqrt(2)'``, ``'(1+sqrt(5))/2'``, ``'root(2,3)'``.

    Decimal literals are read exactly (``'0.1'`` is ``1/10``).
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise DomainError(f"cannot parse number {text!r}") from exc
    return _eval_node(tree)


def format_number(x) -> str:
    """Render a number so that ``parse_real`` reads it back exactly (except ComputableReal)."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, QuadraticNumber):
        return f"{x.a}+({x.b})*sqrt({x.d})"
    if isinstance(x, ComputableReal):
        return x.label
    return repr(x)
