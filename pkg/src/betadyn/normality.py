"""Birkhoff averages and the normality defect of an orbit against an invariant density."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .interval_maps import FloatOrbit, IntervalMap, orbit_floats
from .measures import Histogram, integrate
from .numerics import DEFAULT_MAX_BITS, format_number, to_number


def _power(m):
    return lambda x: np.asarray(x, dtype=float) ** m


def _cos(m):
    return lambda x: np.cos(2 * np.pi * m * np.asarray(x, dtype=float))


def _sin(m):
    return lambda x: np.sin(2 * np.pi * m * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class TestSuite:
    """Continuous test functions on ``[0, 1]`` with their sup norms."""

    __test__ = False  # keep pytest from collecting this class

    functions: tuple
    labels: tuple
    sups: tuple

    def __post_init__(self):
        if not self.functions:
            raise DomainError("a test suite needs at least one function")
        if not (len(self.functions) == len(self.labels) == len(self.sups)):
            raise DomainError("functions, labels and sups must align")

    @classmethod
    def from_functions(cls, functions: Sequence[Callable], labels: Optional[Sequence[str]] = None,
                       sups: Optional[Sequence[float]] = None) -> "TestSuite":
        labels = list(labels) if labels is not None else [f"f{i}" for i in range(len(functions))]
        if sups is None:
            grid = np.linspace(0.0, 1.0, 10001)
            sups = []
            for f in functions:
                vals = np.asarray(f(grid), dtype=float)
                if vals.ndim == 0:
                    vals = np.array([float(f(t)) for t in grid])
                if not np.all(np.isfinite(vals)):
                    raise DomainError("test functions must be bounded on [0, 1]")
                sups.append(float(np.max(np.abs(vals))))
        return cls(tuple(functions), tuple(labels), tuple(float(s) for s in sups))

    def __len__(self):
        return len(self.functions)

    def __add__(self, other: "TestSuite") -> "TestSuite":
        return TestSuite(self.functions + other.functions, self.labels + other.labels, self.sups + other.sups)

    def select(self, labels: Sequence[str]) -> "TestSuite":
        idx = [self.labels.index(l) for l in labels]
        return TestSuite(tuple(self.functions[i] for i in idx), tuple(labels), tuple(self.sups[i] for i in idx))


def default_suite(degree: int = 4) -> TestSuite:
    """``x^m``, ``cos(2 pi m x)`` and ``sin(2 pi m x)`` for ``m = 1..degree``."""
    fs, labels = [], []
    for m in range(1, degree + 1):
        fs.append(_power(m))
        labels.append(f"x^{m}")
    for m in range(1, degree + 1):
        fs.append(_cos(m))
        labels.append(f"cos{m}")
    for m in range(1, degree + 1):
        fs.append(_sin(m))
        labels.append(f"sin{m}")
    return TestSuite(tuple(fs), tuple(labels), (1.0,) * len(fs))


def identity_suite() -> TestSuite:
    return TestSuite((_power(1),), ("x",), (1.0,))


def suite_by_name(name: str) -> TestSuite:
    """``default``, ``id``, ``poly``, ``trig`` or a comma separated label list of the default suite."""
    name = name.strip()
    if name in ("default", "all", ""):
        return default_suite()
    if name in ("id", "x"):
        return identity_suite()
    full = default_suite()
    if name == "poly":
        return full.select([l for l in full.labels if l.startswith("x^")])
    if name == "trig":
        return full.select([l for l in full.labels if not l.startswith("x^")])
    try:
        return full.select([t.strip() for t in name.split(",")])
    except ValueError as exc:
        raise DomainError(f"unknown test suite {name!r}") from exc


@dataclass
class EmpiricalRecord:
    """Birkhoff means of one orbit, its histogram and the resulting defect."""

    x0: object
    n: int
    averages: dict
    histogram: Optional[Histogram]
    truncated_at: Optional[int] = None
    defect: Optional[float] = None
    integrals: dict = field(default_factory=dict)
    label: str = ""

    @property
    def terms(self) -> int:
        return self.n if self.truncated_at is None else min(self.n, self.truncated_at)

    def csv_header(self) -> list[str]:
        return ["map", "x0", "n", "terms", *self.averages.keys(), "defect"]

    def csv_row(self) -> list[str]:
        fmt = lambda v: format(float(v), ".17g")
        return [self.label, format_number(self.x0), str(self.n), str(self.terms),
                *(fmt(v) for v in self.averages.values()),
                "" if self.defect is None else fmt(self.defect)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header())
        w.writerow(self.csv_row())
        return buf.getvalue()


def orbit(m: IntervalMap, x0, n: int, guard_bits: Optional[int] = None,
          max_bits: int = DEFAULT_MAX_BITS) -> FloatOrbit:
    """The float orbit behind every average: each point located well within ``1e-12``.

    ``max_bits`` caps the guard bits of the fixed-point engine.
    """
    if n < 1:
        raise DomainError("n must be positive")
    return orbit_floats(m, to_number(x0), n, guard_bits=guard_bits, max_guard_bits=max_bits)


def _values(f: Callable, xs: np.ndarray) -> np.ndarray:
    v = np.asarray(f(xs), dtype=float)
    if v.ndim == 0:
        v = np.array([float(f(t)) for t in xs])
    return v


def birkhoff(m: IntervalMap, x0, f: Callable, n: int, guard_bits: Optional[int] = None,
             max_bits: int = DEFAULT_MAX_BITS) -> float:
    """``(1/n) sum_{i<n} f(T^i x0)``; a breakpoint truncates the average to the terms available."""
    fo = orbit(m, x0, n, guard_bits, max_bits)
    if len(fo.values) == 0:
        return float("nan")
    return float(np.mean(_values(f, fo.values)))


def density_integrals(suite: TestSuite, density) -> list[float]:
    return [integrate(f, density) for f in suite.functions]


def _defect_from(averages: Sequence[float], integrals: Sequence[float], suite: TestSuite) -> float:
    return max(abs(a - b) / (1.0 + s) for a, b, s in zip(averages, integrals, suite.sups))


def empirical_record(m: IntervalMap, x0, suite: TestSuite, n: int, density=None, bins: int = 64,
                     guard_bits: Optional[int] = None, integrals: Optional[Sequence[float]] = None,
                     max_bits: int = DEFAULT_MAX_BITS) -> EmpiricalRecord:
    """Averages, histogram and (when ``density`` is given) the defect of one orbit."""
    fo = orbit(m, x0, n, guard_bits, max_bits)
    xs = fo.values
    averages = {l: float(np.mean(_values(f, xs))) if len(xs) else float("nan")
                for f, l in zip(suite.functions, suite.labels)}
    hist = Histogram.from_samples(xs, bins) if len(xs) else None
    rec = EmpiricalRecord(to_number(x0), n, averages, hist, fo.truncated_at, label=m.describe())
    if density is not None:
        ints = list(integrals) if integrals is not None else density_integrals(suite, density)
        rec.integrals = dict(zip(suite.labels, ints))
        rec.defect = _defect_from(list(averages.values()), ints, suite)
    return rec


def normality_defect(m: IntervalMap, x0, suite: TestSuite, n: int, density,
                     guard_bits: Optional[int] = None, integrals: Optional[Sequence[float]] = None,
                     max_bits: int = DEFAULT_MAX_BITS) -> float:
    """``max_f |birkhoff(f, n) - integral f d mu| / (1 + sup|f|)`` over the suite."""
    return empirical_record(m, x0, suite, n, density, guard_bits=guard_bits, integrals=integrals,
                            max_bits=max_bits).defect


def defect_profile(m: IntervalMap, x0, suite: TestSuite, n_list: Sequence[int], density,
                   guard_bits: Optional[int] = None, integrals: Optional[Sequence[float]] = None,
                   max_bits: int = DEFAULT_MAX_BITS) -> list[tuple]:
    """``(n, defect)`` for every ``n`` in ``n_list`` from one orbit of length ``max(n_list)``."""
    n_list = list(n_list)
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 1:
        raise DomainError("n_list must be a nonempty increasing list of positive integers")
    fo = orbit(m, x0, n_list[-1], guard_bits, max_bits)
    ints = list(integrals) if integrals is not None else density_integrals(suite, density)
    sums = [np.cumsum(_values(f, fo.values)) for f in suite.functions]
    avail = len(fo.values)
    out = []
    for n in n_list:
        t = min(n, avail)
        if t == 0:
            out.append((n, float("nan")))
            continue
        avgs = [s[t - 1] / t for s in sums]
        out.append((n, _defect_from(avgs, ints, suite)))
    return out


def trend_slope(profile: Sequence[tuple]) -> float:
    """Least-squares slope of ``log defect`` against ``log n``."""
    pts = [(math.log(n), math.log(d)) for n, d in profile if d > 0 and math.isfinite(d)]
    if len(pts) < 2:
        return float("nan")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])
