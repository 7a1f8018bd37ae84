"""Invariant densities: the Parry step density of ``T_{alpha,beta}`` and an Ulam estimator."""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import sparse

from .errors import DomainError, EstimatorFailure, QuadratureFailure, TruncationTooCoarse
from .interval_maps import GenParams, IntervalMap, Params, exact_orbit_points, orbit_floats

DEFAULT_TERMS = 80
PERIOD_WINDOW = 4096


def _fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class StepDensity:
    """A piecewise constant density on ``[0, 1]``.

    ``breakpoints`` are ``0 = t_0 < ... < t_m = 1`` and ``heights[i]`` is the
    value on ``[t_i, t_{i+1})``.  For the Parry density ``raw_heights`` keep the
    unnormalized series, ``normalization`` its integral and ``truncation_bound``
    the sup-norm error of the unnormalized series (0 when both critical orbits
    are eventually periodic and the series is summed in closed form).
    """

    breakpoints: tuple
    heights: tuple
    normalization: object = 1
    n_terms: Optional[int] = None
    truncation_bound: object = 0
    raw_heights: Optional[tuple] = None

    def __post_init__(self):
        if len(self.breakpoints) != len(self.heights) + 1:
            raise DomainError("need one more breakpoint than heights")
        object.__setattr__(self, "_edges", np.array([float(t) for t in self.breakpoints]))
        object.__setattr__(self, "_values", np.array([float(h) for h in self.heights]))

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def pieces(self) -> int:
        return len(self.heights)

    def __call__(self, x):
        """Float evaluation, right-continuous, vectorized over numpy arrays."""
        idx = np.searchsorted(self._edges, x, side="right") - 1
        idx = np.clip(idx, 0, len(self._values) - 1)
        return self._values[idx]

    def height_at(self, x):
        """Exact height at ``x``."""
        i = bisect.bisect_right(list(self.breakpoints), x) - 1
        i = min(max(i, 0), len(self.heights) - 1)
        return self.heights[i]

    def mass(self, a, b):
        """``integral_a^b`` of the density, exact for exact breakpoints."""
        if b < a:
            a, b = b, a
        total = 0
        t = self.breakpoints
        for i, h in enumerate(self.heights):
            lo = a if a > t[i] else t[i]
            hi = b if b < t[i + 1] else t[i + 1]
            if hi > lo:
                total = total + h * (hi - lo)
        return total

    def integral(self):
        return self.mass(self.breakpoints[0], self.breakpoints[-1])

    def to_csv(self, path=None) -> str:
        """``breakpoint,height`` rows, one per piece (left endpoint and height)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["breakpoint", "height"])
        for t, h in zip(self.breakpoints, self.heights):
            w.writerow([_fmt(t), _fmt(h)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class Histogram:
    """Masses of ``bins`` equal-width bins of ``[0, 1]``."""

    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 1 or len(m) < 2:
            raise DomainError("a histogram needs at least two bins")
        if np.any(m < 0):
            raise DomainError("masses must be nonnegative")
        if abs(m.sum() - 1.0) > 1e-12:
            raise DomainError(f"masses sum to {m.sum()!r}, not 1")
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_samples(cls, xs, bins: int) -> "Histogram":
        xs = np.asarray(xs, dtype=float)
        if len(xs) == 0:
            raise DomainError("no samples")
        counts, _ = np.histogram(np.clip(xs, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
        m = counts / counts.sum()
        return cls(m / m.sum())

    @property
    def bins(self) -> int:
        return len(self.masses)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.bins + 1)

    def density(self) -> np.ndarray:
        return self.masses * self.bins

    def to_step_density(self) -> StepDensity:
        edges = tuple(Fraction(i, self.bins) for i in range(self.bins + 1))
        return StepDensity(edges, tuple(float(v) for v in self.density()))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "mass"])
        for left, m in zip(self.edges[:-1], self.masses):
            w.writerow([_fmt(left), _fmt(m)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _orbit_weights(p: Params, x0, n_terms: int, window: int):
    """Points of the orbit of ``x0`` with their weights in the Parry series.

    Returns ``(points, weights, truncated)``: a cycle found within ``window``
    steps turns the infinite tail into finitely many geometric weights.
    """
    beta = p.beta
    if p.exact:
        points, period = exact_orbit_points(p, x0, max(window, n_terms), keep=n_terms)
    else:
        fo = orbit_floats(p, x0, n_terms)
        points, period = [float(v) for v in fo.values], None
        beta = float(beta)
    weights = []
    if period is None:
        points = points[:n_terms]
        w = 1 / beta
        for _ in points:
            weights.append(w)
            w = w / beta
        return points, weights, True
    start, length = period
    factor = 1 / (1 - beta ** (-length))
    w = 1 / beta
    for n, _ in enumerate(points):
        weights.append(w * factor if n >= start else w)
        w = w / beta
    return points, weights, False


def _t_of_one(p: Params):
    y, _, _ = p.step(p.beta * 0 + 1)
    return y


def parry_density(p: Params, n_terms: int = DEFAULT_TERMS, window: int = PERIOD_WINDOW) -> StepDensity:
    """The invariant density of ``T_{alpha,beta}`` as an exact step function.

    Unnormalized value: ``sum_{n<N} (1[x < T^n(1)] - 1[x < T^n(0)]) beta^-(n+1)``
    where ``T(1) = beta + alpha mod 1``.  An eventually periodic critical orbit
    is summed to infinity in closed form; otherwise it is truncated after
    ``n_terms`` terms, contributing ``beta^-N/(beta-1)`` to ``truncation_bound``.
    """
    if n_terms < 1:
        raise DomainError("n_terms must be positive")
    if not isinstance(p, Params):
        raise TypeError("parry_density expects Params")
    beta = p.beta if p.exact else float(p.beta)
    one_pts, one_w, one_trunc = _orbit_weights(p, _t_of_one(p), n_terms - 1 if n_terms > 1 else 1, window)
    # the n = 0 term of the orbit of 1 is the constant 1/beta on [0, 1)
    one_pts = [Fraction(1)] + one_pts
    one_w = [1 / beta] + [w / beta for w in one_w]
    zero_pts, zero_w, zero_trunc = _orbit_weights(p, Fraction(0), n_terms, window)
    if n_terms == 1:
        one_pts, one_w = one_pts[:1], one_w[:1]
        one_trunc = True

    contributions: dict = {}
    for x, w in zip(one_pts, one_w):
        contributions[x] = contributions.get(x, 0) + w
    for x, w in zip(zero_pts, zero_w):
        contributions[x] = contributions.get(x, 0) - w
    cuts = sorted(set(contributions) | {Fraction(0), Fraction(1)})
    cuts = [c for c in cuts if 0 <= c <= 1]
    # height on [t_i, t_{i+1}) collects every point strictly above t_i
    raw = []
    acc = 0
    suffix = [0] * len(cuts)
    for i in range(len(cuts) - 1, -1, -1):
        suffix[i] = acc
        acc = acc + contributions.get(cuts[i], 0)
    raw = suffix[:-1]
    norm = 0
    for i, h in enumerate(raw):
        norm = norm + h * (cuts[i + 1] - cuts[i])
    if not norm > 0:
        raise TruncationTooCoarse(f"normalization {float(norm):.3g} is not positive; increase n_terms")
    tail_one = beta ** (-n_terms) / (beta - 1) if one_trunc else 0
    tail_zero = beta ** (-n_terms) / (beta - 1) if zero_trunc else 0
    heights = tuple(h / norm for h in raw)
    return StepDensity(tuple(cuts), heights, norm, n_terms, tail_one + tail_zero, tuple(raw))


def uniform_density() -> StepDensity:
    return StepDensity((Fraction(0), Fraction(1)), (Fraction(1),))


def _as_vector_fn(f: Callable) -> Callable:
    def g(x):
        y = f(x)
        if np.ndim(y) == 0:
            return np.array([float(f(t)) for t in np.atleast_1d(x)])
        return np.asarray(y, dtype=float)
    return g


def integrate(f: Callable, d, quad_points_per_piece: int = 8, tol: float = 1e-10,
              max_points: int = 512, with_error: bool = False):
    """``integral f d`` by Gauss-Legendre on every piece of the step density.

    The node count per piece doubles until successive estimates differ by less
    than ``tol``; ``QuadratureFailure`` past ``max_points``.
    """
    if isinstance(d, Histogram):
        d = d.to_step_density()
    fv = _as_vector_fn(f)
    a, b = d.edges[:-1], d.edges[1:]
    keep = b > a
    a, b, h = a[keep], b[keep], d.values[keep]
    half, mid = (b - a) / 2, (b + a) / 2

    def estimate(m):
        nodes, weights = np.polynomial.legendre.leggauss(m)
        x = mid[:, None] + half[:, None] * nodes[None, :]
        vals = fv(x.ravel()).reshape(x.shape)
        return float(np.sum(h * half * (vals @ weights)))

    m = max(1, quad_points_per_piece)
    prev = estimate(m)
    while True:
        m2 = 2 * m
        if m2 > max_points:
            raise QuadratureFailure(f"no convergence with {m} points per piece")
        cur = estimate(m2)
        if abs(cur - prev) < tol:
            return (cur, abs(cur - prev)) if with_error else cur
        prev, m = cur, m2


def _preimage(m: IntervalMap, a, b) -> list:
    """Exact preimage of ``[a, b]`` as a list of intervals, one per lap."""
    part = m.partition()
    out = []
    beta, alpha = m.beta, m.alpha
    for j in range(m.k):
        lo_lap, hi_lap = part[j], part[j + 1]
        if isinstance(m, Params) or m.signs.signs[j] == 1:
            lo, hi = (a + j - alpha) / beta, (b + j - alpha) / beta
        else:
            lo, hi = (1 - b + j) / beta, (1 - a + j) / beta
        lo = lo if lo > lo_lap else lo_lap
        hi = hi if hi < hi_lap else hi_lap
        if hi > lo:
            out.append((lo, hi))
    return out


def invariance_defect(p: IntervalMap, d: StepDensity, A) -> object:
    """``|mu(A) - mu(T^-1 A)|`` for an interval ``A = (a, b)``, computed from exact preimages."""
    a, b = A
    if not (0 <= a <= b <= 1):
        raise DomainError("A must be a subinterval of [0, 1]")
    direct = d.mass(a, b)
    pre = 0
    for lo, hi in _preimage(p, a, b):
        pre = pre + d.mass(lo, hi)
    return abs(direct - pre)


def _critical_points(m: IntervalMap, count: int) -> list[float]:
    """Leading one-sided orbit points of 0 and 1, where invariant densities jump."""
    pts = []
    for x0, side in ((0, 1), (1, -1)):
        try:
            fo = orbit_floats(m, x0, count, side=side)
        except Exception:
            continue
        pts.extend(float(v) for v in fo.values)
    return pts


def _cells(m: IntervalMap, bins: int, refine: int) -> np.ndarray:
    edges = set(np.linspace(0.0, 1.0, bins + 1).tolist())
    edges.update(float(t) for t in m.partition())
    if refine:
        edges.update(_critical_points(m, refine))
    cells = np.array(sorted(e for e in edges if 0.0 <= e <= 1.0))
    keep = np.concatenate([[True], np.diff(cells) > 1e-15])
    return cells[keep]


def _transfer_matrix(m: IntervalMap, cells: np.ndarray) -> sparse.csr_matrix:
    """Ulam matrix ``P[i, c] = |C_i cap T^-1 C_c| / |C_i|`` from the lap image of every cell."""
    beta = float(m.beta)
    alpha = float(m.alpha)
    part = [float(t) for t in m.partition()]
    signs = m.signs.signs
    gen = isinstance(m, GenParams)
    rows, cols, vals = [], [], []
    ncell = len(cells) - 1
    for i in range(ncell):
        x0, x1 = cells[i], cells[i + 1]
        mid = 0.5 * (x0 + x1)
        j = min(max(np.searchsorted(part, mid, side="right") - 1, 0), m.k - 1)
        if gen:
            y0, y1 = beta * x0 - j, beta * x1 - j
            if signs[j] == -1:
                y0, y1 = 1 - y1, 1 - y0
        else:
            y0, y1 = beta * x0 + alpha - j, beta * x1 + alpha - j
        y0, y1 = max(0.0, y0), min(1.0, y1)
        span = y1 - y0
        if span <= 0:
            continue
        first = max(np.searchsorted(cells, y0, side="right") - 1, 0)
        last = min(np.searchsorted(cells, y1, side="left"), ncell)
        for c in range(first, last):
            overlap = min(y1, cells[c + 1]) - max(y0, cells[c])
            if overlap > 0:
                rows.append(i)
                cols.append(c)
                vals.append(overlap / span)
    P = sparse.csr_matrix((vals, (rows, cols)), shape=(ncell, ncell))
    sums = np.asarray(P.sum(axis=1)).ravel()
    sums[sums == 0] = 1.0
    return (sparse.diags(1.0 / sums) @ P).tocsr()


def ulam_density(g: IntervalMap, bins: int = 256, iterations: int = 200000, tol: float = 1e-12,
                 refine: int = 64) -> Histogram:
    """Invariant histogram on ``bins`` equal bins from an Ulam discretization.

    The Ulam cells are the equal bins split further at lap endpoints and at the
    first ``refine`` orbit points of 0 and 1, where the invariant density has
    its jumps; cell masses are then summed back into the equal bins.  Lazy
    power iteration ``p <- (p + p P)/2`` (same fixed points, no periodic
    oscillation) runs until the l1 change is below ``tol``.
    """
    if bins < 16:
        raise DomainError("need at least 16 bins")
    cells = _cells(g, bins, refine)
    P = _transfer_matrix(g, cells)
    PT = P.T.tocsr()
    p = np.diff(cells)
    for _ in range(iterations):
        q = 0.5 * (p + PT @ p)
        q /= q.sum()
        if np.abs(q - p).sum() < tol:
            break
        p = q
    else:
        raise EstimatorFailure(f"power iteration did not reach {tol} in {iterations} steps")
    owner = np.minimum((cells[:-1] * bins + 1e-9).astype(int), bins - 1)
    masses = np.bincount(owner, weights=q, minlength=bins)
    h = Histogram(masses / masses.sum())
    object.__setattr__(h, "cells", cells)
    object.__setattr__(h, "cell_masses", q)
    return h


def ulam_residual(g: IntervalMap, h: Histogram) -> float:
    """``||p P - p||_1`` of the cell masses behind an Ulam histogram."""
    cells = getattr(h, "cells", None)
    if cells is None:
        cells = np.linspace(0.0, 1.0, h.bins + 1)
        p = h.masses
    else:
        p = h.cell_masses
    P = _transfer_matrix(g, cells)
    return float(np.abs(P.T @ p - p).sum())
