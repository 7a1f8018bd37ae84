"""Topological entropy of kneading-defined shifts by counting admissible words."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

from .curves import verify_constant_coding_detail
from .errors import CountAborted, DomainError
from .interval_maps import SignSeq
from .numerics import to_number
from .symbolic import EventuallyPeriodic, KneadingData, SymbolStream


@dataclass(frozen=True)
class WordCount:
    """Number of admissible words of every length ``1..n_max``."""

    counts: tuple

    @property
    def n_max(self) -> int:
        return len(self.counts)

    @property
    def lengths(self) -> range:
        return range(1, self.n_max + 1)

    def count(self, n: int) -> int:
        return self.counts[n - 1]

    @property
    def growth_estimate(self) -> float:
        return math.log(self.counts[-1]) / self.n_max

    def submultiplicative(self) -> bool:
        c = self.counts
        n = len(c)
        return all(c[a + b - 1] <= c[a - 1] * c[b - 1]
                   for a in range(1, n + 1) for b in range(1, n + 1 - a))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "count", "log_count_over_n"])
        for n, c in zip(self.lengths, self.counts):
            w.writerow([n, c, format(math.log(c) / n, ".17g")])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _digits(stream, n: int) -> list[int]:
    if stream is None:
        return []
    if isinstance(stream, SymbolStream):
        return list(stream.prefix(n).digits)
    if isinstance(stream, EventuallyPeriodic):
        return [stream.digit(i) for i in range(n)]
    return list(stream)[:n]


def _failure(word: list[int]) -> list[int]:
    """KMP failure function: ``f[L]`` is the longest proper border of ``word[:L]``."""
    f = [0] * (len(word) + 1)
    for i in range(1, len(word)):
        k = f[i]
        while k > 0 and word[k] != word[i]:
            k = f[k]
        if word[k] == word[i]:
            k += 1
        f[i + 1] = k
    return f


class _Bound:
    """Comparisons of every suffix of a growing word against one kneading sequence.

    ``upper`` asks for ``suffix <= w``, otherwise ``suffix >= w``.  The set of
    suffixes still tied with a prefix of ``w`` is the border chain of the
    longest tie, so the longest tie length is a complete state.
    """

    def __init__(self, w: list[int], signs: SignSeq, upper: bool):
        self.w = w
        self.upper = upper
        self.fail = _failure(w)
        self.delta = [1]
        for d in w:
            self.delta.append(self.delta[-1] * signs.signs[d])

    def chain(self, m: int):
        while True:
            yield m
            if m == 0:
                return
            m = self.fail[m]

    def step(self, m: int, c: int, length: int) -> Optional[int]:
        """New longest tie after appending ``c``, or ``None`` when some suffix violates the bound."""
        best = -1
        for L in self.chain(m):
            if L >= len(self.w):
                raise CountAborted(f"kneading sequence known to {len(self.w)} digits only", length=length)
            t = self.w[L]
            if c == t:
                best = max(best, L + 1)
                continue
            greater = (c > t) == (self.delta[L] == 1)
            if greater == self.upper:
                return None
        return max(best, 0)


def count_words(kd: KneadingData, signs: Optional[SignSeq] = None, n_max: int = 24,
                method: str = "states") -> WordCount:
    """Counts of prefix-admissible words of lengths ``1..n_max``.

    ``method='states'`` merges words with equal follower state (longest ties
    with ``u`` and ``v``, or with ``eta``) and is polynomial in ``n_max``;
    ``method='dfs'`` enumerates words depth first with pruning.
    """
    if n_max < 1:
        raise DomainError("n_max must be positive")
    signs = signs or kd.signs
    if kd.eta is not None:
        bounds = [_Bound(_digits(kd.eta, n_max), signs, upper=True)]
    else:
        bounds = [_Bound(_digits(kd.u, n_max), signs, upper=False),
                  _Bound(_digits(kd.v, n_max), signs, upper=True)]
    k = signs.k
    if method == "dfs":
        return WordCount(tuple(_dfs_counts(bounds, k, n_max)))
    if method != "states":
        raise DomainError(f"unknown counting method {method!r}")
    states = {tuple(0 for _ in bounds): 1}
    counts = []
    for length in range(1, n_max + 1):
        nxt: dict = {}
        for st, cnt in states.items():
            for c in range(k):
                new = []
                for b, m in zip(bounds, st):
                    r = b.step(m, c, length)
                    if r is None:
                        break
                    new.append(r)
                else:
                    key = tuple(new)
                    nxt[key] = nxt.get(key, 0) + cnt
        states = nxt
        counts.append(sum(states.values()))
    return WordCount(tuple(counts))


def _dfs_counts(bounds, k: int, n_max: int) -> list[int]:
    counts = [0] * n_max
    stack = [(0, tuple(0 for _ in bounds))]
    while stack:
        length, st = stack.pop()
        for c in range(k):
            new = []
            for b, m in zip(bounds, st):
                r = b.step(m, c, length + 1)
                if r is None:
                    break
                new.append(r)
            else:
                counts[length] += 1
                if length + 1 < n_max:
                    stack.append((length + 1, tuple(new)))
    return counts


def entropy_estimate(wc: WordCount) -> tuple[float, float]:
    """``(log c_n / n, log c_n / n - log(c_n / c_{n-1}))`` at ``n = n_max``.

    ``log c_n / n`` is an upper bound for the entropy by submultiplicativity;
    the second value is a heuristic size of the remaining gap.
    """
    n = wc.n_max
    if n < 8:
        raise DomainError("need n_max >= 8 for an entropy estimate")
    value = math.log(wc.counts[-1]) / n
    ratio = math.log(wc.counts[-1] / wc.counts[-2])
    return value, value - ratio


def orbit_complexity(u: EventuallyPeriodic, n: int) -> int:
    """Number of distinct words of length ``n`` in the orbit of ``u``: at most preperiod + period."""
    total = len(u.preperiod) + len(u.period)
    return len({tuple(u.digit(i + j) for j in range(n)) for i in range(total)})


def entropy_drop_witness(u, beta, depth: int = 64) -> tuple[float, float]:
    """``(0, log beta)``: a periodic orbit carries zero entropy while the shift carries ``log beta``.

    Checks that 0 codes to ``u`` at ``(alpha(beta), beta)`` first.
    """
    u = u if isinstance(u, EventuallyPeriodic) else EventuallyPeriodic.parse(u)
    beta = to_number(beta)
    check = verify_constant_coding_detail(u, beta, depth)
    if not check.valid:
        raise DomainError(f"beta = {beta} is not in the validity range of {u.pretty()}: {check.reason}")
    # the cycle measure has finite support, so its entropy is 0
    return 0.0, math.log(float(beta))
