import itertools
import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from betadyn.errors import DomainError, IndeterminateOrder, InternalInconsistency
from betadyn.interval_maps import GenParams, Params, SignSeq, t_ab_power
from betadyn.numerics import golden_ratio
from betadyn.symbolic import (
    NEG_NEG_BETA0,
    EventuallyPeriodic,
    KneadingData,
    Order,
    SymbolWord,
    admissible,
    code,
    code_stream,
    first_disagreement,
    kneading,
    kneading_gen,
    order_compare,
    phi_series,
    separation_check,
    separation_check_gen,
    shift,
)

from conftest import rationals, tab_params

F = Fraction
INC2 = SignSeq.increasing(2)
TENT = SignSeq.parse("+-")


def oracle_less(x, y, signs):
    """Sign-twisted comparison of two finite words by direct definition (None if equal)."""
    delta = 1
    for a, b in zip(x, y):
        if a != b:
            return (a < b) == (delta == 1)
        delta *= signs[a]
    return None


def test_word_parse_and_validation():
    w = SymbolWord.parse("0101")
    assert len(w) == 4 and str(w) == "0101" and w.shift(1).digits == (1, 0, 1)
    assert SymbolWord.parse("").digits == ()
    assert SymbolWord.parse("3,11,2", k=12).digits == (3, 11, 2)
    with pytest.raises(DomainError):
        SymbolWord((0, 2), k=2)


def test_eventually_periodic_parse():
    u = EventuallyPeriodic.parse("01:0,2")
    assert [u.digit(i) for i in range(5)] == [0, 1, 0, 1, 0]
    v = EventuallyPeriodic.parse("1002:2,2")
    assert [v.digit(i) for i in range(7)] == [1, 0, 0, 2, 0, 2, 0]
    assert EventuallyPeriodic.parse(str(v)) == v
    assert EventuallyPeriodic.parse("0:0,1").is_zero


@pytest.mark.parametrize("x,y,signs,expected", [
    ("010", "011", INC2, Order.LT),
    ("11", "10", TENT, Order.LT),
])
def test_order_examples(x, y, signs, expected):
    assert order_compare(SymbolWord.parse(x), SymbolWord.parse(y), signs) == expected


def test_order_equal_to_probe():
    w = EventuallyPeriodic.periodic("01")
    assert order_compare(w, w, INC2, probe=16) == Order.EQ


def test_order_indeterminate_on_stopped_stream():
    g = GenParams(2, TENT)
    s = code_stream(g, F(1, 4))  # 1/4 -> 1/2, a breakpoint
    assert s.digit(0) == 0 and s.digit(1) is None
    with pytest.raises(IndeterminateOrder):
        order_compare(s, SymbolWord.parse("0000"), TENT, probe=4)


words = st.lists(st.integers(0, 2), min_size=1, max_size=12)
signs3 = st.lists(st.sampled_from([1, -1]), min_size=3, max_size=3)


@given(words, words, signs3)
def test_order_matches_definition(x, y, s):
    signs = SignSeq(tuple(s))
    n = min(len(x), len(y))
    got = order_compare(tuple(x), tuple(y), signs, probe=n)
    want = oracle_less(x, y, s)
    assert got == (Order.EQ if want is None else Order.LT if want else Order.GT)
    # antisymmetry
    assert order_compare(tuple(y), tuple(x), signs, probe=n) == Order(-int(got))


@pytest.mark.parametrize("m,x,n,expected", [
    (Params(0, 2), F(1, 3), 4, "0101"),
    (Params(F(1, 3), 2), 0, 6, "010101"),
    (GenParams(2, TENT), 1, 4, "1000"),
])
def test_code_examples(m, x, n, expected):
    assert str(code(m, x, n)) == expected


def test_code_truncates_at_breakpoint():
    w = code(GenParams(2, TENT), F(1, 4), 6)
    assert w.digits == (0,) and w.stop is not None


def test_kneading_examples(golden):
    kd = kneading(Params(0, 2), 32)
    assert set(kd.u.prefix(32).digits) == {0} and set(kd.v.prefix(32).digits) == {1}
    kd = kneading(Params(0, golden), 40)
    assert str(kd.v.prefix(40)) == "10" * 20
    kd = kneading(Params(F(1, 3), 2), 40)
    assert str(kd.u.prefix(40)) == "01" * 20


def test_golden_v_agrees_with_code_of_one_minus_eps():
    # rational point 1 - 10^-30 close to 1 under the rational 40-digit-accurate slope gives the same prefix
    phi = golden_ratio()
    kd = kneading(Params(0, phi), 40)
    w = code(Params(0, phi), 1 - F(1, 10 ** 30), 40)
    assert w.digits == kd.v.prefix(40).digits


def test_kneading_gen_examples(golden):
    kd = kneading_gen(GenParams(2, TENT), 32)
    assert str(kd.eta.prefix(8)) == "10000000"
    kd = kneading_gen(GenParams(2, SignSeq.parse("++")), 32)
    assert str(kd.eta.prefix(8)) == "11111111"
    kd = kneading_gen(GenParams(golden, TENT), 64)
    eta = kd.eta.prefix(64).digits
    for n in range(64):
        assert order_compare(eta[n:], eta, TENT, probe=64 - n) != Order.GT


def test_kneading_validation_rejects_bad_data():
    with pytest.raises(InternalInconsistency):
        KneadingData.from_words(u=SymbolWord.parse("1" * 8), v=SymbolWord.parse("0" * 8), signs=INC2, depth=8)


def test_admissible_examples(golden):
    kd = kneading(Params(0, golden), 64)
    assert not admissible(SymbolWord.parse("11"), kd)
    assert admissible(SymbolWord.parse("1010"), kd)
    for beta in (F(3, 2), 2, F(7, 3)):
        kdb = kneading(Params(0, beta), 64)
        assert admissible(SymbolWord.parse("0" * 12), kdb)


def test_admissible_golden_brute_force(golden):
    kd = kneading(Params(0, golden), 64)
    # 4-words avoiding "11" are exactly the admissible ones
    for w in itertools.product((0, 1), repeat=4):
        no11 = all(not (a == b == 1) for a, b in zip(w, w[1:]))
        assert admissible(w, kd) == no11


@pytest.mark.parametrize("alpha,beta", [(0, F(3, 2)), (F(1, 3), F(3, 2)), (F(1, 5), F(9, 5)), (F(1, 2), F(5, 4))])
def test_kneading_extremality_exhaustive(alpha, beta):
    p = Params(alpha, beta)
    kd = kneading(p, 64)
    u, v = kd.u.prefix(12).digits, kd.v.prefix(12).digits
    for n in range(1, 13):
        for w in itertools.product(range(p.k), repeat=n):
            if admissible(w, kd):
                assert order_compare(u, w, p.signs, probe=n) != Order.GT
                assert order_compare(w, v, p.signs, probe=n) != Order.GT


@given(tab_params(), rationals(0, F(63, 64), 199))
def test_codings_of_points_are_admissible(ab, x):
    p = Params(*ab)
    kd = kneading(p, 64)
    assert admissible(code(p, x, 16), kd)


def test_phi_series_examples():
    assert phi_series(EventuallyPeriodic.parse("0:0,1"), Params(0, 2), 40).value == 0
    one = phi_series(EventuallyPeriodic.parse("1:0,1"), Params(0, 2), 40)
    assert one.contains(1)
    v = phi_series(EventuallyPeriodic.periodic("01"), Params(F(1, 3), 2), 40)
    assert v.contains(0)
    assert abs(v.value) <= v.tail_bound


@given(tab_params(), rationals(0, F(63, 64), 997))
def test_phi_round_trip(ab, x):
    p = Params(*ab)
    r = phi_series(code(p, x, 64), p, 64)
    assert abs(r.value - x) <= r.tail_bound


@given(tab_params(), rationals(0, F(63, 64), 997), st.integers(0, 16))
def test_phi_shift_compatibility(ab, x, m):
    p = Params(*ab)
    w = code(p, x, 64 + m)
    r = phi_series(shift(w, m), p, 64)
    assert abs(r.value - t_ab_power(p, x, m)) <= r.tail_bound


@settings(max_examples=500)
@given(tab_params(), rationals(0, F(63, 64), 997), rationals(0, F(63, 64), 997))
def test_coding_order_preserving(ab, x, y):
    if x == y:
        return
    x, y = min(x, y), max(x, y)
    p = Params(*ab)
    cx, cy = code(p, x, 64), code(p, y, 64)
    o = order_compare(cx, cy, p.signs, probe=64)
    assert o != Order.GT
    if o == Order.EQ:
        a, b = phi_series(cx, p, 64), phi_series(cy, p, 64)
        assert a.lower <= x <= a.upper and b.lower <= y <= b.upper


@pytest.mark.parametrize("alpha", [0, F(1, 3), F(3, 5)])
def test_kneading_monotone_in_beta(alpha):
    betas = [F(11, 10) + F(j, 10) for j in range(25)]
    prev = None
    for b in betas:
        p = Params(alpha, b)
        kd = kneading(p, 64)
        cur = (kd.u.prefix(64).digits, kd.v.prefix(64).digits)
        if prev is not None:
            signs = SignSeq.increasing(max(p.k, 10))
            assert order_compare(prev[0], cur[0], signs, 64) != Order.GT
            assert order_compare(prev[1], cur[1], signs, 64) != Order.GT
        prev = cur


def test_stream_concurrent_readers_see_one_prefix():
    s = code_stream(Params(F(1, 7), F(5, 2)), F(3, 11))
    results = []

    def read():
        results.append(s.prefix(500).digits)

    threads = [threading.Thread(target=read) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1


def test_separation_examples():
    r = separation_check(Params(0, 2), Params(0, 2), F(1, 2))
    assert r.truncated and r.bound_ok
    r = separation_check(Params(0, F(19, 10)), Params(0, 2), F(1, 2))
    assert not r.truncated and r.l <= 6 and r.bound_ok
    assert F(1, 10) <= F(2) ** (1 - r.l) / F(1, 2)
    r = separation_check(Params(F(1, 3), F(3, 2)), Params(F(1, 3), F(8, 5)), 0)
    assert r.bound_ok and F(1, 10) <= F(8, 5) ** (2 - r.l) / F(1, 3)
    with pytest.raises(DomainError):
        separation_check(Params(0, 2), Params(0, 3), 0)


def test_separation_gen_examples():
    r = separation_check_gen(GenParams(F(9, 5), TENT), GenParams(F(9, 5), TENT))
    assert r.truncated and r.bound_ok
    r = separation_check_gen(GenParams(F(180, 100), TENT), GenParams(F(181, 100), TENT))
    assert r.l is not None and not r.truncated
    assert r.k_tight == F(1, 100) * F(181, 100) ** r.l
    nn = SignSeq.parse("--")
    r = separation_check_gen(GenParams(F(16, 10), nn), GenParams(F(161, 100), nn))
    assert r.in_hypothesis and r.bound_ok
    r = separation_check_gen(GenParams(F(140, 100), nn), GenParams(F(141, 100), nn))
    assert not r.in_hypothesis
    assert NEG_NEG_BETA0 == F(153, 100)


def test_first_disagreement():
    assert first_disagreement(SymbolWord.parse("0101"), SymbolWord.parse("0111")) == 2
    assert first_disagreement(SymbolWord.parse("01"), SymbolWord.parse("01"), probe=2) is None
