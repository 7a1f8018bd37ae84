import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from betadyn.errors import BreakpointHit, DomainError
from betadyn.interval_maps import (
    GenParams,
    Params,
    SignSeq,
    detect_critical,
    exact_orbit_points,
    gen_step,
    iter_orbit,
    orbit_floats,
    t_ab_digits,
    t_ab_power,
    t_ab_power_closed,
    t_ab_step,
)
from betadyn.numerics import golden_ratio, sqrt_exact

from conftest import rationals, tab_params

F = Fraction
TENT = SignSeq.parse("+-")


def oracle_tab_step(alpha, beta, x):
    y = beta * x + alpha
    j = math.floor(y)
    return y - j, j


def oracle_gen_step(beta, signs, x):
    # lap j is (j/beta, (j+1)/beta]; lap 0 also contains 0 and x = 1 joins the last lap
    k = len(signs)
    y = beta * x
    j = min(math.floor(y), k - 1)
    if y == j and 0 < j:
        if x == 1:
            j = k - 1
        else:
            raise BreakpointHit("breakpoint", step=0, point=x)
    r = y - j
    return (r if signs[j] == 1 else 1 - r), j


@pytest.mark.parametrize("alpha,beta,x,expected", [
    (0, 2, F(1, 3), (F(2, 3), 0)),
    (F(1, 3), 2, F(1, 3), (F(0), 1)),
    (0, 2, 0, (F(0), 0)),
])
def test_t_ab_step_examples(alpha, beta, x, expected):
    assert t_ab_step(Params(alpha, beta), x) == expected


@pytest.mark.parametrize("alpha,beta,x,n,expected", [
    (F(1, 3), 2, 0, 2, F(0)),
    (F(1, 5), F(7, 3), F(2, 9), 0, F(2, 9)),
    (0, 2, F(1, 3), 2, F(1, 3)),
])
def test_t_ab_power_examples(alpha, beta, x, n, expected):
    p = Params(alpha, beta)
    assert t_ab_power(p, x, n) == expected
    assert t_ab_power_closed(p, x, t_ab_digits(p, x, n)) == expected


def test_closed_form_by_hand():
    p = Params(F(1, 3), 2)
    # 2^2*0 + (1/3)*3 - (0*2 + 1*1)
    assert t_ab_digits(p, 0, 2) == [0, 1]
    assert t_ab_power_closed(p, 0, [0, 1]) == 0


@given(tab_params(), rationals(0, F(63, 64), 97), st.integers(0, 64))
def test_closed_form_equals_iteration(ab, x, n):
    alpha, beta = ab
    p = Params(alpha, beta)
    it = t_ab_power(p, x, n)
    assert t_ab_power_closed(p, x, t_ab_digits(p, x, n)) == it
    y = x
    for _ in range(n):
        y, _ = oracle_tab_step(alpha, beta, y)
    assert it == y


@given(tab_params(), rationals(0, F(63, 64), 97))
def test_tab_step_range_and_digit(ab, x):
    p = Params(*ab)
    y, j = t_ab_step(p, x)
    assert 0 <= y < 1 and 0 <= j < p.k
    cuts = [F(0)] + p.breakpoints() + [F(1)]
    assert cuts[j] <= x < cuts[j + 1]


@given(tab_params())
def test_params_invariants(ab):
    p = Params(*ab)
    assert p.k == math.ceil(ab[0] + ab[1])
    a = p.breakpoints()
    assert len(a) == p.k - 1
    assert all(0 < t < 1 for t in a) and a == sorted(set(a))


def test_params_validation():
    with pytest.raises(DomainError):
        Params(1, 2)
    with pytest.raises(DomainError):
        Params(0, 1)
    with pytest.raises(DomainError):
        GenParams(F(5, 2), TENT)  # k = 3 needs three signs
    with pytest.raises(DomainError):
        SignSeq.parse("+0")


@pytest.mark.parametrize("signs,beta,x,expected", [
    ("+-", 2, F(1, 4), (F(1, 2), 0)),
    ("+-", 2, F(3, 4), (F(1, 2), 1)),
    ("--", 2, F(1, 4), (F(1, 2), 0)),
])
def test_gen_step_examples(signs, beta, x, expected):
    assert gen_step(GenParams(beta, SignSeq.parse(signs)), x) == expected


def test_gen_step_breakpoint_raises():
    with pytest.raises(BreakpointHit):
        gen_step(GenParams(2, TENT), F(1, 2))


def test_detect_critical_examples():
    assert detect_critical(GenParams(2, TENT), F(1, 2), 5) == 0
    assert detect_critical(GenParams(2, TENT), 1, 8) is None
    assert detect_critical(GenParams(F(3, 2), TENT), 1, 3) is None
    # oracle for the last case: 1 -> 1/2 -> 3/4 -> 7/8
    x, seen = F(1), []
    for _ in range(3):
        x, _ = oracle_gen_step(F(3, 2), (1, -1), x)
        seen.append(x)
    assert seen == [F(1, 2), F(3, 4), F(7, 8)]


signs_st = st.sampled_from(["+-", "-+", "--", "++", "+-+", "--+", "-+-"])


@st.composite
def gen_params(draw):
    s = draw(signs_st)
    k = len(s)
    beta = draw(rationals(F(k - 1) + F(1, 50), F(k)))
    if beta <= 1:
        beta = F(11, 10)
    return GenParams(beta, SignSeq.parse(s))


@given(gen_params(), rationals(0, 1, 101))
def test_gen_step_matches_oracle_and_range(g, x):
    try:
        expected = oracle_gen_step(g.beta, g.signs.signs, x)
    except BreakpointHit:
        with pytest.raises(BreakpointHit):
            gen_step(g, x)
        return
    y, j = gen_step(g, x)
    assert (y, j) == expected
    assert 0 <= y <= 1


@given(gen_params(), rationals(0, 1, 101), rationals(0, 1, 101))
def test_monotone_branch(g, x, y):
    if x == y:
        return
    x, y = min(x, y), max(x, y)
    try:
        fx, jx = gen_step(g, x)
        fy, jy = gen_step(g, y)
    except BreakpointHit:
        return
    if jx == jy:
        if g.signs.signs[jx] == 1:
            assert fx < fy
        else:
            assert fx > fy


@given(tab_params(), rationals(0, F(63, 64), 97), rationals(0, F(63, 64), 97))
def test_monotone_branch_tab(ab, x, y):
    p = Params(*ab)
    if x >= y:
        return
    (fx, jx), (fy, jy) = t_ab_step(p, x), t_ab_step(p, y)
    if jx == jy:
        assert fx < fy


def test_tent_critical_hits_are_exceptional():
    rng = random.Random(2024)
    hits = []
    for _ in range(1000):
        beta = 1 + F(rng.randrange(1, 10 ** 6 + 1), 10 ** 6)
        n = detect_critical(GenParams(beta, TENT), 1, 200)
        if n is not None:
            hits.append((beta, n))
    # any hit must be an exact breakpoint landing; check it by direct iteration
    for beta, n in hits:
        x = F(1)
        for _ in range(n):
            x, _ = oracle_gen_step(beta, (1, -1), x)
        assert x == 1 / beta
    assert len(hits) <= 5


def test_iter_orbit_flags_breakpoint():
    pts = list(iter_orbit(GenParams(2, TENT), F(1, 4), 5))
    assert [p.x for p in pts] == [F(1, 4), F(1, 2)]
    assert pts[-1].hit_breakpoint and not pts[0].hit_breakpoint


def test_golden_orbit_of_one_is_exact():
    phi = golden_ratio()
    p = Params(0, phi)
    pts, period = exact_orbit_points(p, 1 / phi, 64)
    assert pts[0] == 1 / phi and pts[1] == 0
    assert period == (1, 1)


def test_left_continuous_mode():
    p = Params(0, 2)
    assert t_ab_step(p, F(1, 2), side=-1) == (F(1), 0)
    assert t_ab_step(p, 1, side=-1) == (F(1), 1)


@pytest.mark.parametrize("alpha,beta,x0", [
    (F(1, 7), F(5, 2), F(3, 11)),
    (F(2, 5), F(13, 10), F(1, 9)),
    (0, F(3), F(5, 17)),
])
def test_float_orbit_matches_exact(alpha, beta, x0):
    p = Params(alpha, beta)
    n = 3000
    fo = orbit_floats(p, x0, n, exact_limit=64)
    x = x0
    for i in range(n):
        if i % 97 == 0:
            assert abs(fo.values[i] - float(x)) < 1e-12
        x, _ = oracle_tab_step(alpha, beta, x)


def test_float_orbit_irrational_beta():
    r2 = sqrt_exact(2)
    g = GenParams(r2, TENT)
    fo = orbit_floats(g, 1, 200)
    assert fo.truncated_at is None
    b = 2 ** 0.5
    assert abs(fo.values[1] - (2 - b)) < 1e-12
    assert abs(fo.values[2] - (2 * b - 2)) < 1e-12


def test_precision_contract_guard_bits():
    p = Params(F(1, 7), F(5, 2))
    x0 = F(123456789, 987654321)
    a = orbit_floats(p, x0, 5000, exact_limit=16).values
    b = orbit_floats(p, x0, 5000, exact_limit=16, guard_bits=256).values
    assert max(abs(u - v) for u, v in zip(a, b)) < 1e-9
