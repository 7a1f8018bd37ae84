from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GOLDEN_FLOAT = (1 + 5 ** 0.5) / 2


def rationals(lo, hi, max_den=64):
    """Rationals in the closed interval [lo, hi] with small denominators."""
    lo, hi = Fraction(lo), Fraction(hi)

    def build(t):
        den, num = t
        return lo + (hi - lo) * Fraction(num, den)

    return st.integers(1, max_den).flatmap(lambda d: st.tuples(st.just(d), st.integers(0, d))).map(build)


@st.composite
def tab_params(draw, beta_lo=Fraction(11, 10), beta_hi=Fraction(4)):
    """Rational (alpha, beta) with alpha in [0, 1) and beta in [beta_lo, beta_hi]."""
    alpha = draw(rationals(0, Fraction(99, 100)))
    beta = draw(rationals(beta_lo, beta_hi))
    return alpha, beta


@pytest.fixture
def golden():
    from betadyn.numerics import golden_ratio

    return golden_ratio()
