import mpmath
import pytest
from hypothesis import given, strategies as st

from powersat.zeta import hurwitz_zeta, riemann_zeta, zeta_series, zeta_tail


@pytest.mark.parametrize("s", [1.05, 1.25, 1.5, 2.0, 2.5, 3.0, 3.266, 4.0, 7.5, 20.0])
def test_riemann_matches_mpmath(s):
    assert riemann_zeta(s) == pytest.approx(float(mpmath.zeta(s)), rel=1e-13, abs=1e-13)


@given(s=st.floats(1.1, 12.0), a=st.floats(0.5, 1e6))
def test_hurwitz_matches_mpmath(s, a):
    assert hurwitz_zeta(s, a) == pytest.approx(float(mpmath.zeta(s, a)), rel=1e-12)


@pytest.mark.parametrize("s", [2.0, 3.0, 4.0])
def test_series_cross_check(s):
    assert zeta_series(s, tol=1e-10) == pytest.approx(riemann_zeta(s), abs=1e-9)


def test_tail_is_hurwitz_at_integer_start():
    assert zeta_tail(3.0, 1) == riemann_zeta(3.0)
    assert zeta_tail(3.0, 2) == pytest.approx(riemann_zeta(3.0) - 1.0, abs=1e-14)


@pytest.mark.parametrize("s,a", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0)])
def test_domain_rejected(s, a):
    with pytest.raises(ValueError):
        hurwitz_zeta(s, a)
