from fractions import Fraction

import pytest
from mpmath import mp, mpf

from jensenlab.cauchy import ContourPlan, aliasing_bound, cauchy_alpha, choose_plan, contour_series
from jensenlab.series import coeff_alpha


def test_plan_examples():
    p = choose_plan("cos", 100, 20)
    assert p.radius == 100 and p.nodes == 1024 and p.symmetry == 4
    assert choose_plan("cos", 1000, 20).nodes == 4096
    assert choose_plan("exp", 10, 20).symmetry == 2
    zero = choose_plan("cos", 0)
    assert zero.radius == 1 and zero.nodes == 64


def test_plan_validation():
    with pytest.raises(ValueError):
        ContourPlan(Fraction(1), 6, 128, 4)
    with pytest.raises(ValueError):
        ContourPlan(Fraction(1), 8, 128, 3)


def test_aliasing_bound_decreases_when_nodes_double():
    p = choose_plan("xfamily:10", 50)
    assert aliasing_bound("xfamily:10", 50, p.doubled()) < aliasing_bound("xfamily:10", 50, p)


@pytest.mark.parametrize("name", ["cos", "sinc", "exp", "xfamily:10"])
def test_single_coefficients_match_closed_forms(name):
    exact = coeff_alpha(name, 0, 40, prec=192)
    for n in (0, 7, 20, 40):
        v, err = cauchy_alpha(name, n)
        with mp.workprec(192):
            got = v.to_mpf(192) if v.sign else mpf(0)
            want = exact.value(n)
            want = mpf(want.numerator) / want.denominator if isinstance(want, Fraction) else want
            assert abs(got - want) <= err + exact.error(n) + mpf(10) ** -40


def test_odd_coefficients_of_even_function_vanish():
    v, _ = cauchy_alpha("cos", 13)
    assert v.sign == 0


def test_block_series_within_bounds():
    s = contour_series("sinc", 0, 120)
    exact = coeff_alpha("sinc", 0, 120)
    with mp.workprec(256):
        for n in range(121):
            q = exact.value(n)
            assert abs(s.value(n) - mpf(q.numerator) / q.denominator) <= s.error(n)
