from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from jensenlab.series import (
    FunctionId,
    XFamilyData,
    alpha_to_gamma,
    coeff_alpha,
    constant_gamma,
    evaluate,
    nearest_odd_pair,
    read_cache,
    series_from_values,
    write_cache,
)


def test_function_id_roundtrip():
    for text in ("cos", "sinc", "exp", "xfamily:10", "xfamily:20:9,11", "xi", "dbnxi:0.2"):
        assert str(FunctionId.parse(text)) == text


def test_nearest_odd_pair():
    # odd m with zero m*pi/2 closest to j on either side
    assert nearest_odd_pair(10) == (5, 7)
    assert nearest_odd_pair(20) == (11, 13)


def test_closed_forms():
    s = coeff_alpha("cos", 0, 6)
    assert [s.value(n) for n in range(7)] == [1, 0, -1, 0, 1, 0, -1]
    s = coeff_alpha("sinc", 0, 4)
    assert s.value(2) == Fraction(-1, 3) and s.value(4) == Fraction(1, 5)


def test_xfamily_alpha_against_taylor_of_evaluator():
    s = coeff_alpha("xfamily:10", 0, 12, prec=192)
    with mp.workprec(192):
        f = lambda z: evaluate("xfamily:10", z, prec=192)
        taylor = mpmath.taylor(f, 0, 12, method="quad", radius=1)
        for n in range(13):
            assert abs(s.value(n) - taylor[n] * mpmath.factorial(n)) < mpf(10) ** -25


def test_xfamily_planted_zeros_are_zeros():
    data = XFamilyData.build(FunctionId.xfamily(10), 128)
    for z in data.planted_zeros():
        assert abs(evaluate("xfamily:10", z, prec=128)) < mpf(10) ** -25


def test_xfamily_retained_real_zero_is_a_zero():
    with mp.workprec(128):
        assert abs(evaluate("xfamily:10", mp.pi / 2, prec=128)) < mpf(10) ** -30


@given(st.sampled_from(["cos", "sinc", "xfamily:10", "xfamily:20"]),
       st.floats(min_value=-30, max_value=30, allow_nan=False),
       st.floats(min_value=-3, max_value=3, allow_nan=False))
def test_even_functions_have_even_parity(name, x, y):
    z = mpmath.mpc(x, y)
    a = evaluate(name, z, prec=96)
    b = evaluate(name, -z, prec=96)
    assert abs(a - b) <= mpf(10) ** -20 * max(1, abs(a))


def test_gamma_conventions():
    a = coeff_alpha("cos", 0, 8)
    g = alpha_to_gamma(a, "jensen")
    assert g.value(2) == Fraction(1) * 2 / 24
    p = alpha_to_gamma(a, "power")
    assert p.value(2) == Fraction(1, 24)


def test_odd_function_refused():
    s = series_from_values([0, 1, 0, 1])
    with pytest.raises(ValueError):
        alpha_to_gamma(s)


def test_deep_gamma_uses_scale():
    a = coeff_alpha("cos", 2 * 12000, 2 * 12002)
    g = alpha_to_gamma(a, "power")
    assert g.scale is not None
    with mp.workprec(128):
        expect = mpmath.log10(mpmath.factorial(24000))
    assert abs(g.scale.log10_mag + expect) < mpf(10) ** -20


def test_constant_gamma():
    s = constant_gamma(0, 5)
    assert all(s.value(n) == 1 for n in range(6))


@given(st.lists(st.fractions(max_denominator=10 ** 6).filter(lambda q: abs(q) < 10 ** 9), min_size=1, max_size=12))
def test_cache_roundtrip_exact(values):
    import tempfile
    from pathlib import Path
    s = series_from_values(values, start=3)
    with tempfile.TemporaryDirectory() as tmp:
        path = write_cache(s, Path(tmp) / "s.jlc")
        back = read_cache(path)
    assert back.lo == 3 and [back.value(n) for n in range(3, 3 + len(values))] == values


def test_cache_roundtrip_mpf(tmp_path):
    s = coeff_alpha("xfamily:10", 0, 20, prec=192)
    back = read_cache(write_cache(s, tmp_path / "x.jlc"))
    for n in range(21):
        assert abs(back.raw(n) - s.raw(n)) <= back.error(n)
        assert back.error(n) >= s.error(n)
