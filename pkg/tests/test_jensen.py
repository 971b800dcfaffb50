import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from jensenlab.jensen import (
    JensenSpec,
    NormalizationUndefined,
    RealPolynomial,
    _hermite_explicit,
    _hermite_recurrence,
    binomial_normalize,
    build,
    classical_limit_error,
    convergence_report,
    cosine_closed_form,
    hermite,
    hermite_half,
    normalize_to_hermite,
    taylor_shift,
)
from jensenlab.series import coeff_alpha, constant_gamma, series_from_values


def test_hermite_examples():
    assert hermite(0).coeffs == (1,)
    assert hermite(3).coeffs == (0, -12, 0, 8)
    assert hermite_half(6).coeffs == (-120, 0, 180, 0, -30, 0, 1)


@given(st.integers(min_value=0, max_value=120))
def test_hermite_recurrence_matches_explicit_sum(d):
    assert _hermite_recurrence(d) == _hermite_explicit(d)


def test_cos_classical_small():
    p = build(coeff_alpha("cos", 0, 2), JensenSpec(2, 0, "classical"))
    assert p.coeffs == (1, 0, -1)


@pytest.mark.parametrize("d", range(0, 51))
def test_cos_classical_matches_closed_form(d):
    p = build(coeff_alpha("cos", 0, d), JensenSpec(d, 0, "classical"))
    assert p.is_exact and p.coeffs == cosine_closed_form(d).coeffs


def test_binomial_fixed_point():
    g = constant_gamma(0, 60)
    for d in range(31):
        for n in range(31):
            p = build(g, JensenSpec(d, n, "even"))
            assert p.coeffs == tuple(Fraction(math.comb(d, k)) for k in range(d + 1))


@given(st.lists(st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=1000),
                min_size=10, max_size=10),
       st.integers(min_value=0, max_value=5), st.integers(min_value=0, max_value=4))
def test_osullivan_degree_and_lead(gammas, d, n):
    s = series_from_values(gammas, kind="gamma")
    p = build(s, JensenSpec(d, n, "osullivan"))
    assert p.degree == d and p.coeffs[d] == 2 ** d * gammas[n]


def test_osullivan_degree_one():
    s = series_from_values([Fraction(3), Fraction(5)], kind="gamma")
    assert build(s, JensenSpec(1, 0, "osullivan")).coeffs == (5, 6)


def test_kind_mismatch_rejected():
    with pytest.raises(ValueError):
        build(coeff_alpha("cos", 0, 4), JensenSpec(2, 0, "even"))


def test_taylor_truncation():
    p = build(coeff_alpha("exp", 0, 4), JensenSpec(4, 0, "taylor"))
    assert p.coeffs == tuple(Fraction(1, math.factorial(k)) for k in range(5))


def test_hermite_is_fixed_point_of_normalization():
    triple, cs = normalize_to_hermite(hermite_half(6))
    assert triple.B_exact == 0 and triple.C_power_exact == 1
    assert abs(triple.A.to_mpf() - 1) < mpf(2) ** -100
    assert cs == [mpf(int(c)) for c in hermite_half(6).coeffs]


def _positive_root_poly(roots):
    return RealPolynomial.from_roots([Fraction(r) for r in roots])


even_degree_roots = st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=50),
                             min_size=2, max_size=8).filter(lambda r: len(r) % 2 == 0)


def _normalizable(p):
    try:
        return normalize_to_hermite(p, prec=160)
    except NormalizationUndefined:
        return None


@given(even_degree_roots)
def test_normalization_is_idempotent(roots):
    p = _positive_root_poly(roots)
    first = _normalizable(p)
    if first is None:
        return
    _, cs = first
    q = RealPolynomial(tuple(cs), tuple(mpf(0) for _ in cs), None, 160, "normalized")
    triple, again = normalize_to_hermite(q, prec=160)
    tol = mpf(2) ** (8 - 160) * max(1, max(abs(c) for c in cs))
    with mp.workprec(160):
        assert abs(triple.A.to_mpf() - 1) <= tol
        assert abs(triple.B.to_mpf() if triple.B.sign else mpf(0)) <= tol
        assert abs(triple.C.to_mpf() - 1) <= tol
        assert all(abs(a - b) <= tol for a, b in zip(again, cs))


@given(even_degree_roots, st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=1000))
def test_normalization_scale_equivariance(roots, s):
    p = _positive_root_poly(roots)
    base = _normalizable(p)
    if base is None:
        return
    scaled = RealPolynomial(tuple(s * c for c in p.coeffs))
    t1, c1 = base
    t2, c2 = normalize_to_hermite(scaled, prec=160)
    assert t1.B_exact == t2.B_exact and t1.C_power_exact == t2.C_power_exact
    assert c1 == c2
    with mp.workprec(160):
        assert abs(t2.A.to_mpf() * s.numerator / s.denominator / t1.A.to_mpf() - 1) < mpf(2) ** -150


def test_normalization_errors():
    with pytest.raises(NormalizationUndefined):
        normalize_to_hermite(RealPolynomial((Fraction(1), Fraction(0), Fraction(1), Fraction(1))))
    with pytest.raises(NormalizationUndefined):
        # x^2 + 1 shifted stays x^2 + 1, radicand 1/(-2) < 0
        normalize_to_hermite(RealPolynomial((Fraction(1), Fraction(0), Fraction(1))))


def test_taylor_shift():
    assert taylor_shift([Fraction(0), Fraction(0), Fraction(1)], Fraction(1)) == [1, 2, 1]


def test_binomial_normalize_of_binomial():
    p = RealPolynomial(tuple(Fraction(7 * math.comb(5, k), 3 ** k) for k in range(6)))
    assert binomial_normalize(p) == [math.comb(5, k) for k in range(6)]


def test_binomial_report_constant_series():
    rows = convergence_report(constant_gamma(0, 40), 5, [0, 10, 30], "binomial")
    assert all(r.distance == 0 for r in rows)


def test_classical_limit_monotone():
    errs = [classical_limit_error(d, samples=64) for d in (8, 16, 32, 64)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_cosine_rescale_near_table_window():
    rows = convergence_report("xfamily:10", 3, [100000], "cosinerescale", prec=192)
    unscaled = rows[0].extra["unscaled"]
    assert mpf("1.5e-9") < unscaled < mpf("1.6e-9")


def _pinned_vector_by_hand(ratios, d, h0, orientation):
    """Independent route: exact shift and pin in rationals, one root extraction at the end."""
    import mpmath
    c = [math.comb(d, j) * ratios[j] for j in range(d + 1)]
    b = -c[d - 1] / (d * c[d])
    q = [sum(math.comb(i, k) * c[i] * b ** (i - k) for i in range(k, d + 1)) for k in range(d + 1)]
    rad = q[0] / (h0 * q[d])
    with mp.workprec(200):
        C = orientation * mpmath.root(mpf(rad.numerator) / rad.denominator, d)
        return [h0 * (mpf((q[k] / q[0]).numerator) / (q[k] / q[0]).denominator) * C ** k for k in range(d + 1)]


def test_sinc_deep_vector_matches_hand_route():
    from jensenlab.series import alpha_to_gamma
    n, d = 5000000, 6
    ratios = [Fraction(1)]
    for j in range(d):
        k = n + j
        ratios.append(ratios[-1] * Fraction(-1, (2 * k + 2) * (2 * k + 3)))
    expected = _pinned_vector_by_hand(ratios, d, -120, -1)
    gamma = alpha_to_gamma(coeff_alpha("sinc", 2 * n, 2 * n + 2 * d, 256), "power")
    _, got = normalize_to_hermite(build(gamma, JensenSpec(d, n, "even")), -1, 256)
    with mp.workprec(200):
        assert all(abs(a - b) < mpf(10) ** -40 for a, b in zip(got, expected))
