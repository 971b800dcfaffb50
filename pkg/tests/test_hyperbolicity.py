import random
from fractions import Fraction

import flint
import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpc, mpf

from jensenlab.hyperbolicity import (
    HYPERBOLIC,
    NOT_HYPERBOLIC,
    _roots_validated,
    certify,
    krawczyk,
    real_root_count,
    series_source,
    spacing_of,
    spacing_stats,
    validate_root,
    zeros_window,
    zeros_window_poly,
)
from jensenlab.jensen import JensenSpec, RealPolynomial, build, hermite
from jensenlab.sturm import (
    ball_sturm_count,
    count_distinct,
    count_distinct_exact,
    count_with_multiplicity_exact,
    sign_at_rational,
    sturm_sequence,
)
from jensenlab.xi import xi_even_gamma

from oracles import pair_factor, run_oracle_suite


def poly(*coeffs):
    return RealPolynomial(tuple(Fraction(c) for c in coeffs))


def test_unit_circle_pair_is_not_hyperbolic():
    v = certify(poly(1, 0, 1))
    assert v.outcome == NOT_HYPERBOLIC
    assert abs(v.witness.root - mpc(0, 1)) < 1e-30 or abs(v.witness.root - mpc(0, -1)) < 1e-30


def test_simple_hyperbolic():
    v = certify(poly(-1, 0, 1))
    assert v.outcome == HYPERBOLIC and v.real_count == 2


def test_planted_pair_witness():
    p = RealPolynomial.from_roots([Fraction(1), Fraction(2), Fraction(3)]) * pair_factor(Fraction(1), Fraction(2))
    v = certify(p)
    assert v.outcome == NOT_HYPERBOLIC
    z = v.witness.root
    assert abs(mpc(z.real, abs(z.imag)) - mpc(1, 2)) < 1e-20
    assert v.witness.imag_lower > 0


def test_repeated_roots_count_with_multiplicity():
    p = RealPolynomial.from_roots([Fraction(1), Fraction(1), Fraction(-2), Fraction(-2), Fraction(-2)])
    v = certify(p)
    assert v.outcome == HYPERBOLIC and v.real_count == 5


def test_repeated_complex_pair_still_witnessed():
    q = pair_factor(Fraction(3), Fraction(1, 2))
    v = certify(q * q * RealPolynomial.from_roots([Fraction(0)]))
    assert v.outcome == NOT_HYPERBOLIC and v.witness is not None


def test_verdict_text_has_trace():
    text = certify(poly(1, 0, 1)).to_text()
    assert "outcome: CertifiedNotHyperbolic" in text and "witness:" in text and "trace:" in text


def test_oracle_suite_small():
    stats, failures = run_oracle_suite(instances=150, seed=7)
    assert failures == []
    assert stats["hyperbolic"] == 150 and stats["flipped"] == 150


def _euclid_count(coeffs):
    p = flint.fmpq_poly(coeffs)
    seq = [p, p.derivative()]
    while seq[-1].degree() > 0:
        seq.append(-(seq[-2] % seq[-1]))
    def variations(signs):
        s = [x for x in signs if x]
        return sum(1 for a, b in zip(s, s[1:]) if a != b)
    def lead_sign(q, at_neg):
        c = q.coeffs()[-1]
        s = 1 if c > 0 else -1
        return s * (-1) ** q.degree() if at_neg else s
    return variations([lead_sign(q, True) for q in seq]) - variations([lead_sign(q, False) for q in seq])


@given(st.lists(st.integers(min_value=-50, max_value=50), min_size=3, max_size=16).filter(lambda c: c[-1] != 0))
def test_subresultant_chain_matches_euclid(coeffs):
    p = flint.fmpz_poly(coeffs)
    if p.gcd(p.derivative()).degree() > 0:
        return
    assert count_distinct_exact(p) == _euclid_count(coeffs)


def test_multiplicity_counts_on_products():
    rng = random.Random(3)
    for _ in range(50):
        roots = [rng.randint(-6, 6) for _ in range(rng.randint(1, 10))]
        p = flint.fmpz_poly([1])
        for r in roots:
            p *= flint.fmpz_poly([-r, 1])
        p *= flint.fmpz_poly([1, 0, 1])
        assert count_with_multiplicity_exact(p) == len(roots)


def test_ball_route_degree_80():
    p = flint.fmpz_poly([1])
    for r in range(1, 81):
        p *= flint.fmpz_poly([-r, 2])
    ints = [int(c) for c in p.coeffs()]
    count, method, _ = count_distinct(ints)
    assert count == 80 and method == "sturm-ball"
    assert ball_sturm_count(ints, 4096).count == 80


def test_sign_at_rational():
    assert sign_at_rational([-2, 0, 1], Fraction(3, 2)) == 1
    assert sign_at_rational([-2, 0, 1], Fraction(7, 5)) == -1
    assert sign_at_rational([-4, 0, 1], Fraction(2)) == 0


def test_sturm_chain_ends_in_constant():
    seq = sturm_sequence(flint.fmpz_poly([-6, 11, -6, 1]))
    assert seq[-1].degree() == 0


def test_krawczyk_accepts_and_rejects():
    ints = [1, 0, 1]
    with mp.workprec(128):
        assert krawczyk(ints, mpc(0, 1), mpf(2) ** -40, 192)
        assert not krawczyk(ints, mpc(0, 3), mpf(2) ** -40, 192)
    assert validate_root(ints, mpc("0.1", "0.9")) is not None


def test_validated_roots_agree_with_sturm_on_hyperbolic_inputs():
    rng = random.Random(11)
    for degree in (5, 40, 120, 200):
        roots = sorted({Fraction(rng.randint(-10 ** 4, 10 ** 4), 97) for _ in range(degree)})
        p = RealPolynomial.from_roots(roots)
        assert certify(p).outcome == HYPERBOLIC
        disks = _roots_validated(p.integer_coeffs(), False)
        assert len(disks) == len(roots)
        assert all(abs(z.imag) <= r for z, r in disks)


def test_osullivan_implication_on_xi_moments():
    table = xi_even_gamma(30, prec=256).to_series()
    for d in range(1, 9):
        for n in range(21):
            even = certify(build(table, JensenSpec(d, n, "even")))
            if even.outcome == HYPERBOLIC:
                assert certify(build(table, JensenSpec(d, n, "osullivan"))).outcome == HYPERBOLIC, (d, n)


def test_spacing_of_progression():
    assert spacing_of([1, 2, 3, 4]).normalized_variance == 0


def test_spacing_needs_three_zeros():
    with pytest.raises(ValueError):
        spacing_of([1, 2])


def _hermite_central_variance(d):
    p = hermite(d)
    full = zeros_window_poly(p, (-2 * d, 2 * d))
    top = max(full.locations())
    central = zeros_window_poly(p, (-top / 2, top / 2))
    assert central.complete
    return spacing_stats(central).normalized_variance


def test_hermite_spacing_flattens_with_degree():
    assert _hermite_central_variance(40) < _hermite_central_variance(20)


@pytest.mark.parametrize("d", [20, 40])
def test_hermite_central_spacing_matches_independent_roots(d):
    coeffs = [int(c) for c in reversed(hermite(d).coeffs)]
    with mp.workprec(400):
        roots = sorted(mpmath.polyroots(coeffs, maxsteps=400, extraprec=2000))
        top = roots[-1]
        central = [r for r in roots if abs(r) <= top / 2]
        expected = spacing_of(central).normalized_variance
        assert abs(_hermite_central_variance(d) - expected) < mpf(10) ** -12


def test_polynomial_zero_window():
    z = zeros_window_poly(RealPolynomial.from_roots([Fraction(1, 3), Fraction(2), Fraction(9)]), (0, 5))
    assert z.complete and len(z.zeros) == 2
    with mp.workprec(128):
        assert abs(z.zeros[0][0] - mpf(1) / 3) <= z.zeros[0][1] + mpf(10) ** -30


def test_cosine_zero_window():
    zl = zeros_window(series_source("cos", 200, 256), (0, 10))
    assert zl.complete and len(zl.zeros) == 3
    with mp.workprec(128):
        for k, (z, r) in enumerate(zl.zeros):
            assert abs(z - (2 * k + 1) * mp.pi / 2) <= r + mpf(10) ** -20


def test_xfamily_zero_window_keeps_real_zeros_only():
    zl = zeros_window(series_source("xfamily:10", 300, 256), (0, 9))
    assert zl.complete
    with mp.workprec(128):
        expected = [mp.pi / 2, 3 * mp.pi / 2]
        assert [float(z) for z, _ in zl.zeros] == pytest.approx([float(e) for e in expected], abs=1e-12)


def test_real_root_count_uses_even_reduction():
    p = poly(-1, 0, 0, 0, 1)  # z^4 - 1
    count, degree, method, _ = real_root_count(p)
    assert (count, degree) == (2, 4) and "even" in method
