"""Sturm sequences: exact (subresultant-style, integer coefficients) and
ball-arithmetic (arb) variants, with real-root counting on intervals."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import flint

Point = Union[Fraction, int, float, None]  # None means +infinity / -infinity by position

NEG_INF = "-inf"
POS_INF = "+inf"


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def _variations(signs: Sequence[int]) -> int:
    s = [v for v in signs if v]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


# ---------------------------------------------------------------------------
# exact route


def _prem_positive(a: flint.fmpz_poly, b: flint.fmpz_poly) -> flint.fmpz_poly:
    """|lc(b)|^(deg a - deg b + 1) * a mod b: a positive multiple of the Euclidean remainder."""
    delta = a.degree() - b.degree()
    lc = abs(b.leading_coefficient())
    _, r = divmod(a * lc ** (delta + 1), b)
    return r


def sturm_sequence(p: flint.fmpz_poly) -> List[flint.fmpz_poly]:
    """Sturm chain p, p', -rem, ... with every element a positive multiple of the
    classical one, so sign variations are unchanged.  Coefficient growth is
    controlled by the subresultant divisors |g| |h|^delta."""
    if p.degree() < 1:
        return [p]
    seq = [p, p.derivative()]
    g = 1
    h = 1
    while seq[-1].degree() > 0:
        a, b = seq[-2], seq[-1]
        delta = a.degree() - b.degree()
        r = -_prem_positive(a, b)
        if r.is_zero():
            break
        beta = g * h ** delta
        r = flint.fmpz_poly([c // beta for c in r.coeffs()])
        seq.append(r)
        g = abs(b.leading_coefficient())
        # h_new = g^delta / h^(delta - 1), exact
        if delta == 0:
            h = h
        else:
            h = g ** delta // h ** (delta - 1)
    return seq


def _sign_at(poly: flint.fmpz_poly, x: Union[Fraction, str]) -> int:
    cs = poly.coeffs()
    if not cs:
        return 0
    if x == POS_INF:
        return _sign(int(cs[-1]))
    if x == NEG_INF:
        return _sign(int(cs[-1])) * (1 if (len(cs) - 1) % 2 == 0 else -1)
    x = Fraction(x)
    v = poly(flint.fmpq(x.numerator, x.denominator))
    return (v > 0) - (v < 0)


def sign_at_rational(coeffs: Sequence[int], x: Fraction) -> int:
    """Exact sign of an integer polynomial at a rational point."""
    return _sign_at(flint.fmpz_poly(list(coeffs)), x)


def count_distinct_exact(p: flint.fmpz_poly, lo=NEG_INF, hi=POS_INF,
                         seq: Optional[List[flint.fmpz_poly]] = None) -> int:
    """Distinct real roots in (lo, hi]."""
    seq = seq or sturm_sequence(p)
    va = _variations([_sign_at(s, lo) for s in seq])
    vb = _variations([_sign_at(s, hi) for s in seq])
    return va - vb


def count_with_multiplicity_exact(p: flint.fmpz_poly, lo=NEG_INF, hi=POS_INF) -> int:
    """Real roots in (lo, hi] counted with multiplicity: n(p) = distinct(p) + n(gcd(p, p'))."""
    total = 0
    while p.degree() >= 1:
        total += count_distinct_exact(p, lo, hi)
        p = p.gcd(p.derivative())
    return total


def is_squarefree(p: flint.fmpz_poly) -> bool:
    return p.gcd(p.derivative()).degree() == 0


# ---------------------------------------------------------------------------
# ball route


@dataclass
class BallSturmResult:
    count: Optional[int]
    prec: int
    length: int
    reason: str = ""


def _ball_sign(x: flint.arb) -> Optional[int]:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return None


def _ball_sign_at(poly: flint.arb_poly, x) -> Optional[int]:
    cs = poly.coeffs()
    if not cs:
        return 0
    if x == POS_INF:
        return _ball_sign(cs[-1])
    if x == NEG_INF:
        s = _ball_sign(cs[-1])
        return None if s is None else s * (1 if (len(cs) - 1) % 2 == 0 else -1)
    x = Fraction(x)
    v = poly(flint.arb(x.numerator) / x.denominator)
    return _ball_sign(v)


def ball_sturm_count(coeffs: Sequence[int], prec: int, points: Sequence = (NEG_INF, POS_INF)) -> BallSturmResult:
    """Distinct real roots between consecutive ``points`` using a Sturm chain in
    ball arithmetic.  Returns count None when some sign cannot be resolved at
    this precision (caller escalates).  Requires a squarefree input, otherwise
    the chain never certifies a zero remainder and the caller must fall back to
    the exact route."""
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        p = flint.arb_poly([flint.arb(int(c)) for c in coeffs])
        seq = [p, p.derivative()]
        while seq[-1].degree() > 0:
            a, b = seq[-2], seq[-1]
            _, r = divmod(a, b)
            # formal remainder length is deg b; its leading ball must exclude zero
            rc = r.coeffs()
            want = b.degree() - 1
            if len(rc) < want + 1:
                rc = rc + [flint.arb(0)] * (want + 1 - len(rc))
            rc = rc[: want + 1]
            if rc and (rc[-1].contains(0)):
                return BallSturmResult(None, prec, len(seq), f"remainder leading ball straddles 0 at degree {want}")
            seq.append(-flint.arb_poly(rc))
        signs = []
        for x in points:
            row = [_ball_sign_at(s, x) for s in seq]
            if any(v is None for v in row):
                return BallSturmResult(None, prec, len(seq), f"sign undetermined at {x}")
            signs.append(_variations(row))
        count = sum(signs[i] - signs[i + 1] for i in range(len(signs) - 1))
        return BallSturmResult(count, prec, len(seq))
    finally:
        flint.ctx.prec = old


def count_distinct(coeffs: Sequence[int], lo=NEG_INF, hi=POS_INF, start_prec: Optional[int] = None,
                   max_prec: int = 1 << 17, exact_degree_limit: int = 48) -> Tuple[int, str, int]:
    """Distinct real roots of a squarefree integer polynomial in (lo, hi].
    Small degrees go to the exact chain; larger ones use escalating ball
    chains and fall back to the exact chain if the balls never resolve.
    Returns (count, method, precision)."""
    deg = len(coeffs) - 1
    p = flint.fmpz_poly(list(coeffs))
    if deg <= exact_degree_limit:
        return count_distinct_exact(p, lo, hi), "sturm-exact", 0
    bits = max(int(c).bit_length() for c in coeffs)
    prec = start_prec or max(256, 12 * deg + 2 * bits // 3)
    while prec <= max_prec:
        res = ball_sturm_count(coeffs, prec, (lo, hi))
        if res.count is not None:
            return res.count, "sturm-ball", prec
        prec *= 2
    return count_distinct_exact(p, lo, hi), "sturm-exact", 0


__all__ = ["BallSturmResult", "NEG_INF", "POS_INF", "ball_sturm_count", "count_distinct",
           "count_distinct_exact", "count_with_multiplicity_exact", "is_squarefree", "sign_at_rational",
           "sturm_sequence"]
