"""Function catalog and Taylor-coefficient engines.

Coefficients follow ``f(z) = sum alpha(n) z^n / n!``.  For an even ``f`` the
even-series coefficients are ``gamma(n) = alpha(2n) * n! / (2n)!`` (the
"jensen" convention) or ``alpha(2n) / (2n)!`` (the "power" convention, the
plain power-series coefficient of ``z^(2n)``).

The X family is cosine with the two positive cosine zeros nearest ``j`` (and
their negatives) moved to ``+-j +- i``::

    X_j(z) = cos(z) * N(z^2) / ((z^2 - a^2)(z^2 - b^2)),
    N(w)   = w^2 - 2(j^2 - 1) w + (j^2 + 1)^2.

Partial fractions give ``X_j = cos + p g_a + q g_b`` with the entire
functions ``g_c(z) = cos(z) / (z^2 - c^2)``.
"""
from __future__ import annotations

import math
import os
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import mpmath
from mpmath import mp, mpf, mpc

from .numerics import (
    DEFAULT_PREC,
    SignedLogReal,
    check_prec,
    factorial_ratio,
)

Value = Union[Fraction, mpf]

MAX_INDEX = 10**7
EXACT_FACTORIAL_LIMIT = 10**4
CONVENTIONS = ("jensen", "power")


# ---------------------------------------------------------------------------
# function identifiers


@dataclass(frozen=True)
class FunctionId:
    """Catalog entry.  ``variant`` is one of cos, sinc, exp, xfamily, xi, dbnxi, user."""

    variant: str
    j: Optional[Fraction] = None
    removed: Optional[Tuple[int, int]] = None
    t: Optional[Fraction] = None
    source: Optional[str] = None

    VARIANTS = ("cos", "sinc", "exp", "xfamily", "xi", "dbnxi", "user")

    def __post_init__(self):
        if self.variant not in self.VARIANTS:
            raise ValueError(f"unknown function variant {self.variant!r}")
        if self.variant == "xfamily":
            if self.j is None or self.j <= 2 * math.pi:
                raise ValueError("xfamily needs j > 2*pi")
            if self.removed is not None:
                ka, kb = self.removed
                if ka % 2 == 0 or kb % 2 == 0 or not 0 < ka < kb:
                    raise ValueError("removed zeros must be distinct positive odd multiples of pi/2")
        if self.variant == "dbnxi" and (self.t is None or self.t <= 0):
            raise ValueError("dbnxi needs t > 0")
        if self.variant == "user" and not self.source:
            raise ValueError("user series needs a source file")

    @classmethod
    def cos(cls) -> "FunctionId":
        return cls("cos")

    @classmethod
    def sinc(cls) -> "FunctionId":
        return cls("sinc")

    @classmethod
    def exp(cls) -> "FunctionId":
        return cls("exp")

    @classmethod
    def xfamily(cls, j, removed: Optional[Tuple[int, int]] = None) -> "FunctionId":
        return cls("xfamily", j=Fraction(j), removed=removed)

    @classmethod
    def xi(cls) -> "FunctionId":
        return cls("xi")

    @classmethod
    def dbnxi(cls, t) -> "FunctionId":
        return cls("dbnxi", t=Fraction(str(t)) if isinstance(t, float) else Fraction(t))

    @classmethod
    def user(cls, source: str) -> "FunctionId":
        return cls("user", source=str(source))

    @classmethod
    def parse(cls, text: str) -> "FunctionId":
        """Parse ``cos``, ``sinc``, ``exp``, ``xi``, ``xfamily:10``, ``xfamily:20:9,11``,
        ``dbnxi:0.2`` or ``user:path``."""
        text = text.strip()
        head, _, rest = text.partition(":")
        head = head.lower()
        if head in ("cos", "sinc", "exp", "xi") and not rest:
            return cls(head)
        if head in ("xfamily", "x"):
            jtxt, _, pair = rest.partition(":")
            removed = None
            if pair:
                ka, kb = (int(s) for s in pair.split(","))
                removed = (ka, kb)
            return cls.xfamily(Fraction(jtxt), removed)
        if head == "dbnxi":
            return cls("dbnxi", t=Fraction(rest))
        if head == "user":
            return cls.user(rest)
        raise ValueError(f"cannot parse function id {text!r}")

    def __str__(self) -> str:
        if self.variant == "xfamily":
            s = f"xfamily:{_frac_str(self.j)}"
            if self.removed is not None:
                s += f":{self.removed[0]},{self.removed[1]}"
            return s
        if self.variant == "dbnxi":
            return f"dbnxi:{_frac_str(self.t)}"
        if self.variant == "user":
            return f"user:{self.source}"
        return self.variant

    @property
    def is_even(self) -> bool:
        if self.variant == "exp":
            return False
        if self.variant == "user":
            return False
        return True


def _frac_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    # terminating decimals print as decimals, others as a/b
    d = q.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        s = f"{float(q):.15g}"
        if Fraction(s) == q:
            return s
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# X family


def nearest_odd_pair(j) -> Tuple[int, int]:
    """Odd k1 < k2 whose k*pi/2 are the two cosine zeros nearest j (ties to the smaller)."""
    jf = float(j)
    k0 = max(1, int(2 * jf / math.pi))
    cands = [k for k in range(max(1, k0 - 6), k0 + 8) if k % 2 == 1]
    with mp.workprec(128):
        jm = mpf(Fraction(j).numerator) / Fraction(j).denominator
        dist = {k: abs(k * mp.pi / 2 - jm) for k in cands}
    best = sorted(cands, key=lambda k: (dist[k], k))[:2]
    return tuple(sorted(best))  # type: ignore[return-value]


@dataclass(frozen=True)
class XFamilyData:
    """Constants of X_j at a working precision."""

    j: Fraction
    ka: int
    kb: int
    prec: int
    a: mpf
    b: mpf
    p: mpf
    q: mpf

    @classmethod
    def build(cls, fid: FunctionId, prec: int = DEFAULT_PREC) -> "XFamilyData":
        if fid.variant != "xfamily":
            raise ValueError("XFamilyData needs an xfamily function id")
        ka, kb = fid.removed if fid.removed is not None else nearest_odd_pair(fid.j)
        with mp.workprec(prec):
            j = mpf(fid.j.numerator) / fid.j.denominator
            a = ka * mp.pi / 2
            b = kb * mp.pi / 2
            a2, b2 = a * a, b * b
            p = _numer_w(j, a2) / (a2 - b2)
            q = _numer_w(j, b2) / (b2 - a2)
        return cls(fid.j, ka, kb, prec, a, b, p, q)

    @property
    def removed(self) -> Tuple[mpf, mpf]:
        return self.a, self.b

    def planted_zeros(self) -> List[mpc]:
        with mp.workprec(self.prec):
            j = mpf(self.j.numerator) / self.j.denominator
            return [mpc(j, 1), mpc(j, -1), mpc(-j, 1), mpc(-j, -1)]

    def retained_positive_zeros(self, below) -> List[mpf]:
        """Positive real zeros (odd multiples of pi/2, minus the removed pair) below ``below``."""
        out = []
        k = 1
        with mp.workprec(self.prec):
            while k * mp.pi / 2 < below:
                if k not in (self.ka, self.kb):
                    out.append(k * mp.pi / 2)
                k += 2
        return out


def _numer_w(j, w):
    return w * w - 2 * (j * j - 1) * w + (j * j + 1) ** 2


def _g_tail(c2: mpf, k: int, tol: mpf) -> mpf:
    """alpha_g(k) for g = cos z / (z^2 - c^2), k even, from the convergent tail series."""
    m = k // 2
    term = mpf(1) / ((2 * m + 1) * (2 * m + 2))
    if m % 2 == 0:
        term = -term
    s = mpf(0)
    i = m + 1
    while True:
        s += term
        if abs(term) <= tol * max(abs(s), tol):
            return s
        term = term * (-c2) / ((2 * i + 1) * (2 * i + 2))
        i += 1


def _xfamily_alpha(data: XFamilyData, lo: int, hi: int, prec: int) -> Dict[int, Tuple[mpf, mpf]]:
    """alpha(n), lo <= n <= hi, by the tail series at the top even index and the
    damped downward recurrence alpha_g(k-2) = (alpha_cos(k) + c^2 alpha_g(k)) / (k(k-1))."""
    b = float(data.b)
    guard = int(b * 1.4427) + 40 + max(1, hi).bit_length()
    wp = prec + guard
    out: Dict[int, Tuple[mpf, mpf]] = {}
    top = hi - (hi % 2)
    if top < lo:
        for n in range(lo, hi + 1):
            out[n] = (mpf(0), mpf(0))
        return out
    start = max(lo - (lo % 2), 0)
    with mp.workprec(wp):
        fam = XFamilyData.build(FunctionId.xfamily(data.j, (data.ka, data.kb)), wp)
        a2, b2 = fam.a ** 2, fam.b ** 2
        tol = mpf(2) ** (-wp - 8)
        ga = _g_tail(a2, top, tol)
        gb = _g_tail(b2, top, tol)
        scale = 1 + abs(fam.p) + abs(fam.q)
        vals = {}
        k = top
        while True:
            cos_k = 1 if (k // 2) % 2 == 0 else -1
            vals[k] = cos_k + fam.p * ga + fam.q * gb
            if k <= start:
                break
            ga = (cos_k + a2 * ga) / (k * (k - 1))
            gb = (cos_k + b2 * gb) / (k * (k - 1))
            k -= 2
        unit = mpf(2) ** (-wp)
    with mp.workprec(prec):
        for n in range(lo, hi + 1):
            if n % 2:
                out[n] = (mpf(0), mpf(0))
                continue
            v = +vals[n]
            steps = (top - n) // 2 + 4
            err = abs(v) * mpf(2) ** (-prec) + unit * scale * steps * 16
            out[n] = (v, err)
    return out


# ---------------------------------------------------------------------------
# coefficient series


@dataclass(frozen=True)
class CoeffSeries:
    """A contiguous run of coefficients with per-entry absolute error bounds.

    When ``scale`` is set, the true coefficient is ``scale * entries[n][0]`` and
    the stored error bound is in the same scaled units.  Deep shifts use this so
    the stored numbers stay O(1).
    """

    function: FunctionId
    kind: str  # "alpha" | "gamma"
    entries: Dict[int, Tuple[Value, mpf]]
    method: str
    prec: int
    convention: str = "jensen"
    scale: Optional[SignedLogReal] = None
    meta: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("alpha", "gamma"):
            raise ValueError("kind must be alpha or gamma")
        if self.entries:
            idx = sorted(self.entries)
            if idx != list(range(idx[0], idx[-1] + 1)):
                raise ValueError("coefficient indices must be contiguous")

    @property
    def lo(self) -> int:
        return min(self.entries)

    @property
    def hi(self) -> int:
        return max(self.entries)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v, _ in self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, n: int) -> bool:
        return n in self.entries

    def covers(self, lo: int, hi: int) -> bool:
        return bool(self.entries) and self.lo <= lo and hi <= self.hi

    def raw(self, n: int) -> Value:
        """Stored entry (relative to ``scale`` if one is set)."""
        return self.entries[n][0]

    def error(self, n: int) -> mpf:
        return self.entries[n][1]

    def value(self, n: int, prec: Optional[int] = None):
        """True coefficient: Fraction when exact and unscaled, else mpf."""
        v = self.entries[n][0]
        if self.scale is None:
            return v
        prec = prec or self.prec
        with mp.workprec(prec):
            s = self.scale.to_mpf(prec)
            return s * (mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else v)

    def slr(self, n: int) -> SignedLogReal:
        v = self.entries[n][0]
        base = SignedLogReal.from_value(v, self.prec)
        return base if self.scale is None else base * self.scale

    def slice(self, lo: int, hi: int) -> "CoeffSeries":
        if not self.covers(lo, hi):
            raise IndexError(f"series covers {self.lo}..{self.hi}, not {lo}..{hi}")
        return CoeffSeries(self.function, self.kind, {n: self.entries[n] for n in range(lo, hi + 1)},
                           self.method, self.prec, self.convention, self.scale, dict(self.meta))


def _closed_form_alpha(fid: FunctionId, n: int) -> Fraction:
    if fid.variant == "exp":
        return Fraction(1)
    if n % 2:
        return Fraction(0)
    sgn = 1 if (n // 2) % 2 == 0 else -1
    if fid.variant == "cos":
        return Fraction(sgn)
    if fid.variant == "sinc":
        return Fraction(sgn, n + 1)
    raise ValueError(f"no closed form for {fid}")


def coeff_alpha(function: Union[FunctionId, str], lo: int, hi: int,
                prec: int = DEFAULT_PREC) -> CoeffSeries:
    """Taylor coefficients alpha(n) for lo <= n <= hi."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    check_prec(prec)
    if not 0 <= lo <= hi:
        raise ValueError(f"bad index range {lo}..{hi}")
    if fid.variant in ("cos", "sinc", "exp"):
        entries = {n: (_closed_form_alpha(fid, n), mpf(0)) for n in range(lo, hi + 1)}
        return CoeffSeries(fid, "alpha", entries, "analytic-recurrence", prec)
    if fid.variant == "xfamily":
        if hi > MAX_INDEX:
            raise ValueError(f"index {hi} beyond the recurrence limit {MAX_INDEX}")
        data = XFamilyData.build(fid, prec)
        entries = _xfamily_alpha(data, lo, hi, prec)
        return CoeffSeries(fid, "alpha", entries, "analytic-recurrence", prec,
                           meta={"removed": f"{data.ka},{data.kb}"})
    if fid.variant == "user":
        series = read_cache(fid.source)
        if series.kind != "alpha":
            raise ValueError("user series file does not hold alpha coefficients")
        if not series.covers(lo, hi):
            raise ValueError(f"user series covers {series.lo}..{series.hi}, not {lo}..{hi}")
        s = series.slice(lo, hi)
        return CoeffSeries(fid, "alpha", s.entries, "file", s.prec, s.convention, s.scale)
    raise ValueError(f"{fid} has no analytic alpha engine (use the xi module)")


def _gamma_factor_log10(n: int, convention: str, wp: int) -> mpf:
    with mp.workprec(wp):
        lg = -mpmath.loggamma(2 * n + 1)
        if convention == "jensen":
            lg += mpmath.loggamma(n + 1)
        return lg / mpmath.ln(10)


def _gamma_factor_ratio(n: int, n0: int, convention: str) -> Fraction:
    """factor(n) / factor(n0) exactly, factor = n!/(2n)! or 1/(2n)!."""
    r = factorial_ratio(2 * n0, 2 * n)
    if convention == "jensen":
        r *= factorial_ratio(n, n0)
    return r


def alpha_to_gamma(series: CoeffSeries, convention: str = "jensen",
                   lo: Optional[int] = None, hi: Optional[int] = None) -> CoeffSeries:
    """Even-series coefficients gamma(n) from alpha(2n).

    Shifts beyond the exact-factorial limit are returned with a signed-log
    ``scale`` equal to the factorial factor at the first index, so the entries
    are exact factorial ratios times alpha.
    """
    if series.kind != "alpha":
        raise ValueError("alpha_to_gamma needs an alpha series")
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    if series.scale is not None:
        raise ValueError("alpha series with a scale factor is not supported")
    for n, (v, e) in series.entries.items():
        if n % 2 and (v != 0 or e != 0):
            raise ValueError(f"nonzero odd coefficient alpha({n}): function is not even")
    glo = (series.lo + 1) // 2 if lo is None else lo
    ghi = series.hi // 2 if hi is None else hi
    if glo > ghi:
        raise ValueError("series holds no even index")
    for n in range(glo, ghi + 1):
        if 2 * n not in series.entries:
            raise ValueError(f"missing even index {2 * n}")
    prec = series.prec
    entries: Dict[int, Tuple[Value, mpf]] = {}
    scale = None
    if ghi <= EXACT_FACTORIAL_LIMIT:
        for n in range(glo, ghi + 1):
            v, e = series.entries[2 * n]
            f = _gamma_factor_ratio(n, 0, convention)
            if isinstance(v, Fraction):
                entries[n] = (v * f, mpf(0))
            else:
                with mp.workprec(prec):
                    ff = mpf(f.numerator) / f.denominator
                    entries[n] = (v * ff, e * ff)
    else:
        wp = prec + 32 + (2 * ghi).bit_length()
        scale = SignedLogReal.from_log10(1, _gamma_factor_log10(glo, convention, wp), prec)
        for n in range(glo, ghi + 1):
            v, e = series.entries[2 * n]
            f = _gamma_factor_ratio(n, glo, convention)
            if isinstance(v, Fraction):
                entries[n] = (v * f, mpf(0))
            else:
                with mp.workprec(prec):
                    ff = mpf(f.numerator) / f.denominator
                    entries[n] = (v * ff, e * ff)
    method = series.method
    return CoeffSeries(series.function, "gamma", entries, method, prec, convention, scale,
                       dict(series.meta))


def gamma_series(function: Union[FunctionId, str], lo: int, hi: int, prec: int = DEFAULT_PREC,
                 convention: str = "jensen") -> CoeffSeries:
    """gamma(lo..hi) of an even catalog function with an analytic alpha engine."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    alpha = coeff_alpha(fid, 2 * lo, 2 * hi, prec)
    return alpha_to_gamma(alpha, convention)


def constant_gamma(lo: int, hi: int) -> CoeffSeries:
    """gamma(n) = 1: the even series of exp(z^2) under the jensen convention."""
    return CoeffSeries(FunctionId.user("const-one"), "gamma",
                       {n: (Fraction(1), mpf(0)) for n in range(lo, hi + 1)}, "analytic-recurrence",
                       DEFAULT_PREC)


# ---------------------------------------------------------------------------
# point evaluation

_NEAR = mpf("0.01")


def _g_near(c: mpf, k: int, z):
    # g_c(z) for z near c where cos(c) = 0: cos(c+h) = -sin(c) sin(h)
    h = z - c
    sin_c = -1 if (k // 2) % 2 else 1
    sinc_h = mpmath.sinc(h) if h != 0 else mpf(1)
    return -sin_c * sinc_h / (z + c)


def _g(c: mpf, k: int, z):
    if abs(z - c) < _NEAR:
        return _g_near(c, k, z)
    if abs(z + c) < _NEAR:
        return _g_near(c, k, -z)
    return mpmath.cos(z) / (z * z - c * c)


def make_evaluator(function: Union[FunctionId, str], prec: int = DEFAULT_PREC):
    """Closure ``z -> f(z)`` with constants precomputed, computing at ``prec + 16`` bits
    and returning values rounded to ``prec`` bits."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    check_prec(prec)
    wp = prec + 16

    if fid.variant == "cos":
        raw = mpmath.cos
    elif fid.variant == "sinc":
        raw = mpmath.sinc
    elif fid.variant == "exp":
        raw = mpmath.exp
    elif fid.variant == "xfamily":
        data = XFamilyData.build(fid, wp)
        with mp.workprec(wp):
            a, b = data.a, data.b
            a2, b2 = a * a, b * b
            j = mpf(fid.j.numerator) / fid.j.denominator

        def raw(z):
            near = min(abs(z - a), abs(z + a), abs(z - b), abs(z + b))
            if near < _NEAR:
                return mpmath.cos(z) + data.p * _g(a, data.ka, z) + data.q * _g(b, data.kb, z)
            w = z * z
            return mpmath.cos(z) * _numer_w(j, w) / ((w - a2) * (w - b2))
    elif fid.variant == "user":
        s = read_cache(fid.source)
        if s.lo != 0:
            raise ValueError("user series evaluation needs coefficients from index 0")
        with mp.workprec(wp):
            coeffs = []
            for n in sorted(s.entries, reverse=True):
                c = s.value(n, wp)
                c = mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else c
                coeffs.append(c / mpmath.factorial(n))

        def raw(z):
            v = mpf(0)
            for c in coeffs:
                v = v * z + c
            return v
    elif fid.variant in ("xi", "dbnxi"):
        from . import xi as _xi
        return _xi.make_evaluator(fid, prec)
    else:
        raise ValueError(f"no evaluator for {fid}")

    def f(z):
        with mp.workprec(wp):
            v = raw(mpmath.mpmathify(z))
        with mp.workprec(prec):
            return +v

    return f


def evaluate(function: Union[FunctionId, str], z, prec: int = DEFAULT_PREC):
    """Value of a catalog function at complex ``z``."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    if fid.variant in ("xi", "dbnxi"):
        raise ValueError(f"evaluate does not cover {fid}; use the xi module")
    return make_evaluator(fid, prec)(z)


def max_modulus_bound(function: Union[FunctionId, str], radius, prec: int = 64) -> mpf:
    """Upper bound for |f| on the circle |z| = radius."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    with mp.workprec(prec + 16):
        R = mpf(radius)
        if fid.variant in ("cos", "exp"):
            return mpmath.exp(R)
        if fid.variant == "sinc":
            return mpmath.cosh(R) / R if R > 1 else mpmath.cosh(R)
        if fid.variant == "xfamily":
            data = XFamilyData.build(fid, prec + 16)
            j = mpf(fid.j.numerator) / fid.j.denominator
            jc = j * j + 1
            den = abs(R * R - data.a ** 2) * abs(R * R - data.b ** 2)
            if den < (R * R) * mpf("1e-6"):
                raise ValueError("radius too close to a removed zero for the modulus bound")
            return mpmath.cosh(R) * (R * R + jc) ** 2 / den
        if fid.variant == "user":
            s = read_cache(fid.source)
            tot = mpf(0)
            for n in s.entries:
                c = s.value(n, prec)
                c = mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else c
                tot += (abs(c) + s.error(n)) * R ** n / mpmath.factorial(n)
            return tot
    raise ValueError(f"no modulus bound for {fid}")


# ---------------------------------------------------------------------------
# cache file format

_CACHE_MAGIC = "# jensenlab coefficient cache v1"


def _created_stamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch is not None else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def _mpf_text(x, prec: int) -> str:
    """Decimal text that parses back to the identical binary value at ``prec`` bits.
    Accepts an mpf or a raw mpf tuple; nothing is rounded to the ambient precision."""
    raw = x if isinstance(x, tuple) else x._mpf_
    if raw == mpmath.libmp.fzero:
        return "0"
    dps = mpmath.libmp.libmpf.prec_to_dps(prec) + 3
    return mpmath.libmp.to_str(raw, dps)


def _value_text(v: Value, prec: int) -> Tuple[str, str]:
    if isinstance(v, Fraction):
        sign = "+" if v > 0 else "-" if v < 0 else "0"
        return sign, f"{abs(v.numerator)}/{v.denominator}"
    sign = "+" if v > 0 else "-" if v < 0 else "0"
    return sign, _mpf_text(mpmath.libmp.mpf_abs(v._mpf_), prec)


def _parse_value(sign: str, text: str, prec: int) -> Value:
    if "/" in text:
        num, den = text.split("/")
        q = Fraction(int(num), int(den))
        return -q if sign == "-" else q
    with mp.workprec(prec):
        x = mpf(text)
    return -x if sign == "-" else x


def series_to_text(series: CoeffSeries) -> str:
    lines = [_CACHE_MAGIC,
             f"# function: {series.function}",
             f"# kind: {series.kind}",
             f"# method: {series.method}",
             f"# precision_bits: {series.prec}",
             f"# convention: {series.convention}"]
    if series.scale is not None:
        lines.append(f"# scale: {series.scale.to_decimal()}")
    for k in sorted(series.meta):
        lines.append(f"# meta.{k}: {series.meta[k]}")
    lines.append(f"# created: {_created_stamp()}")
    lines.append("n\tsign\tvalue\terror_bound")
    for n in sorted(series.entries):
        v, e = series.entries[n]
        sign, txt = _value_text(v, series.prec)
        with mp.workprec(max(series.prec, 64)):
            e = +mpf(e) if not isinstance(e, mpf) else e
        lines.append(f"{n}\t{sign}\t{txt}\t{_mpf_text(e, series.prec)}")
    return "\n".join(lines) + "\n"


def write_cache(series: CoeffSeries, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(series_to_text(series))
    return path


_HEADER_RE = re.compile(r"#\s*([\w.]+):\s*(.*)")


def series_from_text(text: str, source: Optional[str] = None) -> CoeffSeries:
    header: Dict[str, str] = {}
    entries: Dict[int, Tuple[Value, mpf]] = {}
    lines = text.splitlines()
    if not lines or lines[0].strip() != _CACHE_MAGIC:
        raise ValueError("not a coefficient cache file")
    prec = DEFAULT_PREC
    for line in lines[1:]:
        if not line.strip():
            continue
        if line.startswith("#"):
            m = _HEADER_RE.match(line)
            if m:
                header[m.group(1)] = m.group(2).strip()
                if m.group(1) == "precision_bits":
                    prec = int(m.group(2))
            continue
        if line.startswith("n\t"):
            continue
        parts = line.split("\t")
        if len(parts) == 3:
            parts.append("0")
        n, sign, txt, err = parts
        with mp.workprec(prec):
            entries[int(n)] = (_parse_value(sign, txt, prec), mpf(err))
    fid_text = header.get("function", f"user:{source}" if source else "user:unknown")
    fid = FunctionId.parse(fid_text)
    scale = SignedLogReal.parse(header["scale"], prec) if "scale" in header else None
    meta = {k[5:]: v for k, v in header.items() if k.startswith("meta.")}
    return CoeffSeries(fid, header.get("kind", "alpha"), entries, header.get("method", "file"),
                       prec, header.get("convention", "jensen"), scale, meta)


def read_cache(path: Union[str, Path]) -> CoeffSeries:
    return series_from_text(Path(path).read_text(), str(path))


def series_from_values(values: Iterable, kind: str = "alpha", prec: int = DEFAULT_PREC,
                       start: int = 0, source: str = "inline") -> CoeffSeries:
    """Wrap a list of exact or mpf coefficients as a user series starting at ``start``."""
    entries = {}
    for i, v in enumerate(values):
        if isinstance(v, (int, Fraction)):
            entries[start + i] = (Fraction(v), mpf(0))
        else:
            entries[start + i] = (mpf(v), mpf(0))
    return CoeffSeries(FunctionId.user(source), kind, entries, "file", prec)


__all__ = [
    "CONVENTIONS", "CoeffSeries", "FunctionId", "XFamilyData", "alpha_to_gamma", "coeff_alpha",
    "constant_gamma", "evaluate", "gamma_series", "make_evaluator", "max_modulus_bound", "nearest_odd_pair",
    "read_cache", "series_from_text", "series_from_values", "series_to_text", "write_cache",
]
