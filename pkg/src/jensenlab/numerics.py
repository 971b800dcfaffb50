"""Precision substrate: working-precision reals, exact rationals, signed-log values.

Real numbers at working precision are plain ``mpmath.mpf`` values computed
under ``mpmath.workprec``; exact rationals are ``fractions.Fraction``.  The
one type defined here is :class:`SignedLogReal`, a sign plus a base-10
log-magnitude, for quantities such as 10^516790 that no fixed exponent range
can hold comfortably (mpmath can, but sums of them still need the
factor-out-the-largest treatment of :func:`slr_linear_combine`).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence, Union

import mpmath
from mpmath import mp, mpf

DEFAULT_PREC = 128
MIN_PREC = 64

ExactRational = Fraction
Number = Union[int, Fraction, mpf]


class PrecisionError(ValueError):
    """Requested precision is below the supported floor."""


class PrecisionExhausted(ArithmeticError):
    """Cancellation or non-convergence consumed the precision budget."""


def check_prec(prec: int) -> int:
    prec = int(prec)
    if prec < MIN_PREC:
        raise PrecisionError(f"precision {prec} bits is below the floor of {MIN_PREC}")
    return prec


def big(x, prec: int = DEFAULT_PREC) -> mpf:
    """Round ``x`` (int, Fraction, str, float, mpf) to an mpf at ``prec`` bits."""
    with mp.workprec(check_prec(prec)):
        if isinstance(x, Fraction):
            return mpf(x.numerator) / x.denominator
        return +mpf(x)


def _guard_bits(log10_mag) -> int:
    # extra bits so that a log magnitude of size L still carries prec relative bits
    return 16 + max(1, int(abs(log10_mag)) + 1).bit_length()


def _log10_abs_int(n: int, wp: int) -> mpf:
    with mp.workprec(wp):
        return mpmath.log10(mpf(abs(n)))


def log10_factorial(n: int, prec: int = DEFAULT_PREC) -> mpf:
    """log10(n!) at ``prec`` relative bits (via log-Gamma)."""
    wp = prec + _guard_bits(n * math.log10(n + 1) + 1)
    with mp.workprec(wp):
        return mpmath.loggamma(n + 1) / mpmath.ln(10)


def factorial_ratio(num: int, den: int) -> Fraction:
    """Exact num!/den! for nearby arguments (product of |num - den| factors)."""
    if num >= den:
        return Fraction(math.prod(range(den + 1, num + 1)))
    return Fraction(1, math.prod(range(num + 1, den + 1)))


@dataclass(frozen=True)
class SignedLogReal:
    """A real number stored as ``sign * 10**log10_mag``.

    ``rel_err`` is a relative error bound; ``digits_lost`` records the decimal
    digits consumed by cancellation in the operation that produced the value.
    """

    sign: int
    log10_mag: mpf | None
    prec: int = DEFAULT_PREC
    rel_err: mpf = field(default=mpf(0), compare=False)
    digits_lost: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0 and self.log10_mag is not None:
            object.__setattr__(self, "log10_mag", None)
        if self.sign != 0 and self.log10_mag is None:
            raise ValueError("nonzero SignedLogReal needs a log10 magnitude")

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, prec: int = DEFAULT_PREC) -> "SignedLogReal":
        return cls(0, None, prec)

    @classmethod
    def one(cls, prec: int = DEFAULT_PREC) -> "SignedLogReal":
        return cls(1, mpf(0), prec)

    @classmethod
    def from_value(cls, x, prec: int = DEFAULT_PREC, rel_err=0) -> "SignedLogReal":
        check_prec(prec)
        if isinstance(x, Fraction):
            return cls.from_fraction(x, prec)
        if isinstance(x, int):
            return cls.from_fraction(Fraction(x), prec)
        x = mpf(x) if not isinstance(x, mpf) else x
        if x == 0:
            return cls.zero(prec)
        exp2 = int(x.exp) + int(x.bc) if x.exp is not None else 0
        wp = prec + _guard_bits(exp2 * 0.30103)
        with mp.workprec(wp):
            lm = mpmath.log10(abs(x))
        return cls(1 if x > 0 else -1, lm, prec, mpf(rel_err))

    @classmethod
    def from_fraction(cls, q: Fraction, prec: int = DEFAULT_PREC) -> "SignedLogReal":
        check_prec(prec)
        q = Fraction(q)
        if q == 0:
            return cls.zero(prec)
        bits = max(q.numerator.bit_length(), q.denominator.bit_length())
        wp = prec + _guard_bits(bits * 0.30103)
        with mp.workprec(wp):
            lm = _log10_abs_int(q.numerator, wp) - _log10_abs_int(q.denominator, wp)
        return cls(1 if q > 0 else -1, lm, prec)

    @classmethod
    def from_log10(cls, sign: int, log10_mag, prec: int = DEFAULT_PREC, rel_err=0) -> "SignedLogReal":
        if sign == 0:
            return cls.zero(prec)
        wp = prec + _guard_bits(log10_mag)
        with mp.workprec(wp):
            return cls(sign, +mpf(log10_mag), prec, mpf(rel_err))

    # conversion -------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def exhausted(self) -> bool:
        """True when cancellation consumed more than half of the working bits."""
        return self.digits_lost * math.log2(10) > self.prec / 2

    def to_mpf(self, prec: int | None = None) -> mpf:
        prec = self.prec if prec is None else prec
        if self.sign == 0:
            return mpf(0)
        wp = prec + _guard_bits(self.log10_mag)
        with mp.workprec(wp):
            v = mpmath.power(10, self.log10_mag)
        with mp.workprec(prec):
            return self.sign * (+v)

    def with_prec(self, prec: int) -> "SignedLogReal":
        return replace(self, prec=prec)

    # arithmetic -------------------------------------------------------
    def __neg__(self) -> "SignedLogReal":
        return replace(self, sign=-self.sign)

    def __abs__(self) -> "SignedLogReal":
        return replace(self, sign=abs(self.sign))

    def _coerce(self, other) -> "SignedLogReal":
        if isinstance(other, SignedLogReal):
            return other
        return SignedLogReal.from_value(other, self.prec)

    def __mul__(self, other) -> "SignedLogReal":
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        if self.sign == 0 or other.sign == 0:
            return SignedLogReal.zero(prec)
        lm = self.log10_mag + other.log10_mag
        wp = prec + _guard_bits(lm)
        with mp.workprec(wp):
            lm = self.log10_mag + other.log10_mag
        return SignedLogReal(self.sign * other.sign, lm, prec, self.rel_err + other.rel_err)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SignedLogReal":
        other = self._coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLogReal")
        return self * SignedLogReal(other.sign, -other.log10_mag, other.prec, other.rel_err)

    def __rtruediv__(self, other) -> "SignedLogReal":
        return self._coerce(other) / self

    def __pow__(self, k: int) -> "SignedLogReal":
        if self.sign == 0:
            return self if k > 0 else SignedLogReal.one(self.prec)
        wp = self.prec + _guard_bits(self.log10_mag * k)
        with mp.workprec(wp):
            lm = self.log10_mag * k
        return SignedLogReal(self.sign ** (k % 2) if self.sign < 0 else 1, lm, self.prec,
                             self.rel_err * abs(k))

    def root(self, k: int) -> "SignedLogReal":
        """Positive real k-th root of a positive value."""
        if self.sign < 0:
            raise ValueError("real root of a negative SignedLogReal")
        if self.sign == 0:
            return self
        wp = self.prec + _guard_bits(self.log10_mag)
        with mp.workprec(wp):
            lm = self.log10_mag / k
        return SignedLogReal(1, lm, self.prec, self.rel_err / k)

    def ratio(self, other: "SignedLogReal", prec: int | None = None) -> mpf:
        """self/other as an mpf, for values whose quotient is of moderate size."""
        q = self / other
        return q.to_mpf(prec or min(self.prec, other.prec))

    # serialization ----------------------------------------------------
    def digits(self) -> int:
        """Round-trip-exact significant digits for this precision."""
        return int(math.ceil(self.prec * math.log10(2))) + 1

    def to_decimal(self, digits: int | None = None) -> str:
        if self.sign == 0:
            return "0"
        digits = digits or self.digits()
        wp = int(digits * 3.33) + 16 + _guard_bits(self.log10_mag)
        with mp.workprec(wp):
            e = int(mpmath.floor(self.log10_mag))
            mant = mpmath.power(10, self.log10_mag - e)
            s = mpmath.nstr(mant, digits, strip_zeros=False, min_fixed=-1, max_fixed=2)
        if s.startswith("10"):
            e += 1
            with mp.workprec(wp):
                s = mpmath.nstr(mpmath.power(10, self.log10_mag - e), digits,
                                strip_zeros=False, min_fixed=-1, max_fixed=2)
        sign = "+" if self.sign > 0 else "-"
        return f"{sign}{s}e{e}"

    __str__ = to_decimal

    @classmethod
    def parse(cls, text: str, prec: int = DEFAULT_PREC) -> "SignedLogReal":
        """Inverse of :meth:`to_decimal`; accepts any sign/mantissa/exponent string."""
        text = text.strip().replace(" ", "")
        if text in ("0", "+0", "-0"):
            return cls.zero(prec)
        m = _DECIMAL_RE.fullmatch(text)
        if not m:
            raise ValueError(f"not a decimal number: {text!r}")
        sign = -1 if m.group("sign") == "-" else 1
        mant = m.group("mant")
        exp = int(m.group("exp") or 0)
        wp = prec + _guard_bits(exp) + int(len(mant) * 3.33)
        with mp.workprec(wp):
            mv = mpf(mant)
            if mv == 0:
                return cls.zero(prec)
            lm = mpmath.log10(mv) + exp
        return cls(sign, lm, prec)


_DECIMAL_RE = re.compile(r"(?P<sign>[+-]?)(?P<mant>\d+(?:\.\d*)?|\.\d+)(?:[eE](?P<exp>[+-]?\d+))?")


def _coef_log10(c, wp: int) -> tuple[int, mpf | None]:
    if isinstance(c, SignedLogReal):
        return c.sign, c.log10_mag
    if isinstance(c, (int, Fraction)):
        c = Fraction(c)
        if c == 0:
            return 0, None
        with mp.workprec(wp):
            return (1 if c > 0 else -1), (_log10_abs_int(c.numerator, wp)
                                          - _log10_abs_int(c.denominator, wp))
    c = mpf(c)
    if c == 0:
        return 0, None
    with mp.workprec(wp):
        return (1 if c > 0 else -1), mpmath.log10(abs(c))


def slr_linear_combine(terms: Sequence[tuple[Number, SignedLogReal]],
                       prec: int | None = None) -> SignedLogReal:
    """Signed-log value of ``sum(c * v for c, v in terms)``.

    The largest term magnitude is factored out and the scaled residuals are
    summed at ``prec`` (plus guard) bits.  The result carries a relative
    error bound and the number of decimal digits lost to cancellation; when
    more than half the bits are gone the result reports ``exhausted``.
    """
    if not terms:
        raise ValueError("slr_linear_combine needs at least one term")
    if prec is None:
        prec = min(v.prec for _, v in terms)
    check_prec(prec)
    mags = [v.log10_mag for _, v in terms if v.sign != 0]
    top = max((abs(m) for m in mags), default=mpf(0))
    wp = prec + _guard_bits(top) + 8
    scaled = []
    in_err = mpf(0)
    with mp.workprec(wp):
        for c, v in terms:
            cs, cl = _coef_log10(c, wp)
            if cs == 0 or v.sign == 0:
                continue
            if v.log10_mag is None:
                raise ValueError("nonzero value without a log magnitude")
            scaled.append((cs * v.sign, cl + v.log10_mag))
            in_err = max(in_err, v.rel_err)
        if not scaled:
            return SignedLogReal.zero(prec)
        big_l = max(l for _, l in scaled)
        total = mpf(0)
        abs_total = mpf(0)
        for s, l in scaled:
            t = mpmath.power(10, l - big_l)
            total += s * t
            abs_total += t
        n = len(scaled)
        if total == 0:
            return SignedLogReal(0, None, prec, mpf(0), prec * math.log10(2))
        cancel = abs_total / abs(total)
        lost = float(mpmath.log10(cancel))
        lm = big_l + mpmath.log10(abs(total))
        rel = cancel * (n * mpf(2) ** (3 - prec) + in_err)
    return SignedLogReal(1 if total > 0 else -1, lm, prec, +rel, max(lost, 0.0))


def to_fraction(x, bits: int) -> Fraction:
    """Dyadic rational snapshot of ``x`` rounded to ``bits`` fractional bits."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if not isinstance(x, mpf):
        with mp.workprec(max(bits, 64) + 64):
            x = mpmath.mpmathify(x)
    return Fraction(int(mpmath.libmp.to_int(mpmath.libmp.mpf_shift(x._mpf_, bits), mpmath.libmp.round_nearest)), 2 ** bits)


def mpf_from_any(x, prec: int) -> mpf:
    if isinstance(x, SignedLogReal):
        return x.to_mpf(prec)
    return big(x, prec)


def decimal_of(x, prec: int) -> str:
    """Round-trip decimal string of a real at ``prec`` bits."""
    return SignedLogReal.from_value(x, prec).to_decimal()


__all__ = [
    "DEFAULT_PREC", "MIN_PREC", "ExactRational", "SignedLogReal", "PrecisionError",
    "PrecisionExhausted", "big", "check_prec", "decimal_of", "factorial_ratio",
    "log10_factorial", "mpf_from_any", "slr_linear_combine", "to_fraction",
]

