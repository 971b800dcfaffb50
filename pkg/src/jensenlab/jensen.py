"""Jensen polynomials, Hermite polynomials, Hermite normalization and
convergence diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import mpmath
from mpmath import mp, mpf

from .numerics import DEFAULT_PREC, SignedLogReal
from .series import (
    CoeffSeries,
    FunctionId,
    coeff_alpha,
    gamma_series,
)

Value = Union[Fraction, mpf]
FLAVORS = ("classical", "even", "osullivan", "taylor")


class NormalizationUndefined(ValueError):
    """The three Hermite pins cannot be met (vanishing shifted constant term,
    nonpositive radicand, odd degree, ...)."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ---------------------------------------------------------------------------
# polynomial container


def _as_mpf(v: Value) -> mpf:
    if isinstance(v, Fraction):
        return mpf(v.numerator) / v.denominator
    return mpf(v)


@dataclass(frozen=True)
class RealPolynomial:
    """Dense polynomial sum c_k x^k.  Coefficients are all Fractions (exact)
    or all mpf with absolute error bounds.  If ``scale`` is set the
    represented polynomial is ``scale * sum c_k x^k``."""

    coeffs: Tuple[Value, ...]
    errors: Optional[Tuple[mpf, ...]] = None
    scale: Optional[SignedLogReal] = None
    prec: int = DEFAULT_PREC
    label: str = ""

    def __post_init__(self):
        cs = tuple(self.coeffs)
        if not cs:
            cs = (Fraction(0),)
        exact = all(isinstance(c, (int, Fraction)) for c in cs)
        if exact:
            cs = tuple(Fraction(c) for c in cs)
            if self.errors is not None and any(e != 0 for e in self.errors):
                raise ValueError("exact coefficients cannot carry error bounds")
            object.__setattr__(self, "errors", None)
        else:
            with mp.workprec(self.prec + 64):
                cs = tuple(_as_mpf(c) for c in cs)
            errs = self.errors if self.errors is not None else tuple(mpf(0) for _ in cs)
            if len(errs) != len(cs):
                raise ValueError("one error bound per coefficient")
            object.__setattr__(self, "errors", tuple(mpf(e) for e in errs))
        object.__setattr__(self, "coeffs", cs)

    # structure ---------------------------------------------------------
    @classmethod
    def from_roots(cls, roots: Sequence[Fraction], lead: Fraction = Fraction(1)) -> "RealPolynomial":
        c = [Fraction(lead)]
        for r in roots:
            r = Fraction(r)
            nxt = [Fraction(0)] * (len(c) + 1)
            for k, ck in enumerate(c):
                nxt[k + 1] += ck
                nxt[k] -= r * ck
            c = nxt
        return cls(tuple(c))

    @property
    def is_exact(self) -> bool:
        return self.errors is None

    @property
    def formal_degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k] != 0:
                return k
        return -1

    @property
    def degenerate(self) -> bool:
        """Formal leading coefficient vanishes."""
        return self.coeffs[-1] == 0

    @property
    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def trimmed(self) -> "RealPolynomial":
        d = max(self.degree, 0)
        errs = None if self.errors is None else self.errors[: d + 1]
        return RealPolynomial(self.coeffs[: d + 1], errs, self.scale, self.prec, self.label)

    def derivative(self) -> "RealPolynomial":
        cs = tuple(k * c for k, c in enumerate(self.coeffs))[1:]
        errs = None if self.errors is None else tuple(k * e for k, e in enumerate(self.errors))[1:]
        return RealPolynomial(cs or (Fraction(0),), errs, self.scale, self.prec, self.label + "'")

    def __mul__(self, other: "RealPolynomial") -> "RealPolynomial":
        if not (self.is_exact and other.is_exact):
            raise ValueError("polynomial product is only provided for exact coefficients")
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RealPolynomial(tuple(out))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RealPolynomial):
            return NotImplemented
        a, b = self.trimmed(), other.trimmed()
        return a.coeffs == b.coeffs and a.errors == b.errors and a.scale == b.scale

    def __hash__(self):
        return hash(self.trimmed().coeffs)

    def evaluate(self, x, prec: Optional[int] = None):
        prec = prec or self.prec
        with mp.workprec(prec + 16):
            x = mpmath.mpmathify(x)
            v = mpf(0)
            for c in reversed(self.coeffs):
                v = v * x + _as_mpf(c)
            if self.scale is not None:
                v = v * self.scale.to_mpf(prec + 16)
        with mp.workprec(prec):
            return +v

    def mpf_coeffs(self, prec: Optional[int] = None) -> List[mpf]:
        with mp.workprec(prec or self.prec):
            return [+_as_mpf(c) for c in self.coeffs]

    def snapshot(self) -> "RealPolynomial":
        """Exact representative: every binary coefficient converted to its exact dyadic value."""
        if self.is_exact:
            return self
        return RealPolynomial(tuple(mpf_exact(c) for c in self.coeffs), None, self.scale,
                              self.prec, self.label)

    def integer_coeffs(self) -> List[int]:
        """Coefficients times their common denominator (exact input only)."""
        if not self.is_exact:
            raise ValueError("integer form needs exact coefficients")
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        return [int(c * den) for c in self.coeffs]

    # serialization ----------------------------------------------------
    def to_text(self) -> str:
        lines = [f"# degree: {self.formal_degree}", f"# exact: {str(self.is_exact).lower()}",
                 f"# precision_bits: {self.prec}"]
        if self.scale is not None:
            lines.append(f"# scale: {self.scale.to_decimal()}")
        for k, c in enumerate(self.coeffs):
            if isinstance(c, Fraction):
                lines.append(f"{k}\t{c.numerator}/{c.denominator}")
            else:
                sl = SignedLogReal.from_value(c, self.prec)
                lines.append(f"{k}\t{sl.to_decimal()}\t{mpmath.nstr(self.errors[k], 6)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RealPolynomial":
        prec = DEFAULT_PREC
        coeffs: List[Value] = []
        errs: List[mpf] = []
        scale = None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                if key.strip() == "precision_bits":
                    prec = int(val)
                elif key.strip() == "scale":
                    scale = SignedLogReal.parse(val, prec)
                continue
            parts = line.split()
            if "/" in parts[1]:
                num, den = parts[1].split("/")
                coeffs.append(Fraction(int(num), int(den)))
            else:
                coeffs.append(SignedLogReal.parse(parts[1], prec).to_mpf(prec))
                errs.append(mpf(parts[2]) if len(parts) > 2 else mpf(0))
        return cls(tuple(coeffs), tuple(errs) if errs else None, scale, prec)

    @classmethod
    def from_json_like(cls, obj) -> "RealPolynomial":
        """Accept ``{"coeffs": [...]}`` or a bare list, ascending powers; entries are
        ints, "p/q" strings or decimal strings."""
        items = obj["coeffs"] if isinstance(obj, dict) else obj
        out: List[Value] = []
        for it in items:
            if isinstance(it, int):
                out.append(Fraction(it))
            elif isinstance(it, str) and ("/" in it or re_int(it)):
                out.append(Fraction(it))
            else:
                out.append(Fraction(str(it)))
        return cls(tuple(out))


def mpf_exact(x: mpf) -> Fraction:
    """The exact dyadic rational held by an mpf."""
    if not isinstance(x, mpf):
        with mp.workprec(256):
            x = mpmath.mpmathify(x)
    sign, man, exp, _ = x._mpf_
    if not man:
        return Fraction(0)
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


def re_int(s: str) -> bool:
    s = s.strip()
    return s.lstrip("+-").isdigit()


# ---------------------------------------------------------------------------
# Hermite


def _hermite_recurrence(d: int) -> List[int]:
    h0, h1 = [1], [0, 2]
    if d == 0:
        return h0
    for k in range(1, d):
        nxt = [0] * (k + 2)
        for i, c in enumerate(h1):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(h0):
            nxt[i] -= 2 * k * c
        h0, h1 = h1, nxt
    return h1


def _hermite_explicit(d: int) -> List[int]:
    # H_d = sum_m (-1)^m d!/(m!(d-2m)!) (2x)^(d-2m), walked from the top by coefficient ratios
    out = [0] * (d + 1)
    c = 2 ** d
    out[d] = c
    m = 0
    while d - 2 * m - 2 >= 0:
        k = d - 2 * m
        c = -c * k * (k - 1) // (4 * (m + 1))
        out[k - 2] = c
        m += 1
    return out


def hermite(d: int) -> RealPolynomial:
    """Physicists' Hermite polynomial H_d with exact integer coefficients."""
    if not 0 <= d <= 10**4:
        raise ValueError("Hermite degree must lie in [0, 10^4]")
    cs = _hermite_recurrence(d) if d <= 64 else _hermite_explicit(d)
    return RealPolynomial(tuple(Fraction(c) for c in cs), label=f"H_{d}")


def hermite_half(d: int) -> RealPolynomial:
    """H_d(x/2): monic with integer coefficients."""
    h = hermite(d)
    return RealPolynomial(tuple(c / 2 ** k for k, c in enumerate(h.coeffs)), label=f"H_{d}(x/2)")


def hermite_at_zero(d: int) -> int:
    if d % 2:
        return 0
    m = d // 2
    return (-1) ** m * math.factorial(d) // math.factorial(m)


# ---------------------------------------------------------------------------
# builders


@dataclass(frozen=True)
class JensenSpec:
    d: int
    n: int
    flavor: str

    def __post_init__(self):
        if self.d < 0 or self.n < 0:
            raise ValueError("degree and shift must be nonnegative")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")

    @property
    def required_kind(self) -> str:
        return "gamma" if self.flavor in ("even", "osullivan") else "alpha"

    def indices(self) -> Tuple[int, int]:
        if self.flavor == "taylor":
            return 0, self.d
        return self.n, self.n + self.d


def build(series: CoeffSeries, spec: JensenSpec) -> RealPolynomial:
    if series.kind != spec.required_kind:
        raise ValueError(f"{spec.flavor} polynomials need a {spec.required_kind} series, got {series.kind}")
    lo, hi = spec.indices()
    missing = [k for k in range(lo, hi + 1) if k not in series.entries]
    if missing:
        raise ValueError(f"series lacks indices {missing[:5]}")
    d, n = spec.d, spec.n
    exact = all(isinstance(series.raw(k), Fraction) for k in range(lo, hi + 1))
    label = f"J^{{{d},{n}}}_{spec.flavor}[{series.function}]"
    prec = series.prec
    wp = prec + 32

    def val(k):
        v = series.raw(k)
        return v if exact else _as_mpf(v)

    if spec.flavor in ("classical", "even"):
        cs, es = [], []
        for j in range(d + 1):
            b = math.comb(d, j)
            with mp.workprec(wp):
                cs.append(b * val(n + j))
                es.append(b * series.error(n + j))
    elif spec.flavor == "taylor":
        cs, es = [], []
        for j in range(d + 1):
            f = math.factorial(j)
            with mp.workprec(wp):
                cs.append(val(j) / f if exact else val(j) / f)
                es.append(series.error(j) / f)
    else:  # osullivan: sum_j C(d,j) gamma(n+j) H_{d-j}(z)
        zero = Fraction(0) if exact else mpf(0)
        cs = [zero] * (d + 1)
        es = [mpf(0)] * (d + 1)
        with mp.workprec(wp):
            for j in range(d + 1):
                b = math.comb(d, j)
                h = hermite(d - j)
                g = val(n + j)
                e = series.error(n + j)
                for k, hk in enumerate(h.coeffs):
                    if hk:
                        coef = b * (hk if exact else _as_mpf(hk))
                        cs[k] = cs[k] + coef * g
                        es[k] += abs(coef) * e
    if exact:
        return RealPolynomial(tuple(cs), None, series.scale, prec, label)
    with mp.workprec(prec):
        cs = [+c for c in cs]
    return RealPolynomial(tuple(cs), tuple(es), series.scale, prec, label)


def cosine_closed_form(d: int) -> RealPolynomial:
    """((1 + iz)^d + (1 - iz)^d)/2 expanded: sum over even j of C(d,j) (-1)^(j/2) z^j."""
    cs = [Fraction(math.comb(d, j) * (-1) ** (j // 2)) if j % 2 == 0 else Fraction(0)
          for j in range(d + 1)]
    return RealPolynomial(tuple(cs), label=f"cos-closed-{d}")


# ---------------------------------------------------------------------------
# Hermite normalization


@dataclass(frozen=True)
class NormalizationTriple:
    """x -> A * p(C x + B) pins the leading coefficient to 1, the next to 0
    and the constant term to H_d(0)."""

    A: SignedLogReal
    B: SignedLogReal
    C: SignedLogReal
    d: int
    B_exact: Optional[Fraction] = None
    C_power_exact: Optional[Fraction] = None
    pins: Tuple[str, ...] = ("c_d -> 1", "c_{d-1} -> 0", "c_0 -> H_d(0)")

    def as_dict(self, digits: int = 37) -> Dict[str, str]:
        return {"A": self.A.to_decimal(digits), "B": self.B.to_decimal(digits) if self.B.sign else "0",
                "C": self.C.to_decimal(digits)}


def taylor_shift(coeffs: Sequence[Fraction], b: Fraction) -> List[Fraction]:
    """Coefficients of p(x + b), exact."""
    c = list(coeffs)
    n = len(c)
    for i in range(n):
        for k in range(n - 2, i - 1, -1):
            c[k] += b * c[k + 1]
    return c


def normalize_to_hermite(p: RealPolynomial, orientation: int = 1,
                         prec: Optional[int] = None) -> Tuple[NormalizationTriple, List[mpf]]:
    """Pinned affine normalization onto the monic Hermite form H_d(x/2).

    ``orientation=-1`` selects the negative real root for C (even d only),
    which flips the signs of the odd-degree normalized coefficients.
    """
    prec = prec or p.prec
    base = p.trimmed() if not p.degenerate else p
    d = base.formal_degree
    if d < 2:
        raise NormalizationUndefined("normalization needs degree >= 2", {"degree": d})
    if base.coeffs[d] == 0:
        raise NormalizationUndefined("leading coefficient vanishes", {"degree": d})
    h0 = hermite_at_zero(d)
    if h0 == 0:
        raise NormalizationUndefined("odd degree: H_d(0) = 0 cannot pin the constant term",
                                     {"degree": d})
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    if orientation == -1 and d % 2:
        raise NormalizationUndefined("negative orientation needs even degree", {"degree": d})
    ex = base.snapshot()
    cs = list(ex.coeffs)
    B = -cs[d - 1] / (d * cs[d])
    q = taylor_shift(cs, B)
    if q[0] == 0:
        raise NormalizationUndefined("shifted polynomial vanishes at the origin", {"B": str(B)})
    radicand = q[0] / (h0 * q[d])
    if radicand <= 0:
        raise NormalizationUndefined("pinning radicand is not positive",
                                     {"radicand_sign": -1 if radicand < 0 else 0})
    wp = prec + 32
    with mp.workprec(wp):
        rad = SignedLogReal.from_fraction(radicand, wp)
        C = rad.root(d)
        if orientation == -1:
            C = -C
        Cm = C.to_mpf(wp)
        A = SignedLogReal.from_fraction(Fraction(h0) / q[0], wp)
        if p.scale is not None:
            A = A / p.scale
        coeffs = []
        for k in range(d + 1):
            ratio = q[k] / q[0]
            coeffs.append(h0 * _as_mpf(ratio) * Cm ** k)
        coeffs[d - 1] = mpf(0) if q[d - 1] == 0 else coeffs[d - 1]
    with mp.workprec(prec):
        coeffs = [+c for c in coeffs]
    Bs = SignedLogReal.from_fraction(B, prec) if B != 0 else SignedLogReal.zero(prec)
    triple = NormalizationTriple(A.with_prec(prec), Bs, C.with_prec(prec), d, B, radicand)
    return triple, coeffs


# ---------------------------------------------------------------------------
# convergence diagnostics


@dataclass
class ConvergenceRow:
    n: int
    distance: Optional[mpf]
    flag: str = ""
    extra: Dict[str, mpf] = field(default_factory=dict)


SeriesSource = Union[CoeffSeries, FunctionId, str, Callable[[int, int], CoeffSeries]]


def _slice_source(source: SeriesSource, kind: str, lo: int, hi: int, prec: int,
                  convention: str) -> CoeffSeries:
    if isinstance(source, CoeffSeries):
        return source
    if callable(source) and not isinstance(source, (FunctionId, str)):
        return source(lo, hi)
    fid = FunctionId.parse(source) if isinstance(source, str) else source
    if kind == "gamma":
        return gamma_series(fid, lo, hi, prec, convention)
    return coeff_alpha(fid, lo, hi, prec)


def hermite_distance(coeffs: Sequence[mpf], d: int) -> mpf:
    target = hermite_half(d).coeffs
    return max(abs(c - _as_mpf(t)) for c, t in zip(coeffs, target))


def binomial_normalize(p: RealPolynomial) -> List[Value]:
    """Scale-only pins c_0 -> 1, c_1 -> d (x -> A p(C x))."""
    d = p.formal_degree
    c = p.coeffs
    if c[0] == 0 or c[1] == 0:
        raise NormalizationUndefined("binomial pins need nonzero c_0 and c_1")
    if p.is_exact:
        C = Fraction(d) * c[0] / c[1]
        A = 1 / c[0]
        return [A * ck * C ** k for k, ck in enumerate(c)]
    with mp.workprec(p.prec + 32):
        C = d * c[0] / c[1]
        A = 1 / c[0]
        return [A * ck * C ** k for k, ck in enumerate(c)]


def convergence_report(series: SeriesSource, d: int, n_grid: Sequence[int], mode: str,
                       prec: int = 192, convention: str = "jensen",
                       orientation: int = 1) -> List[ConvergenceRow]:
    """Distance to the limiting shape at each shift n.

    Hermite: max coefficient gap between the pinned normalization and H_d(x/2).
    Binomial: max gap between the (c_0 -> 1, c_1 -> d) rescaling and (1+x)^d.
    CosineRescale: max over the even window n, n+2, ..., n+2d of ||alpha| / |alpha(n)| - 1|;
    the unscaled deviation max ||alpha| - 1| is reported alongside.
    """
    mode = mode.lower()
    rows: List[ConvergenceRow] = []
    for n in n_grid:
        if mode in ("hermite", "binomial"):
            s = _slice_source(series, "gamma", n, n + d, prec, convention)
            poly = build(s, JensenSpec(d, n, "even"))
            try:
                if mode == "hermite":
                    _, cs = normalize_to_hermite(poly, orientation, prec)
                    rows.append(ConvergenceRow(n, hermite_distance(cs, d)))
                else:
                    cs = binomial_normalize(poly)
                    dist = max(abs(c - math.comb(d, k)) for k, c in enumerate(cs))
                    rows.append(ConvergenceRow(n, dist if isinstance(dist, Fraction) else +dist))
            except NormalizationUndefined as exc:
                rows.append(ConvergenceRow(n, None, f"normalization-undefined: {exc}"))
        elif mode in ("cosinerescale", "cosine"):
            s = _slice_source(series, "alpha", n, n + 2 * d, prec, convention)
            with mp.workprec(prec):
                base = abs(_as_mpf(s.raw(n)))
                if base == 0:
                    rows.append(ConvergenceRow(n, None, "alpha(n) vanishes"))
                    continue
                vals = [abs(_as_mpf(s.raw(n + 2 * k))) for k in range(d + 1)]
                dist = max(abs(v / base - 1) for v in vals)
                raw = max(abs(v - 1) for v in vals)
            rows.append(ConvergenceRow(n, dist, extra={"unscaled": raw}))
        else:
            raise ValueError(f"unknown convergence mode {mode!r}")
    return rows


def loglog_slope(rows: Sequence[ConvergenceRow]) -> float:
    """Least-squares slope of log(distance) against log(n)."""
    pts = [(math.log(r.n), math.log(float(r.distance))) for r in rows if r.distance]
    if len(pts) < 2:
        raise ValueError("need at least two finite distances")
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    num = sum((x - mx) * (y - my) for x, y in pts)
    den = sum((x - mx) ** 2 for x, _ in pts)
    return num / den


def classical_limit_error(d: int, samples: int = 256, prec: int = 128) -> mpf:
    """max over |z| = 1 of |J^{d,0}_cos(z/d) - cos z| (the maximum over the disk sits on the
    boundary), sampled at ``samples`` points."""
    p = build(coeff_alpha("cos", 0, d, prec), JensenSpec(d, 0, "classical"))
    with mp.workprec(prec):
        worst = mpf(0)
        for k in range(samples):
            z = mpmath.expjpi(mpf(2 * k) / samples)
            v = p.evaluate(z / d, prec) - mpmath.cos(z)
            worst = max(worst, abs(v))
        return worst


__all__ = [
    "ConvergenceRow", "FLAVORS", "JensenSpec", "NormalizationTriple", "NormalizationUndefined",
    "RealPolynomial", "binomial_normalize", "build", "classical_limit_error", "convergence_report",
    "cosine_closed_form", "hermite", "hermite_at_zero", "hermite_distance", "hermite_half",
    "loglog_slope", "mpf_exact", "normalize_to_hermite", "taylor_shift",
]
