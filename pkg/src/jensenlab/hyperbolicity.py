"""Certified real-rootedness, validated zero localization and the threshold
drivers for Jensen and Taylor polynomials."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import flint
import mpmath
from mpmath import mp, mpf, mpc

from .jensen import JensenSpec, RealPolynomial, build
from .series import CoeffSeries, FunctionId, XFamilyData
from .sturm import (
    NEG_INF,
    POS_INF,
    count_distinct,
    count_with_multiplicity_exact,
)

HYPERBOLIC = "CertifiedHyperbolic"
NOT_HYPERBOLIC = "CertifiedNotHyperbolic"
UNDECIDED = "Undecided"


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Witness:
    """A validated non-real root: the box centred at ``root`` with half-width
    ``radius`` contains exactly one root and misses the real axis."""

    root: mpc
    radius: mpf
    imag_lower: mpf

    def describe(self) -> str:
        return (f"{mpmath.nstr(self.root.real, 12)}{'+' if self.root.imag >= 0 else '-'}"
                f"{mpmath.nstr(abs(self.root.imag), 12)}i (r={mpmath.nstr(self.radius, 3)}, "
                f"|Im|>={mpmath.nstr(self.imag_lower, 6)})")


@dataclass(frozen=True)
class HyperbolicityVerdict:
    outcome: str
    degree: int
    real_count: Optional[int]
    method: str
    prec: int
    witness: Optional[Witness] = None
    trace: Tuple[str, ...] = ()

    @property
    def hyperbolic(self) -> bool:
        return self.outcome == HYPERBOLIC

    @property
    def not_hyperbolic(self) -> bool:
        return self.outcome == NOT_HYPERBOLIC

    @property
    def undecided(self) -> bool:
        return self.outcome == UNDECIDED

    def to_text(self) -> str:
        lines = [f"outcome: {self.outcome}", f"degree: {self.degree}",
                 f"real_count: {self.real_count}", f"method: {self.method}", f"precision_bits: {self.prec}"]
        if self.witness is not None:
            lines.append(f"witness: {self.witness.describe()}")
        lines.extend(f"trace: {t}" for t in self.trace)
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        if self.witness is not None:
            w = self.witness.root
            return f"{self.outcome} witness≈{mpmath.nstr(w.real, 6)}{'+' if w.imag >= 0 else '-'}{mpmath.nstr(abs(w.imag), 6)}i"
        return self.outcome


@dataclass(frozen=True)
class CertifyBudget:
    max_prec: int = 1 << 17
    witness: bool = True
    robustness: bool = True
    exact_degree_limit: int = 48
    witness_degree_limit: int = 1200


# ---------------------------------------------------------------------------
# real-root counting


def _even_part(ints: Sequence[int]) -> List[int]:
    return list(ints[0::2])


def _strip_low_zeros(ints: Sequence[int]) -> Tuple[List[int], int]:
    k = 0
    while k < len(ints) and ints[k] == 0:
        k += 1
    return list(ints[k:]), k


def real_root_count(p: RealPolynomial, budget: CertifyBudget = CertifyBudget()) -> Tuple[int, int, str, int]:
    """(real roots with multiplicity, degree, method, precision) of the exact
    representative of ``p``.  Even polynomials are reduced to q(w), p(z) = q(z^2)."""
    ex = p.snapshot().trimmed()
    deg = ex.degree
    if deg < 1:
        raise ValueError("certification needs degree >= 1")
    ints = ex.integer_coeffs()
    if ex.is_even and deg >= 2:
        q, k = _strip_low_zeros(_even_part(ints))
        real = 2 * k
        if len(q) > 1:
            if len(q) - 1 <= budget.exact_degree_limit:
                qp = flint.fmpz_poly(q)
                pos = count_with_multiplicity_exact(qp, 0, POS_INF)
                return real + 2 * pos, deg, "sturm-exact/even", 0
            cnt, method, prec = count_distinct(q, 0, POS_INF, max_prec=budget.max_prec,
                                               exact_degree_limit=budget.exact_degree_limit)
            if method == "sturm-exact":
                pos = count_with_multiplicity_exact(flint.fmpz_poly(q), 0, POS_INF)
            else:
                pos = cnt  # a resolved ball chain ends in a nonzero constant: squarefree
            return real + 2 * pos, deg, method + "/even", prec
        return real, deg, "trivial/even", 0
    core, k = _strip_low_zeros(ints)
    if len(core) - 1 <= budget.exact_degree_limit:
        return k + count_with_multiplicity_exact(flint.fmpz_poly(core)), deg, "sturm-exact", 0
    cnt, method, prec = count_distinct(core, NEG_INF, POS_INF, max_prec=budget.max_prec,
                                       exact_degree_limit=budget.exact_degree_limit)
    if method == "sturm-exact":
        cnt = count_with_multiplicity_exact(flint.fmpz_poly(core))
    return k + cnt, deg, method, prec


# ---------------------------------------------------------------------------
# witnesses


def _acb_poly(ints: Sequence[int]) -> flint.acb_poly:
    return flint.acb_poly([flint.acb(int(c)) for c in ints])


def _acb_to_mpc(x: flint.acb) -> mpc:
    return mpc(mpf(x.real.mid().str(60, radius=False)), mpf(x.imag.mid().str(60, radius=False)))


def krawczyk(ints: Sequence[int], center: mpc, radius: mpf, prec: int) -> bool:
    """True when the box center +- radius (both axes) provably holds exactly one root
    of the integer polynomial: K(D) = c - Y p(c) + (1 - Y p'(D))(D - c) inside D."""
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        p = _acb_poly(ints)
        dp = p.derivative()
        re = flint.arb(mpmath.nstr(center.real, prec // 3 + 10, strip_zeros=False))
        im = flint.arb(mpmath.nstr(center.imag, prec // 3 + 10, strip_zeros=False))
        c = flint.acb(re.mid(), im.mid())
        r = flint.arb(mpmath.nstr(radius, 20))
        D = flint.acb(flint.arb(c.real.mid(), r), flint.arb(c.imag.mid(), r))
        dpc = dp(c)
        if dpc.contains(0):
            return False
        Y = flint.acb(1) / flint.acb(dpc.real.mid(), dpc.imag.mid())
        Y = flint.acb(Y.real.mid(), Y.imag.mid())
        K = c - Y * p(c) + (1 - Y * dp(D)) * (D - c)
        return bool(D.contains_interior(K))
    finally:
        flint.ctx.prec = old


def _newton_polish(ints: Sequence[int], z: mpc, prec: int, steps: int = 60) -> mpc:
    with mp.workprec(prec):
        cs = [mpf(c) for c in reversed(ints)]
        dcs = [mpf(c * k) for k, c in reversed(list(enumerate(ints)))][:-1]
        z = mpc(z)
        for _ in range(steps):
            v = mpmath.polyval(cs, z)
            dv = mpmath.polyval(dcs, z)
            if dv == 0:
                break
            dz = v / dv
            z -= dz
            if abs(dz) <= abs(z) * mpf(2) ** (-prec + 8):
                break
        return z


def validate_root(ints: Sequence[int], approx: mpc, prec: int = 256) -> Optional[Witness]:
    """Polish ``approx`` and certify a unique root in a small box by the Krawczyk test."""
    z = _newton_polish(ints, approx, prec)
    with mp.workprec(prec):
        scale = max(abs(z), mpf(1))
        for shrink in (prec // 2, prec // 3, prec // 4, prec // 6):
            r = scale * mpf(2) ** (-shrink)
            if krawczyk(ints, z, r, prec + 64):
                return Witness(z, r, abs(z.imag) - r)
    return None


def _candidate_roots(ints: Sequence[int], even: bool, budget: CertifyBudget) -> List[mpc]:
    """Approximate non-real roots from arb's validated root isolation."""
    if even:
        q, _ = _strip_low_zeros(_even_part(ints))
        base = q
    else:
        base, _ = _strip_low_zeros(ints)
    if len(base) - 1 > budget.witness_degree_limit:
        return []
    out: List[Tuple[mpf, mpc]] = []
    for prec in (128, 256, 512, 1024, 2048):
        old = flint.ctx.prec
        flint.ctx.prec = prec
        try:
            roots = _acb_poly(list(base)).roots(maxprec=prec * 8)
        except (ValueError, ArithmeticError):
            roots = None
        finally:
            flint.ctx.prec = old
        if roots is None:
            continue
        with mp.workprec(prec):
            for r in roots:
                w = _acb_to_mpc(r)
                if even:
                    nonreal = (not r.imag.contains(0)) or (r.real < 0)
                    if not nonreal:
                        continue
                    z = mpmath.sqrt(w)
                    if z.imag < 0:
                        z = -z
                else:
                    if r.imag.contains(0):
                        continue
                    z = w
                out.append((abs(z.imag), z))
        if out:
            break
    out.sort(key=lambda t: -t[0])
    return [z for _, z in out]


def witness(p: RealPolynomial, budget: CertifyBudget = CertifyBudget(), prec: int = 256) -> Optional[Witness]:
    """A validated non-real root of the exact representative, or None."""
    ex = p.snapshot().trimmed()
    # repeated factors break both arb's isolation and the Krawczyk test; the
    # squarefree part has the same distinct roots
    ints = _squarefree_part(ex.integer_coeffs())
    even = all(c == 0 for c in ints[1::2]) and len(ints) >= 3
    for z in _candidate_roots(ints, even, budget)[:6]:
        for pr in (prec, 2 * prec, 4 * prec):
            w = validate_root(ints, z, pr)
            if w is not None and w.imag_lower > 0:
                return w
    return None


# ---------------------------------------------------------------------------
# certify


def _verdict_for(p: RealPolynomial, budget: CertifyBudget, want_witness: bool) -> HyperbolicityVerdict:
    count, deg, method, prec = real_root_count(p, budget)
    trace = [f"count={count} degree={deg} via {method}" + (f"@{prec}" if prec else "")]
    if count == deg:
        return HyperbolicityVerdict(HYPERBOLIC, deg, count, method, prec, None, tuple(trace))
    if not want_witness:
        trace.append("non-real roots implied by the Sturm deficit; witness not requested")
        return HyperbolicityVerdict(NOT_HYPERBOLIC, deg, count, method + "+deficit", prec, None, tuple(trace))
    w = witness(p, budget)
    if w is None:
        trace.append("Sturm deficit found but no validated witness within budget")
        return HyperbolicityVerdict(UNDECIDED, deg, count, method, prec, None, tuple(trace))
    trace.append(f"witness {w.describe()}")
    return HyperbolicityVerdict(NOT_HYPERBOLIC, deg, count, method + "+validated-roots", prec, w, tuple(trace))


def certify(p: RealPolynomial, budget: CertifyBudget = CertifyBudget(),
            recompute: Optional[Callable[[int], RealPolynomial]] = None) -> HyperbolicityVerdict:
    """Decide whether ``p`` has only real zeros.

    Exact input is decided outright.  Inexact input is decided on its exact
    representative; when ``recompute(prec)`` is given, the source coefficients
    are rebuilt at doubled precision and the verdict is kept only if both
    agree (otherwise Undecided)."""
    first = _verdict_for(p, budget, budget.witness)
    if p.is_exact or first.undecided:
        return first
    if recompute is None or not budget.robustness:
        return HyperbolicityVerdict(first.outcome, first.degree, first.real_count, first.method + "/representative",
                                    first.prec, first.witness, first.trace + ("verdict on the representative polynomial",))
    q = recompute(2 * p.prec)
    second = _verdict_for(q, budget, False)
    trace = first.trace + (f"re-certified at {2 * p.prec} bits: {second.outcome}",)
    if (second.outcome == HYPERBOLIC) != (first.outcome == HYPERBOLIC):
        return HyperbolicityVerdict(UNDECIDED, first.degree, None, first.method + "/robustness-disagree",
                                    first.prec, None, trace)
    return HyperbolicityVerdict(first.outcome, first.degree, first.real_count, first.method + "/robust",
                                first.prec, first.witness, trace)


# ---------------------------------------------------------------------------
# zero localization


@dataclass(frozen=True)
class ZeroList:
    window: Tuple[mpf, mpf]
    zeros: Tuple[Tuple[mpf, mpf], ...]
    complete: bool
    method: str = ""
    trace: Tuple[str, ...] = ()

    def locations(self) -> List[mpf]:
        return [z for z, _ in self.zeros]

    def to_text(self) -> str:
        lines = [f"window: [{mpmath.nstr(self.window[0], 12)}, {mpmath.nstr(self.window[1], 12)}]",
                 f"complete: {str(self.complete).lower()}", f"method: {self.method}"]
        lines += [f"zero: {mpmath.nstr(z, 30)} radius {mpmath.nstr(r, 3)}" for z, r in self.zeros]
        lines += [f"trace: {t}" for t in self.trace]
        return "\n".join(lines) + "\n"


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(mpmath.nstr(mpf(x), 40, strip_zeros=False)) if not isinstance(x, float) else Fraction(x)


def _to_mpf(x: Fraction) -> mpf:
    x = Fraction(x)
    return mpf(x.numerator) / x.denominator


def _sign_exact(ints, x: Fraction) -> int:
    poly = ints if isinstance(ints, flint.fmpz_poly) else flint.fmpz_poly(list(ints))
    v = poly(flint.fmpq(x.numerator, x.denominator))
    return (v > 0) - (v < 0)


def _isolate(ints: Sequence[int], lo: Fraction, hi: Fraction, tol: Fraction, budget: CertifyBudget,
             depth: int = 0) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint intervals (l, r] each holding one distinct root of a squarefree polynomial."""
    cnt, _, _ = count_distinct(ints, lo, hi, max_prec=budget.max_prec,
                               exact_degree_limit=budget.exact_degree_limit)
    if cnt == 0:
        return []
    if cnt == 1:
        return [(lo, hi)]
    mid = (lo + hi) / 2
    if _sign_exact(ints, mid) == 0:
        mid = lo + (hi - lo) * Fraction(127, 255)
    return (_isolate(ints, lo, mid, tol, budget, depth + 1)
            + _isolate(ints, mid, hi, tol, budget, depth + 1))


def _refine(ints: Sequence[int], lo: Fraction, hi: Fraction, tol: Fraction) -> Tuple[Fraction, Fraction]:
    ints = flint.fmpz_poly(list(ints))
    slo = _sign_exact(ints, lo)
    shi = _sign_exact(ints, hi)
    if shi == 0:
        return hi, hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        s = _sign_exact(ints, mid)
        if s == 0:
            return mid, mid
        if s == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _squarefree_part(ints: Sequence[int]) -> List[int]:
    p = flint.fmpz_poly(list(ints))
    g = p.gcd(p.derivative())
    if g.degree() <= 0:
        return list(ints)
    q, r = divmod(p, g)
    return [int(c) for c in q.coeffs()]


def _real_zeros_poly(ints: Sequence[int], a: Fraction, b: Fraction, tol: Fraction,
                     budget: CertifyBudget, even: bool) -> List[Tuple[Fraction, Fraction]]:
    """Isolating-and-refined intervals for the distinct real zeros of an integer
    polynomial in (a, b].  Even input with a >= 0 is handled through w = z^2."""
    if even and a >= 0:
        q, k = _strip_low_zeros(_even_part(ints))
        out = []
        if k and a < 0 <= b:
            out.append((Fraction(0), Fraction(0)))
        if len(q) <= 1:
            return out
        q = _squarefree_part(q)
        wlo, whi = a * a, b * b
        wtol = tol * tol if tol < 1 else tol
        for lo, hi in _isolate(q, wlo, whi, wtol, budget):
            if hi <= 0:
                continue
            # refine in z: sign of q(z^2) between sqrt endpoints
            zl = _sqrt_lower(lo)
            zh = _sqrt_upper(hi)
            zl = max(zl, a)
            zh = min(zh, b)
            zints = _inflate(q)
            out.append(_refine(zints, zl, zh, tol))
        return out
    core = _squarefree_part(ints)
    return [_refine(core, lo, hi, tol) for lo, hi in _isolate(core, a, b, tol, budget)]


def _inflate(q: Sequence[int]) -> List[int]:
    out = [0] * (2 * len(q) - 1)
    for k, c in enumerate(q):
        out[2 * k] = c
    return out


def _sqrt_lower(x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    s = Fraction(math.isqrt(x.numerator * 2 ** 200 // x.denominator), 2 ** 100)
    return s


def _sqrt_upper(x: Fraction) -> Fraction:
    return _sqrt_lower(x) + Fraction(1, 2 ** 100)


def zeros_window_poly(p: RealPolynomial, window: Tuple, prec: int = 128,
                      budget: CertifyBudget = CertifyBudget()) -> ZeroList:
    """Real zeros of a polynomial in [a, b], complete by Sturm counting."""
    a, b = _frac(window[0]), _frac(window[1])
    ex = p.snapshot().trimmed()
    ints = ex.integer_coeffs()
    tol = Fraction(1, 2 ** (prec // 2)) * max(1, abs(b), abs(a))
    if _sign_exact(ints, a) == 0:
        a -= tol
    ivals = _real_zeros_poly(ints, a, b, tol, budget, ex.is_even and ex.degree >= 2)
    zeros = []
    with mp.workprec(prec):
        for lo, hi in ivals:
            mid = (mpf(lo.numerator) / lo.denominator + mpf(hi.numerator) / hi.denominator) / 2
            rad = (mpf(hi.numerator) / hi.denominator - mpf(lo.numerator) / lo.denominator) / 2
            zeros.append((mid, rad))
    zeros.sort(key=lambda t: t[0])
    with mp.workprec(prec):
        win = (mpf(a.numerator) / a.denominator, mpf(b.numerator) / b.denominator)
    return ZeroList(win, tuple(zeros), True, "sturm-isolation")


# --- series sources -----------------------------------------------------------


@dataclass
class SeriesSource:
    """A truncatable even series f(z) = sum alpha(k) z^k/k!, optionally viewed on
    the imaginary axis (``rotate``: zeros of x -> f(i x)), with a bound
    ``modulus(rho) >= max_{|z|=rho} |f|``."""

    alpha: CoeffSeries
    modulus: Callable[[mpf], mpf]
    rotate: bool = False
    label: str = ""


def series_source(fid: Union[FunctionId, str], n_terms: int, prec: int = 256) -> SeriesSource:
    """Source for cos, the X family, xi and its deformation (the latter two rotated)."""
    from .series import coeff_alpha, max_modulus_bound
    fid = FunctionId.parse(fid) if isinstance(fid, str) else fid
    if fid.variant in ("xi", "dbnxi"):
        from . import xi as _xi
        table = _xi.xi_even_gamma(n_terms // 2, prec) if fid.variant == "xi" else \
            _xi.dbn_gamma(fid.t, n_terms // 2, prec)
        return SeriesSource(table.alpha_series(), lambda r: _xi.max_modulus_bound(fid, r), True, str(fid))
    return SeriesSource(coeff_alpha(fid, 0, n_terms, prec), lambda r: max_modulus_bound(fid, r), False, str(fid))


def _truncation(src: SeriesSource, N: int, prec: int) -> Tuple[List[Fraction], mpf]:
    """Exact coefficients of the degree-N truncation (in the window variable) and the
    summed coefficient error bound weights."""
    coeffs: List[Fraction] = []
    errs: List[mpf] = []
    from .jensen import mpf_exact
    with mp.workprec(prec + 32):
        for k in range(N + 1):
            v = src.alpha.raw(k)
            e = src.alpha.error(k)
            f = mpmath.factorial(k)
            if isinstance(v, Fraction):
                c = v / math.factorial(k)
            else:
                c = mpf_exact(v / f)
            if src.rotate and k % 2 == 0 and (k // 2) % 2 == 1:
                c = -c
            coeffs.append(Fraction(c))
            errs.append(e / f)
    return coeffs, errs


def _tail_bound(src: SeriesSource, N: int, R: mpf, errs: Sequence[mpf]) -> mpf:
    """|f - P_N| on |z| <= R: Cauchy estimate for the tail plus coefficient errors."""
    with mp.workprec(64):
        best = None
        for factor in (2, 3, 4, 6, 8):
            rho = R * factor
            M = src.modulus(rho)
            q = R / rho
            b = M * q ** (N + 1) / (1 - q)
            best = b if best is None else min(best, b)
        coef = sum((e * R ** k for k, e in enumerate(errs)), mpf(0))
        return best + coef


def _segment_enclosure(poly: flint.acb_poly, center: mpc, radius: mpf, prec: int) -> Tuple[flint.acb, mpf]:
    """Value at the centre and a bound on |p(c + t) - p(c)| for |t| <= radius,
    from the exact Taylor shift p(c + t) evaluated in ball arithmetic."""
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        c = flint.acb(mpmath.nstr(center.real, prec // 3 + 5), mpmath.nstr(center.imag, prec // 3 + 5))
        c = flint.acb(c.real.mid(), c.imag.mid())
        shifted = poly(flint.acb_poly([c, 1]))
        cs = shifted.coeffs()
        r = flint.arb(mpmath.nstr(radius, 20))
        rest = flint.arb(0)
        rk = flint.arb(1)
        for a in cs[1:]:
            rk = rk * r
            rest = rest + abs(a) * rk
        return cs[0], mpf(rest.upper().str(20, radius=False))
    finally:
        flint.ctx.prec = old


def _arg(x: flint.acb) -> mpf:
    return mpmath.atan2(mpf(x.imag.mid().str(30, radius=False)), mpf(x.real.mid().str(30, radius=False)))


def winding_number(poly: flint.acb_poly, vertices: Sequence[mpc], prec: int, max_pieces: int = 20000
                   ) -> Tuple[Optional[int], mpf]:
    """Winding number of p around 0 along the closed polygon, and a lower bound for
    |p| on it.  Each piece is accepted when its enclosure lies in a 45-degree sector
    around its centre value, so the argument change across it is below pi/2."""
    total = mpf(0)
    min_mod = None
    pieces = 0
    with mp.workprec(64):
        stack: List[Tuple[mpc, mpc]] = []
        for i in range(len(vertices)):
            stack.append((vertices[i], vertices[(i + 1) % len(vertices)]))
        stack.reverse()
        args: List[Tuple[mpc, mpc]] = []
        while stack:
            a, b = stack.pop()
            mid = (a + b) / 2
            rad = abs(b - a) / 2
            val, spread = _segment_enclosure(poly, mid, rad, prec)
            mag = abs(mpc(mpf(val.real.mid().str(30, radius=False)), mpf(val.imag.mid().str(30, radius=False))))
            vrad = mpf(val.real.rad().str(5, radius=False)) + mpf(val.imag.rad().str(5, radius=False))
            if mag > 0 and (spread + vrad) < mag * mpf("0.7"):
                args.append((a, b))
                low = mag - spread - vrad
                min_mod = low if min_mod is None else min(min_mod, low)
                continue
            pieces += 1
            if pieces > max_pieces or rad < mpf(2) ** -60:
                return None, mpf(0)
            stack.append((mid, b))
            stack.append((a, mid))
        # accumulate argument changes in path order
        old = flint.ctx.prec
        flint.ctx.prec = prec
        try:
            def value(z):
                zz = flint.acb(mpmath.nstr(z.real, prec // 3 + 5), mpmath.nstr(z.imag, prec // 3 + 5))
                return poly(zz)
            for a, b in args:
                va, vb = value(a), value(b)
                d = _arg(vb) - _arg(va)
                while d > mp.pi:
                    d -= 2 * mp.pi
                while d < -mp.pi:
                    d += 2 * mp.pi
                total += d
        finally:
            flint.ctx.prec = old
        w = total / (2 * mp.pi)
        return int(mpmath.nint(w)), min_mod if min_mod is not None else mpf(0)


def zeros_window(source: Union[RealPolynomial, SeriesSource], window: Tuple, prec: int = 256,
                 height=Fraction(1, 2), budget: CertifyBudget = CertifyBudget(),
                 start_degree: Optional[int] = None) -> ZeroList:
    """Validated real zeros in [a, b].

    Polynomial sources are isolated by Sturm counting (complete for real zeros).
    Series sources are truncated; the truncation P_N is accepted when its tail
    bound is below 1e-6 of min |P_N| on the rectangle [a,b] x [-h,h] (then N is
    doubled once).  Rouche's theorem and the winding number of P_N on the
    rectangle give the zero count of f inside; completeness is claimed when that
    count equals the number of validated real zeros."""
    if isinstance(source, RealPolynomial):
        return zeros_window_poly(source, window, prec, budget)
    a, b = _frac(window[0]), _frac(window[1])
    h = _frac(height)
    with mp.workprec(prec):
        R = mpmath.sqrt(_to_mpf(max(abs(a), abs(b))) ** 2 + _to_mpf(h) ** 2)
    avail = source.alpha.hi
    N = start_degree or min(avail, int(float(R) * math.e) + 40)
    trace: List[str] = []
    accepted = False
    doubled = False
    while True:
        N = min(N, avail)
        coeffs, errs = _truncation(source, N, prec)
        T = _tail_bound(source, N, R, errs)
        poly = RealPolynomial(tuple(coeffs))
        ints = poly.integer_coeffs()
        old = flint.ctx.prec
        flint.ctx.prec = prec
        try:
            ap = flint.acb_poly([flint.acb(c) for c in ints])
        finally:
            flint.ctx.prec = old
        with mp.workprec(prec):
            af = mpf(a.numerator) / a.denominator
            bf = mpf(b.numerator) / b.denominator
            hf = mpf(h.numerator) / h.denominator
            verts = [mpc(af, -hf), mpc(bf, -hf), mpc(bf, hf), mpc(af, hf)]
        W, mmod = winding_number(ap, verts, prec)
        k0 = next(k for k, c in enumerate(coeffs) if c != 0)
        with mp.workprec(prec):
            mmod_f = mmod / _to_mpf(ints[k0] / coeffs[k0])
        trace.append(f"N={N} tail={mpmath.nstr(T, 3)} min|P|={mpmath.nstr(mmod_f, 3)} winding={W}")
        ok = W is not None and T < mmod_f * mpf("1e-6")
        if ok and doubled:
            accepted = True
            break
        if ok:
            doubled = True
            if 2 * N > avail:
                trace.append("doubling limited by available coefficients")
                accepted = True
                break
            N = 2 * N
            continue
        if N >= avail:
            break
        N = 2 * N
    tol = Fraction(1, 2 ** (prec // 3)) * max(1, abs(b))
    ivals = _real_zeros_poly(ints, a, b, tol, budget, poly.is_even)
    zeros = []
    real_ok = True
    with mp.workprec(prec):
        Tn = T
        for lo, hi in ivals:
            # widen until the endpoint values dominate the truncation error
            lo_f = mpf(lo.numerator) / lo.denominator
            hi_f = mpf(hi.numerator) / hi.denominator
            width = max(hi_f - lo_f, mpf(2) ** (-prec // 3))
            while True:
                l, r = lo_f - width, hi_f + width
                pl, pr = poly.evaluate(l, prec), poly.evaluate(r, prec)
                if abs(pl) > Tn and abs(pr) > Tn and pl * pr < 0:
                    break
                width *= 4
                if width > (bf - af):
                    real_ok = False
                    break
            zeros.append(((l + r) / 2, (r - l) / 2))
    complete = accepted and real_ok and W is not None and W == len(zeros)
    if W is not None and W != len(zeros):
        trace.append(f"winding {W} differs from {len(zeros)} validated real zeros")
    zeros.sort(key=lambda t: t[0])
    return ZeroList((af, bf), tuple(zeros), complete, "truncation+rouche+sturm", tuple(trace))


# ---------------------------------------------------------------------------
# spacing


@dataclass(frozen=True)
class SpacingStats:
    gaps: Tuple[mpf, ...]
    mean: mpf
    normalized_variance: mpf


def spacing_stats(zeros: ZeroList) -> SpacingStats:
    if not zeros.complete:
        raise ValueError("spacing statistics need a complete zero list")
    locs = sorted(zeros.locations())
    if len(locs) < 3:
        raise ValueError("spacing statistics need at least three zeros")
    gaps = [b - a for a, b in zip(locs, locs[1:])]
    mean = sum(gaps) / len(gaps)
    var = sum((g / mean - 1) ** 2 for g in gaps) / len(gaps)
    return SpacingStats(tuple(gaps), mean, var)


def spacing_of(values: Sequence) -> SpacingStats:
    """Spacing statistics of an explicit sorted list (treated as complete)."""
    zl = ZeroList((mpf(min(values)), mpf(max(values))), tuple((mpf(v), mpf(0)) for v in values), True)
    return spacing_stats(zl)


# ---------------------------------------------------------------------------
# threshold drivers


def first_real_count(j, removed: Optional[Tuple[int, int]] = None) -> int:
    """Real zeros of X_j on the positive axis below |j + i|."""
    data = XFamilyData.build(FunctionId.xfamily(j, removed), 128)
    with mp.workprec(128):
        jj = mpf(Fraction(j).numerator) / Fraction(j).denominator
        bound = mpmath.sqrt(jj * jj + 1)
    return len(data.retained_positive_zeros(bound))


@dataclass
class ThresholdResult:
    d_star: Optional[int]
    window: List[Tuple[int, str]]
    undecided: List[int]
    first_failure: Optional[HyperbolicityVerdict]
    boundary: Optional[HyperbolicityVerdict]
    partial: bool
    trace: List[str] = field(default_factory=list)


def jensen_threshold(series: CoeffSeries, flavor: str = "classical", d_max: int = 200,
                     budget: CertifyBudget = CertifyBudget(), d_min: int = 1, confirm: int = 10,
                     n: int = 0, recompute: Optional[Callable[[int], CoeffSeries]] = None,
                     progress: Optional[Callable[[int, str], None]] = None,
                     max_series_prec: int = 8192) -> ThresholdResult:
    """Largest d whose Jensen polynomial is certified hyperbolic with the next
    min(confirm, d_max - d) degrees all certified non-hyperbolic.

    Cells are decided on the exact representative without witnesses; the last
    hyperbolic cell and the first failing cell are then re-certified in full
    (witness plus doubled-precision agreement when ``recompute`` is given).  If
    those disagree, the scan is repeated on coefficients at twice the precision."""
    history: List[str] = []
    while True:
        res = _threshold_scan(series, flavor, d_max, budget, d_min, confirm, n, recompute, progress)
        res.trace = history + res.trace
        disagree = any(v is not None and v.undecided for v in (res.boundary, res.first_failure))
        if not disagree or recompute is None or 2 * series.prec > max_series_prec:
            return res
        history.append(f"precision {series.prec} bits not robust at the boundary; rescanning at {2 * series.prec}")
        series = recompute(2 * series.prec)


def _threshold_scan(series: CoeffSeries, flavor: str, d_max: int, budget: CertifyBudget, d_min: int,
                    confirm: int, n: int, recompute: Optional[Callable[[int], CoeffSeries]],
                    progress: Optional[Callable[[int, str], None]]) -> ThresholdResult:
    scan = CertifyBudget(budget.max_prec, False, False, budget.exact_degree_limit, budget.witness_degree_limit)
    window: List[Tuple[int, str]] = []
    undecided: List[int] = []
    last_good: Optional[int] = None
    fails_after = 0
    trace: List[str] = []
    for d in range(d_min, d_max + 1):
        poly = build(series, JensenSpec(d, n, flavor))
        if poly.degree < 1:
            window.append((d, "constant"))
            continue
        v = certify(poly, scan)
        window.append((d, v.outcome))
        if progress:
            progress(d, v.outcome)
        if v.undecided:
            undecided.append(d)
            trace.append(f"undecided at d={d}; scan aborted")
            return ThresholdResult(last_good, window, undecided, None, None, True, trace)
        if v.hyperbolic:
            last_good = d
            fails_after = 0
        else:
            fails_after += 1
            if last_good is not None and fails_after >= confirm:
                break
            if last_good is None and fails_after >= confirm and d_min > 1:
                break
    if last_good is None:
        return ThresholdResult(None, window, undecided, None, None, False, trace)
    needed = min(confirm, d_max - last_good)
    after = [o for d, o in window if d > last_good][:needed]
    if len(after) < needed or any(o != NOT_HYPERBOLIC for o in after):
        trace.append("confirmation window incomplete or non-monotone")
    boundary = None
    first_fail = None

    def rebuild(d):
        def f(prec):
            src = recompute(prec)
            return build(src, JensenSpec(d, n, flavor))
        return f if recompute is not None else None

    boundary = certify(build(series, JensenSpec(last_good, n, flavor)),
                       CertifyBudget(budget.max_prec, False, True, budget.exact_degree_limit),
                       rebuild(last_good))
    trace.append(f"boundary d={last_good}: {boundary.outcome} ({boundary.method})")
    if last_good < d_max:
        first_fail = certify(build(series, JensenSpec(last_good + 1, n, flavor)), budget, rebuild(last_good + 1))
        trace.append(f"first failure d={last_good + 1}: {first_fail.summary()} ({first_fail.method})")
    ok = boundary.hyperbolic and (first_fail is None or first_fail.not_hyperbolic)
    return ThresholdResult(last_good if ok else None, window, undecided, first_fail, boundary, not ok, trace)


@dataclass
class DetectionProfile:
    """Distance from a planted zero to the nearest root of each Taylor truncation."""

    planted: Tuple[mpc, ...]
    distances: Dict[int, Optional[mpf]]
    nearest: Dict[int, Optional[mpc]]

    def detect(self, epsilon) -> Optional[int]:
        eps = mpf(epsilon)
        for d in sorted(self.distances):
            dist = self.distances[d]
            if dist is not None and dist < eps:
                return d
        return None


def _taylor_ints(series: CoeffSeries, d: int) -> Tuple[List[int], bool]:
    poly = build(series, JensenSpec(d, 0, "taylor")).snapshot().trimmed()
    return poly.integer_coeffs(), poly.is_even and poly.degree >= 2


def _roots_validated(ints: Sequence[int], even: bool, prec: int = 256) -> List[Tuple[mpc, mpf]]:
    """All roots (midpoint, radius) from arb's isolation; even input solved in w = z^2."""
    base = _strip_low_zeros(_even_part(ints))[0] if even else _strip_low_zeros(ints)[0]
    base = _squarefree_part(base) if len(base) > 2 else base
    if len(base) <= 1:
        return []
    for pr in (prec, 2 * prec, 4 * prec, 8 * prec):
        old = flint.ctx.prec
        flint.ctx.prec = pr
        try:
            roots = _acb_poly(base).roots(maxprec=pr * 8)
        except (ValueError, ArithmeticError):
            continue
        finally:
            flint.ctx.prec = old
        out = []
        with mp.workprec(pr):
            for r in roots:
                w = _acb_to_mpc(r)
                rad = mpf(r.real.rad().str(5, radius=False)) + mpf(r.imag.rad().str(5, radius=False))
                if even:
                    z = mpmath.sqrt(w)
                    zr = rad / max(abs(z), mpf(2) ** -pr) if z != 0 else mpmath.sqrt(rad)
                    out.append((z, zr))
                    out.append((-z, zr))
                else:
                    out.append((w, rad))
        return out
    return []


def taylor_profile(series: CoeffSeries, planted: Sequence, d_max: int, d_min: int = 1,
                   validate: bool = True) -> DetectionProfile:
    """For each truncation degree, the largest over planted upper-half-plane zeros of the
    distance to the nearest root (a root near every planted zero is needed for detection)."""
    planted = tuple(mpc(z) for z in planted if mpc(z).imag > 0)
    distances: Dict[int, Optional[mpf]] = {}
    nearest: Dict[int, Optional[mpc]] = {}
    prev = None
    for d in range(max(d_min, 1), d_max + 1):
        ints, even = _taylor_ints(series, d)
        key = tuple(ints)
        if key == prev:
            distances[d] = distances[d - 1]
            nearest[d] = nearest[d - 1]
            continue
        prev = key
        roots = _roots_validated(ints, even)
        if not roots:
            distances[d] = None
            nearest[d] = None
            continue
        worst = mpf(0)
        worst_root = None
        for zeta in planted:
            z, r = min(roots, key=lambda t: abs(t[0] - zeta))
            dist = abs(z - zeta) + r
            if validate:
                w = validate_root(ints, z, 256)
                if w is not None:
                    dist = abs(w.root - zeta) + w.radius * 2
                    z = w.root
            if dist >= worst:
                worst, worst_root = dist, z
        distances[d] = worst
        nearest[d] = worst_root
    return DetectionProfile(planted, distances, nearest)


def taylor_detection(series: CoeffSeries, planted: Sequence, epsilon=mpf("0.5"), d_max: int = 200,
                     d_min: int = 1) -> Optional[int]:
    """Smallest d whose Taylor truncation has a validated root within epsilon of
    every planted upper-half-plane zero."""
    return taylor_profile(series, planted, d_max, d_min).detect(epsilon)


EPSILON_GRID = (mpf("0.1"), mpf("0.25"), mpf("0.5"), mpf("1.0"), mpf("2.0"))


def epsilon_sweep(profiles: Dict[str, DetectionProfile], targets: Optional[Dict[str, int]] = None,
                  grid: Sequence = EPSILON_GRID) -> Dict[str, object]:
    """Detection thresholds per epsilon and, when targets are given, the grid values
    reproducing all of them, plus the exact epsilon interval each target allows."""
    table = {str(e): {k: p.detect(e) for k, p in profiles.items()} for e in grid}
    out: Dict[str, object] = {"table": table}
    if targets:
        matches = [str(e) for e in grid if all(table[str(e)][k] == v for k, v in targets.items())]
        out["matching"] = matches
        intervals = {}
        for k, v in targets.items():
            prof = profiles[k]
            dist_v = prof.distances.get(v)
            earlier = [prof.distances[d] for d in prof.distances if d < v and prof.distances[d] is not None]
            lo = dist_v
            hi = min(earlier) if earlier else None
            intervals[k] = (lo, hi)
        out["intervals"] = intervals
        lo_all = max((iv[0] for iv in intervals.values() if iv[0] is not None), default=None)
        hi_all = min((iv[1] for iv in intervals.values() if iv[1] is not None), default=None)
        out["common_interval"] = (lo_all, hi_all)
        out["single_epsilon_exists"] = (lo_all is not None and (hi_all is None or lo_all < hi_all))
    return out


__all__ = [
    "CertifyBudget", "DetectionProfile", "EPSILON_GRID", "HYPERBOLIC", "HyperbolicityVerdict",
    "NOT_HYPERBOLIC", "SeriesSource", "SpacingStats", "ThresholdResult", "UNDECIDED", "Witness",
    "ZeroList", "certify", "epsilon_sweep", "first_real_count", "jensen_threshold", "krawczyk",
    "real_root_count", "series_source", "spacing_of", "spacing_stats", "taylor_detection",
    "taylor_profile", "validate_root", "winding_number", "witness", "zeros_window",
    "zeros_window_poly",
]
