"""Taylor coefficients from contour integrals.

For an entire ``f`` and radius ``r`` the trapezoid rule on ``m`` equally
spaced nodes of ``|z| = r`` gives

    n! r^-n (1/m) sum_k f(r w^k) w^(-kn) = alpha(n) + n! sum_{l>=1} alpha(n+lm)/(n+lm)! r^(lm),

with ``w = exp(2 pi i/m)``.  The alias sum is bounded through a Cauchy
estimate ``|alpha(k)/k!| <= M(R)/R^k`` on a larger circle ``|z| = R``.

Sums are accumulated in fixed point: function values and the root table are
scaled to integers of ``prec`` bits, which keeps the multi-index inner loop
on Python integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath
from mpmath import mp, mpf

from .numerics import PrecisionExhausted, SignedLogReal, check_prec
from .series import (
    CoeffSeries,
    FunctionId,
    make_evaluator,
    max_modulus_bound,
    read_cache,
)

MAX_NODES = 2**21


@dataclass(frozen=True)
class ContourPlan:
    radius: Fraction
    nodes: int
    prec: int
    symmetry: int

    def __post_init__(self):
        if self.nodes % 2 or self.nodes < 4:
            raise ValueError("node count must be even and at least 4")
        if self.symmetry == 4 and self.nodes % 4:
            raise ValueError("fourfold symmetry needs a node count divisible by 4")
        if self.symmetry not in (1, 2, 4):
            raise ValueError("symmetry factor must be 1, 2 or 4")
        check_prec(self.prec)

    @property
    def evaluations(self) -> int:
        if self.symmetry == 4:
            return self.nodes // 4 + 1
        if self.symmetry == 2:
            return self.nodes // 2 + 1
        return self.nodes

    def doubled(self) -> "ContourPlan":
        return ContourPlan(self.radius, 2 * self.nodes, self.prec, self.symmetry)

    def describe(self) -> str:
        return f"r={self.radius} m={self.nodes} p={self.prec} sym={self.symmetry}"


def _symmetry_of(fid: FunctionId) -> int:
    if fid.is_even:
        return 4
    return 2  # every catalog function is real on the real axis


def _pow2_at_least(x: int) -> int:
    return 1 << max(0, (x - 1).bit_length())


def choose_plan(function: Union[FunctionId, str], n: int, target_digits: int = 20) -> ContourPlan:
    """Saddle radius r = n, m = smallest power of two >= 2n + 16*digits (floor 64)."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    if n < 0:
        raise ValueError("index must be nonnegative")
    if n == 0:
        radius, nodes = Fraction(1), 64
    else:
        radius = Fraction(n)
        nodes = max(64, _pow2_at_least(2 * n + 16 * target_digits))
    stirling = math.ceil(math.log2(math.sqrt(2 * math.pi * max(n, 1)) + 1))
    prec = math.ceil(3.33 * target_digits) + 64 + stirling
    return ContourPlan(radius, nodes, prec, _symmetry_of(fid))


# ---------------------------------------------------------------------------
# root table and node values


def _unit_roots(m: int, wp: int) -> Tuple[List[mpf], List[mpf]]:
    """cos and sin of 2 pi k/m for 0 <= k < m, using the eightfold symmetry of the circle."""
    cos = [mpf(0)] * m
    sin = [mpf(0)] * m
    with mp.workprec(wp):
        if m % 8 == 0:
            e = m // 8
            base = [(mpmath.cospi(mpf(2 * k) / m), mpmath.sinpi(mpf(2 * k) / m)) for k in range(e + 1)]
            q = m // 4
            for k in range(e + 1):
                c, s = base[k]
                for kk, cc, ss in ((k, c, s), (q - k, s, c)):
                    # first quadrant, then reflect into the others
                    cos[kk], sin[kk] = cc, ss
                    cos[(kk + q) % m], sin[(kk + q) % m] = -ss, cc
                    cos[(kk + 2 * q) % m], sin[(kk + 2 * q) % m] = -cc, -ss
                    cos[(kk + 3 * q) % m], sin[(kk + 3 * q) % m] = ss, -cc
        else:
            for k in range(m):
                cos[k] = mpmath.cospi(mpf(2 * k) / m)
                sin[k] = mpmath.sinpi(mpf(2 * k) / m)
    return cos, sin


def _node_values(evaluator, radius: mpf, cos: Sequence[mpf], sin: Sequence[mpf], ks: Iterable[int]) -> Dict[int, mpmath.mpc]:
    out = {}
    for k in ks:
        out[k] = evaluator(mpmath.mpc(radius * cos[k], radius * sin[k]))
    return out


def _to_fixed(x: mpf, shift: int) -> int:
    return int(mpmath.nint(mpmath.ldexp(x, shift)))


# ---------------------------------------------------------------------------
# bounds


def _log_fact(n: int) -> float:
    return math.lgamma(n + 1)


def _max_modulus(fid: FunctionId, radius) -> mpf:
    if fid.variant in ("xi", "dbnxi"):
        from . import xi as _xi
        return _xi.max_modulus_bound(fid, radius)
    return max_modulus_bound(fid, radius)


def _polynomial_degree(fid: FunctionId) -> Optional[int]:
    if fid.variant != "user":
        return None
    s = read_cache(fid.source)
    nz = [n for n, (v, e) in s.entries.items() if v != 0 or e != 0]
    return max(nz) if nz else 0


def aliasing_bound(function: Union[FunctionId, str], n: int, plan: ContourPlan) -> mpf:
    """Bound on |computed alpha(n) - alpha(n)| from aliased higher coefficients."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    m = plan.nodes
    deg = _polynomial_degree(fid)
    if deg is not None and n + m > deg:
        return mpf(0)
    with mp.workprec(64):
        r = mpf(plan.radius.numerator) / plan.radius.denominator
        best = None
        for R in (r * 2, mpf(n + m), mpf(n + m) * 2, r + 1):
            if R <= r:
                continue
            try:
                M = _max_modulus(fid, R)
            except ValueError:
                continue
            rho_m = (r / R) ** m
            b = mpmath.exp(mpmath.loggamma(n + 1)) * M * R ** (-n) * rho_m / (1 - rho_m)
            best = b if best is None else min(best, b)
        if best is None:
            raise PrecisionExhausted("no admissible comparison radius for the aliasing bound")
        return best


def _evaluation_bound(fid: FunctionId, n: int, plan: ContourPlan, Mr: mpf) -> mpf:
    """Propagated rounding: node values carry relative error 2^(-prec); fixed-point sums add m ulps."""
    with mp.workprec(64):
        r = mpf(plan.radius.numerator) / plan.radius.denominator
        scale = mpmath.exp(mpmath.loggamma(n + 1)) * r ** (-n) if n else mpf(1)
        return scale * Mr * mpf(2) ** (12 - plan.prec) * (1 + mpf(plan.nodes) * mpf(2) ** (-plan.prec))


# ---------------------------------------------------------------------------
# extraction


@dataclass(frozen=True)
class ContourResult:
    value: mpf
    error: mpf
    plan: ContourPlan
    aliasing: mpf


def _extract(fid: FunctionId, ns: Sequence[int], plan: ContourPlan) -> Dict[int, ContourResult]:
    m, p, sym = plan.nodes, plan.prec, plan.symmetry
    if any(n >= m for n in ns):
        raise ValueError("every index must be below the node count")
    wp = p + 24
    evaluator = make_evaluator(fid, wp)
    cos, sin = _unit_roots(m, wp)
    if sym == 4:
        ks = range(m // 4 + 1)
    elif sym == 2:
        ks = range(m // 2 + 1)
    else:
        ks = range(m)
    with mp.workprec(wp):
        r = mpf(plan.radius.numerator) / plan.radius.denominator
        vals = _node_values(evaluator, r, cos, sin, ks)
        top = max(max(abs(v.real), abs(v.imag)) for v in vals.values())
        if top == 0:
            top = mpf(1)
        e_top = int(mpmath.floor(mpmath.log(top, 2))) + 1
        shift = wp - e_top
        re = {k: _to_fixed(v.real, shift) for k, v in vals.items()}
        im = {k: _to_fixed(v.imag, shift) for k, v in vals.items()}
        ci = [_to_fixed(c, wp) for c in cos]
        si = [_to_fixed(s, wp) for s in sin]
        Mr = mpf(2) ** e_top * 2

    out: Dict[int, ContourResult] = {}
    for n in ns:
        if sym == 4 and n % 2:
            out[n] = ContourResult(mpf(0), mpf(0), plan, mpf(0))
            continue
        acc = 0
        if sym == 4:
            q = m // 4
            acc = (re[0] << wp)
            t = (q * n) % m
            acc += re[q] * ci[t] + im[q] * si[t]
            inner = 0
            for k in range(1, q):
                t = (k * n) % m
                inner += re[k] * ci[t] + im[k] * si[t]
            acc = 2 * (acc + 2 * inner)
        elif sym == 2:
            h = m // 2
            acc = re[0] << wp
            acc += (re[h] << wp) * (1 if n % 2 == 0 else -1)
            inner = 0
            for k in range(1, h):
                t = (k * n) % m
                inner += re[k] * ci[t] + im[k] * si[t]
            acc += 2 * inner
        else:
            for k in range(m):
                t = (k * n) % m
                acc += re[k] * ci[t] + im[k] * si[t]
        with mp.workprec(wp):
            total = mpmath.ldexp(mpf(acc), -(shift + wp)) / m
            if n:
                total = total * mpmath.exp(mpmath.loggamma(n + 1) - n * mpmath.log(r))
        with mp.workprec(p):
            value = +total
        alias = aliasing_bound(fid, n, plan)
        err = alias + _evaluation_bound(fid, n, plan, Mr)
        out[n] = ContourResult(value, err, plan, alias)
    return out


def cauchy_alpha(function: Union[FunctionId, str], n: int, plan: Optional[ContourPlan] = None,
                 target_digits: int = 20, max_nodes: int = MAX_NODES) -> Tuple[SignedLogReal, mpf]:
    """alpha(n) by contour extraction, doubling the node count until the
    aliasing bound is below the target relative to the extracted value."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    plan = plan or choose_plan(fid, n, target_digits)
    while True:
        res = _extract(fid, [n], plan)[n]
        if res.value == 0 and res.aliasing == 0:
            return SignedLogReal.zero(plan.prec), res.error
        target = abs(res.value) * mpf(10) ** (-target_digits)
        if res.aliasing <= target or (res.value == 0 and res.aliasing == 0):
            return SignedLogReal.from_value(res.value, plan.prec), res.error
        if plan.nodes * 2 > max_nodes:
            raise PrecisionExhausted(f"aliasing bound {mpmath.nstr(res.aliasing, 3)} above target at {plan.describe()}")
        plan = plan.doubled()


def _block_plan(fid: FunctionId, lo: int, hi: int, digits: int) -> ContourPlan:
    r = max(lo, 1)
    nodes = max(64, _pow2_at_least(2 * hi + 16 * digits))
    # bits lost to cancellation: n! M(r) / r^n relative to an O(1/n) coefficient
    with mp.workprec(64):
        logM = float(mpmath.log(_max_modulus(fid, r), 2))
    loss = max(0.0, max(_log_fact(n) / math.log(2) - n * math.log2(r) for n in (lo, hi)) + logM)
    prec = math.ceil(3.33 * digits) + 64 + math.ceil(loss) + 2 * max(hi, 2).bit_length()
    return ContourPlan(Fraction(r), nodes, prec, _symmetry_of(fid))


def contour_series(function: Union[FunctionId, str], lo: int, hi: int, target_digits: int = 20,
                   growth: float = 1.25) -> CoeffSeries:
    """alpha(lo..hi) by contour extraction.  Indices are grouped into blocks
    [r, growth*r] that share one circle of radius r and one root table."""
    fid = FunctionId.parse(function) if isinstance(function, str) else function
    entries: Dict[int, Tuple[mpf, mpf]] = {}
    plans: List[str] = []
    n = lo
    prec_max = 0
    while n <= hi:
        if n == 0:
            block = [0]
            plan = choose_plan(fid, 0, target_digits)
        else:
            top = min(hi, max(n, int(n * growth)))
            block = list(range(n, top + 1))
            plan = _block_plan(fid, n, top, target_digits)
        while True:
            res = _extract(fid, block, plan)
            bad = [k for k in block if res[k].aliasing > abs(res[k].value) * mpf(10) ** (-target_digits)
                   and res[k].aliasing > 0]
            if not bad:
                break
            if plan.nodes * 2 > MAX_NODES:
                raise PrecisionExhausted(f"aliasing bound above target for indices {bad[:3]}...")
            plan = plan.doubled()
        for k in block:
            entries[k] = (res[k].value, res[k].error)
        plans.append(plan.describe())
        prec_max = max(prec_max, plan.prec)
        n = block[-1] + 1
    digits_prec = math.ceil(3.33 * target_digits) + 64
    return CoeffSeries(fid, "alpha", entries, "contour", max(digits_prec, 64),
                       meta={"plans": "; ".join(plans[-3:]), "blocks": str(len(plans))})


__all__ = ["ContourPlan", "ContourResult", "aliasing_bound", "cauchy_alpha", "choose_plan",
           "contour_series"]
