"""Riemann xi engine: the theta-series kernel, its even moments, and the
heat-flow deformation.

With the kernel

    Phi(u) = sum_{m>=1} (4 pi^2 m^4 e^(9u/2) - 6 pi m^2 e^(5u/2)) exp(-pi m^2 e^(2u))

one has ``xi(1/2 + z) = int_R Phi(u) e^(zu) du``, so ``alpha(2n)`` of
``xi(1/2 + z)`` is the moment ``M_n = 2 int_0^inf Phi(u) u^(2n) du``.  The
deformed family multiplies the kernel by ``exp(t u^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

import mpmath
from mpmath import mp, mpf
from mpmath.calculus.quadrature import GaussLegendre

from .numerics import PrecisionExhausted, SignedLogReal, check_prec
from .series import CoeffSeries, FunctionId

PANEL_WIDTH = Fraction(1, 4)
MIN_LEVEL = 3
MAX_LEVEL = 9


# ---------------------------------------------------------------------------
# kernel


def _phi_raw(u: mpf, prec: int) -> mpf:
    """Kernel sum at the current working precision, u >= 0."""
    pi = mp.pi
    e2 = mpmath.exp(2 * u)
    e45 = mpmath.exp(mpf(9) * u / 2)
    e25 = mpmath.exp(mpf(5) * u / 2)
    total = mpf(0)
    tol = mpf(2) ** (-prec - 10)
    prev = None
    m = 1
    while True:
        m2 = m * m
        term = (4 * pi * pi * m2 * m2 * e45 - 6 * pi * m2 * e25) * mpmath.exp(-pi * m2 * e2)
        total += term
        # terms are positive and fall off faster than geometrically once the ratio is < 1/2
        if prev is not None and term <= tol * total and term <= prev / 2:
            return total
        prev = term
        m += 1


def phi(u, prec: int = 128) -> mpf:
    """Theta-series kernel Phi(u) (even in u), relative error about 2^-(prec+10)."""
    check_prec(prec)
    with mp.workprec(prec + 20):
        u = abs(mpf(u))
        v = _phi_raw(u, prec)
    with mp.workprec(prec):
        return +v


# ---------------------------------------------------------------------------
# quadrature layout


def _log_integrand_bound(u: float, n: int, t: float) -> float:
    """Natural log of an upper bound for e^(t u^2) Phi(u) u^(2n) (m = 1 term, 10% slack)."""
    lu = math.log(u) if u > 0 else -math.inf
    return (t * u * u + 2 * n * lu + math.log(4 * math.pi ** 2) + 4.5 * u
            - math.pi * math.exp(2 * u) + math.log(1.1))


def _peak_log(n: int, t: float) -> float:
    grid = [0.005 * k for k in range(1, 1200)]
    return max(_log_integrand_bound(u, n, t) for u in grid)


def upper_cutoff(n: int, t: float, prec: int) -> Fraction:
    """Smallest quarter-integer U with the integrand below 2^-(prec+10) of its peak."""
    target = _peak_log(n, t) - (prec + 10) * math.log(2) - 8
    # the bound is unimodal: rises to its peak, then falls doubly exponentially
    lo = max((0.005 * k for k in range(1, 1200)), key=lambda u: _log_integrand_bound(u, n, t))
    hi = lo + 0.25
    while _log_integrand_bound(hi, n, t) > target:
        hi += 0.25
    for _ in range(80):
        mid = (lo + hi) / 2
        if _log_integrand_bound(mid, n, t) > target:
            lo = mid
        else:
            hi = mid
    return Fraction(math.ceil(hi * 4), 4)


def _tail_bound(U: Fraction, n: int, t: float) -> float:
    """Bound for 2 * int_U^inf e^(t u^2) Phi(u) u^(2n) du (natural log)."""
    u = float(U)
    kappa = 2 * math.pi * math.exp(2 * u) - 2 * t * u - 2 * n / u - 4.5
    if kappa <= 0:
        return math.inf
    return _log_integrand_bound(u, n, t) - math.log(kappa) + math.log(2)


@lru_cache(maxsize=32)
def _gl_nodes(level: int, prec: int) -> Tuple[Tuple[mpf, mpf], ...]:
    with mp.workprec(prec):
        return tuple(GaussLegendre(mp).calc_nodes(level, prec))


@dataclass
class _NodeSet:
    level: int
    points: List[mpf]
    weights: List[mpf]  # already scaled to the panel
    kernel: List[mpf]


def _node_set(level: int, U: Fraction, wp: int) -> _NodeSet:
    base = _gl_nodes(level, wp)
    pts, wts, ker = [], [], []
    panels = int(U / PANEL_WIDTH)
    with mp.workprec(wp):
        half = mpf(PANEL_WIDTH.numerator) / PANEL_WIDTH.denominator / 2
        for k in range(panels):
            c = (2 * k + 1) * half
            for x, w in base:
                u = c + half * x
                pts.append(u)
                wts.append(w * half)
                ker.append(_phi_raw(u, wp))
    return _NodeSet(level, pts, wts, ker)


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentTable:
    """gamma(n) of xi(1/2 + z) (or its deformation) with quadrature metadata.

    ``moments[n]`` holds ``M_n = alpha(2n)``; ``entries[n]`` holds
    ``gamma(n) = M_n n!/(2n)!``.  Both map to ``(value, absolute error)``.
    """

    t: Fraction
    prec: int
    moments: Dict[int, Tuple[mpf, mpf]]
    entries: Dict[int, Tuple[mpf, mpf]]
    nodes: int
    level: int
    panels: int
    cutoff: Fraction
    exhausted: bool = False
    meta: Dict[str, str] = field(default_factory=dict)

    def gamma(self, n: int) -> mpf:
        return self.entries[n][0]

    def slr(self, n: int) -> SignedLogReal:
        return SignedLogReal.from_value(self.entries[n][0], self.prec)

    @property
    def n_max(self) -> int:
        return max(self.entries)

    def function_id(self) -> FunctionId:
        return FunctionId.xi() if self.t == 0 else FunctionId.dbnxi(self.t)

    def to_series(self, convention: str = "jensen") -> CoeffSeries:
        if convention == "jensen":
            entries = dict(self.entries)
        else:
            entries = {}
            with mp.workprec(self.prec):
                for n, (m, e) in self.moments.items():
                    f = 1 / mpmath.factorial(2 * n)
                    entries[n] = (m * f, e * f)
        meta = {"nodes": str(self.nodes), "level": str(self.level), "cutoff": str(self.cutoff),
                "panels": str(self.panels)}
        return CoeffSeries(self.function_id(), "gamma", entries, "quadrature", self.prec,
                           convention, None, meta)

    def alpha_series(self) -> CoeffSeries:
        """alpha(k) for 0 <= k <= 2 n_max (odd entries zero)."""
        entries = {}
        for k in range(2 * self.n_max + 1):
            entries[k] = self.moments[k // 2] if k % 2 == 0 else (mpf(0), mpf(0))
        return CoeffSeries(self.function_id(), "alpha", entries, "quadrature", self.prec)


    def alpha_series_window(self, lo: int, hi: int) -> CoeffSeries:
        """alpha(lo..hi) from the moments held by this table."""
        entries = {k: (self.moments[k // 2] if k % 2 == 0 else (mpf(0), mpf(0))) for k in range(lo, hi + 1)}
        return CoeffSeries(self.function_id(), "alpha", entries, "quadrature", self.prec)


def _moments_at(ns: _NodeSet, n_max: int, t: mpf, wp: int, n_min: int = 0) -> List[mpf]:
    with mp.workprec(wp):
        sums = [mpf(0)] * (n_max - n_min + 1)
        for u, w, k in zip(ns.points, ns.weights, ns.kernel):
            base = w * k
            if t:
                base *= mpmath.exp(t * u * u)
            u2 = u * u
            acc = base * u2 ** n_min if n_min else base
            for n in range(n_max - n_min + 1):
                sums[n] += acc
                acc *= u2
        return [2 * s for s in sums]


def _moment_table(t: Fraction, n_max: int, prec: int, n_min: int = 0) -> MomentTable:
    check_prec(prec)
    if n_max < n_min or n_min < 0:
        raise ValueError("need 0 <= n_min <= n_max")
    tf = float(t)
    U = max(upper_cutoff(n, tf, prec) for n in (n_min, n_max))
    wp = prec + 32 + n_max.bit_length()
    with mp.workprec(wp):
        tm = mpf(t.numerator) / t.denominator
    prev = None
    level = MIN_LEVEL
    exhausted = False
    while True:
        ns = _node_set(level, U, wp)
        cur = _moments_at(ns, n_max, tm, wp, n_min)
        if prev is not None:
            with mp.workprec(wp):
                diffs = [abs(a - b) for a, b in zip(cur, prev)]
                rel = max(d / c for d, c in zip(diffs, cur))
            if rel < mpf(2) ** (-prec - 4):
                break
            if level >= MAX_LEVEL:
                exhausted = True
                break
        prev = cur
        level += 1
    moments: Dict[int, Tuple[mpf, mpf]] = {}
    entries: Dict[int, Tuple[mpf, mpf]] = {}
    with mp.workprec(wp):
        for i, n in enumerate(range(n_min, n_max + 1)):
            tail = mpmath.exp(_tail_bound(U, n, tf))
            err = diffs[i] + tail + abs(cur[i]) * mpf(2) ** (-prec)
            moments[n] = (cur[i], err)
            f = mpmath.factorial(n) / mpmath.factorial(2 * n)
            entries[n] = (cur[i] * f, err * f)
    with mp.workprec(prec):
        moments = {n: (+v, +e) for n, (v, e) in moments.items()}
        entries = {n: (+v, +e) for n, (v, e) in entries.items()}
    table = MomentTable(t, prec, moments, entries, len(ns.points), level,
                        int(U / PANEL_WIDTH), U, exhausted)
    if exhausted:
        raise PrecisionExhausted(f"quadrature did not converge by level {MAX_LEVEL}")
    return table


def xi_even_gamma(n_max: int, prec: int = 256) -> MomentTable:
    """gamma(0..n_max) of xi(1/2 + z) from kernel moments."""
    if prec < 128:
        raise ValueError("xi moments need at least 128 bits")
    return _moment_table(Fraction(0), n_max, prec)


def xi_gamma_window(n_min: int, n_max: int, t=0, prec: int = 256) -> MomentTable:
    """gamma(n_min..n_max) only, for large shifts where the full table is wasteful."""
    t = Fraction(str(t)) if isinstance(t, float) else Fraction(t)
    if prec < 128:
        raise ValueError("xi moments need at least 128 bits")
    return _moment_table(t, n_max, prec, n_min)


def dbn_gamma(t, n_max: int, prec: int = 256) -> MomentTable:
    """gamma(0..n_max) of the deformation with kernel exp(t u^2) Phi(u)."""
    t = Fraction(str(t)) if isinstance(t, float) else Fraction(t)
    if not 0 < t <= 1:
        raise ValueError("deformation parameter must satisfy 0 < t <= 1")
    if prec < 128:
        raise ValueError("xi moments need at least 128 bits")
    return _moment_table(t, n_max, prec)


# ---------------------------------------------------------------------------
# direct evaluation


def xi_value(s, prec: int = 128):
    """Completed zeta xi(s) = s(s-1)/2 pi^(-s/2) Gamma(s/2) zeta(s)."""
    with mp.workprec(prec + 20):
        s = mpmath.mpmathify(s)
        if s == 1 or s == 0:
            v = mpf(1) / 2
        else:
            v = s * (s - 1) / 2 * mpmath.power(mp.pi, -s / 2) * mpmath.gamma(s / 2) * mpmath.zeta(s)
    with mp.workprec(prec):
        return +v


def xi_half_oracle(prec: int = 256) -> mpf:
    """xi(1/2) = -(1/8) pi^(-1/4) Gamma(1/4) zeta(1/2)."""
    with mp.workprec(prec + 20):
        v = -mpmath.power(mp.pi, mpf(-1) / 4) * mpmath.gamma(mpf(1) / 4) * mpmath.zeta(mpf(1) / 2) / 8
    with mp.workprec(prec):
        return +v


def xi_t_direct(x, t, prec: int = 128, level: int = 6) -> mpf:
    """Xi_t(x) = 2 int_0^inf exp(t u^2) Phi(u) cos(x u) du for real x, by the same
    panel quadrature (an independent route from the moment series)."""
    t = Fraction(str(t)) if isinstance(t, float) else Fraction(t)
    U = upper_cutoff(0, float(t), prec)
    wp = prec + 32
    ns = _node_set(level, U, wp)
    with mp.workprec(wp):
        x = mpf(x)
        tm = mpf(t.numerator) / t.denominator
        s = mpf(0)
        for u, w, k in zip(ns.points, ns.weights, ns.kernel):
            s += w * k * mpmath.exp(tm * u * u) * mpmath.cos(x * u)
        v = 2 * s
    with mp.workprec(prec):
        return +v


def _cosh_transform(R, t: Fraction, prec: int) -> mpf:
    """2 int_0^inf exp(t u^2) Phi(u) cosh(R u) du (the value at z = R of the deformed function)."""
    Rf = float(R)
    u = 1.0
    while math.pi * math.exp(2 * u) < Rf * u + (prec + 40) * math.log(2) + 10 * u + 50:
        u += 0.25
    U = Fraction(math.ceil(u * 4), 4)
    wp = prec + 32
    ns = _node_set(6, U, wp)
    with mp.workprec(wp):
        tm = mpf(t.numerator) / t.denominator
        s = mpf(0)
        for uu, w, k in zip(ns.points, ns.weights, ns.kernel):
            s += w * k * mpmath.exp(tm * uu * uu) * mpmath.cosh(R * uu)
        return 2 * s


def max_modulus_bound(function: FunctionId, radius) -> mpf:
    """Bound for |f| on |z| = radius, f(z) = xi(1/2 + z) or its deformation.
    All alpha are nonnegative, so the maximum sits at z = radius."""
    with mp.workprec(80):
        R = mpf(radius)
        if function.variant == "xi":
            v = xi_value(mpf(1) / 2 + R, 80)
        else:
            v = _cosh_transform(R, function.t, 80)
        return v * (1 + mpf(2) ** -20)


def make_evaluator(function: FunctionId, prec: int):
    """z -> f(z) with f(z) = xi(1/2 + z) (zeta route) or the deformed transform
    (quadrature route, real-axis-dominated arguments only)."""
    if function.variant == "xi":
        def f(z):
            return xi_value(mpf(1) / 2 + mpmath.mpmathify(z), prec)
        return f
    t = function.t
    U = upper_cutoff(0, float(t), prec) + 2

    def g(z):
        z = mpmath.mpmathify(z)
        wp = prec + 32
        Uz = U
        while math.pi * math.exp(2 * float(Uz)) < abs(float(mpmath.re(z))) * float(Uz) + (prec + 40) * 0.7 + 50:
            Uz += Fraction(1, 4)
        ns = _node_set(7, Uz, wp)
        with mp.workprec(wp):
            tm = mpf(t.numerator) / t.denominator
            s = mpmath.mpc(0)
            for u, w, k in zip(ns.points, ns.weights, ns.kernel):
                s += w * k * mpmath.exp(tm * u * u) * mpmath.cosh(z * u)
            v = 2 * s
        with mp.workprec(prec):
            return +v
    return g


__all__ = ["MomentTable", "dbn_gamma", "make_evaluator", "max_modulus_bound", "phi",
           "upper_cutoff", "xi_even_gamma", "xi_half_oracle", "xi_t_direct", "xi_value"]
