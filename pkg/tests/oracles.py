"""Planted-root polynomial generator shared by the certifier tests."""
import random
from fractions import Fraction

from mpmath import mpc

from jensenlab.hyperbolicity import HYPERBOLIC, NOT_HYPERBOLIC, certify
from jensenlab.jensen import RealPolynomial


def random_real_roots(rng, count):
    return [Fraction(rng.randint(-4000, 4000), rng.randint(1, 400)) for _ in range(count)]


def pair_factor(a: Fraction, b: Fraction):
    # (x - a)^2 + b^2
    return RealPolynomial((a * a + b * b, -2 * a, Fraction(1)))


def run_oracle_suite(instances=1000, seed=20240517, max_degree=30):
    """Returns a dict of counters plus the list of failure descriptions."""
    rng = random.Random(seed)
    failures = []
    stats = {"hyperbolic": 0, "flipped": 0, "derivatives": 0}
    for i in range(instances):
        degree = rng.randint(1, max_degree)
        roots = random_real_roots(rng, degree)
        p = RealPolynomial.from_roots(roots, lead=Fraction(rng.choice([-3, -1, 1, 2, 5])))
        v = certify(p)
        if v.outcome != HYPERBOLIC:
            failures.append(f"#{i} planted real roots: {v.outcome}")
            continue
        stats["hyperbolic"] += 1
        dp = p.derivative()
        if dp.degree >= 1:
            dv = certify(dp)
            stats["derivatives"] += 1
            if dv.outcome != HYPERBOLIC:
                failures.append(f"#{i} derivative: {dv.outcome}")
        if degree + 2 > max_degree:
            roots = roots[: max_degree - 2]
            p = RealPolynomial.from_roots(roots)
        a = Fraction(rng.randint(-2000, 2000), rng.randint(1, 200))
        b = Fraction(rng.randint(1, 5000), 1000)
        q = p * pair_factor(a, b)
        w = certify(q)
        target = mpc(float(a), float(b))
        if w.outcome != NOT_HYPERBOLIC or w.witness is None:
            failures.append(f"#{i} planted pair {a}+-{b}i: {w.outcome}")
            continue
        z = w.witness.root
        z = mpc(z.real, abs(z.imag))
        if abs(z - target) > 1e-2:
            failures.append(f"#{i} witness {z} not within 1e-2 of {target}")
            continue
        stats["flipped"] += 1
    return stats, failures
