"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line and the
session summary lists them all.  Tolerances are pinned below."""
import csv
import math
import time
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from conftest import record_criterion
from jensenlab.cli import EXIT_OK, dbn_zeros, main, reference_values, read_manifests
from jensenlab.hyperbolicity import HYPERBOLIC, certify, spacing_stats, ZeroList
from jensenlab.jensen import (
    JensenSpec,
    build,
    convergence_report,
    cosine_closed_form,
    loglog_slope,
)
from jensenlab.series import coeff_alpha, constant_gamma
from jensenlab.xi import xi_even_gamma, xi_half_oracle

from oracles import run_oracle_suite

PRINTED = reference_values()

# pinned tolerances
ALPHA_DIGITS = 25
ALPHA_RUNTIME_S = 120
ABC_DIGITS = 20
X10_VECTOR_TOL = mpf("5e-3")
SINC_VECTOR_TOL = mpf("5e-4")
RATE_SLOPE = (-0.65, -0.35)
XI_ANCHOR_DIGITS = 30
ORACLE_INSTANCES = 1000
DUAL_ENGINE_MAX_N = 1000


def cli(out, *argv):
    return main(["--out", str(out), "--quiet", *argv])


def manifest(out):
    return read_manifests(out / "manifest.log")[-1]


def test_criterion_01_deep_shift_coefficients():
    t0 = time.perf_counter()
    series = coeff_alpha("xfamily:10", 100000, 100012, prec=192)
    elapsed = time.perf_counter() - t0
    worst = None
    ok = True
    with mp.workprec(192):
        for key, text in PRINTED["table2_alpha"]["values"].items():
            printed = mpf(text)
            ours = series.value(int(key))
            # agreement to ALPHA_DIGITS significant digits, allowing trailing-digit rounding
            rel = abs(ours - printed) / abs(printed)
            worst = rel if worst is None else max(worst, rel)
            ok &= rel <= mpf(10) ** (1 - ALPHA_DIGITS) / 2
    ok &= elapsed <= ALPHA_RUNTIME_S
    digits = float(-mp.log10(worst)) if worst else float("inf")
    record_criterion(1, "X10 alpha(n), n = 100000..100012, >= 25 digits", ok,
                     f"worst relative difference {float(worst):.2e} (~{digits:.1f} digits), {elapsed:.1f} s")
    assert ok


@pytest.fixture(scope="module")
def section5_x10(tmp_path_factory):
    out = tmp_path_factory.mktemp("section5_x10")
    code = cli(out, "section5", "--target", "x10")
    text = (out / "section5_x10_d6_n50000.txt").read_text()
    return code, text, manifest(out)


@pytest.fixture(scope="module")
def section5_sinc(tmp_path_factory):
    out = tmp_path_factory.mktemp("section5_sinc")
    code = cli(out, "section5", "--target", "sinc")
    text = (out / "section5_sinc_d6_n5000000.txt").read_text()
    return code, text, manifest(out)


def _report_fields(text):
    fields = {}
    for line in text.splitlines():
        key, _, val = line.partition(": ")
        fields[key] = val
    return fields


def _vector(fields, d=6):
    return [mpf(fields[f"c{k}"].split()[0]) for k in range(d + 1)]


def test_criterion_02_normalization_constants(section5_x10):
    code, text, rec = section5_x10
    fields = _report_fields(text)
    digits = {kv.split("=")[0]: float(kv.split("=")[1]) for kv in fields["abc_matching_digits"].split(", ")}
    direct = all(v >= ABC_DIGITS for v in digits.values())
    vector_ok = fields.get("vector_within_tolerance") == "true"
    mismatch_recorded = any("A/B/C differ" in d for d in rec.get("discrepancy", []))
    if direct:
        ok, how = True, "A, B, C reproduced"
    else:
        # fallback route: vector agreement plus a recorded mismatch, never a silent pass
        ok = vector_ok and mismatch_recorded and code == EXIT_OK
        how = (f"A/B/C mismatch ({', '.join(f'{k}: {v:.1f} digits' for k, v in digits.items())}); "
               f"vector agreement {vector_ok}; mismatch recorded in manifest {mismatch_recorded}")
    record_criterion(2, "pinned normalization constants (or recorded fallback)", ok, how)
    assert ok


def test_criterion_03_coefficient_vectors(section5_x10, section5_sinc):
    details = []
    ok = True
    for name, (code, text, _), key, tol in (("X10", section5_x10, "section5_x10", X10_VECTOR_TOL),
                                            ("sinc", section5_sinc, "section5_sinc", SINC_VECTOR_TOL)):
        vec = _vector(_report_fields(text))
        printed = [mpf(v) for v in PRINTED[key]["vector"]]
        worst = max(abs(a - b) for a, b in zip(vec, printed))
        exact = vec[0] == -120 and vec[5] == 0 and vec[6] == 1
        ok &= worst <= tol and exact and code == EXIT_OK
        details.append(f"{name} max delta {float(worst):.2e} (tol {float(tol):g}), pinned entries exact {exact}")
    record_criterion(3, "normalized coefficient vectors", ok, "; ".join(details))
    assert ok


@pytest.fixture(scope="module")
def table1_fast(tmp_path_factory):
    out = tmp_path_factory.mktemp("table1")
    code = cli(out, "table1", "--j", "10", "20")
    rows = list(csv.DictReader((out / "table1.csv").open()))
    return code, rows, manifest(out)


def _row(rows, j, rule):
    return next(r for r in rows if r["j"] == str(j) and r["rule"] == rule)


def test_criterion_04_table_thresholds(table1_fast):
    code, rows, rec = table1_fast
    expected = PRINTED["table1"]
    r10 = _row(rows, 10, "documented")
    r20 = _row(rows, 20, "documented")
    r20_alt = _row(rows, 20, "alternate")
    jensen_ok = (r10["jensen_threshold"] == str(expected["jensen_threshold"]["10"]) and
                 r20["jensen_threshold"] == str(expected["jensen_threshold"]["20"]))
    taylor_ok = (r10["taylor_detection"] == str(expected["taylor_detection"]["10"]) and
                 r20["taylor_detection"] == str(expected["taylor_detection"]["20"]))
    single_eps = not any("no single epsilon" in d for d in rec.get("discrepancy", []))
    ok = jensen_ok and taylor_ok and single_eps and code == EXIT_OK
    detail = (f"jensen j=10 {r10['jensen_threshold']} (printed 118), j=20 {r20['jensen_threshold']} "
              f"(printed 749; alternate removal {r20_alt['removed_pair']} gives {r20_alt['jensen_threshold']}); "
              f"taylor j=10 {r10['taylor_detection']}, j=20 {r20['taylor_detection']} "
              f"(alternate {r20_alt['taylor_detection']}) at epsilon {rec['config.epsilon'][0]}; "
              f"sweep matching grid values {rec['config.epsilon_sweep_matching'][0]}, "
              f"common interval {rec['config.epsilon_common_interval'][0]}; single epsilon exists {single_eps}")
    record_criterion(4, "threshold table, fast rows", ok, detail)
    assert ok


@pytest.mark.deep
def test_criterion_04_deep_rows(tmp_path):
    code = cli(tmp_path, "table1", "--j", "40", "60", "--deep")
    rows = list(csv.DictReader((tmp_path / "table1.csv").open()))
    rec = manifest(tmp_path)
    expected = PRINTED["table1"]
    ok = code == EXIT_OK
    parts = []
    for j in (40, 60):
        r = _row(rows, j, "documented")
        ok &= r["jensen_threshold"] == str(expected["jensen_threshold"][str(j)])
        ok &= r["taylor_detection"] == str(expected["taylor_detection"][str(j)])
        parts.append(f"j={j} jensen {r['jensen_threshold']} taylor {r['taylor_detection']}")
    ok &= not any("no single epsilon" in d for d in rec.get("discrepancy", []))
    record_criterion(4, "threshold table, deep rows", ok, "; ".join(parts))
    assert ok


def test_criterion_05_first_real_counts(table1_fast):
    from jensenlab.hyperbolicity import first_real_count
    _, rows, rec = table1_fast
    counts = {j: first_real_count(j) for j in (10, 40, 60)}
    exact = counts == {10: 2, 40: 12, 60: 18}
    r20 = _row(rows, 20, "documented")
    flagged = any("first_real_count" in d and d.startswith("j=20") for d in rec.get("discrepancy", []))
    flag_expected = r20["first_real_count"] != "4"
    ok = exact and bool(r20["first_real_count"]) and (flagged == flag_expected)
    record_criterion(5, "first real zero counts", ok,
                     f"j=10 {counts[10]}, j=40 {counts[40]}, j=60 {counts[60]}; "
                     f"j=20 computed {r20['first_real_count']} (printed 4), discrepancy flagged {flagged}")
    assert ok


def test_criterion_06_cosine_closed_form():
    bad = [d for d in range(51)
           if build(coeff_alpha("cos", 0, d), JensenSpec(d, 0, "classical")).coeffs != cosine_closed_form(d).coeffs]
    record_criterion(6, "cosine Jensen polynomials equal the closed form, d <= 50", not bad,
                     f"mismatching degrees {bad}" if bad else "exact rational equality")
    assert not bad


def test_criterion_07_hermite_rate():
    rows = convergence_report("sinc", 6, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6], "hermite", orientation=-1)
    dists = [r.distance for r in rows]
    decreasing = all(d is not None for d in dists) and all(a > b for a, b in zip(dists, dists[1:]))
    slope = loglog_slope(rows) if decreasing else float("nan")
    ok = decreasing and RATE_SLOPE[0] <= slope <= RATE_SLOPE[1]
    record_criterion(7, "sinc Hermite-mode distances decay like a power law", ok,
                     f"distances {[float(d) for d in dists]}, log-log slope {slope:.4f}")
    assert ok


def test_criterion_08_binomial_fixed_point_and_trend():
    ones = constant_gamma(0, 60)
    fixed = all(r.distance == 0 for d in range(1, 31)
                for r in convergence_report(ones, d, [0, 7, 30], "binomial"))
    fixed &= all(build(ones, JensenSpec(d, 5, "even")).coeffs ==
                 tuple(Fraction(math.comb(d, k)) for k in range(d + 1)) for d in range(31))
    rows = convergence_report("xfamily:10", 3, [10 ** 2, 10 ** 3, 10 ** 4], "binomial")
    dists = [r.distance for r in rows]
    trend = all(a > b for a, b in zip(dists, dists[1:]))
    ok = fixed and trend
    record_criterion(8, "binomial fixed point and X10 trend", ok,
                     f"constant series distance zero {fixed}; X10 d=3 distances {[float(d) for d in dists]}")
    assert ok


def test_criterion_09_xi_anchor():
    table = xi_even_gamma(52, prec=256)
    with mp.workprec(256):
        anchor = abs(table.gamma(0) / xi_half_oracle(256) - 1)
        anchor_ok = anchor < mpf(10) ** -XI_ANCHOR_DIGITS
        turan = [n for n in range(51) if table.gamma(n + 1) ** 2 < table.gamma(n) * table.gamma(n + 2)]
    series = table.to_series()
    failing = [n for n in range(51) if certify(build(series, JensenSpec(2, n, "even"))).outcome != HYPERBOLIC]
    ok = anchor_ok and not turan and not failing
    record_criterion(9, "xi moment engine anchor, Turan inequalities, degree-2 hyperbolicity", ok,
                     f"gamma(0) relative error {float(anchor):.1e}; Turan violations {turan}; "
                     f"non-hyperbolic shifts {failing}")
    assert ok


def test_criterion_10_heat_flow_spacing():
    stats = {}
    complete = True
    for t in ("0.2", "0"):
        zl = dbn_zeros(t, 10)
        complete &= zl.complete and len(zl.zeros) >= 10
        stats[t] = spacing_stats(ZeroList(zl.window, tuple(zl.zeros[:10]), zl.complete))
    v02, v0 = stats["0.2"].normalized_variance, stats["0"].normalized_variance
    ok = complete and v02 < v0
    record_criterion(10, "gap variance of the first 10 zeros shrinks under the heat flow", ok,
                     f"t=0.2 {float(v02):.6f} vs t=0 {float(v0):.6f}; complete zero lists {complete}")
    assert ok


def test_criterion_11_certifier_oracles():
    stats, failures = run_oracle_suite(instances=ORACLE_INSTANCES)
    ok = not failures and stats["hyperbolic"] == ORACLE_INSTANCES and stats["flipped"] == ORACLE_INSTANCES
    record_criterion(11, "planted-root certifier oracles and derivative closure", ok,
                     f"{stats['hyperbolic']} hyperbolic, {stats['flipped']} flipped with witness, "
                     f"{stats['derivatives']} derivatives hyperbolic; errors {failures[:3]}")
    assert ok


@pytest.mark.parametrize("function", ["cos", "sinc", "xfamily:10"])
def test_criterion_12_dual_engine_agreement(tmp_path, function):
    code = cli(tmp_path, "coeffs", "--function", function, "--range", f"0:{DUAL_ENGINE_MAX_N}",
               "--engine", "both", "--precision", "128")
    slug = function.replace(":", "_")
    rows = list(csv.DictReader((tmp_path / f"agreement_{slug}_alpha_0_{DUAL_ENGINE_MAX_N}.csv").open()))
    bad = [r["n"] for r in rows if r["status"] != "ok"]
    ok = code == EXIT_OK and not bad and len(rows) == DUAL_ENGINE_MAX_N + 1
    record_criterion(12, f"analytic and contour coefficients agree, {function}, n <= {DUAL_ENGINE_MAX_N}", ok,
                     f"{len(rows) - len(bad)}/{len(rows)} within summed error bounds")
    assert ok
