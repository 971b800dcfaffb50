import json

import pytest
from mpmath import mpf

from jensenlab.cli import (
    EXIT_OK,
    EXIT_UNDECIDED,
    fig1_curves,
    main,
    parse_expression,
    read_manifests,
)


def run_cli(tmp_path, *argv):
    return main(["--out", str(tmp_path), "--quiet", *argv])


def last_manifest(tmp_path):
    return read_manifests(tmp_path / "manifest.log")[-1]


def test_parse_expression():
    p = parse_expression("(x-1)*(x+2)^2 + 3")
    assert [int(c) for c in p.coeffs] == [-1, 0, 3, 1]


def test_certify_exit_codes(tmp_path):
    assert run_cli(tmp_path, "certify", "--expr", "x^2 + 1", "--name", "pair") == EXIT_OK
    text = (tmp_path / "pair.txt").read_text()
    assert "CertifiedNotHyperbolic" in text and "witness" in text
    assert run_cli(tmp_path, "certify", "--expr", "(x-1)*(x-2)*(x-3)", "--name", "real") == EXIT_OK
    assert "CertifiedHyperbolic" in (tmp_path / "real.txt").read_text()


def test_certify_poly_file(tmp_path):
    f = tmp_path / "h6.json"
    f.write_text(json.dumps({"coeffs": [-120, 0, 180, 0, -30, 0, 1]}))
    assert run_cli(tmp_path, "certify", "--poly-file", str(f), "--name", "h6") == EXIT_OK
    assert "outcome: CertifiedHyperbolic" in (tmp_path / "h6.txt").read_text()


def test_undecided_exit_code_when_budget_is_tiny(tmp_path, monkeypatch):
    import jensenlab.hyperbolicity as hyp
    monkeypatch.setattr(hyp, "witness", lambda *a, **k: None)
    assert run_cli(tmp_path, "certify", "--expr", "x^2 + 1") == EXIT_UNDECIDED


def test_coeffs_dual_engine(tmp_path):
    assert run_cli(tmp_path, "coeffs", "--function", "xfamily:10", "--range", "0:60", "--engine", "both") == EXIT_OK
    rows = (tmp_path / "agreement_xfamily_10_alpha_0_60.csv").read_text().splitlines()
    assert len(rows) == 62 and all(r.endswith(",ok") for r in rows[1:])


def test_reruns_are_byte_identical(tmp_path, monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
        assert run_cli(out, "coeffs", "--function", "sinc", "--range", "0:40", "--kind", "gamma") == EXIT_OK
        files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.log")
        outputs.append({p.relative_to(out): p.read_bytes() for p in files})
    assert outputs[0] == outputs[1] and outputs[0]


def test_manifest_records_configuration(tmp_path):
    run_cli(tmp_path, "coeffs", "--function", "cos", "--range", "0:4")
    rec = last_manifest(tmp_path)
    assert rec["exit_code"] == ["0"]
    assert rec["config.function"] == ["cos"]
    assert any(o.endswith(".csv") for o in rec["output"])


def test_section5_unlisted_shift_has_no_tolerance_verdict(tmp_path):
    assert run_cli(tmp_path, "section5", "--target", "sinc", "--d", "2", "--n", "100") == EXIT_OK
    text = (tmp_path / "section5_sinc_d2_n100.txt").read_text()
    assert "c2: 1" in text and "vector_within_tolerance" not in text


def test_convergence_binomial(tmp_path):
    assert run_cli(tmp_path, "convergence", "--function", "xfamily:10", "--mode", "binomial", "--d", "3",
                   "--n", "100", "1000") == EXIT_OK


def test_fig2_data(tmp_path):
    assert run_cli(tmp_path, "plotdata", "--figure", "fig2", "--points", "61") == EXIT_OK
    lines = (tmp_path / "fig2_x10.csv").read_text().splitlines()
    assert len(lines) == 62
    zeros = (tmp_path / "fig2_x10_retained_zeros.csv").read_text().splitlines()[1:]
    assert len(zeros) >= 2


@pytest.fixture(scope="module")
def fig1_left():
    return fig1_curves(6, 10000, "left", 201)


@pytest.fixture(scope="module")
def fig1_right():
    return fig1_curves(6, 10000, "right", 201)


def test_fig1_left_overlay(fig1_left):
    _, _, _, dev, amp = fig1_left
    assert dev / amp < mpf("0.01")


def test_fig1_right_overlay(fig1_right):
    _, _, _, dev, amp = fig1_right
    assert dev / amp < mpf("0.01")
