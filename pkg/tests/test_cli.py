import json
import subprocess
import sys

import numpy as np
import pytest

from monolaplace import __version__
from monolaplace.cli import main
from monolaplace.registry import UnknownKernel, get_pair, parse_kernel
from monolaplace.report import SCHEMA, csv_text, dumps, envelope, read_csv
from monolaplace.specfun import kernel_p2, kernel_q


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------- registry / DSL

def test_dsl_matches_library_kernels():
    t = np.array([0.01, 1.0, 2.5, 30.0])
    np.testing.assert_allclose(parse_kernel("-24*q''")(t), -24 * kernel_q(t, 2), rtol=1e-15)
    np.testing.assert_allclose(parse_kernel("-6*p2'' - 6*p2'")(t),
                               -6 * (kernel_p2(t, 2) + kernel_p2(t, 1)), rtol=1e-14)
    np.testing.assert_allclose(parse_kernel("2*one + t")(t), 2 + t)
    np.testing.assert_allclose(parse_kernel("1/2*exp")(t), 0.5 * np.exp(-t))


@pytest.mark.parametrize("bad", ["", "sin", "q'''", "2**q", "q +"])
def test_dsl_rejects(bad):
    with pytest.raises(UnknownKernel):
        parse_kernel(bad)


def test_registry_lookup():
    assert get_pair("lambda:v=3/4").name == "lambda:v=3/4"
    assert get_pair("lambda", "0.75").name == "lambda:v=3/4"
    assert get_pair("lambda", "1/4").hint.kind == "unimodal"
    assert get_pair("lambda", "2").hint.kind == "monotone"
    with pytest.raises(UnknownKernel):
        get_pair("lambda")
    with pytest.raises(UnknownKernel):
        get_pair("zeta")


# ---------------------------------------------------------------- report helpers

def test_csv_is_rfc4180_and_round_trips():
    vals = [0.1, 1 / 3, 2.0 ** -1074, -1e300]
    text = csv_text(("name", "x"), [("a,b", v) for v in vals])
    assert text.startswith("name,x\r\n") and text.endswith("\r\n")
    rows = read_csv(text)
    assert [r["name"] for r in rows] == ["a,b"] * 4
    assert [float(r["x"]) for r in rows] == vals


def test_json_envelope():
    doc = json.loads(dumps(envelope("demo", {"a": 1}, {"nan": float("nan"), "f": np.float64(2.5)})))
    assert doc["schema"] == SCHEMA and doc["version"] == __version__
    assert doc["result"] == {"nan": None, "f": 2.5}


# ---------------------------------------------------------------- verify-sequences

def test_verify_phi_dn(capsys):
    code, out, _ = run(capsys, "verify-sequences", "--suite", "phi-dn", "--n-max", "200")
    assert code == 0
    rep = json.loads(out)["result"]["reports"][0]
    assert [v["exact"] for v in rep["values"][:6]] == [
        "-66802176", "-13774616064", "-1570251361536", "-127269822161664",
        "-7526731991528448", "-240861038835686400"]


def test_verify_hv(capsys):
    assert run(capsys, "verify-sequences", "--suite", "hv", "--v", "3/4", "--n-max", "50")[0] == 0


def test_verify_below_domain(capsys):
    code, _, err = run(capsys, "verify-sequences", "--suite", "phi-dn", "--n-max", "3")
    assert code == 64 and "n_max" in err


def test_verify_hv_needs_v(capsys):
    assert run(capsys, "verify-sequences", "--suite", "hv")[0] == 64
    assert run(capsys, "verify-sequences", "--suite", "hv", "--v", "1/2")[0] == 64


# ---------------------------------------------------------------- classify

def test_classify_phi(capsys):
    code, out, _ = run(capsys, "classify", "--pair", "phi")
    verdict = json.loads(out)["result"]["verdict"]
    assert code == 0
    assert (verdict["kind"], verdict["h_zero_sign"]) == ("Increasing", "Negative")


def test_classify_lambda_quarter(capsys):
    code, out, _ = run(capsys, "classify", "--pair", "lambda", "--v", "1/4")
    assert code == 0 and json.loads(out)["result"]["verdict"]["kind"] == "Decreasing"


def test_classify_identity_is_indeterminate(capsys):
    code, out, _ = run(capsys, "classify", "--pair", "identity")
    assert code == 3 and json.loads(out)["result"]["verdict"]["kind"] == "Indeterminate"


def test_classify_unknown_pair(capsys):
    assert run(capsys, "classify", "--pair", "zeta")[0] == 65
    assert run(capsys, "classify", "--f", "sin", "--g", "one")[0] == 65


def test_classify_expression(capsys):
    code, out, _ = run(capsys, "classify", "--f", "t", "--g", "one")
    assert code == 0 and json.loads(out)["result"]["verdict"]["kind"] == "Decreasing"


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--bogus"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 64
    assert run(capsys, "classify")[0] == 64


# ---------------------------------------------------------------- bounds

def test_bounds_turan_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--suite", "turan", "--format", "csv")
    rows = read_csv(out)
    assert code == 0
    assert list(rows[0]) == ["suite_id", "v", "x", "y", "side", "lhs", "rhs", "margin"]
    assert all(float(r["margin"]) > 1e-9 for r in rows)


def test_bounds_kratio_violation(capsys):
    code, out, _ = run(capsys, "bounds", "--suite", "kratio", "--r1", "0.5", "--r2", "0.5", "--v", "0.2")
    suite = json.loads(out)["result"]["suites"][0]
    assert code == 2 and suite["violations"] > 0


def test_bounds_improved_pass(capsys):
    assert run(capsys, "bounds", "--suite", "xdkk-improved")[0] == 0


def test_bounds_deterministic_across_threads(capsys, monkeypatch):
    args = ("bounds", "--suite", "all", "--format", "csv", "--points", "9")
    monkeypatch.setenv("MONO_LAPLACE_THREADS", "1")
    one = run(capsys, *args)
    monkeypatch.setenv("MONO_LAPLACE_THREADS", "4")
    four = run(capsys, *args)
    assert one == four and one[0] == 0


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("MONO_LAPLACE_THREADS", "many")
    assert run(capsys, "bounds", "--suite", "turan")[0] == 65


# ---------------------------------------------------------------- config

def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rel_tol": 1e-8, "colour": "red"}))
    code, _, err = run(capsys, "classify", "--pair", "phi", "--config", str(cfg))
    assert code == 65 and "colour" in err


def test_config_bad_value(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rel_tol": -1}))
    assert run(capsys, "classify", "--pair", "phi", "--config", str(cfg))[0] == 65
    assert run(capsys, "classify", "--pair", "phi", "--config", str(tmp_path / "missing.json"))[0] == 65


def test_config_applies_and_is_recorded(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rel_tol": 1e-9, "x_min": 0.5, "x_max": 5, "points": 4, "v_grid": [1, 2]}))
    code, out, _ = run(capsys, "bounds", "--suite", "xdkk", "--config", str(cfg))
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["quad"]["rel_tol"] == 1e-9
    assert doc["result"]["suites"][0]["params"]["v_grid"] == [1.0, 2.0]
    assert len(doc["result"]["suites"][0]["grid"]) == 2 * 4 * 2


# ---------------------------------------------------------------- emit

def test_emit_phi(capsys):
    code, out, _ = run(capsys, "emit", "--fn", "phi", "--x-min", "0.01", "--x-max", "100", "--points", "200")
    rows = read_csv(out)
    assert code == 0 and len(rows) == 200
    xs = [float(r["x"]) for r in rows]
    assert xs == sorted(xs)


def test_emit_theta(capsys):
    code, out, _ = run(capsys, "emit", "--fn", "theta-v", "--v-min", "0.55", "--v-max", "0.95")
    rows = read_csv(out)
    assert code == 0 and len(rows) == 9
    assert float(rows[4]["v"]) == 0.75
    assert float(rows[4]["theta"]) == pytest.approx(0.7555737998658448, rel=1e-12)


def test_emit_lambda_half(capsys):
    code, out, _ = run(capsys, "emit", "--fn", "lambda", "--v", "1/2")
    assert code == 0
    assert all(abs(float(r["value"]) + 0.5) < 1e-9 for r in read_csv(out))


def test_emit_needs_v(capsys):
    assert run(capsys, "emit", "--fn", "hv")[0] == 64


def test_emit_to_file(capsys, tmp_path):
    path = tmp_path / "a.csv"
    assert run(capsys, "emit", "--fn", "A", "--points", "5", "-o", str(path))[0] == 0
    assert path.read_bytes().count(b"\r\n") == 6


# ---------------------------------------------------------------- report-all

def test_report_all(tmp_path, capsys):
    code, out, _ = run(capsys, "report-all", "--output-dir", str(tmp_path))
    assert code == 0 and json.loads(out)["passed"]
    names = {p.name for p in tmp_path.iterdir()}
    for want in ("summary.json", "bounds.csv", "phi.png", "lambda.png", "theta_v.png",
                 "bounds_margins.png", "classify.json", "sequences.json"):
        assert want in names
    assert (tmp_path / "phi.png").read_bytes()[:4] == b"\x89PNG"
    summary = json.loads((tmp_path / "summary.json").read_text())["result"]
    assert summary["classify"]["phi"] == "Increasing"
    assert summary["classify"]["lambda:v=1/4"] == "Decreasing"


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "monolaplace.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
