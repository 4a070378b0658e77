import json
import math

import pytest

from curvfunc import cli
from curvfunc.report import dumps, fmt_float, load_report, rows_to_csv
from curvfunc.specfile import SpecError, parse_spec_text


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_describe_round_s4(tmp_path, capsys):
    spec = write(tmp_path, "s4.yaml", "kind: round_sphere\nparams:\n  n: 4\n")
    code, out, _ = run(["describe", spec], capsys)
    assert code == 0
    r = json.loads(out)["results"]
    assert r["R"] == pytest.approx(12.0)
    assert r["Ric_norm_sq"] == pytest.approx(36.0)
    assert r["volume"] == pytest.approx(8 * math.pi ** 2 / 3)


def test_describe_berger_round(tmp_path, capsys):
    spec = write(tmp_path, "b.yaml", "kind: berger\nparams:\n  x: 1.0\n")
    code, out, _ = run(["describe", spec], capsys)
    assert code == 0
    assert json.loads(out)["results"]["E_norm_sq"] == pytest.approx(0.0, abs=1e-24)


def test_malformed_spec(tmp_path, capsys):
    spec = write(tmp_path, "bad.yaml", "kind: berger\nparams:\n  x: [1\n")
    code, out, err = run(["describe", spec], capsys)
    assert code == 2
    assert out == ""
    assert "line" in err


def test_spec_field_diagnostics():
    with pytest.raises(SpecError) as exc:
        parse_spec_text("kind: berger\nparams:\n  x: 1\n  y: 2\n")
    assert exc.value.field == "params.y" and exc.value.line == 4
    with pytest.raises(SpecError) as exc:
        parse_spec_text("kind: torus\n")
    assert exc.value.field == "kind"
    with pytest.raises(SpecError):
        parse_spec_text("kind: berger\nparams:\n  x: -1\n")


def test_left_invariant_spec():
    spec = parse_spec_text("kind: left_invariant\nparams:\n  Q: [[1,0,0],[0,2,0],[0,0,3]]\n  scale: 2\n")
    assert spec.Q[2, 2] == 3.0


def test_residual_command(tmp_path, capsys):
    spec = write(tmp_path, "p.yaml", "kind: product_sphere_sphere\nparams:\n  a: 2\n  b: 1\n")
    code, out, _ = run(["residual", spec, "--t", "0"], capsys)
    assert code == 0
    assert json.loads(out)["results"]["tensor_residual_norm"] == pytest.approx(1.5, abs=1e-12)
    spec = write(tmp_path, "r.yaml", "kind: sphere_flat\nparams:\n  n: 3\n  a: 1\n")
    code, out, _ = run(["residual", spec, "--t", "-0.5"], capsys)
    r = json.loads(out)["results"]
    assert code == 0 and r["tensor_residual_norm"] < 1e-12 and r["lambda"] is None


def test_solve_csv_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run(["solve", "--family", "berger", "--t", "-0.25", "--seed", "7",
                          "--starts", "8", "--csv", path], capsys)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == ("t,s,x,residual_tensor_norm,is_einstein,E_norm_sq,R,min_sectional,"
                        "sectional_flag,classification,normalized_value")
    assert len(lines) == 3
    assert any(",false," in ln for ln in lines[1:])


def test_unknown_family_exit_2(capsys):
    code, out, _ = run(["solve", "--family", "nil", "--t", "0"], capsys)
    assert code == 2 and out == ""


def test_nonconvergence_exit_3(capsys):
    code, _, err = run(["solve", "--family", "berger", "--t", "0", "--starts", "1"], capsys)
    assert code == 3
    assert "start 0" in err


def test_solver_config_file(tmp_path, capsys):
    cfg = write(tmp_path, "cfg.yaml", "starts: 4\nmax_iter: 50\n")
    code, out, _ = run(["solve", "--family", "berger", "--t", "0", "--config", cfg], capsys)
    assert json.loads(out)["inputs"]["config"]["max_iter"] == 50
    bad = write(tmp_path, "bad.yaml", "startz: 4\n")
    code, _, _ = run(["solve", "--family", "berger", "--t", "0", "--config", bad], capsys)
    assert code == 2


def test_verify_single_suite(capsys):
    code, out, _ = run(["verify", "--suite", "gauss-bonnet"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["suite_outcomes"][0]["details"]["S4_estimate"] == pytest.approx(2.0, abs=1e-10)


def test_verify_fails_on_sign_flipped_kulkarni_nomizu(monkeypatch, capsys):
    from curvfunc import tensor_core as tc

    orig = tc.kulkarni_nomizu
    monkeypatch.setattr(tc, "kulkarni_nomizu", lambda S, T: -orig(S, T))
    code, out, err = run(["verify", "--suite", "all"], capsys)
    assert code == 1
    rep = json.loads(out)
    failing = [o for o in rep["suite_outcomes"] if not o["passed"]]
    assert failing and all(o["counterexample"] for o in failing)
    assert "FAILED" in err


def test_report_roundtrip():
    obj = {"a": 0.1, "b": [1.0 / 3.0, 2.0, -1e-300], "c": {"d": True, "e": None, "f": "x"}}
    back = load_report(dumps(obj))
    assert back == obj
    assert isinstance(back["b"][1], float)
    assert dumps(back) == dumps(obj)


def test_float_format():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(2.0) == "2.0"
    assert fmt_float(float("inf")) == "inf"


def test_csv_failure_row():
    text = rows_to_csv(("x",), [(0.5, 0.0, None, "FAILED: no convergence")])
    assert text.splitlines()[1].startswith("0.5,0.0,,")
    assert "FAILED: no convergence" in text
