import io
import json
import subprocess
import sys

import pytest

from dtoda.cli import main, parse_op, resolve_config
from dtoda.hbe import TAU_SCHEMA_ID
from dtoda.lax import LaxSystem


def run(*argv):
    buf = io.StringIO()
    rc = main(list(argv), out=buf)
    return rc, buf.getvalue()


def test_check_appendix_exit_zero():
    rc, text = run("check", "--suite", "appendix", "--n", "4", "--eps-order", "3", "--depth", "3")
    assert rc == 0
    assert text.startswith("[PASS] suite appendix")
    assert "FAIL " not in text


def test_derive_latex_contains_shift_difference():
    rc, text = run("derive", "--n", "4", "--flow", "1,1", "--format", "latex", "--eps-order", "3", "--depth", "3")
    assert rc == 0
    assert "c_{2}[1] - c_{2}[-1]" in text


@pytest.mark.parametrize("fmt, want", [("text", "-d2^(-1)*q1"), ("latex", r"-\partial_2^{-1} q_1")])
def test_project_d3_onto_d2(fmt, want):
    rc, text = run("project", "--op", "d3", "--pi", "2", "--depth", "2", "--format", fmt)
    assert rc == 0
    assert text.splitlines()[-1].strip() == f"= {want} + O({'d2^(-3)' if fmt == 'text' else chr(92) + 'partial_2^{-3}'})"


def test_json_header_and_determinism():
    argv = ("project", "--op", "L^-1", "--pi", "2", "--depth", "2", "--format", "json")
    rc1, a = run(*argv)
    rc2, b = run(*argv)
    assert rc1 == rc2 == 0 and a == b
    cfg = json.loads(a)["config"]
    assert {"n": 4, "eps_order": 4, "depth": 2} == {k: cfg[k] for k in ("n", "eps_order", "depth")}
    assert "version" in cfg and "schema" in cfg


def test_config_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"n": 5, "eps_order": 2}))
    ns = type("A", (), {"config": str(conf), "n": None, "eps_order": 3, "depth": None})
    assert resolve_config(ns) == {"n": 5, "eps_order": 3, "depth": 4}


@pytest.mark.parametrize(
    "argv",
    [
        ("project", "--op", "d3^-1", "--pi", "2"),
        ("project", "--op", "d4", "--pi", "2"),
        ("project", "--op", "d3", "--pi", "2", "--n", "3"),
        ("derive", "--flow", "2,2"),
        ("derive", "--flow", "0,1", "--shifted"),
        ("lax", "--config", "/nonexistent/file.json"),
    ],
)
def test_usage_errors_exit_two(argv):
    rc, _ = run(*argv)
    assert rc == 2


def test_bad_config_key_exit_two(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"n": 4, "bogus": 1}))
    assert run("lax", "--config", str(conf))[0] == 2


def test_argparse_rejects_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"], out=io.StringIO())
    assert exc.value.code == 2


@pytest.mark.parametrize("text", ["d3", "L^-1", "Lambda^(2)", "3/2*d2^2*L^-1", "d2+d3", "Lax", "-1*d2"])
def test_parse_op_accepts(text):
    parse_op(LaxSystem(4, 2, 2), text)


def test_parse_op_linear():
    S = LaxSystem(4, 2, 2)
    lhs = parse_op(S, "2*d2 - 1/2*L^-1")
    rhs = S.alg.mono(0, 1, 0).scale(S.ring.const(2)) - S.alg.mono(-1).scale(S.ring.const("1/2"))
    assert lhs.eq_window(rhs)


def test_print_schema():
    rc, text = run("hbe", "--print-schema")
    assert rc == 0 and json.loads(text)["$id"] == TAU_SCHEMA_ID


def test_hbe_failure_has_structured_diff():
    rc, text = run("check", "--suite", "hbe", "--k", "1", "--m-range", "1..1", "--delta-degree", "0", "--format", "json", "--eps-order", "3")
    assert rc == 1
    doc = json.loads(text)
    bad = [e for e in doc["suites"]["hbe"]["entries"] if e["status"] == "fail"]
    assert bad and {"monomial", "lhs", "rhs"} <= set(bad[0]["diff"])


def test_hbe_constant_tau_at_coinciding_times(tmp_path):
    tau = tmp_path / "tau.json"
    tau.write_text(json.dumps({"schema": TAU_SCHEMA_ID, "variables": ["t1_1", "t2_1", "t3_1"], "terms": [{"coeff": "1"}]}))
    rc, text = run("hbe", "--tau", str(tau), "--k", "0", "--delta-degree", "0")
    assert rc == 0 and text.rstrip().endswith("ok")


def test_out_file(tmp_path):
    dest = tmp_path / "lax.txt"
    rc, text = run("lax", "--eps-order", "2", "--depth", "2", "--out", str(dest))
    assert rc == 0 and text == ""
    assert dest.read_text().startswith("Lax =")


def test_parallel_suites_match_serial():
    base = ("check", "--suite", "structural", "--suite", "extrel", "--n", "4", "--eps-order", "2", "--depth", "2", "--format", "json")
    rc1, a = run(*base)
    rc2, b = run(*base, "--jobs", "2")
    assert rc1 == rc2 == 0 and a == b


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "dtoda.cli", "project", "--op", "d3", "--pi", "2", "--depth", "2"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert "-d2^(-1)*q1" in proc.stdout
