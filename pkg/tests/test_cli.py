import io
import json
import subprocess
import sys

import pytest

from ppse.cli import main
from ppse.scenario import builtin_names, render, builtin


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_list_builtins():
    code, out, _ = call("list-builtins")
    assert code == 0
    assert out.split() == list(builtin_names())


def test_render_builtin():
    code, out, _ = call("render-builtin", "three-box-X")
    assert code == 0 and "basis = [X, Y, Z]" in out
    code, _, err = call("render-builtin", "nope")
    assert code == 1 and "UnknownBuiltin" in err


def test_run_json_prob_found():
    code, out, _ = call("run", "--builtin", "three-box-X", "--format", "json")
    assert code == 0
    assert json.loads(out)["prob_found"] == pytest.approx(1.0, abs=1e-9)


def test_run_formats():
    code, out, _ = call("run", "--builtin", "appendix-b-interchanged", "--format", "csv")
    assert code == 0 and out.startswith("kind,key,probability")
    code, out, _ = call("run", "--builtin", "appendix-b-interchanged")
    assert code == 0 and "0.500000" in out


def test_run_all_builtins():
    code, out, _ = call("run", "--all-builtins", "--format", "json")
    assert code == 0
    assert set(json.loads(out)) == set(builtin_names())
    code, out, _ = call("run", "--all-builtins", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "scenario,kind,key,probability"
    assert sum(line.startswith("scenario,") for line in lines) == 1


def test_run_file_and_validate(tmp_path):
    path = tmp_path / "s.ppse"
    path.write_text(render(builtin("three-box-Z")))
    code, out, _ = call("run", "--file", str(path), "--format", "json")
    assert code == 0 and json.loads(out)["prob_found"] == pytest.approx(0.2, abs=1e-9)
    code, out, _ = call("validate", "--file", str(path))
    assert code == 0 and out.startswith("ok: three-box-Z")


def test_check_timesym_pass():
    code, out, _ = call("check-timesym", "--builtin", "appendix-b-time-reversed")
    assert code == 0
    assert "Prob[k=1] = 0.000000" in out and out.rstrip().endswith("PASS")
    code, out, _ = call("check-timesym", "--builtin", "appendix-a", "--format", "json")
    assert code == 0 and json.loads(out)["result"] == "PASS"


def test_check_timesym_fails_without_reversal(tmp_path):
    # a real rotation is not reversible under plain conjugation (theta = I)
    text = render(builtin("three-box-X")).replace(
        "  measure", "  unitary U_ca = [0.6, -0.8, 0; 0.8, 0.6, 0; 0, 0, 1]\n  measure", 1)
    path = tmp_path / "r.ppse"
    path.write_text(text)
    code, out, _ = call("check-timesym", "--file", str(path), "--processes", "ii,iii")
    assert code == 1
    assert "motion reversal holds: no" in out and out.rstrip().endswith("FAIL")


def test_usage_errors(tmp_path):
    assert call()[0] == 2
    assert call("run")[0] == 2
    assert call("run", "--builtin", "three-box-X", "--format", "xml")[0] == 2
    code, _, err = call("run", "--file", str(tmp_path / "missing.ppse"))
    assert code == 2 and "cannot read" in err
    assert call("run", "--builtin", "three-box-X", "--processes", "ix")[0] == 2


def test_typed_errors_exit_one(tmp_path):
    bad = tmp_path / "bad.ppse"
    bad.write_text('scenario "x" {\n  space dim = 2 basis = [P, Q]\n  state a = 1, 1+2j\n}\n')
    code, _, err = call("run", "--file", str(bad))
    assert code == 1 and "3:18" in err and "ParseError" in err
    empty = tmp_path / "empty.ppse"
    empty.write_text('scenario "e" {\n  space dim = 2 basis = [P, Q]\n  state a = 0, 1\n'
                     '  state b = 1, 0\n  measure { blocks = [[P], [Q]] mode = nondegenerate }\n'
                     '  preselect { basis = a index = 0 }\n  postselect { basis = b index = 0 }\n}\n')
    code, _, err = call("run", "--file", str(empty))
    assert code == 1 and err.startswith("error [density] EmptyEnsemble")


def test_tolerance_from_environment(monkeypatch):
    monkeypatch.setenv("PPSE_TOL", "1e-7")
    code, out, _ = call("run", "--builtin", "three-box-X", "--format", "json")
    assert json.loads(out)["tolerance"] == 1e-7
    code, out, _ = call("run", "--builtin", "three-box-X", "--format", "json", "--tol", "1e-6")
    assert json.loads(out)["tolerance"] == 1e-6


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ppse", "list-builtins"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "three-box-X" in proc.stdout
