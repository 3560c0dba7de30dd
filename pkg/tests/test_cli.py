import io
import json
import subprocess
import sys

import pytest

from qwtypes.cli import run
from qwtypes.fixtures import SIG_HF2, SIG_MIX, SIG_UT2, SIG_UT2_EXPLICIT

A = "(leaf)"
B = "(node (leaf) (leaf))"


def qw(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def sigs(tmp_path):
    paths = {}
    for name, sig in (("ut", SIG_UT2), ("ute", SIG_UT2_EXPLICIT), ("hf", SIG_HF2), ("mix", SIG_MIX)):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(sig.to_json()))
        paths[name] = p
    bad = json.loads(json.dumps(SIG_UT2_EXPLICIT.to_json()))
    bad["equations"]["explicit"][0]["left"]["map"] = [0, 0]
    paths["bad"] = tmp_path / "bad.json"
    paths["bad"].write_text(json.dumps(bad))
    return paths


def test_eq_swapped_children(sigs):
    code, out, _ = qw("eq", sigs["ut"], f"(node {A} {B})", f"(node {B} {A})")
    assert (code, out) == (0, "equal\n")
    code, out, _ = qw("eq", sigs["ute"], f"(node {A} {B})", f"(node {B} {B})")
    assert (code, out) == (0, "distinct\n")


def test_stage_counts(sigs):
    assert qw("stages", sigs["ut"], "--depth", 4, "--counts") == (0, "0 1 2 4 11\n", "")


def test_validate(sigs):
    code, out, _ = qw("validate", sigs["ut"])
    assert code == 0 and out.startswith("ok: 2 constructors")
    code, _, err = qw("validate", sigs["bad"])
    assert code == 2
    assert "NotImagePreserving" in err and "explicit equation #0" in err


def test_usage_errors(sigs):
    assert qw()[0] == 1
    assert qw("frobnicate", sigs["ut"])[0] == 1
    assert qw("stages", sigs["ut"], "--depth", -1)[0] == 1
    assert qw("stages", sigs["ut"], "--max-classes", 0)[0] == 1
    assert qw("rn", sigs["ut"], A, "-n", 0)[0] == 1
    assert qw("fold", sigs["ut"])[0] == 1
    assert qw("validate", "/nonexistent/sig.json")[0] == 1


def test_bad_term_is_a_validation_error(sigs):
    code, _, err = qw("rank", sigs["ut"], "(node (leaf))")
    assert code == 2 and "ArityMismatch" in err


def test_cap_exit_code(sigs):
    code, _, err = qw("stages", sigs["mix"], "--depth", 4, "--max-classes", 50)
    assert code == 3 and "CapExceeded" in err


def test_json_schema(sigs):
    code, out, _ = qw("stages", sigs["ut"], "--depth", 3, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"command", "result", "stats"}
    assert doc["command"] == "stages"
    assert doc["result"]["stage_sizes"] == [0, 1, 2, 4]


def test_invariant_commands(sigs):
    t = f"(node {A} {B})"
    assert qw("rank", sigs["ut"], t)[1] == "2\n"
    assert qw("tc", sigs["ut"], t)[1] == "{0, 1}\n"
    assert qw("rn", sigs["ut"], t, "-n", 1)[1] == "{0, 1}\n"
    assert qw("rn", sigs["ut"], t, "-n", 3)[1] == "{}\n"
    assert qw("fsurj", sigs["ut"], t, "-n", 1)[1] == "beta1,value\n0,0\n1,1\n2,0\n"


def test_canon(sigs):
    code, out, _ = qw("canon", sigs["hf"], "(pair (pair (empty) (empty)) (empty))")
    assert code == 0 and out.endswith("canonical {∅,{∅}}\n")
    code, out, _ = qw("canon", sigs["ut"], f"(node {B} {A})")
    assert out.endswith(f"canonical (node {A} {B})\n")
    code, out, _ = qw("canon", sigs["mix"], "(t z z z)")
    assert code == 0 and "canonical (b (z) (z))" in out


def test_term_from_file(sigs, tmp_path):
    p = tmp_path / "t.sexp"
    p.write_text(f"(node {A}\n  {B})\n")
    assert qw("rank", sigs["ut"], f"@{p}")[1] == "2\n"


def test_fold_and_check_algebra(sigs, tmp_path):
    alg = tmp_path / "or.json"
    alg.write_text(json.dumps({"carrier": 2, "ops": {"leaf": 0, "node": [[0, 1], [1, 1]]}}))
    assert qw("check-algebra", sigs["ut"], alg)[:2] == (0, "satisfies\n")
    assert qw("fold", sigs["ut"], alg, "--term", B)[:2] == (0, "0\n")
    proj = tmp_path / "proj.json"
    proj.write_text(json.dumps({"carrier": 2, "ops": {"leaf": 0, "node": [[0, 0], [1, 1]]}}))
    code, _, err = qw("check-algebra", sigs["ut"], proj)
    assert code == 2 and "must agree" in err
    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps({"carrier": 2, "ops": {"leaf": 0, "node": [[1, 0], [1, 0]]}}))
    assert qw("fold", sigs["ut"], neg)[0] == 2


def test_random_algebra_is_deterministic(sigs, monkeypatch):
    first = qw("fold", sigs["mix"], "--random-algebra", 3, "--seed", 7, "--depth", 3)
    assert first[0] == 0
    assert qw("fold", sigs["mix"], "--random-algebra", 3, "--seed", 7, "--depth", 3) == first
    monkeypatch.setenv("QW_SEED", "7")
    assert qw("fold", sigs["mix"], "--random-algebra", 3, "--depth", 3) == first


def test_hf_enum(sigs):
    code, out, _ = qw("hf-enum", sigs["hf"], "--max-rank", 1)
    assert (code, out) == (0, "∅\n{∅}\n")
    code, out, _ = qw("hf-enum", sigs["hf"], "--max-rank", 3, "--format", "json")
    assert json.loads(out)["stats"]["count"] == 11


def test_crosscheck(sigs):
    code, out, _ = qw("crosscheck", sigs["hf"], "--max-stage", 4)
    assert code == 0 and out.splitlines()[0] == "partitions agree on 26 terms"
    assert qw("crosscheck", sigs["mix"], "--max-stage", 3)[0] == 2


def test_dot_and_csv(sigs):
    code, out, _ = qw("export-dot", sigs["ut"], "--depth", 2)
    assert out == 'digraph stages {\n  0 [label="0:0"];\n  1 [label="1:1"];\n  1 -> 0;\n}\n'
    assert qw("stages", sigs["ut"], "--depth", 2, "--format", "dot")[1] == out
    code, out, _ = qw("stages", sigs["ut"], "--depth", 2, "--format", "csv")
    assert out.splitlines()[0] == "id,stage,rank,members,image,representative"
    assert out.splitlines()[2] == '1,2,1,1,"0","(node (leaf) (leaf))"'


def test_console_script_byte_identical(sigs):
    cmd = [sys.executable, "-m", "qwtypes", "stages", str(sigs["mix"]), "--depth", "3", "--format", "json"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["result"]["stage_sizes"] == [0, 1, 2, 8]
