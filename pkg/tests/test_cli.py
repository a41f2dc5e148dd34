import json
import os
import subprocess
import sys

import pytest

from lolight3.bundled import corpus_path
from lolight3.cli import dumps, run


def invoke(capsys, *argv):
    code = run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_exit_ok(capsys):
    code, out, _ = invoke(capsys, "classify", corpus_path("case8_flat_flow"))
    doc = json.loads(out)
    assert code == 0 and doc["exit_code"] == 0
    assert doc["table2_case"] == 8 and doc["group"] == "R"


def test_classify_undecided(capsys):
    code, out, _ = invoke(capsys, "classify", corpus_path("undecided_no_certificate"))
    assert code == 3
    assert any("Lcal_over_Lambda" in c for c in json.loads(out)["caveats"])


@pytest.mark.parametrize("cmd", ["inspect", "check-parallel", "gauss-bonnet", "normalize"])
def test_checks_pass_on_corpus(capsys, cmd):
    code, out, _ = invoke(capsys, cmd, corpus_path("case4_sigma"), "--grid", "32")
    assert code == 0, out


def test_holonomy(capsys):
    code, out, _ = invoke(capsys, "holonomy", corpus_path("case9_flow"), "--z", "0.3")
    assert code == 0 and json.loads(out)["passed"]


def test_missing_file(capsys, tmp_path):
    code, _, err = invoke(capsys, "classify", tmp_path / "nope.json")
    assert code == 2 and "error" in err


def test_malformed_spec(capsys, tmp_path):
    doc = json.loads(corpus_path("case4_sigma").read_text())
    doc["surprise"] = 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = invoke(capsys, "classify", bad)
    assert code == 2 and err


def test_not_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert invoke(capsys, "inspect", bad)[0] == 2


def test_unknown_map(capsys):
    code, _, err = invoke(capsys, "verify-map", corpus_path("case4_sigma"), "--map", "warp")
    assert code == 2 and "unknown map" in err


def test_small_grid_rejected(capsys):
    assert invoke(capsys, "curvature", corpus_path("case4_sigma"), "--grid", "2")[0] == 2


def test_verify_map_ok_and_fail(capsys):
    code, out, _ = invoke(capsys, "verify-map", corpus_path("case4_sigma"), "--map", "sigma")
    assert code == 0 and json.loads(out)["coordinates"] == "normal_form"
    # (1/3, 1/2) is not a period of this metric, so the candidate is not affine
    code, _, _ = invoke(capsys, "verify-map", corpus_path("case5_psi"), "--map", "psi",
                        "--params", "P=3,Pp=1")
    assert code == 1


def test_deform_gate(capsys):
    path = corpus_path("case7_sigma_chi")
    assert invoke(capsys, "deform", path, "--map", "chi", "--t", "0,0.5,1")[0] == 2
    code, out, _ = invoke(capsys, "deform", path, "--map", "chi", "--t", "0,0.5,1",
                          "--case-iv")
    doc = json.loads(out)
    assert code == 0 and doc["family"] == "chi" and len(doc["samples"]) == 3


def test_deform_sigma(capsys):
    code, out, _ = invoke(capsys, "deform", corpus_path("case4_sigma"), "--map", "sigma",
                          "--t", "0,0.25,0.5,0.75,1")
    doc = json.loads(out)
    assert code == 0 and doc["r_sup_at_0"] < 1e-8


def test_output_is_deterministic(capsys):
    args = ("classify", corpus_path("case5_psi"))
    first = invoke(capsys, *args)[1]
    second = invoke(capsys, *args)[1]
    assert first == second
    assert list(json.loads(first)) == sorted(json.loads(first))


def test_float_format():
    text = dumps({"b": 0.1, "a": [1, 2.5]})
    assert text.index('"a"') < text.index('"b"')
    assert "1.000000000000e-01" in text and "2.500000000000e+00" in text


def test_csv_output(capsys):
    code, out, _ = invoke(capsys, "curvature", corpus_path("case4_sigma"), "--grid", "8",
                          "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "y,z,r" and len(lines) == 65


def test_out_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = invoke(capsys, "normalize", corpus_path("case3_phi0"), "--out", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "normalize"


def test_module_entry_point_with_thread_limit():
    env = dict(os.environ, LOLIGHT3_THREADS="1")
    proc = subprocess.run([sys.executable, "-m", "lolight3", "classify",
                           str(corpus_path("case3_phi0"))],
                          capture_output=True, text=True, env=env, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["table2_case"] == 3
