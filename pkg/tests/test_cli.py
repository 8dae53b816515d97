import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from levi.cli import detect_kind, main

DATA = Path(__file__).resolve().parents[1] / "demos" / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv] + ["--no-timestamp"])
    return code, json.loads(capsys.readouterr().out)


def test_detect_kind():
    assert detect_kind({"n": 2, "order": 2, "brackets": {}}) == "poisson"
    assert detect_kind({"rank": 1, "base_dim": 1, "b": {}, "c": {}}) == "algebroid"
    assert detect_kind({"size": 1, "table": [[0]]}) == "group"
    assert detect_kind({"dim": 1, "c": []}) == "lie-algebra"
    assert detect_kind({"target": {}, "values": []}) == "homomorphism"


# -- check ---------------------------------------------------------------------


def test_check_valid_poisson(capsys):
    code, report = run(capsys, "check", DATA / "so3_perturbed.json")
    assert code == 0
    assert report["status"] == "ok"
    assert report["steps"][0]["max_residual"] == "0"
    assert len(report["input_digest"]) == 64


def test_check_broken_jacobi(capsys):
    code, report = run(capsys, "check", DATA / "broken_jacobi.json")
    assert code == 1
    assert report["status"] == "fail"
    assert report["steps"][0]["witness"] == [0, 1, 2]


def test_check_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 3,\n  "order": }\n')
    code, report = run(capsys, "check", bad)
    assert code == 1
    assert report["error"]["code"] == "parse_error"
    assert "line 2 column 12" in report["error"]["message"]


def test_check_unknown_kind(capsys, tmp_path):
    odd = tmp_path / "odd.json"
    odd.write_text('{"hello": 1}')
    code, report = run(capsys, "check", odd)
    assert code == 1 and report["error"]["code"] == "unknown_kind"


def test_check_other_kinds(capsys):
    for name in ("algebroid_so3.json", "c4.json", "so3_algebra.json", "circle_offcenter.csv"):
        code, report = run(capsys, "check", DATA / name)
        assert code == 0, name
    code, report = run(capsys, "check", DATA / "hom_c4_so3.json", "--group", DATA / "c4.json")
    assert code == 0 and report["steps"][0]["defect"] > 0


def test_missing_file(capsys, tmp_path):
    code, report = run(capsys, "check", tmp_path / "nope.json")
    assert code == 1 and report["error"]["code"] == "parse_error"


# -- linearize ---------------------------------------------------------------------


def test_linearize_so3(capsys, tmp_path):
    out = tmp_path / "so3.report.json"
    code, report = run(capsys, "linearize", DATA / "so3_perturbed.json", "--order", 6, "--output", out)
    assert code == 0
    assert report["steps"][0]["achieved_order"] == 6
    change = tmp_path / "so3.report.change.json"
    assert report["outputs"] == [str(out), str(change)]
    assert "components" in json.loads(change.read_text())["coordinate_change"]
    assert json.loads(out.read_text())["success"] is True


def test_linearize_abelian_obstructed(capsys, tmp_path):
    code, report = run(capsys, "linearize", DATA / "abelian_obstructed.json", "--output",
                       tmp_path / "r.json")
    assert code == 2
    assert report["status"] == "obstructed"
    rec = report["steps"][0]["records"]
    assert rec[-1]["order"] == 2 and rec[-1]["status"] == "obstructed"
    assert report["outputs"] == [str(tmp_path / "r.json")]


def test_linearize_order_too_high():
    with pytest.raises(SystemExit) as info:
        main(["linearize", str(DATA / "so3_perturbed.json"), "--order", "9"])
    assert info.value.code == 64


def test_linearize_algebroid(capsys):
    code, report = run(capsys, "linearize", DATA / "algebroid_so3.json")
    assert code == 0
    assert {r["phase"] for r in report["steps"][0]["records"]} == {1, 2}


# -- average -----------------------------------------------------------------------


def test_average_hom(capsys, tmp_path):
    out = tmp_path / "hom.json"
    code, report = run(capsys, "average", "hom", DATA / "c4.json", DATA / "hom_c4_so3.json",
                       "--output", out)
    assert code == 0
    step = report["steps"][0]
    assert step["achieved"] <= 1.36 * step["q"]
    assert step["bound"] == pytest.approx(1.36 * step["q"], rel=1e-11)
    assert "values" in json.loads(out.read_text())


def test_average_hom_defect_too_large(capsys):
    code, report = run(capsys, "average", "hom", DATA / "c4.json", DATA / "hom_c4_large_defect.json")
    assert code == 3
    assert report["status"] == "hypothesis_violated"


def test_average_rep(capsys):
    code, report = run(capsys, "average", "rep", DATA / "c4.json", DATA / "rep_c4.json")
    assert code == 0
    step = report["steps"][0]
    assert step["final_defect"] < 1e-12 and step["achieved"] <= step["eps"]


def test_average_submanifold(capsys, tmp_path):
    out = tmp_path / "avg.csv"
    code, report = run(capsys, "average", "submanifold", DATA / "circle_offcenter.csv",
                       DATA / "circle_offcenter.json", "--output", out)
    assert code == 0
    step = report["steps"][0]
    assert step["achieved"] <= step["bound"]
    assert step["residual"] < 1e-10
    assert len(out.read_text().splitlines()) == 64


def test_average_submanifold_gate_and_force(capsys):
    code, _ = run(capsys, "average", "submanifold", DATA / "circle_wobble_c4.csv")
    assert code == 3
    code, report = run(capsys, "average", "submanifold", DATA / "circle_wobble_c4.csv", "--force")
    assert code == 0 and report["steps"][0]["hypothesis_holds"] is False


# -- report format ---------------------------------------------------------------------


def test_twelve_significant_digits(capsys):
    _, report = run(capsys, "average", "hom", DATA / "c4.json", DATA / "hom_c4_so3.json")
    for key in ("q", "achieved", "bound"):
        digits = repr(report["steps"][0][key]).split("e")[0].replace(".", "").lstrip("0")
        assert len(digits) <= 12


def test_timestamp_present_by_default(capsys):
    main(["check", str(DATA / "c4.json")])
    report = json.loads(capsys.readouterr().out)
    assert "timestamp" in report and "wall_time" in report


def test_report_file(capsys, tmp_path):
    dest = tmp_path / "report.json"
    assert main(["check", str(DATA / "c4.json"), "--report", str(dest), "--no-timestamp"]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(dest.read_text())["status"] == "ok"


def test_deterministic_reports(capsys):
    argv = ["average", "submanifold", str(DATA / "circle_offcenter.csv"), "--no-timestamp",
            "--threads", "4"]
    main(argv)
    first = capsys.readouterr().out
    main(argv[:-2] + ["--threads", "1"])
    assert capsys.readouterr().out == first


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 64


def test_module_entry_point():
    env = {**os.environ, "LEVI_LOG": "INFO"}
    proc = subprocess.run([sys.executable, "-m", "levi", "check", str(DATA / "c4.json"),
                           "--no-timestamp"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "ok"
    assert "exit code 0" in proc.stderr
