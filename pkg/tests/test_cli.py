import csv
import io
import json
import shutil
import subprocess

import pytest

from vreglab.cli import expand_families, main, parse_q_values


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_q_parsing():
    assert parse_q_values(["2,3"], "7-10") == [2, 3, 7, 8, 9]
    assert expand_families(["GL(2-4)", "G2"]) == ["GL(2)", "GL(3)", "GL(4)", "G2"]


def test_torus_info(capsys):
    code, out, _ = run(capsys, "torus-info", "--family", "G2", "--q", "4")
    data = json.loads(out)
    assert code == 0
    assert data["order"] == 13 and data["split_rank"] == 0
    assert data["nvreg"] in (1, 3) and data["star"] is True


def test_torus_info_multiple_q(capsys):
    code, out, _ = run(capsys, "torus-info", "--family", "GL(2)", "--q-range", "2-5")
    assert code == 0
    assert [e["order"] for e in json.loads(out)] == [3, 8, 15, 24]


def test_scan_star_csv(capsys, tmp_path):
    path = tmp_path / "scan.csv"
    code, out, err = run(capsys, "scan-star", "--family", "GL(2)", "--q", "2,3,5",
                         "--format", "csv", "--out", str(path))
    assert code == 0 and out == "" and err == ""
    rows = list(csv.DictReader(path.open()))
    assert [r["q"] for r in rows] == ["2", "3", "5"]
    assert rows[1]["nvreg"] == "2" and rows[1]["ratio_num"] == "4" and rows[1]["star"] == "true"


def test_scan_star_minimal_q_on_stderr(capsys):
    code, out, err = run(capsys, "scan-star", "--family", "G2", "--q", "2,3,4", "--format", "csv")
    assert code == 0
    assert "minimal passing q for G2 coxeter: 3" in err
    assert len(list(csv.reader(io.StringIO(out)))) == 4


def test_scan_star_threshold_in_rank(capsys):
    code, out, _ = run(capsys, "scan-star", "--family", "GL(2)", "--q", "3,5", "--threshold", "2n")
    rows = json.loads(out)["rows"]
    assert [r["star"] for r in rows] == ["false", "true"]


def test_scan_star_deterministic_across_jobs(tmp_path):
    outs = []
    for jobs in (1, 2):
        path = tmp_path / f"s{jobs}.csv"
        assert main(["scan-star", "--family", "GL(2-3)", "--q-range", "2-7", "--twist", "all",
                     "--jobs", str(jobs), "--format", "csv", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_howe(capsys):
    code, out, _ = run(capsys, "howe", "--family", "GL(4)", "--q", "3", "--gl-signature", "1,2,4:1,2:2")
    data = json.loads(out)
    assert code == 0
    assert data["jumps"] == [1, 2] and data["toral"] and not data["zero_toral"]


def test_howe_from_character_json(capsys, tmp_path):
    path = tmp_path / "theta.json"
    path.write_text(json.dumps({"depth_zero": [0], "levels": [{"m": 1, "functional": [1, 1]}]}))
    code, out, _ = run(capsys, "howe", "--family", "GL(2)", "--q", "3", "--character", str(path))
    assert code == 0 and json.loads(out)["depth"] == 1


def test_epsilon_csv(capsys):
    code, out, _ = run(capsys, "epsilon", "--family", "GL(3)", "--q", "3",
                       "--gl-signature", "1,3:2:2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert len(rows) == 26 - 2
    assert {r["eps_ram"] for r in rows} == {"1"}
    assert {r["e_tilde"] for r in rows} == {"1"}


def test_predict_csv(capsys):
    code, out, _ = run(capsys, "predict", "--family", "GL(2)", "--q", "3",
                       "--gl-signature", "1,2:1:1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    assert {r["N"] for r in rows} == {"24"}


def test_henniart_json(capsys):
    code, out, _ = run(capsys, "henniart", "--family", "GL(2)", "--q", "3", "--depth", "1")
    data = json.loads(out)
    assert code == 0 and data["counterexamples"] == []
    assert data["equalities"] == 2 * data["admissible"]


def test_errors_exit_2(capsys):
    assert run(capsys, "torus-info", "--family", "GL(0)", "--q", "3")[0] == 2
    assert run(capsys, "torus-info", "--family", "GL(2)", "--q", "6")[0] == 2
    assert run(capsys, "howe", "--family", "GL(2)", "--q", "3,5", "--gl-signature", "1,2:1:1")[0] == 2
    assert run(capsys, "henniart", "--family", "G2", "--q", "2", "--depth", "0")[0] == 2
    assert run(capsys, "howe", "--family", "GL(2)", "--q", "3", "--character", "/nonexistent.json")[0] == 2


def test_cap_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("VREGLAB_CAP", "10")
    code, out, _ = run(capsys, "torus-info", "--family", "GL(3)", "--q", "3")
    assert code == 0
    assert "cap exceeded" in json.loads(out)["density"]
    code, out, _ = run(capsys, "scan-star", "--family", "GL(3)", "--q", "3")
    assert json.loads(out)["rows"][0]["star"] == "cap_exceeded"


def test_acceptance_subset(capsys):
    code, out, _ = run(capsys, "acceptance", "--only", "1", "--only", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("[PASS]") for line in lines)


def test_acceptance_failure_exit_code(capsys, monkeypatch):
    from vreglab import acceptance

    monkeypatch.setattr(acceptance, "CRITERIA", [(99, "always fails", lambda: (False, "no"), None)])
    code, out, _ = run(capsys, "acceptance")
    assert code == 1 and out.startswith("[FAIL] 99")


@pytest.mark.skipif(shutil.which("vreglab") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["vreglab", "torus-info", "--family", "GL(2)", "--q", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["order"] == 8
