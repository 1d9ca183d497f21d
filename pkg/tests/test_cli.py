import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from checkify.checkification import load_schema
from checkify.cli import main, universe_from_env

CORPUS = Path(str(resources.files("checkify").joinpath("corpus")))
PREPEND = str(CORPUS / "prepend.mlp")
EXPECTED = Path(__file__).parent / "expected"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_reproduces_faulty_annotation(capsys):
    code, out, _ = run(capsys, "analyze", PREPEND, "-d", "modes", "--inject", "modes_aliasing_blind")
    assert code == 0
    assert out == (EXPECTED / "prepend_faulty_annotation.mlp").read_text()


def test_analyze_correct_annotation_differs(capsys):
    code, out, _ = run(capsys, "analyze", PREPEND, "-d", "modes")
    assert code == 0 and "nonvar(Ys)" in out
    assert out != (EXPECTED / "prepend_faulty_annotation.mlp").read_text()


def test_analyze_writes_output_file(capsys, tmp_path):
    dest = tmp_path / "out.mlp"
    assert run(capsys, "analyze", PREPEND, "-o", str(dest))[0] == 0
    assert dest.read_text().startswith(":- entry prepend(")


def test_analyze_empty_program(capsys):
    assert run(capsys, "analyze", str(CORPUS / "empty.mlp")) == (0, "", "")


def test_analyze_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.mlp"
    bad.write_text("p(X) :- q(X].\n")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 2 and f"{bad}:1:" in err


def test_missing_file(capsys):
    assert run(capsys, "analyze", "/nonexistent/x.mlp")[0] == 2


def test_checkify_finds_injected_fault(capsys):
    code, out, _ = run(capsys, "checkify", PREPEND, "-d", "modes",
                       "--inject", "modes_aliasing_blind", "--seed", "7")
    assert code == 1
    assert "line 12" in out and "nonground(Ys)" in out


def test_checkify_passes_clean(capsys):
    code, out, _ = run(capsys, PREPEND, "-d", "modes", "--seed", "7", "--max-cases", "1000")
    assert code == 0 and out.startswith("Pass (1000 cases)")


def test_checkify_loop_times_out(capsys):
    code, _, _ = run(capsys, "checkify", str(CORPUS / "loop.mlp"), "-d", "sharing", "--timeout", "1")
    assert code == 3


def test_checkify_json_report(capsys, tmp_path):
    dest = tmp_path / "r.json"
    code, _, _ = run(capsys, "checkify", PREPEND, "--inject", "modes_aliasing_blind",
                     "--json", str(dest))
    doc = json.loads(dest.read_text())
    jsonschema.validate(doc, load_schema())
    assert code == 1 and doc["verdict"] == "Error" and doc["location"]["line"] == 12
    assert doc["early_exit"] is True and doc["faults"] == ["modes_aliasing_blind"]


def test_checkify_bad_file_json(capsys, tmp_path):
    bad = tmp_path / "bad.mlp"
    bad.write_text("p(.\n")
    code, out, _ = run(capsys, "checkify", str(bad), "--json", "-")
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema())
    assert code == 2 and doc["verdict"] == "AnalysisFailed"


def test_matrix_on_small_corpus(capsys, tmp_path):
    for name in ("prepend.mlp", "two_callers.mlp"):
        (tmp_path / name).write_text((CORPUS / name).read_text())
    (tmp_path / "broken.mlp").write_text("p(X :- q.\n")
    dest = tmp_path / "m.json"
    code, out, _ = run(capsys, "matrix", str(tmp_path), "-d", "modes,depthk", "--max-cases", "50",
                       "--no-times", "--json", str(dest))
    assert code == 0
    rows = {line.split()[0]: line.split()[1:] for line in out.splitlines()[1:]}
    assert rows == {"broken.mlp": ["n/a", "n/a"], "prepend.mlp": ["Pass", "Pass"],
                    "two_callers.mlp": ["Pass", "Pass"]}
    doc = json.loads(dest.read_text())
    jsonschema.validate(doc, load_schema())
    assert len(doc["rows"]) == 6


def test_matrix_table_is_stable(capsys, tmp_path):
    (tmp_path / "prepend.mlp").write_text((CORPUS / "prepend.mlp").read_text())
    args = ("matrix", str(tmp_path), "--max-cases", "30", "--no-times")
    assert run(capsys, *args) == run(capsys, *args)


def test_matrix_reports_errors(capsys, tmp_path):
    (tmp_path / "prepend.mlp").write_text((CORPUS / "prepend.mlp").read_text())
    code, out, _ = run(capsys, "matrix", str(tmp_path), "-d", "modes", "--max-cases", "100",
                       "--inject", "modes_aliasing_blind")
    assert code == 1 and "ERR" in out


def test_matrix_empty_corpus(capsys, tmp_path):
    assert run(capsys, "matrix", str(tmp_path)) == (0, "", "")


def test_matrix_unknown_domain(capsys, tmp_path):
    assert run(capsys, "matrix", str(tmp_path), "-d", "modes,polyhedra")[0] == 2


def test_faults_list(capsys):
    code, out, _ = run(capsys, "faults", "list")
    assert code == 0
    assert len(out.splitlines()) == 13 and "modes_aliasing_blind" in out


def test_universe_from_env():
    u = universe_from_env({"CHECKIFY_UNIVERSE": "max_list=3, ints=-1..2, atoms=x:y"})
    assert (u.max_list, u.ints, u.atoms) == (3, (-1, 0, 1, 2), ("x", "y"))
    assert universe_from_env({}) == universe_from_env({"CHECKIFY_UNIVERSE": " "})
    with pytest.raises(ValueError):
        universe_from_env({"CHECKIFY_UNIVERSE": "colour=red"})


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "checkify", PREPEND, "--max-cases", "20"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("Pass")
