import json
import subprocess
import sys
from pathlib import Path

import pytest

from ltyn.cli import EXIT_INFELICITOUS, EXIT_INPUT, EXIT_MISSING, EXIT_OK, main

from conftest import CORPUS, DATA

GOLDEN = Path(__file__).parent / "golden"
DEMO = str(DATA / "demo.lex")
MONTAGUE = str(DATA / "montague.lex")
FICTION = str(DATA / "fiction.lex")


def _corpus(name):
    return str(CORPUS / f"{name}.dis")


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name,code", [
    ("montague", EXIT_OK), ("won", EXIT_OK), ("city_people", EXIT_OK),
    ("city_club", EXIT_INFELICITOUS), ("salmon_two", EXIT_OK), ("chair", EXIT_MISSING),
])
def test_json_matches_golden_file(capsys, name, code):
    lex = MONTAGUE if name == "montague" else DEMO
    got, out, _ = _run(capsys, "analyze", lex, _corpus(name), "--format", "json")
    assert got == code
    assert out == (GOLDEN / f"{name}.json").read_text(encoding="utf-8")


def test_json_fields(capsys):
    _, out, _ = _run(capsys, "analyze", DEMO, _corpus("city_people"), "--format", "json")
    [sentence] = json.loads(out)
    [reading] = sentence["readings"]
    assert reading["formula"] == "large(f_L(Liverpool)) & lively(f_P(Liverpool))"
    assert [t["transformation"] for t in reading["trace"]] == ["f_L", "f_P"]
    assert reading["verdict"] == {"status": "felicitous", "reason": None, "label": "F"}


def test_text_output_and_trace(capsys):
    code, out, _ = _run(capsys, "analyze", MONTAGUE, _corpus("montague"), "--trace")
    assert code == EXIT_OK
    assert "exists x:e. (club(x) & defeated(x, Leeds))" in out
    assert "verdict: felicitous [F]" in out
    assert "step 0:" in out and "step 2:" in out


def test_unicode_output(capsys):
    _, out, _ = _run(capsys, "analyze", DEMO, _corpus("book"), "--format", "unicode")
    assert "read(John, ε x:Readable. book(x))" in out


def test_flags_change_verdicts(capsys):
    assert _run(capsys, "analyze", DEMO, _corpus("salmon_two"), "--no-sentence-reset")[0] == EXIT_INFELICITOUS
    assert _run(capsys, "analyze", DEMO, _corpus("chain"))[0] == EXIT_INFELICITOUS
    assert _run(capsys, "analyze", DEMO, _corpus("chain"), "--max-chain-depth", "3")[0] == EXIT_OK


def test_overlay_rescues_unknown_word(capsys):
    code, out, _ = _run(capsys, "analyze", DEMO, _corpus("hathay"))
    assert code == EXIT_MISSING and "word hathay : Hathay = hathay" in out
    code, out, _ = _run(capsys, "analyze", DEMO, _corpus("hathay"), "--overlay", FICTION)
    assert code == EXIT_OK and "rolled(sub_Cart_Artifact(hathay))" in out


def test_several_files_are_wrapped(capsys):
    code, out, _ = _run(capsys, "analyze", DEMO, _corpus("won"), _corpus("chair"), "--format", "json")
    data = json.loads(out)
    assert code == EXIT_MISSING
    assert [Path(d["file"]).name for d in data] == ["won.dis", "chair.dis"]


def test_input_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.dis"
    bad.write_text("(won Liverpool\n")
    assert _run(capsys, "analyze", DEMO, str(bad))[0] == EXIT_INPUT
    assert _run(capsys, "analyze", DEMO, str(tmp_path / "absent.dis"))[0] == EXIT_INPUT


def test_check(capsys, tmp_path):
    code, out, _ = _run(capsys, "check", DEMO, "--overlay", FICTION)
    assert code == EXIT_OK and out.strip() == "ok: 27 words, 16 sorts"
    cyclic = tmp_path / "cyclic.lex"
    cyclic.write_text("sort A <: B\nsort B <: A\n")
    code, _, err = _run(capsys, "check", str(cyclic))
    assert code == EXIT_INPUT and "error" in err
    clash = tmp_path / "clash.lex"
    clash.write_text("sort Food <: City\n")
    assert _run(capsys, "check", DEMO, "--overlay", str(clash))[0] == EXIT_INPUT


def test_typecheck(capsys):
    code, out, _ = _run(capsys, "typecheck", "lam P:e -> t. lam Q:e -> t. exists {e} (lam x:e. and (P x) (Q x))")
    assert code == EXIT_OK and out.strip() == "(e -> t) -> (e -> t) -> t"
    code, out, _ = _run(capsys, "typecheck", "(Lam a. lam x:a. x) {City} Liverpool", "--lexicon", DEMO, "--normalize")
    assert out.split() == ["City", "Liverpool"]
    code, _, err = _run(capsys, "typecheck", "won Liverpool", "--lexicon", DEMO)
    assert code == EXIT_INPUT and err


def test_step_budget_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("LTYN_STEP_BUDGET", "1")
    code, _, err = _run(capsys, "typecheck", "(lam x:e. (lam y:e. y) x) c:e", "--normalize")
    assert code == EXIT_INPUT and "within 1 steps" in err
    monkeypatch.setenv("LTYN_STEP_BUDGET", "5")
    assert _run(capsys, "typecheck", "(lam x:e. (lam y:e. y) x) c:e", "--normalize")[0] == EXIT_OK


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "ltyn.cli", "check", MONTAGUE], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("ok: 4 words")
