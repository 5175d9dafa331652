"""Acceptance criteria, one function each.

Run under pytest, or directly with ``python3 tests/test_acceptance.py`` for a
plain pass/fail listing.
"""

import contextlib
import io
import itertools
import json
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import CORPUS, DATA  # noqa: E402
from termgen import TermGenerator, random_type, term_depth  # noqa: E402

from ltyn import engine  # noqa: E402
from ltyn.cli import main  # noqa: E402
from ltyn.core import App, Sort, TyApp, TypingContext, alpha_equal, normalize, reduce_step, type_of  # noqa: E402
from ltyn.discourse import parse_discourse  # noqa: E402
from ltyn.engine import EngineConfig, compose, diagnose_missing, join, land_term, readings_by_sentence  # noqa: E402
from ltyn.lexicon import load_lexicon, load_lexicon_file, merge_overlay  # noqa: E402
from ltyn.logical_form import erase, print_formula, standard_constants  # noqa: E402
from ltyn.ontology import build_ontology, is_subsort  # noqa: E402
from ltyn.syntax import parse_term, parse_type  # noqa: E402
from ltyn.transformation import Degree  # noqa: E402

DEMO = str(DATA / "demo.lex")
MONTAGUE = str(DATA / "montague.lex")


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue()


def _json(*argv):
    code, out = _cli(*argv, "--format", "json")
    return code, json.loads(out)


def _squash(text):
    return " ".join(text.split())


def _demo():
    return load_lexicon_file(DEMO)


def _compose(lex, name, cfg=EngineConfig()):
    d = parse_discourse((CORPUS / f"{name}.dis").read_text())
    return d, readings_by_sentence(compose(d, lex, cfg, report_unknown=True), len(d))


# ---------------------------------------------------------------- criteria


def golden_derivation():
    sig = {**standard_constants(), "club": parse_type("e -> t"), "defeated": parse_type("e -> e -> t"),
           "Leeds": parse_type("e")}
    # the displayed chain, transcribed by hand
    chain = [
        "(lam P:e -> t. lam Q:e -> t. exists {e} (lam x:e. and (P x) (Q x))) (lam x:e. club x)"
        " ((lam y:e. lam x:e. defeated x y) Leeds)",
        "(lam Q:e -> t. exists {e} (lam x:e. and (club x) (Q x))) (lam x:e. defeated x Leeds)",
        "exists {e} (lam x:e. and (club x) (defeated x Leeds))",
    ]
    expected = [parse_term(s, sig) for s in chain]
    start = time.perf_counter()
    code, out = _cli("analyze", MONTAGUE, str(CORPUS / "montague.dis"), "--trace")
    elapsed = time.perf_counter() - start
    lines = out.splitlines()
    assert code == 0
    assert _squash(lines[1]) == "exists x:e. (club(x) & defeated(x, Leeds))"
    steps = [ln.split(":", 1)[1] for ln in lines if ln.strip().startswith("step ")]
    assert len(steps) == len(expected), steps
    for printed, want in zip(steps, expected):
        assert alpha_equal(parse_term(printed.strip(), sig), want), printed
    assert elapsed < 1.0, elapsed
    return f"{len(steps)} steps matched in {elapsed:.3f}s"


def coercion():
    code, data = _json("analyze", DEMO, str(CORPUS / "won.dis"))
    [reading] = data[0]["readings"]
    assert code == 0
    assert reading["formula"] == "won(f_C(Liverpool))"
    assert [t["transformation"] for t in reading["trace"]] == ["f_C"]
    return "won(f_C(Liverpool)) [f_C]"


def copredication():
    code, data = _json("analyze", DEMO, str(CORPUS / "city_people.dis"))
    [good] = data[0]["readings"]
    assert code == 0
    assert good["formula"] == "large(f_L(Liverpool)) & lively(f_P(Liverpool))"
    assert good["verdict"]["status"] == "felicitous" and good["verdict"]["label"] == "F"
    code, data = _json("analyze", DEMO, str(CORPUS / "city_club.dis"))
    readings = data[0]["readings"]
    assert code == 2 and readings
    for r in readings:
        assert r["verdict"]["status"] == "infelicitous" and r["verdict"]["label"] == "∅"
    assert any(r["verdict"].get("pairs") == [["f_L/F", "f_C/R"]] for r in readings)
    return "F accepted, (f_L:F, f_C:R) rejected"


def land_reduction():
    sig = {"large": parse_type("Location -> t"), "lively": parse_type("People -> t"),
           "f_L": parse_type("City -> Location"), "f_P": parse_type("City -> People"),
           "Liverpool": parse_type("City")}
    sig.update(standard_constants())
    # independent transcription of the operator, not the engine's builder
    land = parse_term(
        "Lam alpha. Lam beta. lam P:alpha -> t. lam Q:beta -> t. Lam xi. lam x:xi."
        " lam f:xi -> alpha. lam g:xi -> beta. and (P (f x)) (Q (g x))", sig)
    assert alpha_equal(land, land_term())
    term = TyApp(TyApp(land, Sort("Location")), Sort("People"))
    large, lively, liverpool, f_l, f_p = (parse_term(w, sig) for w in ("large", "lively", "Liverpool", "f_L", "f_P"))
    term = App(App(App(TyApp(App(App(term, large), lively), Sort("City")), liverpool), f_l), f_p)
    ctx = TypingContext(constants=sig)
    result = normalize(term, ctx)
    assert alpha_equal(result, parse_term("and (large (f_L Liverpool)) (lively (f_P Liverpool))", sig))
    return "reduct alpha-equal"


def salmon_suite():
    lex = _demo()
    _, one = _compose(lex, "salmon_one")
    assert not any(r.felicitous for r in one[0])
    _, two = _compose(lex, "salmon_two")
    assert all(any(r.felicitous for r in g) for g in two)
    strict = EngineConfig(sentence_resets_semiflexible=False)
    _, one_strict = _compose(lex, "salmon_one", strict)
    _, two_strict = _compose(lex, "salmon_two", strict)
    assert not any(r.felicitous for r in one_strict[0])
    assert not any(r.felicitous for r in two_strict[1])
    assert _cli("analyze", DEMO, str(CORPUS / "salmon_two.dis"), "--no-sentence-reset")[0] == 2
    return "same sentence rejected, Ref accepted, strict mode rejects both"


def chain_suite():
    lex = _demo()
    _, groups = _compose(lex, "chain")
    assert [any(r.felicitous for r in g) for g in groups] == [True, True, True, False]
    assert groups[3][0].verdict.kind == "chain-depth"
    assert "chain-depth" in groups[3][0].verdict.reason
    _, deep = _compose(lex, "chain", EngineConfig(max_chain_depth=3))
    assert all(any(r.felicitous for r in g) for g in deep)
    return "first three sentences pass, the fourth fails at depth 2 and passes at depth 3"


def diagnosis():
    code, data = _json("analyze", DEMO, str(CORPUS / "chair.dis"))
    assert code == 3
    [suggestion] = data[0]["diagnostics"]
    lex = _demo()
    overlay = load_lexicon(suggestion["fragment"], base=lex)
    merged = merge_overlay(lex, overlay)
    _, groups = _compose(merged, "chair")
    assert all(g and all(r.felicitous for r in g) for g in groups)
    # the same check through the library entry point
    [[missing]] = _compose(lex, "chair")[1]
    assert diagnose_missing(missing.verdict.miss, lex).fragment == suggestion["fragment"]
    return "exit 3, fragment repairs the corpus"


def _closure(names, decls):
    index = {n: i for i, n in enumerate(names)}
    reach = [[i == j for j in range(len(names))] for i in range(len(names))]
    for child, parents in decls:
        for p in parents:
            reach[index[child]][index[p]] = True
    for k, i, j in itertools.product(range(len(names)), repeat=3):
        if reach[i][k] and reach[k][j]:
            reach[i][j] = True
    return reach


def property_suites():
    start = time.perf_counter()
    gen = TermGenerator(20240601)
    checked = violations = 0
    while checked < 10_000:
        term = gen.term(random_type(gen.rng, 2), gen.rng.randint(1, 7))
        if term_depth(term) > 7:
            continue
        checked += 1
        ty = type_of(term)
        current = term
        while (nxt := reduce_step(current)) is not None:
            if not alpha_equal(type_of(nxt), ty):
                violations += 1
                break
            current = nxt
        if not alpha_equal(current, normalize(term, strategy="innermost")):
            violations += 1
    assert violations == 0, violations

    from test_engine import _brute_force

    lex = _demo()
    real = engine._candidates
    mismatches = []

    def checked_candidates(entry, lx, source, target, *, with_identity=False):
        got = real(entry, lx, source, target, with_identity=with_identity)
        want = _brute_force(entry, lx, source, target, with_identity=with_identity)
        mismatches.append({c.name for c in got} == {c.name for c in want})
        return got

    engine._candidates = checked_candidates
    try:
        for path in sorted(CORPUS.iterdir()):
            compose(parse_discourse(path.read_text()), lex, report_unknown=True)
    finally:
        engine._candidates = real
    assert mismatches and all(mismatches)

    for a, b in itertools.product(Degree, repeat=2):
        for same, strict in itertools.product([False, True], repeat=2):
            assert join(a, b, same_name=same, strict_semiflexible=strict) == \
                join(b, a, same_name=same, strict_semiflexible=strict)

    rng = random.Random(50)
    for e_top in (True, False):
        for _ in range(10):
            n = rng.randint(1, 50)
            names = [f"S{i}" for i in range(n)]
            decls = [(nm, set(rng.sample(names[:i], rng.randint(0, min(3, i))))) for i, nm in enumerate(names)]
            onto = build_ontology(decls, e_top)
            reach = _closure(names, decls)
            for (i, a), (j, b) in itertools.product(enumerate(names), repeat=2):
                assert is_subsort(onto, a, b) is reach[i][j]
    elapsed = time.perf_counter() - start
    assert elapsed < 60, elapsed
    return f"{checked} terms, {len(mismatches)} coercion searches, closures ok in {elapsed:.1f}s"


def single_sort_regression():
    code, data = _json("analyze", MONTAGUE, str(CORPUS / "montague.dis"))
    [sentence] = data
    [reading] = sentence["readings"]
    assert code == 0
    assert reading["trace"] == []
    assert reading["verdict"] == {"status": "felicitous", "reason": None, "label": "F"}
    assert sentence["diagnostics"] == []
    montague = load_lexicon_file(MONTAGUE)
    main_of = {w: e.main for w, e in montague.entries.items()}
    plain = App(App(main_of["some"], main_of["club"]), App(main_of["defeated"], main_of["Leeds"]))
    assert reading["formula"] == print_formula(erase(normalize(plain, montague.context())))
    return "empty trace, no bookkeeping, same as plain composition"


CRITERIA = [
    (1, "golden derivation", golden_derivation),
    (2, "argument coercion", coercion),
    (3, "co-predication pair", copredication),
    (4, "polymorphic conjunction reduct", land_reduction),
    (5, "salmon suite", salmon_suite),
    (6, "chain suite", chain_suite),
    (7, "missing-transformation diagnosis", diagnosis),
    (8, "property suites", property_suites),
    (9, "single-sort regression", single_sort_regression),
]


def _check(number, title, fn):
    try:
        detail = fn()
    except AssertionError as exc:
        return False, f"FAIL criterion {number}: {title}: {exc!s:.200}"
    return True, f"PASS criterion {number}: {title} ({detail})"


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, line = _check(number, title, fn)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = [_check(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
