import pytest

from ltyn.core import App, Const, Sort, TyApp, TypingContext, alpha_equal, normalize, type_of
from ltyn.engine import compose
from ltyn.discourse import parse_discourse
from ltyn.lexicon import _constants_of
from ltyn.logical_form import (
    And,
    Atom,
    Epsilon,
    FApp,
    FConst,
    FVar,
    NotErasable,
    Quantified,
    embed,
    erase,
    parse_sexpr_formula,
    print_formula,
    standard_constants,
)
from ltyn.syntax import parse_term, parse_type

from conftest import CORPUS

SIG = standard_constants()
CTX = TypingContext(constants=SIG)


def _term(text, **extra):
    return parse_term(text, {**SIG, **{k: parse_type(v) for k, v in extra.items()}})


def test_standard_signature():
    assert set(SIG) == {"and", "or", "implies", "not", "forall", "exists", "epsilon"}
    assert alpha_equal(SIG["and"], parse_type("t -> t -> t"))
    assert alpha_equal(SIG["not"], parse_type("t -> t"))


def test_specialisations():
    eps = Const("epsilon", SIG["epsilon"])
    assert type_of(TyApp(eps, Sort("Readable")), CTX) == parse_type("(Readable -> t) -> Readable")
    ctx = TypingContext(constants=SIG, tyvars=frozenset({"zeta"}))
    assert type_of(TyApp(Const("forall", SIG["forall"]), parse_type("zeta -> t")), ctx) == \
        parse_type("((zeta -> t) -> t) -> t")
    assert type_of(TyApp(Const("exists", SIG["exists"]), Sort("e")), CTX) == parse_type("(e -> t) -> t")


def test_erase_existential():
    term = _term("exists {e} (lam x:e. and (club x) (defeated x Leeds))",
                 club="e -> t", defeated="e -> e -> t", Leeds="e")
    f = erase(term)
    expected = Quantified("exists", "x", Sort("e"), And(
        Atom("club", (FVar("x"),)), Atom("defeated", (FVar("x"), FConst("Leeds")))))
    assert f == expected
    assert print_formula(f) == "exists x:e. (club(x) & defeated(x, Leeds))"
    assert print_formula(f, "unicode") == "∃ x:e. (club(x) ∧ defeated(x, Leeds))"


def test_erase_conjunction_of_coerced_atoms():
    term = _term("and (large (f_L Liverpool)) (lively (f_P Liverpool))",
                 large="Location -> t", lively="People -> t", f_L="City -> Location",
                 f_P="City -> People", Liverpool="City")
    assert print_formula(erase(term)) == "large(f_L(Liverpool)) & lively(f_P(Liverpool))"


def test_erase_single_coercion():
    term = _term("won (f_C Liverpool)", won="Club -> t", f_C="City -> Club", Liverpool="City")
    assert erase(term) == Atom("won", (FApp("f_C", (FConst("Liverpool"),)),))
    assert print_formula(erase(term)) == "won(f_C(Liverpool))"


def test_epsilon_term_rendering():
    term = normalize(_term("read (epsilon {Readable} book)", read="Readable -> t", book="Readable -> t"), CTX)
    f = erase(term)
    assert f == Atom("read", (Epsilon("x", Sort("Readable"), Atom("book", (FVar("x"),))),))
    assert print_formula(f, "unicode") == "read(ε x:Readable. book(x))"
    assert print_formula(f, "ascii") == "read(eps x:Readable. book(x))"


def test_residual_lambda_is_not_erasable():
    with pytest.raises(NotErasable):
        erase(_term("p (lam x:e. q x)", p="(e -> t) -> t", q="e -> t"))
    with pytest.raises(NotErasable):
        erase(_term("lam x:e. q x", q="e -> t"))


def test_binder_sort_follows_type_argument():
    term = _term("forall {City} (lam c:City. implies (big c) (not (small c)))",
                 big="City -> t", small="City -> t")
    f = erase(term)
    assert f.sort == Sort("City")
    assert print_formula(f) == "forall c:City. (big(c) -> ~small(c))"


def test_sexpr_round_trip():
    formulas = [
        erase(_term("exists {e} (lam x:e. and (club x) (defeated x Leeds))",
                    club="e -> t", defeated="e -> e -> t", Leeds="e")),
        Atom("read", (Epsilon("x", Sort("Readable"), Atom("book", (FVar("x"),))),)),
        Quantified("forall", "f", parse_type("e -> t"), Atom("p", (FVar("f"),))),
    ]
    for f in formulas:
        assert parse_sexpr_formula(print_formula(f, "sexpr")) == f


def _corpus_terms(demo):
    for path in sorted(CORPUS.iterdir()):
        for reading in compose(parse_discourse(path.read_text()), demo, report_unknown=True):
            if reading.logical_form is not None:
                yield reading.logical_form


def test_corpus_readings_erase_and_embed_idempotently(demo):
    count = 0
    for term in _corpus_terms(demo):
        once = erase(term)
        back = embed(once, {**demo.signature, **dict(_constants_of(term))})
        assert type_of(back, demo.context()) == parse_type("t")
        assert erase(back) == once
        count += 1
    assert count >= 10
