import pytest

from ltyn.core import Arrow, Sort, alpha_equal, alpha_key
from ltyn.lexicon import (
    Lexicon,
    UnknownWord,
    ValidationError,
    dump_lexicon,
    load_lexicon,
    lookup,
    merge_overlay,
    validate_lexicon,
)
from ltyn.ontology import IncompatibleOntology
from ltyn.syntax import ParseError, parse_type
from ltyn.transformation import Degree, Origin

from conftest import DATA

LIVERPOOL = """
sort City
sort People
sort Location
sort Club
word Liverpool : City = Liverpool
  opt f_P : City -> People = f_P  deg F
  opt f_L : City -> Location = f_L deg F
  opt f_C : City -> Club = f_C deg R
  compat {f_P, f_L} {f_C}
word won : Club -> t = lam x:Club. won x
"""


def _signature(lex: Lexicon):
    return {k: alpha_key(v) for k, v in lex.constants.items()}


def _entries(lex: Lexicon):
    return {
        w: (alpha_key(e.main), alpha_key(e.type),
            tuple((t.name, alpha_key(t.term), t.degree, t.origin) for t in e.transformations),
            e.compatible_subsets)
        for w, e in lex.entries.items()
    }


def test_single_sorted_lexicon(montague):
    assert list(montague.entries) == ["some", "club", "defeated", "Leeds"]
    assert alpha_equal(montague.entries["some"].type, parse_type("(e -> t) -> (e -> t) -> t"))
    assert montague.entries["Leeds"].type == Sort("e")


def test_empty_file_is_an_empty_lexicon():
    lex = load_lexicon("")
    assert not lex.entries and validate_lexicon(lex) == []


def test_transformation_type_mismatch_is_rejected():
    text = LIVERPOOL.replace("opt f_P : City -> People = f_P", "opt f_P : City -> People = f_C:City -> Club")
    with pytest.raises(ValidationError) as info:
        load_lexicon(text)
    assert [d.code for d in info.value.diagnostics] == ["annotation-mismatch"]


def test_liverpool_entry_is_clean():
    lex = load_lexicon(LIVERPOOL)
    entry = lookup(lex, "Liverpool")
    assert [(t.name, t.degree) for t in entry.transformations] == [
        ("Id", Degree.F), ("f_P", Degree.F), ("f_L", Degree.F), ("f_C", Degree.R)
    ]
    assert entry.transformations[0].origin is Origin.IDENTITY
    assert entry.compatible_subsets == (frozenset({"f_P", "f_L"}), frozenset({"f_C"}))
    assert validate_lexicon(lex) == []


def test_unknown_compat_name_gives_one_diagnostic():
    lex = load_lexicon(LIVERPOOL.replace("{f_C}", "{f_X}"), validate=False)
    diags = validate_lexicon(lex)
    assert len(diags) == 1 and diags[0].code == "unknown-compat-name"


def test_duplicate_transformation_name_gives_one_diagnostic():
    text = LIVERPOOL.replace("  compat", "  opt f_C : City -> Club = f_C deg F\n  compat")
    diags = validate_lexicon(load_lexicon(text, validate=False))
    assert len(diags) == 1 and diags[0].code == "duplicate-transformation"


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as info:
        load_lexicon("sort City\nword x : City = (\n")
    assert info.value.line == 2
    with pytest.raises(ParseError):
        load_lexicon("  opt f : City -> City = f\n")
    with pytest.raises(ParseError):
        load_lexicon("sort City\nword x : City = x\n  opt f : City -> t = f deg Q\n")


def test_undeclared_sort_is_diagnosed():
    with pytest.raises(ValidationError) as info:
        load_lexicon("word x : Nowhere = x\n")
    assert info.value.diagnostics[0].code == "ill-formed-type"


def test_lookup(demo):
    assert lookup(demo, "Liverpool").type == Sort("City")
    with pytest.raises(UnknownWord) as info:
        lookup(demo, "xyzzy")
    assert info.value.word == "xyzzy"


def test_round_trip_is_a_fixpoint(demo, montague):
    for lex in (demo, montague, load_lexicon(LIVERPOOL)):
        text = dump_lexicon(lex)
        again = load_lexicon(text)
        assert dump_lexicon(again) == text
        assert _entries(again) == _entries(lex)
        assert _signature(again) == _signature(lex)
        assert again.ontology.parents == lex.ontology.parents


def test_round_trip_without_universal_top():
    lex = load_lexicon("option e-top off\nsort City\nword L : City = L\n")
    assert not lex.ontology.e_top
    assert dump_lexicon(load_lexicon(dump_lexicon(lex))) == dump_lexicon(lex)


def _overlay(base: Lexicon, text: str) -> Lexicon:
    return load_lexicon(text, base=base)


def test_overlay_retypes_a_word(demo):
    fiction = _overlay(demo, (DATA / "fiction.lex").read_text())
    merged = merge_overlay(demo, fiction)
    assert lookup(demo, "wolf").type == Sort("Animal")
    assert lookup(merged, "wolf").type == Sort("Agent")
    assert "hathay" in merged and "hathay" not in demo


def test_empty_overlay_is_identity(demo):
    merged = merge_overlay(demo, _overlay(demo, ""))
    assert _entries(merged) == _entries(demo)
    assert merged.ontology.parents == demo.ontology.parents


def test_empty_base_is_left_identity(demo):
    merged = merge_overlay(Lexicon(), demo)
    assert _entries(merged) == _entries(demo)


def test_overlay_extends_and_overrides_transformations(demo):
    overlay = _overlay(demo, """
word Liverpool : City = Liverpool
  opt f_C : City -> Club = f_C deg SF
  opt f_T : City -> Location = f_T deg F
""")
    merged = merge_overlay(demo, overlay)
    names = [t.name for t in merged.entries["Liverpool"].transformations]
    assert names == ["Id", "f_P", "f_L", "f_C", "f_M", "f_H", "f_T"]
    assert merged.entries["Liverpool"].transformation("f_C").degree is Degree.SF


def test_overlay_merge_is_associative_on_disjoint_words(demo):
    a = _overlay(demo, "sort Ship <: Artifact\nword boat : Ship = boat\n")
    b = _overlay(demo, "word sailed : Artifact -> t = lam x:Artifact. sailed x\n")
    c = _overlay(demo, "word sank : Physical -> t = lam x:Physical. sank x\n")
    left = merge_overlay(merge_overlay(merge_overlay(demo, a), b), c)
    right = merge_overlay(demo, merge_overlay(a, merge_overlay(b, c)))
    assert _entries(left) == _entries(right)
    assert _signature(left) == _signature(right)
    assert left.ontology.parents == right.ontology.parents


def test_incompatible_overlay_ontology(demo):
    with pytest.raises(IncompatibleOntology):
        _overlay(demo, "sort Food <: e\n")


def test_constant_declarations_take_precedence():
    lex = load_lexicon("""
sort Agent
sort Readable
const read : Agent -> Readable -> t
word read : Readable -> Agent -> t = lam y:Readable. lam x:Agent. read x y
""")
    assert alpha_equal(lex.constants["read"], parse_type("Agent -> Readable -> t"))
    assert lex.entries["read"].type == Arrow(Sort("Readable"), Arrow(Sort("Agent"), parse_type("t")))
