"""Lexical entries: one main term plus named optional transformations.

File format (``#`` starts a comment)::

    option e-top off
    sort City <: e
    const and : t -> t -> t
    word Liverpool : City = Liverpool
      opt f_C : City -> Club = f_C deg R
      compat {f_P, f_L} {f_C}

Inside a ``word`` or ``opt`` line an otherwise unknown identifier equal to the
word (or transformation) name denotes a constant of the declared type.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, TextIO, Union

from .core import (
    Abs,
    App,
    Arrow,
    Const,
    Term,
    Type,
    TypingContext,
    TyAbs,
    TyApp,
    TypingError,
    alpha_equal,
    ill_formed_part,
    type_of,
)
from .logical_form import standard_constants
from .ontology import (
    UNIVERSAL,
    IncompatibleOntology,
    Ontology,
    build_ontology,
    merge_ontologies,
)
from .syntax import ParseError, format_term, format_type, parse_term_declaring, parse_type
from .transformation import IDENTITY_NAME, Degree, Origin, Transformation, identity


class UnknownWord(KeyError):
    def __init__(self, word: str):
        super().__init__(word)
        self.word = word

    def __str__(self) -> str:
        return f"unknown word {self.word!r}"

    def __eq__(self, other) -> bool:
        return isinstance(other, UnknownWord) and other.word == self.word

    def __hash__(self) -> int:
        return hash(("UnknownWord", self.word))


@dataclass(frozen=True)
class Diagnostic:
    word: Optional[str]
    code: str
    message: str

    def __str__(self) -> str:
        where = f"{self.word}: " if self.word else ""
        return f"{where}{self.message} [{self.code}]"


class ValidationError(Exception):
    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def _identity_type(ty: Type) -> Type:
    return ty.dom if isinstance(ty, Arrow) else ty


@dataclass(frozen=True)
class LexicalEntry:
    """A word's main term and its transformations (identity first)."""

    word: str
    main: Term
    type: Type
    transformations: tuple = ()
    compatible_subsets: Optional[tuple] = None

    @classmethod
    def build(
        cls,
        word: str,
        main: Term,
        ty: Type,
        transformations: Iterable[Transformation] = (),
        compatible_subsets: Optional[Iterable[Iterable[str]]] = None,
    ) -> "LexicalEntry":
        opts = [t for t in transformations if not t.is_identity]
        subsets = None
        if compatible_subsets is not None:
            subsets = tuple(frozenset(s) for s in compatible_subsets)
        return cls(word, main, ty, (identity(_identity_type(ty)), *opts), subsets)

    @property
    def options(self) -> tuple:
        """Transformations other than the implicit identity."""
        return tuple(t for t in self.transformations if not t.is_identity)

    def transformation(self, name: str) -> Optional[Transformation]:
        for t in self.transformations:
            if t.name == name:
                return t
        return None


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[str, LexicalEntry] = field(default_factory=dict)
    ontology: Ontology = field(default_factory=Ontology)
    constants: Mapping[str, Type] = field(default_factory=dict)

    @property
    def signature(self) -> dict[str, Type]:
        return {**standard_constants(), **self.constants}

    def context(self) -> TypingContext:
        return TypingContext(constants=self.signature, sorts=self.ontology.sorts)

    def __contains__(self, word: str) -> bool:
        return word in self.entries


def lookup(lex: Lexicon, word: str) -> LexicalEntry:
    try:
        return lex.entries[word]
    except KeyError:
        raise UnknownWord(word) from None


# ---------------------------------------------------------------- validation


def validate_lexicon(lex: Lexicon) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    ctx = lex.context()
    for name, ty in lex.constants.items():
        part = ill_formed_part(ty, ctx)
        if part is not None:
            diags.append(Diagnostic(None, "ill-formed-type", f"constant {name} has ill-formed type {ty} ({part})"))
    for entry in lex.entries.values():
        diags.extend(_validate_entry(entry, ctx))
    return diags


def _validate_entry(entry: LexicalEntry, ctx: TypingContext) -> list[Diagnostic]:
    diags = []
    word = entry.word

    def check(term: Term, declared: Type, what: str) -> None:
        part = ill_formed_part(declared, ctx)
        if part is not None:
            diags.append(Diagnostic(word, "ill-formed-type", f"{what}: ill-formed type {declared} ({part})"))
            return
        try:
            actual = type_of(term, ctx)
        except TypingError as exc:
            diags.append(Diagnostic(word, "type-error", f"{what}: {exc}"))
            return
        if not alpha_equal(actual, declared):
            diags.append(Diagnostic(
                word, "annotation-mismatch",
                f"{what}: term has type {format_type(actual)} but is declared {format_type(declared)}",
            ))

    check(entry.main, entry.type, "main term")
    seen: set[str] = set()
    for t in entry.transformations:
        if t.name in seen:
            diags.append(Diagnostic(word, "duplicate-transformation", f"transformation {t.name} declared twice"))
            continue
        seen.add(t.name)
        if t.is_identity:
            continue
        if alpha_equal(t.source, t.target):
            diags.append(Diagnostic(word, "trivial-transformation", f"transformation {t.name} has equal source and target"))
        check(t.term, Arrow(t.source, t.target), f"transformation {t.name}")
    for subset in entry.compatible_subsets or ():
        for name in sorted(subset - seen):
            diags.append(Diagnostic(word, "unknown-compat-name", f"compatible subset names unknown transformation {name}"))
    return diags


# ---------------------------------------------------------------- loading

_SORT = re.compile(r"^sort\s+(\S+)\s*(?:<:\s*(.+))?$")
_CONST = re.compile(r"^const\s+(\S+)\s*:\s*(.+)$")
_WORD = re.compile(r"^word\s+(\S+)\s*:\s*([^=]+?)\s*=\s*(.+)$")
_OPT = re.compile(r"^opt\s+(\S+)\s*:\s*([^=]+?)\s*=\s*(.+?)(?:\s+deg\s+(\S+))?\s*$")
_COMPAT = re.compile(r"^compat\s+(.*)$")
_SUBSET = re.compile(r"\{([^}]*)\}")
_OPTION = re.compile(r"^option\s+e-top\s+(on|off)$")
_NAME = re.compile(r"^[^\W\d][\w']*$")


@dataclass
class _Line:
    number: int
    text: str


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _check_name(name: str, line: int) -> None:
    if not _NAME.match(name):
        raise ParseError(f"invalid name {name!r}", line)


def load_lexicon(
    source: Union[str, TextIO],
    *,
    base: Optional[Lexicon] = None,
    validate: bool = True,
) -> Lexicon:
    """Parse a lexicon file.

    With ``base`` the file is read as an overlay: the base's sorts and
    constants are in scope, and only the file's own words are returned.
    """
    text = source if isinstance(source, str) else source.read()
    lines = [_Line(i, _strip(raw)) for i, raw in enumerate(text.splitlines(), start=1)]
    lines = [ln for ln in lines if ln.text]

    e_top = base.ontology.e_top if base is not None else True
    sort_decls: list[tuple[str, frozenset]] = []
    file_constants: dict[str, Type] = {}
    for ln in lines:
        if m := _OPTION.match(ln.text):
            if base is not None and (m.group(1) == "on") != e_top:
                raise IncompatibleOntology(UNIVERSAL, frozenset(), frozenset())
            e_top = m.group(1) == "on"
        elif m := _SORT.match(ln.text):
            _check_name(m.group(1), ln.number)
            parents = frozenset(p.strip() for p in m.group(2).split(",")) if m.group(2) else frozenset()
            if not parents and e_top and m.group(1) != UNIVERSAL:
                parents = frozenset({UNIVERSAL})
            sort_decls.append((m.group(1), parents))
        elif m := _CONST.match(ln.text):
            _check_name(m.group(1), ln.number)
            if m.group(1) in file_constants:
                raise ParseError(f"constant {m.group(1)} declared twice", ln.number)
            file_constants[m.group(1)] = _type_at(m.group(2), ln.number)

    if base is None:
        ontology = build_ontology(sort_decls, e_top)
        inherited: dict[str, Type] = {}
    else:
        own = []
        for name, parents in sort_decls:
            if name in base.ontology.parents:
                if base.ontology.parents[name] != parents:
                    raise IncompatibleOntology(name, base.ontology.parents[name], parents)
            else:
                own.append((name, parents))
        inherited_sorts = [(n, ps) for n, ps in base.ontology.parents.items() if n != UNIVERSAL]
        ontology = build_ontology(inherited_sorts + own, e_top) if own else base.ontology
        inherited = dict(base.constants)

    constants = {**inherited, **file_constants}
    reserved = standard_constants()
    for name, ty in file_constants.items():
        if name in reserved and not alpha_equal(reserved[name], ty):
            raise ParseError(f"constant {name} conflicts with the standard signature")

    entries: dict[str, LexicalEntry] = {}
    current: Optional[dict] = None

    def close() -> None:
        if current is not None:
            entries[current["word"]] = LexicalEntry.build(
                current["word"], current["main"], current["type"], current["opts"], current["compat"]
            )

    # Constants first seen in this file's word and opt lines, with their types.
    introduced: dict[str, Type] = {}

    def parse_body(text: str, self_name: str, self_type: Type, number: int) -> Term:
        # Precedence: const lines, then the entry's own name, then the rest.
        scope = {**reserved, **constants}
        if self_name not in file_constants:
            scope[self_name] = self_type
        try:
            term, _ = parse_term_declaring(text, scope)
        except ParseError as exc:
            raise exc.at_line(number) from None
        for name, ty in _constants_of(term):
            if name in reserved or name in file_constants:
                continue
            known = introduced.get(name)
            if known is not None and not alpha_equal(known, ty):
                raise ParseError(
                    f"constant {name} used at {format_type(ty)} but earlier at {format_type(known)}", number
                )
            introduced[name] = ty
            constants[name] = ty
        return term

    for ln in lines:
        if ln.text.startswith(("sort ", "const ", "option ")):
            continue
        if m := _WORD.match(ln.text):
            close()
            word = m.group(1)
            if word in entries:
                raise ParseError(f"word {word} defined twice", ln.number)
            ty = _type_at(m.group(2), ln.number)
            current = {"word": word, "type": ty, "opts": [], "compat": None}
            current["main"] = parse_body(m.group(3), word, ty, ln.number)
        elif m := _OPT.match(ln.text):
            if current is None:
                raise ParseError("opt line outside of a word entry", ln.number)
            name = m.group(1)
            _check_name(name, ln.number)
            ty = _type_at(m.group(2), ln.number)
            if not isinstance(ty, Arrow):
                raise ParseError(f"transformation {name} must have an arrow type", ln.number)
            term = parse_body(m.group(3), name, ty, ln.number)
            try:
                degree = Degree.parse(m.group(4) or "F")
            except (KeyError, ValueError):
                raise ParseError(f"unknown degree {m.group(4)!r}", ln.number) from None
            current["opts"].append(Transformation(name, term, ty.dom, ty.cod, degree, Origin.LEXICAL))
        elif m := _COMPAT.match(ln.text):
            if current is None:
                raise ParseError("compat line outside of a word entry", ln.number)
            subsets = [frozenset(n.strip() for n in body.split(",") if n.strip())
                       for body in _SUBSET.findall(m.group(1))]
            if not subsets:
                raise ParseError("compat line lists no subsets", ln.number)
            current["compat"] = (current["compat"] or ()) + tuple(subsets)
        else:
            raise ParseError(f"cannot parse {ln.text!r}", ln.number)
    close()

    lex = Lexicon(entries, ontology, constants)
    if validate:
        diags = validate_lexicon(lex)
        if diags:
            raise ValidationError(diags)
    return lex


def _type_at(text: str, line: int) -> Type:
    try:
        return parse_type(text)
    except ParseError as exc:
        raise exc.at_line(line) from None


def _constants_of(term: Term):
    if isinstance(term, Const):
        yield term.name, term.type
    elif isinstance(term, App):
        yield from _constants_of(term.fun)
        yield from _constants_of(term.arg)
    elif isinstance(term, Abs):
        yield from _constants_of(term.body)
    elif isinstance(term, TyAbs):
        yield from _constants_of(term.body)
    elif isinstance(term, TyApp):
        yield from _constants_of(term.fun)


def load_lexicon_file(path, *, base: Optional[Lexicon] = None, validate: bool = True) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return load_lexicon(fh, base=base, validate=validate)


# ---------------------------------------------------------------- serialization


def dump_lexicon(lex: Lexicon) -> str:
    out = io.StringIO()
    if not lex.ontology.e_top:
        out.write("option e-top off\n")
    for name in lex.ontology.in_order():
        parents = sorted(lex.ontology.parents[name])
        out.write(f"sort {name}" + (f" <: {', '.join(parents)}" if parents else "") + "\n")
    reserved = standard_constants()
    for name, ty in lex.constants.items():
        if name not in reserved:
            out.write(f"const {name} : {format_type(ty)}\n")
    for entry in lex.entries.values():
        out.write(f"word {entry.word} : {format_type(entry.type)} = {format_term(entry.main)}\n")
        for t in entry.options:
            out.write(
                f"  opt {t.name} : {format_type(Arrow(t.source, t.target))} = {format_term(t.term)} deg {t.degree.label}\n"
            )
        if entry.compatible_subsets is not None:
            out.write("  compat " + " ".join("{" + ", ".join(sorted(s)) + "}" for s in entry.compatible_subsets) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------- overlays


def merge_overlay(base: Lexicon, overlay: Lexicon) -> Lexicon:
    """Overlay entries replace main terms and extend or override transformations."""
    ontology = merge_ontologies(base.ontology, overlay.ontology)
    constants = {**base.constants, **overlay.constants}
    entries = dict(base.entries)
    for word, entry in overlay.entries.items():
        old = entries.get(word)
        if old is None:
            entries[word] = entry
            continue
        opts = list(old.options)
        for t in entry.options:
            for i, existing in enumerate(opts):
                if existing.name == t.name:
                    opts[i] = t
                    break
            else:
                opts.append(t)
        compat = entry.compatible_subsets if entry.compatible_subsets is not None else old.compatible_subsets
        entries[word] = LexicalEntry.build(word, entry.main, entry.type, opts, compat)
    merged = Lexicon(entries, ontology, constants)
    diags = validate_lexicon(merged)
    if diags:
        raise ValidationError(diags)
    return merged


def with_entry(lex: Lexicon, entry: LexicalEntry) -> Lexicon:
    return replace(lex, entries={**lex.entries, entry.word: entry})
