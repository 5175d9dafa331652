"""Concrete syntax for types and terms.

    Type ::= sortName | "t" | typeVar | Type "->" Type | "Pi" typeVar "." Type | "(" Type ")"
    Term ::= ident | ident ":" Type | "lam" ident ":" Type "." Term | "Lam" typeVar "." Term
           | Term Term | Term "{" Type "}" | "(" Term ")"

Arrows associate to the right, application to the left.  ``λ``, ``Λ``, ``Π``
and ``→`` are accepted as aliases of ``lam``, ``Lam``, ``Pi`` and ``->``.
"""

from __future__ import annotations

import re
from typing import Callable, Mapping, Optional

from .core import (
    Abs,
    App,
    Arrow,
    Const,
    Forall,
    Sort,
    Term,
    Truth,
    TVar,
    TyAbs,
    TyApp,
    Type,
    Var,
)

GREEK_NAMES = frozenset(
    "alpha beta gamma delta zeta eta theta iota kappa mu nu xi omicron pi rho "
    "sigma tau upsilon phi chi psi omega".split()
)
_GREEK_LETTERS = frozenset("αβγδζηθικμνξοπρστυφχψω")
_TYVAR_SUFFIX = re.compile(r"[\d']*$")

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<arrow>->|→)
      | (?P<binder>[λΛΠ])
      | (?P<punct>[(){}.:,])
      | (?P<ident>[^\W\d][\w']*)
    )""",
    re.VERBOSE,
)
_ALIASES = {"λ": "lam", "Λ": "Lam", "Π": "Pi", "→": "->"}
KEYWORDS = frozenset({"lam", "Lam", "Pi"})


class ParseError(Exception):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = ""
        if line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{message}")
        self.message = message
        self.line = line
        self.column = column

    def at_line(self, line: int) -> "ParseError":
        return ParseError(self.message, line, self.column)


def is_type_variable(name: str) -> bool:
    stem = _TYVAR_SUFFIX.sub("", name)
    if stem in GREEK_NAMES or stem in _GREEK_LETTERS:
        return True
    return len(stem) == 1 and stem.islower() and stem not in "et"


def is_sort_name(name: str) -> bool:
    return name == "e" or name[:1].isupper()


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", column=pos)
        kind = m.lastgroup
        value = m.group(kind)
        value = _ALIASES.get(value, value)
        if kind == "binder":
            kind = "ident"
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    return tokens


Resolver = Callable[[str], Optional[Type]]


class _Parser:
    def __init__(self, text: str, constants: Mapping[str, Type], resolve: Optional[Resolver]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.constants = constants
        self.resolve = resolve
        self.declared: dict[str, Type] = {}

    # token helpers
    def peek(self) -> Optional[str]:
        return self.tokens[self.pos][1] if self.pos < len(self.tokens) else None

    def peek_kind(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def error(self, message: str) -> ParseError:
        column = self.tokens[self.pos][2] if self.pos < len(self.tokens) else None
        return ParseError(message, column=column)

    def expect(self, value: str) -> None:
        if self.peek() != value:
            found = self.peek() or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}")
        self.pos += 1

    def ident(self) -> str:
        if self.peek_kind() != "ident" or self.peek() in KEYWORDS:
            raise self.error(f"expected an identifier, found {self.peek() or 'end of input'!r}")
        value = self.peek()
        self.pos += 1
        return value

    def finish(self) -> None:
        if self.pos != len(self.tokens):
            raise self.error(f"unexpected {self.peek()!r}")

    # types
    def type_(self) -> Type:
        if self.peek() == "Pi":
            self.pos += 1
            var = self.ident()
            if not is_type_variable(var):
                raise self.error(f"{var!r} is not a type variable name")
            self.expect(".")
            return Forall(var, self.type_())
        left = self.type_atom()
        if self.peek() == "->":
            self.pos += 1
            return Arrow(left, self.type_())
        return left

    def type_atom(self) -> Type:
        if self.peek() == "(":
            self.pos += 1
            ty = self.type_()
            self.expect(")")
            return ty
        name = self.ident()
        if name == "t":
            return Truth()
        if is_sort_name(name):
            return Sort(name)
        if is_type_variable(name):
            return TVar(name)
        raise ParseError(f"{name!r} is neither a sort nor a type variable")

    # terms
    def term(self, scope: dict[str, Type]) -> Term:
        head = self.peek()
        if head == "lam":
            self.pos += 1
            var = self.ident()
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            return Abs(var, ty, self.term({**scope, var: ty}))
        if head == "Lam":
            self.pos += 1
            var = self.ident()
            if not is_type_variable(var):
                raise self.error(f"{var!r} is not a type variable name")
            self.expect(".")
            return TyAbs(var, self.term(scope))
        result = self.term_atom(scope)
        while True:
            nxt = self.peek()
            if nxt == "{":
                self.pos += 1
                ty = self.type_()
                self.expect("}")
                result = TyApp(result, ty)
            elif nxt == "(" or (self.peek_kind() == "ident" and nxt not in KEYWORDS):
                result = App(result, self.term_atom(scope))
            elif nxt in ("lam", "Lam"):
                result = App(result, self.term(scope))
            else:
                return result

    def term_atom(self, scope: dict[str, Type]) -> Term:
        if self.peek() == "(":
            self.pos += 1
            term = self.term(scope)
            self.expect(")")
            return term
        name = self.ident()
        annotation = None
        if self.peek() == ":":
            self.pos += 1
            if self.peek() == "(":
                annotation = self.type_atom()
                if self.peek() == "->":
                    self.pos += 1
                    annotation = Arrow(annotation, self.type_())
            else:
                annotation = self.type_()
        if name in scope:
            return Var(name, annotation if annotation is not None else scope[name])
        if annotation is not None:
            self.declared[name] = annotation
            return Const(name, annotation)
        if name in self.declared:
            return Const(name, self.declared[name])
        ty = self.constants.get(name)
        if ty is None and self.resolve is not None:
            ty = self.resolve(name)
        if ty is None:
            raise ParseError(f"unknown identifier {name!r}")
        return Const(name, ty)


def parse_type(text: str) -> Type:
    parser = _Parser(text, {}, None)
    ty = parser.type_()
    parser.finish()
    return ty


def parse_term(
    text: str,
    constants: Optional[Mapping[str, Type]] = None,
    resolve: Optional[Resolver] = None,
    scope: Optional[Mapping[str, Type]] = None,
) -> Term:
    """Parse ``text``.  Bare identifiers resolve to bound variables first, then
    to ``constants``, then through ``resolve``; ``ident:Type`` declares a constant.
    """
    term, _ = parse_term_declaring(text, constants, resolve, scope)
    return term


def parse_term_declaring(
    text: str,
    constants: Optional[Mapping[str, Type]] = None,
    resolve: Optional[Resolver] = None,
    scope: Optional[Mapping[str, Type]] = None,
) -> tuple[Term, dict[str, Type]]:
    parser = _Parser(text, constants or {}, resolve)
    term = parser.term(dict(scope or {}))
    parser.finish()
    return term, parser.declared


# ---------------------------------------------------------------- printing


def format_type(ty: Type, *, unicode: bool = False, _nested: bool = False) -> str:
    arrow = " → " if unicode else " -> "
    if isinstance(ty, (Sort, TVar)):
        return ty.name
    if isinstance(ty, Truth):
        return "t"
    if isinstance(ty, Arrow):
        text = format_type(ty.dom, unicode=unicode, _nested=True) + arrow + format_type(ty.cod, unicode=unicode)
    else:
        pi = "Π" if unicode else "Pi "
        text = f"{pi}{ty.var}. {format_type(ty.body, unicode=unicode)}"
    return f"({text})" if _nested else text


def format_term(term: Term, *, annotate: bool = False) -> str:
    """Render in the concrete syntax; ``annotate`` writes constants as ``(c:T)``."""
    return _fmt(term, "top", annotate)


def _fmt(term: Term, position: str, annotate: bool) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Const):
        if annotate:
            return f"({term.name}:{format_type(term.type)})"
        return term.name
    if isinstance(term, Abs):
        text = f"lam {term.var}:{format_type(term.var_type)}. {_fmt(term.body, 'top', annotate)}"
    elif isinstance(term, TyAbs):
        text = f"Lam {term.var}. {_fmt(term.body, 'top', annotate)}"
    elif isinstance(term, App):
        text = f"{_fmt(term.fun, 'fun', annotate)} {_fmt(term.arg, 'arg', annotate)}"
        if position != "arg":
            return text
    else:
        text = f"{_fmt(term.fun, 'fun', annotate)} {{{format_type(term.type_arg)}}}"
        if position != "arg":
            return text
    return text if position == "top" else f"({text})"
