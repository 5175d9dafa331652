"""Quantifier constants, erasure of normal terms to sorted formulas, and rendering."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Union

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
    alpha_equal,
    bound_names,
    free_vars,
    fresh_name,
)
from .syntax import ParseError, format_type, parse_type

_A = TVar("a")
_T = Truth()

CONNECTIVES = {"and": "and", "or": "or", "implies": "implies"}
BINDERS = ("forall", "exists")


def standard_constants() -> dict[str, Type]:
    """Logical constants available in every signature."""
    binary = Arrow(_T, Arrow(_T, _T))
    quantifier = Forall("a", Arrow(Arrow(_A, _T), _T))
    return {
        "and": binary,
        "or": binary,
        "implies": binary,
        "not": Arrow(_T, _T),
        "forall": quantifier,
        "exists": quantifier,
        "epsilon": Forall("a", Arrow(Arrow(_A, _T), _A)),
    }


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class FConst:
    name: str


@dataclass(frozen=True)
class FApp:
    """A function symbol applied to individual terms, e.g. ``f_L(Liverpool)``."""

    fn: str
    args: tuple


@dataclass(frozen=True)
class Epsilon:
    var: str
    sort: Type
    body: "Formula"


FTerm = Union[FVar, FConst, FApp, Epsilon]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quantified:
    kind: str  # "forall" | "exists"
    var: str
    sort: Type
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Quantified]

_BINARY = {"and": And, "or": Or, "implies": Implies}


class NotErasable(Exception):
    def __init__(self, subterm: Term, why: str = "higher-order residue"):
        from .syntax import format_term

        super().__init__(f"{why}: {format_term(subterm)}")
        self.subterm = subterm


# ---------------------------------------------------------------- erasure


def _spine(term: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(term, App):
        args.append(term.arg)
        term = term.fun
    args.reverse()
    return term, args


def _binder_head(head: Term, names: tuple[str, ...]) -> Optional[tuple[str, Optional[Type]]]:
    """Recognize ``c{σ}`` or monomorphic ``c`` for a binder-taking constant ``c``."""
    if isinstance(head, TyApp) and isinstance(head.fun, Const) and head.fun.name in names:
        return head.fun.name, head.type_arg
    if isinstance(head, Const) and head.name in names and isinstance(head.type, Arrow):
        dom = head.type.dom
        if isinstance(dom, Arrow):
            return head.name, dom.dom
    return None


def _open_binder(arg: Term, sort: Type, avoid: set[str]) -> tuple[str, Term]:
    """Variable and body of the predicate under a binder, eta-expanding if needed."""
    if isinstance(arg, Abs):
        if not alpha_equal(arg.var_type, sort):
            raise NotErasable(arg, "binder sort differs from the quantifier's type argument")
        return arg.var, arg.body
    var = fresh_name("x", avoid | free_vars(arg) | bound_names(arg))
    return var, App(arg, Var(var, sort))


def erase(term: Term) -> Formula:
    """Map a beta-normal term of type t onto a sorted first-order formula."""
    return _formula(term, set())


def _formula(term: Term, bound: set[str]) -> Formula:
    head, args = _spine(term)
    if isinstance(head, Const):
        if head.name in _BINARY and len(args) == 2:
            return _BINARY[head.name](_formula(args[0], bound), _formula(args[1], bound))
        if head.name == "not" and len(args) == 1:
            return Not(_formula(args[0], bound))
    binder = _binder_head(head, BINDERS)
    if binder is not None and len(args) == 1:
        kind, sort = binder
        var, body = _open_binder(args[0], sort, bound)
        return Quantified(kind, var, sort, _formula(body, bound | {var}))
    if isinstance(head, (Const, Var)) and not isinstance(head.type, Forall):
        return Atom(head.name, tuple(_individual(a, bound) for a in args))
    raise NotErasable(term)


def _individual(term: Term, bound: set[str]) -> FTerm:
    head, args = _spine(term)
    binder = _binder_head(head, ("epsilon",))
    if binder is not None and len(args) == 1:
        _, sort = binder
        var, body = _open_binder(args[0], sort, bound)
        return Epsilon(var, sort, _formula(body, bound | {var}))
    if isinstance(head, Var) and not args:
        return FVar(head.name)
    if isinstance(head, Const) and not isinstance(head.type, Forall):
        if not args:
            return FConst(head.name)
        return FApp(head.name, tuple(_individual(a, bound) for a in args))
    raise NotErasable(term)


# ---------------------------------------------------------------- embedding


def embed(formula: Formula, signature: Mapping[str, Type]) -> Term:
    """Rebuild a term of type t from a formula; names resolve through ``signature``."""
    return _embed_formula(formula, signature, {})


def _embed_formula(f: Formula, sig, scope: dict[str, Type]) -> Term:
    if isinstance(f, (And, Or, Implies)):
        name = {And: "and", Or: "or", Implies: "implies"}[type(f)]
        return App(App(Const(name, sig.get(name, standard_constants()[name])), _embed_formula(f.left, sig, scope)),
                   _embed_formula(f.right, sig, scope))
    if isinstance(f, Not):
        return App(Const("not", standard_constants()["not"]), _embed_formula(f.body, sig, scope))
    if isinstance(f, Quantified):
        body = _embed_formula(f.body, sig, {**scope, f.var: f.sort})
        const = Const(f.kind, standard_constants()[f.kind])
        return App(TyApp(const, f.sort), Abs(f.var, f.sort, body))
    args = [_embed_individual(a, sig, scope) for a in f.args]
    return _embed_head(f.pred, args, _T, sig, scope)


def _embed_head(name: str, args: list[tuple[Term, Type]], result: Type, sig, scope) -> Term:
    if name in scope:
        head: Term = Var(name, scope[name])
    else:
        ty = sig.get(name)
        if ty is None:
            ty = result
            for _, arg_type in reversed(args):
                ty = Arrow(arg_type, ty)
        head = Const(name, ty)
    for arg, _ in args:
        head = App(head, arg)
    return head


def _embed_individual(t: FTerm, sig, scope) -> tuple[Term, Type]:
    if isinstance(t, FVar):
        return Var(t.name, scope[t.name]), scope[t.name]
    if isinstance(t, FConst):
        return Const(t.name, sig[t.name]), sig[t.name]
    if isinstance(t, Epsilon):
        body = _embed_formula(t.body, sig, {**scope, t.var: t.sort})
        const = Const("epsilon", standard_constants()["epsilon"])
        return App(TyApp(const, t.sort), Abs(t.var, t.sort, body)), t.sort
    args = [_embed_individual(a, sig, scope) for a in t.args]
    ty = sig[t.fn]
    result = ty
    for _ in args:
        result = result.cod
    return _embed_head(t.fn, args, result, sig, scope), result


# ---------------------------------------------------------------- printing

_SYMBOLS = {
    "ascii": {"and": "&", "or": "|", "implies": "->", "not": "~",
              "forall": "forall ", "exists": "exists ", "epsilon": "eps "},
    "unicode": {"and": "∧", "or": "∨", "implies": "→", "not": "¬",
                "forall": "∀ ", "exists": "∃ ", "epsilon": "ε "},
}


def print_formula(f: Formula, style: str = "ascii") -> str:
    if style == "sexpr":
        return _sexpr(f)
    if style not in _SYMBOLS:
        raise ValueError(f"unknown style {style!r}")
    return _render(f, "top", _SYMBOLS[style], style == "unicode")


def _sort_text(sort: Type, unicode: bool) -> str:
    if isinstance(sort, (Sort, Truth, TVar)):
        return format_type(sort)
    return f"({format_type(sort, unicode=unicode)})"


def _render(f: Formula, position: str, sym: dict, unicode: bool) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(_render_individual(a, sym, unicode) for a in f.args)})"
    if isinstance(f, Not):
        return sym["not"] + _render(f.body, "unary", sym, unicode)
    if isinstance(f, Quantified):
        text = f"{sym[f.kind]}{f.var}:{_sort_text(f.sort, unicode)}. {_render(f.body, 'body', sym, unicode)}"
        return f"({text})" if position in ("operand", "unary") else text
    op = {And: "and", Or: "or", Implies: "implies"}[type(f)]
    text = f"{_render(f.left, 'operand', sym, unicode)} {sym[op]} {_render(f.right, 'operand', sym, unicode)}"
    return text if position == "top" else f"({text})"


def _render_individual(t: FTerm, sym: dict, unicode: bool) -> str:
    if isinstance(t, (FVar, FConst)):
        return t.name
    if isinstance(t, FApp):
        return f"{t.fn}({', '.join(_render_individual(a, sym, unicode) for a in t.args)})"
    body = _render(t.body, "body", sym, unicode)
    return f"{sym['epsilon']}{t.var}:{_sort_text(t.sort, unicode)}. {body}"


def _sexpr_sort(sort: Type) -> str:
    if isinstance(sort, (Sort, Truth, TVar)):
        return format_type(sort)
    return f"[{format_type(sort)}]"


def _sexpr(f: Formula) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"({f.pred} {' '.join(_sexpr_individual(a) for a in f.args)})"
    if isinstance(f, Not):
        return f"(not {_sexpr(f.body)})"
    if isinstance(f, Quantified):
        return f"({f.kind} {f.var} {_sexpr_sort(f.sort)} {_sexpr(f.body)})"
    op = {And: "and", Or: "or", Implies: "implies"}[type(f)]
    return f"({op} {_sexpr(f.left)} {_sexpr(f.right)})"


def _sexpr_individual(t: FTerm) -> str:
    if isinstance(t, (FVar, FConst)):
        return t.name
    if isinstance(t, FApp):
        return f"({t.fn} {' '.join(_sexpr_individual(a) for a in t.args)})"
    return f"(eps {t.var} {_sexpr_sort(t.sort)} {_sexpr(t.body)})"


# ---------------------------------------------------------------- s-expression reader

_SEXPR_TOKEN = re.compile(r"\s*(\[[^\]]*\]|[()]|[^\s()\[\]]+)")


def _sexpr_tokens(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _SEXPR_TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"bad s-expression near {text[pos:pos + 10]!r}", column=pos)
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def _read_tree(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise ParseError("unexpected end of s-expression")
    tok = tokens[pos]
    if tok == "(":
        items, pos = [], pos + 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read_tree(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise ParseError("unbalanced parentheses")
        return items, pos + 1
    if tok == ")":
        raise ParseError("unexpected ')'")
    return tok, pos + 1


def _read_sort(tok) -> Type:
    if not isinstance(tok, str):
        raise ParseError("expected a sort")
    return parse_type(tok[1:-1] if tok.startswith("[") else tok)


def parse_sexpr_formula(text: str) -> Formula:
    tokens = _sexpr_tokens(text)
    tree, pos = _read_tree(tokens, 0)
    if pos != len(tokens):
        raise ParseError("trailing input after s-expression")
    return _tree_formula(tree, frozenset())


def _tree_formula(tree, bound: frozenset) -> Formula:
    if isinstance(tree, str):
        return Atom(tree)
    if not tree or not isinstance(tree[0], str):
        raise ParseError("formula must start with an operator or predicate")
    head, rest = tree[0], tree[1:]
    if head in _BINARY and len(rest) == 2:
        return _BINARY[head](_tree_formula(rest[0], bound), _tree_formula(rest[1], bound))
    if head == "not" and len(rest) == 1:
        return Not(_tree_formula(rest[0], bound))
    if head in BINDERS and len(rest) == 3:
        var = rest[0]
        return Quantified(head, var, _read_sort(rest[1]), _tree_formula(rest[2], bound | {var}))
    return Atom(head, tuple(_tree_individual(a, bound) for a in rest))


def _tree_individual(tree, bound: frozenset) -> FTerm:
    if isinstance(tree, str):
        return FVar(tree) if tree in bound else FConst(tree)
    head, rest = tree[0], tree[1:]
    if head == "eps" and len(rest) == 3:
        var = rest[0]
        return Epsilon(var, _read_sort(rest[1]), _tree_formula(rest[2], bound | {var}))
    return FApp(head, tuple(_tree_individual(a, bound) for a in rest))
