"""Second-order many-sorted lambda calculus: types, terms, typing and reduction.

Terms are Church-style: every variable occurrence carries its type and every
lambda binder is annotated.  Values are immutable frozen dataclasses; binder
freshening picks the first unused ``name``, ``name1``, ``name2`` ... so no
shared counter is involved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

DEFAULT_STEP_BUDGET = 10**6


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Sort:
    """A base sort, e.g. ``e`` or ``City``."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Truth:
    """The type ``t`` of truth values."""

    def __str__(self) -> str:
        return "t"


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self) -> str:
        from .syntax import format_type

        return format_type(self)


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Type"

    def __str__(self) -> str:
        from .syntax import format_type

        return format_type(self)


Type = Union[Sort, Truth, TVar, Arrow, Forall]

E = Sort("e")
T = Truth()


def arrow(*types: Type) -> Type:
    """Right-nested arrow: ``arrow(a, b, c)`` is ``a -> b -> c``."""
    result = types[-1]
    for ty in reversed(types[:-1]):
        result = Arrow(ty, result)
    return result


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str
    type: Type

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str
    type: Type

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self) -> str:
        from .syntax import format_term

        return format_term(self)


@dataclass(frozen=True)
class Abs:
    var: str
    var_type: Type
    body: "Term"

    def __str__(self) -> str:
        from .syntax import format_term

        return format_term(self)


@dataclass(frozen=True)
class TyAbs:
    var: str
    body: "Term"

    def __str__(self) -> str:
        from .syntax import format_term

        return format_term(self)


@dataclass(frozen=True)
class TyApp:
    fun: "Term"
    type_arg: Type

    def __str__(self) -> str:
        from .syntax import format_term

        return format_term(self)


Term = Union[Var, Const, App, Abs, TyAbs, TyApp]


def apply(fun: Term, *args: Term) -> Term:
    for arg in args:
        fun = App(fun, arg)
    return fun


# ---------------------------------------------------------------- errors


class TypingError(Exception):
    """Base class for failures of :func:`type_of`."""


class UnboundVariable(TypingError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class ApplicationMismatch(TypingError):
    """The argument type differs from the function's domain."""

    def __init__(self, expected: Type, actual: Type, term: Optional[Term] = None):
        from .syntax import format_type

        super().__init__(
            f"application mismatch: expected {format_type(expected)}, got {format_type(actual)}"
        )
        self.expected = expected
        self.actual = actual
        self.term = term


class EscapeViolation(TypingError):
    def __init__(self, tyvar: str, var: str):
        super().__init__(
            f"type abstraction over {tyvar!r} escapes through the type of free variable {var!r}"
        )
        self.tyvar = tyvar
        self.var = var


class NotAFunction(TypingError):
    def __init__(self, ty: Type):
        super().__init__(f"not a function type: {ty}")
        self.type = ty


class NotAForall(TypingError):
    def __init__(self, ty: Type):
        super().__init__(f"not a universally quantified type: {ty}")
        self.type = ty


class IllFormedType(TypingError):
    def __init__(self, ty: Type, part: Type):
        super().__init__(f"ill-formed type {ty}: offending part {part}")
        self.type = ty
        self.part = part


class ConstantMismatch(TypingError):
    def __init__(self, name: str, declared: Type, used: Type):
        super().__init__(f"constant {name!r} is declared {declared} but used at {used}")
        self.name = name
        self.declared = declared
        self.used = used


class VariableMismatch(TypingError):
    def __init__(self, name: str, bound: Type, used: Type):
        super().__init__(f"variable {name!r} is bound at {bound} but annotated {used}")


class IllTyped(Exception):
    """Raised by the reduction functions when their input does not type-check."""

    def __init__(self, cause: TypingError):
        super().__init__(str(cause))
        self.cause = cause


class StepBudgetExceeded(Exception):
    def __init__(self, budget: int):
        super().__init__(f"normalization did not finish within {budget} steps")
        self.budget = budget


# ---------------------------------------------------------------- contexts


@dataclass(frozen=True)
class TypingContext:
    """Term variables, type variables, constant signature and declared sorts.

    ``sorts=None`` disables the declared-sort check.
    """

    vars: Mapping[str, Type] = field(default_factory=dict)
    tyvars: frozenset = frozenset()
    constants: Mapping[str, Type] = field(default_factory=dict)
    sorts: Optional[frozenset] = None

    def bind(self, name: str, ty: Type) -> "TypingContext":
        return TypingContext({**self.vars, name: ty}, self.tyvars, self.constants, self.sorts)

    def bind_type(self, name: str) -> "TypingContext":
        return TypingContext(self.vars, self.tyvars | {name}, self.constants, self.sorts)


EMPTY_CONTEXT = TypingContext()


# ---------------------------------------------------------------- free names


def free_type_vars(ty: Type) -> set[str]:
    if isinstance(ty, TVar):
        return {ty.name}
    if isinstance(ty, Arrow):
        return free_type_vars(ty.dom) | free_type_vars(ty.cod)
    if isinstance(ty, Forall):
        return free_type_vars(ty.body) - {ty.var}
    return set()


def term_type_vars(term: Term) -> set[str]:
    """Type variables occurring free anywhere in a term's annotations."""
    if isinstance(term, (Var, Const)):
        return free_type_vars(term.type)
    if isinstance(term, App):
        return term_type_vars(term.fun) | term_type_vars(term.arg)
    if isinstance(term, Abs):
        return free_type_vars(term.var_type) | term_type_vars(term.body)
    if isinstance(term, TyAbs):
        return term_type_vars(term.body) - {term.var}
    return term_type_vars(term.fun) | free_type_vars(term.type_arg)


def free_vars(term: Term) -> set[str]:
    if isinstance(term, Var):
        return {term.name}
    if isinstance(term, Const):
        return set()
    if isinstance(term, App):
        return free_vars(term.fun) | free_vars(term.arg)
    if isinstance(term, Abs):
        return free_vars(term.body) - {term.var}
    if isinstance(term, TyAbs):
        return free_vars(term.body)
    return free_vars(term.fun)


def bound_names(term: Term) -> set[str]:
    if isinstance(term, (Var, Const)):
        return set()
    if isinstance(term, App):
        return bound_names(term.fun) | bound_names(term.arg)
    if isinstance(term, Abs):
        return {term.var} | bound_names(term.body)
    if isinstance(term, TyAbs):
        return {term.var} | bound_names(term.body)
    return bound_names(term.fun)


_SUFFIX = re.compile(r"\d+$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = _SUFFIX.sub("", base) or base
    if stem not in avoid:
        return stem
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


# ---------------------------------------------------------------- substitution


def substitute_type(ty: Type, var: str, replacement: Type) -> Type:
    """Capture-avoiding ``ty[var := replacement]``."""
    if isinstance(ty, TVar):
        return replacement if ty.name == var else ty
    if isinstance(ty, Arrow):
        return Arrow(
            substitute_type(ty.dom, var, replacement),
            substitute_type(ty.cod, var, replacement),
        )
    if isinstance(ty, Forall):
        if ty.var == var or var not in free_type_vars(ty.body):
            return ty
        rep_free = free_type_vars(replacement)
        binder, body = ty.var, ty.body
        if binder in rep_free:
            new = fresh_name(binder, rep_free | free_type_vars(body) | {var})
            body = substitute_type(body, binder, TVar(new))
            binder = new
        return Forall(binder, substitute_type(body, var, replacement))
    return ty


def substitute_type_in_term(term: Term, var: str, replacement: Type) -> Term:
    """Replace the free type variable ``var`` throughout a term's annotations."""
    if isinstance(term, Var):
        return Var(term.name, substitute_type(term.type, var, replacement))
    if isinstance(term, Const):
        return Const(term.name, substitute_type(term.type, var, replacement))
    if isinstance(term, App):
        return App(
            substitute_type_in_term(term.fun, var, replacement),
            substitute_type_in_term(term.arg, var, replacement),
        )
    if isinstance(term, Abs):
        return Abs(
            term.var,
            substitute_type(term.var_type, var, replacement),
            substitute_type_in_term(term.body, var, replacement),
        )
    if isinstance(term, TyAbs):
        if term.var == var or var not in term_type_vars(term.body):
            return term
        rep_free = free_type_vars(replacement)
        binder, body = term.var, term.body
        if binder in rep_free:
            new = fresh_name(binder, rep_free | term_type_vars(body) | {var})
            body = substitute_type_in_term(body, binder, TVar(new))
            binder = new
        return TyAbs(binder, substitute_type_in_term(body, var, replacement))
    return TyApp(
        substitute_type_in_term(term.fun, var, replacement),
        substitute_type(term.type_arg, var, replacement),
    )


def substitute_term(body: Term, var: str, replacement: Term) -> Term:
    """Capture-avoiding ``body[var := replacement]``."""
    if var not in free_vars(body):
        return body
    return _subst(body, var, replacement, free_vars(replacement), term_type_vars(replacement))


def _subst(body: Term, var: str, rep: Term, rep_fv: set, rep_ftv: set) -> Term:
    if isinstance(body, Var):
        return rep if body.name == var else body
    if isinstance(body, Const):
        return body
    if isinstance(body, App):
        return App(_subst(body.fun, var, rep, rep_fv, rep_ftv), _subst(body.arg, var, rep, rep_fv, rep_ftv))
    if isinstance(body, Abs):
        if body.var == var or var not in free_vars(body.body):
            return body
        binder, inner = body.var, body.body
        if binder in rep_fv:
            new = fresh_name(binder, rep_fv | free_vars(inner) | bound_names(inner) | {var})
            inner = substitute_term(inner, binder, Var(new, body.var_type))
            binder = new
        return Abs(binder, body.var_type, _subst(inner, var, rep, rep_fv, rep_ftv))
    if isinstance(body, TyAbs):
        binder, inner = body.var, body.body
        if var not in free_vars(inner):
            return body
        if binder in rep_ftv:
            new = fresh_name(binder, rep_ftv | term_type_vars(inner))
            inner = substitute_type_in_term(inner, binder, TVar(new))
            binder = new
        return TyAbs(binder, _subst(inner, var, rep, rep_fv, rep_ftv))
    return TyApp(_subst(body.fun, var, rep, rep_fv, rep_ftv), body.type_arg)


# ---------------------------------------------------------------- alpha equivalence


def _type_key(ty: Type, env: tuple) -> tuple:
    if isinstance(ty, TVar):
        for depth, name in enumerate(reversed(env)):
            if name == ty.name:
                return ("B", depth)
        return ("V", ty.name)
    if isinstance(ty, Sort):
        return ("S", ty.name)
    if isinstance(ty, Truth):
        return ("t",)
    if isinstance(ty, Arrow):
        return ("->", _type_key(ty.dom, env), _type_key(ty.cod, env))
    return ("Pi", _type_key(ty.body, env + (ty.var,)))


def _term_key(term: Term, venv: tuple, tenv: tuple) -> tuple:
    if isinstance(term, Var):
        for depth, name in enumerate(reversed(venv)):
            if name == term.name:
                return ("b", depth)
        return ("v", term.name, _type_key(term.type, tenv))
    if isinstance(term, Const):
        return ("c", term.name, _type_key(term.type, tenv))
    if isinstance(term, App):
        return ("@", _term_key(term.fun, venv, tenv), _term_key(term.arg, venv, tenv))
    if isinstance(term, Abs):
        return ("lam", _type_key(term.var_type, tenv), _term_key(term.body, venv + (term.var,), tenv))
    if isinstance(term, TyAbs):
        return ("Lam", _term_key(term.body, venv, tenv + (term.var,)))
    return ("{}", _term_key(term.fun, venv, tenv), _type_key(term.type_arg, tenv))


def alpha_key(obj: Union[Type, Term]) -> tuple:
    """A nameless, hashable key: equal keys iff alpha-equivalent."""
    if isinstance(obj, (Sort, Truth, TVar, Arrow, Forall)):
        return ("type", _type_key(obj, ()))
    return ("term", _term_key(obj, (), ()))


def alpha_equal(a: Union[Type, Term], b: Union[Type, Term]) -> bool:
    return alpha_key(a) == alpha_key(b)


# ---------------------------------------------------------------- typing


def ill_formed_part(ty: Type, ctx: TypingContext = EMPTY_CONTEXT) -> Optional[Type]:
    """The first subexpression of ``ty`` that breaks type formation, if any."""

    def walk(node: Type, bound: frozenset) -> Optional[Type]:
        if isinstance(node, TVar):
            return None if node.name in bound or node.name in ctx.tyvars else node
        if isinstance(node, Sort):
            if ctx.sorts is not None and node.name not in ctx.sorts:
                return node
            return None
        if isinstance(node, Truth):
            return None
        if isinstance(node, Arrow):
            return walk(node.dom, bound) or walk(node.cod, bound)
        return walk(node.body, bound | {node.var})

    return walk(ty, frozenset())


def well_formed_type(ty: Type, ctx: TypingContext = EMPTY_CONTEXT) -> bool:
    return ill_formed_part(ty, ctx) is None


def _check_type(ty: Type, ctx: TypingContext) -> None:
    part = ill_formed_part(ty, ctx)
    if part is not None:
        raise IllFormedType(ty, part)


def type_of(term: Term, ctx: TypingContext = EMPTY_CONTEXT) -> Type:
    """The type of ``term`` under ``ctx``; raises a :class:`TypingError` subclass."""
    if isinstance(term, Var):
        if term.name not in ctx.vars:
            raise UnboundVariable(term.name)
        bound = ctx.vars[term.name]
        if not alpha_equal(bound, term.type):
            raise VariableMismatch(term.name, bound, term.type)
        return bound
    if isinstance(term, Const):
        _check_type(term.type, ctx)
        declared = ctx.constants.get(term.name)
        if declared is not None and not alpha_equal(declared, term.type):
            raise ConstantMismatch(term.name, declared, term.type)
        return term.type
    if isinstance(term, App):
        fun_type = type_of(term.fun, ctx)
        arg_type = type_of(term.arg, ctx)
        if not isinstance(fun_type, Arrow):
            raise NotAFunction(fun_type)
        if not alpha_equal(fun_type.dom, arg_type):
            raise ApplicationMismatch(fun_type.dom, arg_type, term)
        return fun_type.cod
    if isinstance(term, Abs):
        _check_type(term.var_type, ctx)
        return Arrow(term.var_type, type_of(term.body, ctx.bind(term.var, term.var_type)))
    if isinstance(term, TyAbs):
        for name in sorted(free_vars(term.body)):
            if name in ctx.vars and term.var in free_type_vars(ctx.vars[name]):
                raise EscapeViolation(term.var, name)
        return Forall(term.var, type_of(term.body, ctx.bind_type(term.var)))
    fun_type = type_of(term.fun, ctx)
    if not isinstance(fun_type, Forall):
        raise NotAForall(fun_type)
    _check_type(term.type_arg, ctx)
    return substitute_type(fun_type.body, fun_type.var, term.type_arg)


# ---------------------------------------------------------------- reduction


def _contract(term: Term) -> Optional[Term]:
    if isinstance(term, App) and isinstance(term.fun, Abs):
        return substitute_term(term.fun.body, term.fun.var, term.arg)
    if isinstance(term, TyApp) and isinstance(term.fun, TyAbs):
        return substitute_type_in_term(term.fun.body, term.fun.var, term.type_arg)
    return None


def _step_outermost(term: Term) -> Optional[Term]:
    reduct = _contract(term)
    if reduct is not None:
        return reduct
    return _step_children(term, _step_outermost)


def _step_innermost(term: Term) -> Optional[Term]:
    inner = _step_children(term, _step_innermost)
    if inner is not None:
        return inner
    return _contract(term)


def _step_children(term: Term, step) -> Optional[Term]:
    if isinstance(term, App):
        fun = step(term.fun)
        if fun is not None:
            return App(fun, term.arg)
        arg = step(term.arg)
        return None if arg is None else App(term.fun, arg)
    if isinstance(term, Abs):
        body = step(term.body)
        return None if body is None else Abs(term.var, term.var_type, body)
    if isinstance(term, TyAbs):
        body = step(term.body)
        return None if body is None else TyAbs(term.var, body)
    if isinstance(term, TyApp):
        fun = step(term.fun)
        return None if fun is None else TyApp(fun, term.type_arg)
    return None


_STRATEGIES = {"leftmost": _step_outermost, "innermost": _step_innermost}


def _checked(term: Term, ctx: TypingContext) -> Type:
    try:
        return type_of(term, ctx)
    except TypingError as exc:
        raise IllTyped(exc) from exc


def reduce_step(term: Term, ctx: TypingContext = EMPTY_CONTEXT, *, strategy: str = "leftmost") -> Optional[Term]:
    """Contract one redex (leftmost-outermost by default); ``None`` in normal form."""
    _checked(term, ctx)
    return _STRATEGIES[strategy](term)


def normalize(
    term: Term,
    ctx: TypingContext = EMPTY_CONTEXT,
    *,
    strategy: str = "leftmost",
    budget: int = DEFAULT_STEP_BUDGET,
) -> Term:
    _checked(term, ctx)
    step = _STRATEGIES[strategy]
    for _ in range(budget):
        reduct = step(term)
        if reduct is None:
            return term
        term = reduct
    if step(term) is None:
        return term
    raise StepBudgetExceeded(budget)


def is_normal(term: Term) -> bool:
    return _step_outermost(term) is None
