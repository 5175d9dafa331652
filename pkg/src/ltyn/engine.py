"""Meaning assembly over derivation trees.

Each sentence is elaborated bottom-up.  A mismatched application is repaired
by inserting one transformation from the argument's lexical entry (or an
ontology accommodation); conjunctions coerce their shared argument separately
for each conjunct.  Every use of a transformation is recorded against the
value it transforms, and flexibility degrees decide which combinations of
uses are acceptable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Union

from .core import (
    DEFAULT_STEP_BUDGET,
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
    TypingContext,
    Var,
    alpha_equal,
    alpha_key,
    free_type_vars,
    free_vars,
    fresh_name,
    normalize,
    substitute_type,
    type_of,
)
from .discourse import Apply, Conj, Discourse, Leaf, Node, Ref, height, head_word
from .lexicon import LexicalEntry, Lexicon, UnknownWord, lookup
from .ontology import UNIVERSAL, accommodation_coercion
from .syntax import format_term, format_type
from .transformation import Degree, Origin, Transformation, identity


@dataclass(frozen=True)
class EngineConfig:
    max_chain_depth: int = 2
    enumerate_all_readings: bool = True
    sentence_resets_semiflexible: bool = True
    step_budget: int = DEFAULT_STEP_BUDGET

    def __post_init__(self):
        if self.max_chain_depth < 1:
            raise ValueError("max_chain_depth must be at least 1")
        if self.step_budget < 1:
            raise ValueError("step_budget must be positive")


# ---------------------------------------------------------------- errors


class CompositionError(Exception):
    pass


class MatchFailure(CompositionError):
    pass


class Ambiguous(CompositionError):
    def __init__(self, binders: Iterable[str]):
        self.binders = tuple(binders)
        super().__init__(f"type variables {', '.join(self.binders)} are not determined by the arguments")


@dataclass(frozen=True)
class Applied:
    """One use of a transformation on a value, in a given sentence."""

    name: str
    degree: Degree
    origin: Origin
    sentence: int

    @property
    def label(self) -> str:
        return f"{self.name}/{self.degree.label}"


class ConstraintViolation(CompositionError):
    def __init__(self, pairs: Iterable[tuple[Applied, Applied]]):
        self.pairs = tuple(pairs)
        super().__init__("constraint: " + ", ".join(f"{a.label} vs {b.label}" for a, b in self.pairs))


class ChainDepthExceeded(CompositionError):
    def __init__(self, word: str, depth: int, limit: int):
        self.word, self.depth, self.limit = word, depth, limit
        super().__init__(f"chain-depth: {word} would need {depth} chained transformations (limit {limit})")


@dataclass(frozen=True)
class MissingTransformation:
    anchor_word: Optional[str]
    source: Type
    target: Type
    predicate_word: Optional[str]

    def __post_init__(self):
        if alpha_equal(self.source, self.target):
            raise ValueError("a missing transformation needs distinct source and target")

    def __str__(self) -> str:
        who = self.anchor_word or "argument"
        by = f" required by {self.predicate_word}" if self.predicate_word else ""
        return f"missing transformation {format_type(self.source)} -> {format_type(self.target)} for {who}{by}"


# ---------------------------------------------------------------- flexibility


def join(a: Degree, b: Degree, *, same_name: bool = False, strict_semiflexible: bool = False) -> Optional[Degree]:
    """Combined degree of two uses on one value, or ``None`` when they clash.

    A transformation always combines with itself.  With ``strict_semiflexible``
    a semi-flexible use behaves as a rigid one.
    """
    if same_name:
        return max(a, b)
    if strict_semiflexible:
        a = Degree.R if a is Degree.SF else a
        b = Degree.R if b is Degree.SF else b
    if Degree.R in (a, b) or (a is Degree.SF and b is Degree.SF):
        return None
    return max(a, b)


@dataclass(frozen=True)
class AnchorState:
    """The value an anchor carries together with the uses recorded on it."""

    anchor: str
    word: str
    key: tuple
    term: Term
    type: Type
    depth: int = 0
    applied: tuple = ()
    label: Degree = Degree.F


def _active(applied: Iterable[Applied], sentence: int, cfg: EngineConfig) -> list[Applied]:
    return [
        p for p in applied
        if p.sentence == sentence or not (cfg.sentence_resets_semiflexible and p.degree is Degree.SF)
    ]


def _fits(names: list[str], compat: tuple) -> bool:
    return len(set(names)) == len(names) and any(set(names) <= s for s in compat)


def update_anchor_state(
    state: AnchorState,
    t: Transformation,
    sentence: int,
    cfg: EngineConfig,
    compat: Optional[tuple] = None,
    enforce: bool = True,
) -> AnchorState:
    """Record a use of ``t`` on ``state``'s value after checking the constraints.

    Within a sentence a declared compatibility family replaces the degree
    check: when a value is used more than once, the names used must be
    distinct and lie inside one declared subset.
    """
    new = Applied(t.name, t.degree, t.origin, sentence)
    if enforce:
        pairs = []
        here = [p for p in state.applied if p.sentence == sentence]
        if compat is not None and here and not _fits([p.name for p in here] + [t.name], compat):
            pairs = [(p, new) for p in here if not _fits([p.name, t.name], compat)] or [(here[-1], new)]
        for p in _active(state.applied, sentence, cfg):
            if p.sentence == sentence:
                if compat is not None:
                    continue
                strict = True
            else:
                strict = not cfg.sentence_resets_semiflexible
            if join(p.degree, new.degree, same_name=p.name == new.name, strict_semiflexible=strict) is None:
                pairs.append((p, new))
        if pairs:
            raise ConstraintViolation(pairs)
    depth = state.depth + (1 if t.origin is Origin.LEXICAL else 0)
    if enforce and depth > cfg.max_chain_depth:
        raise ChainDepthExceeded(state.word, depth, cfg.max_chain_depth)
    applied = state.applied + (new,)
    label = max(p.degree for p in _active(applied, sentence, cfg))
    return replace(state, applied=applied, depth=depth, label=label)


# ---------------------------------------------------------------- type arguments


def _match(pattern: Type, actual: Type, binders: set, subst: dict) -> None:
    if isinstance(pattern, TVar) and pattern.name in binders:
        known = subst.get(pattern.name)
        if known is None:
            subst[pattern.name] = actual
        elif not alpha_equal(known, actual):
            raise MatchFailure(f"{pattern.name} would be both {format_type(known)} and {format_type(actual)}")
        return
    if isinstance(pattern, Arrow) and isinstance(actual, Arrow):
        _match(pattern.dom, actual.dom, binders, subst)
        _match(pattern.cod, actual.cod, binders, subst)
        return
    if isinstance(pattern, Forall) and isinstance(actual, Forall):
        renamed = substitute_type(actual.body, actual.var, TVar(pattern.var))
        _match(pattern.body, renamed, binders - {pattern.var}, subst)
        return
    if type(pattern) is type(actual) and not isinstance(pattern, (Arrow, Forall)) and pattern == actual:
        return
    raise MatchFailure(f"cannot match {format_type(pattern)} against {format_type(actual)}")


def type_arguments(ty: Type, arg_types: list[Type]) -> list[Type]:
    """Instantiation of the outermost binders of ``ty`` fixed by the argument types."""
    binders = []
    body = ty
    avoid = set().union(*(free_type_vars(a) for a in arg_types)) if arg_types else set()
    while isinstance(body, Forall):
        var = body.var
        if var in avoid or var in binders:
            new = fresh_name(var, avoid | set(binders) | free_type_vars(body.body))
            body = Forall(new, substitute_type(body.body, var, TVar(new)))
            var = new
        binders.append(var)
        body = body.body
    if not binders:
        raise MatchFailure(f"{format_type(ty)} has no type binders")
    subst: dict[str, Type] = {}
    for arg in arg_types:
        if isinstance(body, Forall):
            break
        if not isinstance(body, Arrow):
            raise MatchFailure(f"too many arguments for {format_type(ty)}")
        _match(body.dom, arg, set(binders), subst)
        body = body.cod
    missing = [b for b in binders if b not in subst]
    if missing:
        raise Ambiguous(missing)
    return [subst[b] for b in binders]


def infer_type_arguments(fun: Term, arg_types: list[Type], ctx: TypingContext = TypingContext()) -> Term:
    """``fun`` instantiated so that it accepts arguments of ``arg_types`` in order.

    Binders reached only after some value arguments (as in ``Land``) are
    instantiated under an abstraction over those arguments, so the result
    still takes every argument.
    """
    ty = type_of(fun, ctx)
    if not isinstance(ty, Forall):
        raise MatchFailure(f"{format_type(ty)} has no type binders")
    head, taken, i = fun, [], 0
    avoid = free_vars(fun) | set(ctx.vars)
    while True:
        if isinstance(ty, Forall):
            head, ty = _instantiate(head, ty, list(arg_types[i:]))
            continue
        if i >= len(arg_types) or not any(isinstance(t, Forall) for t in _spine(ty)):
            break
        if not isinstance(ty, Arrow) or not alpha_equal(ty.dom, arg_types[i]):
            raise MatchFailure(f"cannot pass {format_type(arg_types[i])} to {format_type(ty)}")
        var = Var(fresh_name("v", avoid | {v.name for v in taken}), ty.dom)
        taken.append(var)
        head, ty, i = App(head, var), ty.cod, i + 1
    for var in reversed(taken):
        head = Abs(var.name, var.type, head)
    return head


def _spine(ty: Type):
    while isinstance(ty, (Arrow, Forall)):
        yield ty
        ty = ty.cod if isinstance(ty, Arrow) else ty.body


def _instantiate(term: Term, ty: Type, arg_types: list[Type]) -> tuple[Term, Type]:
    for arg in type_arguments(ty, arg_types):
        term = TyApp(term, arg)
        ty = substitute_type(ty.body, ty.var, arg)
    return term, ty


def land_term() -> Term:
    """Polymorphic conjunction coercing a shared argument separately per conjunct."""
    a, b, xi, t = TVar("alpha"), TVar("beta"), TVar("xi"), Truth()
    P, Q = Var("P", Arrow(a, t)), Var("Q", Arrow(b, t))
    x = Var("x", xi)
    f, g = Var("f", Arrow(xi, a)), Var("g", Arrow(xi, b))
    conj = Const("and", Arrow(t, Arrow(t, t)))
    body = App(App(conj, App(P, App(f, x))), App(Q, App(g, x)))
    inner = Abs("x", xi, Abs("f", f.type, Abs("g", g.type, body)))
    return TyAbs("alpha", TyAbs("beta", Abs("P", P.type, Abs("Q", Q.type, TyAbs("xi", inner)))))


# ---------------------------------------------------------------- coercion candidates


def _candidates(entry: Optional[LexicalEntry], lex: Lexicon, source: Type, target: Type,
                *, with_identity: bool = False) -> list[Transformation]:
    """Transformations turning ``source`` into ``target``, in entry order then accommodation."""
    found = []
    if with_identity and alpha_equal(source, target):
        found.append(identity(source))
    if entry is not None:
        found.extend(t for t in entry.options
                     if alpha_equal(t.source, source) and alpha_equal(t.target, target))
    if isinstance(source, Sort) and isinstance(target, Sort) \
            and source.name in lex.ontology and target.name in lex.ontology:
        coercion = accommodation_coercion(lex.ontology, source.name, target.name)
        if coercion is not None:
            found.append(coercion)
    return found


def coercion_candidates(entry: Optional[LexicalEntry], lex: Lexicon, source: Type, target: Type) -> list[Transformation]:
    return _candidates(entry, lex, source, target)


# ---------------------------------------------------------------- readings


@dataclass(frozen=True)
class Insertion:
    anchor: Optional[str]
    transformation: str
    position: str


@dataclass(frozen=True)
class Felicitous:
    status = "felicitous"

    def __str__(self) -> str:
        return "felicitous"


@dataclass(frozen=True)
class Infelicitous:
    reason: str
    kind: str = "constraint"
    pairs: tuple = ()
    status = "infelicitous"

    def __str__(self) -> str:
        return f"infelicitous ({self.reason})"


@dataclass(frozen=True)
class Missing:
    miss: Union[MissingTransformation, UnknownWord]
    status = "missing"

    def __str__(self) -> str:
        return str(self.miss)


Verdict = Union[Felicitous, Infelicitous, Missing]
EMPTY_LABEL = "∅"


@dataclass(frozen=True)
class Reading:
    sentence: int
    logical_form: Optional[Term]
    trace: tuple
    verdict: Verdict
    label: str = "F"
    snapshots: tuple = ()
    path: tuple = ()

    @property
    def felicitous(self) -> bool:
        return isinstance(self.verdict, Felicitous)


# ---------------------------------------------------------------- elaboration


@dataclass(frozen=True)
class _State:
    starts: Mapping[str, AnchorState] = field(default_factory=dict)
    outcomes: Mapping[str, tuple] = field(default_factory=dict)
    uses: Mapping[tuple, tuple] = field(default_factory=dict)
    path: tuple = ()


@dataclass(frozen=True)
class _Built:
    type: Type
    stages: tuple
    state: _State
    value: Optional[AnchorState] = None
    trace: tuple = ()
    taint: tuple = ()

    @property
    def height(self) -> int:
        return len(self.stages) - 1

    def at(self, level: int) -> Term:
        return self.stages[min(level, self.height)]


class _Cut(Exception):
    """A branch that cannot be built further."""

    def __init__(self, verdict: Verdict):
        super().__init__(str(verdict))
        self.verdict = verdict


def _child(path: str, index: int) -> str:
    return f"{path}.{index}" if path else str(index)


class _Elaborator:
    def __init__(self, lex: Lexicon, cfg: EngineConfig, sentence: int):
        self.lex = lex
        self.cfg = cfg
        self.sentence = sentence
        self.ctx = lex.context()

    def normal(self, term: Term) -> Term:
        return normalize(term, self.ctx, budget=self.cfg.step_budget)

    def stages(self, children: list[_Built], compose) -> tuple:
        top = 1 + max(c.height for c in children)
        staged = [compose(*(c.at(k) for c in children)) for k in range(top)]
        staged.append(self.normal(staged[-1]))
        return tuple(staged)

    # Each elaboration returns (built branches, failure verdicts).
    def node(self, node: Node, state: _State, path: str) -> tuple[list[_Built], list[Verdict]]:
        if isinstance(node, Leaf):
            entry = lookup(self.lex, node.word)
            value = AnchorState(node.anchor, node.word, (node.anchor,), entry.main, entry.type)
            state = replace(state, starts={**state.starts, node.anchor: value})
            return [_Built(entry.type, (entry.main,), state, value)], []
        if isinstance(node, Ref):
            return self.ref(node, state)
        if isinstance(node, Apply):
            return self.apply(node, state, path)
        return self.conj(node, state, path)

    def ref(self, node: Ref, state: _State):
        start = state.starts.get(node.antecedent)
        if start is None:
            return [], [Infelicitous(f"reference: antecedent {node.antecedent} has no value", "reference")]
        distinct = {o.key: o for o in state.outcomes.get(node.antecedent, ())}
        base = next(iter(distinct.values())) if len(distinct) == 1 else start
        value = replace(base, anchor=node.anchor, applied=state.uses.get(base.key, ()))
        state = replace(state, starts={**state.starts, node.anchor: value})
        return [_Built(value.type, (value.term,), state, value)], []

    def use(self, built: _Built, t: Transformation, state: _State, position: str):
        """Record ``t`` on the value carried by ``built``; returns (state, trace, taint)."""
        value = built.value
        trace = () if t.is_identity else (Insertion(value.anchor if value else None, t.name, position),)
        if value is None:
            return state, trace, ()
        entry = self.lex.entries.get(value.word)
        compat = entry.compatible_subsets if entry is not None and len(value.key) == 1 else None
        current = replace(value, applied=state.uses.get(value.key, ()))
        taint = ()
        try:
            updated = update_anchor_state(current, t, self.sentence, self.cfg, compat)
        except (ConstraintViolation, ChainDepthExceeded) as exc:
            kind = "constraint" if isinstance(exc, ConstraintViolation) else "chain-depth"
            pairs = tuple((a.label, b.label) for a, b in getattr(exc, "pairs", ()))
            taint = (Infelicitous(str(exc), kind, pairs),)
            updated = update_anchor_state(current, t, self.sentence, self.cfg, compat, enforce=False)
        uses = {**state.uses, value.key: updated.applied}
        if t.is_identity:
            out = updated
        else:
            key = value.key + (t.name,)
            out = AnchorState(value.anchor, value.word, key, self.normal(App(t.term, value.term)),
                              t.target, updated.depth, uses.get(key, ()))
        outcomes = {**state.outcomes, value.anchor: state.outcomes.get(value.anchor, ()) + (out,)}
        return replace(state, uses=uses, outcomes=outcomes), trace, taint

    def entry_for(self, built: _Built) -> Optional[LexicalEntry]:
        return self.lex.entries.get(built.value.word) if built.value is not None else None

    def apply(self, node: Apply, state: _State, path: str):
        results, failures = [], []
        funs, fail = self.node(node.fun, state, _child(path, 0))
        failures += fail
        for fb in funs:
            args, fail = self.node(node.arg, fb.state, _child(path, 1))
            failures += fail
            for ab in args:
                try:
                    results.extend(self.combine(node, fb, ab, path))
                except _Cut as cut:
                    failures.append(cut.verdict)
        return results, failures

    def combine(self, node: Apply, fb: _Built, ab: _Built, path: str) -> list[_Built]:
        fun_type = fb.type
        type_args: list[Type] = []
        if isinstance(fun_type, Forall):
            try:
                type_args = type_arguments(fun_type, [ab.type])
            except CompositionError as exc:
                raise _Cut(Infelicitous(f"type: {exc}", "type")) from None
            for ty in type_args:
                fun_type = substitute_type(fun_type.body, fun_type.var, ty)
        if not isinstance(fun_type, Arrow):
            raise _Cut(Infelicitous(f"type: {head_word(node.fun)} of type {format_type(fun_type)} is not a function", "type"))

        def fun_at(term: Term) -> Term:
            for ty in type_args:
                term = TyApp(term, ty)
            return term

        position = _child(path, 1)
        if alpha_equal(fun_type.dom, ab.type):
            choices = [identity(ab.type)]
        else:
            choices = _candidates(self.entry_for(ab), self.lex, ab.type, fun_type.dom)
            if not choices:
                anchor_word = ab.value.word if ab.value is not None else head_word(node.arg)
                raise _Cut(Missing(MissingTransformation(anchor_word, ab.type, fun_type.dom, head_word(node.fun))))
        built = []
        for t in choices:
            state, trace, taint = self.use(ab, t, ab.state, position)

            def compose(f, a, t=t):
                return App(fun_at(f), a if t.is_identity else App(t.term, a))

            built.append(_Built(fun_type.cod, self.stages([fb, ab], compose), state, None,
                                fb.trace + ab.trace + trace, fb.taint + ab.taint + taint))
        return built

    def conj(self, node: Conj, state: _State, path: str):
        results, failures = [], []
        lefts, fail = self.node(node.left, state, _child(path, 0))
        failures += fail
        for lb in lefts:
            rights, fail = self.node(node.right, lb.state, _child(path, 1))
            failures += fail
            for rb in rights:
                shared, fail = self.node(node.shared, rb.state, _child(path, 2))
                failures += fail
                for sb in shared:
                    try:
                        results.extend(self.conjoin(node, lb, rb, sb, _child(path, 2)))
                    except _Cut as cut:
                        failures.append(cut.verdict)
        return results, failures

    def conjoin(self, node: Conj, lb: _Built, rb: _Built, sb: _Built, position: str) -> list[_Built]:
        for side, b in (("left", lb), ("right", rb)):
            if not (isinstance(b.type, Arrow) and isinstance(b.type.cod, Truth)):
                raise _Cut(Infelicitous(f"type: {side} conjunct has type {format_type(b.type)}, not a predicate", "type"))
        alpha, beta, xi = lb.type.dom, rb.type.dom, sb.type
        entry = self.entry_for(sb)
        fs = _candidates(entry, self.lex, xi, alpha, with_identity=True)
        gs = _candidates(entry, self.lex, xi, beta, with_identity=True)
        for side, cands, want, pred in (("left", fs, alpha, node.left), ("right", gs, beta, node.right)):
            if not cands:
                anchor_word = sb.value.word if sb.value is not None else head_word(node.shared)
                raise _Cut(Missing(MissingTransformation(anchor_word, xi, want, head_word(pred))))
        same = alpha_equal(alpha, beta)
        land = land_term()
        built = []
        for f in fs:
            state_f, trace_f, taint_f = self.use(sb, f, sb.state, position + "/left")
            for g in gs:
                state, trace_g, taint_g = self.use(sb, g, state_f, position + "/right")

                def compose(l, r, s, f=f, g=g):
                    if same:
                        fx = s if f.is_identity else App(f.term, s)
                        gx = s if g.is_identity else App(g.term, s)
                        conj = Const("and", Arrow(Truth(), Arrow(Truth(), Truth())))
                        return App(App(conj, App(l, fx)), App(r, gx))
                    head = TyApp(TyApp(land, alpha), beta)
                    return App(App(App(TyApp(App(App(head, l), r), xi), s), f.term), g.term)

                built.append(_Built(
                    Truth(), self.stages([lb, rb, sb], compose), state, None,
                    lb.trace + rb.trace + sb.trace + trace_f + trace_g,
                    lb.taint + rb.taint + sb.taint + taint_f + taint_g,
                ))
        return built


def _sentence_label(state: _State, sentence: int, cfg: EngineConfig) -> str:
    degrees = [p.degree for uses in state.uses.values() for p in uses if p.sentence == sentence]
    return max(degrees).label if degrees else Degree.F.label


def _dedupe_stages(stages: tuple) -> tuple:
    out = []
    for term in stages:
        if not out or not alpha_equal(out[-1], term):
            out.append(term)
    return tuple(out)


def _reading_key(r: Reading):
    lf = alpha_key(r.logical_form) if r.logical_form is not None else None
    return lf, r.trace, type(r.verdict).__name__, str(r.verdict)


def compose(
    discourse: Discourse,
    lex: Lexicon,
    cfg: EngineConfig = EngineConfig(),
    *,
    report_unknown: bool = False,
) -> list[Reading]:
    """All readings, sentence by sentence, in deterministic order.

    An unknown word raises :class:`UnknownWord` unless ``report_unknown`` is
    set, in which case its sentence gets a missing verdict.
    """
    frontier = [_State()]
    readings: list[Reading] = []
    for index, root in enumerate(discourse.sentences):
        elab = _Elaborator(lex, cfg, index)
        good: list[tuple[Reading, _State]] = []
        bad: list[tuple[Reading, Optional[_State]]] = []
        for state in frontier:
            try:
                built, failures = elab.node(root, state, "")
            except UnknownWord as exc:
                if not report_unknown:
                    raise
                built, failures = [], [Missing(exc)]
            for b in built:
                if not isinstance(b.type, Truth):
                    verdict = Infelicitous(f"type: sentence has type {format_type(b.type)}, not t", "type")
                    bad.append((Reading(index, None, b.trace, verdict, EMPTY_LABEL, (), state.path), None))
                    continue
                next_state = replace(b.state, path=state.path + ((index, b.trace),))
                snapshots = _dedupe_stages(b.stages)
                if b.taint:
                    verdict = b.taint[0]
                    bad.append((Reading(index, b.stages[-1], b.trace, verdict, EMPTY_LABEL, snapshots, state.path),
                                next_state))
                else:
                    label = _sentence_label(b.state, index, cfg)
                    good.append((Reading(index, b.stages[-1], b.trace, Felicitous(), label, snapshots, state.path),
                                 next_state))
            for verdict in failures:
                bad.append((Reading(index, None, (), verdict, EMPTY_LABEL, (), state.path), None))
        chosen = good or bad
        seen, out = set(), []
        for reading, _ in chosen:
            key = _reading_key(reading)
            if key not in seen:
                seen.add(key)
                out.append(reading)
        if not cfg.enumerate_all_readings:
            out = out[:1]
        readings.extend(out)
        if good:
            frontier = [s for _, s in good]
        else:
            tainted = [s for _, s in bad if s is not None]
            frontier = tainted or frontier
    return readings


def readings_by_sentence(readings: Iterable[Reading], count: int) -> list[list[Reading]]:
    grouped: list[list[Reading]] = [[] for _ in range(count)]
    for r in readings:
        grouped[r.sentence].append(r)
    return grouped


# ---------------------------------------------------------------- replay


def _resolve_coercion(lex: Lexicon, word: Optional[str], name: str, source: Type, target: Type) -> Transformation:
    entry = lex.entries.get(word) if word is not None else None
    if entry is not None:
        t = entry.transformation(name)
        if t is not None:
            return t
    if isinstance(source, Sort) and isinstance(target, Sort):
        t = accommodation_coercion(lex.ontology, source.name, target.name)
        if t is not None and t.name == name:
            return t
    raise KeyError(f"trace names unknown transformation {name}")


def replay(discourse: Discourse, lex: Lexicon, reading: Reading, cfg: EngineConfig = EngineConfig()) -> Term:
    """Rebuild a reading's logical form from its trace alone, without any search."""
    traces = dict(reading.path)
    traces[reading.sentence] = reading.trace
    ctx = lex.context()
    starts: dict[str, tuple] = {}
    outcomes: dict[str, list] = {}

    def run(node: Node, path: str, inserts: dict) -> tuple[Term, Type, Optional[tuple]]:
        if isinstance(node, Leaf):
            entry = lookup(lex, node.word)
            value = (node.anchor, node.word, (node.anchor,), entry.main, entry.type)
            starts[node.anchor] = value
            return entry.main, entry.type, value
        if isinstance(node, Ref):
            distinct = {o[2]: o for o in outcomes.get(node.antecedent, ())}
            base = next(iter(distinct.values())) if len(distinct) == 1 else starts[node.antecedent]
            value = (node.anchor,) + base[1:]
            starts[node.anchor] = value
            return value[3], value[4], value

        def coerce(value, term, ty, target, position):
            name = inserts.get(position)
            if name is None:
                if value is not None:
                    outcomes.setdefault(value[0], []).append(value)
                return term, identity(ty).term
            t = _resolve_coercion(lex, value[1] if value else None, name, ty, target)
            if value is not None:
                out = (value[0], value[1], value[2] + (name,), App(t.term, value[3]), t.target)
                outcomes.setdefault(value[0], []).append(out)
            return App(t.term, term), t.term

        if isinstance(node, Apply):
            f, fty, _ = run(node.fun, _child(path, 0), inserts)
            a, aty, value = run(node.arg, _child(path, 1), inserts)
            if isinstance(fty, Forall):
                f, fty = _instantiate(f, fty, [aty])
            a, _ = coerce(value, a, aty, fty.dom, _child(path, 1))
            return App(f, a), fty.cod, None
        l, lty, _ = run(node.left, _child(path, 0), inserts)
        r, rty, _ = run(node.right, _child(path, 1), inserts)
        s, sty, value = run(node.shared, _child(path, 2), inserts)
        pos = _child(path, 2)
        fx, f = coerce(value, s, sty, lty.dom, pos + "/left")
        gx, g = coerce(value, s, sty, rty.dom, pos + "/right")
        if alpha_equal(lty.dom, rty.dom):
            conj = Const("and", Arrow(Truth(), Arrow(Truth(), Truth())))
            return App(App(conj, App(l, fx)), App(r, gx)), Truth(), None
        head = TyApp(TyApp(land_term(), lty.dom), rty.dom)
        return App(App(App(TyApp(App(App(head, l), r), sty), s), f), g), Truth(), None

    term = None
    for index in range(reading.sentence + 1):
        if index not in traces:
            continue
        inserts = {ins.position: ins.transformation for ins in traces[index]}
        term, _, _ = run(discourse.sentences[index], "", inserts)
    return normalize(term, ctx, budget=cfg.step_budget)


# ---------------------------------------------------------------- diagnosis


@dataclass(frozen=True)
class Suggestion:
    """A hypothesized lexicon extension; never merged automatically."""

    kind: str
    word: Optional[str]
    name: Optional[str]
    source: Optional[Type]
    target: Optional[Type]
    fragment: str

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "word": self.word,
            "name": self.name,
            "type": None if self.source is None else format_type(Arrow(self.source, self.target)),
            "fragment": self.fragment,
        }


def _ident(ty: Type) -> str:
    return re.sub(r"\W+", "_", format_type(ty)).strip("_")


def diagnose_missing(miss: Union[MissingTransformation, UnknownWord], lex: Lexicon) -> Suggestion:
    if isinstance(miss, UnknownWord):
        sort = miss.word[:1].upper() + miss.word[1:]
        if not sort[:1].isalpha():
            sort = "S" + sort
        base, n = sort, 1
        while sort in lex.ontology:
            sort, n = f"{base}{n}", n + 1
        parent = f" <: {UNIVERSAL}" if lex.ontology.e_top else ""
        fragment = f"sort {sort}{parent}\nword {miss.word} : {sort} = {miss.word}\n"
        return Suggestion("word", miss.word, None, None, None, fragment)
    name = f"hyp_{_ident(miss.source)}_{_ident(miss.target)}"
    ty = format_type(Arrow(miss.source, miss.target))
    entry = lex.entries.get(miss.anchor_word) if miss.anchor_word else None
    opt = f"  opt {name} : {ty} = {name} deg F\n"
    if entry is None:
        fragment = f"# no lexical entry to extend with {name} : {ty}\n"
    else:
        fragment = f"word {entry.word} : {format_type(entry.type)} = {format_term(entry.main)}\n" + opt
    return Suggestion("transformation", miss.anchor_word, name, miss.source, miss.target, fragment)
