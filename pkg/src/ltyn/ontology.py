"""Base sorts ordered by hyponymy, accommodation coercions and sort predicates."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Optional

from .core import Arrow, Const, Sort, Term, Truth
from .transformation import Degree, Origin, Transformation

UNIVERSAL = "e"
TRUTH = "t"


class OntologyError(Exception):
    pass


class DuplicateSort(OntologyError):
    def __init__(self, name: str):
        super().__init__(f"sort {name!r} is already declared")
        self.name = name


class UnknownParent(OntologyError):
    def __init__(self, name: str, parent: str):
        super().__init__(f"sort {name!r} names undeclared parent {parent!r}")
        self.name = name
        self.parent = parent


class CycleIntroduced(OntologyError):
    def __init__(self, sorts: Iterable[str]):
        self.sorts = tuple(sorted(sorts))
        super().__init__(f"sort hierarchy would become cyclic through {', '.join(self.sorts)}")


class UnknownSort(OntologyError):
    def __init__(self, name: str):
        super().__init__(f"unknown sort {name!r}")
        self.name = name


class NoUniversalSort(OntologyError):
    def __init__(self):
        super().__init__("sort predicates need the universal sort e as top (e-top is disabled)")


class IncompatibleOntology(OntologyError):
    def __init__(self, name: str, base: frozenset, other: frozenset):
        super().__init__(
            f"sort {name!r} has parents {sorted(base)} in the base but {sorted(other)} in the overlay"
        )
        self.name = name


@dataclass(frozen=True)
class Ontology:
    """Declared sorts with their direct parents.

    ``e`` is always declared.  With ``e_top`` every sort is below ``e`` and a
    sort declared without parents gets ``e`` as its parent.
    """

    parents: Mapping[str, frozenset] = field(default_factory=lambda: {UNIVERSAL: frozenset()})
    e_top: bool = True

    @property
    def sorts(self) -> frozenset:
        return frozenset(self.parents) | {TRUTH}

    def __contains__(self, name: str) -> bool:
        return name in self.parents or name == TRUTH

    @cached_property
    def _ancestors(self) -> dict[str, frozenset]:
        result: dict[str, frozenset] = {}

        def visit(name: str) -> frozenset:
            if name not in result:
                acc = {name}
                for parent in self.parents[name]:
                    acc |= visit(parent)
                result[name] = frozenset(acc)
            return result[name]

        for name in self.parents:
            visit(name)
        return result

    def ancestors(self, name: str) -> frozenset:
        self._require(name)
        if name == TRUTH:
            return frozenset({TRUTH})
        found = self._ancestors[name]
        return found | {UNIVERSAL} if self.e_top else found

    def _require(self, name: str) -> None:
        if name not in self:
            raise UnknownSort(name)

    def declare(self, name: str, parents: Iterable[str] = ()) -> "Ontology":
        return declare_sort(self, name, parents)

    def in_order(self) -> list[str]:
        """Sorts other than ``e`` with every parent listed before its children."""
        done: list[str] = []
        seen = {UNIVERSAL}

        def visit(name: str) -> None:
            if name in seen:
                return
            seen.add(name)
            for parent in sorted(self.parents[name]):
                visit(parent)
            done.append(name)

        for name in self.parents:
            visit(name)
        return done


def declare_sort(onto: Ontology, name: str, parents: Iterable[str] = ()) -> Ontology:
    """A new ontology with ``name`` added below ``parents``."""
    parents = frozenset(parents)
    if name in onto:
        raise DuplicateSort(name)
    if name in parents:
        raise CycleIntroduced({name})
    for parent in sorted(parents):
        if parent not in onto.parents:
            raise UnknownParent(name, parent)
    if not parents and onto.e_top:
        parents = frozenset({UNIVERSAL})
    return replace(onto, parents={**onto.parents, name: parents})


def build_ontology(declarations: Iterable[tuple[str, Iterable[str]]], e_top: bool = True) -> Ontology:
    """Build from ``(sort, parents)`` pairs given in any order."""
    pending: dict[str, frozenset] = {}
    for name, parents in declarations:
        if name in pending or name in (UNIVERSAL, TRUTH):
            raise DuplicateSort(name)
        pending[name] = frozenset(parents)
    onto = Ontology(e_top=e_top)
    while pending:
        ready = [n for n, ps in pending.items() if all(p in onto.parents for p in ps)]
        if not ready:
            stuck = set(pending)
            for name, ps in pending.items():
                for parent in sorted(ps):
                    if parent not in stuck and parent not in onto.parents:
                        raise UnknownParent(name, parent)
            raise CycleIntroduced(stuck)
        for name in ready:
            onto = declare_sort(onto, name, pending.pop(name))
    return onto


def merge_ontologies(base: Ontology, overlay: Ontology) -> Ontology:
    """Union of two ontologies that agree on every shared sort."""
    if base.e_top != overlay.e_top:
        raise IncompatibleOntology(UNIVERSAL, frozenset({"e-top"} if base.e_top else ()),
                                   frozenset({"e-top"} if overlay.e_top else ()))
    for name, parents in overlay.parents.items():
        if name in base.parents and base.parents[name] != parents:
            raise IncompatibleOntology(name, base.parents[name], parents)
    new = [(n, p) for n, p in overlay.parents.items() if n not in base.parents]
    return build_ontology([(n, p) for n, p in base.parents.items() if n != UNIVERSAL] + new, base.e_top)


def is_subsort(onto: Ontology, a: str, b: str) -> bool:
    onto._require(a)
    onto._require(b)
    return b in onto.ancestors(a)


def accommodation_coercion(onto: Ontology, a: str, b: str) -> Optional[Transformation]:
    """The degree-1 coercion ``sub_a_b : a -> b`` when ``a`` is a proper subsort of ``b``."""
    if a == b or not is_subsort(onto, a, b):
        return None
    ty = Arrow(Sort(a), Sort(b))
    name = f"sub_{a}_{b}"
    return Transformation(name, Const(name, ty), Sort(a), Sort(b), Degree.F, Origin.ONTOLOGY)


def lift_sort_to_predicate(onto: Ontology, a: str) -> Term:
    """The characteristic predicate ``hat_a : e -> t`` of sort ``a``."""
    onto._require(a)
    if not onto.e_top:
        raise NoUniversalSort()
    return Const(f"hat_{a}", Arrow(Sort(UNIVERSAL), Truth()))
