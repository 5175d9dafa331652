"""Derivation trees and discourses in s-expression form.

One sentence per line, for example::

    ((some club) (defeated Leeds))
    (conj large lively Liverpool#L)
    (delicious (ref it L))

``(f a)`` applies ``f`` to ``a``; longer lists apply left to right.  Lines
starting with ``;`` are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


class DiscourseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class Leaf:
    word: str
    anchor: str


@dataclass(frozen=True)
class Apply:
    fun: "Node"
    arg: "Node"


@dataclass(frozen=True)
class Conj:
    left: "Node"
    right: "Node"
    shared: "Node"


@dataclass(frozen=True)
class Ref:
    """An anaphor ``anchor`` picking up the value of ``antecedent``."""

    anchor: str
    antecedent: str


Node = Union[Leaf, Apply, Conj, Ref]


@dataclass(frozen=True)
class Discourse:
    sentences: tuple
    sources: tuple = ()

    def __len__(self) -> int:
        return len(self.sentences)


def height(node: Node) -> int:
    if isinstance(node, Apply):
        return 1 + max(height(node.fun), height(node.arg))
    if isinstance(node, Conj):
        return 1 + max(height(node.left), height(node.right), height(node.shared))
    return 0


def head_word(node: Node) -> str | None:
    """The leftmost leaf word, used to name the selecting predicate."""
    if isinstance(node, Leaf):
        return node.word
    if isinstance(node, Apply):
        return head_word(node.fun)
    if isinstance(node, Conj):
        return head_word(node.left)
    return None


def anchors_of(node: Node):
    """Anchor ids introduced by ``node`` in left-to-right order."""
    if isinstance(node, (Leaf, Ref)):
        yield node.anchor
    elif isinstance(node, Apply):
        yield from anchors_of(node.fun)
        yield from anchors_of(node.arg)
    elif isinstance(node, Conj):
        yield from anchors_of(node.left)
        yield from anchors_of(node.right)
        yield from anchors_of(node.shared)


# ---------------------------------------------------------------- reading

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def _tokens(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DiscourseError(f"unexpected input at column {pos}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _read(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise DiscourseError("unexpected end of tree")
    tok = tokens[pos]
    if tok == ")":
        raise DiscourseError("unexpected ')'")
    if tok != "(":
        return tok, pos + 1
    items, pos = [], pos + 1
    while pos < len(tokens) and tokens[pos] != ")":
        item, pos = _read(tokens, pos)
        items.append(item)
    if pos >= len(tokens):
        raise DiscourseError("missing ')'")
    return items, pos + 1


class _Builder:
    def __init__(self, sentence: int, seen: set[str]):
        self.sentence = sentence
        self.seen = seen
        self.counter = 0

    def anchor(self, name: str) -> str:
        if name in self.seen:
            raise DiscourseError(f"anchor {name!r} is used twice")
        self.seen.add(name)
        return name

    def node(self, tree) -> Node:
        if isinstance(tree, str):
            word, sep, anchor = tree.partition("#")
            if not word or (sep and not anchor):
                raise DiscourseError(f"malformed leaf {tree!r}")
            if not sep:
                self.counter += 1
                anchor = f"{word}@{self.sentence + 1}.{self.counter}"
            return Leaf(word, self.anchor(anchor))
        if not tree:
            raise DiscourseError("empty tree")
        head = tree[0]
        if head == "ref":
            if len(tree) != 3 or not all(isinstance(t, str) for t in tree[1:]):
                raise DiscourseError("ref takes a fresh anchor id and an antecedent id")
            if tree[2] not in self.seen:
                raise DiscourseError(f"antecedent {tree[2]!r} does not occur earlier")
            return Ref(self.anchor(tree[1]), tree[2])
        if head == "conj":
            if len(tree) != 4:
                raise DiscourseError("conj takes two predicates and a shared argument")
            left, right, shared = (self.node(t) for t in tree[1:])
            return Conj(left, right, shared)
        result = self.node(head)
        for item in tree[1:]:
            result = Apply(result, self.node(item))
        return result


def parse_tree(text: str, sentence: int = 0, seen: set[str] | None = None) -> Node:
    tokens = _tokens(text)
    tree, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise DiscourseError("trailing input after tree")
    return _Builder(sentence, seen if seen is not None else set()).node(tree)


def parse_discourse(text: str) -> Discourse:
    sentences, sources = [], []
    seen: set[str] = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        try:
            sentences.append(parse_tree(line, len(sentences), seen))
        except DiscourseError as exc:
            raise DiscourseError(str(exc), number) from None
        sources.append(line)
    return Discourse(tuple(sentences), tuple(sources))


def load_discourse(path) -> Discourse:
    with open(path, encoding="utf-8") as fh:
        return parse_discourse(fh.read())
