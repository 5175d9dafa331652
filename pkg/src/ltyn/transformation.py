from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import Abs, Term, Type, Var


class Degree(enum.IntEnum):
    """Flexibility of a transformation: flexible, semi-flexible or rigid."""

    F = 1
    SF = 2
    R = 3

    @classmethod
    def parse(cls, text: str) -> "Degree":
        text = text.strip()
        if text.isdigit():
            return cls(int(text))
        return cls[text]

    @property
    def label(self) -> str:
        return self.name


class Origin(str, enum.Enum):
    LEXICAL = "lexical"
    ONTOLOGY = "ontology"
    IDENTITY = "identity"


IDENTITY_NAME = "Id"


@dataclass(frozen=True)
class Transformation:
    """An optional term ``name : source -> target`` offered by a lexical entry."""

    name: str
    term: Term
    source: Type
    target: Type
    degree: Degree = Degree.F
    origin: Origin = Origin.LEXICAL

    @property
    def is_identity(self) -> bool:
        return self.origin is Origin.IDENTITY


def identity(ty: Type) -> Transformation:
    return Transformation(IDENTITY_NAME, Abs("x", ty, Var("x", ty)), ty, ty, Degree.F, Origin.IDENTITY)
