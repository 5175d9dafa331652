"""Many-sorted System F composition engine with a generative lexicon."""

from .core import (
    Abs,
    App,
    Arrow,
    Const,
    Forall,
    Sort,
    Truth,
    TVar,
    TyAbs,
    TyApp,
    TypingContext,
    Var,
    alpha_equal,
    normalize,
    reduce_step,
    substitute_term,
    substitute_type,
    type_of,
    well_formed_type,
)
from .discourse import Discourse, parse_discourse
from .engine import EngineConfig, Reading, compose, diagnose_missing, infer_type_arguments
from .lexicon import Lexicon, LexicalEntry, load_lexicon, lookup, merge_overlay, validate_lexicon
from .logical_form import erase, print_formula, standard_constants
from .ontology import Ontology, accommodation_coercion, declare_sort, is_subsort, lift_sort_to_predicate
from .syntax import format_term, format_type, parse_term, parse_type

__version__ = "0.1.0"
