"""Defeasible reasoning engine.

Builds arguments bidirectionally from percepts, premises, and queries using
user-defined reason schemas, then settles what is justified by computing
maximal partial status assignments over the resulting inference graph.
"""

from .formulas import (
    Formula,
    Term,
    conjuncts,
    negate,
    parse_formula,
    print_formula,
    substitute,
    unify,
)
from .reasons import Percept, Premise, Reason, classify
from .dsl import parse_scenario, parse_schema
from .engine import EngineConfig, run
from .schemas import builtin, library

__version__ = "0.1.0"

__all__ = [
    "Formula",
    "Term",
    "parse_formula",
    "print_formula",
    "unify",
    "substitute",
    "negate",
    "conjuncts",
    "Premise",
    "Reason",
    "Percept",
    "classify",
    "parse_schema",
    "parse_scenario",
    "EngineConfig",
    "run",
    "builtin",
    "library",
]
