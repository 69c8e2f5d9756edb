"""Built-in reason schemas.

The epistemic set covers perception (with its reliability undercutter),
temporal projection, the statistical syllogism, and causal inference with
its undercutter that lets causal knowledge override projection.  A minimal
non-suppositional deductive set rounds it out.  Everything here is defined
in the schema DSL itself and parsed at import, so exporting a schema as text
and re-reading it is the identity by construction.
"""

from __future__ import annotations

from typing import Union

from .dsl import parse_schema, print_schema
from .reasons import Reason, UndercutterSpec

_EPISTEMIC_SOURCES = {
    "PERCEPTION": """
(def-forwards-reason PERCEPTION
  :forwards-premises
    "(p at time)"
    (:kind :percept)
  :conclusion "(p at time)"
  :variables p time
  :defeasible? t
  :strength .98)
""",
    "PERCEPTUAL-RELIABILITY": """
(def-backwards-undercutter PERCEPTUAL-RELIABILITY
  :defeatee PERCEPTION
  :forwards-premises
    "((the probability of p given ((I have a percept with content p) & R)) <= s)"
    (:condition (and (s < 0.99) (temporally-projectible R)))
  :backwards-premises
    "(R at time)"
  :variables p time R s
  :defeasible? t)
""",
    "TEMPORAL-PROJECTION": """
(def-backwards-reason TEMPORAL-PROJECTION
  :conclusion "(p at time)"
  :condition (and (temporally-projectible p) (numberp time))
  :forwards-premises
    "(p at time0)"
    (:condition (and (time0 < time) ((time - time0) < log(.5)/log(*temporal-decay*))))
  :variables p time0 time
  :defeasible? t
  :strength (- (* 2 (expt *temporal-decay* (- time time0))) 1))
""",
    "STATISTICAL-SYLLOGISM": """
(def-forwards-reason STATISTICAL-SYLLOGISM
  :forwards-premises
    "(c is a B)"
    "((the probability of A given B) >= s)"
    (:condition (s >= *statistical-threshold*))
  :conclusion "(c is an A)"
  :variables c A B s
  :defeasible? t
  :strength s)
""",
    "CAUSAL-IMPLICATION": """
(def-backwards-reason CAUSAL-IMPLICATION
  :conclusion "(Q at time*)"
  :condition (numberp time*)
  :forwards-premises
    "(A when P is causally sufficient for Q after an interval interval)"
    (:condition (every #temporally-projectible (conjuncts Q)))
    "(A at time)"
    (:condition (and ((time + interval) <= time*)
                     ((time* - time) < log(.5)/log(*temporal-decay*))))
  :backwards-premises
    "(P at time)"
  :variables A P Q interval time time*
  :defeasible? t
  :strength (- (* 2 (expt *temporal-decay* (- time* time))) 1))
""",
    "CAUSAL-UNDERCUTTER": """
(def-backwards-undercutter CAUSAL-UNDERCUTTER
  :defeatee TEMPORAL-PROJECTION
  :forwards-premises
    "(A when Q is causally sufficient for ~p after an interval interval)"
    "(A at time1)"
    (:condition (and (time0 <= time1) ((time1 + interval) < time)))
  :backwards-premises
    "(Q at time1)"
  :variables A Q p time0 time time1 interval
  :defeasible? t)
""",
}

_DEDUCTIVE_SOURCES = {
    "MODUS-PONENS": """
(def-forwards-reason MODUS-PONENS
  :forwards-premises
    "(P -> Q)"
    "P"
  :conclusion "Q"
  :variables P Q)
""",
    "MODUS-TOLLENS": """
(def-forwards-reason MODUS-TOLLENS
  :forwards-premises
    "(P -> Q)"
    "~Q"
  :conclusion "~P"
  :variables P Q)
""",
    "SIMPLIFICATION": """
(def-forwards-reason SIMPLIFICATION
  :forwards-premises
    "(P & Q)"
  :conclusion "P"
  :variables P Q)
""",
    "SIMPLIFICATION-ALT": """
(def-forwards-reason SIMPLIFICATION-ALT
  :forwards-premises
    "(P & Q)"
  :conclusion "Q"
  :variables P Q)
""",
    "ADJUNCTION": """
(def-backwards-reason ADJUNCTION
  :conclusion "(P & Q)"
  :backwards-premises
    "P"
    "Q"
  :variables P Q)
""",
    "DISJUNCTIVE-SYLLOGISM": """
(def-forwards-reason DISJUNCTIVE-SYLLOGISM
  :forwards-premises
    "(P v Q)"
    "~P"
  :conclusion "Q"
  :variables P Q)
""",
    "DISJUNCTIVE-SYLLOGISM-ALT": """
(def-forwards-reason DISJUNCTIVE-SYLLOGISM-ALT
  :forwards-premises
    "(P v Q)"
    "~Q"
  :conclusion "P"
  :variables P Q)
""",
    "BICONDITIONAL-ELIMINATION": """
(def-forwards-reason BICONDITIONAL-ELIMINATION
  :forwards-premises
    "(P <-> Q)"
  :conclusion "(P -> Q)"
  :variables P Q)
""",
    "BICONDITIONAL-ELIMINATION-ALT": """
(def-forwards-reason BICONDITIONAL-ELIMINATION-ALT
  :forwards-premises
    "(P <-> Q)"
  :conclusion "(Q -> P)"
  :variables P Q)
""",
}

_SOURCES = {**_EPISTEMIC_SOURCES, **_DEDUCTIVE_SOURCES}

EPISTEMIC_NAMES = tuple(_EPISTEMIC_SOURCES)
DEDUCTIVE_NAMES = tuple(_DEDUCTIVE_SOURCES)

_LIBRARY: dict[str, Union[Reason, UndercutterSpec]] = {
    name: parse_schema(src.strip()) for name, src in _SOURCES.items()
}


def library() -> dict[str, Union[Reason, UndercutterSpec]]:
    """All built-in schemas by name."""
    return dict(_LIBRARY)


def builtin(name: str) -> Union[Reason, UndercutterSpec]:
    key = name.upper()
    if key not in _LIBRARY:
        raise KeyError(f"no built-in schema named {name!r}")
    return _LIBRARY[key]


def library_as_dsl() -> str:
    """Render every built-in schema as DSL text (re-parsable)."""
    chunks = [print_schema(_LIBRARY[name]) for name in _SOURCES]
    return "\n\n".join(chunks) + "\n"
