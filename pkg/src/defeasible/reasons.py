"""Reason schemas: premises, forwards/backwards reasons, undercutters, percepts."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Union

from . import exprs
from .exprs import EvalContext, Expr
from .formulas import Binding, Formula, Number, conjoin, substitute

Condition = Union[Expr, Callable[[Binding, EvalContext], bool]]
Strength = Union[Number, Expr]

KINDS = ("inference", "percept", "desire")

SIMPLE_FORWARDS = "simple-forwards"
MIXED_FORWARDS = "mixed-forwards"
SIMPLE_BACKWARDS = "simple-backwards"
MIXED_BACKWARDS = "mixed-backwards"
DEGENERATE_BACKWARDS = "degenerate-backwards"


@dataclass(frozen=True)
class Premise:
    """One premise slot of a reason; the same shape serves both directions."""

    formula: Formula
    kind: str = "inference"
    condition: Optional[Condition] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown premise kind {self.kind!r}")


@dataclass(frozen=True)
class Reason:
    """A forwards or backwards reason schema.

    `condition` applies only to backwards reasons, checked against the
    binding produced by matching the conclusion against an interest.
    `defeatee` is set on expanded undercutters.  `conclude_hook`, when
    present, runs just before the conclusion is drawn and may extend the
    binding (or veto the inference by returning None); the built-in planning
    rules use it to construct plan values.
    """

    name: str
    forwards_premises: tuple[Premise, ...]
    backwards_premises: tuple[Premise, ...]
    conclusion: Formula
    variables: frozenset[str]
    strength: Strength = 1.0
    defeasible: bool = False
    backwards: bool = False
    condition: Optional[Condition] = None
    defeatee: Optional[str] = None
    conclude_hook: Optional[Callable] = None

    @property
    def premises(self) -> tuple[Premise, ...]:
        return self.forwards_premises + self.backwards_premises


@dataclass(frozen=True)
class UndercutterSpec:
    """A backwards undercutter before expansion against its defeatee."""

    name: str
    defeatee: str
    forwards_premises: tuple[Premise, ...]
    backwards_premises: tuple[Premise, ...]
    variables: frozenset[str]
    strength: Strength = 1.0
    defeasible: bool = True
    condition: Optional[Condition] = None


@dataclass(frozen=True)
class Percept:
    content: Formula
    clarity: float
    date: Number

    def __post_init__(self):
        if not (0 < self.clarity <= 1):
            raise ValueError("percept clarity must be in (0, 1]")


def classify(reason: Reason) -> str:
    has_f = bool(reason.forwards_premises)
    has_b = bool(reason.backwards_premises)
    if not reason.backwards:
        return MIXED_FORWARDS if has_b else SIMPLE_FORWARDS
    if has_f and has_b:
        return MIXED_BACKWARDS
    if has_f:
        return DEGENERATE_BACKWARDS
    return SIMPLE_BACKWARDS


def expand_undercutter(spec: UndercutterSpec, defeatee: Reason) -> Reason:
    """Build the undercutter's reason: it concludes that the defeatee's
    premises do not guarantee its conclusion, over the defeatee's variables."""
    from .formulas import Undercut

    premise_conj = conjoin([p.formula for p in defeatee.premises])
    conclusion = Undercut(premise_conj, defeatee.conclusion)
    return Reason(
        name=spec.name,
        forwards_premises=spec.forwards_premises,
        backwards_premises=spec.backwards_premises,
        conclusion=conclusion,
        variables=spec.variables | defeatee.variables,
        strength=spec.strength,
        defeasible=spec.defeasible,
        backwards=True,
        condition=spec.condition,
        defeatee=spec.defeatee,
    )


def eval_condition(cond: Optional[Condition], binding: Binding, ctx: EvalContext) -> bool:
    if cond is None:
        return True
    if callable(cond):
        return bool(cond(binding, ctx))
    return exprs.condition_true(cond, binding, ctx)


def eval_strength(strength: Strength, binding: Binding, ctx: EvalContext) -> Optional[float]:
    v = exprs.strength_value(strength, binding, ctx)
    if v is None:
        return None
    return float(v)


def instantiated_premises(reason: Reason, binding: Binding) -> list[Formula]:
    return [substitute(p.formula, binding) for p in reason.premises]
