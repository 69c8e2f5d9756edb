"""Formula and term language: parsing, printing, matching, substitution.

The concrete syntax is parenthesized symbolic expressions.  Atoms are
English-like word sequences; the structural forms (negation, binary
connectives, quantifiers, `at`, `throughout`, undercut `@>`, probability
bounds, causal rules, and planning conditionals) are recognized by keyword
shape.  Words matching a declared schema variable are schematic only when a
variable set is supplied, never in scenario facts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .sexpr import Group, InputSyntaxError, Node, Token, read

Number = Union[int, Fraction, float]


class FormulaSyntaxError(InputSyntaxError):
    pass


# ---------------------------------------------------------------------------
# Terms


class Term:
    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class Num(Term):
    value: Number


@dataclass(frozen=True)
class Compound(Term):
    functor: str
    args: tuple[Term, ...]


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    def __str__(self) -> str:
        return print_formula(self)


Part = Union[Term, Formula]


@dataclass(frozen=True)
class Atom(Formula):
    parts: tuple[Part, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class If(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class At(Formula):
    body: Formula
    time: Term


@dataclass(frozen=True)
class Throughout(Formula):
    body: Formula
    op: str  # open | closed | clopen
    start: Term
    end: Term


@dataclass(frozen=True)
class Undercut(Formula):
    premise: Formula
    conclusion: Formula


@dataclass(frozen=True)
class ProbBound(Formula):
    target: Formula
    given: Formula
    cmp: str  # <= | >=
    bound: Term


@dataclass(frozen=True)
class Causal(Formula):
    action: Formula
    condition: Formula
    effect: Formula
    interval: Term


@dataclass(frozen=True)
class PlanConditional(Formula):
    action: Formula
    condition: Formula
    goal: Formula


INTERVAL_OPS = ("open", "closed", "clopen")

_BINARY_OPS = {"&": And, "v": Or, "->": If, "<->": Iff}
_RESERVED_IN_ATOMS = {"&", "v", "->", "<->", "@>", "=>", "/", "<=", ">=", "~", "at", "throughout"}

_INT_RE = re.compile(r"[+-]?\d+$")
_RAT_RE = re.compile(r"[+-]?\d+/\d+$")
_FLT_RE = re.compile(r"[+-]?(\d+\.\d*|\.\d+)([eE][+-]?\d+)?$|[+-]?\d+[eE][+-]?\d+$")


def parse_number(text: str) -> Optional[Number]:
    if _INT_RE.match(text):
        return int(text)
    if _RAT_RE.match(text):
        num, den = text.split("/")
        frac = Fraction(int(num), int(den))
        return int(frac) if frac.denominator == 1 else frac
    if _FLT_RE.match(text):
        return float(text)
    return None


def format_number(value: Number) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# Parsing


def parse_formula(text: str, variables: Iterable[str] = ()) -> Formula:
    """Parse a single formula from text.  `variables` marks schematic words."""
    items = _fold_negations(read(text))
    if len(items) != 1:
        raise FormulaSyntaxError("expected a single formula", 1, 1)
    return _item_formula(items[0], frozenset(variables))


def fold_prefix_negations(nodes: list[Node]) -> list:
    """Attach top-level '~' tokens to their operands; returns mixed items."""
    return _fold_negations(list(nodes))


def item_to_formula(item, variables: Iterable[str] = ()) -> Formula:
    return _item_formula(item, frozenset(variables))


def formula_from_node(node: Node, variables: frozenset[str]) -> Formula:
    if isinstance(node, Token):
        if node.text == "~":
            raise FormulaSyntaxError("dangling '~'", node.line, node.col)
        num = parse_number(node.text)
        if num is not None:
            return Atom((Num(num),))
        return Atom((_word(node.text, variables),))
    return _interp_group(node, variables)


def _word(text: str, variables: frozenset[str]) -> Term:
    num = parse_number(text)
    if num is not None:
        return Num(num)
    if text in variables:
        return Var(text)
    return Const(text)


def _fold_negations(items: list[Node]) -> list[Node | tuple]:
    """Attach prefix '~' tokens to their operand."""
    out: list = []
    i = 0
    while i < len(items):
        it = items[i]
        if isinstance(it, Token) and it.text == "~" and not it.is_string:
            if i + 1 >= len(items):
                raise FormulaSyntaxError("dangling '~'", it.line, it.col)
            inner = _fold_negations(items[i + 1 : i + 2])[0]
            out.append(("neg", inner, it))
            i += 2
        else:
            out.append(it)
            i += 1
    return out


def _item_formula(item, variables: frozenset[str]) -> Formula:
    if isinstance(item, tuple) and item[0] == "neg":
        return negate(_item_formula(item[1], variables))
    if isinstance(item, Token):
        return formula_from_node(item, variables)
    return _interp_group(item, variables)


def _item_term(item, variables: frozenset[str]) -> Term:
    if isinstance(item, tuple):
        raise FormulaSyntaxError("'~' not allowed in a term", item[2].line, item[2].col)
    if isinstance(item, Token):
        return _word(item.text, variables)
    # parenthesized compound term: (functor arg ...)
    if not item or not isinstance(item[0], Token):
        raise FormulaSyntaxError("malformed term", item.line, item.col)
    return Compound(item[0].text, tuple(_item_term(x, variables) for x in item[1:]))


def _tok(item, text: str) -> bool:
    return isinstance(item, Token) and not item.is_string and item.text == text


def _interp_group(group: Group, variables: frozenset[str]) -> Formula:
    items = _fold_negations(list(group))
    if not items:
        raise FormulaSyntaxError("empty formula", group.line, group.col)
    if len(items) == 1:
        return _item_formula(items[0], variables)

    # quantifiers: (all x F) / (some x F)
    if len(items) == 3 and (_tok(items[0], "all") or _tok(items[0], "some")):
        if not isinstance(items[1], Token):
            raise FormulaSyntaxError("quantifier variable must be a word", group.line, group.col)
        body = _item_formula(items[2], variables)
        cls = Forall if items[0].text == "all" else Exists
        return cls(items[1].text, body)

    # planning conditional: ((A / C) => G)
    if len(items) == 3 and _tok(items[1], "=>"):
        left = items[0]
        if not (isinstance(left, Group) and len(left) == 3 and _tok(left[1], "/")):
            raise FormulaSyntaxError("expected (action / condition) before '=>'", group.line, group.col)
        return PlanConditional(
            _item_formula(left[0], variables),
            _item_formula(left[2], variables),
            _item_formula(items[2], variables),
        )

    # probability bound: ((the probability of F given G) cmp term)
    if (
        len(items) == 3
        and isinstance(items[1], Token)
        and items[1].text in ("<=", ">=")
        and isinstance(items[0], Group)
    ):
        inner = _fold_negations(list(items[0]))
        if (
            len(inner) == 6
            and _tok(inner[0], "the")
            and _tok(inner[1], "probability")
            and _tok(inner[2], "of")
            and _tok(inner[4], "given")
        ):
            return ProbBound(
                _item_formula(inner[3], variables),
                _item_formula(inner[5], variables),
                items[1].text,
                _item_term(items[2], variables),
            )
        raise FormulaSyntaxError("malformed probability bound", group.line, group.col)

    # undercut and binary connectives: (F op G)
    if len(items) == 3 and isinstance(items[1], Token):
        op = items[1].text
        if op == "@>":
            return Undercut(_item_formula(items[0], variables), _item_formula(items[2], variables))
        if op in _BINARY_OPS:
            return _BINARY_OPS[op](
                _item_formula(items[0], variables), _item_formula(items[2], variables)
            )

    # causal rule: (A when C is causally sufficient for E after an interval I)
    if len(items) == 12 and all(
        _tok(items[i], kw)
        for i, kw in ((1, "when"), (3, "is"), (4, "causally"), (5, "sufficient"), (6, "for"), (8, "after"), (9, "an"), (10, "interval"))
    ):
        return Causal(
            _item_formula(items[0], variables),
            _item_formula(items[2], variables),
            _item_formula(items[7], variables),
            _item_term(items[11], variables),
        )

    # temporal forms recognized at tail position: (F ... at t) / (F throughout (op a b))
    if len(items) >= 3 and _tok(items[-2], "at"):
        return At(_left_operand(items[:-2], variables, group), _item_term(items[-1], variables))
    if len(items) >= 3 and _tok(items[-2], "throughout"):
        spec = items[-1]
        if not (isinstance(spec, Group) and len(spec) == 3 and isinstance(spec[0], Token)):
            raise FormulaSyntaxError("expected (op start end) after 'throughout'", group.line, group.col)
        op = spec[0].text
        if op not in INTERVAL_OPS:
            raise FormulaSyntaxError(f"unknown interval op {op!r}", spec.line, spec.col)
        return Throughout(
            _left_operand(items[:-2], variables, group),
            op,
            _item_term(spec[1], variables),
            _item_term(spec[2], variables),
        )

    # plain multiword atom
    return _atom_from_items(items, variables, group)


def _left_operand(items: list, variables: frozenset[str], group: Group) -> Formula:
    if len(items) == 1:
        return _item_formula(items[0], variables)
    return _atom_from_items(items, variables, group)


def _atom_from_items(items: list, variables: frozenset[str], group: Group) -> Formula:
    parts: list[Part] = []
    for it in items:
        if isinstance(it, tuple):
            parts.append(_item_formula(it, variables))
        elif isinstance(it, Token):
            if it.text in _RESERVED_IN_ATOMS:
                raise FormulaSyntaxError(
                    f"{it.text!r} cannot appear inside an atom", it.line, it.col
                )
            parts.append(_word(it.text, variables))
        else:
            sub = _interp_group(it, variables)
            parts.append(_demote(sub))
    return Atom(tuple(parts))


def _demote(f: Formula) -> Part:
    # single-word atoms are stored as bare word parts inside larger atoms
    if isinstance(f, Atom) and len(f.parts) == 1 and isinstance(f.parts[0], Term):
        return f.parts[0]
    return f


# ---------------------------------------------------------------------------
# Printing


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Num):
        return format_number(t.value)
    if isinstance(t, Compound):
        inner = " ".join(print_term(a) for a in t.args)
        return f"({t.functor} {inner})" if inner else f"({t.functor})"
    raise TypeError(f"not a term: {t!r}")


def _print_part(p: Part) -> str:
    if isinstance(p, Term):
        return print_term(p)
    return _print_operand(p)


def _print_operand(f: Formula) -> str:
    """Print a formula so it reads back as one item inside a larger form."""
    s = print_formula(f)
    if isinstance(f, Atom) and len(f.parts) == 1:
        return s  # bare word
    if isinstance(f, Not):
        return s  # ~ binds to its operand
    return s  # all other forms are already parenthesized


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if len(f.parts) == 1 and isinstance(f.parts[0], Term):
            return print_term(f.parts[0])
        return "(" + " ".join(_print_part(p) for p in f.parts) + ")"
    if isinstance(f, Not):
        return "~" + _print_operand(f.body)
    for cls, op in ((And, "&"), (Or, "v"), (If, "->"), (Iff, "<->")):
        if isinstance(f, cls):
            return f"({_print_operand(f.left)} {op} {_print_operand(f.right)})"
    if isinstance(f, Forall):
        return f"(all {f.var} {_print_operand(f.body)})"
    if isinstance(f, Exists):
        return f"(some {f.var} {_print_operand(f.body)})"
    if isinstance(f, At):
        return f"({_print_operand(f.body)} at {print_term(f.time)})"
    if isinstance(f, Throughout):
        return (
            f"({_print_operand(f.body)} throughout "
            f"({f.op} {print_term(f.start)} {print_term(f.end)}))"
        )
    if isinstance(f, Undercut):
        return f"({_print_operand(f.premise)} @> {_print_operand(f.conclusion)})"
    if isinstance(f, ProbBound):
        return (
            f"((the probability of {_print_operand(f.target)} given "
            f"{_print_operand(f.given)}) {f.cmp} {print_term(f.bound)})"
        )
    if isinstance(f, Causal):
        return (
            f"({_print_operand(f.action)} when {_print_operand(f.condition)} "
            f"is causally sufficient for {_print_operand(f.effect)} "
            f"after an interval {print_term(f.interval)})"
        )
    if isinstance(f, PlanConditional):
        return (
            f"(({_print_operand(f.action)} / {_print_operand(f.condition)}) "
            f"=> {_print_operand(f.goal)})"
        )
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Structural operations


def negate(f: Formula) -> Formula:
    """Negation with canonicalization: double negations collapse and negation
    commutes inward through `at`, so rebuttal detection stays syntactic."""
    if isinstance(f, Not):
        return f.body
    if isinstance(f, At):
        return At(negate(f.body), f.time)
    return Not(f)


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def conjoin(fs: list[Formula]) -> Formula:
    if not fs:
        raise ValueError("cannot conjoin zero formulas")
    out = fs[0]
    for g in fs[1:]:
        out = And(out, g)
    return out


Binding = dict[str, Part]


def _resolve(part: Part, b: Binding) -> Part:
    if isinstance(part, Var) and part.name in b:
        return b[part.name]
    return part


def substitute(f: Formula, b: Binding) -> Formula:
    if not b:
        return f
    return _subst_formula(f, b, frozenset())


def _subst_term(t: Term, b: Binding, shadow: frozenset[str]) -> Part:
    if isinstance(t, Var) and t.name in b and t.name not in shadow:
        return b[t.name]
    if isinstance(t, Compound):
        args = []
        for a in t.args:
            sub = _subst_term(a, b, shadow)
            if isinstance(sub, Formula):
                raise ValueError("formula bound into a term position")
            args.append(sub)
        return Compound(t.functor, tuple(args))
    return t


def _subst_time(t: Term, b: Binding, shadow: frozenset[str]) -> Term:
    sub = _subst_term(t, b, shadow)
    if isinstance(sub, Formula):
        raise ValueError("formula bound into a term position")
    return sub


def _subst_formula(f: Formula, b: Binding, shadow: frozenset[str]) -> Formula:
    if isinstance(f, Atom):
        if len(f.parts) == 1 and isinstance(f.parts[0], Var):
            v = f.parts[0]
            if v.name in b and v.name not in shadow:
                val = b[v.name]
                if isinstance(val, Formula):
                    return val
                return Atom((val,))
            return f
        parts: list[Part] = []
        for p in f.parts:
            if isinstance(p, Formula):
                parts.append(_demote(_subst_formula(p, b, shadow)))
            else:
                sub = _subst_term(p, b, shadow)
                parts.append(_demote(sub) if isinstance(sub, Formula) else sub)
        return Atom(tuple(parts))
    if isinstance(f, Not):
        return negate(_subst_formula(f.body, b, shadow))
    if isinstance(f, (And, Or, If, Iff)):
        return type(f)(_subst_formula(f.left, b, shadow), _subst_formula(f.right, b, shadow))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _subst_formula(f.body, b, shadow | {f.var}))
    if isinstance(f, At):
        return At(_subst_formula(f.body, b, shadow), _subst_time(f.time, b, shadow))
    if isinstance(f, Throughout):
        return Throughout(
            _subst_formula(f.body, b, shadow),
            f.op,
            _subst_time(f.start, b, shadow),
            _subst_time(f.end, b, shadow),
        )
    if isinstance(f, Undercut):
        return Undercut(_subst_formula(f.premise, b, shadow), _subst_formula(f.conclusion, b, shadow))
    if isinstance(f, ProbBound):
        return ProbBound(
            _subst_formula(f.target, b, shadow),
            _subst_formula(f.given, b, shadow),
            f.cmp,
            _subst_time(f.bound, b, shadow),
        )
    if isinstance(f, Causal):
        return Causal(
            _subst_formula(f.action, b, shadow),
            _subst_formula(f.condition, b, shadow),
            _subst_formula(f.effect, b, shadow),
            _subst_time(f.interval, b, shadow),
        )
    if isinstance(f, PlanConditional):
        return PlanConditional(
            _subst_formula(f.action, b, shadow),
            _subst_formula(f.condition, b, shadow),
            _subst_formula(f.goal, b, shadow),
        )
    raise TypeError(f"not a formula: {f!r}")


def formula_vars(f: Formula) -> set[str]:
    out: set[str] = set()
    _collect_vars(f, out)
    return out


def _collect_vars(x, out: set[str]) -> None:
    if isinstance(x, Var):
        out.add(x.name)
    elif isinstance(x, Compound):
        for a in x.args:
            _collect_vars(a, out)
    elif isinstance(x, Atom):
        for p in x.parts:
            _collect_vars(p, out)
    elif isinstance(x, Not):
        _collect_vars(x.body, out)
    elif isinstance(x, (And, Or, If, Iff)):
        _collect_vars(x.left, out)
        _collect_vars(x.right, out)
    elif isinstance(x, (Forall, Exists)):
        _collect_vars(x.body, out)
    elif isinstance(x, At):
        _collect_vars(x.body, out)
        _collect_vars(x.time, out)
    elif isinstance(x, Throughout):
        _collect_vars(x.body, out)
        _collect_vars(x.start, out)
        _collect_vars(x.end, out)
    elif isinstance(x, Undercut):
        _collect_vars(x.premise, out)
        _collect_vars(x.conclusion, out)
    elif isinstance(x, ProbBound):
        _collect_vars(x.target, out)
        _collect_vars(x.given, out)
        _collect_vars(x.bound, out)
    elif isinstance(x, Causal):
        _collect_vars(x.action, out)
        _collect_vars(x.condition, out)
        _collect_vars(x.effect, out)
        _collect_vars(x.interval, out)
    elif isinstance(x, PlanConditional):
        _collect_vars(x.action, out)
        _collect_vars(x.condition, out)
        _collect_vars(x.goal, out)


def is_ground(f: Formula) -> bool:
    return not formula_vars(f)


def _occurs(name: str, part: Part) -> bool:
    found: set[str] = set()
    _collect_vars(part, found)
    return name in found


# ---------------------------------------------------------------------------
# One-way matching


def unify(
    pattern: Formula,
    target: Formula,
    variables: Iterable[str],
    seed: Optional[Binding] = None,
) -> Optional[Binding]:
    """One-way match: find b extending seed with substitute(pattern, b) == target.

    Only symbols in `variables` are schematic in the pattern; the target is
    treated as ground.  Returns None when no such binding exists.
    """
    b: Binding = dict(seed) if seed else {}
    if _match_formula(pattern, target, frozenset(variables), b):
        return b
    return None


def _bind(name: str, value: Part, b: Binding) -> bool:
    if name in b:
        return b[name] == value
    if _occurs(name, value):
        return False
    b[name] = value
    return True


def _match_term(p: Term, t: Part, vars_: frozenset[str], b: Binding) -> bool:
    if isinstance(p, Var) and p.name in vars_:
        return _bind(p.name, t, b)
    if isinstance(t, Formula):
        return False
    if isinstance(p, Num) and isinstance(t, Num):
        return p.value == t.value
    if isinstance(p, Compound) and isinstance(t, Compound):
        return (
            p.functor == t.functor
            and len(p.args) == len(t.args)
            and all(_match_term(pa, ta, vars_, b) for pa, ta in zip(p.args, t.args))
        )
    return p == t


def _match_part(p: Part, t: Part, vars_: frozenset[str], b: Binding) -> bool:
    if isinstance(p, Formula):
        return isinstance(t, Formula) and _match_formula(p, t, vars_, b)
    return _match_term(p, t, vars_, b)


def _match_formula(p: Formula, t: Formula, vars_: frozenset[str], b: Binding) -> bool:
    if isinstance(p, Atom) and len(p.parts) == 1 and isinstance(p.parts[0], Var):
        name = p.parts[0].name
        if name in vars_:
            # a lone schematic word matches any formula; against a one-word
            # atom it binds the word itself so word- and formula-level uses
            # of the same variable stay consistent
            if isinstance(t, Atom) and len(t.parts) == 1:
                return _bind(name, t.parts[0], b)
            return _bind(name, t, b)
    if isinstance(p, Atom):
        if not isinstance(t, Atom) or len(p.parts) != len(t.parts):
            return False
        return all(_match_part(pp, tp, vars_, b) for pp, tp in zip(p.parts, t.parts))
    if isinstance(p, Not):
        if isinstance(t, Not):
            return _match_formula(p.body, t.body, vars_, b)
        # solve negate(x) == t by binding x to negate(t)
        if (
            isinstance(p.body, Atom)
            and len(p.body.parts) == 1
            and isinstance(p.body.parts[0], Var)
            and p.body.parts[0].name in vars_
        ):
            return _bind(p.body.parts[0].name, negate(t), b)
        return False
    if type(p) is not type(t):
        return False
    if isinstance(p, (And, Or, If, Iff)):
        return _match_formula(p.left, t.left, vars_, b) and _match_formula(
            p.right, t.right, vars_, b
        )
    if isinstance(p, (Forall, Exists)):
        return p.var == t.var and _match_formula(p.body, t.body, vars_, b)
    if isinstance(p, At):
        return _match_formula(p.body, t.body, vars_, b) and _match_term(p.time, t.time, vars_, b)
    if isinstance(p, Throughout):
        return (
            p.op == t.op
            and _match_formula(p.body, t.body, vars_, b)
            and _match_term(p.start, t.start, vars_, b)
            and _match_term(p.end, t.end, vars_, b)
        )
    if isinstance(p, Undercut):
        return _match_formula(p.premise, t.premise, vars_, b) and _match_formula(
            p.conclusion, t.conclusion, vars_, b
        )
    if isinstance(p, ProbBound):
        return (
            p.cmp == t.cmp
            and _match_formula(p.target, t.target, vars_, b)
            and _match_formula(p.given, t.given, vars_, b)
            and _match_term(p.bound, t.bound, vars_, b)
        )
    if isinstance(p, Causal):
        return (
            _match_formula(p.action, t.action, vars_, b)
            and _match_formula(p.condition, t.condition, vars_, b)
            and _match_formula(p.effect, t.effect, vars_, b)
            and _match_term(p.interval, t.interval, vars_, b)
        )
    if isinstance(p, PlanConditional):
        return (
            _match_formula(p.action, t.action, vars_, b)
            and _match_formula(p.condition, t.condition, vars_, b)
            and _match_formula(p.goal, t.goal, vars_, b)
        )
    raise TypeError(f"not a formula: {p!r}")


# ---------------------------------------------------------------------------
# Two-sided matching (interests may carry their own schematic variables)

_RENAME_PREFIX = "·t·"  # private marker, cannot appear in source text


def rename_vars(f: Formula, mapping: dict[str, str]) -> Formula:
    b: Binding = {old: Var(new) for old, new in mapping.items()}
    return _subst_formula(f, b, frozenset()) if b else f


def unify_two_way(
    pattern: Formula,
    target: Formula,
    pattern_vars: Iterable[str],
    target_vars: Iterable[str],
) -> Optional[Binding]:
    """Unify two open formulas; returns bindings for the pattern's variables.

    Target variables are renamed apart and treated as schematic too.
    Pattern variables left unbound (or bound only to a target variable) are
    omitted from the result.
    """
    tvars = set(target_vars)
    mapping = {v: _RENAME_PREFIX + v for v in tvars}
    t2 = rename_vars(target, mapping)
    all_vars = frozenset(pattern_vars) | frozenset(mapping.values())
    b: Binding = {}
    if not _unify_open(pattern, t2, all_vars, b):
        return None
    out: Binding = {}
    for name in pattern_vars:
        if name not in b:
            continue
        val = _deep_resolve(b[name], b)
        if isinstance(val, Var) and (val.name in all_vars):
            continue
        free: set[str] = set()
        _collect_vars(val, free)
        if free & all_vars:
            continue  # still open; settled at discharge time
        out[name] = val
    return out


def _deep_resolve(part: Part, b: Binding) -> Part:
    seen = 0
    while isinstance(part, Var) and part.name in b:
        part = b[part.name]
        seen += 1
        if seen > len(b) + 1:
            break
    if isinstance(part, Formula):
        return _subst_formula(part, b, frozenset())
    if isinstance(part, Compound):
        sub = _subst_term(part, b, frozenset())
        return sub
    return part


def _unify_open(p: Formula, t: Formula, vars_: frozenset[str], b: Binding) -> bool:
    p_lone = _lone_var(p, vars_)
    t_lone = _lone_var(t, vars_)
    if p_lone is not None:
        return _bind_open(p_lone, t, vars_, b)
    if t_lone is not None:
        return _bind_open(t_lone, p, vars_, b)
    if isinstance(p, Not) and not isinstance(t, Not):
        inner = _lone_var_formula(p.body, vars_)
        if inner is not None:
            return _bind_open(inner, negate(t), vars_, b)
        return False
    if isinstance(t, Not) and not isinstance(p, Not):
        inner = _lone_var_formula(t.body, vars_)
        if inner is not None:
            return _bind_open(inner, negate(p), vars_, b)
        return False
    if type(p) is not type(t):
        return False
    if isinstance(p, Atom):
        if len(p.parts) != len(t.parts):
            return False
        return all(_unify_term_open(pp, tp, vars_, b) for pp, tp in zip(p.parts, t.parts))
    if isinstance(p, Not):
        return _unify_open(p.body, t.body, vars_, b)
    if isinstance(p, (And, Or, If, Iff)):
        return _unify_open(p.left, t.left, vars_, b) and _unify_open(p.right, t.right, vars_, b)
    if isinstance(p, (Forall, Exists)):
        return p.var == t.var and _unify_open(p.body, t.body, vars_, b)
    if isinstance(p, At):
        return _unify_open(p.body, t.body, vars_, b) and _unify_term_open(p.time, t.time, vars_, b)
    if isinstance(p, Throughout):
        return (
            p.op == t.op
            and _unify_open(p.body, t.body, vars_, b)
            and _unify_term_open(p.start, t.start, vars_, b)
            and _unify_term_open(p.end, t.end, vars_, b)
        )
    if isinstance(p, Undercut):
        return _unify_open(p.premise, t.premise, vars_, b) and _unify_open(
            p.conclusion, t.conclusion, vars_, b
        )
    if isinstance(p, ProbBound):
        return (
            p.cmp == t.cmp
            and _unify_open(p.target, t.target, vars_, b)
            and _unify_open(p.given, t.given, vars_, b)
            and _unify_term_open(p.bound, t.bound, vars_, b)
        )
    if isinstance(p, Causal):
        return (
            _unify_open(p.action, t.action, vars_, b)
            and _unify_open(p.condition, t.condition, vars_, b)
            and _unify_open(p.effect, t.effect, vars_, b)
            and _unify_term_open(p.interval, t.interval, vars_, b)
        )
    if isinstance(p, PlanConditional):
        return (
            _unify_open(p.action, t.action, vars_, b)
            and _unify_open(p.condition, t.condition, vars_, b)
            and _unify_open(p.goal, t.goal, vars_, b)
        )
    raise TypeError(f"not a formula: {p!r}")


def _lone_var(f: Formula, vars_: frozenset[str]) -> Optional[str]:
    if isinstance(f, Atom) and len(f.parts) == 1 and isinstance(f.parts[0], Var):
        if f.parts[0].name in vars_:
            return f.parts[0].name
    return None


def _lone_var_formula(f: Formula, vars_: frozenset[str]) -> Optional[str]:
    return _lone_var(f, vars_)


def _walk_var(part: Part, vars_: frozenset[str], b: Binding) -> Part:
    seen: set[str] = set()
    while isinstance(part, Var) and part.name in vars_ and part.name in b:
        if part.name in seen:
            break
        seen.add(part.name)
        part = b[part.name]
    return part


def _bind_open(name: str, value: Part, vars_: frozenset[str], b: Binding) -> bool:
    seen: set[str] = set()
    while name in b:
        if name in seen:
            return False
        seen.add(name)
        cur = b[name]
        if isinstance(cur, Var) and cur.name in vars_:
            name = cur.name
            continue
        # already bound to structure: unify the structures
        if isinstance(cur, Formula):
            tgt = value if isinstance(value, Formula) else Atom((value,))
            return _unify_open(cur, tgt, vars_, b)
        return _unify_term_open(cur, value, vars_, b)
    value = _walk_var(value, vars_, b)
    if isinstance(value, Var) and value.name in vars_ and value.name == name:
        return True
    if isinstance(value, Formula) and _demote(value) is not value:
        value = _demote(value)
    if _occurs(name, value):
        return False
    b[name] = value
    return True


def _unify_term_open(p: Part, t: Part, vars_: frozenset[str], b: Binding) -> bool:
    if isinstance(p, Var) and p.name in vars_:
        return _bind_open(p.name, t, vars_, b)
    if isinstance(t, Var) and t.name in vars_:
        return _bind_open(t.name, p, vars_, b)
    if isinstance(p, Formula) or isinstance(t, Formula):
        if isinstance(p, Formula) and isinstance(t, Formula):
            return _unify_open(p, t, vars_, b)
        return False
    if isinstance(p, Num) and isinstance(t, Num):
        return p.value == t.value
    if isinstance(p, Compound) and isinstance(t, Compound):
        return (
            p.functor == t.functor
            and len(p.args) == len(t.args)
            and all(_unify_term_open(pa, ta, vars_, b) for pa, ta in zip(p.args, t.args))
        )
    return p == t


def alpha_key(f: Formula, variables: Iterable[str]) -> str:
    """Canonical printable key: schematic variables renamed in first-use order."""
    vars_ = set(variables) & formula_vars(f)
    if not vars_:
        return print_formula(f)
    order: list[str] = []
    _var_order(f, vars_, order)
    mapping = {name: f"?{i}" for i, name in enumerate(order)}
    return print_formula(rename_vars(f, mapping))


def _var_order(x, vars_: set[str], order: list[str]) -> None:
    if isinstance(x, Var):
        if x.name in vars_ and x.name not in order:
            order.append(x.name)
        return
    if isinstance(x, (Const, Num)):
        return
    if isinstance(x, Compound):
        for a in x.args:
            _var_order(a, vars_, order)
        return
    if isinstance(x, Atom):
        for p in x.parts:
            _var_order(p, vars_, order)
    elif isinstance(x, Not):
        _var_order(x.body, vars_, order)
    elif isinstance(x, (And, Or, If, Iff)):
        _var_order(x.left, vars_, order)
        _var_order(x.right, vars_, order)
    elif isinstance(x, (Forall, Exists)):
        _var_order(x.body, vars_, order)
    elif isinstance(x, At):
        _var_order(x.body, vars_, order)
        _var_order(x.time, vars_, order)
    elif isinstance(x, Throughout):
        _var_order(x.body, vars_, order)
        _var_order(x.start, vars_, order)
        _var_order(x.end, vars_, order)
    elif isinstance(x, Undercut):
        _var_order(x.premise, vars_, order)
        _var_order(x.conclusion, vars_, order)
    elif isinstance(x, ProbBound):
        _var_order(x.target, vars_, order)
        _var_order(x.given, vars_, order)
        _var_order(x.bound, vars_, order)
    elif isinstance(x, Causal):
        _var_order(x.action, vars_, order)
        _var_order(x.condition, vars_, order)
        _var_order(x.effect, vars_, order)
        _var_order(x.interval, vars_, order)
    elif isinstance(x, PlanConditional):
        _var_order(x.action, vars_, order)
        _var_order(x.condition, vars_, order)
        _var_order(x.goal, vars_, order)
