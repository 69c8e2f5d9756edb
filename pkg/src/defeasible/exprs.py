"""Condition and strength expressions attached to reason schemas.

One small arithmetic/boolean language serves both: comparisons over
arithmetic terms (with `log`, `expt`, and named globals like
`*temporal-decay*`), boolean combinators, and the predicates
`temporally-projectible`, `numberp`, and `(eq x 'sym)`.

Evaluation is total given a grounding binding: any unground or ill-typed
subexpression makes a condition false and a strength undefined, never an
engine error.  Both prefix style `(- (* 2 x) 1)` and infix style
`(time - time0)` are accepted, as is call syntax `log(x)`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from .formulas import (
    Atom,
    Const,
    Formula,
    Num,
    Number,
    Term,
    Var,
    format_number,
    parse_number,
)
from .sexpr import Group, InputSyntaxError, Node, Token

GLOBALS = ("*temporal-decay*", "*statistical-threshold*")

_ARITH_OPS = {"+", "-", "*", "/", "expt", "log"}
_CMP_OPS = {"<", "<=", "=", ">=", ">"}
_BOOL_OPS = {"and", "or", "not"}
_FUNCS = {"log", "expt"}


class ExprSyntaxError(InputSyntaxError):
    pass


class Unground(Exception):
    """Raised internally when a subexpression cannot be evaluated."""


@dataclass(frozen=True)
class ENum:
    value: Number


@dataclass(frozen=True)
class ESym:
    name: str


@dataclass(frozen=True)
class EQuote:
    name: str


@dataclass(frozen=True)
class ECall:
    op: str
    args: tuple


@dataclass(frozen=True)
class EProjectible:
    arg: "Expr"


@dataclass(frozen=True)
class ENumberp:
    arg: "Expr"


@dataclass(frozen=True)
class EEveryConjunctProjectible:
    arg: "Expr"


Expr = Union[ENum, ESym, EQuote, ECall, EProjectible, ENumberp, EEveryConjunctProjectible]


@dataclass
class EvalContext:
    """Values a schema expression may consult beyond its own binding."""

    globals: dict[str, Number]
    projectible: Callable[[Formula], bool]
    engine: object | None = None


# ---------------------------------------------------------------------------
# Parsing


def parse_expr(node: Node) -> Expr:
    if isinstance(node, Token):
        num = parse_number(node.text)
        if num is not None:
            return ENum(num)
        return ESym(node.text)
    return _parse_group(node)


def _parse_group(group: Group) -> Expr:
    items = list(group)
    if not items:
        raise ExprSyntaxError("empty expression", group.line, group.col)
    head = items[0]
    if isinstance(head, Token):
        name = head.text
        if name in _BOOL_OPS:
            args = tuple(parse_expr(x) for x in _units(items[1:], group))
            if name == "not" and len(args) != 1:
                raise ExprSyntaxError("'not' takes one argument", group.line, group.col)
            if name != "not" and len(args) < 1:
                raise ExprSyntaxError(f"'{name}' needs arguments", group.line, group.col)
            return ECall(name, args)
        if name == "eq":
            args = tuple(parse_expr(x) for x in _units(items[1:], group))
            if len(args) != 2:
                raise ExprSyntaxError("'eq' takes two arguments", group.line, group.col)
            return ECall("eq", args)
        if name == "temporally-projectible":
            if len(items) != 2:
                raise ExprSyntaxError(
                    "'temporally-projectible' takes one argument", group.line, group.col
                )
            return EProjectible(parse_expr(items[1]))
        if name == "numberp":
            if len(items) != 2:
                raise ExprSyntaxError("'numberp' takes one argument", group.line, group.col)
            return ENumberp(parse_expr(items[1]))
        if name == "every":
            # (every #temporally-projectible (conjuncts X))
            if (
                len(items) == 3
                and isinstance(items[1], Token)
                and items[1].text in ("#temporally-projectible", "#'temporally-projectible")
                and isinstance(items[2], Group)
                and len(items[2]) == 2
                and isinstance(items[2][0], Token)
                and items[2][0].text == "conjuncts"
            ):
                return EEveryConjunctProjectible(parse_expr(items[2][1]))
            raise ExprSyntaxError("malformed 'every' form", group.line, group.col)
        if name in _ARITH_OPS and len(items) > 1:
            args = tuple(parse_expr(x) for x in _units(items[1:], group))
            if name == "log" and len(args) != 1:
                raise ExprSyntaxError("'log' takes one argument", group.line, group.col)
            if name in ("expt", "/") and len(args) != 2:
                raise ExprSyntaxError(f"'{name}' takes two arguments", group.line, group.col)
            if name == "-" and len(args) == 1:
                return ECall("neg", args)
            return ECall(name, args)
    return _parse_infix(items, group)


def _units(items: list[Node], group: Group) -> list[Node]:
    """Re-group call syntax `f(x)` into single units, and quotes into tokens."""
    out: list = []
    i = 0
    while i < len(items):
        it = items[i]
        if (
            isinstance(it, Token)
            and it.text in _FUNCS
            and i + 1 < len(items)
            and isinstance(items[i + 1], Group)
        ):
            g = Group([it, *items[i + 1]], line=it.line, col=it.col)
            out.append(g)
            i += 2
        elif isinstance(it, Token) and it.text == "'":
            if i + 1 >= len(items) or not isinstance(items[i + 1], Token):
                raise ExprSyntaxError("dangling quote", it.line, it.col)
            out.append(("quote", items[i + 1]))
            i += 2
        else:
            out.append(it)
            i += 1
    return out


def parse_expr_unit(u) -> Expr:
    if isinstance(u, tuple) and u[0] == "quote":
        return EQuote(u[1].text)
    return parse_expr(u)


def _parse_infix(raw: list[Node], group: Group) -> Expr:
    units = _units(raw, group)
    if len(units) == 1:
        return parse_expr_unit(units[0])
    # lowest precedence: a single comparison
    for i, u in enumerate(units):
        if isinstance(u, Token) and u.text in _CMP_OPS:
            left = _parse_arith(units[:i], group)
            right = _parse_arith(units[i + 1 :], group)
            return ECall(u.text, (left, right))
    return _parse_arith(units, group)


def _parse_arith(units: list, group: Group) -> Expr:
    if not units:
        raise ExprSyntaxError("missing operand", group.line, group.col)
    if len(units) == 1:
        return parse_expr_unit(units[0])
    # additive level, left associative
    for i in range(len(units) - 2, 0, -1):
        u = units[i]
        if isinstance(u, Token) and u.text in ("+", "-"):
            return ECall(u.text, (_parse_arith(units[:i], group), _parse_arith(units[i + 1 :], group)))
    for i in range(len(units) - 2, 0, -1):
        u = units[i]
        if isinstance(u, Token) and u.text in ("*", "/"):
            return ECall(u.text, (_parse_arith(units[:i], group), _parse_arith(units[i + 1 :], group)))
    raise ExprSyntaxError("cannot parse expression", group.line, group.col)


def parse_expr_text(text: str) -> Expr:
    from .sexpr import read

    nodes = read(text)
    if len(nodes) != 1:
        raise ExprSyntaxError("expected a single expression", 1, 1)
    return parse_expr(nodes[0])


# ---------------------------------------------------------------------------
# Printing (canonical form; the parser accepts it back)


def print_expr(e: Expr) -> str:
    if isinstance(e, ENum):
        return format_number(e.value)
    if isinstance(e, ESym):
        return e.name
    if isinstance(e, EQuote):
        return f"'{e.name}"
    if isinstance(e, EProjectible):
        return f"(temporally-projectible {print_expr(e.arg)})"
    if isinstance(e, ENumberp):
        return f"(numberp {print_expr(e.arg)})"
    if isinstance(e, EEveryConjunctProjectible):
        return f"(every #temporally-projectible (conjuncts {print_expr(e.arg)}))"
    if isinstance(e, ECall):
        if e.op in _CMP_OPS or e.op in ("+", "-", "*", "/"):
            if len(e.args) == 2:
                return f"({print_expr(e.args[0])} {e.op} {print_expr(e.args[1])})"
        if e.op == "neg":
            return f"(- {print_expr(e.args[0])})"
        inner = " ".join(print_expr(a) for a in e.args)
        return f"({e.op} {inner})"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation

Value = Union[Number, str, Formula, bool]


def _to_value(part) -> Value:
    if isinstance(part, Num):
        return part.value
    if isinstance(part, Const):
        return part.name
    if isinstance(part, Var):
        raise Unground
    if isinstance(part, Formula):
        if isinstance(part, Atom) and len(part.parts) == 1:
            return _to_value(part.parts[0])
        return part
    if isinstance(part, Term):
        raise Unground
    return part


def _eval(e: Expr, binding: dict, ctx: EvalContext) -> Value:
    if isinstance(e, ENum):
        return e.value
    if isinstance(e, EQuote):
        return e.name
    if isinstance(e, ESym):
        if e.name in ctx.globals:
            return ctx.globals[e.name]
        if e.name in binding:
            return _to_value(binding[e.name])
        raise Unground
    if isinstance(e, ENumberp):
        try:
            return isinstance(_eval(e.arg, binding, ctx), (int, float, Fraction))
        except Unground:
            return False
    if isinstance(e, EProjectible):
        return ctx.projectible(_as_formula(_eval(e.arg, binding, ctx)))
    if isinstance(e, EEveryConjunctProjectible):
        from .formulas import conjuncts

        f = _as_formula(_eval(e.arg, binding, ctx))
        return all(ctx.projectible(c) for c in conjuncts(f))
    if isinstance(e, ECall):
        if e.op == "and":
            return all(_truth(a, binding, ctx) for a in e.args)
        if e.op == "or":
            return any(_truth(a, binding, ctx) for a in e.args)
        if e.op == "not":
            return not _truth(e.args[0], binding, ctx)
        if e.op == "eq":
            va, vb = (_eval(a, binding, ctx) for a in e.args)
            return va == vb
        if e.op in _CMP_OPS:
            va, vb = (_num(_eval(a, binding, ctx)) for a in e.args)
            if e.op == "<":
                return _f(va) < _f(vb)
            if e.op == "<=":
                return _f(va) <= _f(vb)
            if e.op == "=":
                return _f(va) == _f(vb)
            if e.op == ">=":
                return _f(va) >= _f(vb)
            return _f(va) > _f(vb)
        if e.op == "neg":
            return -_num(_eval(e.args[0], binding, ctx))
        if e.op in ("+", "-", "*", "/"):
            vals = [_num(_eval(a, binding, ctx)) for a in e.args]
            out = vals[0]
            for v in vals[1:]:
                if e.op == "+":
                    out = out + v
                elif e.op == "-":
                    out = out - v
                elif e.op == "*":
                    out = out * v
                else:
                    if _f(v) == 0.0:
                        raise Unground
                    out = out / v
            return out
        if e.op == "expt":
            base, exp = (_num(_eval(a, binding, ctx)) for a in e.args)
            if isinstance(exp, int) and not isinstance(base, float):
                return base**exp
            try:
                return math.pow(_f(base), _f(exp))
            except (ValueError, OverflowError):
                raise Unground from None
        if e.op == "log":
            v = _f(_num(_eval(e.args[0], binding, ctx)))
            if v <= 0.0:
                raise Unground
            return math.log(v)
    raise TypeError(f"not an expression: {e!r}")


def _as_formula(v: Value) -> Formula:
    if isinstance(v, Formula):
        return v
    if isinstance(v, str):
        return Atom((Const(v),))
    raise Unground


def _num(v: Value) -> Number:
    if isinstance(v, bool) or not isinstance(v, (int, float, Fraction)):
        raise Unground
    return v


def _f(v: Number) -> float:
    return float(v)


def _truth(e: Expr, binding: dict, ctx: EvalContext) -> bool:
    v = _eval(e, binding, ctx)
    if not isinstance(v, bool):
        raise Unground
    return v


def condition_true(e: Expr, binding: dict, ctx: EvalContext) -> bool:
    """Evaluate a condition; unground or ill-typed means False."""
    try:
        return _truth(e, binding, ctx)
    except Unground:
        return False


def strength_value(e, binding: dict, ctx: EvalContext) -> Optional[Number]:
    """Evaluate a strength; None when it cannot be evaluated."""
    if isinstance(e, (int, float, Fraction)):
        return e
    try:
        v = _eval(e, binding, ctx)
    except Unground:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float, Fraction)):
        return None
    return v


def expr_symbols(e: Expr) -> set[str]:
    out: set[str] = set()
    _collect(e, out)
    return out


def _collect(e: Expr, out: set[str]) -> None:
    if isinstance(e, ESym):
        if e.name not in GLOBALS:
            out.add(e.name)
    elif isinstance(e, (EProjectible, ENumberp, EEveryConjunctProjectible)):
        _collect(e.arg, out)
    elif isinstance(e, ECall):
        for a in e.args:
            _collect(a, out)
