"""Text format for schema definitions and scenario files.

Schemas use keyword-block macros::

    (def-forwards-reason NAME
      :forwards-premises "(p at time)" (:kind :percept) (:condition ...)
      :conclusion "(p at time)"
      :variables p time
      :defeasible? t
      :strength .98)

with `def-backwards-reason` adding `:condition`, and
`def-backwards-undercutter` replacing `:conclusion` with `:defeatee`.

Scenario files (.osc) are line-oriented; ';' starts a comment.  Sections:
`config:`, `projectible:`, `schema:`, `premise:`, `percept:`, `desire:`,
`query:`, `query-plan:`.  Sections may appear in any order; later config
keys override earlier ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import exprs
from .exprs import Expr, parse_expr, print_expr
from .formulas import (
    At,
    Formula,
    formula_vars,
    parse_number,
    print_formula,
)
from .reasons import KINDS, Percept, Premise, Reason, UndercutterSpec
from .sexpr import Group, InputSyntaxError, Node, Token, read


class SchemaError(InputSyntaxError):
    pass


class ScenarioError(InputSyntaxError):
    pass


CONFIG_KEYS = (
    "temporal-decay",
    "statistical-threshold",
    "step-budget",
    "interest-priority-discount",
    "max-plan-steps",
    "argument-budget",
)


@dataclass
class Scenario:
    config: dict = field(default_factory=dict)
    projectible: list[Formula] = field(default_factory=list)
    schemas: list[Union[Reason, UndercutterSpec]] = field(default_factory=list)
    premises: list[tuple[Formula, float]] = field(default_factory=list)
    percepts: list[Percept] = field(default_factory=list)
    desires: list[tuple[Formula, float]] = field(default_factory=list)
    queries: list[tuple[Formula, Optional[float]]] = field(default_factory=list)
    plan_queries: list[Formula] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Schema parsing

_DEF_FORMS = ("def-forwards-reason", "def-backwards-reason", "def-backwards-undercutter")
_SCHEMA_KEYWORDS = (
    ":forwards-premises",
    ":backwards-premises",
    ":conclusion",
    ":condition",
    ":strength",
    ":variables",
    ":defeasible?",
    ":defeatee",
)


def parse_schema(text: str, line_offset: int = 0) -> Union[Reason, UndercutterSpec]:
    nodes = read(text, line_offset)
    if len(nodes) != 1 or not isinstance(nodes[0], Group):
        raise SchemaError("expected a single (def-... ) form", 1 + line_offset, 1)
    return schema_from_node(nodes[0])


def schema_from_node(group: Group) -> Union[Reason, UndercutterSpec]:
    items = list(group)
    if not items or not isinstance(items[0], Token) or items[0].text not in _DEF_FORMS:
        raise SchemaError("expected def-forwards-reason, def-backwards-reason, "
                          "or def-backwards-undercutter", group.line, group.col)
    form = items[0].text
    if len(items) < 2 or not isinstance(items[1], Token):
        raise SchemaError("missing schema name", group.line, group.col)
    name = items[1].text

    # split the remainder into keyword blocks
    blocks: list[tuple[Token, list[Node]]] = []
    i = 2
    while i < len(items):
        it = items[i]
        if not (isinstance(it, Token) and it.text.startswith(":")):
            raise SchemaError(f"expected a keyword, got {_describe(it)}", *_pos(it))
        if it.text not in _SCHEMA_KEYWORDS:
            raise SchemaError(f"unknown keyword {it.text}", it.line, it.col)
        j = i + 1
        body: list[Node] = []
        while j < len(items) and not (
            isinstance(items[j], Token) and items[j].text.startswith(":") and not items[j].is_string
        ):
            body.append(items[j])
            j += 1
        blocks.append((it, body))
        i = j

    seen: dict[str, tuple[Token, list[Node]]] = {}
    for kw, body in blocks:
        if kw.text in seen:
            raise SchemaError(f"duplicate keyword {kw.text}", kw.line, kw.col)
        seen[kw.text] = (kw, body)

    # variables first; formula strings need them
    variables: list[str] = []
    if ":variables" in seen:
        for v in seen[":variables"][1]:
            if not isinstance(v, Token) or v.is_string:
                raise SchemaError("variables must be plain words", *_pos(v))
            variables.append(v.text)
    varset = frozenset(variables)

    def premises_of(key: str) -> tuple[Premise, ...]:
        if key not in seen:
            return ()
        return _parse_premises(seen[key][1], varset, seen[key][0])

    fps = premises_of(":forwards-premises")
    bps = premises_of(":backwards-premises")

    defeasible = False
    if ":defeasible?" in seen:
        kw, body = seen[":defeasible?"]
        if len(body) != 1 or not isinstance(body[0], Token):
            raise SchemaError(":defeasible? takes t or nil", kw.line, kw.col)
        flag = body[0].text.lower()
        if flag not in ("t", "nil"):
            raise SchemaError(":defeasible? takes t or nil", body[0].line, body[0].col)
        defeasible = flag == "t"

    strength: Union[float, int, Expr] = 1.0
    if ":strength" in seen:
        kw, body = seen[":strength"]
        if len(body) != 1:
            raise SchemaError(":strength takes one value", kw.line, kw.col)
        node = body[0]
        if isinstance(node, Token):
            num = parse_number(node.text)
            if num is None:
                raise SchemaError("strength must be a number or expression", node.line, node.col)
            strength = num
        else:
            strength = parse_expr(node)
            _check_expr_vars(strength, varset, name, kw)

    condition = None
    if ":condition" in seen:
        kw, body = seen[":condition"]
        if len(body) != 1 or not isinstance(body[0], Group):
            raise SchemaError(":condition takes one expression", kw.line, kw.col)
        condition = parse_expr(body[0])
        _check_expr_vars(condition, varset, name, kw)

    if form == "def-backwards-undercutter":
        if ":defeatee" not in seen:
            raise SchemaError("def-backwards-undercutter requires :defeatee", group.line, group.col)
        if ":conclusion" in seen:
            kw = seen[":conclusion"][0]
            raise SchemaError("an undercutter's conclusion is generated from its "
                              "defeatee", kw.line, kw.col)
        kw, body = seen[":defeatee"]
        if len(body) != 1 or not isinstance(body[0], Token):
            raise SchemaError(":defeatee takes a schema name", kw.line, kw.col)
        if not fps and not bps:
            raise SchemaError("undercutter needs at least one premise", group.line, group.col)
        return UndercutterSpec(
            name=name,
            defeatee=body[0].text,
            forwards_premises=fps,
            backwards_premises=bps,
            variables=varset,
            strength=strength,
            defeasible=defeasible,
            condition=condition,
        )

    if ":defeatee" in seen:
        kw = seen[":defeatee"][0]
        raise SchemaError(":defeatee is only valid in def-backwards-undercutter", kw.line, kw.col)
    if ":conclusion" not in seen:
        raise SchemaError(f"{form} requires :conclusion", group.line, group.col)
    kw, body = seen[":conclusion"]
    if len(body) != 1 or not isinstance(body[0], Token) or not body[0].is_string:
        raise SchemaError(":conclusion takes one quoted formula", kw.line, kw.col)
    conclusion = _parse_formula_string(body[0], varset)

    backwards = form == "def-backwards-reason"
    if not backwards:
        if condition is not None:
            kw = seen[":condition"][0]
            raise SchemaError("a forwards reason cannot have a top-level :condition "
                              "(attach it to a premise)", kw.line, kw.col)
        if not fps:
            raise SchemaError("a forwards reason needs at least one forwards premise",
                              group.line, group.col)
        concl_vars = formula_vars(conclusion) & varset
        premise_vars: set[str] = set()
        for p in fps + bps:
            premise_vars |= formula_vars(p.formula)
        missing = concl_vars - premise_vars
        if missing:
            raise SchemaError(
                f"conclusion variable(s) {sorted(missing)} never bound by a premise",
                group.line, group.col,
            )
    else:
        if not fps and not bps:
            raise SchemaError("a backwards reason needs at least one premise",
                              group.line, group.col)

    return Reason(
        name=name,
        forwards_premises=fps,
        backwards_premises=bps,
        conclusion=conclusion,
        variables=varset,
        strength=strength,
        defeasible=defeasible,
        backwards=backwards,
        condition=condition,
    )


def _describe(node: Node) -> str:
    if isinstance(node, Token):
        return repr(node.text)
    return "a group"


def _pos(node: Node) -> tuple[int, int]:
    return (node.line, node.col)


def _parse_formula_string(tok: Token, varset: frozenset[str]) -> Formula:
    from .formulas import fold_prefix_negations, item_to_formula

    items = fold_prefix_negations(read(tok.text, tok.line - 1))
    if len(items) != 1:
        raise SchemaError("expected one formula in string", tok.line, tok.col)
    return item_to_formula(items[0], varset)


def _parse_premises(body: list[Node], varset: frozenset[str], kw: Token) -> tuple[Premise, ...]:
    premises: list[Premise] = []
    for node in body:
        if isinstance(node, Token) and node.is_string:
            premises.append(Premise(_parse_formula_string(node, varset)))
        elif isinstance(node, Group) and node and isinstance(node[0], Token) \
                and node[0].text in (":kind", ":condition"):
            if not premises:
                raise SchemaError("annotation before any premise", node.line, node.col)
            last = premises[-1]
            if node[0].text == ":kind":
                if len(node) != 2 or not isinstance(node[1], Token):
                    raise SchemaError(":kind takes one of :inference :percept :desire",
                                      node.line, node.col)
                kind = node[1].text.lstrip(":")
                if kind not in KINDS:
                    raise SchemaError(f"unknown premise kind {node[1].text}", node.line, node.col)
                premises[-1] = Premise(last.formula, kind, last.condition)
            else:
                if len(node) != 2:
                    raise SchemaError(":condition takes one expression", node.line, node.col)
                cond = parse_expr(node[1])
                _check_expr_vars(cond, varset, "premise", node)
                premises[-1] = Premise(last.formula, last.kind, cond)
        else:
            raise SchemaError(
                "premises are quoted formula strings optionally followed by "
                "(:kind ...) or (:condition ...)", *_pos(node))
    return tuple(premises)


def _check_expr_vars(expr: Expr, varset: frozenset[str], where, anchor) -> None:
    loose = exprs.expr_symbols(expr) - varset
    if loose:
        line = anchor.line if hasattr(anchor, "line") else 1
        col = anchor.col if hasattr(anchor, "col") else 1
        raise SchemaError(
            f"condition/strength references undeclared variable(s) {sorted(loose)}",
            line, col,
        )


# ---------------------------------------------------------------------------
# Schema printing


def print_schema(schema: Union[Reason, UndercutterSpec]) -> str:
    lines: list[str] = []
    if isinstance(schema, UndercutterSpec):
        lines.append(f"(def-backwards-undercutter {schema.name}")
        lines.append(f"  :defeatee {schema.defeatee}")
        _emit_premises(lines, ":forwards-premises", schema.forwards_premises)
        _emit_premises(lines, ":backwards-premises", schema.backwards_premises)
        if schema.condition is not None:
            lines.append(f"  :condition {print_expr(schema.condition)}")
        lines.append(f"  :variables {' '.join(sorted(schema.variables))}")
        lines.append(f"  :defeasible? {'t' if schema.defeasible else 'nil'}")
        _emit_strength(lines, schema.strength)
    elif schema.backwards:
        lines.append(f"(def-backwards-reason {schema.name}")
        lines.append(f'  :conclusion "{print_formula(schema.conclusion)}"')
        if schema.condition is not None:
            lines.append(f"  :condition {print_expr(schema.condition)}")
        _emit_premises(lines, ":forwards-premises", schema.forwards_premises)
        _emit_premises(lines, ":backwards-premises", schema.backwards_premises)
        lines.append(f"  :variables {' '.join(sorted(schema.variables))}")
        lines.append(f"  :defeasible? {'t' if schema.defeasible else 'nil'}")
        _emit_strength(lines, schema.strength)
    else:
        lines.append(f"(def-forwards-reason {schema.name}")
        _emit_premises(lines, ":forwards-premises", schema.forwards_premises)
        _emit_premises(lines, ":backwards-premises", schema.backwards_premises)
        lines.append(f'  :conclusion "{print_formula(schema.conclusion)}"')
        lines.append(f"  :variables {' '.join(sorted(schema.variables))}")
        lines.append(f"  :defeasible? {'t' if schema.defeasible else 'nil'}")
        _emit_strength(lines, schema.strength)
    lines[-1] = lines[-1] + ")"
    return "\n".join(lines)


def _emit_premises(lines: list[str], key: str, premises: tuple[Premise, ...]) -> None:
    if not premises:
        return
    lines.append(f"  {key}")
    for p in premises:
        lines.append(f'    "{print_formula(p.formula)}"')
        if p.kind != "inference":
            lines.append(f"    (:kind :{p.kind})")
        if p.condition is not None and not callable(p.condition):
            lines.append(f"    (:condition {print_expr(p.condition)})")


def _emit_strength(lines: list[str], strength) -> None:
    if isinstance(strength, (int, float)) and strength == 1.0:
        return
    if isinstance(strength, (int, float)):
        lines.append(f"  :strength {strength!r}")
    else:
        lines.append(f"  :strength {print_expr(strength)}")


# ---------------------------------------------------------------------------
# Scenario parsing

_SECTIONS = (
    "config:",
    "projectible:",
    "schema:",
    "premise:",
    "percept:",
    "desire:",
    "query-plan:",
    "query:",
)


def parse_scenario(text: str) -> Scenario:
    sc = Scenario()
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        raw = lines[i]
        stripped = raw.strip()
        if not stripped or stripped.startswith(";"):
            i += 1
            continue
        section = next((s for s in _SECTIONS if stripped.startswith(s)), None)
        if section is None:
            raise ScenarioError(f"unrecognized line {stripped.split()[0]!r}", i + 1, 1)
        rest = stripped[len(section):].strip()
        if section == "schema:":
            buf = [rest]
            start = i
            while _paren_balance("\n".join(buf)) > 0:
                i += 1
                if i >= len(lines):
                    raise ScenarioError("unterminated schema block", start + 1, 1)
                buf.append(lines[i])
            schema = parse_schema("\n".join(buf), line_offset=start)
            if any(s.name == schema.name for s in sc.schemas):
                raise ScenarioError(f"duplicate schema name {schema.name!r}", start + 1, 1)
            sc.schemas.append(schema)
            i += 1
            continue
        _parse_section_line(sc, section, rest, i + 1)
        i += 1
    return sc


def _paren_balance(text: str) -> int:
    depth = 0
    in_string = False
    for ch in text:
        if ch == '"':
            in_string = not in_string
        elif not in_string:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == ";" and depth == 0:
                break
    return depth


def _line_nodes(rest: str, lineno: int) -> list:
    from .formulas import fold_prefix_negations

    return fold_prefix_negations(read(rest, lineno - 1))


def _node_formula(node, lineno: int) -> Formula:
    from .formulas import item_to_formula

    return item_to_formula(node, frozenset())


def _expect_number(node: Node, what: str, lineno: int) -> float:
    if isinstance(node, Token):
        num = parse_number(node.text)
        if num is not None:
            return num
    raise ScenarioError(f"expected a number for {what}", lineno, 1)


def _parse_section_line(sc: Scenario, section: str, rest: str, lineno: int) -> None:
    nodes = _line_nodes(rest, lineno)
    if section == "config:":
        if len(nodes) % 2 != 0 or not nodes:
            raise ScenarioError("config takes key value pairs", lineno, 1)
        for k, v in zip(nodes[::2], nodes[1::2]):
            if not isinstance(k, Token):
                raise ScenarioError("config key must be a word", lineno, 1)
            if k.text not in CONFIG_KEYS:
                raise ScenarioError(f"unknown config key {k.text!r}", k.line, k.col)
            sc.config[k.text] = _expect_number(v, k.text, lineno)
        return
    if section == "projectible:":
        if len(nodes) != 1:
            raise ScenarioError("projectible takes one formula", lineno, 1)
        sc.projectible.append(_node_formula(nodes[0], lineno))
        return
    if section == "premise:":
        if not nodes:
            raise ScenarioError("premise takes a formula", lineno, 1)
        f = _node_formula(nodes[0], lineno)
        strength = 1.0
        if len(nodes) == 3 and isinstance(nodes[1], Token) and nodes[1].text == "strength":
            strength = float(_expect_number(nodes[2], "strength", lineno))
        elif len(nodes) != 1:
            raise ScenarioError("premise takes a formula, optionally 'strength N'", lineno, 1)
        sc.premises.append((f, strength))
        return
    if section == "percept:":
        if (
            len(nodes) != 5
            or not isinstance(nodes[1], Token)
            or nodes[1].text != "clarity"
            or not isinstance(nodes[3], Token)
            or nodes[3].text != "at"
        ):
            raise ScenarioError("percept syntax: <formula> clarity <n> at <date>", lineno, 1)
        content = _node_formula(nodes[0], lineno)
        if isinstance(content, At):
            raise ScenarioError("percept content carries no temporal reference; "
                                "the date supplies it", lineno, 1)
        clarity = float(_expect_number(nodes[2], "clarity", lineno))
        date = _expect_number(nodes[4], "date", lineno)
        sc.percepts.append(Percept(content, clarity, date))
        return
    if section == "desire:":
        if not nodes:
            raise ScenarioError("desire takes a formula", lineno, 1)
        f = _node_formula(nodes[0], lineno)
        strength = 1.0
        if len(nodes) == 3 and isinstance(nodes[1], Token) and nodes[1].text == "strength":
            strength = float(_expect_number(nodes[2], "strength", lineno))
        elif len(nodes) != 1:
            raise ScenarioError("desire takes a formula, optionally 'strength N'", lineno, 1)
        sc.desires.append((f, strength))
        return
    if section == "query:":
        if not nodes:
            raise ScenarioError("query takes a formula", lineno, 1)
        f = _node_formula(nodes[0], lineno)
        threshold = None
        if len(nodes) == 3 and isinstance(nodes[1], Token) and nodes[1].text == "degree":
            threshold = float(_expect_number(nodes[2], "degree", lineno))
        elif len(nodes) != 1:
            raise ScenarioError("query takes a formula, optionally 'degree N'", lineno, 1)
        sc.queries.append((f, threshold))
        return
    if section == "query-plan:":
        if len(nodes) != 1:
            raise ScenarioError("query-plan takes one goal formula", lineno, 1)
        sc.plan_queries.append(_node_formula(nodes[0], lineno))
        return
    raise ScenarioError(f"unhandled section {section!r}", lineno, 1)


# ---------------------------------------------------------------------------
# Scenario printing


def print_scenario(sc: Scenario) -> str:
    out: list[str] = []
    for k, v in sc.config.items():
        out.append(f"config: {k} {_fmt_num(v)}")
    for f in sc.projectible:
        out.append(f"projectible: {print_formula(f)}")
    for schema in sc.schemas:
        text = print_schema(schema)
        first, *more = text.split("\n")
        out.append(f"schema: {first}")
        out.extend(more)
    for f, s in sc.premises:
        suffix = "" if s == 1.0 else f" strength {_fmt_num(s)}"
        out.append(f"premise: {print_formula(f)}{suffix}")
    for p in sc.percepts:
        out.append(
            f"percept: {print_formula(p.content)} clarity {_fmt_num(p.clarity)} "
            f"at {_fmt_num(p.date)}"
        )
    for f, s in sc.desires:
        suffix = "" if s == 1.0 else f" strength {_fmt_num(s)}"
        out.append(f"desire: {print_formula(f)}{suffix}")
    for f, d in sc.queries:
        suffix = "" if d is None else f" degree {_fmt_num(d)}"
        out.append(f"query: {print_formula(f)}{suffix}")
    for f in sc.plan_queries:
        out.append(f"query-plan: {print_formula(f)}")
    return "\n".join(out) + "\n"


def _fmt_num(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return repr(v)
    from .formulas import format_number

    return format_number(v)
