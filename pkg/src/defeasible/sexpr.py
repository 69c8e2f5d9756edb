"""Tokenizer and nested-list reader shared by the formula and schema parsers."""

from __future__ import annotations

from dataclasses import dataclass


class InputSyntaxError(ValueError):
    """Malformed input, with 1-based line/column of the offending spot."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int
    is_string: bool = False


class Group(list):
    """A parenthesized group of tokens and sub-groups."""

    def __init__(self, items=(), line: int = 0, col: int = 0):
        super().__init__(items)
        self.line = line
        self.col = col


Node = Token | Group

_SINGLE = {"(", ")", "~", "'"}


def tokenize(text: str, line_offset: int = 0) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1 + line_offset, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while i < n and text[i] != '"':
                if text[i] == "\n":
                    raise InputSyntaxError("unterminated string", start_line, start_col)
                buf.append(text[i])
                i += 1
                col += 1
            if i >= n:
                raise InputSyntaxError("unterminated string", start_line, start_col)
            i += 1
            col += 1
            tokens.append(Token("".join(buf), start_line, start_col, is_string=True))
        elif ch in _SINGLE:
            tokens.append(Token(ch, line, col))
            i += 1
            col += 1
        else:
            start_line, start_col = line, col
            j = i
            while j < n and text[j] not in " \t\r\n;\"" and text[j] not in _SINGLE:
                j += 1
            tokens.append(Token(text[i:j], start_line, start_col))
            col += j - i
            i = j
    return tokens


def read_nodes(tokens: list[Token]) -> list[Node]:
    """Group a token stream by parentheses; returns the top-level nodes."""
    stack: list[Group] = []
    top: list[Node] = []
    for tok in tokens:
        if tok.text == "(" and not tok.is_string:
            stack.append(Group(line=tok.line, col=tok.col))
        elif tok.text == ")" and not tok.is_string:
            if not stack:
                raise InputSyntaxError("unbalanced ')'", tok.line, tok.col)
            grp = stack.pop()
            (stack[-1] if stack else top).append(grp)
        else:
            (stack[-1] if stack else top).append(tok)
    if stack:
        raise InputSyntaxError("unbalanced '('", stack[-1].line, stack[-1].col)
    return top


def read(text: str, line_offset: int = 0) -> list[Node]:
    return read_nodes(tokenize(text, line_offset))


def node_pos(node: Node) -> tuple[int, int]:
    return (node.line, node.col)
