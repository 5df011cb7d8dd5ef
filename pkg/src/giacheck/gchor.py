"""Global choreography terms: syntax tree, parser and pretty-printer.

Concrete syntax::

    G ::= 0 | A->B:m | G ; G | G | G | G + G | ( G )

``;`` binds tighter than ``|`` which binds tighter than ``+``; all three
operators are left-associative.  ``//`` starts a comment running to the end
of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Empty",
    "Interaction",
    "Seq",
    "Par",
    "Branch",
    "GChor",
    "ParseError",
    "SelfInteractionError",
    "parse_gchor",
    "render_gchor",
    "participants",
    "subterms",
    "subterms_with_paths",
    "depth",
]


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Interaction:
    sender: str
    message: str
    receiver: str

    def __post_init__(self):
        if self.sender == self.receiver:
            raise SelfInteractionError(
                f"interaction {self.sender}->{self.receiver}:{self.message} "
                "has identical sender and receiver"
            )


@dataclass(frozen=True)
class Seq:
    left: "GChor"
    right: "GChor"


@dataclass(frozen=True)
class Par:
    left: "GChor"
    right: "GChor"


@dataclass(frozen=True)
class Branch:
    left: "GChor"
    right: "GChor"


GChor = Union[Empty, Interaction, Seq, Par, Branch]

_BINARY = (Seq, Par, Branch)


class ParseError(ValueError):
    """Raised on malformed choreography text; carries a 1-based position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class SelfInteractionError(ValueError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z0-9_]+)
  | (?P<op>[;|+():])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind if kind != "op" else m.group(), m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


# operator -> (binding power, constructor); higher binds tighter
_OPERATORS = {"+": (1, Branch), "|": (2, Par), ";": (3, Seq)}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ParseError(f"expected {kind!r}, found {shown!r}", tok.line, tok.column)
        return self.advance()

    def parse(self) -> GChor:
        g = self.expression(0)
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.column)
        return g

    def expression(self, min_power: int) -> GChor:
        left = self.atom()
        while True:
            tok = self.peek()
            entry = _OPERATORS.get(tok.kind)
            if entry is None or entry[0] < min_power:
                return left
            power, ctor = entry
            self.advance()
            right = self.expression(power + 1)
            left = ctor(left, right)

    def atom(self) -> GChor:
        tok = self.peek()
        if tok.kind == "(":
            self.advance()
            g = self.expression(0)
            self.expect(")")
            return g
        if tok.kind == "ident":
            self.advance()
            if tok.text == "0" and self.peek().kind != "arrow":
                return Empty()
            self.expect("arrow")
            receiver = self.expect("ident")
            self.expect(":")
            message = self.expect("ident")
            if tok.text == receiver.text:
                raise ParseError(
                    f"self-interaction {tok.text}->{receiver.text}:{message.text}: "
                    "sender and receiver must differ",
                    tok.line,
                    tok.column,
                )
            return Interaction(tok.text, message.text, receiver.text)
        shown = tok.text or "end of input"
        raise ParseError(f"expected a choreography, found {shown!r}", tok.line, tok.column)


def parse_gchor(text: str) -> GChor:
    """Parse the textual form of a g-choreography."""
    return _Parser(text).parse()


def _power(g: GChor) -> int:
    for op, (power, ctor) in _OPERATORS.items():
        if isinstance(g, ctor):
            return power
    return 4


def render_gchor(g: GChor) -> str:
    """Render ``g`` so that :func:`parse_gchor` gives back the same tree."""
    if isinstance(g, Empty):
        return "0"
    if isinstance(g, Interaction):
        return f"{g.sender}->{g.receiver}:{g.message}"
    power = _power(g)
    op = next(k for k, (_, ctor) in _OPERATORS.items() if isinstance(g, ctor))
    left = render_gchor(g.left)
    if _power(g.left) < power:
        left = f"({left})"
    right = render_gchor(g.right)
    # left-associative: an equal-power right operand needs parentheses
    if _power(g.right) <= power:
        right = f"({right})"
    return f"{left} {op} {right}"


def participants(g: GChor) -> frozenset[str]:
    if isinstance(g, Empty):
        return frozenset()
    if isinstance(g, Interaction):
        return frozenset((g.sender, g.receiver))
    return participants(g.left) | participants(g.right)


def subterms(g: GChor) -> list[GChor]:
    """Pre-order list of all subterms of ``g``, ``g`` first."""
    return [t for _, t in subterms_with_paths(g)]


def subterms_with_paths(g: GChor, path: str = "") -> Iterator[tuple[str, GChor]]:
    """Pre-order walk yielding ``(path, subterm)``.

    Paths are strings over ``L``/``R`` from the root; the root has path ``""``.
    """
    yield path, g
    if isinstance(g, _BINARY):
        yield from subterms_with_paths(g.left, path + "L")
        yield from subterms_with_paths(g.right, path + "R")


def depth(g: GChor) -> int:
    if isinstance(g, _BINARY):
        return 1 + max(depth(g.left), depth(g.right))
    return 0
