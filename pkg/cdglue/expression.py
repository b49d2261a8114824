"""
Scalar fields over chart coordinates.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := number | coordinate | 'pi' | function '(' expr ')' | '(' expr ')'

Coordinates are ``x1`` .. ``x<arity>``; functions are sin, cos, tan, exp,
log, sqrt, sinh and cosh.  The printer fully parenthesises and writes
numbers with ``repr`` so that printing and re-parsing reproduces the tree.
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from cdglue.errors import (
    CoordinateIndexError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)

logger = logging.getLogger(__name__)

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")
CONSTANTS = {"pi": math.pi}


# --- tree -------------------------------------------------------------------

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Coordinate:
    index: int  # 1-based, x1 .. xn


@dataclass(frozen=True)
class Negate:
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    argument: "Node"


Node = Union[Number, Coordinate, Negate, Binary, Call]


def number(value: float) -> Node:
    """Literal node; negative values become a negated literal."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"Non-finite constant {value!r} has no literal form")
    if value < 0:
        return Negate(Number(-value))
    return Number(value)


def is_constant(node: Node) -> bool:
    """True when the subtree references no coordinate."""
    if isinstance(node, Number):
        return True
    if isinstance(node, Coordinate):
        return False
    if isinstance(node, Negate):
        return is_constant(node.operand)
    if isinstance(node, Call):
        return is_constant(node.argument)
    return is_constant(node.left) and is_constant(node.right)


def max_coordinate(node: Node) -> int:
    if isinstance(node, Coordinate):
        return node.index
    if isinstance(node, Number):
        return 0
    if isinstance(node, Negate):
        return max_coordinate(node.operand)
    if isinstance(node, Call):
        return max_coordinate(node.argument)
    return max(max_coordinate(node.left), max_coordinate(node.right))


# --- tokenizer / parser -----------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number', 'ident', 'op', 'end'
    text: str
    offset: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.lastgroup is None:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"Unexpected character {text[offset]!r}", text, offset)
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, text: str, arity: int):
        self.text = text
        self.arity = arity
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, op: str) -> None:
        token = self.peek()
        if token.kind != "op" or token.text != op:
            self.fail(f"Expected '{op}'", token)
        self.advance()

    def fail(self, message: str, token: _Token):
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ExpressionSyntaxError(f"{message}, found {found}", self.text, token.offset)

    def parse(self) -> Node:
        node = self.expr()
        if self.peek().kind != "end":
            self.fail("Unexpected token", self.peek())
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        token = self.peek()
        if token.kind == "op" and token.text == "-":
            self.advance()
            return Negate(self.factor())
        node = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            node = Binary("^", node, self.factor())
        return node

    def base(self) -> Node:
        token = self.advance()
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                self.fail("Number literal overflows", token)
            return Number(value)
        if token.kind == "op" and token.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if token.kind == "ident":
            return self.identifier(token)
        self.fail("Unexpected token", token)

    def identifier(self, token: _Token) -> Node:
        name = token.text
        coordinate = re.fullmatch(r"x(\d+)", name)
        if coordinate:
            index = int(coordinate.group(1))
            if index < 1 or index > self.arity:
                raise CoordinateIndexError(index, self.arity)
            return Coordinate(index)
        if name in CONSTANTS:
            return Number(CONSTANTS[name])
        if name in FUNCTIONS:
            self.expect("(")
            argument = self.expr()
            self.expect(")")
            return Call(name, argument)
        raise UnknownIdentifierError(name, token.offset)


def to_text(node: Node) -> str:
    """Fully parenthesised rendering that parses back to the same tree."""
    if isinstance(node, Number):
        if not math.isfinite(node.value):
            raise ValueError(f"Non-finite constant {node.value!r} has no text form")
        return repr(node.value)
    if isinstance(node, Coordinate):
        return f"x{node.index}"
    if isinstance(node, Negate):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.argument)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


# --- value evaluation -------------------------------------------------------

def _domain_error(name: str, mask: np.ndarray, points: np.ndarray):
    index = int(np.flatnonzero(mask)[0])
    raise EvaluationDomainError(name, points[index])


def evaluate_values(node: Node, points: np.ndarray) -> np.ndarray:
    """Vectorised evaluation at ``points`` of shape (batch, arity)."""
    if isinstance(node, Number):
        return np.full(points.shape[0], node.value)
    if isinstance(node, Coordinate):
        return points[:, node.index - 1].astype(float)
    if isinstance(node, Negate):
        return -evaluate_values(node.operand, points)
    if isinstance(node, Call):
        u = evaluate_values(node.argument, points)
        if node.name == "log" and np.any(u <= 0):
            _domain_error("log", u <= 0, points)
        if node.name == "sqrt" and np.any(u < 0):
            _domain_error("sqrt", u < 0, points)
        return getattr(np, node.name)(u)
    a = evaluate_values(node.left, points)
    b = evaluate_values(node.right, points)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(b == 0):
            _domain_error("/", b == 0, points)
        return a / b
    # power
    if is_constant(node.right):
        p = float(b[0])
        if not p.is_integer() and np.any(a < 0):
            _domain_error("^", a < 0, points)
        if p < 0 and np.any(a == 0):
            _domain_error("^", a == 0, points)
        return np.power(a, p)
    if np.any(a <= 0):
        _domain_error("^", a <= 0, points)
    return np.exp(b * np.log(a))


# --- fields -----------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """A parsed expression over coordinates x1..x<arity>."""
    expression: Node
    arity: int

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"Field arity must be at least 1, got {self.arity}")
        highest = max_coordinate(self.expression)
        if highest > self.arity:
            raise CoordinateIndexError(highest, self.arity)

    def __str__(self) -> str:
        return to_text(self.expression)

    @property
    def is_constant(self) -> bool:
        return is_constant(self.expression)

    def values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        with np.errstate(all="ignore"):
            return evaluate_values(self.expression, points)

    def value(self, point: Sequence[float]) -> float:
        return float(self.values([point])[0])

    def jet(self, point: Sequence[float], order: int = 2):
        from cdglue.jet import jet_eval
        return jet_eval(self, point, order)

    def jets(self, points, order: int = 2):
        from cdglue.jet import evaluate_jets
        return evaluate_jets(self, points, order)


def parse_field(text: str, arity: int) -> ScalarField:
    """Parse ``text`` into a field over x1..x<arity>."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("Empty expression", text or "", 0)
    return ScalarField(_Parser(text, arity).parse(), arity)


def constant_field(value: float, arity: int) -> ScalarField:
    return ScalarField(number(value), arity)


def substitute(node: Node, replacements: Dict[int, Node]) -> Node:
    """Replace coordinates by subtrees (``{index: node}``)."""
    if isinstance(node, Coordinate):
        return replacements.get(node.index, node)
    if isinstance(node, Number):
        return node
    if isinstance(node, Negate):
        return Negate(substitute(node.operand, replacements))
    if isinstance(node, Call):
        return Call(node.name, substitute(node.argument, replacements))
    return Binary(node.op, substitute(node.left, replacements), substitute(node.right, replacements))


def affine_pullback(field: ScalarField, alpha: float, beta: float, index: int = 1) -> ScalarField:
    """The field composed with x<index> -> alpha * x<index> + beta."""
    image = Binary("+", Binary("*", number(alpha), Coordinate(index)), number(beta))
    return ScalarField(substitute(field.expression, {index: image}), field.arity)


def power_field(field: ScalarField, exponent: float, arity: Optional[int] = None) -> ScalarField:
    """``field ^ exponent`` as a new field (optionally over more coordinates)."""
    return ScalarField(Binary("^", field.expression, number(exponent)), arity or field.arity)


def product_field(left: ScalarField, right: ScalarField, arity: Optional[int] = None) -> ScalarField:
    return ScalarField(Binary("*", left.expression, right.expression), arity or max(left.arity, right.arity))
