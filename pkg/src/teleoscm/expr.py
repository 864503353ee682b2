"""Expression language for structural equations and agent policies.

Grammar (lowest to highest precedence)::

    expr := or
    or   := and { "or" and }
    and  := not { "and" not }
    not  := [ "not" ] cmp
    cmp  := sum [ ("<"|"<="|">"|">="|"=="|"!=") sum ]
    sum  := term { ("+"|"-") term }
    term := factor { ("*"|"/") factor }
    factor := NUMBER | IDENT | "-" factor | "(" expr ")"
            | "if" "(" expr "," expr "," expr ")"

Everything is a real. Comparisons and logical operators yield 1.0 / 0.0 and
any nonzero value counts as true. ``if`` only evaluates the selected branch;
``and``/``or`` evaluate both operands.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Compare",
    "Logic",
    "Not",
    "If",
    "Expression",
    "ExprError",
    "ExprSyntaxError",
    "EvaluationError",
    "parse_expression",
    "evaluate",
    "free_variables",
    "to_source",
    "rename",
    "IDENT_RE",
]

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
KEYWORDS = frozenset({"and", "or", "not", "if"})


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class EvaluationError(ExprError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Compare:
    op: str  # one of < <= > >= == !=
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Logic:
    op: str  # "and" | "or"
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Not:
    operand: "Expression"


@dataclass(frozen=True)
class If:
    cond: "Expression"
    then: "Expression"
    orelse: "Expression"


Expression = Union[Num, Var, Neg, BinOp, Compare, Logic, Not, If]


# --------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|[-+*/<>(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number, ident, keyword, op, eof
    text: str
    offset: int


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}", _byte_offset(source, pos)
            )
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "keyword"
            tokens.append(_Token(kind, text, _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(_Token("eof", "", _byte_offset(source, len(source))))
    return tokens


# --------------------------------------------------------------------------
# Parser

_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
_FACTOR_START = frozenset({"NUMBER", "IDENT", "-", "(", "if"})


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "keyword") and tok.text == text

    def expect(self, text: str) -> _Token:
        if not self.at(text):
            self.fail({text})
        return self.advance()

    def fail(self, expected) -> None:
        tok = self.peek()
        what = "end of input" if tok.kind == "eof" else f"token {tok.text!r}"
        raise ExprSyntaxError(f"unexpected {what}", tok.offset, frozenset(expected))

    def parse(self) -> Expression:
        node = self.or_()
        if self.peek().kind != "eof":
            self.fail({"end of input", "+", "-", "*", "/", "and", "or", *_CMP_OPS})
        return node

    def or_(self) -> Expression:
        node = self.and_()
        while self.at("or"):
            self.advance()
            node = Logic("or", node, self.and_())
        return node

    def and_(self) -> Expression:
        node = self.not_()
        while self.at("and"):
            self.advance()
            node = Logic("and", node, self.not_())
        return node

    def not_(self) -> Expression:
        if self.at("not"):
            self.advance()
            return Not(self.cmp())
        return self.cmp()

    def cmp(self) -> Expression:
        node = self.sum()
        tok = self.peek()
        if tok.kind == "op" and tok.text in _CMP_OPS:
            self.advance()
            node = Compare(tok.text, node, self.sum())
        return node

    def sum(self) -> Expression:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expression:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"numeric literal {tok.text!r} overflows", tok.offset)
            return Num(value)
        if tok.kind == "ident":
            self.advance()
            if self.at("("):
                raise ExprSyntaxError(f"unknown function {tok.text!r}", tok.offset)
            return Var(tok.text)
        if self.at("-"):
            self.advance()
            return Neg(self.factor())
        if self.at("("):
            self.advance()
            node = self.or_()
            self.expect(")")
            return node
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.or_()
            self.expect(",")
            then = self.or_()
            self.expect(",")
            orelse = self.or_()
            self.expect(")")
            return If(cond, then, orelse)
        self.fail(_FACTOR_START)
        raise AssertionError("unreachable")


def parse_expression(source: str) -> Expression:
    """Parse ``source`` into an immutable AST.

    Raises :class:`ExprSyntaxError` carrying the byte offset of the offending
    token and the set of tokens that would have been accepted there.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0, _FACTOR_START)
    return _Parser(source).parse()


# --------------------------------------------------------------------------
# Evaluation

def _truth(x: float) -> bool:
    return x != 0.0


def _eval(node: Expression, env: Mapping[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return float(env[node.name])
        except KeyError:
            raise EvaluationError(f"variable {node.name!r} is not assigned") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise EvaluationError("division by zero")
        return a / b
    if isinstance(node, Compare):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        return 1.0 if _COMPARE[node.op](a, b) else 0.0
    if isinstance(node, Logic):
        a = _truth(_eval(node.left, env))
        b = _truth(_eval(node.right, env))
        return 1.0 if ((a and b) if node.op == "and" else (a or b)) else 0.0
    if isinstance(node, Not):
        return 0.0 if _truth(_eval(node.operand, env)) else 1.0
    if isinstance(node, If):
        if _truth(_eval(node.cond, env)):
            return _eval(node.then, env)
        return _eval(node.orelse, env)
    raise TypeError(f"not an expression node: {node!r}")


_COMPARE: dict[str, Callable[[float, float], bool]] = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def evaluate(expr: Expression, env: Mapping[str, float]) -> float:
    """Evaluate ``expr`` under ``env``; this is the reference scalar path."""
    value = _eval(expr, env)
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite result {value!r}")
    return value


def free_variables(expr: Expression) -> frozenset[str]:
    out: set[str] = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, (Neg, Not)):
            stack.append(node.operand)
        elif isinstance(node, (BinOp, Compare, Logic)):
            stack.extend((node.left, node.right))
        elif isinstance(node, If):
            stack.extend((node.cond, node.then, node.orelse))
    return frozenset(out)


def rename(expr: Expression, mapping: Mapping[str, str]) -> Expression:
    """Return ``expr`` with variable references renamed through ``mapping``."""
    if isinstance(expr, Var):
        return Var(mapping.get(expr.name, expr.name))
    if isinstance(expr, Num):
        return expr
    if isinstance(expr, Neg):
        return Neg(rename(expr.operand, mapping))
    if isinstance(expr, Not):
        return Not(rename(expr.operand, mapping))
    if isinstance(expr, (BinOp, Compare, Logic)):
        return type(expr)(expr.op, rename(expr.left, mapping), rename(expr.right, mapping))
    if isinstance(expr, If):
        return If(
            rename(expr.cond, mapping),
            rename(expr.then, mapping),
            rename(expr.orelse, mapping),
        )
    raise TypeError(f"not an expression node: {expr!r}")


# --------------------------------------------------------------------------
# Printing

# binding strength; higher binds tighter
_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "/": 6, "neg": 7, "atom": 8}


def _prec(node: Expression) -> int:
    if isinstance(node, Num) and math.copysign(1.0, node.value) < 0:
        return _PREC["neg"]
    if isinstance(node, (Num, Var, If)):
        return _PREC["atom"]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Compare):
        return _PREC["cmp"]
    if isinstance(node, Not):
        return _PREC["not"]
    return _PREC[node.op]


def _wrap(node: Expression, min_prec: int) -> str:
    text = to_source(node)
    return f"({text})" if _prec(node) < min_prec else text


def to_source(expr: Expression) -> str:
    """Pretty-print with the minimum parentheses needed to reparse the same tree."""
    if isinstance(expr, Num):
        # a negative literal prints as negation, which reparses as Neg(Num)
        return repr(float(expr.value))
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return "-" + _wrap(expr.operand, _PREC["neg"])
    if isinstance(expr, Not):
        # "not" only accepts a comparison-level operand
        return "not " + _wrap(expr.operand, _PREC["cmp"])
    if isinstance(expr, If):
        return f"if({to_source(expr.cond)}, {to_source(expr.then)}, {to_source(expr.orelse)})"
    if isinstance(expr, Compare):
        # non-associative: both sides must be sums
        return f"{_wrap(expr.left, _PREC['+'])} {expr.op} {_wrap(expr.right, _PREC['+'])}"
    p = _prec(expr)
    return f"{_wrap(expr.left, p)} {expr.op} {_wrap(expr.right, p + 1)}"
