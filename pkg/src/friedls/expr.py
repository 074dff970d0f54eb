"""Scalar coefficient/data expressions of the variables x, y, t.

The grammar is deliberately closed: literals, the variables x, y, t, the
constants pi and e, unary minus, the binary operators + - * / ^ (with ^
right-associative and binding tighter than unary minus), parentheses, and
the functions sin, cos, exp, sqrt, abs.  Evaluation is numpy-aware: passing
arrays for x/y/t evaluates the whole tree vectorized.  Division by zero and
non-finite results raise instead of propagating NaN into assembled matrices.
"""

from dataclasses import dataclass

import numpy as np


class ExpressionError(Exception):
    """Syntax or name error while parsing; carries the byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvaluationError(Exception):
    """Division by zero or a non-finite intermediate/final value."""


VARIABLES = ("x", "y", "t")
CONSTANTS = {"pi": np.pi, "e": np.e}
FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp,
             "sqrt": np.sqrt, "abs": np.abs}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Num | Var | Const | Neg | Bin | Call


def _tokenize(src):
    tokens = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE" and (
                j + 1 < n and (src[j + 1].isdigit()
                               or (src[j + 1] in "+-" and j + 2 < n and src[j + 2].isdigit()))
            ):
                j += 2
                while j < n and src[j].isdigit():
                    j += 1
            try:
                value = float(src[i:j])
            except ValueError:
                raise ExpressionError(f"bad number literal {src[i:j]!r}", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("name", src[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append((c, c, i))
            i += 1
            continue
        raise ExpressionError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ExpressionError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    # Precedence: ^  >  unary-  >  * /  >  + -
    def parse_sum(self):
        node = self.parse_product()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = Bin(op, node, self.parse_product())
        return node

    def parse_product(self):
        node = self.parse_unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = Bin(op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.peek()[0] == "-":
            self.advance()
            return Neg(self.parse_unary())
        if self.peek()[0] == "+":
            self.advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek()[0] == "^":
            self.advance()
            # right associative; exponent may carry a unary sign
            return Bin("^", base, self.parse_unary())
        return base

    def parse_atom(self):
        tok = self.advance()
        kind, value, offset = tok
        if kind == "num":
            return Num(value)
        if kind == "(":
            node = self.parse_sum()
            self.expect(")")
            return node
        if kind == "name":
            if self.peek()[0] == "(":
                if value not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {value!r}", offset)
                self.advance()
                arg = self.parse_sum()
                self.expect(")")
                return Call(value, arg)
            if value in VARIABLES:
                return Var(value)
            if value in CONSTANTS:
                return Const(value)
            raise ExpressionError(f"unknown identifier {value!r}", offset)
        raise ExpressionError(f"unexpected token {value!r}", offset)


def parse(src):
    """Parse ``src`` into an expression tree."""
    parser = _Parser(src)
    node = parser.parse_sum()
    kind, value, offset = parser.peek()
    if kind != "end":
        raise ExpressionError(f"trailing input {value!r}", offset)
    return node


def evaluate(expr, x, y=0.0, t=0.0):
    """Evaluate at a point or componentwise on numpy arrays.

    Raises :class:`EvaluationError` on division by zero or any non-finite
    intermediate value (inf/nan never leave this function silently).
    """
    with np.errstate(all="ignore"):
        out = _eval(expr, x, y, t)
    return out


def _check(value):
    if not np.all(np.isfinite(value)):
        raise EvaluationError("non-finite value in expression evaluation")
    return value


def _eval(expr, x, y, t):
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return {"x": x, "y": y, "t": t}[expr.name]
    if isinstance(expr, Const):
        return CONSTANTS[expr.name]
    if isinstance(expr, Neg):
        return -_eval(expr.arg, x, y, t)
    if isinstance(expr, Call):
        return _check(FUNCTIONS[expr.fn](_eval(expr.arg, x, y, t)))
    left = _eval(expr.left, x, y, t)
    right = _eval(expr.right, x, y, t)
    if expr.op == "+":
        return _check(left + right)
    if expr.op == "-":
        return _check(left - right)
    if expr.op == "*":
        return _check(left * right)
    if expr.op == "/":
        if np.any(right == 0):
            raise EvaluationError("division by zero")
        return _check(np.divide(left, right))
    if expr.op == "^":
        return _check(np.power(left, right, dtype=float))
    raise AssertionError(f"unknown operator {expr.op}")


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(expr):
    if isinstance(expr, Bin):
        return _PREC[expr.op]
    if isinstance(expr, Neg):
        return _PREC["neg"]
    return _PREC["atom"]


def to_source(expr):
    """Render back to the grammar; parse(to_source(e)) is structurally e."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, (Var, Const)):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.fn}({to_source(expr.arg)})"
    if isinstance(expr, Neg):
        inner = to_source(expr.arg)
        if _prec(expr.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    left, right = to_source(expr.left), to_source(expr.right)
    if expr.op == "^":
        # grammar: base is an atom, exponent is a unary expression
        if _prec(expr.left) < _PREC["atom"]:
            left = f"({left})"
        if _prec(expr.right) < _PREC["neg"]:
            right = f"({right})"
    else:
        if _prec(expr.left) < _PREC[expr.op]:
            left = f"({left})"
        # - and / do not associate on the right
        if _prec(expr.right) < _PREC[expr.op] + (expr.op in ("-", "/")):
            right = f"({right})"
    return f"{left}{expr.op}{right}"
