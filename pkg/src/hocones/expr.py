"""Small expression language for scalar functions of n real variables.

Grammar (whitespace is ignored)::

    expr    := term   (('+' | '-') term)*
    term    := unary  (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' INTEGER)*
    atom    := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := 'sin' | 'cos' | 'exp'

Power binds tighter than unary minus, so ``-x1^2`` is ``-(x1^2)``.  Exponents
are non-negative integer literals only.

Evaluation is generic over the value type: floats, numpy arrays, mpmath
numbers and :class:`hocones.jets.Jet` all go through the same tree walk.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DomainError", "ParseError", "Expr", "parse", "evaluate", "to_text",
    "Const", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
]

FUNCTIONS = ("sin", "cos", "exp")


class DomainError(ArithmeticError):
    """Raised when evaluation leaves the domain (division by zero)."""


class ParseError(ValueError):

    UNEXPECTED_TOKEN = "unexpected token"
    UNEXPECTED_END = "unexpected end"
    UNKNOWN_IDENTIFIER = "unknown identifier"
    BAD_EXPONENT = "bad exponent"

    def __init__(self, kind: str, position: int, text: str = ""):
        self.kind = kind
        self.position = position
        self.token = text
        detail = f" {text!r}" if text else ""
        super().__init__(f"{kind}{detail} at position {position}")


# --- AST ------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Div:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


@dataclass(frozen=True)
class Expr:
    """Parsed expression: an AST root plus the number of variables."""

    root: object
    arity: int
    names: tuple = ()

    def __post_init__(self):
        for node in _walk(self.root):
            if isinstance(node, Var) and not 0 <= node.index < self.arity:
                raise ValueError(f"variable index {node.index} out of range for arity {self.arity}")
            if isinstance(node, Pow) and node.exponent < 0:
                raise ValueError("negative exponent")

    def __call__(self, point):
        return evaluate(self, point)

    def __str__(self):
        return to_text(self)


def _walk(node):
    yield node
    for child in _children(node):
        yield from _walk(child)


def _children(node):
    if isinstance(node, (Add, Sub, Mul, Div)):
        return (node.left, node.right)
    if isinstance(node, Neg):
        return (node.arg,)
    if isinstance(node, Pow):
        return (node.base,)
    if isinstance(node, Call):
        return (node.arg,)
    return ()


# --- Tokenizer / parser ------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(ParseError.UNEXPECTED_TOKEN, pos, text[pos])
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    return tokens


class _Parser:

    def __init__(self, text, variables):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = {name: k for k, name in enumerate(variables)}

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError(ParseError.UNEXPECTED_END, len(self.text))
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            raise ParseError(ParseError.UNEXPECTED_TOKEN, tok[2], tok[1])

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(ParseError.UNEXPECTED_TOKEN, tok[2], tok[1])
        return node

    def expr(self):
        node = self.term()
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] in "+-":
            self.i += 1
            rhs = self.term()
            node = Add(node, rhs) if tok[1] == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] in "*/":
            self.i += 1
            rhs = self.unary()
            node = Mul(node, rhs) if tok[1] == "*" else Div(node, rhs)
        return node

    def unary(self):
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] in "+-":
            self.i += 1
            arg = self.unary()
            return Neg(arg) if tok[1] == "-" else arg
        return self.power()

    def power(self):
        node = self.atom()
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] == "^":
            self.i += 1
            exp_tok = self.peek()
            if exp_tok is None:
                raise ParseError(ParseError.UNEXPECTED_END, len(self.text))
            if exp_tok[0] != "num" or not exp_tok[1].isdigit():
                raise ParseError(ParseError.BAD_EXPONENT, exp_tok[2], exp_tok[1])
            self.i += 1
            node = Pow(node, int(exp_tok[1]))
        return node

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            return Const(float(value))
        if kind == "name":
            if value in FUNCTIONS and value not in self.variables:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            if value not in self.variables:
                raise ParseError(ParseError.UNKNOWN_IDENTIFIER, pos, value)
            return Var(self.variables[value])
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(ParseError.UNEXPECTED_TOKEN, pos, value)


def default_names(n):
    return tuple(f"x{i + 1}" for i in range(n))


def parse(text: str, variables: Sequence[str] | int | None = None) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    ``variables`` is an ordered list of names; an integer ``n`` means the
    default names ``x1..xn``.
    """
    if variables is None:
        variables = sorted(set(re.findall(r"\bx(\d+)\b", text)), key=int)
        n = max((int(v) for v in variables), default=0)
        variables = default_names(n)
    elif isinstance(variables, int):
        variables = default_names(variables)
    variables = tuple(variables)
    if len(set(variables)) != len(variables):
        raise ValueError("variable names must be distinct")
    for name in variables:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise ValueError(f"invalid variable name {name!r}")
    root = _Parser(text, variables).parse()
    return Expr(root, len(variables), variables)


# --- Printing ---------------------------------------------------------------

def _fmt_const(v):
    text = repr(float(v))
    return f"({text})" if text.startswith("-") else text


def _node_text(node, names):
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, Var):
        return names[node.index]
    if isinstance(node, Neg):
        return f"(-{_node_text(node.arg, names)})"
    if isinstance(node, Pow):
        return f"({_node_text(node.base, names)}^{node.exponent})"
    if isinstance(node, Call):
        return f"{node.func}({_node_text(node.arg, names)})"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
    return f"({_node_text(node.left, names)} {op} {_node_text(node.right, names)})"


def to_text(e: Expr) -> str:
    """Fully parenthesised text that parses back to an equivalent tree."""
    names = e.names or default_names(e.arity)
    return _node_text(e.root, names)


# --- Evaluation ---------------------------------------------------------------

def _is_zero(v):
    if hasattr(v, "coeffs"):
        return False  # jets check their own constant term
    if isinstance(v, np.ndarray):
        return bool(np.any(v == 0))
    return v == 0


def _apply(func, v):
    if hasattr(v, "coeffs"):
        return getattr(v, func)()
    if isinstance(v, (float, int, np.floating, np.ndarray)):
        return getattr(np, func)(v)
    mod = type(v).__module__
    if mod.startswith("mpmath"):
        import mpmath
        return getattr(mpmath, func)(v)
    return getattr(math, func)(v)


def _eval(node, xs):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return xs[node.index]
    if isinstance(node, Add):
        return _eval(node.left, xs) + _eval(node.right, xs)
    if isinstance(node, Sub):
        return _eval(node.left, xs) - _eval(node.right, xs)
    if isinstance(node, Mul):
        return _eval(node.left, xs) * _eval(node.right, xs)
    if isinstance(node, Div):
        num = _eval(node.left, xs)
        den = _eval(node.right, xs)
        if _is_zero(den):
            raise DomainError("division by zero")
        return num / den
    if isinstance(node, Neg):
        return -_eval(node.arg, xs)
    if isinstance(node, Pow):
        base = _eval(node.base, xs)
        if hasattr(base, "coeffs"):
            return base ** node.exponent
        if node.exponent == 0:
            return base * 0 + 1.0
        out = base
        for _ in range(node.exponent - 1):
            out = out * base
        return out
    if isinstance(node, Call):
        return _apply(node.func, _eval(node.arg, xs))
    raise TypeError(f"unknown node {node!r}")


def evaluate(e: Expr, point):
    """Evaluate ``e`` at ``point`` (a sequence of ``arity`` values).

    Each coordinate may be a float, an ndarray (broadcast elementwise), an
    mpmath number or a jet.
    """
    if len(point) != e.arity:
        raise ValueError(f"expected {e.arity} coordinates, got {len(point)}")
    with np.errstate(divide="ignore", invalid="ignore"):
        return _eval(e.root, point)
