"""Analytic field expressions over the coordinates x0..x3.

Text is parsed by a small recursive-descent parser into an immutable AST.
Evaluation comes in two flavours: plain float evaluation, and second-order
forward-mode "jets" carrying value, gradient and Hessian, propagated by the
chain and product rules node by node.

Grammar (``^`` binds tighter than unary minus and is right associative)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ExpressionSyntaxError, UnknownSymbol

COORDINATES = ("x0", "x1", "x2", "x3")
DEFAULT_CONSTANTS = {"pi": math.pi}

_ZERO_GRAD = np.zeros(4)
_ZERO_HESS = np.zeros((4, 4))
_ZERO_GRAD.setflags(write=False)
_ZERO_HESS.setflags(write=False)


@dataclass(frozen=True)
class Jet2:
    """Value, gradient d_mu and Hessian d_mu d_nu of a scalar at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray


# ---------------------------------------------------------------------------
# AST


class Expression:
    """Base class of AST nodes.  Nodes are immutable and compare structurally."""

    # True when the subtree mentions a coordinate
    depends: bool = False

    def evaluate(self, p) -> float:
        raise NotImplementedError

    def jet(self, p) -> Tuple[float, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Num(Expression):
    value: float
    depends: bool = field(default=False, init=False, repr=False, compare=False)

    def evaluate(self, p):
        return self.value

    def jet(self, p):
        return self.value, _ZERO_GRAD, _ZERO_HESS


@dataclass(frozen=True, eq=True)
class Const(Expression):
    name: str
    value: float
    depends: bool = field(default=False, init=False, repr=False, compare=False)

    def evaluate(self, p):
        return self.value

    def jet(self, p):
        return self.value, _ZERO_GRAD, _ZERO_HESS


_UNIT = np.eye(4)
_UNIT.setflags(write=False)


@dataclass(frozen=True, eq=True)
class Var(Expression):
    index: int
    depends: bool = field(default=True, init=False, repr=False, compare=False)

    def evaluate(self, p):
        return float(p[self.index])

    def jet(self, p):
        return float(p[self.index]), _UNIT[self.index], _ZERO_HESS


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    operand: Expression
    depends: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depends", self.operand.depends)

    def evaluate(self, p):
        return -self.operand.evaluate(p)

    def jet(self, p):
        v, g, h = self.operand.jet(p)
        return -v, -g, -h


@dataclass(frozen=True, eq=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression
    depends: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depends", self.left.depends or self.right.depends)

    def evaluate(self, p):
        a = self.left.evaluate(p)
        b = self.right.evaluate(p)
        op = self.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise DomainError("division by zero", p)
            return a / b
        return _pow_value(a, b, self.right.depends, p)

    def jet(self, p):
        op = self.op
        if op == "^":
            return _pow_jet(self, p)
        a = self.left.jet(p)
        b = self.right.jet(p)
        if op == "+":
            return a[0] + b[0], a[1] + b[1], a[2] + b[2]
        if op == "-":
            return a[0] - b[0], a[1] - b[1], a[2] - b[2]
        if op == "*":
            return _mul(a, b)
        if b[0] == 0.0:
            raise DomainError("division by zero", p)
        return _mul(a, _compose(b, 1.0 / b[0], -1.0 / b[0] ** 2, 2.0 / b[0] ** 3))


@dataclass(frozen=True, eq=True)
class Call(Expression):
    func: str
    arg: Expression
    depends: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depends", self.arg.depends)

    def evaluate(self, p):
        u = self.arg.evaluate(p)
        _check_domain(self.func, u, p, for_jet=False)
        try:
            return _FUNCS[self.func][0](u)
        except (OverflowError, ValueError) as exc:
            raise DomainError(f"{self.func}({u!r}): {exc}", p) from None

    def jet(self, p):
        a = self.arg.jet(p)
        u = a[0]
        _check_domain(self.func, u, p, for_jet=True)
        try:
            f0, f1, f2 = _DERIVS[self.func](u)
        except (OverflowError, ValueError) as exc:
            raise DomainError(f"{self.func}({u!r}): {exc}", p) from None
        return _compose(a, f0, f1, f2)


def _mul(a, b):
    va, ga, ha = a
    vb, gb, hb = b
    outer = np.outer(ga, gb)
    return va * vb, va * gb + vb * ga, va * hb + vb * ha + outer + outer.T


def _compose(a, f0, f1, f2):
    """Jet of f(u) given the jet of u and f, f', f'' at u."""
    _, g, h = a
    return f0, f1 * g, f2 * np.outer(g, g) + f1 * h


def _tan_derivs(u):
    t = math.tan(u)
    s = 1.0 + t * t
    return t, s, 2.0 * t * s


def _tanh_derivs(u):
    t = math.tanh(u)
    s = 1.0 - t * t
    return t, s, -2.0 * t * s


def _sqrt_derivs(u):
    s = math.sqrt(u)
    return s, 0.5 / s, -0.25 / (s * u)


_FUNCS = {
    "sin": (math.sin,),
    "cos": (math.cos,),
    "tan": (math.tan,),
    "exp": (math.exp,),
    "log": (math.log,),
    "sqrt": (math.sqrt,),
    "sinh": (math.sinh,),
    "cosh": (math.cosh,),
    "tanh": (math.tanh,),
}

_DERIVS = {
    "sin": lambda u: (math.sin(u), math.cos(u), -math.sin(u)),
    "cos": lambda u: (math.cos(u), -math.sin(u), -math.cos(u)),
    "tan": _tan_derivs,
    "exp": lambda u: (math.exp(u),) * 3,
    "log": lambda u: (math.log(u), 1.0 / u, -1.0 / (u * u)),
    "sqrt": _sqrt_derivs,
    "sinh": lambda u: (math.sinh(u), math.cosh(u), math.sinh(u)),
    "cosh": lambda u: (math.cosh(u), math.sinh(u), math.cosh(u)),
    "tanh": _tanh_derivs,
}

FUNCTIONS = tuple(_FUNCS)


def _check_domain(func, u, p, for_jet):
    if func == "log" and u <= 0.0:
        raise DomainError(f"log of non-positive argument {u!r}", p)
    if func == "sqrt" and (u < 0.0 or (for_jet and u == 0.0)):
        raise DomainError(f"sqrt argument {u!r} outside its differentiable domain", p)
    if func == "tan" and abs(math.cos(u)) < 1e-15:
        raise DomainError(f"tan pole at {u!r}", p)


def _pow_value(a, b, exponent_varies, p):
    if not exponent_varies and float(b).is_integer():
        n = int(b)
        if a == 0.0 and n < 0:
            raise DomainError("zero raised to a negative power", p)
        try:
            return a**n
        except OverflowError:
            raise DomainError("overflow in power", p) from None
    if a < 0.0 or (a == 0.0 and b <= 0.0):
        raise DomainError(f"power with base {a!r} and exponent {b!r}", p)
    try:
        return a**b
    except OverflowError:
        raise DomainError("overflow in power", p) from None


def _pow_jet(node, p):
    base = node.left.jet(p)
    u = base[0]
    if not node.right.depends:
        c = node.right.evaluate(p)
        if c.is_integer():
            n = int(c)
            if n == 0:
                return 1.0, _ZERO_GRAD, _ZERO_HESS
            if u == 0.0 and n < 0:
                raise DomainError("zero raised to a negative power", p)
            f0 = u**n
            f1 = n * u ** (n - 1) if n != 1 else 1.0
            f2 = n * (n - 1) * u ** (n - 2) if n not in (1, 2) else float(n * (n - 1))
            return _compose(base, f0, f1, f2)
        if u <= 0.0:
            raise DomainError(f"non-integer power {c!r} of non-positive base {u!r}", p)
        return _compose(base, u**c, c * u ** (c - 1), c * (c - 1) * u ** (c - 2))
    if u <= 0.0:
        raise DomainError(f"variable exponent with non-positive base {u!r}", p)
    # u^v = exp(v log u)
    log_u = _compose(base, math.log(u), 1.0 / u, -1.0 / (u * u))
    expo = _mul(node.right.jet(p), log_u)
    try:
        e = math.exp(expo[0])
    except OverflowError:
        raise DomainError("overflow in power", p) from None
    return _compose(expo, e, e, e)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


class _Parser:
    def __init__(self, text: str, constants: Mapping[str, float]):
        self.text = text
        self.constants = constants
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _byte_offset(self, i):
        return len(self.text[:i].encode("utf-8"))

    def _tokenize(self, text):
        tokens = []
        i = 0
        n = len(text)
        while True:
            while i < n and text[i].isspace():
                i += 1
            if i >= n:
                break
            m = _TOKEN.match(text, i)
            if m is None or m.end() == i:
                raise ExpressionSyntaxError(
                    f"unexpected character {text[i]!r}", self._byte_offset(i), text
                )
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), self._byte_offset(start)))
            i = m.end()
        tokens.append(("end", "", self._byte_offset(n)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] != "op":
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExpressionSyntaxError(f"expected {value!r}, found {what}", tok[2], self.text)
        return self.advance()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExpressionSyntaxError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, offset = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if text not in _FUNCS:
                    raise UnknownSymbol(text, offset)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in _FUNCS:
                raise ExpressionSyntaxError(f"expected '(' after {text}", nxt[2], self.text)
            if text in COORDINATES:
                return Var(COORDINATES.index(text))
            if text in self.constants:
                return Const(text, float(self.constants[text]))
            raise UnknownSymbol(text, offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {what}", offset, self.text)


def parse_expression(text: str, constants: Optional[Mapping[str, float]] = None) -> Expression:
    """Parse ``text`` into an :class:`Expression`.

    Names that are neither coordinates ``x0..x3``, functions, nor keys of
    ``constants`` (plus the built-in ``pi``) raise :class:`UnknownSymbol`.
    """
    bound: Dict[str, float] = dict(DEFAULT_CONSTANTS)
    if constants:
        bound.update(constants)
    return _Parser(text, bound).parse()


def to_text(e: Expression) -> str:
    """Fully parenthesised text that parses back to the same AST."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return COORDINATES[e.index]
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def constants_of(e: Expression) -> Dict[str, float]:
    """Named constants referenced by ``e`` (needed to re-parse its text)."""
    out: Dict[str, float] = {}
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Const):
            out[node.name] = node.value
        elif isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, BinOp):
            stack.extend((node.left, node.right))
        elif isinstance(node, Call):
            stack.append(node.arg)
    return out


# ---------------------------------------------------------------------------
# evaluation entry points


def _point(p) -> Tuple[float, float, float, float]:
    q = tuple(float(c) for c in p)
    if len(q) != 4 or not all(math.isfinite(c) for c in q):
        raise ValueError(f"expected 4 finite coordinates, got {p!r}")
    return q


def evaluate(e: Expression, p) -> float:
    """Evaluate ``e`` at the point ``p`` (IEEE double arithmetic)."""
    q = _point(p)
    try:
        v = e.evaluate(q)
    except OverflowError:
        raise DomainError("floating point overflow", q) from None
    if not math.isfinite(v):
        raise DomainError("non-finite result", q)
    return float(v)


def eval_jet2(e: Expression, p, symmetrize: bool = True) -> Jet2:
    """Value, gradient and Hessian of ``e`` at ``p``, exact up to rounding."""
    q = _point(p)
    try:
        v, g, h = e.jet(q)
    except OverflowError:
        raise DomainError("floating point overflow", q) from None
    g = np.array(g, dtype=float)
    h = np.array(h, dtype=float)
    if not (math.isfinite(v) and np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
        raise DomainError("non-finite jet", q)
    if symmetrize:
        h = 0.5 * (h + h.T)
    return Jet2(float(v), g, h)


def fd_gradient(e: Expression, p, step: float) -> np.ndarray:
    """Central-difference gradient, the independent check on :func:`eval_jet2`."""
    if not step > 0.0:
        raise ValueError("step must be positive")
    q = np.array(_point(p))
    grad = np.empty(4)
    for mu in range(4):
        dp = np.zeros(4)
        dp[mu] = step
        grad[mu] = (evaluate(e, q + dp) - evaluate(e, q - dp)) / (2.0 * step)
    return grad


# ---------------------------------------------------------------------------
# complex-valued fields


@dataclass(frozen=True)
class ComplexExpression:
    re: Expression
    im: Expression

    def evaluate(self, p) -> complex:
        return complex(evaluate(self.re, p), evaluate(self.im, p))

    def jet(self, p):
        """(value, gradient, Hessian) as complex numpy values."""
        a = eval_jet2(self.re, p)
        b = eval_jet2(self.im, p)
        return (
            complex(a.value, b.value),
            a.grad + 1j * b.grad,
            a.hess + 1j * b.hess,
        )


def parse_complex(pair: Sequence[str], constants=None) -> ComplexExpression:
    re_text, im_text = pair
    return ComplexExpression(parse_expression(re_text, constants), parse_expression(im_text, constants))


ZERO = Num(0.0)
ONE = Num(1.0)
