"""A small arithmetic-expression language for integrands and weights.

Grammar (whitespace-insensitive, LL(1)):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? atom ('^' factor)?
    atom   := number | var | func '(' expr (',' expr)? ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so "-x^2"
means -(x^2); write "(-x)^2" for the square.  There is no implicit
multiplication.  Known functions: sin, cos, exp, abs, pow(a, b).
Identifiers must be declared up front; anything else is rejected with the
offending token named.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .exceptions import FuncballError

FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "abs": 1, "pow": 2}


class ExprError(FuncballError, ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r} (at offset {offset})")
        self.name = name
        self.offset = offset


class ExprEvalError(ExprError):
    pass


# ---------------------------------------------------------------- AST nodes


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    child: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expr = Num | Var | Neg | BinOp | Call


# ----------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source):
    pos = 0
    tokens = []
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", bad)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens, declared_vars):
        self.tokens = tokens
        self.i = 0
        self.vars = set(declared_vars)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {text!r}", off)
        return self.take()

    def at_op(self, *ops):
        kind, text, _ = self.peek()
        return kind == "op" and text in ops

    def parse_expr(self):
        node = self.parse_term()
        while self.at_op("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.at_op("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self):
        negated = False
        if self.at_op("-"):
            self.take()
            negated = True
        node = self.parse_atom()
        if self.at_op("^"):
            self.take()
            node = BinOp("^", node, self.parse_factor())
        return Neg(node) if negated else node

    def parse_atom(self):
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                arity = FUNCTIONS[text]
                self.expect_op("(")
                args = [self.parse_expr()]
                while self.at_op(","):
                    self.take()
                    args.append(self.parse_expr())
                self.expect_op(")")
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{text} takes {arity} argument(s), got {len(args)}", off
                    )
                return Call(text, tuple(args))
            if text in self.vars:
                return Var(text)
            raise UnknownIdentifierError(text, off)
        if kind == "op" and text == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {text!r}", off)


def parse(source: str, declared_vars) -> Expr:
    parser = _Parser(_tokenize(source), declared_vars)
    node = parser.parse_expr()
    kind, text, off = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"trailing input {text!r}", off)
    return node


# -------------------------------------------------------------- evaluation

_SCALAR_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "abs": abs}


def _scalar_pow(base, exponent):
    if base < 0 and exponent != int(exponent):
        raise ExprEvalError(f"fractional power of negative base {base}")
    try:
        return math.pow(base, exponent)
    except (OverflowError, ValueError) as exc:
        raise ExprEvalError(str(exc)) from exc


def evaluate(e: Expr, bindings) -> float:
    """Scalar evaluation with strict error semantics."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise ExprEvalError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.child, bindings)
    if isinstance(e, BinOp):
        left = evaluate(e.left, bindings)
        right = evaluate(e.right, bindings)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            if right == 0.0:
                raise ExprEvalError("division by zero")
            return left / right
        return _scalar_pow(left, right)
    if e.func == "pow":
        return _scalar_pow(evaluate(e.args[0], bindings), evaluate(e.args[1], bindings))
    return _SCALAR_FUNCS[e.func](evaluate(e.args[0], bindings))


_ARRAY_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}


def compile_array(e: Expr, var_order) -> "callable":
    """Compile to a vectorized callable f(*arrays) evaluated with NumPy ufuncs.

    Used on the Monte Carlo hot path, so no per-scalar tree walking: the tree
    is walked once per array batch.  Fractional powers of negative values
    yield NaN here rather than raising; the scalar evaluator is the strict
    reference semantics.
    """
    order = {name: i for i, name in enumerate(var_order)}

    def build(node):
        if isinstance(node, Num):
            v = node.value
            return lambda args: v
        if isinstance(node, Var):
            idx = order[node.name]
            return lambda args: args[idx]
        if isinstance(node, Neg):
            child = build(node.child)
            return lambda args: -child(args)
        if isinstance(node, BinOp):
            left, right = build(node.left), build(node.right)
            op = node.op
            if op == "+":
                return lambda args: left(args) + right(args)
            if op == "-":
                return lambda args: left(args) - right(args)
            if op == "*":
                return lambda args: left(args) * right(args)
            if op == "/":
                return lambda args: left(args) / right(args)
            return lambda args: left(args) ** right(args)
        if node.func == "pow":
            base, expo = build(node.args[0]), build(node.args[1])
            return lambda args: base(args) ** expo(args)
        fn = _ARRAY_FUNCS[node.func]
        arg = build(node.args[0])
        return lambda args: fn(arg(args))

    body = build(e)

    def compiled(*arrays):
        return body(arrays)

    return compiled


# ---------------------------------------------------------- pretty printing

_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_NEG_PREC = 25
_ATOM_PREC = 100


def _prec(e: Expr) -> int:
    if isinstance(e, (Num, Var, Call)):
        return _ATOM_PREC
    if isinstance(e, Neg):
        return _NEG_PREC
    return _PREC[e.op]


def pretty(e: Expr) -> str:
    """Render a tree so that parse(pretty(e)) is structurally identical."""

    def wrap(child, minimum):
        text = pretty(child)
        return f"({text})" if _prec(child) < minimum else text

    if isinstance(e, Num):
        return repr(e.value) if e.value != int(e.value) else str(int(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + wrap(e.child, _NEG_PREC + 1)
    if isinstance(e, Call):
        return f"{e.func}({', '.join(pretty(a) for a in e.args)})"
    prec = _PREC[e.op]
    if e.op == "^":
        # grammar: base must be an atom, exponent any factor
        left = pretty(e.left) if _prec(e.left) == _ATOM_PREC else f"({pretty(e.left)})"
        right = pretty(e.right) if _prec(e.right) >= _NEG_PREC else f"({pretty(e.right)})"
        return f"{left}^{right}"
    left = wrap(e.left, prec)
    right = wrap(e.right, prec + 1)  # left-associative: a-(b-c) keeps parens
    return f"{left}{e.op}{right}"


# -------------------------------------------------------- growth certificate


class _Unbounded:
    def __repr__(self):
        return "UNBOUNDED"


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class GrowthBound:
    """Certificate |e(x)| <= C * (1 + max_i |x_i|)^k."""

    C: float
    k: float


def growth_certificate(e: Expr):
    """Conservative syntactic polynomial bound, or UNBOUNDED.

    False UNBOUNDED verdicts are acceptable (the caller then certifies by
    hand); a bound that is claimed must be sound.
    """
    if isinstance(e, Num):
        return GrowthBound(abs(e.value), 0.0)
    if isinstance(e, Var):
        return GrowthBound(1.0, 1.0)
    if isinstance(e, Neg):
        return growth_certificate(e.child)
    if isinstance(e, BinOp):
        left = growth_certificate(e.left)
        right = growth_certificate(e.right)
        if e.op in "+-":
            if left is UNBOUNDED or right is UNBOUNDED:
                return UNBOUNDED
            return GrowthBound(left.C + right.C, max(left.k, right.k))
        if e.op == "*":
            if left is UNBOUNDED or right is UNBOUNDED:
                return UNBOUNDED
            return GrowthBound(left.C * right.C, left.k + right.k)
        if e.op == "/":
            if left is UNBOUNDED or not isinstance(e.right, Num) or e.right.value == 0:
                return UNBOUNDED
            return GrowthBound(left.C / abs(e.right.value), left.k)
        return _pow_certificate(e.left, e.right)
    if e.func in ("sin", "cos"):
        return GrowthBound(1.0, 0.0)
    if e.func == "abs":
        return growth_certificate(e.args[0])
    if e.func == "pow":
        return _pow_certificate(e.args[0], e.args[1])
    # exp of anything non-constant escapes every polynomial
    inner = growth_certificate(e.args[0])
    if inner is not UNBOUNDED and inner.k == 0.0:
        return GrowthBound(math.exp(inner.C), 0.0)
    return UNBOUNDED


def _pow_certificate(base, exponent):
    if not isinstance(exponent, Num) or exponent.value < 0:
        return UNBOUNDED
    cert = growth_certificate(base)
    if cert is UNBOUNDED:
        return UNBOUNDED
    v = exponent.value
    return GrowthBound(max(cert.C, 1.0) ** v, cert.k * v)
