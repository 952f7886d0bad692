"""Scalar arithmetic expressions in coordinates u1..un.

Expressions are immutable trees built from constants, coordinate variables,
negation and the binary operations ``+ - * /`` plus integer powers.  They are
the entry language for every coordinate-dependent quantity in the package
(matrix entries of operator fields, 1-form components, Hamiltonian
coefficients) and evaluate over any scalar type implementing the arithmetic
dunders: plain floats, first-order jets, numpy batches, truncated power
series.

Grammar (``^`` binds tightest; a single integer exponent per atom)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' '-'? integer)?
    atom   := number | 'u' integer | '(' expr ')'

Negative exponents are sugar for division: ``u1^-2`` parses to ``1/u1^2``.
Integer literals are kept exact; decimal literals become binary64 floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError

__all__ = [
    "Expression",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "parse_expr",
    "eval_expr",
    "const",
    "var",
]


def _coerce(x):
    if isinstance(x, Expression):
        return x
    if isinstance(x, (int, float)):
        return Const(x)
    return NotImplemented


@dataclass(frozen=True)
class Expression:
    """Base node; subclasses form the tree."""

    def __add__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("+", self, other)

    def __radd__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("+", other, self)

    def __sub__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("-", self, other)

    def __rsub__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("-", other, self)

    def __mul__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("*", self, other)

    def __rmul__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("*", other, self)

    def __truediv__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("/", self, other)

    def __rtruediv__(self, other):
        other = _coerce(other)
        return NotImplemented if other is NotImplemented else BinOp("/", other, self)

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            raise TypeError("expression exponents must be integers")
        if exponent < 0:
            return BinOp("/", Const(1), Pow(self, -exponent))
        return Pow(self, exponent)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return _print(self, 0)

    # --- queries -----------------------------------------------------------

    def max_variable(self) -> int:
        """Largest coordinate index appearing in the tree (0 if constant)."""
        return _max_var(self)

    def is_constant(self) -> bool:
        return _max_var(self) == 0

    def evaluate(self, point):
        return eval_expr(self, point)


@dataclass(frozen=True)
class Const(Expression):
    value: object  # int (exact) or float


@dataclass(frozen=True)
class Var(Expression):
    index: int  # 1-based


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True)
class BinOp(Expression):
    op: str  # one of + - * /
    lhs: Expression
    rhs: Expression


@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exponent: int  # >= 0; negatives are stored as divisions


def const(value) -> Const:
    return Const(value)


def var(index: int) -> Var:
    if index < 1:
        raise ValueError("variable index must be >= 1")
    return Var(index)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_OPS = set("+-*/^()")


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.idx = 0

    def _scan(self):
        text, i, n = self.text, 0, len(self.text)
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            if c in _OPS:
                self.tokens.append((c, c, i))
                i += 1
                continue
            if c == "u" and i + 1 < n and text[i + 1].isdigit():
                j = i + 1
                while j < n and text[j].isdigit():
                    j += 1
                self.tokens.append(("var", int(text[i + 1 : j]), i))
                i = j
                continue
            if c.isdigit():
                j = i
                while j < n and text[j].isdigit():
                    j += 1
                is_float = False
                if j < n and text[j] == ".":
                    is_float = True
                    j += 1
                    while j < n and text[j].isdigit():
                        j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        is_float = True
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
                lit = text[i:j]
                self.tokens.append(("num", float(lit) if is_float else int(lit), i))
                i = j
                continue
            raise ExprSyntaxError(f"unexpected character {c!r}", i)
        self.tokens.append(("end", None, n))

    def peek(self):
        return self.tokens[self.idx]

    def next(self):
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok


class _Parser:
    def __init__(self, text: str, dimension: int):
        self.toks = _Tokenizer(text)
        self.dimension = dimension

    def parse(self) -> Expression:
        e = self._expr()
        kind, _, pos = self.toks.peek()
        if kind != "end":
            raise ExprSyntaxError("trailing input after expression", pos)
        return e

    def _expr(self) -> Expression:
        e = self._term()
        while self.toks.peek()[0] in ("+", "-"):
            op, _, _ = self.toks.next()
            e = BinOp(op, e, self._term())
        return e

    def _term(self) -> Expression:
        e = self._factor()
        while self.toks.peek()[0] in ("*", "/"):
            op, _, _ = self.toks.next()
            e = BinOp(op, e, self._factor())
        return e

    def _factor(self) -> Expression:
        if self.toks.peek()[0] == "-":
            self.toks.next()
            return Neg(self._factor())
        e = self._atom()
        if self.toks.peek()[0] == "^":
            self.toks.next()
            sign = 1
            if self.toks.peek()[0] == "-":
                self.toks.next()
                sign = -1
            kind, value, pos = self.toks.next()
            if kind != "num" or not isinstance(value, int):
                raise ExprSyntaxError("exponent must be an integer literal", pos)
            k = sign * value
            if k < 0:
                return BinOp("/", Const(1), Pow(e, -k))
            return Pow(e, k)
        return e

    def _atom(self) -> Expression:
        kind, value, pos = self.toks.next()
        if kind == "num":
            return Const(value)
        if kind == "var":
            if value < 1 or value > self.dimension:
                raise ExprSyntaxError(
                    f"variable index out of range: u{value} with dimension "
                    f"{self.dimension}",
                    pos,
                )
            return Var(value)
        if kind == "(":
            e = self._expr()
            kind2, _, pos2 = self.toks.next()
            if kind2 != ")":
                raise ExprSyntaxError("expected ')'", pos2)
            return e
        raise ExprSyntaxError(f"expected number, variable or '('", pos)


def parse_expr(text: str, dimension: int) -> Expression:
    """Parse ``text`` into an Expression over coordinates u1..u<dimension>.

    Raises ExprSyntaxError with a byte offset on malformed input, variable
    indices outside [1, dimension], or non-positive dimension.
    """
    if dimension < 1:
        raise ExprSyntaxError("dimension must be a positive integer", 0)
    return _Parser(text, dimension).parse()


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _divisor_is_zero(x) -> bool:
    v = x
    # unwrap jets / series to the part that controls invertibility
    if hasattr(v, "value"):
        v = v.value
    elif hasattr(v, "constant_term"):
        v = v.constant_term()
    if isinstance(v, np.ndarray):
        return bool(np.any(v == 0))
    return v == 0


def eval_expr(e: Expression, point):
    """Evaluate ``e`` at ``point`` (a sequence of scalars of uniform type).

    Over jets the result carries exact first partials with respect to all
    coordinates.  Raises ExprEvalError on division by zero at the point.
    Shared subtrees (expression DAGs built by matrix algebra) are evaluated
    once per call.
    """
    n = len(point)
    return _eval(e, point, n, {})


def _eval(e, point, n, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = e.value
    elif isinstance(e, Var):
        if e.index > n:
            raise ExprEvalError(
                f"variable u{e.index} out of range for point of dimension {n}"
            )
        out = point[e.index - 1]
    elif isinstance(e, Neg):
        out = -_eval(e.arg, point, n, memo)
    elif isinstance(e, BinOp):
        a = _eval(e.lhs, point, n, memo)
        b = _eval(e.rhs, point, n, memo)
        if e.op == "+":
            out = a + b
        elif e.op == "-":
            out = a - b
        elif e.op == "*":
            out = a * b
        else:
            if _divisor_is_zero(b):
                raise ExprEvalError(f"division by zero evaluating {e.rhs}")
            out = a / b
    elif isinstance(e, Pow):
        base = _eval(e.base, point, n, memo)
        if e.exponent == 0:
            out = 1
        else:
            if e.exponent < 0 and _divisor_is_zero(base):
                raise ExprEvalError(
                    f"zero base raised to negative power in {e}")
            out = base ** e.exponent
    else:
        raise TypeError(f"not an expression node: {e!r}")
    memo[key] = out
    return out


def _max_var(e) -> int:
    if isinstance(e, Const):
        return 0
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Neg):
        return _max_var(e.arg)
    if isinstance(e, BinOp):
        return max(_max_var(e.lhs), _max_var(e.rhs))
    if isinstance(e, Pow):
        return _max_var(e.base)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_NEG, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _print(e, parent_level) -> str:
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, int):
            s = str(v)
        else:
            s = repr(float(v))
        if v < 0:
            return s if parent_level <= _LEVEL_ADD else f"({s})"
        return s
    if isinstance(e, Var):
        return f"u{e.index}"
    if isinstance(e, Neg):
        inner = _print(e.arg, _LEVEL_NEG)
        s = f"-{inner}"
        return s if parent_level < _LEVEL_NEG else f"({s})"
    if isinstance(e, BinOp):
        # the right operand is always bumped one level so the printed text
        # preserves the tree's association exactly (floating-point addition
        # and multiplication are not associative)
        level = _LEVEL_ADD if e.op in "+-" else _LEVEL_MUL
        lhs = _print(e.lhs, level)
        rhs = _print(e.rhs, level + 1)
        s = f"{lhs} {e.op} {rhs}" if e.op in "+-" else f"{lhs}{e.op}{rhs}"
        return s if level >= parent_level else f"({s})"
    if isinstance(e, Pow):
        base = _print(e.base, _LEVEL_ATOM)
        s = f"{base}^{e.exponent}"
        return s if parent_level <= _LEVEL_POW else f"({s})"
    raise TypeError(f"not an expression node: {e!r}")
