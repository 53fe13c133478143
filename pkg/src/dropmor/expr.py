"""Scalar coefficient expressions in the frequency ``s`` and parameters ``p1..pd``.

Grammar (whitespace-insensitive)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ["^" exponent]
    exponent := int | "-" int | "(" ["-"] int ["/" int] ")"
    atom     := number ["i" | "j"] | "s" | "p" int
              | ("sqrt" | "exp" | "neg") "(" expr ")" | "(" expr ")"

Precedence is ``^`` > unary minus > ``* /`` > ``+ -``, so ``-s^2`` is
``-(s^2)`` and ``-1*s`` is ``(-1)*s``.  A number followed by ``i`` or ``j``
is an imaginary literal.  ``sqrt`` and rational powers use the principal
branch (argument in (-pi, pi]).
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class ExprEvalError(ArithmeticError):
    """Raised when an expression hits a pole or the branch point."""


# ---------------------------------------------------------------- AST nodes


@dataclass(frozen=True)
class Num:
    value: complex

    def __post_init__(self):
        # drop signed zeros so printing and parsing agree on branch cuts
        z = complex(self.value)
        object.__setattr__(self, "value", complex(z.real + 0.0, z.imag + 0.0))


@dataclass(frozen=True)
class Sym:
    name: str = "s"


@dataclass(frozen=True)
class Param:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Sqrt:
    arg: "Node"


@dataclass(frozen=True)
class Exp:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: Fraction


Node = Union[Num, Sym, Param, Neg, Sqrt, Exp, Add, Sub, Mul, Div, Pow]
_BINARY = {Add: "+", Sub: "-", Mul: "*", Div: "/"}
_UNARY_FUNCS = {"sqrt": Sqrt, "exp": Exp, "neg": Neg}


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    raw = text.encode("utf-8")
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            offset = len(text[:pos].encode("utf-8"))
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", offset)
        kind = m.lastgroup
        if kind != "ws":
            offset = len(text[:pos].encode("utf-8"))
            tokens.append((kind, m.group(), offset))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text: str, max_param: int | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.max_param = max_param

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, off = self.take()
        if val != value or kind == "end":
            raise ExprSyntaxError(f"expected {value!r}, got {val or 'end of input'!r}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.exponent())
        return base

    def _int(self) -> int:
        kind, val, off = self.take()
        if kind != "num" or not val.isdigit():
            raise ExprSyntaxError(f"expected integer exponent, got {val or 'end of input'!r}", off)
        return int(val)

    def exponent(self) -> Fraction:
        kind, val, off = self.peek()
        if (kind, val) == ("op", "("):
            self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            num = self._int()
            den = 1
            if self.peek()[:2] == ("op", "/"):
                self.take()
                den_off = self.peek()[2]
                den = self._int()
                if den == 0:
                    raise ExprSyntaxError("zero denominator in exponent", den_off)
            self.expect(")")
            return Fraction(sign * num, den)
        sign = 1
        if (kind, val) == ("op", "-"):
            self.take()
            sign = -1
        return Fraction(sign * self._int())

    def atom(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            if val[-1] in "ij":
                return Num(complex(0.0, float(val[:-1])))
            return Num(complex(float(val)))
        if kind == "name":
            if val == "s":
                return Sym("s")
            if val in _UNARY_FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _UNARY_FUNCS[val](arg)
            m = re.fullmatch(r"p([1-9]\d*)", val)
            if m:
                idx = int(m.group(1))
                if self.max_param is not None and idx > self.max_param:
                    raise ExprSyntaxError(
                        f"parameter {val} exceeds declared dimension d={self.max_param}", off)
                return Param(idx)
            raise ExprSyntaxError(f"unknown symbol {val!r}", off)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected token {val or 'end of input'!r}", off)


# ---------------------------------------------------------------- evaluation


def _pow(z: complex, e: Fraction) -> complex:
    num, den = e.numerator, e.denominator
    if z == 0:
        if den % 2 == 0:
            raise ExprEvalError("even root of the branch point 0")
        if num < 0:
            raise ExprEvalError("division by zero (negative power of 0)")
        return 0j
    if den == 1:
        root = z
    elif den == 2:
        root = cmath.sqrt(z)
    else:
        root = cmath.exp(cmath.log(z) / den)
    if num < 0:
        return 1.0 / _ipow(root, -num)
    return _ipow(root, num)


def _ipow(z: complex, k: int) -> complex:
    # square-and-multiply keeps z^k exactly conjugate-symmetric
    out = complex(1.0)
    while k:
        if k & 1:
            out *= z
        z *= z
        k >>= 1
    return out


def _eval(node: Node, s: complex, p: Sequence[float]) -> complex:
    t = type(node)
    if t is Num:
        return node.value
    if t is Sym:
        return s
    if t is Param:
        if node.index > len(p):
            raise IndexError(f"parameter p{node.index} requested but only {len(p)} given")
        return complex(p[node.index - 1])
    if t is Neg:
        return 0j - _eval(node.arg, s, p)  # keeps +0 imaginary parts
    if t is Sqrt:
        z = _eval(node.arg, s, p)
        if z == 0:
            raise ExprEvalError("even root of the branch point 0")
        return cmath.sqrt(z)
    if t is Exp:
        return cmath.exp(_eval(node.arg, s, p))
    if t is Pow:
        return _pow(_eval(node.base, s, p), node.exponent)
    a = _eval(node.left, s, p)
    b = _eval(node.right, s, p)
    if t is Add:
        return a + b
    if t is Sub:
        return a - b
    if t is Mul:
        return a * b
    if b == 0:
        raise ExprEvalError("division by zero")
    return a / b


# ---------------------------------------------------------------- printing


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _print(node: Node) -> str:
    t = type(node)
    if t is Num:
        z = node.value
        if z.imag == 0 and not math.copysign(1.0, z.imag) < 0:
            return "(" + _fmt_float(z.real) + ")" if z.real < 0 else _fmt_float(z.real)
        # (re + im i) with signs folded into unary minus
        re_part = _fmt_float(abs(z.real))
        im_part = _fmt_float(abs(z.imag)) + "i"
        re_s = f"-{re_part}" if z.real < 0 else re_part
        im_op = "-" if z.imag < 0 else "+"
        return f"({re_s}{im_op}{im_part})"
    if t is Sym:
        return "s"
    if t is Param:
        return f"p{node.index}"
    if t is Neg:
        return f"(-{_print(node.arg)})"
    if t is Sqrt:
        return f"sqrt({_print(node.arg)})"
    if t is Exp:
        return f"exp({_print(node.arg)})"
    if t is Pow:
        e = node.exponent
        if e.denominator == 1 and e >= 0:
            ex = str(e.numerator)
        else:
            ex = f"({e.numerator}/{e.denominator})"
        return f"({_print(node.base)})^{ex}"
    return f"({_print(node.left)}{_BINARY[t]}{_print(node.right)})"


def _max_param(node: Node) -> int:
    t = type(node)
    if t is Param:
        return node.index
    if t in (Num, Sym):
        return 0
    if t in (Neg, Sqrt, Exp):
        return _max_param(node.arg)
    if t is Pow:
        return _max_param(node.base)
    return max(_max_param(node.left), _max_param(node.right))


def _has(node: Node, kind) -> bool:
    if isinstance(node, kind):
        return True
    t = type(node)
    if t in (Num, Sym, Param):
        return False
    if t in (Neg, Sqrt, Exp):
        return _has(node.arg, kind)
    if t is Pow:
        return _has(node.base, kind)
    return _has(node.left, kind) or _has(node.right, kind)


# ---------------------------------------------------------------- public API


@dataclass(frozen=True)
class CoeffExpr:
    """An immutable parsed coefficient; call it as ``e(s, p)``."""

    ast: Node
    source: str | None = field(default=None, compare=False, repr=False)

    def __call__(self, s: complex, p: Sequence[float] = ()) -> complex:
        return eval_coeff(self, s, p)

    def __str__(self) -> str:
        return print_coeff(self)

    @property
    def max_param(self) -> int:
        return _max_param(self.ast)

    @property
    def has_branch_cut(self) -> bool:
        """True when evaluation involves a principal-branch root."""
        if _has(self.ast, Sqrt):
            return True
        return _has_fractional_pow(self.ast)

    @property
    def is_real(self) -> bool:
        """True when all literals are real (conjugate-symmetric without branch cuts)."""
        return _all_real(self.ast)


def _has_fractional_pow(node: Node) -> bool:
    t = type(node)
    if t is Pow:
        return node.exponent.denominator != 1 or _has_fractional_pow(node.base)
    if t in (Num, Sym, Param):
        return False
    if t in (Neg, Sqrt, Exp):
        return _has_fractional_pow(node.arg)
    return _has_fractional_pow(node.left) or _has_fractional_pow(node.right)


def _all_real(node: Node) -> bool:
    t = type(node)
    if t is Num:
        return node.value.imag == 0
    if t in (Sym, Param):
        return True
    if t in (Neg, Sqrt, Exp):
        return _all_real(node.arg)
    if t is Pow:
        return _all_real(node.base)
    return _all_real(node.left) and _all_real(node.right)


def parse_coeff(text: str | bytes, d: int | None = None) -> CoeffExpr:
    """Parse a coefficient expression.

    ``d`` is the declared parameter dimension; references to ``p{k}`` with
    ``k > d`` are rejected.  ``None`` disables the check.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return CoeffExpr(_Parser(text, d).parse(), text)


def eval_coeff(e: CoeffExpr, s: complex, p: Sequence[float] = ()) -> complex:
    return _eval(e.ast, complex(s), p)


def print_coeff(e: CoeffExpr) -> str:
    """Fully parenthesised text that parses back to an equivalent expression."""
    return _print(e.ast)


def coeff_text(e: CoeffExpr) -> str:
    """Original source when known, else the printed form."""
    return e.source if e.source is not None else print_coeff(e)


ONE = CoeffExpr(Num(1 + 0j), "1")
