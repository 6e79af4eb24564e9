"""Parsing and evaluation of holomorphic functions of one complex variable.

Grammar (one declared variable, ASCII source):

    expression := term (('+' | '-') term)*
    term       := factor (('*' | '/') factor)*
    factor     := '-' factor | power
    power      := atom ('^' factor)?          # right-associative
    atom       := NUMBER | 'i' | IDENT '(' expression ')' | VARIABLE
                | '(' expression ')'

``exp``, ``log``, ``sin`` and ``cos`` are the built-in function names, ``i``
is the imaginary unit, and numeric literals may use decimal or scientific
notation.  ``^`` binds tighter than unary minus, which binds tighter than
``*``/``/``.  Any other identifier is a parse error.

``log`` and non-integer ``^`` use the principal branch (imaginary part in
(-pi, pi]).  Domain problems (division by zero, log of zero, overflow) are
reported at evaluation time, never at parse time.

Derivatives and Taylor coefficients come from :class:`Jet` arithmetic -
truncated power series pushed through the syntax tree - instead of symbolic
differentiation, so first derivatives and higher coefficients share one
mechanism.

Parsed expressions are immutable and every evaluation entry point is pure,
so values may be shared freely between threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

from .errors import CapacityError, EvalError, ParseError

FUNCTIONS = ("exp", "log", "sin", "cos")
RESERVED = FUNCTIONS + ("i",)

#: Largest admissible jet order (truncated-series degree).
MAX_JET_ORDER = 64

#: Largest constant integer exponent handled by repeated multiplication.
_MAX_INT_POW = 4096


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg', 'exp', 'log', 'sin', 'cos'
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # '+', '-', '*', '/', '^'
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Unary, Binary]


@dataclass(frozen=True)
class FuncExpr:
    """A parsed function of one complex variable."""

    root: Node
    variable: str | None

    def __str__(self) -> str:
        return to_source(self.root)


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

_OPS = "+-*/^()"


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append((c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            text = source[start:i]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"malformed number {text!r}", start) from None
            tokens.append(("num", text, start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(("ident", source[start:i], start))
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], variable: str | None):
        self.tokens = tokens
        self.pos = 0
        self.variable = variable

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def expression(self) -> Node:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek()[0] == "-":
            self.advance()
            return Unary("neg", self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            return Binary("^", base, self.factor())
        return base

    def atom(self) -> Node:
        kind, text, pos = self.advance()
        if kind == "num":
            return Const(complex(float(text)))
        if kind == "(":
            node = self.expression()
            self.expect(")")
            return node
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expression()
                self.expect(")")
                return Unary(text, arg)
            if text == "i":
                return Const(1j)
            if self.variable is not None and text == self.variable:
                return Var(text)
            declared = (
                f"declared variable is {self.variable!r}"
                if self.variable is not None
                else "no variable is declared"
            )
            raise ParseError(f"unknown identifier {text!r} ({declared})", pos)
        raise ParseError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)


def parse(source: str, variable: str | None) -> FuncExpr:
    """Parse ``source`` into a :class:`FuncExpr` over the given variable name."""
    if not source or not source.strip():
        raise ParseError("empty source", 0)
    if variable is not None:
        if variable in RESERVED:
            raise ValueError(f"variable name {variable!r} is reserved")
        if not (variable[0].isalpha() or variable[0] == "_") or not all(
            ch.isalnum() or ch == "_" for ch in variable
        ):
            raise ValueError(f"invalid variable name {variable!r}")
    parser = _Parser(_tokenize(source), variable)
    root = parser.expression()
    kind, text, pos = parser.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing token {text!r}", pos)
    return FuncExpr(root, variable)


def parse_constant(source: str) -> complex:
    """Parse and evaluate a constant expression (no variable allowed)."""
    return evaluate(parse(source, None), 0.0)


# --------------------------------------------------------------------------
# Printing (round-trips through parse)
# --------------------------------------------------------------------------

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_NEG, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _float_repr(x: float) -> str:
    return repr(x)


def _const_source(value: complex) -> tuple[str, int]:
    re, im = value.real, value.imag
    if im == 0.0:
        text = _float_repr(re)
        return text, (_LEVEL_NEG if re < 0 else _LEVEL_ATOM)
    if re == 0.0:
        if im == 1.0:
            return "i", _LEVEL_ATOM
        return f"{_float_repr(im)}*i", _LEVEL_MUL
    sign = "+" if im >= 0 else "-"
    return f"({_float_repr(re)}{sign}{_float_repr(abs(im))}*i)", _LEVEL_ATOM


def _source(node: Node) -> tuple[str, int]:
    if isinstance(node, Const):
        return _const_source(node.value)
    if isinstance(node, Var):
        return node.name, _LEVEL_ATOM
    if isinstance(node, Unary):
        if node.op == "neg":
            inner, level = _source(node.arg)
            if level < _LEVEL_NEG:
                inner = f"({inner})"
            return f"-{inner}", _LEVEL_NEG
        inner, _ = _source(node.arg)
        return f"{node.op}({inner})", _LEVEL_ATOM
    if isinstance(node, Binary):
        left, llevel = _source(node.left)
        right, rlevel = _source(node.right)
        if node.op in ("+", "-"):
            if llevel < _LEVEL_ADD:
                left = f"({left})"
            if rlevel <= _LEVEL_ADD:
                right = f"({right})"
            return f"{left}{node.op}{right}", _LEVEL_ADD
        if node.op in ("*", "/"):
            if llevel < _LEVEL_MUL:
                left = f"({left})"
            if rlevel <= _LEVEL_MUL:
                right = f"({right})"
            return f"{left}{node.op}{right}", _LEVEL_MUL
        # '^' is right-associative and binds tightest
        if llevel <= _LEVEL_POW:
            left = f"({left})"
        if rlevel < _LEVEL_NEG:
            right = f"({right})"
        return f"{left}^{right}", _LEVEL_POW
    raise TypeError(f"not an expression node: {node!r}")


def to_source(node: Node) -> str:
    return _source(node)[0]


# --------------------------------------------------------------------------
# Scalar evaluation
# --------------------------------------------------------------------------


def _compile(node: Node, variable: str | None):
    if isinstance(node, Const):
        value = node.value
        return lambda z: value
    if isinstance(node, Var):
        return lambda z: z
    if isinstance(node, Unary):
        arg = _compile(node.arg, variable)
        if node.op == "neg":
            return lambda z: -arg(z)
        if node.op == "exp":
            return lambda z: cmath.exp(arg(z))
        if node.op == "log":
            def _log(z):
                w = arg(z)
                if w == 0:
                    raise EvalError("log of zero", reason="log-of-zero")
                return cmath.log(w)
            return _log
        if node.op == "sin":
            return lambda z: cmath.sin(arg(z))
        if node.op == "cos":
            return lambda z: cmath.cos(arg(z))
    if isinstance(node, Binary):
        left = _compile(node.left, variable)
        right = _compile(node.right, variable)
        if node.op == "+":
            return lambda z: left(z) + right(z)
        if node.op == "-":
            return lambda z: left(z) - right(z)
        if node.op == "*":
            return lambda z: left(z) * right(z)
        if node.op == "/":
            return lambda z: left(z) / right(z)
        if node.op == "^":
            exponent = _integer_exponent(node.right)
            if exponent is not None:
                return lambda z: left(z) ** exponent
            return lambda z: left(z) ** right(z)
    raise TypeError(f"not an expression node: {node!r}")


def _integer_exponent(node: Node) -> int | None:
    sign = 1
    while isinstance(node, Unary) and node.op == "neg":
        sign = -sign
        node = node.arg
    if isinstance(node, Const):
        v = node.value
        if v.imag == 0.0 and v.real.is_integer() and abs(v.real) <= _MAX_INT_POW:
            return sign * int(v.real)
    return None


def _compiled(f: FuncExpr):
    fn = getattr(f, "_fn", None)
    if fn is None:
        fn = _compile(f.root, f.variable)
        object.__setattr__(f, "_fn", fn)
    return fn


def _is_finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def evaluate(f: FuncExpr, point: complex) -> complex:
    """Evaluate ``f`` at a finite complex point (principal branches)."""
    fn = _compiled(f)
    try:
        value = complex(fn(complex(point)))
    except ZeroDivisionError:
        raise EvalError("division by zero", reason="division-by-zero") from None
    except OverflowError:
        raise EvalError("overflow: non-finite result", reason="non-finite") from None
    except ValueError as exc:
        raise EvalError(f"domain error: {exc}", reason="domain") from None
    if not _is_finite(value):
        raise EvalError("non-finite result", reason="non-finite")
    return value


# --------------------------------------------------------------------------
# Jets: truncated Taylor series
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor expansion ``sum c_k (w - a)^k`` about some point.

    ``coeffs[k]`` is the k-th derivative over k!; all arithmetic truncates to
    the common order, so intermediate degrees never grow.
    """

    coeffs: tuple[complex, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, value: complex, order: int) -> "Jet":
        return cls((complex(value),) + (0j,) * order)

    @classmethod
    def variable(cls, value: complex, order: int) -> "Jet":
        if order == 0:
            return cls((complex(value),))
        return cls((complex(value), 1 + 0j) + (0j,) * (order - 1))

    def _check(self, other: "Jet"):
        if self.order != other.order:
            raise ValueError("jet orders differ")

    def __add__(self, other: "Jet") -> "Jet":
        self._check(other)
        return Jet(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Jet") -> "Jet":
        self._check(other)
        return Jet(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Jet":
        return Jet(tuple(-a for a in self.coeffs))

    def __mul__(self, other: "Jet") -> "Jet":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(len(a)):
            out.append(sum((a[i] * b[k - i] for i in range(k + 1)), 0j))
        return Jet(tuple(out))

    def __truediv__(self, other: "Jet") -> "Jet":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if b[0] == 0:
            raise EvalError(
                "division by zero (series with vanishing constant term)",
                reason="division-by-zero",
            )
        q: list[complex] = []
        for k in range(len(a)):
            acc = a[k]
            for i in range(k):
                acc -= q[i] * b[k - i]
            q.append(acc / b[0])
        return Jet(tuple(q))

    def scale(self, factor: complex) -> "Jet":
        return Jet(tuple(factor * c for c in self.coeffs))


def jet_exp(a: Jet) -> Jet:
    try:
        e0 = cmath.exp(a.coeffs[0])
    except OverflowError:
        raise EvalError("overflow in exp", reason="non-finite") from None
    out = [e0]
    for k in range(1, a.order + 1):
        acc = 0j
        for j in range(1, k + 1):
            acc += j * a.coeffs[j] * out[k - j]
        out.append(acc / k)
    return Jet(tuple(out))


def jet_log(a: Jet) -> Jet:
    if a.coeffs[0] == 0:
        raise EvalError("log of zero", reason="log-of-zero")
    out = [cmath.log(a.coeffs[0])]
    for k in range(1, a.order + 1):
        acc = a.coeffs[k] * k
        for j in range(1, k):
            acc -= j * out[j] * a.coeffs[k - j]
        out.append(acc / (k * a.coeffs[0]))
    return Jet(tuple(out))


def _jet_sin_cos(a: Jet) -> tuple[Jet, Jet]:
    s = [cmath.sin(a.coeffs[0])]
    c = [cmath.cos(a.coeffs[0])]
    for k in range(1, a.order + 1):
        sk = 0j
        ck = 0j
        for j in range(1, k + 1):
            sk += j * a.coeffs[j] * c[k - j]
            ck -= j * a.coeffs[j] * s[k - j]
        s.append(sk / k)
        c.append(ck / k)
    return Jet(tuple(s)), Jet(tuple(c))


def jet_sin(a: Jet) -> Jet:
    return _jet_sin_cos(a)[0]


def jet_cos(a: Jet) -> Jet:
    return _jet_sin_cos(a)[1]


def jet_pow(a: Jet, exponent: complex) -> Jet:
    if exponent.imag == 0.0 and exponent.real.is_integer():
        e = int(exponent.real)
        if abs(e) <= _MAX_INT_POW:
            if e == 0:
                return Jet.constant(1.0, a.order)
            result = Jet.constant(1.0, a.order)
            base = a
            m = abs(e)
            while m:
                if m & 1:
                    result = result * base
                base = base * base
                m >>= 1
            if e < 0:
                return Jet.constant(1.0, a.order) / result
            return result
    return jet_exp(jet_log(a).scale(exponent))


def eval_on_jet(f: FuncExpr, jet: Jet) -> Jet:
    """Push a jet through ``f``'s syntax tree (series composition)."""

    def rec(node: Node) -> Jet:
        if isinstance(node, Const):
            return Jet.constant(node.value, jet.order)
        if isinstance(node, Var):
            return jet
        if isinstance(node, Unary):
            arg = rec(node.arg)
            if node.op == "neg":
                return -arg
            if node.op == "exp":
                return jet_exp(arg)
            if node.op == "log":
                return jet_log(arg)
            if node.op == "sin":
                return jet_sin(arg)
            if node.op == "cos":
                return jet_cos(arg)
        if isinstance(node, Binary):
            left = rec(node.left)
            if node.op == "^":
                exponent = _integer_exponent(node.right)
                if exponent is not None:
                    return jet_pow(left, complex(exponent))
                right = rec(node.right)
                if all(c == 0 for c in right.coeffs[1:]):
                    return jet_pow(left, right.coeffs[0])
                return jet_exp(jet_log(left) * right)
            right = rec(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if node.op == "/":
                return left / right
        raise TypeError(f"not an expression node: {node!r}")

    out = rec(f.root)
    if not all(_is_finite(c) for c in out.coeffs):
        raise EvalError("non-finite series coefficients", reason="non-finite")
    return out


def eval_jet(f: FuncExpr, center: complex, order: int) -> Jet:
    """Taylor coefficients of ``f`` about ``center`` up to ``order``.

    ``coeffs[k]`` equals the k-th derivative at ``center`` divided by k!;
    ``coeffs[0]`` matches :func:`evaluate` at the same point.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if order > MAX_JET_ORDER:
        raise CapacityError(f"jet order {order} exceeds maximum {MAX_JET_ORDER}")
    return eval_on_jet(f, Jet.variable(center, order))
