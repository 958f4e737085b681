"""Closed-form self-maps: grammar, AST, point and interval evaluation.

Grammar (version 1)::

    expr    := term { ("+" | "-") term }
    term    := unary { ("*" | "/") unary }
    unary   := "-" unary | power
    power   := primary [ "^" INTEGER ]
    primary := NUMBER | "pi" | VARIABLE
             | FUNCTION "(" expr ")"
             | "(" expr ")"
             | "[" expr "]" "(" expr { "," expr } ")"

``VARIABLE`` is ``x`` in one dimension (``x1`` is accepted as an alias) and
``x1`` .. ``xn`` in n dimensions.  ``FUNCTION`` is one of sin, cos, abs,
sqrt, asin, acos.  ``^`` binds tighter than unary minus, so ``-x^2`` is
``-(x^2)``.  The bracket form is composition: ``[x^2](x - 1)`` is
``(x - 1)^2``; the bracketed expression is read in as many variables as
there are arguments.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from . import interval as iv
from .interval import Interval
from .verdict import DomainError

GRAMMAR_VERSION = 1

UNARY_FUNCS = ("sin", "cos", "abs", "sqrt", "asin", "acos")
BINARY_OPS = ("+", "-", "*", "/")
_TRANSCENDENTAL = {"sin", "cos", "asin", "acos"}


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError("constants are finite and nonnegative; negate with Neg")


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Compose:
    """``outer`` evaluated at the point whose coordinates are ``args``."""

    outer: "Expr"
    args: tuple


Expr = Union[Const, Var, Neg, Func, BinOp, Pow, Compose]


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, kind: str = "syntax"):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.kind = kind


def const(value: float) -> Expr:
    """Build a constant node, negating through ``Neg`` when needed."""
    value = float(value)
    return Neg(Const(-value)) if value < 0 else Const(value)


def compose(outer: Expr, *inner: Expr) -> Compose:
    return Compose(outer, tuple(inner))


def max_var(node: Expr) -> int:
    """Largest variable index referenced at this level (-1 if none)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Const):
        return -1
    if isinstance(node, (Neg, Func)):
        return max_var(node.arg)
    if isinstance(node, BinOp):
        return max(max_var(node.left), max_var(node.right))
    if isinstance(node, Pow):
        return max_var(node.base)
    return max(max_var(a) for a in node.args)


def is_polynomial(node: Expr) -> bool:
    if isinstance(node, (Const, Var)):
        return True
    if isinstance(node, Neg):
        return is_polynomial(node.arg)
    if isinstance(node, Func):
        return node.name == "abs" and is_polynomial(node.arg)
    if isinstance(node, BinOp):
        return node.op != "/" and is_polynomial(node.left) and is_polynomial(node.right)
    if isinstance(node, Pow):
        return is_polynomial(node.base)
    return is_polynomial(node.outer) and all(is_polynomial(a) for a in node.args)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\],]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.dims = [dim]

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self, value: str | None = None):
        kind, val, pos = self.tok
        if value is not None and val != value:
            found = val or "end of input"
            raise ParseError(f"expected {value!r}, found {found!r}", pos)
        self.i += 1
        return kind, val, pos

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            _, op, pos = self.take()
            right = self.unary()
            if op == "/" and right == Const(0.0):
                raise ParseError("division by the constant zero", pos, kind="domain")
            node = BinOp(op, node, right)
        return node

    def unary(self) -> Expr:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            kind, val, pos = self.tok
            if kind != "num":
                raise ParseError("exponent must be a nonnegative integer literal", pos, kind="exponent")
            if not val.isdigit():
                raise ParseError(f"non-integer exponent {val!r}", pos, kind="exponent")
            self.take()
            if self.tok[0] == "op" and self.tok[1] == "^":
                raise ParseError("chained exponents must be parenthesized", self.tok[2])
            return Pow(base, int(val))
        return base

    def primary(self) -> Expr:
        kind, val, pos = self.tok
        if kind == "num":
            self.take()
            return Const(float(val))
        if kind == "id":
            self.take()
            if val in UNARY_FUNCS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return Func(val, arg)
            if val == "pi":
                return Const(math.pi)
            return Var(self._var_index(val, pos))
        if val == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if val == "[":
            self.take()
            mark = self.i
            # the inner dimension is the argument count, known only after the brackets
            depth = 1
            j = self.i
            while depth:
                k, v, p = self.tokens[j]
                if k == "end":
                    raise ParseError("unterminated composition bracket", pos)
                depth += {"[": 1, "]": -1}.get(v, 0)
                j += 1
            self.i = j
            self.take("(")
            args = [self.expr()]
            while self.tok[1] == ",":
                self.take()
                args.append(self.expr())
            self.take(")")
            end = self.i
            self.i = mark
            self.dims.append(len(args))
            outer = self.expr()
            self.dims.pop()
            self.take("]")
            self.i = end
            return Compose(outer, tuple(args))
        found = val or "end of input"
        raise ParseError(f"unexpected {found!r}", pos)

    def _var_index(self, name: str, pos: int) -> int:
        dim = self.dims[-1]
        if name == "x":
            if dim != 1:
                raise ParseError("use x1..xn in more than one dimension", pos, kind="identifier")
            return 0
        m = re.fullmatch(r"x([1-9]\d*)", name)
        if m:
            k = int(m.group(1))
            if k > dim:
                raise ParseError(f"variable {name} exceeds dimension {dim}", pos, kind="identifier")
            return k - 1
        raise ParseError(f"unknown identifier {name!r}", pos, kind="identifier")


def parse(text: str, dim: int = 1) -> Expr:
    if dim < 1:
        raise ValueError("dimension must be positive")
    return _Parser(text, dim).parse()


def parse_map(spec: str | Sequence[str], dim: int) -> tuple:
    """Parse a self-map given as one string (dim 1) or one string per coordinate."""
    if isinstance(spec, str):
        spec = [spec]
    if len(spec) != dim:
        raise ValueError(f"map has {len(spec)} components, space has dimension {dim}")
    return tuple(parse(s, dim) for s in spec)


# ---------------------------------------------------------------- printing

def _fmt_number(v: float) -> str:
    if v == math.pi:
        return "pi"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return 1 if node.op in "+-" else 2
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def pretty(node: Expr, dim: int = 1) -> str:
    def wrap(child, ok):
        s = pretty(child, dim_here)
        return s if ok(_prec(child)) else f"({s})"

    dim_here = dim
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return "x" if dim == 1 else f"x{node.index + 1}"
    if isinstance(node, Neg):
        return "-" + wrap(node.arg, lambda p: p >= 3)
    if isinstance(node, Func):
        return f"{node.name}({pretty(node.arg, dim)})"
    if isinstance(node, BinOp):
        level = _prec(node)
        left = wrap(node.left, lambda p: p >= level)
        right = wrap(node.right, lambda p: p > level)
        return f"{left} {node.op} {right}"
    if isinstance(node, Pow):
        return wrap(node.base, lambda p: p == 5) + f"^{node.exponent}"
    args = ", ".join(pretty(a, dim) for a in node.args)
    return f"[{pretty(node.outer, len(node.args))}]({args})"


# ---------------------------------------------------------------- point evaluation

def _ipow(a, n: int):
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return 1.0 + 0.0 * a if result is None else result


def _div(a, b):
    if isinstance(b, np.ndarray) or isinstance(a, np.ndarray):
        with np.errstate(all="ignore"):
            return np.divide(a, b)
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _func(name: str) -> Callable:
    scalar = {"sin": math.sin, "cos": math.cos, "abs": abs, "sqrt": math.sqrt, "asin": math.asin, "acos": math.acos}[name]
    vector = {"sin": np.sin, "cos": np.cos, "abs": np.abs, "sqrt": np.sqrt, "asin": np.arcsin, "acos": np.arccos}[name]

    def apply(a):
        if isinstance(a, np.ndarray):
            with np.errstate(all="ignore"):
                return vector(a)
        try:
            return scalar(a)
        except (ValueError, OverflowError) as exc:
            raise DomainError(f"{name}({a!r}): {exc}") from None

    return apply


@lru_cache(maxsize=4096)
def compile_expr(node: Expr) -> Callable:
    """Turn an AST into a closure over a coordinate tuple.

    Coordinates may be Python floats or equally shaped numpy arrays; array
    evaluation never raises and marks failures with inf/nan instead.
    """
    if isinstance(node, Const):
        v = node.value
        return lambda c: v
    if isinstance(node, Var):
        i = node.index
        return lambda c: c[i]
    if isinstance(node, Neg):
        f = compile_expr(node.arg)
        return lambda c: -f(c)
    if isinstance(node, Func):
        f = compile_expr(node.arg)
        g = _func(node.name)
        return lambda c: g(f(c))
    if isinstance(node, BinOp):
        a, b = compile_expr(node.left), compile_expr(node.right)
        if node.op == "+":
            return lambda c: a(c) + b(c)
        if node.op == "-":
            return lambda c: a(c) - b(c)
        if node.op == "*":
            return lambda c: a(c) * b(c)
        return lambda c: _div(a(c), b(c))
    if isinstance(node, Pow):
        f, n = compile_expr(node.base), node.exponent
        return lambda c: _ipow(f(c), n)
    outer = compile_expr(node.outer)
    inner = tuple(compile_expr(a) for a in node.args)
    return lambda c: outer(tuple(g(c) for g in inner))


def _coords(x) -> tuple:
    if isinstance(x, (int, float, np.floating)):
        return (float(x),)
    return tuple(float(v) for v in x)


def eval_point(f: Expr, x) -> float:
    """Evaluate a scalar expression at a point (float in 1-D, sequence otherwise)."""
    try:
        value = compile_expr(f)(_coords(x))
    except ZeroDivisionError:
        raise DomainError("division by zero") from None
    except OverflowError as exc:
        raise DomainError(str(exc)) from None
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"non-finite value {value} at {x!r}")
    return value


def eval_map_point(components: Sequence[Expr], x):
    """Evaluate a coordinatewise map; returns a float in 1-D and a tuple otherwise."""
    c = _coords(x)
    out = []
    for comp in components:
        try:
            v = float(compile_expr(comp)(c))
        except (ZeroDivisionError, OverflowError) as exc:
            raise DomainError(str(exc)) from None
        if not math.isfinite(v):
            raise DomainError(f"non-finite value {v} at {x!r}")
        out.append(v)
    return out[0] if len(out) == 1 else tuple(out)


def eval_batch(components: Sequence[Expr], coords: np.ndarray) -> np.ndarray:
    """Evaluate a map on an array of shape (dim, N); failures become nan/inf."""
    c = tuple(coords[i] for i in range(coords.shape[0]))
    with np.errstate(all="ignore"):
        rows = [np.broadcast_to(np.asarray(compile_expr(comp)(c), dtype=float), coords.shape[1:]) for comp in components]
    return np.array(rows, dtype=float)


# ---------------------------------------------------------------- interval evaluation

_IV_FUNCS = {"sin": iv.sin, "cos": iv.cos, "sqrt": iv.sqrt, "asin": iv.asin, "acos": iv.acos}


def _eval_iv(node: Expr, box: tuple) -> Interval:
    if isinstance(node, Const):
        return Interval(node.value, node.value)
    if isinstance(node, Var):
        return box[node.index]
    if isinstance(node, Neg):
        return -_eval_iv(node.arg, box)
    if isinstance(node, Func):
        arg = _eval_iv(node.arg, box)
        if node.name == "abs":
            return abs(arg)
        if node.name in _TRANSCENDENTAL and not arg.bounded:
            raise DomainError(f"{node.name} is not evaluated on unbounded boxes")
        return _IV_FUNCS[node.name](arg)
    if isinstance(node, BinOp):
        a, b = _eval_iv(node.left, box), _eval_iv(node.right, box)
        if node.op == "/" and not (a.bounded and b.bounded):
            raise DomainError("division is not evaluated on unbounded boxes")
        return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[node.op](b)
    if isinstance(node, Pow):
        return _eval_iv(node.base, box) ** node.exponent
    inner = tuple(_eval_iv(a, box) for a in node.args)
    return _eval_iv(node.outer, inner)


def eval_interval(f, box):
    """Sound enclosure of the image of ``box``.

    ``f`` is a scalar expression (an Interval is returned) or a tuple of
    component expressions (a tuple box is returned).
    """
    b = iv.as_box(box)
    if isinstance(f, tuple):
        return tuple(_eval_iv(comp, b) for comp in f)
    return _eval_iv(f, b)
