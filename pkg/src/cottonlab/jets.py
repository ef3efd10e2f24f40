"""Expression ASTs and order-3 Taylor-jet evaluation.

The grammar covers infix arithmetic over the chart coordinates x1, x2, x3,
numeric literals, integer powers and the elementary functions sin, cos, tan,
exp, log, sqrt, sinh, cosh, tanh.  Expressions compile once into a flat
stack-machine tape; the tape runs on one of two interchangeable kernels:

* ``cottonlab._jetcore`` - Cython, compiled at install time;
* ``cottonlab._jetcore_py`` - vectorized numpy fallback.

The compiled lane is preferred when importable.  Set
``COTTONLAB_JET_BACKEND=python`` (or ``cython``) to force a lane.

A :class:`Jet3` packs the 20 Taylor coefficients of a scalar function at a
point through total order 3, normalized by 1/(a! b! c!), so third metric
derivatives reach the Cotton pipeline at machine precision.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _jettables as T
from ._jettables import JetDomainFailure
from .errors import DomainError, ExprSyntaxError, UnknownSymbolError


def _load_backend():
    choice = os.environ.get("COTTONLAB_JET_BACKEND", "").strip().lower()
    if choice == "python":
        from . import _jetcore_py as core

        return core
    try:
        from . import _jetcore as core  # type: ignore[attr-defined]

        return core
    except ImportError:
        if choice == "cython":
            raise ImportError(
                "COTTONLAB_JET_BACKEND=cython but the compiled kernel is not "
                "available; rebuild the package or unset the variable"
            )
        from . import _jetcore_py as core

        return core


_CORE = _load_backend()


def backend_name() -> str:
    """Name of the active kernel lane: 'cython' or 'python'."""
    return _CORE.BACKEND


VARIABLES = ("x1", "x2", "x3")
FUNCTIONS = tuple(sorted(T.FUNC_OPS))


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    axis: int  # 0..2


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


Expr = Const | Var | Neg | Add | Sub | Mul | Div | Pow | Func


# --- tokenizer / parser ----------------------------------------------------

_TOKEN_OPS = "+-*/^()"


def _tokenize(text):
    tokens = []  # (kind, value, offset)
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOKEN_OPS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                seen_dot = seen_dot or text[j] == "."
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    """Recursive descent, precedence pow > unary minus > mul/div > add/sub."""

    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.next()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected '{op}'", off)

    def parse(self):
        expr = self.sum()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {val!r}", off)
        return expr

    def sum(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                node = Add(node, rhs) if val == "+" else Sub(node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.unary()
                node = Mul(node, rhs) if val == "*" else Div(node, rhs)
            else:
                return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "^":
                self.next()
                node = Pow(node, self.exponent())
            else:
                return node

    def exponent(self):
        kind, val, off = self.next()
        sign = 1
        parenthesized = False
        if kind == "op" and val == "(":
            parenthesized = True
            kind, val, off = self.next()
        if kind == "op" and val == "-":
            sign = -1
            kind, val, off = self.next()
        if kind != "num" or any(ch in val for ch in ".eE"):
            raise ExprSyntaxError("power exponent must be an integer literal", off)
        if parenthesized:
            self.expect_op(")")
        value = sign * int(val)
        if abs(value) > 64:
            raise ExprSyntaxError("power exponent out of the supported range [-64, 64]", off)
        return value

    def atom(self):
        kind, val, off = self.next()
        if kind == "num":
            return Const(float(val))
        if kind == "op" and val == "(":
            node = self.sum()
            self.expect_op(")")
            return node
        if kind == "ident":
            nkind, nval, _ = self.peek()
            if nkind == "op" and nval == "(":
                if val not in T.FUNC_OPS:
                    raise UnknownSymbolError(val, off)
                self.next()
                arg = self.sum()
                self.expect_op(")")
                return Func(val, arg)
            if val in VARIABLES:
                return Var(VARIABLES.index(val))
            raise UnknownSymbolError(val, off)
        raise ExprSyntaxError(f"unexpected token {val!r}", off)


def parse(text: str) -> Expr:
    """Parse an infix expression over x1, x2, x3 into an AST."""
    return _Parser(text).parse()


# --- printer ---------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Const: 5, Var: 5, Func: 5}


def to_string(expr: Expr) -> str:
    """Render an AST with minimal parentheses; parse(to_string(e)) == e."""

    def wrap(child, parent_prec, strict=False):
        s = to_string(child)
        p = _PREC[type(child)]
        if p < parent_prec or (strict and p == parent_prec):
            return f"({s})"
        return s

    if isinstance(expr, Const):
        if expr.value < 0:
            return f"({expr.value!r})"
        return repr(expr.value)
    if isinstance(expr, Var):
        return VARIABLES[expr.axis]
    if isinstance(expr, Neg):
        return "-" + wrap(expr.arg, _PREC[Neg], strict=True)
    if isinstance(expr, Add):
        return f"{wrap(expr.left, 1)} + {wrap(expr.right, 1, strict=True)}"
    if isinstance(expr, Sub):
        return f"{wrap(expr.left, 1)} - {wrap(expr.right, 1, strict=True)}"
    if isinstance(expr, Mul):
        return f"{wrap(expr.left, 2)}*{wrap(expr.right, 2, strict=True)}"
    if isinstance(expr, Div):
        return f"{wrap(expr.left, 2)}/{wrap(expr.right, 2, strict=True)}"
    if isinstance(expr, Pow):
        exp = str(expr.exponent) if expr.exponent >= 0 else f"(-{-expr.exponent})"
        return f"{wrap(expr.base, 4, strict=True)}^{exp}"
    if isinstance(expr, Func):
        return f"{expr.name}({to_string(expr.arg)})"
    raise TypeError(f"not an Expr: {expr!r}")


# --- tape compiler ---------------------------------------------------------


class Tape:
    """Flat postorder program for the stack-machine kernels."""

    __slots__ = ("ops", "iargs", "consts", "depth")

    def __init__(self, ops, iargs, consts, depth):
        self.ops = np.asarray(ops, dtype=np.int32)
        self.iargs = np.asarray(iargs, dtype=np.int32)
        self.consts = np.asarray(consts, dtype=np.float64)
        self.depth = depth


def compile_expr(expr: Expr) -> Tape:
    ops, iargs, consts = [], [], []

    def emit(node):
        if isinstance(node, Const):
            ops.append(T.OP_CONST)
            iargs.append(len(consts))
            consts.append(node.value)
            return 1
        if isinstance(node, Var):
            ops.append(T.OP_VAR)
            iargs.append(node.axis)
            return 1
        if isinstance(node, Neg):
            d = emit(node.arg)
            ops.append(T.OP_NEG)
            iargs.append(0)
            return d
        if isinstance(node, (Add, Sub, Mul, Div)):
            dl = emit(node.left)
            dr = emit(node.right)
            ops.append(
                {Add: T.OP_ADD, Sub: T.OP_SUB, Mul: T.OP_MUL, Div: T.OP_DIV}[type(node)]
            )
            iargs.append(0)
            return max(dl, dr + 1)
        if isinstance(node, Pow):
            d = emit(node.base)
            ops.append(T.OP_POW)
            iargs.append(node.exponent)
            return d
        if isinstance(node, Func):
            d = emit(node.arg)
            ops.append(T.FUNC_OPS[node.name])
            iargs.append(0)
            return d
        raise TypeError(f"not an Expr: {node!r}")

    depth = emit(expr)
    return Tape(ops, iargs, consts, depth)


_TAPE_CACHE: dict[Expr, Tape] = {}


def tape_of(expr: Expr) -> Tape:
    tape = _TAPE_CACHE.get(expr)
    if tape is None:
        tape = compile_expr(expr)
        _TAPE_CACHE[expr] = tape
    return tape


def _as_points(point):
    pts = np.asarray(point, dtype=np.float64)
    if pts.shape == (3,):
        return pts.reshape(1, 3), True
    if pts.ndim == 2 and pts.shape[1] == 3:
        return np.ascontiguousarray(pts), False
    raise ValueError(f"expected a point (3,) or batch (n, 3), got {pts.shape}")


def _translate(exc: JetDomainFailure, points):
    p = points[exc.point_index]
    return DomainError(f"{exc.args[0]} at point ({p[0]:g}, {p[1]:g}, {p[2]:g})")


def eval_expr(expr: Expr, point) -> float:
    """Evaluate at a single point; raises DomainError outside the domain."""
    pts, _ = _as_points(point)
    return float(eval_expr_many(expr, pts)[0])


def eval_expr_many(expr: Expr, points) -> np.ndarray:
    """Vectorized plain evaluation at an (n, 3) batch of points."""
    pts, _ = _as_points(points)
    t = tape_of(expr)
    try:
        return _CORE.eval_values(t.ops, t.iargs, t.consts, pts, t.depth)
    except JetDomainFailure as exc:
        raise _translate(exc, pts) from None


def eval_jet_many(expr: Expr, points) -> np.ndarray:
    """Order-3 jets at an (n, 3) batch; returns (n, 20) coefficients."""
    pts, _ = _as_points(points)
    t = tape_of(expr)
    try:
        return _CORE.eval_jets(t.ops, t.iargs, t.consts, pts, t.depth)
    except JetDomainFailure as exc:
        raise _translate(exc, pts) from None


# --- Jet3 value type -------------------------------------------------------


class Jet3:
    """Order-3 Taylor jet of a scalar function at a point.

    Supports the ring operations, integer powers and the elementary
    functions from the expression grammar.  Immutable by convention: all
    operations return fresh jets.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=np.float64)
        if c.shape != (T.NCOEFFS,):
            raise ValueError(f"Jet3 needs {T.NCOEFFS} coefficients, got {c.shape}")
        self.coeffs = c

    @classmethod
    def constant(cls, value):
        c = np.zeros(T.NCOEFFS)
        c[0] = float(value)
        return cls(c)

    @classmethod
    def variable(cls, axis, value):
        c = np.zeros(T.NCOEFFS)
        c[0] = float(value)
        c[T.VAR_SLOT[axis]] = 1.0
        return cls(c)

    @property
    def value(self):
        return float(self.coeffs[0])

    def coeff(self, multi):
        return float(self.coeffs[T.INDEX_OF[tuple(multi)]])

    def derivative(self, multi):
        """Partial derivative for a multi-index with |multi| <= 3."""
        k = T.INDEX_OF[tuple(multi)]
        return float(self.coeffs[k] * T.FACTORIALS[k])

    def _batch(self):
        return self.coeffs.reshape(1, T.NCOEFFS)

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0] += float(other)
        return Jet3(c)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet3) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, other):
        if isinstance(other, Jet3):
            return Jet3(_CORE.jet_mul(self._batch(), other._batch())[0])
        return Jet3(self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet3):
            return Jet3(self.coeffs / float(other))
        try:
            return Jet3(_CORE.jet_div(self._batch(), other._batch())[0])
        except JetDomainFailure as exc:
            raise DomainError(str(exc)) from None

    def __rtruediv__(self, other):
        return Jet3.constant(other) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("jet powers take integer exponents")
        try:
            return Jet3(_CORE.jet_pow(self._batch(), n)[0])
        except JetDomainFailure as exc:
            raise DomainError(str(exc)) from None

    def __repr__(self):
        return f"Jet3(value={self.value!r})"


def _jet_func(name):
    op = T.FUNC_OPS[name]

    def apply(jet: Jet3) -> Jet3:
        if not isinstance(jet, Jet3):
            return Jet3.constant(getattr(math, name)(jet))
        try:
            return Jet3(_CORE.jet_unary(op, jet._batch())[0])
        except JetDomainFailure as exc:
            raise DomainError(str(exc)) from None

    apply.__name__ = name
    apply.__doc__ = f"{name} applied to a Jet3 through order 3."
    return apply


sin = _jet_func("sin")
cos = _jet_func("cos")
tan = _jet_func("tan")
exp = _jet_func("exp")
log = _jet_func("log")
sqrt = _jet_func("sqrt")
sinh = _jet_func("sinh")
cosh = _jet_func("cosh")
tanh = _jet_func("tanh")


def eval_jet(expr: Expr, point) -> Jet3:
    """Exact order-3 jet of an expression at a point."""
    pts, _ = _as_points(point)
    return Jet3(eval_jet_many(expr, pts)[0])


# --- derivative extraction helpers ----------------------------------------

_D1_IDX = np.array([T.INDEX_OF[(1, 0, 0)], T.INDEX_OF[(0, 1, 0)], T.INDEX_OF[(0, 0, 1)]])

_D2_IDX = np.empty((3, 3), dtype=np.int64)
_D2_FAC = np.empty((3, 3))
_D3_IDX = np.empty((3, 3, 3), dtype=np.int64)
_D3_FAC = np.empty((3, 3, 3))
for _i in range(3):
    for _j in range(3):
        mi = [0, 0, 0]
        mi[_i] += 1
        mi[_j] += 1
        _k = T.INDEX_OF[tuple(mi)]
        _D2_IDX[_i, _j] = _k
        _D2_FAC[_i, _j] = T.FACTORIALS[_k]
        for _l in range(3):
            mj = list(mi)
            mj[_l] += 1
            _k3 = T.INDEX_OF[tuple(mj)]
            _D3_IDX[_i, _j, _l] = _k3
            _D3_FAC[_i, _j, _l] = T.FACTORIALS[_k3]


def derivatives_from_jets(coeffs):
    """Split (n, 20) jet coefficients into value and derivative tensors.

    Returns ``(f, d1, d2, d3)`` with shapes (n,), (n,3), (n,3,3), (n,3,3,3);
    the derivative tensors are fully symmetrized.
    """
    c = np.asarray(coeffs)
    f = c[..., 0]
    d1 = c[..., _D1_IDX]
    d2 = c[..., _D2_IDX] * _D2_FAC
    d3 = c[..., _D3_IDX] * _D3_FAC
    return f, d1, d2, d3


def jet_partial(coeffs, axis):
    """Jet of the partial derivative along ``axis``.

    Exact through order 2 only; the order-3 coefficients of the result are
    zero.  Useful to differentiate fields built from exact jets once.
    """
    c = np.asarray(coeffs)
    src = T.SHIFT_SRC[axis]
    fac = T.SHIFT_FAC[axis]
    out = np.zeros_like(c)
    valid = src >= 0
    out[..., valid] = c[..., src[valid]] * fac[valid]
    return out
