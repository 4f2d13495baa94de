"""Expression trees for parametric systems ``f(a, x) = 0``.

Trees are built by :func:`parse_problem`, differentiated symbolically and
evaluated as natural interval extensions (each real operation replaced by
its outward-rounded interval counterpart).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .interval import (
    ExtendedDivisionRequired,
    Interval,
    IntervalMatrix,
    IntervalVector,
    add,
    div,
    mul,
    neg,
    pow_int,
    sub,
)


class ProblemSyntaxError(ValueError):
    """Malformed problem text; carries 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


class EvaluationError(ArithmeticError):
    """The expression is undefined (division by an interval with 0) over the box."""


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------


class Expr:
    __slots__ = ()
    precedence = 9

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction
    text: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not self.text:
            v = self.value
            object.__setattr__(self, "text", str(v.numerator) if v.denominator == 1 else str(v))


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 0-based


@dataclass(frozen=True)
class Param(Expr):
    index: int  # 0-based


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    precedence = 3


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr
    precedence = 1


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr
    precedence = 1


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr
    precedence = 2


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr
    precedence = 2


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int
    precedence = 4

    def __post_init__(self) -> None:
        if self.exponent < 0:
            raise ValueError("exponent must be a non-negative integer")


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def _is_const(e: Expr, v: int) -> bool:
    return isinstance(e, Const) and e.value == v


# ---------------------------------------------------------------------------
# Symbolic differentiation
# ---------------------------------------------------------------------------


def _add(u: Expr, v: Expr) -> Expr:
    if _is_const(u, 0):
        return v
    if _is_const(v, 0):
        return u
    return Add(u, v)


def _sub(u: Expr, v: Expr) -> Expr:
    if _is_const(v, 0):
        return u
    if _is_const(u, 0):
        return _neg(v)
    return Sub(u, v)


def _neg(u: Expr) -> Expr:
    if _is_const(u, 0):
        return ZERO
    return Neg(u)


def _mul(u: Expr, v: Expr) -> Expr:
    if _is_const(u, 0) or _is_const(v, 0):
        return ZERO
    if _is_const(u, 1):
        return v
    if _is_const(v, 1):
        return u
    return Mul(u, v)


def _pow(u: Expr, k: int) -> Expr:
    if k == 0:
        return ONE
    if k == 1:
        return u
    return Pow(u, k)


def differentiate(e: Expr, wrt: Var | Param) -> Expr:
    """Derivative of ``e`` with respect to one variable or parameter."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, (Var, Param)):
        return ONE if e == wrt else ZERO
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg, wrt))
    if isinstance(e, Add):
        return _add(differentiate(e.left, wrt), differentiate(e.right, wrt))
    if isinstance(e, Sub):
        return _sub(differentiate(e.left, wrt), differentiate(e.right, wrt))
    if isinstance(e, Mul):
        du, dv = differentiate(e.left, wrt), differentiate(e.right, wrt)
        return _add(_mul(du, e.right), _mul(e.left, dv))
    if isinstance(e, Div):
        du, dv = differentiate(e.left, wrt), differentiate(e.right, wrt)
        num = _sub(_mul(du, e.right), _mul(e.left, dv))
        if _is_const(num, 0):
            return ZERO
        return Div(num, _pow(e.right, 2))
    if isinstance(e, Pow):
        k = e.exponent
        if k == 0:
            return ZERO
        du = differentiate(e.base, wrt)
        return _mul(_mul(Const(Fraction(k)), _pow(e.base, k - 1)), du)
    raise TypeError(f"unknown expression node {e!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _const_interval(c: Const) -> Interval:
    return Interval.from_fraction(c.value)


def natural_eval(e: Expr, a_env: Sequence[Interval], x_env: Sequence[Interval]) -> Interval:
    """Natural interval extension of ``e`` over the parameter and variable boxes."""
    if isinstance(e, Const):
        return _const_interval(e)
    if isinstance(e, Var):
        return x_env[e.index]
    if isinstance(e, Param):
        return a_env[e.index]
    if isinstance(e, Neg):
        return neg(natural_eval(e.arg, a_env, x_env))
    if isinstance(e, Pow):
        return pow_int(natural_eval(e.base, a_env, x_env), e.exponent)
    l = natural_eval(e.left, a_env, x_env)
    r = natural_eval(e.right, a_env, x_env)
    if isinstance(e, Add):
        return add(l, r)
    if isinstance(e, Sub):
        return sub(l, r)
    if isinstance(e, Mul):
        return mul(l, r)
    if isinstance(e, Div):
        try:
            return div(l, r)
        except ExtendedDivisionRequired:
            raise EvaluationError(f"division by {r} (contains 0): nonsmooth/undefined over box") from None
    raise TypeError(f"unknown expression node {e!r}")


def point_eval(e: Expr, a: Sequence[float], x: Sequence[float]) -> float:
    """Plain floating-point evaluation, used by oracles and finite differences."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        return x[e.index]
    if isinstance(e, Param):
        return a[e.index]
    if isinstance(e, Neg):
        return -point_eval(e.arg, a, x)
    if isinstance(e, Pow):
        return point_eval(e.base, a, x) ** e.exponent
    l, r = point_eval(e.left, a, x), point_eval(e.right, a, x)
    if isinstance(e, Add):
        return l + r
    if isinstance(e, Sub):
        return l - r
    if isinstance(e, Mul):
        return l * r
    return l / r


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParametricSystem:
    var_names: tuple[str, ...]
    param_names: tuple[str, ...]
    f: tuple[Expr, ...]
    jac_x: tuple[tuple[Expr, ...], ...] = field(compare=False)
    jac_a: tuple[tuple[Expr, ...], ...] = field(compare=False)

    @classmethod
    def build(cls, var_names: Sequence[str], param_names: Sequence[str], f: Sequence[Expr]) -> ParametricSystem:
        n, p = len(var_names), len(param_names)
        if len(f) != n:
            raise ValueError(f"{len(f)} equations for {n} variables")
        jac_x = tuple(tuple(differentiate(fi, Var(j)) for j in range(n)) for fi in f)
        jac_a = tuple(tuple(differentiate(fi, Param(j)) for j in range(p)) for fi in f)
        return cls(tuple(var_names), tuple(param_names), tuple(f), jac_x, jac_a)

    @property
    def n(self) -> int:
        return len(self.var_names)

    @property
    def p(self) -> int:
        return len(self.param_names)

    def f_point(self, a: Sequence[float], x: Sequence[float]) -> np.ndarray:
        return np.array([point_eval(e, a, x) for e in self.f])

    def jac_x_point(self, a: Sequence[float], x: Sequence[float]) -> np.ndarray:
        return np.array([[point_eval(e, a, x) for e in row] for row in self.jac_x])


def _envs(sys: ParametricSystem, a_env, x_env) -> tuple[IntervalVector, IntervalVector]:
    a_env = _as_box(a_env)
    x_env = _as_box(x_env)
    if len(a_env) != sys.p or len(x_env) != sys.n:
        raise ValueError("environment lengths do not match the system")
    return a_env, x_env


def _as_box(v) -> IntervalVector:
    if isinstance(v, IntervalVector):
        return v
    return IntervalVector(v)


def eval_f(sys: ParametricSystem, a_env, x_env) -> IntervalVector:
    a_env, x_env = _envs(sys, a_env, x_env)
    return IntervalVector(natural_eval(e, a_env, x_env) for e in sys.f)


def eval_jac_x(sys: ParametricSystem, a_env, x_env) -> IntervalMatrix:
    a_env, x_env = _envs(sys, a_env, x_env)
    return IntervalMatrix([[natural_eval(e, a_env, x_env) for e in row] for row in sys.jac_x])


def eval_jac_a(sys: ParametricSystem, a_env, x_env) -> IntervalMatrix:
    a_env, x_env = _envs(sys, a_env, x_env)
    return IntervalMatrix([[natural_eval(e, a_env, x_env) for e in row] for row in sys.jac_a])


@dataclass(frozen=True)
class ProblemInstance:
    system: ParametricSystem
    param_box: IntervalVector
    initial_box: IntervalVector | None = None
    nominal_point: tuple[float, ...] | None = None
    # decimal literals as written, kept for faithful re-printing
    param_text: tuple[tuple[str, str], ...] = field(default=(), compare=False)
    box_text: tuple[tuple[str, str], ...] | None = field(default=None, compare=False)
    nominal_text: tuple[str, ...] | None = field(default=None, compare=False)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def to_text(e: Expr, var_names: Sequence[str] | None = None, param_names: Sequence[str] | None = None) -> str:
    """Infix rendering that re-parses to the same tree."""

    def name_var(i: int) -> str:
        return var_names[i] if var_names else f"x{i + 1}"

    def name_param(j: int) -> str:
        return param_names[j] if param_names else f"a{j + 1}"

    def go(node: Expr) -> str:
        if isinstance(node, Const):
            return node.text
        if isinstance(node, Var):
            return name_var(node.index)
        if isinstance(node, Param):
            return name_param(node.index)
        if isinstance(node, Neg):
            inner = go(node.arg)
            return "-" + (f"({inner})" if node.arg.precedence < Neg.precedence else inner)
        if isinstance(node, Pow):
            base = go(node.base)
            if node.base.precedence <= Pow.precedence:
                base = f"({base})"
            return f"{base}^{node.exponent}"
        sym = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(node)]
        left, right = go(node.left), go(node.right)
        if node.left.precedence < node.precedence:
            left = f"({left})"
        if node.right.precedence <= node.precedence:
            right = f"({right})"
        return left + sym + right

    return go(e)


def format_problem(inst: ProblemInstance) -> str:
    sys = inst.system
    lines = [f"vars {', '.join(sys.var_names)};"]
    ptext = inst.param_text or tuple((_num(c.lo), _num(c.hi)) for c in inst.param_box)
    lines.append(
        "params " + ", ".join(f"{nm} in [{lo},{hi}]" for nm, (lo, hi) in zip(sys.param_names, ptext)) + ";"
    )
    if inst.initial_box is not None:
        btext = inst.box_text or tuple((_num(c.lo), _num(c.hi)) for c in inst.initial_box)
        lines.append("box " + ", ".join(f"{nm} in [{lo},{hi}]" for nm, (lo, hi) in zip(sys.var_names, btext)) + ";")
    if inst.nominal_point is not None:
        ntext = inst.nominal_text or tuple(_num(v) for v in inst.nominal_point)
        lines.append("nominal " + ", ".join(f"{nm} = {v}" for nm, v in zip(sys.var_names, ntext)) + ";")
    for fi in sys.f:
        lines.append(f"eq {to_text(fi, sys.var_names, sys.param_names)};")
    return "\n".join(lines) + "\n"


def _num(v: float) -> str:
    return repr(float(v))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),;=\[\]])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"vars", "params", "box", "nominal", "eq", "in", "inf"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ProblemSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = _tokenize(text)
        self.i = 0
        self.vars: dict[str, int] = {}
        self.params: dict[str, int] = {}
        self.param_box: dict[int, tuple[str, str]] = {}
        self.box: dict[int, tuple[str, str]] | None = None
        self.nominal: dict[int, str] | None = None
        self.eqs: list[Expr] = []
        self.seen: set[str] = set()

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None) -> ProblemSyntaxError:
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ProblemSyntaxError(f"{msg} (found {found})", t.line, t.col)

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind == "eof":
            raise self.error(f"expected {text!r}")
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def name(self) -> _Tok:
        t = self.tok
        if t.kind != "ident" or t.text in _KEYWORDS:
            raise self.error("expected a name")
        return self.advance()

    # statements
    def parse(self) -> ProblemInstance:
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "ident" or t.text not in ("vars", "params", "box", "nominal", "eq"):
                raise self.error("expected a declaration (vars, params, box, nominal, eq)")
            self.advance()
            if t.text != "eq":
                if t.text in self.seen:
                    raise ProblemSyntaxError(f"duplicate '{t.text}' declaration", t.line, t.col)
                self.seen.add(t.text)
            getattr(self, f"stmt_{t.text}")(t)
            self.expect(";")
        return self.finish()

    def stmt_vars(self, kw: _Tok) -> None:
        if self.eqs:
            raise ProblemSyntaxError("'vars' must precede equations", kw.line, kw.col)
        while True:
            t = self.name()
            if t.text in self.vars or t.text in self.params:
                raise ProblemSyntaxError(f"duplicate name {t.text!r}", t.line, t.col)
            self.vars[t.text] = len(self.vars)
            if not self.accept(","):
                break

    def stmt_params(self, kw: _Tok) -> None:
        if self.eqs:
            raise ProblemSyntaxError("'params' must precede equations", kw.line, kw.col)
        while True:
            t = self.name()
            if t.text in self.vars or t.text in self.params:
                raise ProblemSyntaxError(f"duplicate name {t.text!r}", t.line, t.col)
            self.expect("in")
            lo, hi = self.interval_literal(bounded=True)
            idx = len(self.params)
            self.params[t.text] = idx
            self.param_box[idx] = (lo, hi)
            if not self.accept(","):
                break

    def stmt_box(self, kw: _Tok) -> None:
        self.box = {}
        while True:
            t = self.name()
            idx = self._var_index(t)
            if idx in self.box:
                raise ProblemSyntaxError(f"duplicate box entry for {t.text!r}", t.line, t.col)
            self.expect("in")
            self.box[idx] = self.interval_literal(bounded=True)
            if not self.accept(","):
                break

    def stmt_nominal(self, kw: _Tok) -> None:
        self.nominal = {}
        while True:
            t = self.name()
            idx = self._var_index(t)
            if idx in self.nominal:
                raise ProblemSyntaxError(f"duplicate nominal entry for {t.text!r}", t.line, t.col)
            self.expect("=")
            self.nominal[idx] = self.signed_number()
            if not self.accept(","):
                break

    def stmt_eq(self, kw: _Tok) -> None:
        if not self.vars:
            raise ProblemSyntaxError("equation before 'vars' declaration", kw.line, kw.col)
        self.eqs.append(self.expr())

    def _var_index(self, t: _Tok) -> int:
        if t.text not in self.vars:
            raise ProblemSyntaxError(f"unknown variable {t.text!r}", t.line, t.col)
        return self.vars[t.text]

    def signed_number(self) -> str:
        sign = "-" if self.accept("-") else ""
        t = self.tok
        if t.kind != "num":
            raise self.error("expected a number")
        self.advance()
        return sign + t.text

    def interval_literal(self, bounded: bool) -> tuple[str, str]:
        start = self.expect("[")
        lo = self.signed_number()
        self.expect(",")
        hi = self.signed_number()
        self.expect("]")
        if Fraction(lo) > Fraction(hi):
            raise ProblemSyntaxError(f"empty interval [{lo},{hi}]", start.line, start.col)
        return lo, hi

    # expressions: sum := term (('+'|'-') term)*
    def expr(self) -> Expr:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            t = self.tok
            if t.kind != "num" or not re.fullmatch(r"\d+", t.text):
                raise self.error("exponent must be a non-negative integer literal")
            self.advance()
            base = Pow(base, int(t.text))
            if self.tok.text == "^":
                raise self.error("chained exponents are not supported; use parentheses")
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(Fraction(t.text), t.text)
        if t.kind == "ident" and t.text not in _KEYWORDS:
            self.advance()
            if t.text in self.vars:
                return Var(self.vars[t.text])
            if t.text in self.params:
                return Param(self.params[t.text])
            raise ProblemSyntaxError(f"unknown identifier {t.text!r}", t.line, t.col)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        raise self.error("expected an operand")

    def finish(self) -> ProblemInstance:
        last = self.tok
        if not self.eqs:
            raise ProblemSyntaxError("no equations declared", last.line, last.col)
        n = len(self.vars)
        if len(self.eqs) != n:
            raise ProblemSyntaxError(f"{len(self.eqs)} equations declared for {n} variables", last.line, last.col)
        var_names = sorted(self.vars, key=self.vars.__getitem__)
        param_names = sorted(self.params, key=self.params.__getitem__)
        system = ParametricSystem.build(var_names, param_names, self.eqs)
        ptext = tuple(self.param_box[j] for j in range(len(param_names)))
        if not ptext:
            raise ProblemSyntaxError("no parameters declared", last.line, last.col)
        param_box = IntervalVector(Interval.from_decimal(lo, hi) for lo, hi in ptext)
        box = box_text = None
        if self.box is not None:
            missing = [var_names[i] for i in range(n) if i not in self.box]
            if missing:
                raise ProblemSyntaxError(f"box is missing variables {', '.join(missing)}", last.line, last.col)
            box_text = tuple(self.box[i] for i in range(n))
            box = IntervalVector(Interval.from_decimal(lo, hi) for lo, hi in box_text)
        nominal = nominal_text = None
        if self.nominal is not None:
            missing = [var_names[i] for i in range(n) if i not in self.nominal]
            if missing:
                raise ProblemSyntaxError(f"nominal is missing variables {', '.join(missing)}", last.line, last.col)
            nominal_text = tuple(self.nominal[i] for i in range(n))
            nominal = tuple(float(Fraction(v)) for v in nominal_text)
        return ProblemInstance(
            system=system,
            param_box=param_box,
            initial_box=box,
            nominal_point=nominal,
            param_text=ptext,
            box_text=box_text,
            nominal_text=nominal_text,
        )


def parse_problem(text: str) -> ProblemInstance:
    """Parse the problem-file language into a :class:`ProblemInstance`.

    Raises :class:`ProblemSyntaxError` with the offending line and column.
    """
    return _Parser(text).parse()


def load_problem(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def iter_nodes(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, (Neg,)):
        yield from iter_nodes(e.arg)
    elif isinstance(e, Pow):
        yield from iter_nodes(e.base)
    elif isinstance(e, (Add, Sub, Mul, Div)):
        yield from iter_nodes(e.left)
        yield from iter_nodes(e.right)


__all__ = [
    "Expr",
    "Const",
    "Var",
    "Param",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "ParametricSystem",
    "ProblemInstance",
    "ProblemSyntaxError",
    "EvaluationError",
    "differentiate",
    "natural_eval",
    "point_eval",
    "eval_f",
    "eval_jac_x",
    "eval_jac_a",
    "parse_problem",
    "load_problem",
    "format_problem",
    "to_text",
]
