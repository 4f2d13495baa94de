"""Outward-rounded interval arithmetic over the extended reals.

Every endpoint is computed in round-to-nearest and then, only when the
floating-point result is inexact, moved one ULP outward with
``math.nextafter``. Exactness is decided with error-free transformations
(TwoSum, Dekker's TwoProduct) and, near the overflow/underflow range, with
exact rationals. No floating-point environment state is touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

INF = math.inf

__all__ = [
    "Interval",
    "EMPTY",
    "ENTIRE",
    "ExtendedDivisionResult",
    "ExtendedDivisionRequired",
    "PreconditionerSingular",
    "IntervalVector",
    "IntervalMatrix",
    "binary_op",
    "pow_int",
    "extended_divide",
    "hull",
    "intersect",
    "mid",
    "wid",
    "mat_inverse",
    "iv_mat_vec",
    "real_mat_iv_mat",
    "real_mat_iv_vec",
]


class ExtendedDivisionRequired(ZeroDivisionError):
    """Raised when an ordinary interval division has 0 in the divisor."""


class PreconditionerSingular(ArithmeticError):
    """Raised when the midpoint matrix cannot be inverted."""


# ---------------------------------------------------------------------------
# Directed rounding of single operations
# ---------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1
_SAFE_HI = 2.0**900
_SAFE_LO = 2.0**-900


def _down_frac(exact: Fraction) -> float:
    try:
        f = float(exact)
    except OverflowError:
        return -INF if exact < 0 else math.nextafter(INF, 0.0)
    if math.isinf(f):
        return -INF if f < 0 else math.nextafter(INF, 0.0)
    return f if Fraction(f) <= exact else math.nextafter(f, -INF)


def _up_frac(exact: Fraction) -> float:
    try:
        f = float(exact)
    except OverflowError:
        return INF if exact > 0 else math.nextafter(-INF, 0.0)
    if math.isinf(f):
        return INF if f > 0 else math.nextafter(-INF, 0.0)
    return f if Fraction(f) >= exact else math.nextafter(f, INF)


def _two_sum_err(a: float, b: float, s: float) -> float:
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod_err(a: float, b: float, p: float) -> float:
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _add_dir(a: float, b: float, up: bool) -> float:
    if math.isinf(a) or math.isinf(b):
        # opposite infinities never reach here: callers pair endpoints so
        # that -inf + +inf cannot arise for non-empty operands
        return a + b
    s = a + b
    if math.isinf(s):
        return s if (s > 0) == up else math.copysign(math.nextafter(INF, 0.0), s)
    if abs(s) > _SAFE_HI:
        return (_up_frac if up else _down_frac)(Fraction(a) + Fraction(b))
    err = _two_sum_err(a, b, s)
    if up:
        return math.nextafter(s, INF) if err > 0 else s
    return math.nextafter(s, -INF) if err < 0 else s


def _mul_dir(a: float, b: float, up: bool) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0  # set semantics: 0 * inf = 0
    if math.isinf(a) or math.isinf(b):
        return a * b
    p = a * b
    aa, ab = abs(a), abs(b)
    if math.isinf(p) or abs(p) < _SAFE_LO or aa > _SAFE_HI or ab > _SAFE_HI or abs(p) > _SAFE_HI:
        return (_up_frac if up else _down_frac)(Fraction(a) * Fraction(b))
    err = _two_prod_err(a, b, p)
    if up:
        return math.nextafter(p, INF) if err > 0 else p
    return math.nextafter(p, -INF) if err < 0 else p


def _div_dir(a: float, b: float, up: bool) -> float:
    # b != 0 is guaranteed by callers
    if math.isinf(b):
        return 0.0
    if math.isinf(a):
        return a / b
    if a == 0.0:
        return 0.0
    return (_up_frac if up else _down_frac)(Fraction(a) / Fraction(b))


def _mul_up(a: float, b: float) -> float:
    return _mul_dir(a, b, True)


def _mul_down(a: float, b: float) -> float:
    return _mul_dir(a, b, False)


# ---------------------------------------------------------------------------
# Interval
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval ``[lo, hi]`` with floating-point endpoints.

    Endpoints may be infinite. The empty set is the singleton :data:`EMPTY`;
    constructing an interval with ``lo > hi`` raises.
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"invalid interval [{lo!r}, {hi!r}]")
        if lo == INF or hi == -INF:
            raise ValueError("an interval cannot be reduced to an infinite point")
        object.__setattr__(self, "lo", lo + 0.0)
        object.__setattr__(self, "hi", hi + 0.0)

    @classmethod
    def point(cls, v: float) -> Interval:
        return cls(v, v)

    @classmethod
    def from_fraction(cls, lo: Fraction, hi: Fraction | None = None) -> Interval:
        """Smallest float interval enclosing the exact rational range."""
        if hi is None:
            hi = lo
        return cls(_down_frac(Fraction(lo)), _up_frac(Fraction(hi)))

    @classmethod
    def from_decimal(cls, lo: str, hi: str | None = None) -> Interval:
        return cls.from_fraction(Fraction(lo), Fraction(hi if hi is not None else lo))

    @property
    def is_empty(self) -> bool:
        return False

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, v: object) -> bool:
        if isinstance(v, Interval):
            return v.is_empty or (self.lo <= v.lo and v.hi <= self.hi)
        return self.lo <= v <= self.hi  # type: ignore[operator]

    def subset(self, other: Interval) -> bool:
        return other.__contains__(self)

    def interior_subset(self, other: Interval) -> bool:
        """True iff ``self`` lies in the topological interior of ``other``."""
        if self.is_empty:
            return True
        if other.is_empty or other.lo == other.hi:
            return False
        return other.lo < self.lo and self.hi < other.hi

    # arithmetic operators delegate to the module-level functions
    def __add__(self, other: Interval | float) -> Interval:
        return add(self, _coerce(other))

    def __radd__(self, other: float) -> Interval:
        return add(_coerce(other), self)

    def __sub__(self, other: Interval | float) -> Interval:
        return sub(self, _coerce(other))

    def __rsub__(self, other: float) -> Interval:
        return sub(_coerce(other), self)

    def __mul__(self, other: Interval | float) -> Interval:
        return mul(self, _coerce(other))

    def __rmul__(self, other: float) -> Interval:
        return mul(_coerce(other), self)

    def __truediv__(self, other: Interval | float) -> Interval:
        return div(self, _coerce(other))

    def __rtruediv__(self, other: float) -> Interval:
        return div(_coerce(other), self)

    def __neg__(self) -> Interval:
        return neg(self)

    def __pow__(self, k: int) -> Interval:
        return pow_int(self, k)

    def __str__(self) -> str:
        return f"[{_fmt(self.lo)},{_fmt(self.hi)}]"

    @classmethod
    def parse(cls, text: str) -> Interval:
        """Inverse of ``str``: accepts ``[lo,hi]`` and ``empty``."""
        t = text.strip()
        if t.lower() == "empty":
            return EMPTY
        if not (t.startswith("[") and t.endswith("]")):
            raise ValueError(f"not an interval literal: {text!r}")
        parts = t[1:-1].split(",")
        if len(parts) != 2:
            raise ValueError(f"not an interval literal: {text!r}")
        return cls(float(parts[0]), float(parts[1]))


class _Empty(Interval):
    __slots__ = ()

    def __init__(self) -> None:  # noqa: D401 - singleton construction
        object.__setattr__(self, "lo", INF)
        object.__setattr__(self, "hi", -INF)

    @property
    def is_empty(self) -> bool:
        return True

    @property
    def is_bounded(self) -> bool:
        return True

    @property
    def is_degenerate(self) -> bool:
        return False

    def __contains__(self, v: object) -> bool:
        return isinstance(v, Interval) and v.is_empty

    def __repr__(self) -> str:
        return "EMPTY"

    def __str__(self) -> str:
        return "empty"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Interval) and other.is_empty

    def __hash__(self) -> int:
        return hash("empty-interval")

    def __reduce__(self) -> str:
        return "EMPTY"


EMPTY: Interval = _Empty()
ENTIRE = Interval(-INF, INF)


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _coerce(v: Interval | float) -> Interval:
    if isinstance(v, Interval):
        return v
    return Interval(v, v)


# ---------------------------------------------------------------------------
# Scalar operations
# ---------------------------------------------------------------------------


def add(l: Interval, r: Interval) -> Interval:
    if l.is_empty or r.is_empty:
        return EMPTY
    return Interval(_add_dir(l.lo, r.lo, False), _add_dir(l.hi, r.hi, True))


def neg(x: Interval) -> Interval:
    if x.is_empty:
        return EMPTY
    return Interval(-x.hi, -x.lo)


def sub(l: Interval, r: Interval) -> Interval:
    if l.is_empty or r.is_empty:
        return EMPTY
    return Interval(_add_dir(l.lo, -r.hi, False), _add_dir(l.hi, -r.lo, True))


def mul(l: Interval, r: Interval) -> Interval:
    if l.is_empty or r.is_empty:
        return EMPTY
    a, b, c, d = l.lo, l.hi, r.lo, r.hi
    if a >= 0.0 and c >= 0.0:
        return Interval(_mul_down(a, c), _mul_up(b, d))
    if b <= 0.0 and d <= 0.0:
        return Interval(_mul_down(b, d), _mul_up(a, c))
    if a >= 0.0 and d <= 0.0:
        return Interval(_mul_down(b, c), _mul_up(a, d))
    if b <= 0.0 and c >= 0.0:
        return Interval(_mul_down(a, d), _mul_up(b, c))
    corners = ((a, c), (a, d), (b, c), (b, d))
    return Interval(
        min(_mul_down(u, v) for u, v in corners),
        max(_mul_up(u, v) for u, v in corners),
    )


def div(l: Interval, r: Interval) -> Interval:
    if l.is_empty or r.is_empty:
        return EMPTY
    if r.lo <= 0.0 <= r.hi:
        raise ExtendedDivisionRequired(f"divisor {r} contains zero; use extended_divide")
    los, his = [], []
    for u in (l.lo, l.hi):
        for v in (r.lo, r.hi):
            if math.isinf(u) and math.isinf(v):
                continue  # never an extremum of a sign-definite quotient
            los.append(_div_dir(u, v, False))
            his.append(_div_dir(u, v, True))
    return Interval(min(los), max(his))


_OPS = {"+": add, "-": sub, "−": sub, "*": mul, "×": mul, "/": div, "÷": div}


def binary_op(op: str, l: Interval, r: Interval) -> Interval:
    """Apply ``+ - * /`` (ASCII or the usual math glyphs) to two intervals."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown interval operator {op!r}") from None
    return fn(l, r)


def _pow_dir(v: float, k: int, up: bool) -> float:
    if math.isinf(v):
        return v**k
    exact = Fraction(v) ** k
    return _up_frac(exact) if up else _down_frac(exact)


def pow_int(x: Interval, k: int) -> Interval:
    """Exact range of ``t**k`` over ``x``, outward-rounded."""
    if k < 0 or int(k) != k:
        raise ValueError("exponent must be a non-negative integer")
    if x.is_empty:
        return EMPTY
    k = int(k)
    if k == 0:
        return Interval(1.0, 1.0)
    if k == 1:
        return x
    if k % 2 == 1 or x.lo >= 0.0:
        return Interval(_pow_dir(x.lo, k, False), _pow_dir(x.hi, k, True))
    if x.hi <= 0.0:
        return Interval(_pow_dir(x.hi, k, False), _pow_dir(x.lo, k, True))
    m = max(-x.lo, x.hi)
    return Interval(0.0, _pow_dir(m, k, True))


@dataclass(frozen=True)
class ExtendedDivisionResult:
    """Zero, one or two sorted disjoint pieces of ``{b/a : a in [a] \\ {0}}``."""

    pieces: tuple[Interval, ...]

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __contains__(self, v: float) -> bool:
        return any(v in p for p in self.pieces)


def extended_divide(b: Interval, a: Interval) -> ExtendedDivisionResult:
    """Solution set of ``a*x = b`` for ``a`` ranging over an interval with 0."""
    if a.is_empty or b.is_empty:
        return ExtendedDivisionResult(())
    if not a.lo <= 0.0 <= a.hi:
        return ExtendedDivisionResult((div(b, a),))
    if b.lo <= 0.0 <= b.hi:
        return ExtendedDivisionResult((ENTIRE,))
    if a.lo == 0.0 and a.hi == 0.0:
        return ExtendedDivisionResult(())
    pieces = []
    if b.hi < 0.0:
        if a.hi > 0.0:
            pieces.append(Interval(-INF, _div_dir(b.hi, a.hi, True)))
        if a.lo < 0.0:
            pieces.append(Interval(_div_dir(b.hi, a.lo, False), INF))
    else:
        if a.lo < 0.0:
            pieces.append(Interval(-INF, _div_dir(b.lo, a.lo, True)))
        if a.hi > 0.0:
            pieces.append(Interval(_div_dir(b.lo, a.hi, False), INF))
    return ExtendedDivisionResult(tuple(pieces))


def hull(l: Interval, r: Interval) -> Interval:
    if l.is_empty:
        return r
    if r.is_empty:
        return l
    return Interval(min(l.lo, r.lo), max(l.hi, r.hi))


def intersect(l: Interval, r: Interval) -> Interval:
    if l.is_empty or r.is_empty:
        return EMPTY
    lo, hi = max(l.lo, r.lo), min(l.hi, r.hi)
    if lo > hi:
        return EMPTY
    return Interval(lo, hi)


def mid(x: Interval) -> float:
    """Round-to-nearest midpoint, guaranteed to lie in ``x``."""
    if x.is_empty or not x.is_bounded:
        raise ValueError(f"midpoint of {x} is undefined")
    m = 0.5 * x.lo + 0.5 * x.hi
    return min(max(m, x.lo), x.hi)


def wid(x: Interval) -> float:
    if x.is_empty:
        raise ValueError("width of the empty interval is undefined")
    if not x.is_bounded:
        return INF
    return _add_dir(x.hi, -x.lo, True)


# ---------------------------------------------------------------------------
# Vectors and matrices
# ---------------------------------------------------------------------------


class IntervalVector(tuple):
    """Immutable box; a tuple of :class:`Interval`."""

    def __new__(cls, items: Iterable[Interval | float | tuple[float, float]]) -> IntervalVector:
        comps = []
        for it in items:
            if isinstance(it, Interval):
                comps.append(it)
            elif isinstance(it, tuple):
                comps.append(Interval(*it))
            else:
                comps.append(Interval(it, it))
        if not comps:
            raise ValueError("interval vectors need at least one component")
        return super().__new__(cls, comps)

    @classmethod
    def point(cls, values: Iterable[float]) -> IntervalVector:
        return cls(Interval(v, v) for v in values)

    @classmethod
    def entire(cls, n: int) -> IntervalVector:
        return cls([ENTIRE] * n)

    @classmethod
    def empty(cls, n: int) -> IntervalVector:
        return cls([EMPTY] * n)

    @property
    def is_empty(self) -> bool:
        return any(c.is_empty for c in self)

    @property
    def is_bounded(self) -> bool:
        return all(c.is_bounded for c in self)

    def mid(self) -> np.ndarray:
        return np.array([mid(c) for c in self])

    def wid(self) -> list[float]:
        return [wid(c) for c in self]

    def lower(self) -> np.ndarray:
        return np.array([c.lo for c in self])

    def upper(self) -> np.ndarray:
        return np.array([c.hi for c in self])

    def subset(self, other: Sequence[Interval]) -> bool:
        return all(a.subset(b) for a, b in zip(self, other))

    def interior_subset(self, other: Sequence[Interval]) -> bool:
        return all(a.interior_subset(b) for a, b in zip(self, other))

    def contains_point(self, x: Sequence[float]) -> bool:
        return all(v in c for c, v in zip(self, x))

    def __add__(self, other):  # type: ignore[override]
        return IntervalVector(add(a, _coerce(b)) for a, b in zip(self, _vec(other, len(self))))

    def __sub__(self, other):
        return IntervalVector(sub(a, _coerce(b)) for a, b in zip(self, _vec(other, len(self))))

    def __rsub__(self, other):
        return IntervalVector(sub(_coerce(b), a) for a, b in zip(self, _vec(other, len(self))))

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self) -> IntervalVector:
        return IntervalVector(neg(c) for c in self)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self) + ")"

    def __repr__(self) -> str:
        return f"IntervalVector({list(self)!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, tuple) and tuple.__eq__(self, other)

    def __hash__(self) -> int:
        return tuple.__hash__(self)


def _vec(v, n: int):
    if isinstance(v, (IntervalVector, list, tuple, np.ndarray)):
        if len(v) != n:
            raise ValueError(f"dimension mismatch: {len(v)} vs {n}")
        return [float(c) if isinstance(c, np.floating) else c for c in v]
    return [v] * n


class IntervalMatrix(tuple):
    """Immutable rectangular grid of intervals (tuple of row tuples)."""

    def __new__(cls, rows: Iterable[Iterable[Interval | float | tuple[float, float]]]) -> IntervalMatrix:
        built = tuple(tuple(IntervalVector(r)) for r in rows)
        if not built:
            raise ValueError("interval matrices need at least one row")
        if len({len(r) for r in built}) != 1:
            raise ValueError("interval matrix rows must have equal length")
        return super().__new__(cls, built)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self), len(self[0])

    def mid(self) -> np.ndarray:
        return np.array([[mid(c) for c in row] for row in self])

    def __repr__(self) -> str:
        return f"IntervalMatrix({[list(r) for r in self]!r})"


def _dot(row: Sequence[Interval], v: Sequence[Interval]) -> Interval:
    acc = mul(row[0], v[0])
    for a, b in zip(row[1:], v[1:]):
        acc = add(acc, mul(a, b))
    return acc


def iv_mat_vec(M: Sequence[Sequence[Interval]], v: Sequence[Interval]) -> IntervalVector:
    """Interval matrix times interval vector, rows accumulated left to right."""
    if any(len(row) != len(v) for row in M):
        raise ValueError("dimension mismatch in matrix-vector product")
    if any(c.is_empty for c in v):
        return IntervalVector.empty(len(M))
    return IntervalVector(_dot(row, v) for row in M)


def real_mat_iv_mat(C: np.ndarray | Sequence[Sequence[float]], M: Sequence[Sequence[Interval]]) -> IntervalMatrix:
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    if m != len(M):
        raise ValueError("dimension mismatch in matrix product")
    cols = len(M[0])
    out = []
    for i in range(n):
        row_c = [Interval(float(c), float(c)) for c in C[i]]
        out.append([_dot(row_c, [M[k][j] for k in range(m)]) for j in range(cols)])
    return IntervalMatrix(out)


def real_mat_iv_vec(C: np.ndarray | Sequence[Sequence[float]], v: Sequence[Interval]) -> IntervalVector:
    C = np.asarray(C, dtype=float)
    return iv_mat_vec([[Interval(float(c), float(c)) for c in row] for row in C], v)


def mat_inverse(M: np.ndarray | Sequence[Sequence[float]]) -> np.ndarray:
    """Floating-point inverse (LU with partial pivoting); not rigorous."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise PreconditionerSingular("preconditioner singular") from exc
    if not np.all(np.isfinite(inv)):
        raise PreconditionerSingular("preconditioner singular")
    return inv
