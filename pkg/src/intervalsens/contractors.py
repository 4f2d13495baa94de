"""Interval Newton-type contractors for parametric systems.

The building blocks are the one-dimensional solver :func:`gamma`, the
interval Gauss-Seidel sweep, the Hansen-Sengupta and Krawczyk maps, and
their inverse-midpoint preconditioned parametric versions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expressions import ParametricSystem, eval_f, eval_jac_a, eval_jac_x
from .interval import (
    EMPTY,
    ENTIRE,
    Interval,
    IntervalMatrix,
    IntervalVector,
    PreconditionerSingular,
    add,
    div,
    extended_divide,
    hull,
    intersect,
    iv_mat_vec,
    mat_inverse,
    mul,
    real_mat_iv_mat,
    real_mat_iv_vec,
    sub,
)


class Status(enum.Enum):
    EMPTY = "empty"
    CONTRACTED = "contracted"
    EXISTENCE_PROVED = "existence-proved"
    PRECONDITIONER_SINGULAR = "preconditioner-singular"


class Operator(enum.Enum):
    HANSEN_SENGUPTA = "hs"
    KRAWCZYK = "krawczyk"


@dataclass(frozen=True)
class OperatorConfig:
    operator: Operator = Operator.HANSEN_SENGUPTA
    # intersect the Krawczyk image with its argument (classical variant)
    krawczyk_intersect: bool = False


@dataclass(frozen=True)
class ContractionOutcome:
    box: IntervalVector
    status: Status

    @property
    def proved(self) -> bool:
        return self.status is Status.EXISTENCE_PROVED


def gamma(a: Interval, b: Interval, dom: Interval) -> Interval:
    """Hull of ``{x in dom : a*x = b for some a in [a], b in [b]}``."""
    if a.is_empty or b.is_empty or dom.is_empty:
        return EMPTY
    if not a.lo <= 0.0 <= a.hi:
        return intersect(div(b, a), dom)
    out = EMPTY
    for piece in extended_divide(b, a):
        out = hull(out, intersect(piece, dom))
    return out


def gauss_seidel(
    A: Sequence[Sequence[Interval]],
    b: Sequence[Interval],
    x: Sequence[Interval],
    z: Sequence[Interval],
) -> IntervalVector:
    """One interval Gauss-Seidel sweep with an explicit intersection domain ``z``.

    Rows are processed in order and each row uses the components already
    updated by the previous rows. Passing ``z`` equal to the whole space
    switches off the intersection with the domain.
    """
    n = len(b)
    if len(A) != n or len(x) != n or len(z) != n:
        raise ValueError("dimension mismatch in Gauss-Seidel")
    new = list(x)
    for i in range(n):
        rhs = b[i]
        for j in range(n):
            if j != i:
                rhs = sub(rhs, mul(A[i][j], new[j]))
        xi = gamma(A[i][i], rhs, z[i])
        if xi.is_empty:
            return IntervalVector.empty(n)
        new[i] = xi
    return IntervalVector(new)


def _shift(v: Sequence[Interval], t: Sequence[float]) -> IntervalVector:
    return IntervalVector(sub(c, Interval(float(s), float(s))) for c, s in zip(v, t))


def _unshift(v: IntervalVector, t: Sequence[float]) -> IntervalVector:
    if v.is_empty:
        return IntervalVector.empty(len(v))
    return IntervalVector(add(c, Interval(float(s), float(s))) for c, s in zip(v, t))


def hansen_sengupta(
    X: Sequence[Sequence[Interval]],
    y: Sequence[Interval],
    x: Sequence[Interval],
    z: Sequence[Interval],
    xt: Sequence[float],
) -> IntervalVector:
    """``xt + GaussSeidel(X, -y, x - xt, z - xt)``.

    The exact image lies in ``z``; intersecting with ``z`` again removes the
    few ulps the outward-rounded translations add.
    """
    neg_y = IntervalVector(-c for c in y)
    gs = gauss_seidel(X, neg_y, _shift(x, xt), _shift(z, xt))
    out = _unshift(gs, xt)
    if out.is_empty:
        return out
    clipped = IntervalVector(intersect(u, v) for u, v in zip(out, z))
    return IntervalVector.empty(len(out)) if clipped.is_empty else clipped


def krawczyk_kernel(
    A: Sequence[Sequence[Interval]], b: Sequence[Interval], x: Sequence[Interval]
) -> IntervalVector:
    """``b + (I - A) x`` with ``I`` the real identity."""
    n = len(b)
    one = Interval(1.0, 1.0)
    i_minus_a = [[sub(one, A[i][j]) if i == j else -A[i][j] for j in range(n)] for i in range(n)]
    prod = iv_mat_vec(i_minus_a, x)
    return IntervalVector(add(bi, pi) for bi, pi in zip(b, prod))


def residual_enclosure(
    sys: ParametricSystem,
    a_box: Sequence[Interval],
    at: Sequence[float],
    xt: Sequence[float],
    C: np.ndarray,
) -> IntervalVector:
    """Enclosure of ``{C f(a, xt) : a in a_box}``.

    Computed as ``C [f](at, xt) + (C [A]) (a_box - at)`` with
    ``[A] = [df/da](a_box, xt)``; the product ``C [A]`` is formed first.
    """
    a_pt = IntervalVector.point(at)
    x_pt = IntervalVector.point(xt)
    f_mid = eval_f(sys, a_pt, x_pt)
    A = eval_jac_a(sys, a_box, x_pt)
    CA = real_mat_iv_mat(C, A)
    spread = iv_mat_vec(CA, _shift(a_box, at))
    return IntervalVector(add(u, v) for u, v in zip(real_mat_iv_vec(C, f_mid), spread))


def _prepare(sys: ParametricSystem, a_box, x):
    x = IntervalVector(x)
    a_box = IntervalVector(a_box)
    xt = x.mid()
    at = a_box.mid()
    X = eval_jac_x(sys, a_box, x)
    C = mat_inverse(X.mid())
    y = residual_enclosure(sys, a_box, at, xt, C)
    return x, xt, real_mat_iv_mat(C, X), y


def _outcome(box: IntervalVector, reference: IntervalVector) -> ContractionOutcome:
    if box.is_empty:
        return ContractionOutcome(IntervalVector.empty(len(box)), Status.EMPTY)
    if check_existence(box, reference):
        return ContractionOutcome(box, Status.EXISTENCE_PROVED)
    return ContractionOutcome(box, Status.CONTRACTED)


def parametric_hs(sys: ParametricSystem, a_box, x, z) -> ContractionOutcome:
    """Preconditioned parametric Hansen-Sengupta step.

    Every ``x`` in the input box solving ``f(a, x) = 0`` for some ``a`` in
    ``a_box`` is kept. Status ``EXISTENCE_PROVED`` means the image is a
    non-empty subset of the interior of ``x``, so ``f(a, .)`` has a unique
    zero in the returned box for each ``a`` in ``a_box``.
    """
    try:
        x, xt, CX, y = _prepare(sys, a_box, x)
    except PreconditionerSingular:
        return ContractionOutcome(IntervalVector(x), Status.PRECONDITIONER_SINGULAR)
    return _outcome(hansen_sengupta(CX, y, x, z, xt), x)


def parametric_krawczyk(sys: ParametricSystem, a_box, x, cfg: OperatorConfig = OperatorConfig()) -> ContractionOutcome:
    try:
        x, xt, CX, y = _prepare(sys, a_box, x)
    except PreconditionerSingular:
        return ContractionOutcome(IntervalVector(x), Status.PRECONDITIONER_SINGULAR)
    image = _unshift(krawczyk_kernel(CX, IntervalVector(-c for c in y), _shift(x, xt)), xt)
    if cfg.krawczyk_intersect:
        image = IntervalVector(intersect(u, v) for u, v in zip(image, x))
    return _outcome(image, x)


def apply_operator(
    sys: ParametricSystem, a_box, x, cfg: OperatorConfig, z: Sequence[Interval] | None = None
) -> ContractionOutcome:
    """Dispatch on ``cfg.operator``; ``z`` defaults to ``x`` for Hansen-Sengupta."""
    if cfg.operator is Operator.HANSEN_SENGUPTA:
        return parametric_hs(sys, a_box, x, x if z is None else z)
    return parametric_krawczyk(sys, a_box, x, cfg)


def check_existence(result: Sequence[Interval], reference: Sequence[Interval]) -> bool:
    """Non-empty ``result`` strictly inside ``reference`` in every component."""
    if any(c.is_empty for c in result):
        return False
    return all(r.interior_subset(ref) for r, ref in zip(result, reference))


def whole_space(n: int) -> IntervalVector:
    return IntervalVector([ENTIRE] * n)


__all__ = [
    "Status",
    "Operator",
    "OperatorConfig",
    "ContractionOutcome",
    "gamma",
    "gauss_seidel",
    "hansen_sengupta",
    "krawczyk_kernel",
    "residual_enclosure",
    "parametric_hs",
    "parametric_krawczyk",
    "apply_operator",
    "check_existence",
    "whole_space",
]
