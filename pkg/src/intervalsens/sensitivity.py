"""Iteration drivers: plain refinement, operator comparison, epsilon-inflation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .contractors import (
    ContractionOutcome,
    Operator,
    OperatorConfig,
    Status,
    apply_operator,
    check_existence,
    whole_space,
)
from .expressions import ParametricSystem
from .interval import Interval, IntervalVector, mid, wid


def width_norm(box: Sequence[Interval]) -> float:
    """Max-norm of the componentwise widths; ``inf`` for unbounded boxes."""
    if any(c.is_empty for c in box):
        raise ValueError("width norm of an empty box is undefined")
    return max(wid(c) for c in box)


@dataclass(frozen=True)
class StepRecord:
    k: int
    box: IntervalVector
    width_norm: float | None  # None when the box is empty
    existence: bool
    status: Status | None = None


@dataclass
class IterationTrace:
    steps: list[StepRecord] = field(default_factory=list)
    final_status: Status = Status.CONTRACTED
    converged: bool = False

    @property
    def existence_step(self) -> int | None:
        for s in self.steps:
            if s.existence:
                return s.k
        return None

    @property
    def final_box(self) -> IntervalVector:
        return self.steps[-1].box

    @property
    def iterations(self) -> int:
        return sum(1 for s in self.steps if s.k >= 1)

    def record(self, k: int, box: IntervalVector, existence: bool, status: Status | None = None) -> None:
        w = None if box.is_empty else width_norm(box)
        self.steps.append(StepRecord(k, box, w, existence, status))


def _final_status(trace: IterationTrace, last: Status) -> Status:
    if last is Status.EMPTY:
        return Status.EMPTY
    if trace.existence_step is not None:
        return Status.EXISTENCE_PROVED
    return last


def refine(
    sys: ParametricSystem,
    a_box: Sequence[Interval],
    x0: Sequence[Interval],
    cfg: OperatorConfig = OperatorConfig(),
    max_iter: int = 50,
) -> IterationTrace:
    """Iterate one parametric operator from ``x0``.

    Hansen-Sengupta is applied as ``H(x_k, x_k)``; Krawczyk as ``K(x_k)``.
    Stops after ``max_iter`` steps, on an empty box, on a singular
    preconditioner, or as soon as a step leaves the box bit-identical.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    x = IntervalVector(x0)
    if x.is_empty or not x.is_bounded:
        raise ValueError("the starting box must be bounded and non-empty")
    trace = IterationTrace()
    trace.record(0, x, False)
    last = Status.CONTRACTED
    for k in range(1, max_iter + 1):
        out: ContractionOutcome = apply_operator(sys, a_box, x, cfg)
        last = out.status
        if out.status is Status.PRECONDITIONER_SINGULAR:
            break
        trace.record(k, out.box, out.proved, out.status)
        if out.status is Status.EMPTY:
            break
        if out.box == x:
            trace.converged = True
            break
        x = out.box
    trace.final_status = _final_status(trace, last)
    return trace


@dataclass(frozen=True)
class CompareRow:
    k: int
    hs_width: float
    kr_width: float
    ratio: float


def _relative_excess(kr: float, hs: float) -> float:
    if hs == 0.0:
        return 0.0 if kr == 0.0 else math.inf
    return (kr - hs) / hs


def compare_operators(
    sys: ParametricSystem,
    a_box: Sequence[Interval],
    x0: Sequence[Interval],
    max_iter: int = 30,
    krawczyk_intersect: bool = False,
) -> list[CompareRow]:
    """Width ratio ``(|wid y_k| - |wid x_k|) / |wid x_k|`` per step.

    ``x_k`` is the Hansen-Sengupta iterate and ``y_k`` the Krawczyk one,
    both started from ``x0``. A trace that stopped at a fixed point keeps
    its last box for the remaining steps.
    """
    hs = refine(sys, a_box, x0, OperatorConfig(Operator.HANSEN_SENGUPTA), max_iter)
    kr = refine(sys, a_box, x0, OperatorConfig(Operator.KRAWCZYK, krawczyk_intersect), max_iter)
    hs_w, kr_w = _padded_widths(hs, max_iter), _padded_widths(kr, max_iter)
    rows = []
    for k, (h, y) in enumerate(zip(hs_w, kr_w)):
        rows.append(CompareRow(k, h, y, _relative_excess(y, h)))
    return rows


def _padded_widths(trace: IterationTrace, max_iter: int) -> list[float]:
    widths = [s.width_norm for s in trace.steps if s.width_norm is not None]
    if trace.converged:
        widths += [widths[-1]] * (max_iter + 1 - len(widths))
    return widths


@dataclass(frozen=True)
class InflationConfig:
    k_max: int = 10
    delta: float = 1.01
    freeze_after_success: bool = True

    def __post_init__(self) -> None:
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if not self.delta > 1.0:
            raise ValueError("delta must exceed 1")


@dataclass
class InflationResult:
    trace: IterationTrace
    result: IntervalVector
    success: bool


def inflate(box: IntervalVector, delta: float) -> IntervalVector:
    """``mid(x) + delta * (x - mid(x))`` with outward rounding."""
    d = Interval(delta, delta)
    out = []
    for c in box:
        m = Interval.point(mid(c))
        out.append(m + d * (c - m))
    return IntervalVector(out)


def inflate_and_prove(
    sys: ParametricSystem,
    a_box: Sequence[Interval],
    x_star: Sequence[float],
    cfg: InflationConfig = InflationConfig(),
    op_cfg: OperatorConfig = OperatorConfig(),
) -> InflationResult:
    """Epsilon-inflation from an approximate solution ``x_star``.

    Each step inflates the current box about its midpoint by ``delta``,
    applies the parametric operator with the whole space as domain, and
    checks strict interior inclusion in the inflated box. Once that check
    has succeeded (and ``freeze_after_success`` is set) inflation stops and
    the iteration keeps contracting. Without any success the whole space is
    returned.
    """
    n = sys.n
    if len(x_star) != n or not all(math.isfinite(v) for v in x_star):
        raise ValueError("x_star must be a finite point of the right dimension")
    entire = whole_space(n)
    x = IntervalVector.point(x_star)
    trace = IterationTrace()
    trace.record(0, x, False)
    success = False
    last = Status.CONTRACTED
    for k in range(1, cfg.k_max + 1):
        if x.is_empty or not x.is_bounded:
            # nothing left to inflate; the remaining steps cannot succeed
            trace.record(k, x, False, last)
            continue
        x_in = x if (success and cfg.freeze_after_success) else inflate(x, cfg.delta)
        out = apply_operator(sys, a_box, x_in, op_cfg, z=entire)
        last = out.status
        x = out.box
        ok = check_existence(x, x_in)
        if ok:
            success = True
        trace.record(k, x, ok, out.status)
    trace.final_status = Status.EXISTENCE_PROVED if success else _final_status(trace, last)
    return InflationResult(trace, x if success else entire, success)


__all__ = [
    "width_norm",
    "StepRecord",
    "IterationTrace",
    "refine",
    "CompareRow",
    "compare_operators",
    "InflationConfig",
    "InflationResult",
    "inflate",
    "inflate_and_prove",
]
