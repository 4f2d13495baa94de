import math

import numpy as np
import pytest

from intervalsens.contractors import Operator, OperatorConfig, Status, whole_space
from intervalsens.expressions import parse_problem
from intervalsens.interval import ENTIRE, Interval, IntervalVector
from intervalsens.sensitivity import (
    InflationConfig,
    compare_operators,
    inflate,
    inflate_and_prove,
    refine,
    width_norm,
)

from oracles import newton_solutions, random_params

I = Interval
ETA = 1e-12


def test_width_norm_examples():
    assert width_norm([I(-0.2, 0.2), I(-0.7, 1.1)]) == pytest.approx(1.8, abs=1e-15)
    assert width_norm(IntervalVector.point([1.0, 2.0])) == 0.0
    assert width_norm([I(0, 1), ENTIRE]) == math.inf
    with pytest.raises(ValueError):
        width_norm(IntervalVector.empty(2))


def test_refine_linear(linear):
    for cfg in (OperatorConfig(), OperatorConfig(Operator.KRAWCZYK)):
        trace = refine(linear.system, linear.param_box, [I(-1, 1)], cfg)
        assert trace.existence_step == 1
        assert trace.final_status is Status.EXISTENCE_PROVED
        assert trace.converged
        box = trace.final_box[0]
        assert 0.4 - ETA <= box.lo <= 0.4 and 0.6 <= box.hi <= 0.6 + ETA


def test_refine_records_initial_box(linear):
    trace = refine(linear.system, linear.param_box, [I(-1, 1)])
    first = trace.steps[0]
    assert (first.k, first.existence, first.width_norm) == (0, False, 2.0)


def test_refine_stops_on_empty():
    inst = parse_problem("vars x; params a in [0,1]; eq x - a;")
    trace = refine(inst.system, inst.param_box, [I(5, 6)])
    assert trace.final_status is Status.EMPTY
    assert trace.iterations == 1 and trace.steps[-1].width_norm is None


def test_refine_stops_on_singular_preconditioner():
    inst = parse_problem("vars x; params a in [0,1]; eq x^2 - a;")
    trace = refine(inst.system, inst.param_box, [I(-1, 1)])
    assert trace.final_status is Status.PRECONDITIONER_SINGULAR
    assert trace.iterations == 0


def test_refine_max_iter_respected(example1):
    trace = refine(example1.system, example1.param_box, [I(-0.2, 0.2), I(0.7, 1.1)], max_iter=2)
    assert trace.iterations <= 2


def test_refine_rejects_bad_start(linear):
    with pytest.raises(ValueError):
        refine(linear.system, linear.param_box, [ENTIRE])
    with pytest.raises(ValueError):
        refine(linear.system, linear.param_box, [I(0, 1)], max_iter=0)


def test_hs_refinement_is_monotone(example1):
    for start in (example1.initial_box, IntervalVector([I(-0.2, 0.2), I(0.7, 1.1)])):
        trace = refine(example1.system, example1.param_box, start)
        for prev, cur in zip(trace.steps, trace.steps[1:]):
            assert cur.box.subset(prev.box)


def test_hs_iterates_keep_all_solutions(example1):
    sys, a_box = example1.system, example1.param_box
    rng = np.random.default_rng(21)
    a = random_params(a_box, 3000, rng)
    xs, ok = newton_solutions(sys, a, [0.0, 0.86])
    xs = xs[:, ok]
    trace = refine(sys, a_box, [I(-0.2, 0.2), I(0.7, 1.1)])
    for s in trace.steps:
        for c, row in zip(s.box, xs):
            assert c.lo <= row.min() and row.max() <= c.hi


def test_compare_first_row_is_zero(example1):
    rows = compare_operators(example1.system, example1.param_box, example1.initial_box, max_iter=5)
    assert rows[0].k == 0 and rows[0].ratio == 0.0
    assert rows[0].hs_width == rows[0].kr_width == pytest.approx(1.8)


def test_compare_pads_converged_traces(linear):
    rows = compare_operators(linear.system, linear.param_box, [I(-1, 1)], max_iter=6)
    assert [r.k for r in rows] == list(range(7))
    assert all(r.ratio == pytest.approx(0.0, abs=1e-12) for r in rows)


def test_inflate_about_midpoint():
    out = inflate(IntervalVector([I(0, 2), I(-1, 1)]), 1.5)
    assert out[0].lo <= -0.5 and out[0].hi >= 2.5
    assert out[0].lo == pytest.approx(-0.5) and out[1].hi == pytest.approx(1.5)
    pt = IntervalVector.point([0.25])
    assert inflate(pt, 1.01) == pt


def test_inflation_config_validation():
    with pytest.raises(ValueError):
        InflationConfig(k_max=0)
    with pytest.raises(ValueError):
        InflationConfig(delta=1.0)


def test_inflation_linear(linear):
    res = inflate_and_prove(linear.system, linear.param_box, [0.5])
    assert res.success
    # the start box is a point with empty interior, so step 1 cannot pass the test
    assert res.trace.existence_step == 2
    assert res.result[0].lo <= 0.4 and res.result[0].hi >= 0.6
    assert res.trace.iterations == 10


def test_inflation_fallback_returns_whole_space(example2):
    wide = IntervalVector(I(c.lo - 5, c.hi + 5) for c in example2.param_box)
    res = inflate_and_prove(example2.system, wide, example2.nominal_point)
    assert not res.success
    assert res.result == whole_space(2)
    assert res.trace.iterations == 10


def test_inflation_frozen_iterates_are_nested(example2):
    for op in (Operator.HANSEN_SENGUPTA, Operator.KRAWCZYK):
        res = inflate_and_prove(
            example2.system, example2.param_box, example2.nominal_point, InflationConfig(k_max=15), OperatorConfig(op)
        )
        assert res.success
        after = [s for s in res.trace.steps if s.k >= res.trace.existence_step]
        for prev, cur in zip(after, after[1:]):
            assert cur.box.subset(prev.box)


def test_inflation_without_freeze_keeps_inflating(example2):
    cfg = InflationConfig(k_max=12, freeze_after_success=False)
    res = inflate_and_prove(example2.system, example2.param_box, example2.nominal_point, cfg)
    frozen = inflate_and_prove(example2.system, example2.param_box, example2.nominal_point, InflationConfig(k_max=12))
    assert res.trace.existence_step == frozen.trace.existence_step
    assert res.success


def test_inflation_records_singular_steps():
    inst = parse_problem("vars x; params a in [0,1]; eq x^2 - a;")
    res = inflate_and_prove(inst.system, inst.param_box, [0.0], InflationConfig(k_max=3))
    assert not res.success
    assert res.trace.iterations == 3
    assert all(s.status is Status.PRECONDITIONER_SINGULAR for s in res.trace.steps[1:])


def test_inflation_rejects_bad_point(linear):
    with pytest.raises(ValueError):
        inflate_and_prove(linear.system, linear.param_box, [math.nan])
    with pytest.raises(ValueError):
        inflate_and_prove(linear.system, linear.param_box, [0.5, 0.5])


def test_determinism(example1, example2):
    a = refine(example1.system, example1.param_box, example1.initial_box, OperatorConfig(Operator.KRAWCZYK))
    b = refine(example1.system, example1.param_box, example1.initial_box, OperatorConfig(Operator.KRAWCZYK))
    assert a == b
    r1 = inflate_and_prove(example2.system, example2.param_box, example2.nominal_point)
    r2 = inflate_and_prove(example2.system, example2.param_box, example2.nominal_point)
    assert r1 == r2
