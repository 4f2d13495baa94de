import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intervalsens.contractors import (
    Operator,
    OperatorConfig,
    Status,
    apply_operator,
    check_existence,
    gamma,
    gauss_seidel,
    hansen_sengupta,
    krawczyk_kernel,
    parametric_hs,
    parametric_krawczyk,
    residual_enclosure,
    whole_space,
)
from intervalsens.expressions import parse_problem, point_eval
from intervalsens.interval import EMPTY, ENTIRE, Interval, IntervalVector, div, intersect, mat_inverse

from oracles import newton_solutions, random_params, sample_gamma

I = Interval
ETA = 1e-12
R2 = [ENTIRE, ENTIRE]


def test_gamma_examples():
    assert gamma(I(1, 1), I(2, 2), I(0, 10)) == I(2, 2)
    assert gamma(I(1, 2), I(2, 4), I(0, 10)) == I(1, 4)
    assert gamma(I(-1, 2), I(2, 2), I(0, 10)) == I(1, 10)


def test_gamma_zero_in_both():
    assert gamma(I(-1, 1), I(-1, 1), I(-3, 5)) == I(-3, 5)


def test_gamma_no_solution():
    assert gamma(I(0, 0), I(1, 2), I(-5, 5)).is_empty
    assert gamma(I(1, 2), I(2, 4), I(5, 6)).is_empty
    assert gamma(I(1, 1), EMPTY, I(0, 1)).is_empty


def test_gamma_split_pieces_hulled_within_domain():
    # pieces (-inf,-2] and [1,inf) both meet the domain; the hull bridges the gap
    assert gamma(I(-1, 2), I(2, 2), I(-3, 3)) == I(-3, 3)


def test_gauss_seidel_identity_without_intersection():
    A = [[I(1, 1), I(0, 0)], [I(0, 0), I(1, 1)]]
    b = [I(1, 2), I(3, 4)]
    assert gauss_seidel(A, b, [I(-100, 100), I(7, 8)], R2) == IntervalVector([I(1, 2), I(3, 4)])


def test_gauss_seidel_identity_with_domain():
    A = [[I(1, 1), I(0, 0)], [I(0, 0), I(1, 1)]]
    b = [I(1, 2), I(3, 4)]
    z = [I(0, 1.5), I(0, 10)]
    assert gauss_seidel(A, b, z, z) == IntervalVector([I(1, 1.5), I(3, 4)])


def test_gauss_seidel_sequential_rows():
    A = [[I(1, 1), I(0.5, 0.5)], [I(0, 0), I(1, 1)]]
    b = [I(2, 2), I(1, 1)]
    x = [I(-10, 10), I(-10, 10)]
    assert gauss_seidel(A, b, x, x) == IntervalVector([I(-3, 7), I(1, 1)])


def test_gauss_seidel_uses_updated_components():
    # row 2 depends on x1 which row 1 pins to [1,1]
    A = [[I(1, 1), I(0, 0)], [I(1, 1), I(1, 1)]]
    b = [I(1, 1), I(3, 3)]
    x = [I(-10, 10), I(-10, 10)]
    assert gauss_seidel(A, b, x, x) == IntervalVector([I(1, 1), I(2, 2)])


def test_gauss_seidel_empty_row_short_circuits():
    A = [[I(1, 1), I(0, 0)], [I(0, 0), I(1, 1)]]
    out = gauss_seidel(A, [I(5, 6), I(0, 0)], [I(0, 1), I(0, 1)], [I(0, 1), I(0, 1)])
    assert out.is_empty and len(out) == 2


def test_gauss_seidel_dimension_mismatch():
    with pytest.raises(ValueError):
        gauss_seidel([[I(1, 1)]], [I(1, 1), I(1, 1)], [I(0, 1)], [I(0, 1)])


def test_gauss_seidel_domain_superset_matches_whole_space():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = 3
        A = [[_rand_iv(rng, 2.0 if i == j else 0.3, 0.2) for j in range(n)] for i in range(n)]
        for i in range(n):
            A[i][i] = I(abs(A[i][i].lo) + 1, abs(A[i][i].lo) + 1.5)
        b = [_rand_iv(rng, 1.0, 0.5) for _ in range(n)]
        x = [_rand_iv(rng, 2.0, 1.0) for _ in range(n)]
        free = gauss_seidel(A, b, x, [ENTIRE] * n)
        sup = IntervalVector(I(c.lo - 1.0, c.hi + 1.0) for c in free)
        assert gauss_seidel(A, b, x, sup) == free


def _rand_iv(rng, scale, width):
    c = rng.uniform(-scale, scale)
    r = rng.uniform(0, width)
    return I(c - r, c + r)


def test_hansen_sengupta_linear_exact_step():
    c = 0.375
    for xt in (c - 0.5, c, c + 0.75):
        y = [I(xt - c, xt - c)]
        out = hansen_sengupta([[I(1, 1)]], y, [I(c - 1, c + 1)], [ENTIRE], [xt])
        assert out == IntervalVector([I(c, c)])


def test_hansen_sengupta_zero_residual_fixed_point():
    X = [[I(1, 1), I(0, 0)], [I(0, 0), I(1, 1)]]
    x = [I(-1, 3), I(2, 5)]
    xt = [1.0, 3.5]
    out = hansen_sengupta(X, [I(0, 0), I(0, 0)], x, x, xt)
    assert out == IntervalVector.point(xt)


def test_hansen_sengupta_empty_propagates():
    out = hansen_sengupta([[I(1, 1)]], [I(-10, -9)], [I(-1, 1)], [I(-1, 1)], [0.0])
    assert out.is_empty


def test_krawczyk_kernel_examples():
    eye = [[I(1, 1), I(0, 0)], [I(0, 0), I(1, 1)]]
    zero = [[I(0, 0), I(0, 0)], [I(0, 0), I(0, 0)]]
    b = [I(1, 2), I(3, 4)]
    assert krawczyk_kernel(eye, b, [I(-9, 9), I(-9, 9)]) == IntervalVector(b)
    x = [I(1, 2), I(3, 4)]
    assert krawczyk_kernel(zero, [I(0, 0), I(0, 0)], x) == IntervalVector(x)
    A = [[I(0.5, 1.5), I(0, 0)], [I(0, 0), I(1, 1)]]
    out = krawczyk_kernel(A, [I(0, 0), I(0, 0)], [I(-1, 1), I(-2, 2)])
    assert out == IntervalVector([I(-0.5, 0.5), I(0, 0)])


def test_residual_enclosure_linear(linear):
    sys = linear.system
    y = residual_enclosure(sys, [I(0, 1)], [0.5], [0.5], np.array([[1.0]]))
    assert y == IntervalVector([I(-0.5, 0.5)])


def test_residual_enclosure_degenerate_parameters(example1):
    sys = example1.system
    at = [0.5, 0.0, 1.0]
    xt = [0.0, 0.2]
    C = np.array([[0.25, -0.5], [1.0, 2.0]])
    y = residual_enclosure(sys, IntervalVector.point(at), at, xt, C)
    f = np.array([point_eval(e, at, xt) for e in sys.f])
    ref = C @ f
    for c, v in zip(y, ref):
        assert c.lo <= v <= c.hi and c.hi - c.lo < 1e-15


def test_residual_enclosure_example1_sampling(example1):
    sys = example1.system
    a_box = example1.param_box
    xt = np.array([0.0, 0.2])
    X_mid = np.array([[point_eval(e, a_box.mid(), xt) for e in row] for row in sys.jac_x])
    C = mat_inverse(X_mid)
    y = residual_enclosure(sys, a_box, a_box.mid(), xt, C)
    assert all(c.hi - c.lo > 0 for c in y)
    rng = np.random.default_rng(13)
    a = random_params(a_box, 10_000, rng)
    xcol = xt.reshape(2, 1)
    F = np.stack([np.broadcast_to(point_eval(e, a, xcol), (a.shape[1],)) for e in sys.f])
    CF = C @ F
    for c, row in zip(y, CF):
        assert c.lo <= row.min() and row.max() <= c.hi


def test_parametric_hs_linear(linear):
    out = parametric_hs(linear.system, linear.param_box, [I(-1, 1)], [ENTIRE])
    assert out.status is Status.EXISTENCE_PROVED
    assert out.box[0].lo >= 0.4 - ETA and out.box[0].hi <= 0.6 + ETA
    assert out.box[0].lo <= 0.4 and out.box[0].hi >= 0.6


def test_parametric_krawczyk_linear(linear):
    for intersect_flag in (False, True):
        out = parametric_krawczyk(linear.system, linear.param_box, [I(-1, 1)], OperatorConfig(Operator.KRAWCZYK, intersect_flag))
        assert out.status is Status.EXISTENCE_PROVED
        assert out.box[0].lo >= 0.4 - ETA and out.box[0].hi <= 0.6 + ETA


def test_parametric_operators_empty_when_no_solution():
    inst = parse_problem("vars x; params a in [0,1]; eq x - a;")
    out = parametric_hs(inst.system, inst.param_box, [I(5, 6)], [I(5, 6)])
    assert out.status is Status.EMPTY and out.box.is_empty


def test_preconditioner_singular_returns_box_unchanged():
    inst = parse_problem("vars x; params a in [0,1]; eq x^2 - a;")
    box = IntervalVector([I(-1, 1)])
    for cfg in (OperatorConfig(), OperatorConfig(Operator.KRAWCZYK)):
        out = apply_operator(inst.system, inst.param_box, box, cfg)
        assert out.status is Status.PRECONDITIONER_SINGULAR
        assert out.box == box


def test_krawczyk_intersect_flag_restricts_to_input(example1):
    box = IntervalVector([I(-0.2, 0.2), I(0.7, 1.1)])
    plain = parametric_krawczyk(example1.system, example1.param_box, box)
    clipped = parametric_krawczyk(example1.system, example1.param_box, box, OperatorConfig(Operator.KRAWCZYK, True))
    assert clipped.box == IntervalVector(intersect(u, v) for u, v in zip(plain.box, box))


def test_check_existence_examples():
    assert check_existence([I(0, 1), I(0, 1)], [I(-1, 2), I(-1, 2)])
    assert not check_existence([I(-1, 1)], [I(-1, 2)])
    assert not check_existence([EMPTY], [I(-1, 2)])
    assert not check_existence(IntervalVector.empty(2), [I(-1, 2), I(-1, 2)])
    assert not check_existence([I(0, 0)], [I(0, 0)])


def test_whole_space():
    assert whole_space(3) == IntervalVector([ENTIRE] * 3)


# --- oracle properties ---


def _random_gamma_instance(rng):
    kind = rng.integers(3)
    if kind == 0:  # a strictly positive or negative
        lo = rng.uniform(0.1, 3)
        a = I(lo, lo + rng.uniform(0, 3))
        if rng.random() < 0.5:
            a = -a
    elif kind == 1:  # 0 strictly inside a
        a = I(-rng.uniform(0.01, 3), rng.uniform(0.01, 3))
    else:  # 0 at an endpoint of a
        a = I(0.0, rng.uniform(0.1, 3)) if rng.random() < 0.5 else I(-rng.uniform(0.1, 3), 0.0)
    b = _rand_iv(rng, 4.0, 2.0)
    dom = _rand_iv(rng, 6.0, 6.0)
    return a, b, dom


def test_gamma_oracle_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        a, b, dom = _random_gamma_instance(rng)
        g = gamma(a, b, dom)
        xs = sample_gamma(a, b, dom, rng, count=60)
        if xs.size:
            assert not g.is_empty
            assert g.lo <= xs.min() and xs.max() <= g.hi


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-50, 50, allow_nan=False),
    st.floats(0, 50, allow_nan=False),
    st.floats(-50, 50, allow_nan=False),
    st.floats(0, 50, allow_nan=False),
)
def test_gamma_solution_preserved(a0, aw, x0, xw):
    # any x with a*x = b for a in [a] and x in dom survives
    a = I(a0, a0 + aw)
    dom = I(x0 - xw, x0 + xw)
    av, xv = a0 + aw / 2, x0
    bv = av * xv
    if not math.isfinite(bv):
        return
    g = gamma(a, I(bv, bv), dom)
    if av == 0:
        return
    q = Fraction(bv) / Fraction(av)
    if Fraction(dom.lo) <= q <= Fraction(dom.hi):
        assert not g.is_empty
        assert Fraction(g.lo) <= q <= Fraction(g.hi)


def test_gauss_seidel_preserves_solutions():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = 2
        M = rng.uniform(-1, 1, (n, n)) + 3 * np.eye(n)
        xs = rng.uniform(-2, 2, n)
        bs = M @ xs
        A = [[I(M[i, j] - 0.01, M[i, j] + 0.01) for j in range(n)] for i in range(n)]
        b = [I(v - 1e-9, v + 1e-9) for v in bs]
        x = [I(v - rng.uniform(0.1, 3), v + rng.uniform(0.1, 3)) for v in xs]
        out = gauss_seidel(A, b, x, x)
        assert out.contains_point(xs)


def test_parametric_hs_keeps_sampled_solutions(example1):
    sys = example1.system
    a_box = example1.param_box
    box = IntervalVector([I(-0.2, 0.2), I(0.7, 1.1)])
    rng = np.random.default_rng(1)
    a = random_params(a_box, 2000, rng)
    xs, ok = newton_solutions(sys, a, [0.0, 0.86])
    xs = xs[:, ok]
    cfg = OperatorConfig()
    for _ in range(6):
        out = apply_operator(sys, a_box, box, cfg)
        assert out.status is not Status.EMPTY
        for c, row in zip(out.box, xs):
            assert c.lo <= row.min() and row.max() <= c.hi
        box = out.box


def test_existence_status_agrees_with_check(example1):
    sys = example1.system
    a_box = example1.param_box
    start = IntervalVector([I(-0.2, 0.2), I(0.7, 1.1)])
    seen = 0
    for cfg in (OperatorConfig(), OperatorConfig(Operator.KRAWCZYK, True)):
        box = start
        for _ in range(8):
            out = apply_operator(sys, a_box, box, cfg)
            if out.status is Status.EXISTENCE_PROVED:
                assert check_existence(out.box, box)
                seen += 1
            else:
                assert not check_existence(out.box, box)
            box = out.box
    assert seen > 0


def test_gamma_sign_definite_matches_quotient():
    a, b, dom = I(2, 4), I(1, 3), I(-10, 10)
    assert gamma(a, b, dom) == intersect(div(b, a), dom)
