import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from equiosc.examples import identity23
from equiosc.fields import PiecewiseField, constant, example71_field, linear, tilde_field, zero_field
from equiosc.kernels import log_sine, smooth, zero_kernel
from equiosc.sumtrans import (
    OutsideAdmissibleSet,
    F_eval,
    Problem,
    arc_maxima,
    f_eval,
    gtp_weighted_norm,
    interval_maxima,
    m_bar_star,
    m_under_star,
    phi_star,
)
from equiosc.torus import cut_lift, dist, wrap

LOG2 = math.log(2.0)
unit = st.floats(0.0, 1.0, exclude_max=True)


def _separated(ys, gap=1e-3):
    # very short arcs are ill-conditioned: curvature ~ 1/length^2
    return all(dist(a, b) >= gap for i, a in enumerate(ys) for b in ys[i + 1:])


def test_problem_validation():
    with pytest.raises(ValueError, match="nu must be positive"):
        Problem(log_sine(), (1.0, -1.0), zero_field())
    from equiosc.fields import minus_infinity

    thin = PiecewiseField((minus_infinity(0.0, 1.0),), overrides=((0.1, 0.0), (0.2, 0.0)))
    with pytest.raises(ValueError):
        Problem(log_sine(), (1.0, 1.0), thin)


def test_f_and_F_examples(p71):
    y = (0.25, 0.75)
    assert f_eval(p71, y, 0.5) == pytest.approx(-LOG2, abs=1e-15)
    assert F_eval(p71, y, 0.5) == pytest.approx(-LOG2, abs=1e-15)
    assert f_eval(p71, y, 0.25) == -math.inf
    assert F_eval(p71, y, 0.3) == -math.inf
    pz = Problem(zero_kernel(), (1.0, 2.0), zero_field())
    assert f_eval(pz, (0.1, 0.6), 0.33) == 0.0


def test_zero_field_F_equals_f(p_zero2):
    for t in np.linspace(0.01, 0.99, 17):
        assert F_eval(p_zero2, (0.2, 0.9), t) == f_eval(p_zero2, (0.2, 0.9), t)


def test_arc_maxima_example71_maximin_pair(p71):
    am = arc_maxima(p71, (0.25, 0.75))
    assert am.values == pytest.approx((-LOG2, -LOG2), abs=1e-13)
    assert am.maximizers == (0.5, 0.0)
    assert am.attained == (True, True)


def test_arc_maxima_example71_minimax_pair(p71):
    am = arc_maxima(p71, (7 / 12, 11 / 12))
    assert am.values == pytest.approx((-2 * LOG2, -2 * LOG2), abs=1e-12)


def test_degenerate_arc_is_minus_inf(p71, p_zero2):
    am = arc_maxima(p_zero2, (0.3, 0.3))
    assert am.values[0] == -math.inf
    assert m_under_star(p_zero2, (0.3, 0.3)) == -math.inf
    with pytest.raises(OutsideAdmissibleSet):
        phi_star(p_zero2, (0.3, 0.3))


def test_open_end_supremum_not_attained():
    # J jumps up at 0.5 from the left, so sup over [0.3, 0.5) only approaches it
    J = PiecewiseField((linear(0.0, 0.5, 1.0, 0.0), constant(0.5, 1.0, -5.0)))
    p = Problem(zero_kernel(), (1.0, 1.0), J)
    am = arc_maxima(p, (0.3, 0.7))
    assert am.values[0] == pytest.approx(0.5, abs=1e-15)
    assert am.attained[0] is False
    assert am.maximizers[0] == 0.5


def test_arc_maxima_rejects_unordered(p71):
    with pytest.raises(ValueError):
        arc_maxima(p71, (0.1, 0.5, 0.3))


def test_m_bar_examples(p71, p54):
    assert m_bar_star(p71, (0.25, 0.75)) == pytest.approx(-LOG2, abs=1e-13)
    p1 = Problem(log_sine(), (1.0,), zero_field())
    for y in (0.0, 0.37, 0.9):
        assert m_bar_star(p1, (y,)) == pytest.approx(0.0, abs=1e-15)
    for y in ((0.1, 0.2), (0.0, 0.5), (0.3, 0.95)):
        assert m_bar_star(p54, y) == 0.99


def test_m_under_harmonic(p54):
    for l in (2, 3, 10, 57, 100):
        assert m_under_star(p54, (0.0, 1.0 / l)) == 1.0 - 1.0 / l


def test_phi_star(p71):
    assert phi_star(p71, (0.25, 0.75)) == pytest.approx([0.0], abs=1e-13)
    assert abs(phi_star(p71, (0.5, 0.75))[0]) > 1e-3


def test_gtp_norm():
    assert gtp_weighted_norm(zero_field(), (1.0,), (0.2,)) == pytest.approx(1.0, abs=1e-14)
    assert gtp_weighted_norm(zero_field(), (1.0, 1.0), (0.0, 0.5)) == pytest.approx(0.5, abs=1e-14)
    assert gtp_weighted_norm(example71_field(), (1.0, 1.0), (7 / 12, 11 / 12)) == pytest.approx(0.25, abs=1e-12)


def test_values_bounded_by_sups(p71):
    rng = np.random.default_rng(4)
    bound = p71.field.sup() + sum(p71.nu) * 0.0
    for _ in range(200):
        y = tuple(np.sort(rng.uniform(size=2)))
        assert max(arc_maxima(p71, y).values) <= bound + 1e-15


@settings(max_examples=60, deadline=None)
@given(st.lists(unit, min_size=2, max_size=4, unique=True), unit)
def test_cut_consistency_and_arc_correspondence(ys, c):
    ys = sorted(ys)
    assume(_separated(ys))
    if min(dist(c, y) for y in ys) < 1e-6:
        return
    p = Problem(log_sine(), tuple(1.0 + 0.5 * i for i in range(len(ys))), tilde_field(15.0))
    x = [cut_lift(c, y) for y in ys]
    order = sorted(range(len(ys)), key=lambda i: x[i])
    y_rot = tuple(ys[i] for i in order)
    p_rot = Problem(p.kernel, tuple(p.nu[i] for i in order), p.field)
    star = arc_maxima(p_rot, y_rot).values
    m = interval_maxima(p_rot, c, [x[i] for i in order])
    n = len(ys)
    for k in range(n - 1):
        assert star[k] == pytest.approx(m[k + 1], abs=1e-10)
    assert star[n - 1] == pytest.approx(max(m[0], m[n]), abs=1e-10)
    assert max(star) == pytest.approx(max(m), abs=1e-10)


def test_interval_maxima_example():
    p = Problem(log_sine(), (1.0, 1.0), example71_field())
    m = interval_maxima(p, 0.1, [0.15, 0.65])
    assert m[0] == -math.inf
    assert m[1:] == pytest.approx([-LOG2, -LOG2], abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(unit, min_size=1, max_size=4), st.floats(-3.0, 3.0))
def test_rotation_equivariance_constant_field(ys, s):
    ys = sorted(ys)
    assume(_separated(ys))
    J = PiecewiseField((constant(0.0, 1.0, 0.7),))
    p = Problem(log_sine(), tuple(1.0 for _ in ys), J)
    a = arc_maxima(p, ys).values
    b = arc_maxima(p, [wrap(y + s) for y in ys]).values
    for u, v in zip(a, b):
        assert (u == v == -math.inf) or u == pytest.approx(v, abs=1e-10)


def test_sum_of_translates_concave_inside_arcs():
    rng = np.random.default_rng(5)
    h = 1e-5
    for K in (log_sine(), smooth(log_sine(), 0.1, "lower")):
        for _ in range(100):
            n = int(rng.integers(1, 5))
            y = tuple(np.sort(rng.uniform(size=n)))
            p = Problem(K, tuple(rng.uniform(0.5, 2.0, size=n)), zero_field())
            from equiosc.torus import arcs_of

            for arc in arcs_of(y):
                if arc.length < 1e-3:
                    continue
                for u in rng.uniform(2 * h, arc.length - 2 * h, size=5):
                    t = arc.start + u
                    d2 = f_eval(p, y, t + h) - 2 * f_eval(p, y, t) + f_eval(p, y, t - h)
                    assert d2 <= 1e-6


def test_identity_oracle(p_zero2):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(2000):
        y = tuple(np.sort(rng.uniform(size=2)))
        t = float(rng.uniform())
        if min(dist(t, v) for v in y) < 1e-3:
            continue
        x, z = y[0] + y[1], y[1] - y[0]
        worst = max(worst, abs(f_eval(p_zero2, y, t) - identity23(x, z, t)))
    assert worst <= 1e-12


def test_continuity_of_m_bar(p71):
    rng = np.random.default_rng(7)
    for _ in range(300):
        y = tuple(np.sort(rng.uniform(size=2)))
        y2 = tuple(wrap(v + d) for v, d in zip(y, rng.uniform(-1e-6, 1e-6, size=2)))
        from equiosc.torus import cyclic_order

        if not cyclic_order(y2).ordered:
            continue
        assert abs(m_bar_star(p71, y) - m_bar_star(p71, y2)) <= 1e-3


def test_to_dict_encodes_minus_inf(p_zero2):
    d = arc_maxima(p_zero2, (0.3, 0.3)).to_dict()
    assert d["values"][0] == "-inf"
