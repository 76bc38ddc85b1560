import math

import numpy as np
import pytest

from equiosc.examples import (
    Branch,
    beta0,
    branch_of,
    coverage_gap,
    equi_value_of_x,
    equi_z_of_x,
    identity23,
    lambda_sweep,
    nodes_of,
    reproduce_example54,
    reproduce_example71,
    reproduce_example72,
)
from equiosc.solvers import SolveConfig, solve_equioscillation
from equiosc.sumtrans import arc_maxima

LOG2 = math.log(2.0)


def test_identity23_examples():
    assert identity23(1.0, 0.5, 0.5) == pytest.approx(-LOG2, abs=1e-15)
    assert identity23(1.5, 1 / 3, 0.0) == pytest.approx(-2 * LOG2, abs=1e-15)
    # t = (x - z)/2 is a node; values chosen so the cosines cancel exactly
    assert identity23(1.0, 0.5, 0.25) == -math.inf


def test_beta0():
    b = beta0()
    assert b == pytest.approx(0.6081734479693927, abs=1e-15)
    assert abs(math.cos(math.pi * b) + 1 / 3) <= 1e-15
    assert 1 + b == pytest.approx(1.608, abs=1e-3)


@pytest.mark.parametrize("x, z", [(1.5, 1 / 3), (1.0, 0.5)])
def test_z_of_x_extremal_points(x, z):
    assert equi_z_of_x(x) == pytest.approx(z, abs=1e-12)


def test_z_of_x_mid_branch():
    assert equi_z_of_x(1.2) == pytest.approx(math.acos((1 + math.cos(1.2 * math.pi)) / 2) / math.pi, abs=1e-15)


def test_branches():
    b = beta0()
    assert branch_of(b) is Branch.LOW
    assert branch_of(1.0) is Branch.MID
    assert branch_of(1.5) is Branch.HIGH
    assert branch_of(1 + b) is Branch.HIGH
    for x in (b - 1e-6, 1 + b + 1e-6, 0.2, 1.9):
        with pytest.raises(ValueError):
            equi_z_of_x(x)
        with pytest.raises(ValueError):
            equi_value_of_x(x)


def test_value_of_x():
    assert equi_value_of_x(1.5) == pytest.approx(-2 * LOG2, abs=1e-15)
    assert equi_value_of_x(1.0) == pytest.approx(-LOG2, abs=1e-15)
    exact = -2 * LOG2 + math.log(1 - math.cos(1.2 * math.pi))
    assert equi_value_of_x(1.2) == exact
    assert exact == pytest.approx(-0.793437, abs=1e-4)


def test_value_continuous_at_joints():
    for x in (1.0, 1.5):
        assert equi_value_of_x(x - 1e-12) == pytest.approx(equi_value_of_x(x), abs=1e-9)


def test_extremes_of_lambda():
    b = beta0()
    xs = np.linspace(b, 1 + b, 1001)
    lam = [equi_value_of_x(float(x)) for x in xs]
    assert min(lam) >= -2 * LOG2 - 1e-15 and max(lam) <= -LOG2 + 1e-15
    assert abs(xs[int(np.argmin(lam))] - 1.5) <= 1.0 / 1000
    assert abs(xs[int(np.argmax(lam))] - 1.0) <= 1.0 / 1000


def test_identity_oracle_random_branches(p_zero2):
    from equiosc.sumtrans import f_eval
    from equiosc.torus import dist

    rng = np.random.default_rng(10)
    b = beta0()
    for _ in range(1000):
        x = float(rng.uniform(b, 1 + b))
        z = equi_z_of_x(x)
        y = nodes_of(x, z)
        for t in rng.uniform(size=10):
            if min(dist(t, v) for v in y) < 1e-3:
                continue
            assert abs(f_eval(p_zero2, y, t) - identity23(x, z, t)) <= 1e-12


def test_closed_form_pairs_equioscillate(p71):
    b = beta0()
    for x in np.random.default_rng(11).uniform(b, 1 + b, 50):
        am = arc_maxima(p71, nodes_of(x, equi_z_of_x(x)))
        assert am.gap <= 1e-9
        assert am.max == pytest.approx(equi_value_of_x(x), abs=1e-9)


def test_numeric_anchor_matches_closed_form(p71):
    b = beta0()
    for x in (b + 0.05, 1.1, 1.45, 1.55):
        y = nodes_of(x, equi_z_of_x(x))
        r = solve_equioscillation(p71, y[0])
        assert r.value == pytest.approx(equi_value_of_x(x), abs=1e-9)


def test_sweep_and_coverage():
    rows = lambda_sweep(100)
    assert len(rows) == 100
    assert coverage_gap([r["lambda"] for r in rows], -2 * LOG2, -LOG2) < 0.02
    assert coverage_gap([0.0, 1.0], 0.0, 1.0) == 1.0
    assert coverage_gap([0.5], 0.0, 1.0) == 0.5


def test_reproduce_example71_without_oracle():
    rep = reproduce_example71(SolveConfig(multistart_count=8), oracle_grid=0, sweep_points=100)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    assert any("erratum" in n for n in rep.notes)
    d = rep.to_dict()
    assert d["passed"] and len(d["data"]["sweep"]) == 100


def test_reproduce_example72():
    rep = reproduce_example72(solve=False, samples=300)
    assert rep.passed
    with pytest.raises(ValueError):
        reproduce_example72(alpha=12.0)


def test_reproduce_example54():
    rep = reproduce_example54(100, grid=16)
    assert rep.passed
    with pytest.raises(ValueError):
        reproduce_example54(3)
