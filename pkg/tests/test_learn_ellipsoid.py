import math
import random
from fractions import Fraction as F

import pytest
import sympy

from conftest import brute_vertices, square
from revealed_lp.environments import (
    KnownConstraintsDay,
    make_known_constraints_env,
    sample_known_constraints_day,
)
from revealed_lp.errors import InvariantViolation
from revealed_lp.learn_ellipsoid import (
    PRECISION_ENV,
    CutBudgetExceeded,
    EllipsoidState,
    LearnEllipsoid,
    default_cut_budget,
    ellipsoid_cut,
    ellipsoid_predict,
    separation_from_mistake,
    working_bits,
)
from revealed_lp.learn_edge import PredictionOutcome


def test_one_dimensional_cut_bisects():
    s = ellipsoid_cut(EllipsoidState.ball(1, 2), (1,))
    assert s.center[0] == 1
    assert s.shape[0, 0] == 1
    assert s.cut_count == 1


def test_two_dimensional_cut_matches_symbolic_update():
    s = ellipsoid_cut(EllipsoidState.ball(2, 1), (1, 0))
    # symbolic central cut keeping x >= 0 of the unit disk
    D = 2
    Q = sympy.eye(2)
    a = sympy.Matrix([-1, 0])
    Qa = Q * a
    aQa = (a.T * Q * a)[0]
    c = -Qa / ((D + 1) * sympy.sqrt(aQa))
    Qn = sympy.Rational(D * D, D * D - 1) * (Q - sympy.Rational(2, D + 1) * Qa * Qa.T / aQa)
    assert c == sympy.Matrix([sympy.Rational(1, 3), 0])
    assert Qn == sympy.diag(sympy.Rational(4, 9), sympy.Rational(4, 3))
    for i in range(2):
        assert abs(float(s.center[i]) - float(c[i])) < 1e-30
        for j in range(2):
            assert abs(float(s.shape[i, j]) - float(Qn[i, j])) < 1e-30


def test_cut_shrinks_volume():
    s = EllipsoidState.ball(4, 2)
    rng = random.Random(0)
    for _ in range(10):
        g = tuple(F(rng.randint(-5, 5), 3) for _ in range(4))
        if not any(g):
            continue
        new = ellipsoid_cut(s, g)
        assert (new.log_det() - s.log_det()) / 2 <= -1 / (2 * 5) + 1e-12
        s = new


def test_predict_at_zero_center_is_lexicographic_vertex():
    s = EllipsoidState.ball(2, 2)
    day = KnownConstraintsDay(square(), (0,))
    assert ellipsoid_predict(s, day, 2) == (-1, -1)


def test_predict_with_known_center():
    from dataclasses import replace
    s = EllipsoidState.ball(2, 2)
    s = replace(s, center=(s.ctx.mpf(1), s.ctx.mpf(1)))
    assert ellipsoid_predict(s, KnownConstraintsDay(square(), (0,)), 2) == (1, 1)


@pytest.mark.parametrize("seed", range(5))
def test_predict_matches_vertex_oracle(seed):
    from dataclasses import replace
    rng = random.Random(seed)
    env = make_known_constraints_env(seed, 2, 2, 3)
    s = EllipsoidState.ball(4, 2, bits=64)
    s = replace(s, center=tuple(s.ctx.mpf(rng.uniform(-1, 1)) for _ in range(4)))
    W = s.rounded_center()
    for _ in range(5):
        day, _ = sample_known_constraints_day(env)
        obj = [sum(W[i * 2 + j] for i in day.subset) for j in range(2)]
        verts = brute_vertices(day.polytope)
        best = max(sum(a * b for a, b in zip(obj, v)) for v in verts)
        assert ellipsoid_predict(s, day, 2) == min(
            v for v in verts if sum(a * b for a, b in zip(obj, v)) == best)


def test_separation_vector_blocks():
    day = KnownConstraintsDay(square(), (0,))
    assert separation_from_mistake(day, (1, -1), (1, 1), 1, 2) == (0, 2)
    day = KnownConstraintsDay(square(), (1,))
    g = separation_from_mistake(day, (1, -1), (-1, 1), 2, 2)
    assert g == (0, 0, -2, 2)


def test_precision_override(monkeypatch):
    assert working_bits() == 128
    monkeypatch.setenv(PRECISION_ENV, "80")
    assert working_bits() == 80
    assert EllipsoidState.ball(2).bits == 80
    assert working_bits(200) == 200


def test_budget_formula():
    assert default_cut_budget(4, 3) == int(10 * 16 * (3 + 2))


def test_update_rejects_center_on_correct_side():
    lrn = LearnEllipsoid(1, 2, 3)
    from dataclasses import replace
    lrn.state = replace(lrn.state, center=(lrn.state.ctx.mpf(1), lrn.state.ctx.mpf(1)))
    day = KnownConstraintsDay(square(), (0,))
    # observed (1,1) beats predicted (-1,-1) under the center (1,1)
    with pytest.raises(InvariantViolation):
        lrn.update(day, PredictionOutcome((-1, -1), "center"), (1, 1))


def test_cut_budget_enforced():
    lrn = LearnEllipsoid(1, 2, 3, cut_budget=0)
    day = KnownConstraintsDay(square(), (0,))
    with pytest.raises(CutBudgetExceeded):
        lrn.update(day, PredictionOutcome((-1, -1), "center"), (1, 1))


@pytest.mark.parametrize("seed", range(3))
def test_episode_keeps_truth_inside(seed):
    env = make_known_constraints_env(seed, 2, 2, 3)
    lrn = LearnEllipsoid(2, 2, 3)
    V = env.flat_V()
    for _ in range(150):
        day, x = sample_known_constraints_day(env)
        before = lrn.state
        out = lrn.predict(day)
        if out.point != x:
            g = separation_from_mistake(day, out.point, x, 2, 2)
            assert sum(a * b for a, b in zip(g, V)) > 0
            lrn.update(day, out, x)
            assert lrn.state.contains(V)
        else:
            assert lrn.state is before
