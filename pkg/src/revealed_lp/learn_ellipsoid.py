"""Cutting-plane learner for a hidden linear objective over known daily polytopes.

The hidden objective is a matrix V with n columns; day t reveals a polytope
and a subset S, and the truth maximizes sum_{i in S} v^i . x.  The learner
keeps an ellipsoid around every matrix consistent with its mistakes,
predicts with the ellipsoid's center and, after each mistake, applies a
central cut through the center.

The ellipsoid lives in binary floating point at a configurable number of
fractional bits (mpmath); the center is rounded to an exact dyadic rational
before it is used to predict, so predictions and mistakes stay exact.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction

import mpmath

from .errors import InvariantViolation
from .geometry import as_point, dot
from .learn_edge import PredictionOutcome
from .lp_solver import LpProblem, solve_vertex_lp

DEFAULT_BITS = 128
PRECISION_ENV = "REVEALED_LP_PRECISION_BITS"


class NumericFailure(InvariantViolation):
    """The ellipsoid lost positive definiteness; more precision is needed."""


class CutBudgetExceeded(InvariantViolation):
    pass


def working_bits(bits=None):
    if bits is not None:
        return int(bits)
    return int(os.environ.get(PRECISION_ENV, DEFAULT_BITS))


def default_cut_budget(D, N):
    return int(10 * D * D * (N + math.log2(D)))


def _context(bits):
    ctx = mpmath.MPContext()
    ctx.prec = bits + 16
    return ctx


@dataclass(frozen=True)
class EllipsoidState:
    """Ellipsoid {z : (z - center)^T Q^-1 (z - center) <= 1}."""

    center: tuple
    shape: object       # mpmath matrix Q
    cut_count: int
    bits: int
    ctx: object

    @classmethod
    def ball(cls, D, radius=2, bits=None):
        bits = working_bits(bits)
        ctx = _context(bits)
        Q = ctx.eye(D) * ctx.mpf(radius) ** 2
        return cls(tuple(ctx.mpf(0) for _ in range(D)), Q, 0, bits, ctx)

    @property
    def dimension(self):
        return len(self.center)

    def rounded_center(self):
        """Center rounded to the nearest multiple of 2^-bits, as Fractions."""
        ctx = self.ctx
        den = 1 << self.bits
        return tuple(Fraction(int(ctx.nint(ctx.ldexp(v, self.bits))), den) for v in self.center)

    def log_det(self):
        L = self.ctx.cholesky(self.shape)
        return 2 * sum(self.ctx.log(L[i, i]) for i in range(self.dimension))

    def contains(self, z, rel_tol=1e-9):
        """Membership of the point z (rationals or floats) with relative slack."""
        ctx = self.ctx
        diff = ctx.matrix([ctx.mpf(Fraction(v).numerator) / Fraction(v).denominator - c
                           for v, c in zip(z, self.center)])
        y = ctx.lu_solve(self.shape, diff)
        q = sum(diff[i] * y[i] for i in range(self.dimension))
        return q <= 1 + rel_tol

    def to_json(self):
        ctx = self.ctx
        D = self.dimension
        return {
            "center": [ctx.nstr(v, 40) for v in self.center],
            "shape": [[ctx.nstr(self.shape[i, j], 40) for j in range(D)] for i in range(D)],
            "cut_count": self.cut_count,
            "bits": self.bits,
        }


def effective_objective(W, subset, d):
    """sum over i in subset of the i-th d-block of the flat vector W."""
    return tuple(sum((W[i * d + j] for i in subset), Fraction(0)) for j in range(d))


def ellipsoid_predict(state: EllipsoidState, day, d):
    c_hat = effective_objective(state.rounded_center(), day.subset, d)
    return solve_vertex_lp(LpProblem(day.polytope, c_hat)).point


def separation_from_mistake(day, predicted, observed, n, d):
    """Vector g with block i = observed - predicted for i in the subset, zero elsewhere."""
    diff = tuple(o - p for o, p in zip(as_point(observed), as_point(predicted)))
    g = []
    for i in range(n):
        g.extend(diff if i in day.subset else (Fraction(0),) * d)
    return tuple(g)


def ellipsoid_cut(state: EllipsoidState, g) -> EllipsoidState:
    """Central cut keeping {z : g.z >= g.center}."""
    ctx = state.ctx
    D = state.dimension
    a = ctx.matrix([-ctx.mpf(Fraction(v).numerator) / Fraction(v).denominator for v in g])
    Q = state.shape
    Qa = Q * a
    aQa = sum(a[i] * Qa[i] for i in range(D))
    if aQa <= 0:
        raise NumericFailure("cut direction has nonpositive Q-norm", state.to_json())
    root = ctx.sqrt(aQa)
    if D == 1:
        center = (state.center[0] - Qa[0] / (2 * root),)
        new_Q = Q / 4
    else:
        center = tuple(state.center[i] - Qa[i] / ((D + 1) * root) for i in range(D))
        k = ctx.mpf(D * D) / (D * D - 1)
        beta = ctx.mpf(2) / (D + 1)
        new_Q = ctx.matrix(D, D)
        for i in range(D):
            for j in range(i, D):
                v = k * (Q[i, j] - beta * Qa[i] * Qa[j] / aQa)
                new_Q[i, j] = new_Q[j, i] = v
    new = replace(state, center=center, shape=new_Q, cut_count=state.cut_count + 1)
    try:
        drop = new.log_det() - state.log_det()
    except ValueError as e:  # cholesky failed
        raise NumericFailure(f"shape lost positive definiteness: {e}", state.to_json()) from e
    # log volume is half the log determinant
    if drop / 2 > -ctx.mpf(1) / (2 * (D + 1)) + ctx.mpf(2) ** (-state.bits // 2):
        raise NumericFailure(f"volume shrank by only {drop / 2}", state.to_json())
    return new


class LearnEllipsoid:
    def __init__(self, n, d, N, bits=None, cut_budget=None):
        self.n, self.d, self.N = n, d, N
        D = n * d
        self.state = EllipsoidState.ball(D, 2, bits)
        self.cut_budget = default_cut_budget(D, N) if cut_budget is None else cut_budget

    def predict(self, day):
        return PredictionOutcome(ellipsoid_predict(self.state, day, self.d), "center")

    def update(self, day, predicted, observed):
        g = separation_from_mistake(day, predicted.point, observed, self.n, self.d)
        if dot(g, self.state.rounded_center()) > 0:
            raise InvariantViolation("mistake with a center on the correct side of the cut",
                                     self.state.to_json())
        if self.state.cut_count >= self.cut_budget:
            raise CutBudgetExceeded(
                f"cut budget {self.cut_budget} exhausted; raise {PRECISION_ENV}",
                self.state.to_json())
        self.state = ellipsoid_cut(self.state, g)
        return "cut"
