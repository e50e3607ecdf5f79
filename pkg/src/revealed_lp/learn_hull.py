"""LearnHull: predict from the convex hull of optima seen so far.

Every generator is a revealed optimum, hence a point of the hidden
polytope, so a prediction taken from the clipped hull is always feasible.
A wrong prediction therefore means the true optimum lies outside the hull.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .geometry import as_point
from .learn_edge import PredictionOutcome, sentinel
from .lp_solver import hull_membership, maximize_over_hull


@dataclass(frozen=True)
class HullState:
    c: tuple
    d: int
    points: tuple = ()
    prune: bool = False

    @classmethod
    def initial(cls, c, prune=False):
        c = as_point(c)
        return cls(c=c, d=len(c), prune=prune)


def hull_predict(state: HullState, constraint):
    """Best hull point inside the constraint, or None if there is none."""
    if not state.points:
        return None
    sol = maximize_over_hull(state.points, constraint, state.c)
    return None if sol is None else sol.point


def hull_update(state: HullState, observed) -> HullState:
    x = as_point(observed)
    if x in state.points:
        return state
    pts = state.points + (x,)
    if state.prune and len(pts) > state.d + 1:
        kept = []
        for i, p in enumerate(pts):
            others = pts[:i] + pts[i + 1:]
            if not hull_membership(others, p)[0]:
                kept.append(p)
        pts = tuple(kept)
    return replace(state, points=pts)


class LearnHull:
    def __init__(self, c, prune=False):
        self.state = HullState.initial(c, prune)

    def predict(self, constraint):
        x = hull_predict(self.state, constraint)
        if x is None:
            return PredictionOutcome(sentinel(self.state.d), "empty")
        return PredictionOutcome(x, "hull")

    def update(self, constraint, predicted, observed):
        self.state = hull_update(self.state, observed)
        return "grow"
