"""LearnEdge: mistake-bounded prediction of LP optima over a hidden polytope.

The learner sees a known objective c and, each day, one extra halfspace.
It remembers the optima it got wrong (X), learns lines that carry edges of
the hidden polytope once three of those optima are collinear, and keeps per
line a certified feasible interval F, two infeasible rays Y0/Y1 and the two
questionable gaps between them.  Predictions stay inside the midpoint
window of each gap, so every wrong guess halves some gap.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import ConfigError, InvariantViolation
from .geometry import (
    EdgeSpace,
    Halfspace,
    Polytope,
    as_point,
    check_collinear,
    dot,
    grid_points_in_interval,
    point_to_json,
    frac_to_str,
)
from .lp_solver import lex_argmax, lex_argmin, solve_lp, OPTIMAL


class ElimError(InvariantViolation):
    """The closed gap handed to ELIM did not hold exactly one grid point."""


def unit_box(d):
    rows = []
    for j in range(d):
        e = [0] * d
        e[j] = 1
        rows.append(Halfspace(e, 1))
        rows.append(Halfspace([-v for v in e], 1))
    return Polytope(tuple(rows), d)


def sentinel(d, avoid=()):
    """The point (k, ..., k) for the smallest k >= 2 not in ``avoid``."""
    avoid = set(avoid)
    k = 2
    while True:
        x = tuple(Fraction(k) for _ in range(d))
        if x not in avoid:
            return x
        k += 1


@dataclass(frozen=True)
class EdgeKnowledge:
    """What is known about one learned line, in its parameter t.

    F = [f_lo, f_hi] is certified feasible.  Y0 is the ray below y0 and Y1
    the ray above y1; each ray includes its endpoint when the matching
    ``*_closed`` flag is set.  The gaps Q0 = (y0, f_lo) and Q1 = (f_hi, y1)
    (plus an open ray endpoint) are still undecided.
    """

    space: EdgeSpace
    f_lo: Fraction
    f_hi: Fraction
    y0: Fraction
    y1: Fraction
    y0_closed: bool = False
    y1_closed: bool = False

    @classmethod
    def from_params(cls, space, params):
        f_lo, f_hi = min(params), max(params)
        clip = space.clip(unit_box(space.dimension))
        if clip is None:
            lo, hi = f_lo, f_hi
        else:
            lo, hi = clip
        # observed optima are feasible, so they win over the unit-box prior
        return cls(space, f_lo, f_hi, min(lo, f_lo), max(hi, f_hi))

    def in_y(self, t):
        return (t < self.y0 or (self.y0_closed and t == self.y0)
                or t > self.y1 or (self.y1_closed and t == self.y1))

    def in_f(self, t):
        return self.f_lo <= t <= self.f_hi

    def gap_of(self, t):
        """0 or 1 for the gap holding t, None if t is in F or Y."""
        if self.in_y(t) or self.in_f(t):
            return None
        return 0 if t < self.f_lo else 1

    def gap_empty(self, which):
        return self.y0 == self.f_lo if which == 0 else self.f_hi == self.y1

    def gap_length(self, which):
        """Length of a gap in parameter units."""
        return self.f_lo - self.y0 if which == 0 else self.y1 - self.f_hi

    def gap_sqlength(self, which):
        """Squared Euclidean length of a gap."""
        return self.gap_length(which) ** 2 * self.space.sqlength

    def midpoints(self):
        """Window (M0, M1); an empty gap contributes its F endpoint."""
        m0 = self.f_lo if self.gap_empty(0) else (self.y0 + self.f_lo) / 2
        m1 = self.f_hi if self.gap_empty(1) else (self.f_hi + self.y1) / 2
        return m0, m1

    def in_window(self, t):
        m0, m1 = self.midpoints()
        return m0 <= t <= m1

    def to_json(self):
        return {
            "base": point_to_json(self.space.base),
            "direction": point_to_json(self.space.direction),
            "F": [frac_to_str(self.f_lo), frac_to_str(self.f_hi)],
            "Y0": [frac_to_str(self.y0), self.y0_closed],
            "Y1": [frac_to_str(self.y1), self.y1_closed],
        }


def elim(ek: EdgeKnowledge, which: int, N: int):
    """Close gap ``which`` at its unique 2^-N grid point.

    Returns ``(new_knowledge, vertex)``.
    """
    if which == 0:
        lo, hi = ek.y0, ek.f_lo
    else:
        lo, hi = ek.f_hi, ek.y1
    pts = grid_points_in_interval(ek.space, lo, hi, N)
    if len(pts) != 1:
        raise ElimError(f"gap [{lo}, {hi}] holds {len(pts)} grid points", ek.to_json())
    v = pts[0]
    t = ek.space.param(v)
    if which == 0:
        new = replace(ek, f_lo=t, y0=t, y0_closed=False)
    else:
        new = replace(ek, f_hi=t, y1=t, y1_closed=False)
    return new, v


@dataclass(frozen=True)
class PredictionOutcome:
    point: tuple
    rule: str


@dataclass(frozen=True)
class UpdateRecord:
    """Audit entry for one update: which rule fired and what it changed."""

    rule: str
    space: EdgeSpace | None = None
    gap: int | None = None
    before_sqlength: Fraction | None = None
    after_sqlength: Fraction | None = None
    elim_vertex: tuple | None = None

    @property
    def halved(self):
        if self.before_sqlength is None or self.elim_vertex is not None:
            return None
        return self.after_sqlength * 4 <= self.before_sqlength


@dataclass(frozen=True)
class LearnEdgeState:
    c: tuple
    N: int
    d: int
    X: tuple = ()
    edges: dict = field(default_factory=dict)
    x_star: tuple | None = None
    history: tuple = ()

    @classmethod
    def initial(cls, c, N):
        c = as_point(c)
        return cls(c=c, N=N, d=len(c))

    def rule_counts(self):
        out = {"U1": 0, "U2": 0, "U3": 0, "U4": 0}
        for r in self.history:
            out[r.rule] = out.get(r.rule, 0) + 1
        return out

    def to_json(self):
        return {
            "c": point_to_json(self.c),
            "N": self.N,
            "X": [point_to_json(x) for x in self.X],
            "x_star": None if self.x_star is None else point_to_json(self.x_star),
            "edges": [ek.to_json() for ek in self.edges.values()],
        }


def _hp_hits(state, hp):
    """Crossings of learned lines with hp, and the lines lying inside hp."""
    hits, inside = [], []
    for space, ek in state.edges.items():
        a = dot(hp.normal, space.direction)
        r = hp.offset - dot(hp.normal, space.base)
        if a == 0:
            if r == 0:
                inside.append(space)
            continue
        t = r / a
        hits.append((ek, t, space.point(t)))
    return hits, inside


def _x_on_hp(state, hp, inside):
    return [x for x in state.X
            if hp.contains(x) and not any(s.contains(x) for s in inside)]


def candidate_set(state: LearnEdgeState, hp) -> list:
    hits, inside = _hp_hits(state, hp)
    pts = {p for _, _, p in hits}
    pts.update(_x_on_hp(state, hp, inside))
    return sorted(pts)


def extended_feasible(state: LearnEdgeState, hp) -> list:
    hits, inside = _hp_hits(state, hp)
    pts = {p for ek, t, p in hits if ek.in_window(t)}
    pts.update(_x_on_hp(state, hp, inside))
    return sorted(pts)


def known_infeasible(state, x):
    for space, ek in state.edges.items():
        t = space.param(x)
        if t is not None and ek.in_y(t):
            return True
    return False


def predict(state: LearnEdgeState, constraint: Halfspace) -> PredictionOutcome:
    if state.x_star is not None and constraint.contains(state.x_star):
        return PredictionOutcome(state.x_star, "P1")
    hp = constraint.boundary()
    cand = candidate_set(state, hp)
    if not cand or all(known_infeasible(state, x) for x in cand):
        return PredictionOutcome(sentinel(state.d, cand), "P2")
    ext = extended_feasible(state, hp)
    if ext:
        return PredictionOutcome(lex_argmax(ext, state.c)[0], "P3")
    return PredictionOutcome(lex_argmin(cand, state.c)[0], "P4")


def _find_gap(state, x, prefer_window):
    """First learned line holding x inside a gap.

    Lines where x sits inside (prefer_window=True) or outside the midpoint
    window are preferred; otherwise any gap holding x is used.
    """
    fallback = None
    for space, ek in state.edges.items():
        t = space.param(x)
        if t is None:
            continue
        gap = ek.gap_of(t)
        if gap is None:
            continue
        if ek.in_window(t) == prefer_window:
            return ek, t, gap
        if fallback is None:
            fallback = (ek, t, gap)
    return fallback


def update(state: LearnEdgeState, constraint: Halfspace, predicted: PredictionOutcome,
           observed, strict=True) -> LearnEdgeState:
    """Learn from a wrong prediction.

    With ``strict=False`` a day that matches no update rule (only possible
    when the instance breaks the learner's assumptions) is logged as rule
    "none" instead of raising.
    """
    x = as_point(observed)
    xh = predicted.point
    if x == xh:
        raise ValueError("update called on a correct prediction")
    X_before = state.X
    X = X_before if x in X_before else X_before + (x,)
    edges = state.edges

    if constraint.strictly_contains(x):
        if state.x_star is not None and state.x_star != x and strict:
            raise InvariantViolation("unconstrained optimum changed", state.to_json())
        return replace(state, X=X, x_star=x, history=state.history + (UpdateRecord("U1"),))

    on_edge = any(space.contains(x) for space in edges)
    if not on_edge and x not in X_before:
        line = check_collinear(X_before, x)
        if line is not None and line not in edges:
            params = [line.param(p) for p in X if line.contains(p)]
            edges = dict(edges)
            edges[line] = EdgeKnowledge.from_params(line, params)
        return replace(state, X=X, edges=edges,
                       history=state.history + (UpdateRecord("U2", line),))

    cx, cxh = dot(state.c, x), dot(state.c, xh)
    found = None
    if cxh > cx:
        rule = "U3"
        found = _find_gap(state, xh, True)
    elif cxh < cx:
        rule = "U4"
        found = _find_gap(state, x, False)
    if found is None:
        if strict:
            raise InvariantViolation(
                f"no update rule applies (prediction {xh}, observed {x})", state.to_json())
        return replace(state, X=X, history=state.history + (UpdateRecord("none"),))

    ek, t, gap = found
    before = ek.gap_sqlength(gap)
    vertex = None
    if before * (1 << (2 * state.N)) < 1:
        new_ek, vertex = elim(ek, gap, state.N)
    elif rule == "U3":
        new_ek = (replace(ek, y0=t, y0_closed=True) if gap == 0
                  else replace(ek, y1=t, y1_closed=True))
    else:
        new_ek = replace(ek, f_lo=t) if gap == 0 else replace(ek, f_hi=t)
    edges = dict(edges)
    edges[ek.space] = new_ek
    rec = UpdateRecord(rule, ek.space, gap, before, new_ek.gap_sqlength(gap), vertex)
    return replace(state, X=X, edges=edges, history=state.history + (rec,))


class LearnEdge:
    """Object wrapper around the functional predict/update pair."""

    def __init__(self, c, N, strict=True):
        self.state = LearnEdgeState.initial(c, N)
        self.strict = strict

    def predict(self, constraint):
        return predict(self.state, constraint)

    def update(self, constraint, predicted, observed):
        self.state = update(self.state, constraint, predicted, observed, self.strict)
        return self.state.history[-1].rule


# --- low-dimensional learners --------------------------------------------------

class LearnLine:
    """d = 1: the only unknown is the far endpoint of P in the direction of c."""

    def __init__(self, c):
        c = as_point(c)
        if len(c) != 1 or c[0] == 0:
            raise ConfigError("the one-dimensional learner needs a nonzero scalar objective")
        self.c = c
        self.sign = 1 if c[0] > 0 else -1
        self.bound = Fraction(self.sign)  # unit-ball prior
        self.pinned = False

    def predict(self, constraint):
        p, q = constraint.normal[0], constraint.offset
        s = self.sign
        x = self.bound
        if p * s > 0:
            x = min(x * s, q / p * s) * s
        return PredictionOutcome((x,), "P1" if self.pinned else "P3")

    def update(self, constraint, predicted, observed):
        x = as_point(observed)
        if constraint.strictly_contains(x):
            self.bound = x[0]
            self.pinned = True
            return "U1"
        return "none"


class LearnPlane:
    """d = 2: learned edge lines become known constraints of P.

    A line is learned from three collinear observed optima.  Its inequality
    direction is read off any observed optimum not on the line; with a
    single learned line and no such point, the prediction is where the
    day's hyperplane meets that line.
    """

    def __init__(self, c):
        c = as_point(c)
        if len(c) != 2:
            raise ConfigError("the planar learner needs a 2-vector objective")
        self.c = c
        self.S = ()
        self.lines = []
        self.x_star = None

    def _oriented(self):
        out, unknown = [], []
        for a, b in self.lines:
            side = next((dot(a, z) for z in self.S if dot(a, z) != b), None)
            if side is None:
                unknown.append((a, b))
            elif side < b:
                out.append(Halfspace(a, b))
            else:
                out.append(Halfspace(tuple(-v for v in a), -b))
        return out, unknown

    def predict(self, constraint):
        if self.x_star is not None and constraint.contains(self.x_star):
            return PredictionOutcome(self.x_star, "P1")
        p, q = constraint.normal, constraint.offset
        oriented, unknown = self._oriented()
        if not oriented and not unknown:
            return PredictionOutcome(sentinel(2), "P2")
        if not oriented:
            a, b = unknown[0]
            det = p[0] * a[1] - p[1] * a[0]
            if det == 0:
                return PredictionOutcome(sentinel(2), "P2")
            x = ((q * a[1] - p[1] * b) / det, (p[0] * b - q * a[0]) / det)
            return PredictionOutcome(x, "P4")
        flip = Halfspace(tuple(-v for v in p), -q)
        res = solve_lp(oriented + [constraint, flip], self.c)
        if res.status != OPTIMAL or res.point is None or not res.unique:
            return PredictionOutcome(sentinel(2), "P2")
        return PredictionOutcome(res.point, "P3")

    def update(self, constraint, predicted, observed):
        x = as_point(observed)
        rule = "none"
        if constraint.strictly_contains(x):
            self.x_star = x
            rule = "U1"
        if x not in self.S:
            line = check_collinear(self.S, x)
            if line is not None:
                u = line.direction
                a = (-u[1], u[0])
                b = dot(a, line.base)
                if (a, b) not in self.lines:
                    self.lines.append((a, b))
                    rule = "U2" if rule == "none" else rule
            self.S = self.S + (x,)
        return rule


def learn_low_dim(d, c):
    """Learner for d = 1 or d = 2 with the LearnEdge predict/update interface."""
    if d == 1:
        return LearnLine(c)
    if d == 2:
        return LearnPlane(c)
    raise ConfigError(f"low-dimensional learner supports d in {{1, 2}}, got {d}")
