"""Exact linear programming on top of vertex enumeration and the rational simplex."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .geometry import (
    DimensionError,
    EmptyPolytopeError,
    Hyperplane,
    as_point,
    dot,
)
from .simplex import OPTIMAL, UNBOUNDED, INFEASIBLE, linprog

InfeasibleError = EmptyPolytopeError


@dataclass(frozen=True)
class LpProblem:
    polytope: object
    objective: tuple

    def __post_init__(self):
        object.__setattr__(self, "objective", as_point(self.objective))
        if len(self.objective) != self.polytope.dimension:
            raise DimensionError("objective and polytope dimensions differ")


@dataclass(frozen=True)
class LpSolution:
    point: tuple
    value: Fraction
    binding_set: frozenset
    unique: bool


def lex_argmax(points, c):
    """Maximizer of c over a finite point set, smallest point on ties.

    Returns ``(point, value, n_ties)``.
    """
    best_val = None
    best = []
    for x in points:
        v = dot(c, x)
        if best_val is None or v > best_val:
            best_val, best = v, [x]
        elif v == best_val:
            best.append(x)
    if not best:
        return None, None, 0
    return min(best), best_val, len(best)


def lex_argmin(points, c):
    neg = tuple(-v for v in c)
    x, v, n = lex_argmax(points, neg)
    return x, (None if v is None else -v), n


def solve_vertex_lp(prob: LpProblem) -> LpSolution:
    """Best vertex of the polytope; ties go to the lexicographically smallest."""
    P = prob.polytope
    x, value, ties = lex_argmax(P.vertices, prob.objective)
    return LpSolution(x, value, frozenset(P.binding(x)), ties == 1)


def contains(P, x) -> bool:
    return P.contains(as_point(x))


def hull_membership(points, q):
    """Decide whether q lies in the convex hull of points.

    Solves the dual of the convex-combination system: find (w, w0) with
    ``w.p <= w0`` for every point and ``w.q - w0`` as large as possible,
    with w kept in the unit box.  A positive optimum is an exact strictly
    separating hyperplane; zero means q is in the hull.
    """
    pts = sorted({as_point(p) for p in points})
    q = as_point(q)
    if not pts:
        raise ValueError("hull of no points")
    d = len(q)
    A, b = [], []
    for p in pts:
        A.append(p + (Fraction(-1),))
        b.append(0)
    for j in range(d):
        e = [0] * (d + 1)
        e[j] = 1
        A.append(e)
        b.append(1)
        A.append([-v for v in e])
        b.append(1)
    res = linprog(list(q) + [-1], A_ub=A, b_ub=b, free=True)
    if res.value <= 0:
        return True, None
    return False, Hyperplane(res.x[:d], res.x[d])


def _lex_extreme_on_face(A_ub, b_ub, A_eq, b_eq, coords, free, sign):
    """Lexicographically smallest (sign=1) or largest (sign=-1) point of a face.

    ``coords`` maps LP variables to the point coordinates (one linear form per
    coordinate).  Returns the coordinate tuple or None if unbounded.
    """
    A_eq, b_eq = list(A_eq), list(b_eq)
    out = []
    last = None
    for form in coords:
        res = linprog([-sign * v for v in form], A_ub=A_ub, b_ub=b_ub,
                      A_eq=A_eq, b_eq=b_eq, free=free)
        if res.status != OPTIMAL:
            return None
        val = -res.value * sign
        out.append(val)
        A_eq.append(form)
        b_eq.append(val)
        last = res
    return tuple(out), last


def maximize_over_hull(points, extra, c):
    """Maximize c over Conv(points) intersected with the halfspace ``extra``.

    Formulated over convex-combination weights.  Returns None when the
    intersection is empty.  ``binding_set`` lists the generators (in sorted
    order) that carry positive weight.
    """
    pts = sorted({as_point(p) for p in points})
    if not pts:
        raise ValueError("hull of no points")
    c = as_point(c)
    k = len(pts)
    d = len(c)
    obj = [dot(c, p) for p in pts]
    A_ub = [[dot(extra.normal, p) for p in pts]]
    b_ub = [extra.offset]
    A_eq = [[1] * k]
    b_eq = [1]
    res = linprog(obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)
    if res.status != OPTIMAL:
        return None
    lam = res.x
    unique = res.certified_unique
    if not unique:
        coords = [[p[j] for p in pts] for j in range(d)]
        face_eq = A_eq + [obj]
        face_b = b_eq + [res.value]
        lo, lo_res = _lex_extreme_on_face(A_ub, b_ub, face_eq, face_b, coords, (), 1)
        hi, _ = _lex_extreme_on_face(A_ub, b_ub, face_eq, face_b, coords, (), -1)
        unique = lo == hi
        lam = lo_res.x
    x = tuple(sum((w * p[j] for w, p in zip(lam, pts)), Fraction(0)) for j in range(d))
    support = frozenset(i for i, w in enumerate(lam) if w > 0)
    return LpSolution(x, dot(c, x), support, unique)


@dataclass(frozen=True)
class GeneralLpResult:
    status: str
    point: tuple | None = None
    value: Fraction | None = None
    unique: bool = False


def solve_lp(halfspaces, c) -> GeneralLpResult:
    """Maximize c over an arbitrary (possibly unbounded or empty) polyhedron.

    The point is the lexicographically smallest optimal point; it is None
    when the optimal face has no lexicographic minimum.
    """
    c = as_point(c)
    A = [h.normal for h in halfspaces]
    b = [h.offset for h in halfspaces]
    res = linprog(c, A_ub=A, b_ub=b, free=True)
    if res.status != OPTIMAL:
        return GeneralLpResult(res.status)
    if res.certified_unique:
        return GeneralLpResult(OPTIMAL, res.x, res.value, True)
    d = len(c)
    coords = [[1 if i == j else 0 for i in range(d)] for j in range(d)]
    lo = _lex_extreme_on_face(A, b, [c], [res.value], coords, True, 1)
    hi = _lex_extreme_on_face(A, b, [c], [res.value], coords, True, -1)
    point = lo[0] if lo else None
    unique = lo is not None and hi is not None and lo[0] == hi[0]
    return GeneralLpResult(OPTIMAL, point, res.value, unique)


__all__ = [
    "LpProblem", "LpSolution", "GeneralLpResult", "InfeasibleError",
    "solve_vertex_lp", "contains", "hull_membership", "maximize_over_hull",
    "solve_lp", "lex_argmax", "lex_argmin", "OPTIMAL", "UNBOUNDED", "INFEASIBLE",
]
