"""Exact polytope geometry over the rationals.

Points and vectors are tuples of Fraction.  Nothing in this module ever
rounds: every predicate (feasibility, collinearity, grid membership) is
decided exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from .simplex import OPTIMAL, linprog


class GeometryError(ValueError):
    """Structural problem with a polytope (empty, unbounded, degenerate)."""


class EmptyPolytopeError(GeometryError):
    pass


class UnboundedPolytopeError(GeometryError):
    pass


class AssumptionViolation(GeometryError):
    def __init__(self, assumption, message, witness=None):
        super().__init__(f"{assumption}: {message}")
        self.assumption = assumption
        self.witness = witness


class DimensionError(ValueError):
    pass


# --- vectors -------------------------------------------------------------

def frac(v) -> Fraction:
    return v if type(v) is Fraction else Fraction(v)


def as_point(coords) -> tuple:
    return tuple(frac(v) for v in coords)


def dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a, b) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def sub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def scale(s, a) -> tuple:
    return tuple(s * x for x in a)


def sqnorm(a) -> Fraction:
    return dot(a, a)


def is_zero(a) -> bool:
    return all(x == 0 for x in a)


def _check_dims(*vecs):
    n = len(vecs[0])
    for v in vecs[1:]:
        if len(v) != n:
            raise DimensionError(f"dimension mismatch: {len(v)} != {n}")


def _lcm_den(values) -> int:
    out = 1
    for v in values:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out


# --- exact linear algebra -----------------------------------------------

def det_int(M) -> int:
    """Determinant of a square integer matrix (Bareiss elimination)."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            p = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if p is None:
                return 0
            A[k], A[p] = A[p], A[k]
            sign = -sign
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def solve_int(M, rhs):
    """Solve a square integer system by Cramer's rule.

    Returns ``(numerators, den)`` with ``den > 0`` or None when singular.
    """
    d = len(M)
    den = det_int(M)
    if den == 0:
        return None
    nums = []
    for j in range(d):
        Mj = [row[:j] + (r,) + row[j + 1:] for row, r in zip(M, rhs)]
        nums.append(det_int(Mj))
    if den < 0:
        den = -den
        nums = [-v for v in nums]
    return nums, den


def solve(A, b):
    """Solve the square rational system A x = b; None if singular."""
    rows = []
    rhs = []
    for a, bi in zip(A, b):
        a = as_point(a)
        bi = frac(bi)
        L = _lcm_den(a + (bi,))
        rows.append(tuple(int(v * L) for v in a))
        rhs.append(int(bi * L))
    res = solve_int(rows, rhs)
    if res is None:
        return None
    nums, den = res
    return tuple(Fraction(v, den) for v in nums)


def rank(rows) -> int:
    """Rank of a list of rational vectors."""
    M = [list(as_point(r)) for r in rows]
    if not M:
        return 0
    r = 0
    ncols = len(M[0])
    for col in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][col]
        for i in range(r + 1, len(M)):
            f = M[i][col] / piv
            if f:
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == len(M):
            break
    return r


# --- halfspaces and polytopes -------------------------------------------

@dataclass(frozen=True)
class Halfspace:
    """The set ``{x : normal . x <= offset}``."""

    normal: tuple
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", as_point(self.normal))
        object.__setattr__(self, "offset", frac(self.offset))
        if is_zero(self.normal):
            raise ValueError("halfspace normal must be nonzero")

    @property
    def dimension(self):
        return len(self.normal)

    def value(self, x):
        return dot(self.normal, x)

    def contains(self, x):
        return dot(self.normal, x) <= self.offset

    def strictly_contains(self, x):
        return dot(self.normal, x) < self.offset

    def boundary(self):
        return Hyperplane(self.normal, self.offset)


@dataclass(frozen=True)
class Hyperplane:
    """The set ``{x : normal . x == offset}``."""

    normal: tuple
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", as_point(self.normal))
        object.__setattr__(self, "offset", frac(self.offset))
        if is_zero(self.normal):
            raise ValueError("hyperplane normal must be nonzero")

    @property
    def dimension(self):
        return len(self.normal)

    def contains(self, x):
        return dot(self.normal, x) == self.offset


@dataclass(frozen=True)
class Polytope:
    """Intersection of halfspaces in dimension ``dimension``."""

    halfspaces: tuple
    dimension: int = field(default=None)

    def __post_init__(self):
        hs = tuple(self.halfspaces)
        object.__setattr__(self, "halfspaces", hs)
        d = self.dimension
        if d is None:
            if not hs:
                raise ValueError("dimension needed for a polytope without constraints")
            d = hs[0].dimension
            object.__setattr__(self, "dimension", d)
        for h in hs:
            if h.dimension != d:
                raise DimensionError(f"halfspace of dimension {h.dimension} in a {d}-dimensional polytope")

    @classmethod
    def from_rows(cls, A, b):
        return cls(tuple(Halfspace(a, bi) for a, bi in zip(A, b)))

    def __len__(self):
        return len(self.halfspaces)

    def with_constraint(self, h):
        return Polytope(self.halfspaces + (h,), self.dimension)

    @cached_property
    def int_rows(self):
        """Each constraint scaled to integer coefficients: list of (a, b)."""
        out = []
        for h in self.halfspaces:
            L = _lcm_den(h.normal + (h.offset,))
            out.append((tuple(int(v * L) for v in h.normal), int(h.offset * L)))
        return out

    def contains(self, x):
        if len(x) != self.dimension:
            raise DimensionError(f"point of dimension {len(x)} in a {self.dimension}-dimensional polytope")
        return all(h.contains(x) for h in self.halfspaces)

    def binding(self, x):
        """Indices of the constraints holding with equality at x."""
        return tuple(i for i, h in enumerate(self.halfspaces) if dot(h.normal, x) == h.offset)

    @cached_property
    def vertices(self):
        return enumerate_vertices(self)


# --- lines --------------------------------------------------------------

@dataclass(frozen=True)
class EdgeSpace:
    """A line ``base + t * direction`` in canonical form.

    The direction's first nonzero coordinate is 1 and the base is the point
    of the line closest to the origin, so equal lines compare equal.
    """

    base: tuple
    direction: tuple

    @classmethod
    def canonical(cls, point, direction):
        point = as_point(point)
        direction = as_point(direction)
        _check_dims(point, direction)
        lead = next((v for v in direction if v != 0), None)
        if lead is None:
            raise ValueError("direction must be nonzero")
        u = tuple(v / lead for v in direction)
        base = sub(point, scale(dot(point, u) / dot(u, u), u))
        return cls(base, u)

    @classmethod
    def through(cls, p, q):
        return cls.canonical(p, sub(as_point(q), as_point(p)))

    @property
    def dimension(self):
        return len(self.base)

    def point(self, t):
        return tuple(b + t * u for b, u in zip(self.base, self.direction))

    def param(self, x):
        """Parameter of x along the line, or None if x is off the line."""
        j = next(i for i, u in enumerate(self.direction) if u != 0)
        t = (frac(x[j]) - self.base[j]) / self.direction[j]
        for b, u, xi in zip(self.base, self.direction, x):
            if b + t * u != xi:
                return None
        return t

    def contains(self, x):
        return self.param(x) is not None

    @cached_property
    def sqlength(self):
        """Squared Euclidean length of one unit of parameter."""
        return dot(self.direction, self.direction)

    def clip(self, P):
        """Parameter interval of the line inside P: (lo, hi), None = unbounded.

        Returns None when the line misses P.
        """
        lo = hi = None
        for h in P.halfspaces:
            a = dot(h.normal, self.direction)
            r = h.offset - dot(h.normal, self.base)
            if a == 0:
                if r < 0:
                    return None
            elif a > 0:
                t = r / a
                hi = t if hi is None else min(hi, t)
            else:
                t = r / a
                lo = t if lo is None else max(lo, t)
        if lo is not None and hi is not None and lo > hi:
            return None
        return lo, hi


@dataclass(frozen=True)
class Edge:
    space: EdgeSpace
    t_lo: Fraction
    t_hi: Fraction

    @property
    def endpoints(self):
        return self.space.point(self.t_lo), self.space.point(self.t_hi)


def collinear(x, y, z) -> bool:
    """Exact test that three points lie on one line (all 2x2 minors vanish)."""
    u = sub(y, x)
    v = sub(z, x)
    n = len(u)
    for i in range(n):
        for j in range(i + 1, n):
            if u[i] * v[j] != u[j] * v[i]:
                return False
    return True


def _direction_key(v):
    lead = next(x for x in v if x != 0)
    return tuple(x / lead for x in v)


def check_collinear(X, z):
    """Line through z and two points of X when such a collinear triple exists.

    Points are scanned in sorted order; the first point whose direction from
    z repeats an earlier one closes the triple.
    """
    z = as_point(z)
    seen = {}
    for x in sorted(as_point(p) for p in X):
        _check_dims(x, z)
        if x == z:
            continue
        key = _direction_key(sub(x, z))
        if key in seen:
            return EdgeSpace.through(z, x)
        seen[key] = x
    return None


# --- vertices and edges ---------------------------------------------------

def _is_bounded(P) -> bool:
    """P's recession cone is trivial (P assumed nonempty)."""
    A = [h.normal for h in P.halfspaces]
    d = P.dimension
    if rank(A) < d:
        return False
    # With A of full column rank, a nonzero recession direction r has Ar <= 0
    # and Ar != 0, so after scaling sum(Ar) <= -1.
    total = [sum((a[j] for a in A), Fraction(0)) for j in range(d)]
    res = linprog([0] * d, A_ub=A + [total], b_ub=[0] * len(A) + [-1], free=True)
    return res.status != OPTIMAL


def _vertex_candidates(P):
    """Feasible basic solutions as (point, binding indices), deduplicated."""
    d = P.dimension
    rows = P.int_rows
    found = {}
    for subset in combinations(range(len(rows)), d):
        M = [rows[i][0] for i in subset]
        res = solve_int(M, tuple(rows[i][1] for i in subset))
        if res is None:
            continue
        nums, den = res
        key = (tuple(nums), den)
        if key in found:
            continue
        ok = True
        for a, b in rows:
            s = 0
            for ai, ni in zip(a, nums):
                s += ai * ni
            if s > b * den:
                ok = False
                break
        if ok:
            found[key] = None
    out = []
    for nums, den in found:
        x = tuple(Fraction(v, den) for v in nums)
        out.append(x)
    return out


def enumerate_vertices(P):
    """Exact vertex list of a bounded polytope, sorted lexicographically."""
    verts = sorted(set(_vertex_candidates(P)))
    if not verts:
        res = linprog([0] * P.dimension, A_ub=[h.normal for h in P.halfspaces],
                      b_ub=[h.offset for h in P.halfspaces], free=True)
        if res.status == OPTIMAL:
            # nonempty without vertices: the region contains a line
            raise UnboundedPolytopeError("polytope is unbounded")
        raise EmptyPolytopeError("polytope is empty")
    if not _is_bounded(P):
        raise UnboundedPolytopeError("polytope is unbounded")
    return verts


def enumerate_edges(P):
    """Edges of a bounded polytope whose vertices each bind exactly d constraints."""
    d = P.dimension
    verts = P.vertices
    binding = {}
    for v in verts:
        b = frozenset(P.binding(v))
        if len(b) != d:
            raise AssumptionViolation("assumption-5", f"vertex binds {len(b)} constraints", v)
        binding[v] = b
    edges = []
    for u, v in combinations(verts, 2):
        common = binding[u] & binding[v]
        if len(common) != d - 1:
            continue
        if rank([P.halfspaces[i].normal for i in common]) != d - 1:
            continue
        space = EdgeSpace.through(u, v)
        tu, tv = space.param(u), space.param(v)
        edges.append(Edge(space, min(tu, tv), max(tu, tv)))
    return edges


# --- assumption checks --------------------------------------------------------

def on_grid(x, N) -> bool:
    scale_ = 1 << N
    return all((frac(v) * scale_).denominator == 1 for v in x)


@dataclass
class Check:
    passed: bool
    detail: str = ""
    witness: object = None


@dataclass
class ValidationReport:
    checks: dict

    @property
    def ok(self):
        return all(c.passed for c in self.checks.values())

    def failures(self):
        return [name for name, c in self.checks.items() if not c.passed]


def validate_assumptions(P, N) -> ValidationReport:
    """Check boundedness plus unit-ball, N-bit vertex, rank and simplicity conditions."""
    checks = {}
    try:
        verts = enumerate_vertices(P)
    except GeometryError as e:
        checks["bounded_nonempty"] = Check(False, str(e))
        return ValidationReport(checks)
    checks["bounded_nonempty"] = Check(True)
    d = P.dimension

    # witness: the farthest offending vertex, largest first on ties
    far = [v for v in verts if any(abs(c) > 1 for c in v)]
    outside = max(far, key=lambda v: (max(abs(c) for c in v), v)) if far else None
    checks["unit_ball"] = Check(outside is None, "vertex outside the unit box" if outside else "", outside)

    off = next((v for v in verts if not on_grid(v, N)), None)
    checks["grid_vertices"] = Check(off is None, f"vertex not on the 2^-{N} grid" if off else "", off)

    normals = [h.normal for h in P.halfspaces]
    bad = None
    if d >= 2:
        for rows in combinations(range(len(normals)), d - 1):
            if rank([normals[i] for i in rows]) < d - 1:
                bad = rows
                break
    checks["row_rank"] = Check(bad is None, f"rows {bad} are dependent" if bad else "", bad)

    deg = None
    for v in verts:
        b = P.binding(v)
        if len(b) != d:
            deg = (v, b)
            break
    checks["simple_vertices"] = Check(
        deg is None, f"vertex binds {len(deg[1])} constraints" if deg else "", deg)
    return ValidationReport(checks)


def grid_points_in_interval(e, t_lo, t_hi, N):
    """Points of line e with parameter in [t_lo, t_hi] on the 2^-N grid."""
    t_lo, t_hi = frac(t_lo), frac(t_hi)
    if t_lo > t_hi:
        raise ValueError("empty parameter interval")
    j = next(i for i, u in enumerate(e.direction) if u != 0)
    u, b = e.direction[j], e.base[j]
    a1, a2 = sorted((b + t_lo * u, b + t_hi * u))
    S = 1 << N
    out = []
    for k in range(math.ceil(a1 * S), math.floor(a2 * S) + 1):
        t = (Fraction(k, S) - b) / u
        x = e.point(t)
        if on_grid(x, N):
            out.append(x)
    return out


# --- serialization --------------------------------------------------------

def frac_to_str(v) -> str:
    v = frac(v)
    return f"{v.numerator}/{v.denominator}"


def frac_from_str(s) -> Fraction:
    return Fraction(s)


def point_to_json(x):
    return [frac_to_str(v) for v in x]


def point_from_json(obj):
    return tuple(Fraction(s) for s in obj)


def halfspace_to_json(h):
    return {"a": point_to_json(h.normal), "b": frac_to_str(h.offset)}


def halfspace_from_json(obj):
    return Halfspace(point_from_json(obj["a"]), Fraction(obj["b"]))


def polytope_to_json(P):
    return {"d": P.dimension, "halfspaces": [halfspace_to_json(h) for h in P.halfspaces]}


def polytope_from_json(obj):
    d = int(obj["d"])
    return Polytope(tuple(halfspace_from_json(h) for h in obj["halfspaces"]), d)
