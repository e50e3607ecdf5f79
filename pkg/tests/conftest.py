"""Independent oracles shared by the test modules.

None of these reuse the package's linear algebra: vertices and line
membership go through sympy, hull facets are found by brute force.
"""
from fractions import Fraction
from itertools import combinations

import sympy
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

F = Fraction


def sym(v):
    return sympy.Rational(v.numerator, v.denominator)


def unsym(v):
    return Fraction(int(v.p), int(v.q))


def brute_vertices(P):
    """Solve every d-subset of constraints with sympy, keep feasible solutions."""
    d = P.dimension
    out = set()
    for rows in combinations(P.halfspaces, d):
        M = sympy.Matrix([[sym(a) for a in h.normal] for h in rows])
        if M.det() == 0:
            continue
        sol = M.LUsolve(sympy.Matrix([sym(h.offset) for h in rows]))
        x = tuple(unsym(v) for v in sol)
        if all(sum(a * b for a, b in zip(h.normal, x)) <= h.offset for h in P.halfspaces):
            out.add(x)
    return out


def brute_edge_count(P):
    """Count vertex pairs sharing d-1 tight constraints of rank d-1 (sympy rank)."""
    d = P.dimension
    verts = sorted(brute_vertices(P))

    def tight(v):
        return {i for i, h in enumerate(P.halfspaces)
                if sum(a * b for a, b in zip(h.normal, v)) == h.offset}

    count = 0
    for u, w in combinations(verts, 2):
        common = tight(u) & tight(w)
        if len(common) < d - 1:
            continue
        M = sympy.Matrix([[sym(a) for a in P.halfspaces[i].normal] for i in common])
        if M.rank() == d - 1:
            count += 1
    return count


def brute_collinear(x, y, z):
    """All 2x2 minors of [y - x; z - x] vanish."""
    u = [b - a for a, b in zip(x, y)]
    v = [b - a for a, b in zip(x, z)]
    return all(u[i] * v[j] - u[j] * v[i] == 0
               for i in range(len(u)) for j in range(i + 1, len(u)))


def brute_any_collinear(X, z):
    X = list(X)
    return any(brute_collinear(x, y, z) and len({x, y, z}) == 3
               for x, y in combinations(X, 2))


def hull_facets_3d(points):
    """Supporting planes (a, b) with a.p <= b for all points, via triples."""
    pts = list(points)
    out = []
    for p, q, r in combinations(pts, 3):
        u = [b - a for a, b in zip(p, q)]
        v = [b - a for a, b in zip(p, r)]
        n = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
        if not any(n):
            continue
        b = sum(a * c for a, c in zip(n, p))
        vals = [sum(a * c for a, c in zip(n, s)) for s in pts]
        if all(t <= b for t in vals):
            out.append((n, b))
        elif all(t >= b for t in vals):
            out.append((tuple(-a for a in n), -b))
    return out


def brute_in_hull_3d(points, q):
    return all(sum(a * c for a, c in zip(n, q)) <= b for n, b in hull_facets_3d(points))


def brute_hull_max(points, h, c):
    """Clip-and-enumerate: candidates are the points inside h and pair crossings of its boundary."""
    pts = list(points)
    cand = [p for p in pts if h.contains(p)]
    for p, q in combinations(pts, 2):
        sp, sq = h.value(p) - h.offset, h.value(q) - h.offset
        if (sp < 0 < sq) or (sq < 0 < sp):
            lam = sp / (sp - sq)
            cand.append(tuple(a + lam * (b - a) for a, b in zip(p, q)))
    if not cand:
        return None
    best = max(sum(a * b for a, b in zip(c, x)) for x in cand)
    return min(x for x in cand if sum(a * b for a, b in zip(c, x)) == best)


def square():
    from revealed_lp.geometry import Polytope
    return Polytope.from_rows([(1, 0), (-1, 0), (0, 1), (0, -1)], [1, 1, 1, 1])


def cube():
    from revealed_lp.geometry import Polytope
    rows = []
    for j in range(3):
        e = [0, 0, 0]
        e[j] = 1
        rows.append(tuple(e))
        rows.append(tuple(-v for v in e))
    return Polytope.from_rows(rows, [1] * 6)
