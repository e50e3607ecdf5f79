"""Dense two-phase simplex over exact rationals.

Small and slow on purpose: problems here have a handful of rows, and every
pivot is exact, so the answers can be trusted as ground truth.  Bland's rule
prevents cycling.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

try:  # gmpy2's rationals are much faster than Fraction for pivoting
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinprogResult:
    status: str
    x: tuple | None = None
    value: Fraction | None = None
    # True when every nonbasic reduced cost is strictly negative at the
    # optimum, which certifies the optimal point is unique.  False means
    # "not certified", not "not unique".
    certified_unique: bool = False


def _pivot(T, basis, r, k):
    row = T[r]
    piv = row[k]
    if piv != 1:
        T[r] = row = [v / piv for v in row]
    for i, other in enumerate(T):
        if i != r:
            f = other[k]
            if f:
                T[i] = [a - f * b if b else a for a, b in zip(other, row)]
    basis[r] = k


def _reduced_costs(T, basis, obj, allowed):
    out = {}
    for j in allowed:
        rc = obj[j]
        for i, b in enumerate(basis):
            if obj[b]:
                rc -= obj[b] * T[i][j]
        out[j] = rc
    return out


def _optimize(T, basis, obj, allowed):
    """Run primal simplex from a feasible basis.  Returns False if unbounded."""
    while True:
        rc = _reduced_costs(T, basis, obj, allowed)
        entering = next((j for j in allowed if j not in basis and rc[j] > 0), None)
        if entering is None:
            return True
        best = None
        for i, row in enumerate(T):
            a = row[entering]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        _pivot(T, basis, best[1], entering)


def _to_fraction(v):
    return Fraction(int(v.numerator), int(v.denominator))


def linprog(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), free=()):
    """Maximize ``c.x`` subject to ``A_ub x <= b_ub`` and ``A_eq x == b_eq``.

    Variables are nonnegative unless their index is listed in ``free``
    (pass ``True`` to make every variable free).  Inputs may be ints,
    Fractions or numeric strings; the result is exact and uses Fraction.
    """
    n = len(c)
    free = set(range(n)) if free is True else set(free)
    cols = [(j, 1) for j in range(n)] + [(j, -1) for j in sorted(free)]
    nx = len(cols)
    n_ub = len(A_ub)
    n_slack = n_ub
    rows, rhs, needs_art = [], [], []
    for i, (a, b) in enumerate(zip(A_ub, b_ub)):
        row = [_Q(a[j]) * s for j, s in cols] + [_Q(0)] * n_slack
        row[nx + i] = _Q(1)
        b = _Q(b)
        if b < 0:
            row = [-v for v in row]
            b = -b
            needs_art.append(True)
        else:
            needs_art.append(False)
        rows.append(row)
        rhs.append(b)
    for a, b in zip(A_eq, b_eq):
        row = [_Q(a[j]) * s for j, s in cols] + [_Q(0)] * n_slack
        b = _Q(b)
        if b < 0:
            row = [-v for v in row]
            b = -b
        rows.append(row)
        rhs.append(b)
        needs_art.append(True)

    n_art = sum(needs_art)
    width = nx + n_slack + n_art
    T, basis = [], []
    art = nx + n_slack
    for i, row in enumerate(rows):
        full = row + [_Q(0)] * n_art + [rhs[i]]
        if needs_art[i]:
            full[art] = _Q(1)
            basis.append(art)
            art += 1
        else:
            basis.append(nx + i)
        T.append(full)

    real = list(range(nx + n_slack))
    if n_art:
        obj1 = [_Q(0)] * (nx + n_slack) + [_Q(-1)] * n_art
        _optimize(T, basis, obj1, list(range(width)))
        if sum(T[i][-1] for i, b in enumerate(basis) if b >= nx + n_slack) > 0:
            return LinprogResult(INFEASIBLE)
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(T):
            if basis[i] >= nx + n_slack:
                k = next((j for j in real if T[i][j] != 0), None)
                if k is None:
                    del T[i]
                    del basis[i]
                    continue
                _pivot(T, basis, i, k)
            i += 1

    obj = [_Q(c[j]) * s for j, s in cols] + [_Q(0)] * (n_slack + n_art)
    if not _optimize(T, basis, obj, real):
        return LinprogResult(UNBOUNDED)
    vals = [_Q(0)] * width
    for i, b in enumerate(basis):
        vals[b] = T[i][-1]
    x = [_Q(0)] * n
    for k, (j, s) in enumerate(cols):
        x[j] += s * vals[k]
    value = sum((_Q(cj) * xj for cj, xj in zip(c, x)), _Q(0))
    rc = _reduced_costs(T, basis, obj, real)
    unique = all(rc[j] < 0 for j in real if j not in basis)
    return LinprogResult(OPTIMAL, tuple(_to_fraction(v) for v in x), _to_fraction(value), unique)
