"""Randomized halving over a finite class of grid polytopes.

Every hypothesis is m constraints whose coefficients and offsets are
multiples of 2^-N in [-1, 1].  Each day the learner samples a hypothesis
still consistent with everything observed, predicts its optimum, and then
discards every hypothesis under which the revealed point is not optimal.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from .errors import ConfigError
from .geometry import Halfspace, as_point, dot
from .learn_edge import PredictionOutcome, sentinel
from .lp_solver import OPTIMAL, solve_lp
from .simplex import linprog

DEFAULT_CAP = 10**6


def class_size(d, m, N):
    return (2 ** (N + 1) + 1) ** ((d + 1) * m)


@dataclass(frozen=True, eq=False)
class HypothesisClass:
    """All hypotheses, stored as integer arrays scaled by 2^N.

    ``A[k, i]`` is the normal and ``B[k, i]`` the offset of constraint i of
    hypothesis k.  ``evaluable[k]`` is False for hypotheses with an empty
    region, which can never be consistent.
    """

    d: int
    m: int
    N: int
    A: np.ndarray
    B: np.ndarray
    evaluable: np.ndarray

    def __len__(self):
        return len(self.B)

    @property
    def scale(self):
        return 1 << self.N

    def halfspaces(self, k):
        """Constraints of hypothesis k as Halfspaces; None if trivially empty.

        Rows with a zero normal are dropped when they hold everywhere.
        """
        S = self.scale
        out = []
        for a, b in zip(self.A[k], self.B[k]):
            if not a.any():
                if b < 0:
                    return None
                continue
            out.append(Halfspace(tuple(Fraction(int(v), S) for v in a), Fraction(int(b), S)))
        return out


def _is_nonempty(rows, d):
    A, b = [], []
    for r in rows:
        A.append(r[:d])
        b.append(r[d])
    return linprog([0] * d, A_ub=A, b_ub=b, free=True).status == OPTIMAL


@lru_cache(maxsize=8)
def enumerate_class(d, m, N, cap=DEFAULT_CAP) -> HypothesisClass:
    size = class_size(d, m, N)
    if size > cap:
        raise ConfigError(f"hypothesis class has {size} members, above the cap {cap}")
    S = 1 << N
    vals = range(-S, S + 1)
    rows = np.array(list(product(vals, repeat=d + 1)), dtype=np.int64)
    idx = np.array(list(product(range(len(rows)), repeat=m)), dtype=np.int64).reshape(-1, m)
    H = rows[idx]                      # (K, m, d+1)
    A = np.ascontiguousarray(H[:, :, :d])
    B = np.ascontiguousarray(H[:, :, d])
    # emptiness depends only on the set of rows, so solve each set once
    verdict = {}
    evaluable = np.empty(len(idx), dtype=bool)
    for k, combo in enumerate(idx):
        key = tuple(sorted(set(combo.tolist())))
        if key not in verdict:
            verdict[key] = _is_nonempty([rows[r].tolist() for r in key], d)
        evaluable[k] = verdict[key]
    return HypothesisClass(d, m, N, A, B, evaluable)


def _common_denominator(x):
    den = 1
    for v in x:
        den = den * v.denominator // np.gcd(den, v.denominator)
    return [int(v * den) for v in x], den


def _int_vector(v):
    nums, _ = _common_denominator(as_point(v))
    return nums


def is_consistent(halfspaces, constraint, x, c):
    """Exact check that x is an optimal point of c over the hypothesis ∩ constraint.

    Uses the rational simplex; ``halfspaces`` None means an empty hypothesis.
    """
    if halfspaces is None:
        return False
    hs = list(halfspaces) + [constraint]
    if not all(h.contains(x) for h in hs):
        return False
    res = solve_lp(hs, c)
    return res.status == OPTIMAL and res.value == dot(c, x)


def consistent_mask(cls: HypothesisClass, idx, constraint, x, c):
    """Boolean mask over ``idx``: is x optimal for c over hypothesis ∩ constraint?

    Feasibility plus the optimality condition that c lies in the cone of
    the normals tight at x, evaluated in integer arithmetic.  Dimensions 1
    and 2 are vectorized; larger d falls back to ``is_consistent``.
    """
    x = as_point(x)
    if cls.d > 2:
        return np.array([is_consistent(cls.halfspaces(k), constraint, x, c) for k in idx],
                        dtype=bool)
    xn, xd = _common_denominator(x)
    if max(abs(v) for v in xn + [xd]) > 2**40:
        return np.array([is_consistent(cls.halfspaces(k), constraint, x, c) for k in idx],
                        dtype=bool)
    A = cls.A[idx]                     # (k, m, d)
    B = cls.B[idx]
    xn_arr = np.array(xn, dtype=np.int64)
    lhs = A @ xn_arr                   # (k, m)
    rhs = B * xd
    feasible = (lhs <= rhs).all(axis=1)
    tight = lhs == rhs                 # (k, m)
    p = np.array(_int_vector(constraint.normal), dtype=np.int64)
    p_tight = dot(constraint.normal, x) == constraint.offset
    cn = np.array(_int_vector(c), dtype=np.int64)
    k = len(idx)
    normals = np.concatenate([A, np.broadcast_to(p, (k, 1, cls.d))], axis=1)
    tight = np.concatenate([tight, np.full((k, 1), p_tight)], axis=1)
    if cls.d == 1:
        in_cone = (tight & (normals[:, :, 0] * cn[0] > 0)).any(axis=1)
        return feasible & in_cone
    n0, n1 = normals[:, :, 0], normals[:, :, 1]
    cross_c = n0 * cn[1] - n1 * cn[0]
    dot_c = n0 * cn[0] + n1 * cn[1]
    in_cone = (tight & (cross_c == 0) & (dot_c > 0)).any(axis=1)
    for i, j in combinations(range(normals.shape[1]), 2):
        det = n0[:, i] * n1[:, j] - n1[:, i] * n0[:, j]
        sgn = np.sign(det)
        y1 = (cn[0] * n1[:, j] - cn[1] * n0[:, j]) * sgn
        y2 = (n0[:, i] * cn[1] - n1[:, i] * cn[0]) * sgn
        in_cone |= tight[:, i] & tight[:, j] & (det != 0) & (y1 >= 0) & (y2 >= 0)
    return feasible & in_cone


def hypothesis_optimum(cls, k, constraint, c):
    """Lexicographically smallest optimum of hypothesis k ∩ constraint, or None."""
    hs = cls.halfspaces(k)
    if hs is None:
        return None
    res = solve_lp(hs + [constraint], c)
    if res.status != OPTIMAL:
        return None
    return res.point


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def fcp_step(cls, consistent, constraint, c, rng):
    """Sample a consistent hypothesis and predict with it.

    Returns ``(prediction, updater, sampled_index)``; ``updater(observed)``
    gives the filtered consistent index array.
    """
    k = int(consistent[rng.integers(len(consistent))])
    x = hypothesis_optimum(cls, k, constraint, c)
    if x is None:
        x = sentinel(cls.d)

    def updater(observed):
        return consistent[consistent_mask(cls, consistent, constraint, observed, c)]

    return x, updater, k


class FCP:
    """Predict/update wrapper holding the consistent set and the RNG."""

    def __init__(self, cls, c, seed):
        self.cls = cls
        self.c = as_point(c)
        self.rng = make_rng(seed)
        self.consistent = np.flatnonzero(cls.evaluable)
        self._pending = None

    def predict(self, constraint):
        x, updater, k = fcp_step(self.cls, self.consistent, constraint, self.c, self.rng)
        self._pending = (constraint, updater, k)
        return PredictionOutcome(x, "sample")

    def observe(self, constraint, observed):
        """Filter on every day (the filter is a no-op on correct days for the truth)."""
        pend_constraint, updater, _ = self._pending
        if pend_constraint is not constraint:
            updater = fcp_step(self.cls, self.consistent, constraint, self.c, self.rng)[1]
        self.consistent = updater(observed)

    def update(self, constraint, predicted, observed):
        self.observe(constraint, observed)
        return "filter"


@dataclass
class FcpEnv:
    """Known-objective environment whose hidden polytope is a class member."""

    cls: HypothesisClass
    truth: int
    c: tuple
    seed: int

    def __post_init__(self):
        self.rng = make_rng(self.seed + 1)

    @property
    def hidden(self):
        return self.cls.halfspaces(self.truth)

    def step(self, constraint):
        res = solve_lp(self.hidden + [constraint], self.c)
        if res.status != OPTIMAL or not res.unique:
            return None
        return res.point

    def draw(self, max_tries=1000):
        S = self.cls.scale
        d = self.cls.d
        for _ in range(max_tries):
            p = tuple(Fraction(int(v), S) for v in self.rng.integers(-S, S + 1, size=d))
            if not any(p):
                continue
            q = Fraction(int(self.rng.integers(-S, S + 1)), S)
            h = Halfspace(p, q)
            x = self.step(h)
            if x is not None:
                return h, x
        raise ConfigError("no valid day for the hidden hypothesis")


def make_fcp_env(cls, seed):
    """Random class member with a unique unconstrained optimum for a random grid objective."""
    rng = make_rng(seed)
    S = cls.scale
    candidates = np.flatnonzero(cls.evaluable)
    while True:
        c = tuple(Fraction(int(v), S) for v in rng.integers(-S, S + 1, size=cls.d))
        if not any(c):
            continue
        k = int(candidates[rng.integers(len(candidates))])
        hs = cls.halfspaces(k)
        res = solve_lp(hs, c)
        if res.status == OPTIMAL and res.unique:
            return FcpEnv(cls, k, c, seed)
