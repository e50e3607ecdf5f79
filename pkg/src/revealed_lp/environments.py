"""Ground-truth environments: hidden polytopes, constraint streams and adversaries.

Learners only ever see what ``public`` methods hand them (the day's
constraint or polytope, then the true optimum).  Scoring code reaches the
hidden state through the explicit ``hidden``/``V`` attributes.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

from gmpy2 import mpq

from .errors import ConfigError, InvariantViolation
from .geometry import (
    EmptyPolytopeError,
    Halfspace,
    Polytope,
    as_point,
    dot,
    enumerate_edges,
    validate_assumptions,
)
from .lp_solver import LpProblem, lex_argmax, solve_vertex_lp


class DayRejected(ValueError):
    """The proposed day breaks uniqueness or nondegeneracy; draw another."""


def _rand_frac(rng, lo, hi, den):
    """Uniform rational in [lo, hi] on the grid 1/den."""
    return Fraction(rng.randint(int(lo * den), int(hi * den)), den)


def generic_objective(rng, d):
    """Objective with large coprime denominators, so ties are unlikely."""
    while True:
        c = tuple(Fraction(rng.randint(-10**6, 10**6), 10**6 + 3) for _ in range(d))
        if any(c):
            return c


# --- known objective --------------------------------------------------------

@dataclass(frozen=True)
class KnownObjectiveEnv:
    hidden: Polytope
    c: tuple
    N: int
    seed: int | None = None

    @cached_property
    def vertices(self):
        return self.hidden.vertices

    @cached_property
    def edges(self):
        return enumerate_edges(self.hidden)

    @cached_property
    def x_star(self):
        return solve_vertex_lp(LpProblem(self.hidden, self.c)).point

    @cached_property
    def _fast(self):
        """The vertex list and edge index pairs in gmpy2 rationals."""
        verts = self.vertices
        pos = {v: i for i, v in enumerate(verts)}
        qv = [tuple(mpq(a.numerator, a.denominator) for a in v) for v in verts]
        pairs = [(pos[e.endpoints[0]], pos[e.endpoints[1]]) for e in self.edges]
        return qv, pairs

    def day_vertices(self, constraint):
        """Vertices of hidden ∩ constraint, given the hyperplane misses every vertex."""
        qv, pairs = self._fast
        p = [mpq(a.numerator, a.denominator) for a in constraint.normal]
        q = mpq(constraint.offset.numerator, constraint.offset.denominator)
        vals = [sum(a * b for a, b in zip(p, v)) - q for v in qv]
        if any(s == 0 for s in vals):
            raise DayRejected("constraint hyperplane passes through a vertex")
        pts = [v for v, s in zip(qv, vals) if s < 0]
        for i, j in pairs:
            su, sw = vals[i], vals[j]
            if (su < 0) != (sw < 0):
                lam = su / (su - sw)
                pts.append(tuple(a + lam * (b - a) for a, b in zip(qv[i], qv[j])))
        return [tuple(Fraction(int(a.numerator), int(a.denominator)) for a in x) for x in pts]


def env_step(env: KnownObjectiveEnv, constraint: Halfspace, simple_only=False):
    """Unique optimum of c over hidden ∩ constraint.

    Days whose hyperplane avoids the hidden vertices take a fast path over
    the hidden vertices and edges; the rest are solved exactly over the
    intersected polytope, or rejected when ``simple_only`` is set.  Empty
    days and days with tied optima are rejected.
    """
    try:
        pts = env.day_vertices(constraint)
    except DayRejected:
        if simple_only:
            raise
        try:
            pts = env.hidden.with_constraint(constraint).vertices
        except EmptyPolytopeError:
            pts = []
    if not pts:
        raise DayRejected("constraint leaves nothing feasible")
    x, _, ties = lex_argmax(pts, env.c)
    if ties > 1:
        raise DayRejected("tied optimum")
    return x


def _integer_normals(d):
    return [v for v in product((-1, 0, 1), repeat=d) if any(v)]


def random_polytope(rng, d, m, N, max_tries=10_000):
    """Polytope with m facets, {-1,0,1} normals and 2^-N offsets passing every check."""
    normals = _integer_normals(d)
    S = 1 << N
    for _ in range(max_tries):
        rows = rng.sample(normals, m)
        hs = tuple(Halfspace(a, Fraction(rng.randint(1, S), S)) for a in rows)
        P = Polytope(hs, d)
        report = validate_assumptions(P, N)
        if not report.ok:
            continue
        if any(not any(dot(h.normal, v) == h.offset for v in P.vertices)
               for h in hs):
            continue
        return P
    raise ConfigError(f"no valid polytope for d={d}, m={m}, N={N} after {max_tries} draws")


def generate_instance(seed, d, m, N) -> KnownObjectiveEnv:
    """Deterministic random instance satisfying the unit-ball, grid, rank and simplicity checks."""
    if N < 1 or d < 1 or m <= d:
        raise ConfigError("need N >= 1, d >= 1 and m > d")
    rng = random.Random(seed)
    P = random_polytope(rng, d, m, N)
    while True:
        c = generic_objective(rng, d)
        if solve_vertex_lp(LpProblem(P, c)).unique:
            return KnownObjectiveEnv(P, c, N, seed)


def _random_direction(rng, d, N):
    S = 1 << N
    while True:
        p = tuple(Fraction(rng.randint(-S, S), S) for _ in range(d))
        if any(p):
            return p


def _biased_param(rng, N):
    """Edge parameter in (0, 1), often within 2^-k of an endpoint."""
    if rng.random() < 0.6:
        k = rng.randint(1, N + 3)
        s = Fraction(rng.randint(1, 7), 8) / (1 << k)
        return s if rng.random() < 0.5 else 1 - s
    return Fraction(rng.randint(1, 999), 1000)


def biased_constraint(env, rng):
    """A day aimed at the unknown boundary near the hidden vertices.

    Mostly the hyperplane passes through a random point of a random edge,
    close to a vertex, and cuts the unconstrained optimum off; sometimes the
    constraint does not bind at all.
    """
    d = env.hidden.dimension
    if rng.random() < 0.1:
        p = _random_direction(rng, d, env.N)
        q = max(dot(p, v) for v in env.vertices) + Fraction(rng.randint(1, 8), 8)
        return Halfspace(p, q)
    while True:
        e = rng.choice(env.edges)
        u, w = e.endpoints
        s = _biased_param(rng, env.N)
        z = tuple(a + s * (b - a) for a, b in zip(u, w))
        p = tuple(Fraction(rng.randint(-1000, 1000), 997) for _ in range(d))
        q = dot(p, z)
        xs = dot(p, env.x_star)
        if xs == q or not any(p):
            continue
        if xs < q:
            p, q = tuple(-v for v in p), -q
        return Halfspace(p, q)


def draw_day(env, sampler, rng, max_tries=1000):
    """Draw constraints until one yields a valid day; returns (constraint, truth)."""
    for _ in range(max_tries):
        h = sampler(env, rng)
        try:
            return h, env_step(env, h, simple_only=True)
        except DayRejected:
            continue
    raise ConfigError("constraint sampler produced no valid day in 1000 draws")


# --- stochastic constraints ----------------------------------------------

@dataclass
class StochasticConstraintSource:
    """i.i.d. constraints for a fixed hidden polytope.

    family "cut": normal uniform over N-bit directions; with probability
    ``cut_prob`` the hyperplane passes through a random interior point of
    the hidden polytope, otherwise it clears the polytope entirely.
    family "vertex": the hyperplane shaves a random vertex off by a small
    random amount.  Invalid days are redrawn, so days stay i.i.d.
    """

    family: str = "cut"
    cut_prob: float = 0.8
    seed: int = 0
    rng: random.Random = field(init=False)

    def __post_init__(self):
        if self.family not in ("cut", "vertex"):
            raise ConfigError(f"unknown constraint family {self.family!r}")
        self.rng = random.Random(self.seed)

    def sample(self, env, rng=None):
        rng = rng or self.rng
        d = env.hidden.dimension
        p = _random_direction(rng, d, env.N)
        verts = env.vertices
        if self.family == "cut":
            if rng.random() < self.cut_prob:
                w = [Fraction(rng.randint(1, 100)) for _ in verts]
                tot = sum(w)
                z = tuple(sum(wi * v[j] for wi, v in zip(w, verts)) / tot for j in range(d))
                return Halfspace(p, dot(p, z))
            return Halfspace(p, max(dot(p, v) for v in verts) + Fraction(1, 1 << env.N))
        v = rng.choice(verts)
        delta = Fraction(rng.randint(1, 8), 1 << (env.N + 3))
        return Halfspace(p, dot(p, v) - delta)

    def draw(self, env):
        return draw_day(env, self.sample, self.rng)


# --- known constraints ------------------------------------------------------

@dataclass(frozen=True)
class KnownConstraintsDay:
    polytope: Polytope
    subset: tuple


@dataclass
class KnownConstraintsEnv:
    V: tuple                 # n columns, each a d-vector
    pool: list
    N: int
    seed: int = 0
    rng: random.Random = field(init=False)

    def __post_init__(self):
        self.rng = random.Random(self.seed)

    @property
    def n(self):
        return len(self.V)

    @property
    def d(self):
        return len(self.V[0])

    def flat_V(self):
        return tuple(v for col in self.V for v in col)


def sample_objective_matrix(rng, n, d, N, max_tries=10_000):
    """Columns on the 2^-N grid with Frobenius norm at most 1 (rejection sampling)."""
    S = 1 << N
    for _ in range(max_tries):
        V = tuple(tuple(Fraction(rng.randint(-S, S), S) for _ in range(d)) for _ in range(n))
        fro = sum(v * v for col in V for v in col)
        if 0 < fro <= 1 and all(any(col) for col in V):
            return V
    raise ConfigError("could not sample an objective matrix")


def make_known_constraints_env(seed, n, d, N, pool_size=10, m_choices=None):
    rng = random.Random(seed)
    if m_choices is None:
        m_choices = (d + 1, d + 2, d + 3)
    V = sample_objective_matrix(rng, n, d, N)
    pool = [random_polytope(rng, d, rng.choice(m_choices), N) for _ in range(pool_size)]
    return KnownConstraintsEnv(V, pool, N, seed)


def subset_objective(V, subset):
    d = len(V[0])
    return tuple(sum((V[i][j] for i in subset), Fraction(0)) for j in range(d))


def sample_known_constraints_day(env: KnownConstraintsEnv, max_tries=1000):
    """Random (polytope, subset) with a unique true optimum; returns (day, truth)."""
    n = env.n
    for _ in range(max_tries):
        P = env.rng.choice(env.pool)
        mask = env.rng.randint(1, (1 << n) - 1)
        subset = tuple(i for i in range(n) if mask >> i & 1)
        obj = subset_objective(env.V, subset)
        if not any(obj):
            continue
        sol = solve_vertex_lp(LpProblem(P, obj))
        if sol.unique:
            return KnownConstraintsDay(P, subset), sol.point
    raise ConfigError("no tie-free known-constraints day in 1000 draws")


# --- lower-bound adversary ----------------------------------------------

EPS = Fraction(1, 100)
LOWER_BOUND_OBJECTIVE = (Fraction(0), Fraction(0), Fraction(1))


class ConstructionError(InvariantViolation):
    pass


def _mid(R):
    return (R[0] + R[1]) / 2


def nac(R1, R2):
    """The day's constraint and the two candidate optima for the current intervals."""
    m1, m2 = _mid(R1), _mid(R2)
    r1 = as_point((0, 1, m1))
    r2 = as_point((1, m2, 1 + EPS * m2))
    r3 = as_point((1, m2, 0))
    h = Halfspace((1 - m2, 1, 0), 1)
    for r in (r1, r2, r3):
        if dot(h.normal, r) != h.offset:
            raise InvariantViolation(f"{r} does not bind the adversary constraint")
    return h, r1, r2


def ad2(R1, R2, r1, r2, prediction):
    """Reveal whichever candidate the learner did not predict; halve the intervals."""
    m2 = _mid(R2)
    if tuple(prediction) == r2:
        revealed, R2 = r1, (R2[0], m2)
    else:
        revealed, R2 = r2, (m2, R2[1])
    return revealed, (_mid(R1), R1[1]), R2


def adversary_matrix(R1, R2, transcript=None):
    """Polytope consistent with the adversary's final intervals.

    Rows: -x1 <= 0, x1 <= 1, (f1-1-eps, -eps, 1).x <= f1-eps,
    (-(f2-1) f1, f1, 0).x <= f1, plus x2 >= 0 and x3 >= 0.  When a
    transcript is given, every day is replayed with c = (0, 0, 1) and the
    revealed point must be the unique optimum.
    """
    f1, f2 = _mid(R1), _mid(R2)
    rows = [
        ((-1, 0, 0), 0),
        ((1, 0, 0), 1),
        ((f1 - 1 - EPS, -EPS, 1), f1 - EPS),
        ((-(f2 - 1) * f1, f1, 0), f1),
        ((0, -1, 0), 0),
        ((0, 0, -1), 0),
    ]
    P = Polytope.from_rows([r[0] for r in rows], [r[1] for r in rows])
    if transcript is not None:
        for i, day in enumerate(transcript):
            sol = solve_vertex_lp(LpProblem(P.with_constraint(day.constraint), LOWER_BOUND_OBJECTIVE))
            if sol.point != day.revealed or not sol.unique:
                raise ConstructionError(
                    f"day {i + 1}: replay optimum {sol.point} (unique={sol.unique}) "
                    f"differs from revealed {day.revealed}")
    return P


@dataclass(frozen=True)
class AdversaryDay:
    constraint: Halfspace
    r1: tuple
    r2: tuple
    prediction: tuple
    revealed: tuple


@dataclass
class LowerBoundTranscript:
    days: list
    R1: tuple
    R2: tuple
    consistent: bool
    consistency_error: str | None = None

    @property
    def mistakes(self):
        return sum(1 for d in self.days if d.prediction != d.revealed)


def run_lower_bound(learner, N):
    """Play the adversary for N days against a predict/update learner."""
    R1 = (Fraction(0), Fraction(1))
    R2 = (Fraction(1), Fraction(2))
    days = []
    for _ in range(N):
        h, r1, r2 = nac(R1, R2)
        outcome = learner.predict(h)
        revealed, R1, R2 = ad2(R1, R2, r1, r2, outcome.point)
        days.append(AdversaryDay(h, r1, r2, tuple(outcome.point), revealed))
        if revealed != tuple(outcome.point):
            learner.update(h, outcome, revealed)
    try:
        adversary_matrix(R1, R2, days)
        ok, err = True, None
    except ConstructionError as e:
        ok, err = False, str(e)
    return LowerBoundTranscript(days, R1, R2, ok, err)
