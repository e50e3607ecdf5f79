"""Episode runner: wires learners to environments, counts mistakes, checks bounds."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass, field

from .baselines import GreedyMemory, RandomGuess
from .environments import (
    LOWER_BOUND_OBJECTIVE,
    KnownObjectiveEnv,
    StochasticConstraintSource,
    biased_constraint,
    draw_day,
    generate_instance,
    make_known_constraints_env,
    run_lower_bound,
    sample_known_constraints_day,
)
from .errors import ConfigError, InvariantViolation
from .fcp import DEFAULT_CAP, FCP, enumerate_class, make_fcp_env
from .geometry import (
    halfspace_to_json,
    point_to_json,
    polytope_to_json,
    rank,
)
from .learn_edge import LearnEdge, learn_low_dim
from .learn_ellipsoid import LearnEllipsoid, default_cut_budget
from .learn_hull import LearnHull
from .lp_solver import hull_membership


# --- bounds -------------------------------------------------------------------

def ceil_log2_two_sqrt(d):
    """ceil(log2(2 sqrt(d))) computed exactly: least k with 4^(k-1) >= d."""
    k = 1
    while 4 ** (k - 1) < d:
        k += 1
    return k


def learn_edge_bound(n_edges, N, d):
    return 1 + 3 * n_edges + 2 * n_edges * (N + ceil_log2_two_sqrt(d) + 2)


def hull_bound(n_edges, T):
    return 2 * n_edges * (math.log(T) + 1)


def fcp_bound(K):
    return math.log(K)


def low_dim_bound(m):
    return 3 * m + 1


@dataclass
class BoundCheck:
    name: str
    inputs: dict
    bound: float
    observed: float
    passed: bool


def check_bound(name, inputs, bound, observed):
    return BoundCheck(name, inputs, bound, observed, observed <= bound)


# --- logs ---------------------------------------------------------------------

@dataclass
class DayRecord:
    day: int
    constraint: str
    prediction: tuple
    truth: tuple
    mistake: bool
    rule_fired: str | None
    cumulative_mistakes: int


@dataclass
class EpisodeLog:
    header: dict
    records: list = field(default_factory=list)

    @property
    def mistakes(self):
        return self.records[-1].cumulative_mistakes if self.records else 0

    def to_json(self):
        return {
            "header": self.header,
            "records": [
                {**asdict(r), "prediction": point_to_json(r.prediction),
                 "truth": point_to_json(r.truth)}
                for r in self.records
            ],
        }


def digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _point_cell(x):
    return ";".join(point_to_json(x))


CSV_COLUMNS = ["day", "mistake", "cumulative_mistakes", "rule_fired", "prediction", "truth"]


def emit(log: EpisodeLog, fmt, path):
    """Write a log as CSV (fixed columns) or JSON."""
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "json":
                json.dump(log.to_json(), fh, indent=1)
            elif fmt == "csv":
                w = csv.writer(fh)
                w.writerow(CSV_COLUMNS)
                for r in log.records:
                    w.writerow([r.day, int(r.mistake), r.cumulative_mistakes, r.rule_fired or "",
                                _point_cell(r.prediction), _point_cell(r.truth)])
            else:
                raise ConfigError(f"unknown format {fmt!r}")
    except OSError as e:
        raise OSError(f"cannot write log to {path}: {e}") from e


# --- knowledge audit ----------------------------------------------------------

def knowledge_violations(state, hidden):
    """Exact audit of a LearnEdge state against the hidden polytope."""
    out = []
    d = hidden.dimension
    for x in state.X:
        if not hidden.contains(x):
            out.append(f"observed point {x} outside the polytope")
    for space, ek in state.edges.items():
        clip = space.clip(hidden)
        if clip is None or clip[0] is None or clip[1] is None or clip[0] >= clip[1]:
            out.append(f"learned line {space} does not carry an edge")
            continue
        lo, hi = clip
        mid = space.point((lo + hi) / 2)
        tight = hidden.binding(mid)
        if rank([hidden.halfspaces[i].normal for i in tight]) != d - 1:
            out.append(f"learned line {space} is not an edge line")
        if not (lo <= ek.f_lo and ek.f_hi <= hi):
            out.append(f"feasible interval of {space} leaves the polytope")
        if ek.y0 > lo or (ek.y0_closed and ek.y0 == lo):
            out.append(f"lower infeasible ray of {space} meets the polytope")
        if ek.y1 < hi or (ek.y1_closed and ek.y1 == hi):
            out.append(f"upper infeasible ray of {space} meets the polytope")
    return out


def halving_failures(state):
    return [r for r in state.history if r.rule in ("U3", "U4") and r.halved is False]


def elim_vertices(state):
    return [r.elim_vertex for r in state.history if r.elim_vertex is not None]


# --- episode loop ---------------------------------------------------------------

def play(learner, next_day, days, header, audit=None):
    """Run the daily predict / reveal / update loop; ``audit(record, learner)`` runs after each day."""
    log = EpisodeLog(header)
    total = 0
    for t in range(1, days + 1):
        public, truth, tag = next_day()
        outcome = learner.predict(public)
        mistake = tuple(outcome.point) != tuple(truth)
        rule = outcome.rule
        if mistake:
            total += 1
            rule = f"{outcome.rule}/{learner.update(public, outcome, truth)}"
        elif hasattr(learner, "observe"):
            learner.observe(public, truth)
        rec = DayRecord(t, tag, tuple(outcome.point), tuple(truth), mistake, rule, total)
        log.records.append(rec)
        if audit is not None:
            audit(rec, learner)
    return log


def _constraint_tag(h):
    return digest(halfspace_to_json(h))


def run_known_objective(seed, d, m, N, days, env=None, audit_knowledge=False):
    """LearnEdge (or the low-dimensional learner for d <= 2) against biased days."""
    env = env or generate_instance(seed, d, m, N)
    rng = random.Random(seed * 7919 + 1)
    low = env.hidden.dimension <= 2
    learner = learn_low_dim(env.hidden.dimension, env.c) if low else LearnEdge(env.c, env.N)
    n_edges = len(env.edges) if env.hidden.dimension >= 2 else 1
    if low:
        bound = low_dim_bound(len(env.hidden)) if env.hidden.dimension == 2 else 1
    else:
        bound = learn_edge_bound(n_edges, env.N, env.hidden.dimension)
    header = {"learner": type(learner).__name__, "environment": "known_objective",
              "config": digest(polytope_to_json(env.hidden)), "seed": seed,
              "edges": n_edges, "bound": bound}

    def next_day():
        h, x = draw_day(env, biased_constraint, rng)
        return h, x, _constraint_tag(h)

    violations = []

    def audit(rec, lrn):
        # knowledge only changes on mistake days
        if audit_knowledge and rec.mistake and isinstance(lrn, LearnEdge):
            for v in knowledge_violations(lrn.state, env.hidden):
                violations.append((rec.day, v))

    log = play(learner, next_day, days, header, audit)
    log.header["violations"] = len(violations)
    checks = [check_bound("mistakes", {"edges": n_edges, "N": env.N, "d": env.hidden.dimension},
                          bound, log.mistakes)]
    return log, checks, learner, env, violations


def run_stochastic(seed, d, m, N, days, family="cut", cut_prob=0.8, prune=True, env=None):
    env = env or generate_instance(seed, d, m, N)
    source = StochasticConstraintSource(family, cut_prob, seed)
    learner = LearnHull(env.c, prune=prune)
    n_edges = len(env.edges)
    bound = hull_bound(n_edges, days)
    header = {"learner": "LearnHull", "environment": f"stochastic/{family}",
              "config": digest(polytope_to_json(env.hidden)), "seed": seed,
              "edges": n_edges, "bound": bound}

    def next_day():
        h, x = source.draw(env)
        return h, x, _constraint_tag(h)

    violations = []
    prev = [()]

    def audit(rec, lrn):
        # a mistake must come from an optimum outside the previous hull, and
        # a hull prediction must be feasible for the hidden polytope
        if rec.mistake and prev[0] and hull_membership(prev[0], rec.truth)[0]:
            violations.append((rec.day, "mistake on an optimum inside the hull"))
        if rec.rule_fired.startswith("hull") and not env.hidden.contains(rec.prediction):
            violations.append((rec.day, "hull prediction outside the polytope"))
        prev[0] = lrn.state.points

    log = play(learner, next_day, days, header, audit)
    log.header["violations"] = len(violations)
    checks = [check_bound("mistakes", {"edges": n_edges, "T": days}, bound, log.mistakes)]
    return log, checks, learner, env, violations


def run_known_constraints(seed, n, d, N, days, pool_size=10, bits=None):
    env = make_known_constraints_env(seed, n, d, N, pool_size)
    learner = LearnEllipsoid(n, d, N, bits=bits)
    budget = default_cut_budget(n * d, N)
    header = {"learner": "LearnEllipsoid", "environment": "known_constraints", "seed": seed,
              "n": n, "d": d, "N": N, "bound": budget}

    def next_day():
        day, x = sample_known_constraints_day(env)
        return day, x, digest([polytope_to_json(day.polytope), list(day.subset)])

    log = play(learner, next_day, days, header)
    checks = [check_bound("cuts", {"D": n * d, "N": N}, budget, learner.state.cut_count)]
    return log, checks, learner, env


def run_fcp(seed, d, m, N, days, cap=DEFAULT_CAP):
    cls = enumerate_class(d, m, N, cap)
    env = make_fcp_env(cls, seed)
    learner = FCP(cls, env.c, seed)
    bound = fcp_bound(len(cls))
    header = {"learner": "FCP", "environment": "fcp", "seed": seed, "d": d, "m": m, "N": N,
              "class_size": len(cls), "bound": bound}

    def next_day():
        h, x = env.draw()
        return h, x, _constraint_tag(h)

    violations = []

    def audit(rec, lrn):
        if env.truth not in lrn.consistent:
            violations.append((rec.day, "true hypothesis filtered out"))

    log = play(learner, next_day, days, header, audit)
    log.header["consistent_left"] = len(learner.consistent)
    checks = [check_bound("expected_mistakes", {"K": len(cls)}, bound, log.mistakes)]
    return log, checks, learner, env, violations


def lower_bound_learner(name, N, seed=0):
    if name == "learn-edge":
        return LearnEdge(LOWER_BOUND_OBJECTIVE, N, strict=False)
    if name == "greedy":
        return GreedyMemory(LOWER_BOUND_OBJECTIVE)
    if name == "random":
        return RandomGuess(3, seed)
    raise ConfigError(f"unknown lower-bound learner {name!r}")


def run_lower_bound_episode(N, learner_name="learn-edge", seed=0):
    learner = lower_bound_learner(learner_name, N, seed)
    tr = run_lower_bound(learner, N)
    header = {"learner": learner_name, "environment": "lower_bound", "N": N, "seed": seed,
              "bound": N, "consistent": tr.consistent}
    log = EpisodeLog(header)
    total = 0
    for t, day in enumerate(tr.days, 1):
        mistake = day.prediction != day.revealed
        total += mistake
        log.records.append(DayRecord(t, _constraint_tag(day.constraint), day.prediction,
                                     day.revealed, mistake, None, total))
    checks = [BoundCheck("mistakes_at_least", {"N": N}, N, log.mistakes, log.mistakes >= N),
              BoundCheck("matrix_consistent", {}, 1, int(tr.consistent), tr.consistent)]
    return log, checks, tr


# --- command line -------------------------------------------------------------

EXIT_OK, EXIT_BOUND, EXIT_CONTRACT, EXIT_CONFIG = 0, 2, 3, 64


def _positive(name, v, lo=1):
    if v is None or v < lo:
        raise ConfigError(f"--{name} must be >= {lo}, got {v}")
    return v


def _load_instance(path, N):
    from .geometry import polytope_from_json, point_from_json
    from .environments import generic_objective
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read instance {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"instance {path} is not valid JSON: {e}") from e
    P = polytope_from_json(data["polytope"] if "polytope" in data else data)
    N = data.get("N", N)
    c = point_from_json(data["c"]) if "c" in data else generic_objective(random.Random(0), P.dimension)
    return P, c, N


def build_parser():
    import argparse
    p = argparse.ArgumentParser(prog="revealed-lp",
                                description="Learn hidden LP constraints from revealed optima.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one episode")
    run.add_argument("environment",
                     choices=["known-objective", "stochastic", "known-constraints", "fcp", "lower-bound"])
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--days", type=int, default=500)
    run.add_argument("--d", type=int, default=3)
    run.add_argument("--m", type=int, default=6)
    run.add_argument("--N", type=int, default=4)
    run.add_argument("--n", type=int, default=2, help="number of objective rows (known constraints)")
    run.add_argument("--family", choices=["cut", "vertex"], default="cut")
    run.add_argument("--learner", default="learn-edge", help="lower-bound foil: learn-edge|greedy|random")
    run.add_argument("--instance", help="JSON instance for known-objective runs")
    run.add_argument("--out", help="log destination")
    run.add_argument("--format", choices=["csv", "json"], default="csv")
    run.add_argument("--check-bounds", action="store_true")

    val = sub.add_parser("validate", help="check an instance against the standing assumptions")
    val.add_argument("instance")
    val.add_argument("--N", type=int, default=4)

    gen = sub.add_parser("gen-instance", help="write a random valid instance")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--d", type=int, default=3)
    gen.add_argument("--m", type=int, default=6)
    gen.add_argument("--N", type=int, default=4)
    gen.add_argument("--out")
    return p


def _run(args):
    _positive("days", args.days)
    _positive("N", args.N)
    env_name = args.environment
    if env_name == "known-objective":
        env = None
        if args.instance:
            P, c, N = _load_instance(args.instance, args.N)
            env = KnownObjectiveEnv(P, c, N, args.seed)
        else:
            _positive("d", args.d)
            _positive("m", args.m, args.d + 1)
        log, checks, _, _, violations = run_known_objective(
            args.seed, args.d, args.m, args.N, args.days, env=env, audit_knowledge=args.check_bounds)
        if violations:
            t, what = violations[0]
            raise InvariantViolation(f"knowledge audit failed on day {t}: {what}")
    elif env_name == "stochastic":
        _positive("d", args.d, 2)
        _positive("m", args.m, args.d + 1)
        log, checks, _, _, violations = run_stochastic(args.seed, args.d, args.m, args.N, args.days, args.family)
        if violations:
            t, what = violations[0]
            raise InvariantViolation(f"hull audit failed on day {t}: {what}")
    elif env_name == "known-constraints":
        _positive("n", args.n)
        _positive("d", args.d)
        log, checks, _, _ = run_known_constraints(args.seed, args.n, args.d, args.N, args.days)
    elif env_name == "fcp":
        _positive("d", args.d)
        _positive("m", args.m)
        log, checks, _, _, violations = run_fcp(args.seed, args.d, args.m, args.N, args.days)
        if violations:
            t, what = violations[0]
            raise InvariantViolation(f"consistency audit failed on day {t}: {what}")
    else:
        log, checks, _ = run_lower_bound_episode(args.N, args.learner, args.seed)
    if args.out:
        emit(log, args.format, args.out)
    for ch in checks:
        status = "PASS" if ch.passed else "FAIL"
        print(f"{ch.name}: observed={ch.observed} bound={ch.bound:.4g} {status}")
    print(f"mistakes={log.mistakes} days={len(log.records)}")
    if args.check_bounds and not all(ch.passed for ch in checks):
        return EXIT_BOUND
    return EXIT_OK


def _validate(args):
    from .geometry import validate_assumptions, GeometryError
    P, _, N = _load_instance(args.instance, args.N)
    try:
        report = validate_assumptions(P, N)
    except GeometryError as e:
        print(f"invalid: {e}")
        return EXIT_CONTRACT
    for name, ch in report.checks.items():
        print(f"{name}: {'ok' if ch.passed else 'FAIL ' + ch.detail}")
    return EXIT_OK if report.ok else EXIT_CONTRACT


def _gen_instance(args):
    env = generate_instance(args.seed, args.d, args.m, args.N)
    data = {"polytope": polytope_to_json(env.hidden), "c": point_to_json(env.c), "N": env.N}
    text = json.dumps(data, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return EXIT_OK


def main(argv=None):
    import sys
    from .geometry import AssumptionViolation
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "validate":
            return _validate(args)
        return _gen_instance(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantViolation, AssumptionViolation) as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
