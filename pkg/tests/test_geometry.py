import random
from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from conftest import brute_any_collinear, brute_edge_count, brute_vertices, cube, square
from revealed_lp.environments import generate_instance
from revealed_lp.geometry import (
    AssumptionViolation,
    DimensionError,
    EdgeSpace,
    EmptyPolytopeError,
    Halfspace,
    Hyperplane,
    Polytope,
    UnboundedPolytopeError,
    check_collinear,
    det_int,
    enumerate_edges,
    enumerate_vertices,
    grid_points_in_interval,
    halfspace_from_json,
    halfspace_to_json,
    on_grid,
    polytope_from_json,
    polytope_to_json,
    rank,
    solve,
    validate_assumptions,
)

fractions = st.fractions(min_value=-10, max_value=10, max_denominator=50)


# --- rationals and linear algebra ---------------------------------------------

@given(fractions, fractions.filter(lambda v: v != 0))
def test_rational_round_trip(a, b):
    assert (a + b) - b == a
    assert (a * b) / b == a


def test_det_int_known_values():
    assert det_int([[2, 0], [0, 3]]) == 6
    assert det_int([[1, 2], [2, 4]]) == 0
    assert det_int([[0, 1, 0], [1, 0, 0], [0, 0, 1]]) == -1


@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=3, max_size=3))
def test_det_int_matches_cofactor_expansion(M):
    a, b, c = M
    expected = (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]))
    assert det_int(M) == expected


def test_solve_and_rank():
    assert solve([[1, 1], [1, -1]], [2, 0]) == (1, 1)
    assert solve([[1, 1], [2, 2]], [1, 2]) is None
    assert rank([(1, 0, 0), (2, 0, 0), (0, 1, 0)]) == 2


def test_zero_normal_rejected():
    with pytest.raises(ValueError):
        Halfspace((0, 0), 1)
    with pytest.raises(ValueError):
        Hyperplane((0, 0), 1)


# --- vertices -------------------------------------------------------------------

def test_square_vertices():
    assert set(enumerate_vertices(square())) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_simplex_vertices():
    P = Polytope.from_rows([(-1, 0), (0, -1), (1, 1)], [0, 0, 1])
    assert set(enumerate_vertices(P)) == {(0, 0), (1, 0), (0, 1)}


def test_vertices_structural_errors():
    with pytest.raises(UnboundedPolytopeError):
        enumerate_vertices(Polytope.from_rows([(1, 0), (0, 1)], [1, 1]))
    with pytest.raises(UnboundedPolytopeError):
        enumerate_vertices(Polytope.from_rows([(1, 0), (-1, 0)], [1, 1]))
    with pytest.raises(EmptyPolytopeError):
        enumerate_vertices(Polytope.from_rows([(1, 0), (-1, 0), (0, 1), (0, -1)], [-1, 0, 1, 1]))


@pytest.mark.parametrize("seed", range(8))
def test_random_vertices_match_sympy_subset_solve(seed):
    P = generate_instance(seed, 3, 5, 4).hidden
    assert set(enumerate_vertices(P)) == brute_vertices(P)


@pytest.mark.parametrize("seed", range(6))
def test_vertices_feasible_and_binding(seed):
    P = generate_instance(seed, 3, 6, 4).hidden
    for v in enumerate_vertices(P):
        assert P.contains(v)
        tight = P.binding(v)
        assert len(tight) >= 3
        assert rank([P.halfspaces[i].normal for i in tight]) == 3


# --- edges ------------------------------------------------------------------------

def test_square_and_cube_edges():
    assert len(enumerate_edges(square())) == 4
    assert len(enumerate_edges(cube())) == 12


@pytest.mark.parametrize("seed", range(6))
def test_random_edges_match_vertex_adjacency(seed):
    P = generate_instance(seed, 3, 6, 4).hidden
    edges = enumerate_edges(P)
    assert len(edges) == brute_edge_count(P)
    verts = set(enumerate_vertices(P))
    for e in edges:
        u, w = e.endpoints
        assert u in verts and w in verts
        mid = e.space.point((e.t_lo + e.t_hi) / 2)
        assert len(P.binding(mid)) == 2


def pyramid():
    # square base z >= 0 and four faces meeting at the apex (0, 0, 1)
    rows = [(0, 0, -1), (2, 0, 1), (-2, 0, 1), (0, 2, 1), (0, -2, 1)]
    return Polytope.from_rows(rows, [0, 1, 1, 1, 1])


def test_pyramid_apex_is_degenerate():
    P = pyramid()
    assert len(P.binding((0, 0, 1))) == 4
    with pytest.raises(AssumptionViolation) as err:
        enumerate_edges(P)
    assert err.value.assumption == "assumption-5"
    report = validate_assumptions(P, 2)
    assert "simple_vertices" in report.failures()


# --- collinearity -------------------------------------------------------------------

def test_check_collinear_examples():
    line = check_collinear({(0, 0, 0), (1, 1, 1)}, (2, 2, 2))
    assert line == EdgeSpace.canonical((0, 0, 0), (1, 1, 1))
    assert line.base == (0, 0, 0) and line.direction == (1, 1, 1)
    assert check_collinear({(0, 0), (1, 0)}, (0, 1)) is None


def test_check_collinear_segment_with_noise():
    rng = random.Random(5)
    a, b = (F(1), F(2)), (F(3), F(5))
    on = [tuple(p + s * (q - p) for p, q in zip(a, b))
          for s in (F(rng.randint(1, 99), 100) for _ in range(6))]
    off = [(F(rng.randint(0, 40), 7), F(rng.randint(0, 40), 11)) for _ in range(4)]
    z = tuple(p + F(1, 3) * (q - p) for p, q in zip(a, b))
    line = check_collinear(set(on + off), z)
    assert line == EdgeSpace.through(a, b)
    assert brute_any_collinear(on + off, z)


def test_check_collinear_dimension_mismatch():
    with pytest.raises(DimensionError):
        check_collinear({(0, 0), (1, 1)}, (2, 2, 2))


small = st.fractions(min_value=-3, max_value=3, max_denominator=2)


@given(st.lists(st.tuples(small, small), min_size=2, max_size=6, unique=True), st.tuples(small, small))
def test_check_collinear_matches_brute_force(X, z):
    X = [x for x in X if x != z]
    got = check_collinear(X, z)
    assert (got is not None) == brute_any_collinear(X, z)
    if got is not None:
        assert got.contains(z)
        assert sum(got.contains(x) for x in X) >= 2


def test_check_collinear_is_deterministic():
    X = [(F(i), F(2 * i)) for i in range(5)] + [(F(1), F(0))]
    assert check_collinear(X, (F(7), F(14))) == check_collinear(list(reversed(X)), (F(7), F(14)))


def test_edge_space_canonical_form():
    a = EdgeSpace.canonical((1, 1), (2, 2))
    b = EdgeSpace.canonical((5, 5), (-3, -3))
    assert a == b
    assert a.direction == (1, 1) and a.base == (0, 0)
    c = EdgeSpace.canonical((0, 1), (0, -2))
    assert c.direction == (0, 1) and c.base == (0, 0)


@pytest.mark.parametrize("seed", range(4))
def test_collinear_points_on_edges_share_one_edge(seed):
    env = generate_instance(seed, 3, 6, 4)
    rng = random.Random(seed)
    edges = env.edges
    pts = []
    for e in edges:
        for _ in range(2):
            pts.append(e.space.point(e.t_lo + F(rng.randint(0, 8), 8) * (e.t_hi - e.t_lo)))
    for x, y, z in combinations(set(pts), 3):
        line = check_collinear([x, y], z)
        if line is None:
            continue
        holders = [e for e in edges if all(
            e.space.contains(p) and e.t_lo <= e.space.param(p) <= e.t_hi for p in (x, y, z))]
        assert holders, (x, y, z)


# --- assumptions and grids --------------------------------------------------------------

def test_validate_unit_square():
    assert validate_assumptions(square(), 1).ok


def test_validate_scaled_square():
    P = Polytope.from_rows([(1, 0), (-1, 0), (0, 1), (0, -1)], [3, 3, 3, 3])
    report = validate_assumptions(P, 1)
    assert report.failures() == ["unit_ball"]
    assert report.checks["unit_ball"].witness == (3, 3)


def test_validate_cube_fails_row_rank():
    assert validate_assumptions(cube(), 1).failures() == ["row_rank"]


def test_validate_off_grid_and_unbounded():
    P = Polytope.from_rows([(1, 0), (-1, 0), (0, 1), (0, -1)], [F(1, 3), 1, 1, 1])
    assert validate_assumptions(P, 4).failures() == ["grid_vertices"]
    Q = Polytope.from_rows([(1, 0), (0, 1)], [1, 1])
    assert validate_assumptions(Q, 1).failures() == ["bounded_nonempty"]


def test_grid_points_examples():
    x_axis = EdgeSpace.canonical((0, 0), (1, 0))
    assert grid_points_in_interval(x_axis, F(3, 8), F(9, 16), 2) == [(F(1, 2), 0)]
    assert grid_points_in_interval(x_axis, F(3, 8), F(9, 16), 0) == []


def test_grid_points_match_bounding_box_scan():
    line = EdgeSpace.canonical((0, 0), (1, 2))
    N = 3
    got = set(grid_points_in_interval(line, 0, 1, N))
    S = 1 << N
    scan = set()
    for i in range(0, S + 1):
        for j in range(0, 2 * S + 1):
            p = (F(i, S), F(j, S))
            t = line.param(p)
            if t is not None and 0 <= t <= 1:
                scan.add(p)
    assert got == scan and len(got) == S + 1


@given(st.integers(-8, 8), st.integers(-8, 8), st.integers(1, 4), st.integers(0, 4),
       st.fractions(-2, 2, max_denominator=16), st.fractions(0, 2, max_denominator=16))
def test_grid_points_on_grid_and_in_range(b1, b2, u2, N, t0, width):
    line = EdgeSpace.canonical((F(b1, 4), F(b2, 4)), (1, F(u2, 2)))
    for p in grid_points_in_interval(line, t0, t0 + width, N):
        assert on_grid(p, N)
        assert t0 <= line.param(p) <= t0 + width


# --- serialization --------------------------------------------------------------------

def test_polytope_json_round_trip():
    P = generate_instance(1, 3, 6, 4).hidden
    data = polytope_to_json(P)
    assert all(isinstance(v, str) and "/" in v for h in data["halfspaces"] for v in h["a"])
    assert polytope_from_json(data) == P
    h = Halfspace((F(1, 2), F(-3, 4)), F(5, 8))
    assert halfspace_from_json(halfspace_to_json(h)) == h
