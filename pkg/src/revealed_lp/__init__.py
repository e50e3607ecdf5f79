"""Learning hidden linear-program constraints from revealed optimal solutions."""
from .geometry import Halfspace, Hyperplane, Polytope, EdgeSpace, enumerate_vertices, enumerate_edges
from .lp_solver import solve_vertex_lp, maximize_over_hull, hull_membership
from .learn_edge import LearnEdge, LearnLine, LearnPlane, learn_low_dim
from .learn_hull import LearnHull
from .learn_ellipsoid import LearnEllipsoid
from .fcp import FCP, enumerate_class

__all__ = [
    "Halfspace", "Hyperplane", "Polytope", "EdgeSpace", "enumerate_vertices", "enumerate_edges",
    "solve_vertex_lp", "maximize_over_hull", "hull_membership",
    "LearnEdge", "LearnLine", "LearnPlane", "learn_low_dim", "LearnHull", "LearnEllipsoid",
    "FCP", "enumerate_class",
]
