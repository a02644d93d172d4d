"""Sharp Cantelli-type bounds on P(X - b in C) for centered random vectors."""

__version__ = "0.1.0"

from .blocker import ConeSlice, PolyhedralBlocker, blocker_of_polyhedron, blocker_of_shifted_cone, feasibility
from .bounds import (
    BoundMethod,
    BoundReport,
    Graph,
    cantelli_1d,
    cycle_graph,
    graph_matching_bound,
    psd_spherical_bound,
    scalarized_bound,
    tail_bound_cone,
    tail_bound_set,
)
from .cones import Generators, Inequalities, Orthant, PositiveSemidefinite, SecondOrder, cone_from_json
from .config import DEFAULT, Tolerances
from .errors import CantelliError
from .optimize import brute_force_search, closed_form_bound, dual_norm, minimize_over_region
