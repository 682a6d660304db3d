"""Numerical companion for the area formula on Carnot groups and manifolds.

Submodules: ``algebra`` (graded nilpotent Lie algebras), ``group`` (BCH group
law and box quasidistance), ``frame`` (vector-field frames, flows, normal
coordinates, tangent cones), ``differential`` (horizontal homomorphisms and
Jacobians), ``measure`` (Hausdorff-measure estimators) and ``experiments``.
"""

from . import algebra, differential, frame, group, maps, measure, regions, rng
from .algebra import CarnotAlgebra, Grading, abelian, engel, heisenberg
from .errors import CarnotError

__version__ = "0.1.0"

__all__ = ["CarnotAlgebra", "CarnotError", "Grading", "abelian", "algebra", "differential",
           "engel", "frame", "group", "heisenberg", "maps", "measure", "regions", "rng"]
