"""Surface finite elements for nonlinear elliptic Dirichlet problems with a
discrete maximum principle audit."""

__version__ = "0.1.0"

from .assembly import assemble, element_geometry, gradient_pair_products, quad_edge_midpoint
from .audit import (
    AuditReport,
    algebraic_dwmp_oracle,
    audit,
    check_angles,
    check_dmp,
    check_matrix_conditions,
)
from .linalg import cg_solve, cholesky_solve, ldl_factor
from .mesh import (
    SurfaceMesh,
    Torus,
    UnitHemisphere,
    angle_stats,
    generate_hemisphere,
    generate_semitorus,
    mesh_h,
    mesh_regularity,
    refine,
)
from .problems import ProblemSpec, catalog, r_of
from .solver import SolveOptions, SolveReport, picard_solve
