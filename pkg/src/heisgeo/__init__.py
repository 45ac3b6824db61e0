"""heisgeo: numerics for the sub-Riemannian geometry of Heisenberg groups.

Submodules:
    group        group law, dilations, gauge metric, horizontal frame
    geodesics    closed-form Carnot-Caratheodory geodesics and distance
    contraction  spherical chart, contraction maps and their Jacobians
    energy       Korevaar-Schoen, Pansu and horizontal energies on grids
    variational  isotropy/Legendrian residuals, lifting, constrained solver
    cli          command-line interface (entry point `heisgeo`)
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .group import (
    HPoint,
    dilate,
    gauge_dist,
    gauge_norm,
    group_inv,
    group_mul,
    homogeneous_dimension,
    horizontal_frame,
    omega,
)
from .geodesics import (
    GeodesicChart,
    cc_distance,
    eval_geodesic,
    geodesic_between,
    geodesic_from_origin,
    geodesic_velocity,
    solve_tau,
)

__all__ = [
    "__version__",
    "backend_name",
    "HPoint",
    "group_mul",
    "group_inv",
    "dilate",
    "gauge_norm",
    "gauge_dist",
    "omega",
    "horizontal_frame",
    "homogeneous_dimension",
    "GeodesicChart",
    "solve_tau",
    "geodesic_from_origin",
    "eval_geodesic",
    "geodesic_velocity",
    "geodesic_between",
    "cc_distance",
]
