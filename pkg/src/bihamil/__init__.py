"""Analysis and structure-preserving integration of a bi-Hamiltonian system on R^3."""
from .dynamics import (
    EcPoint,
    SymmetryTransform,
    apply_symmetry,
    casimir,
    gradients,
    hamiltonian,
    jacobian,
    vector_field,
)
from .ecmap import EquilibriumFamily, Family, RegionLabel, classify, ec_map, in_image
from .integrator import IntegratorConfig, NonConvergence, Trajectory, integrate, midpoint_step

__version__ = "0.1.0"
