"""The three-dimensional system with quartic energy and the so(3) Casimir.

    x' = y z (1 + y^2)
    y' = -x z (1 + x^2)
    z' = x y (x^2 - y^2)

with constants of motion

    H = (x^4 + y^4)/4 - z^2/2,    C = (x^2 + y^2 + z^2)/2.

States are float64 arrays of shape (3,).
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

__all__ = [
    "EcPoint",
    "SymmetryTransform",
    "as_state",
    "hamiltonian",
    "casimir",
    "vector_field",
    "vector_field_cross",
    "jacobian",
    "gradients",
    "apply_symmetry",
]


class EcPoint(NamedTuple):
    """Value of (H, C) at a state."""

    h: float
    c: float


def as_state(s) -> np.ndarray:
    """Coerce ``s`` to a finite float64 vector of length 3.

    Raises ``ValueError`` for wrong shape or non-finite components.
    """
    arr = np.asarray(s, dtype=np.float64)
    if arr.shape != (3,):
        raise ValueError(f"state must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"state must be finite, got {arr}")
    return arr


def hamiltonian(s) -> float:
    x, y, z = as_state(s)
    return 0.25 * x**4 + 0.25 * y**4 - 0.5 * z**2


def casimir(s) -> float:
    x, y, z = as_state(s)
    return 0.5 * (x * x + y * y + z * z)


def vector_field(s) -> np.ndarray:
    x, y, z = as_state(s)
    return np.array([
        y * z * (1.0 + y * y),
        -x * z * (1.0 + x * x),
        x * y * (x * x - y * y),
    ])


def jacobian(s) -> np.ndarray:
    """Analytic derivative of :func:`vector_field`."""
    x, y, z = as_state(s)
    return np.array([
        [0.0, 3.0 * y * y * z + z, y**3 + y],
        [-3.0 * x * x * z - z, 0.0, -(x**3) - x],
        [3.0 * x * x * y - y**3, x**3 - 3.0 * x * y * y, 0.0],
    ])


def gradients(s) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(grad H, grad C)``."""
    x, y, z = as_state(s)
    return np.array([x**3, y**3, -z]), np.array([x, y, z])


def vector_field_cross(s) -> np.ndarray:
    """The same field written as ``grad H x grad C``.

    Kept separate from :func:`vector_field` so the two can be checked
    against each other.
    """
    grad_h, grad_c = gradients(s)
    return np.cross(grad_h, grad_c)


class SymmetryTransform(enum.Enum):
    """Linear coordinate maps sending solutions to solutions.

    Each value is the 3x3 matrix of the map, so ``T(s) = T.matrix @ s``.
    """

    NEG_XY = "(-x,-y,z)"
    NEG_XZ = "(-x,y,-z)"
    NEG_YZ = "(x,-y,-z)"
    ROT_PLUS = "(-y,x,z)"
    ROT_MINUS = "(y,-x,z)"

    @property
    def matrix(self) -> np.ndarray:
        return _SYMMETRY_MATRICES[self].copy()


_SYMMETRY_MATRICES = {
    SymmetryTransform.NEG_XY: np.diag([-1.0, -1.0, 1.0]),
    SymmetryTransform.NEG_XZ: np.diag([-1.0, 1.0, -1.0]),
    SymmetryTransform.NEG_YZ: np.diag([1.0, -1.0, -1.0]),
    SymmetryTransform.ROT_PLUS: np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    SymmetryTransform.ROT_MINUS: np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
}


def apply_symmetry(t: SymmetryTransform, s) -> np.ndarray:
    # the maps are signed permutations, so the product is exact
    return _SYMMETRY_MATRICES[t] @ as_state(s)
