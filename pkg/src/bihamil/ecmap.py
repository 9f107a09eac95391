"""The energy-Casimir map ``s -> (H(s), C(s))`` and its image.

The image is ``{c >= -h, c >= sqrt(h)}``.  The critical points of the map
(which are also the equilibria of the system) lie on five lines through
the origin; their images cut the image into strata:

==========  ========================================
Sigma12s    c = sqrt(h), h >= 0      (E1, E2)
Sigma3s     c = -h, h <= 0           (E3)
Sigma45u    c = sqrt(2h), h > 0      (E4, E5)
SigmaP1     sqrt(h) < c < sqrt(2h), h > 0
SigmaP2     c > -h for h < 0, c > sqrt(2h) for h >= 0
==========  ========================================

with the origin singled out as the bifurcation point.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import EcPoint, as_state, casimir, hamiltonian

__all__ = [
    "RegionLabel",
    "Family",
    "EquilibriumFamily",
    "ec_map",
    "in_image",
    "classify",
    "critical_points",
    "dec_matrix",
    "rank_dec",
    "on_critical_family",
    "image_of_family",
    "scan_image",
]

DEFAULT_TOL = 1e-9


class RegionLabel(str, enum.Enum):
    SIGMA12S = "Sigma12s"
    SIGMA3S = "Sigma3s"
    SIGMA45U = "Sigma45u"
    SIGMAP1 = "SigmaP1"
    SIGMAP2 = "SigmaP2"
    BIFURCATION = "BifurcationPoint"
    OUTSIDE = "Outside"


class Family(str, enum.Enum):
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"
    E4 = "E4"
    E5 = "E5"


@dataclass(frozen=True)
class EquilibriumFamily:
    family: Family
    M: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not math.isfinite(self.M):
            raise ValueError(f"M must be finite, got {self.M!r}")

    def realize(self) -> np.ndarray:
        M = float(self.M)
        return {
            Family.E1: np.array([M, 0.0, 0.0]),
            Family.E2: np.array([0.0, M, 0.0]),
            Family.E3: np.array([0.0, 0.0, M]),
            Family.E4: np.array([M, M, 0.0]),
            Family.E5: np.array([M, -M, 0.0]),
        }[self.family]


def ec_map(s) -> EcPoint:
    return EcPoint(hamiltonian(s), casimir(s))


def in_image(p, tol: float = 0.0) -> bool:
    """True iff ``c >= -h`` and ``c >= sqrt(h)`` (the latter only for h > 0).

    ``tol`` relaxes both inequalities by an absolute amount.
    """
    h, c = float(p[0]), float(p[1])
    if c < -h - tol:
        return False
    return h <= 0.0 or c >= math.sqrt(h) - tol


def classify(p, tol: float = DEFAULT_TOL) -> RegionLabel:
    """Stratum of the image containing ``p = (h, c)``.

    Curve membership is tested with absolute tolerance ``tol`` before the
    open regions.  The segment ``h == 0, c > 0`` belongs to SigmaP2.
    """
    h, c = float(p[0]), float(p[1])
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if abs(h) <= tol and abs(c) <= tol:
        return RegionLabel.BIFURCATION
    if not in_image((h, c), tol):
        return RegionLabel.OUTSIDE
    hp = max(h, 0.0)
    if h >= -tol and abs(c - math.sqrt(hp)) <= tol:
        return RegionLabel.SIGMA12S
    if h <= tol and abs(c + h) <= tol:
        return RegionLabel.SIGMA3S
    if h > 0.0 and abs(c - math.sqrt(2.0 * h)) <= tol:
        return RegionLabel.SIGMA45U
    if h > 0.0 and math.sqrt(h) < c < math.sqrt(2.0 * h):
        return RegionLabel.SIGMAP1
    if (h < 0.0 and c > -h) or (h >= 0.0 and c > math.sqrt(2.0 * h)):
        return RegionLabel.SIGMAP2
    # only reachable through the tolerance band just outside a boundary curve
    return RegionLabel.OUTSIDE


def critical_points(M: float) -> list[np.ndarray]:
    """Representatives of E1..E5 at parameter ``M``."""
    return [EquilibriumFamily(f, M).realize() for f in Family]


def dec_matrix(s) -> np.ndarray:
    """Derivative of the energy-Casimir map, rows ``dH`` and ``dC``."""
    x, y, z = as_state(s)
    return np.array([[x**3, y**3, -z], [x, y, z]])


def rank_dec(s, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank of :func:`dec_matrix`.

    Counts singular values above ``tol`` times the largest one.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    sv = np.linalg.svd(dec_matrix(s), compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def on_critical_family(s, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``s`` lies on one of the five lines E1..E5 within ``tol``."""
    x, y, z = as_state(s)
    ax, ay, az = abs(x), abs(y), abs(z)
    return (
        (ay <= tol and az <= tol)
        or (ax <= tol and az <= tol)
        or (ax <= tol and ay <= tol)
        or (az <= tol and abs(x - y) <= tol)
        or (az <= tol and abs(x + y) <= tol)
    )


def image_of_family(f: EquilibriumFamily) -> EcPoint:
    M2 = float(f.M) ** 2
    if f.family in (Family.E1, Family.E2):
        return EcPoint(0.25 * M2 * M2, 0.5 * M2)
    if f.family is Family.E3:
        return EcPoint(-0.5 * M2, 0.5 * M2)
    return EcPoint(0.5 * M2 * M2, M2)


def scan_image(h_min: float, h_max: float, c_min: float, c_max: float,
               resolution: int, tol: float = DEFAULT_TOL) -> list[tuple[float, float, RegionLabel]]:
    """Label a ``resolution x resolution`` grid of (h, c) points.

    A degenerate range (``min == max``) on an axis collapses it to one value.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    for lo, hi, name in ((h_min, h_max, "h"), (c_min, c_max, "c")):
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise ValueError(f"invalid {name} range [{lo}, {hi}]")
    hs = [h_min] if h_min == h_max else np.linspace(h_min, h_max, resolution).tolist()
    cs = [c_min] if c_min == c_max else np.linspace(c_min, c_max, resolution).tolist()
    return [(h, c, classify((h, c), tol)) for h in hs for c in cs]
