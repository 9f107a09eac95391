"""Poisson structures realizing the system.

Two structures are provided: the linear (Lie-Poisson) structure ``pi1``,
for which the system is generated by H with Casimir C, and ``pi2``, which
generates the same field from C with H as Casimir.  Any member
``a*pi1 - b*pi2`` of their pencil realizes the field with Hamiltonian
``cc*C + dd*H`` whenever ``a*dd - b*cc == 1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import as_state, casimir, gradients, hamiltonian

__all__ = [
    "RealizationParams",
    "PoissonStructure",
    "pi1",
    "pi2",
    "pi_family",
    "h_family",
    "grad_h_family",
    "casimir_family",
    "grad_casimir_family",
    "PI1",
    "PI2",
    "pencil",
    "family_structure",
    "jacobi_residual",
]

PARAM_TOL = 1e-12


@dataclass(frozen=True)
class RealizationParams:
    """Coefficients ``(a, b, cc, dd)`` with ``a*dd - b*cc = 1``.

    ``cc`` and ``dd`` weight C and H in the Hamiltonian of the realization.
    """

    a: float
    b: float
    cc: float
    dd: float

    def __post_init__(self):
        vals = (self.a, self.b, self.cc, self.dd)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"parameters must be finite, got {vals}")
        det = self.a * self.dd - self.b * self.cc
        if abs(det - 1.0) > PARAM_TOL:
            raise ValueError(f"a*dd - b*cc must equal 1, got {det!r}")


@dataclass(frozen=True)
class PoissonStructure:
    label: str
    evaluate: Callable[[np.ndarray], np.ndarray]

    def __call__(self, s) -> np.ndarray:
        return self.evaluate(s)


def _skew(v1: float, v2: float, v3: float) -> np.ndarray:
    return np.array([
        [0.0, v3, -v2],
        [-v3, 0.0, v1],
        [v2, -v1, 0.0],
    ])


def pi1(s) -> np.ndarray:
    x, y, z = as_state(s)
    return _skew(x, y, z)


def pi2(s) -> np.ndarray:
    x, y, z = as_state(s)
    return _skew(-(x**3), -(y**3), z)


def pi_family(p: RealizationParams, s) -> np.ndarray:
    """``a*pi1(s) - b*pi2(s)``.

    Row-wise: ``(0, (a-b)z, -a y - b y^3)``, ``((b-a)z, 0, a x + b x^3)``,
    ``(a y + b y^3, -a x - b x^3, 0)``.
    """
    x, y, z = as_state(s)
    a, b = p.a, p.b
    return _skew(a * x + b * x**3, a * y + b * y**3, (a - b) * z)


def h_family(p: RealizationParams, s) -> float:
    x, y, z = as_state(s)
    return (p.dd / 4.0) * (x**4 + y**4) + (p.cc / 2.0) * (x * x + y * y) + ((p.cc - p.dd) / 2.0) * z * z


def grad_h_family(p: RealizationParams, s) -> np.ndarray:
    grad_h, grad_c = gradients(s)
    return p.cc * grad_c + p.dd * grad_h


def casimir_family(p: RealizationParams, s) -> float:
    return p.a * casimir(s) + p.b * hamiltonian(s)


def grad_casimir_family(p: RealizationParams, s) -> np.ndarray:
    grad_h, grad_c = gradients(s)
    return p.a * grad_c + p.b * grad_h


PI1 = PoissonStructure("Pi1", pi1)
PI2 = PoissonStructure("Pi2", pi2)


def pencil(alpha: float, beta: float) -> PoissonStructure:
    """``alpha*pi1 + beta*pi2``; Jacobi holds for every member."""

    def evaluate(s):
        return alpha * pi1(s) + beta * pi2(s)

    return PoissonStructure(f"Pencil({alpha!r},{beta!r})", evaluate)


def family_structure(p: RealizationParams) -> PoissonStructure:
    return PoissonStructure(f"PiFamily({p.a!r},{p.b!r})", lambda s: pi_family(p, s))


def jacobi_residual(P: PoissonStructure | Callable, s, step: float = 1e-5) -> float:
    """Largest violation of the Jacobi identity at ``s``.

    Computes ``max_{ijk} |sum_l P_il d_l P_jk + P_jl d_l P_ki + P_kl d_l P_ij|``
    with the partial derivatives taken by central differences.
    """
    s = as_state(s)
    M = P(s)
    # dP[l] = d P / d s_l
    dP = np.empty((3, 3, 3))
    for l in range(3):
        e = np.zeros(3)
        e[l] = step
        dP[l] = (P(s + e) - P(s - e)) / (2.0 * step)
    worst = 0.0
    for i, j, k in itertools.product(range(3), repeat=3):
        total = 0.0
        for l in range(3):
            total += M[i, l] * dP[l, j, k] + M[j, l] * dP[l, k, i] + M[k, l] * dP[l, i, j]
        worst = max(worst, abs(total))
    return worst
