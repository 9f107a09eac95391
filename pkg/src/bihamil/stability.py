"""Stability of the equilibrium families and periods of nearby orbits.

E4/E5 are saddles (real eigenvalue pair) for M != 0.  E1, E2, E3 pass the
energy-Casimir (Arnold) test: the Hessian of ``H + lam*C`` restricted to the
tangent plane of the Casimir sphere is definite.  The origin is stable
because C itself is a conserved, positive definite function there.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import as_state, gradients, jacobian, vector_field
from .ecmap import EquilibriumFamily, Family
from .integrator import IntegratorConfig, midpoint_step

__all__ = [
    "Verdict",
    "StabilityVerdict",
    "WrongFamily",
    "NoMultiplier",
    "eigenvalues_3x3",
    "spectrum_at",
    "arnold_test",
    "classify_equilibrium",
    "predicted_period",
    "moser_integral",
    "moser_surface_value",
    "PeriodMeasurement",
    "measure_period",
]

DEFINITE_TOL = 1e-9
UNSTABLE_TOL = 1e-9


class WrongFamily(ValueError):
    pass


class NoMultiplier(ArithmeticError):
    pass


class Verdict(str, enum.Enum):
    NONLINEARLY_STABLE = "NonlinearlyStable"
    UNSTABLE = "Unstable"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class StabilityVerdict:
    family: EquilibriumFamily
    spectrum: tuple[complex, complex, complex]
    verdict: Verdict
    certificate: str
    multiplier: float | None = None
    restricted_eigenvalues: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "family": self.family.family.value,
            "M": float(self.family.M),
            "verdict": self.verdict.value,
            "certificate": self.certificate,
            "spectrum": [{"re": z.real, "im": z.imag} for z in self.spectrum],
            "max_real_eigenvalue": max(z.real for z in self.spectrum),
            "multiplier": self.multiplier,
            "restricted_eigenvalues": (
                None if self.restricted_eigenvalues is None else list(self.restricted_eigenvalues)
            ),
        }


# ---------------------------------------------------------------------------
# 3x3 eigenvalues


def _cubic_roots(a2: float, a1: float, a0: float) -> list[complex]:
    """Roots of ``t^3 + a2 t^2 + a1 t + a0`` by Cardano / Viete."""
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    scale = max(abs(a2), math.sqrt(abs(a1)), abs(a0) ** (1.0 / 3.0), 1e-300)
    if abs(p) <= 1e-15 * scale * scale and abs(q) <= 1e-15 * scale**3:
        roots = [0.0, 0.0, 0.0]
    elif 4.0 * p**3 + 27.0 * q * q <= 0.0:
        # three real roots
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [r * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    else:
        d = math.sqrt(q * q / 4.0 + p**3 / 27.0)
        u = float(np.cbrt(-q / 2.0 + d) + np.cbrt(-q / 2.0 - d))
        # deflate: t^2 + u t + (u^2 + p)
        disc = cmath.sqrt(u * u - 4.0 * (u * u + p))
        roots = [u, (-u + disc) / 2.0, (-u - disc) / 2.0]
    out = []
    for t in roots:
        t = complex(t)
        # polish with a couple of Newton steps on the depressed cubic
        for _ in range(3):
            g = t**3 + p * t + q
            dg = 3.0 * t * t + p
            if dg == 0:
                break
            t_new = t - g / dg
            if abs(t_new**3 + p * t_new + q) >= abs(g):
                break
            t = t_new
        out.append(t - shift)
    return out


def eigenvalues_3x3(A) -> tuple[complex, complex, complex]:
    """Eigenvalues of a real 3x3 matrix, sorted by (real, imag).

    Solves the characteristic polynomial in closed form.
    """
    A = np.asarray(A, dtype=np.float64)
    tr = A[0, 0] + A[1, 1] + A[2, 2]
    minors = (
        A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        + A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]
        + A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1]
    )
    det = (
        A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
        - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
        + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
    )
    roots = _cubic_roots(-tr, minors, -det)
    # snap roundoff-level parts so conjugate pairs and real roots sort cleanly
    big = max(1.0, max(abs(r) for r in roots))
    cleaned = []
    for r in roots:
        re = 0.0 if abs(r.real) <= 1e-14 * big else r.real
        im = 0.0 if abs(r.imag) <= 1e-14 * big else r.imag
        cleaned.append(complex(re, im))
    return tuple(sorted(cleaned, key=lambda z: (z.real, z.imag)))


def spectrum_at(f: EquilibriumFamily | Family | str, M: float | None = None) -> tuple[complex, complex, complex]:
    """Eigenvalues of the linearization at the family point."""
    fam = _family(f, M)
    return eigenvalues_3x3(jacobian(fam.realize()))


def _family(f, M) -> EquilibriumFamily:
    if isinstance(f, EquilibriumFamily):
        return f
    if M is None:
        raise TypeError("M is required when f is not an EquilibriumFamily")
    return EquilibriumFamily(Family(f), M)


# ---------------------------------------------------------------------------
# Arnold test

# Orthonormal basis of the Casimir tangent plane at the family point.
_KERNEL_BASIS = {
    Family.E1: np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
    Family.E2: np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    Family.E3: np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
}


def _hessians(s) -> tuple[np.ndarray, np.ndarray]:
    x, y, _ = as_state(s)
    return np.diag([3.0 * x * x, 3.0 * y * y, -1.0]), np.eye(3)


def arnold_test(f: EquilibriumFamily | Family | str, M: float | None = None) -> StabilityVerdict:
    """Energy-Casimir test at E1, E2 or E3 with ``M != 0``.

    Solves ``grad H + lam * grad C = 0`` for ``lam`` and checks the sign of
    the Hessian of ``H + lam*C`` on the kernel of ``dC``.

    Raises
    ------
    WrongFamily
        For E4 and E5, where the spectrum already decides instability.
    NoMultiplier
        If no ``lam`` makes the point critical for ``H + lam*C``.
    """
    fam = _family(f, M)
    if fam.family not in _KERNEL_BASIS:
        raise WrongFamily(f"Arnold test applies to E1, E2, E3; got {fam.family.value}")
    if fam.M == 0:
        raise ValueError("Arnold test requires M != 0")
    s = fam.realize()
    grad_h, grad_c = gradients(s)
    lam = -float(grad_h @ grad_c) / float(grad_c @ grad_c)
    if np.max(np.abs(grad_h + lam * grad_c)) > 1e-12 * max(1.0, np.max(np.abs(grad_h))):
        raise NoMultiplier(f"no multiplier makes {fam} critical")
    hess_h, hess_c = _hessians(s)
    B = _KERNEL_BASIS[fam.family]
    restricted = B @ (hess_h + lam * hess_c) @ B.T
    ev = np.linalg.eigvalsh(restricted)
    ev = (float(ev[0]), float(ev[1]))
    if all(e > DEFINITE_TOL for e in ev) or all(e < -DEFINITE_TOL for e in ev):
        verdict = Verdict.NONLINEARLY_STABLE
        sign = "positive" if ev[0] > 0 else "negative"
        cert = f"Arnold second variation {sign} definite"
    else:
        verdict = Verdict.DEGENERATE
        cert = "Arnold second variation not definite"
    return StabilityVerdict(fam, spectrum_at(fam), verdict, cert, lam, ev)


def classify_equilibrium(f: EquilibriumFamily | Family | str, M: float | None = None) -> StabilityVerdict:
    fam = _family(f, M)
    spec = spectrum_at(fam)
    if fam.M == 0:
        # C > 0 away from the origin and is conserved
        return StabilityVerdict(fam, spec, Verdict.NONLINEARLY_STABLE, "Lyapunov function at origin (Casimir)")
    if fam.family in (Family.E4, Family.E5):
        top = max(z.real for z in spec)
        if top > UNSTABLE_TOL:
            return StabilityVerdict(fam, spec, Verdict.UNSTABLE, f"positive real eigenvalue {top:.9g}")
        return StabilityVerdict(fam, spec, Verdict.DEGENERATE, "no eigenvalue with positive real part")
    return arnold_test(fam)


def predicted_period(f: EquilibriumFamily | Family | str, M: float | None = None) -> float:
    """Period of small oscillations about E1/E2 (``2pi/(M^2 sqrt(M^2+1))``) or E3 (``2pi/|M|``)."""
    fam = _family(f, M)
    if fam.family in (Family.E4, Family.E5):
        raise WrongFamily("no periodic orbits around the saddles E4, E5")
    M = float(fam.M)
    if M == 0:
        raise ValueError("predicted period requires M != 0")
    if fam.family is Family.E3:
        return 2.0 * math.pi / abs(M)
    return 2.0 * math.pi / (M * M * math.sqrt(M * M + 1.0))


def moser_integral(M: float, s) -> float:
    """The conserved quantity ``M^2 C - H``.

    Expanded: ``-(x^4+y^4)/4 + M^2/2 (x^2+y^2) + (M^2+1)/2 z^2``.
    """
    x, y, z = as_state(s)
    return -0.25 * (x**4 + y**4) + 0.5 * M * M * (x * x + y * y) + 0.5 * (M * M + 1.0) * z * z


def moser_surface_value(M: float, s) -> float:
    """Moser integral at ``s`` relative to its value at E1 = (M, 0, 0).

    Its level set at ``eps**2`` is the surface around E1 carrying a
    periodic orbit for small ``eps``.
    """
    if M == 0:
        raise ValueError("M must be non-zero")
    return moser_integral(M, s) - 0.25 * M**4


# ---------------------------------------------------------------------------
# Empirical period


@dataclass(frozen=True)
class PeriodMeasurement:
    period: float
    steps: int


def measure_period(s0, dt: float = 1e-3, max_time: float = 100.0, axis: int = 1,
                   newton_tol: float = 1e-12) -> PeriodMeasurement:
    """First return time to the section ``s[axis] == s0[axis]``.

    Only crossings in the same direction as the initial velocity count; the
    crossing time is linearly interpolated between steps.
    """
    s = as_state(s0)
    level = s[axis]
    direction = math.copysign(1.0, vector_field(s)[axis])
    if vector_field(s)[axis] == 0.0:
        raise ValueError("initial velocity is tangent to the section")
    cfg = IntegratorConfig(dt=dt, newton_tol=newton_tol)
    n_max = int(math.ceil(max_time / abs(dt)))
    prev = s
    left = False
    for k in range(1, n_max + 1):
        cur = midpoint_step(prev, cfg)
        a, b = prev[axis] - level, cur[axis] - level
        if not left:
            left = direction * b > 0.0
        elif direction * a < 0.0 <= direction * b:
            frac = a / (a - b)
            t = float((k - 1 + frac) * abs(dt))
            return PeriodMeasurement(t, k)
        prev = cur
    raise RuntimeError(f"no return to the section within t={max_time}")
