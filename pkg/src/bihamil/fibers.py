"""Fibers ``{H = h, C = c}`` of the energy-Casimir map.

Points of a fiber at fixed height ``z`` are found in closed form.  With
``s = x^2 + y^2 = 2c - z^2`` and ``q = x^4 + y^4 = 4h + 2z^2``, the squares
``x^2`` and ``y^2`` are the roots of ``t^2 - s t + (s^2 - q)/2``.

On the unstable stratum (``c = sqrt(2h)``) the fiber is a web of orbits
joining the four saddles ``(+-sqrt(c), +-sqrt(c), 0)``.  The runs here
integrate forwards and backwards from a fiber point and record where they
end up; the connections they exhibit are numerical evidence only.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EcPoint, SymmetryTransform, apply_symmetry, as_state, casimir, hamiltonian
from .ecmap import DEFAULT_TOL, RegionLabel, classify
from .integrator import IntegratorConfig, Trajectory, integrate

__all__ = [
    "NoSolutions",
    "FiberKind",
    "FiberSpec",
    "FiberDescription",
    "HeteroclinicRun",
    "HeteroclinicWeb",
    "solve_initial_condition",
    "feasible_heights",
    "fiber_points",
    "describe_fiber",
    "saddles",
    "run_heteroclinic_experiment",
    "generate_heteroclinic_web",
    "closed_orbit_return",
]

_EPS = np.finfo(np.float64).eps


class NoSolutions(ValueError):
    pass


def _clamp(v: float, scale: float) -> float:
    """Zero out roundoff-sized negatives."""
    if -64.0 * _EPS * scale <= v < 0.0:
        return 0.0
    return v


def solve_initial_condition(h: float, c: float, z_fixed: float) -> list[np.ndarray]:
    """All points ``(x, y, z_fixed)`` with ``H = h`` and ``C = c``.

    Returns up to eight points (sign and swap images of one another),
    sorted lexicographically.  An empty list means the height ``z_fixed``
    does not meet the fiber.
    """
    h, c, z = float(h), float(c), float(z_fixed)
    if not all(math.isfinite(v) for v in (h, c, z)):
        raise ValueError("h, c, z_fixed must be finite")
    z2 = z * z
    s = _clamp(2.0 * c - z2, max(1.0, abs(c), z2))
    if s < 0.0:
        return []
    q = 4.0 * h + 2.0 * z2
    scale = max(1.0, s * s, abs(q))
    p = _clamp(0.5 * (s * s - q), scale)
    disc = _clamp(s * s - 4.0 * p, scale)
    if p < 0.0 or disc < 0.0:
        return []
    root = math.sqrt(disc)
    t_big = 0.5 * (s + root)
    # p / t_big avoids cancellation in (s - root)/2
    t_small = p / t_big if t_big > 0.0 else 0.0
    a, b = math.sqrt(t_big), math.sqrt(max(t_small, 0.0))
    pts = set()
    for u, v in ((a, b), (b, a)):
        for su in (1.0, -1.0):
            for sv in (1.0, -1.0):
                # +0.0 normalizes signed zeros
                pts.add((su * u + 0.0, sv * v + 0.0, z))
    return [np.array(pt) for pt in sorted(pts)]


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    d = b * b - 4.0 * a * c
    if d < 0.0:
        return []
    sq = math.sqrt(d)
    qq = -0.5 * (b + math.copysign(sq, b))
    roots = []
    if qq != 0.0:
        roots += [qq / a, c / qq]
    else:
        roots.append(0.0)
    return roots


def feasible_heights(h: float, c: float) -> list[tuple[float, float]]:
    """Intervals of ``u = z^2`` for which the fiber meets the plane ``z = sqrt(u)``.

    A point interval ``(u, u)`` marks an isolated height.  Empty when
    ``(h, c)`` is outside the image.
    """
    h, c = float(h), float(c)
    if c < 0.0:
        return []
    top = 2.0 * c
    # p >= 0:  g1(u) = u^2 - (4c + 2)u + 4c^2 - 4h >= 0
    # disc >= 0: g2(u) = -u^2/2 + (2c + 2)u + 4h - 2c^2 >= 0
    def g1(u):
        return u * u - (4.0 * c + 2.0) * u + 4.0 * c * c - 4.0 * h

    def g2(u):
        return -0.5 * u * u + (2.0 * c + 2.0) * u + 4.0 * h - 2.0 * c * c

    tol = 1e-12 * max(1.0, c * c, abs(h))

    def ok(u):
        return g1(u) >= -tol and g2(u) >= -tol

    cuts = {0.0, top}
    for r in _quadratic_roots(1.0, -(4.0 * c + 2.0), 4.0 * c * c - 4.0 * h):
        if 0.0 <= r <= top:
            cuts.add(r)
    for r in _quadratic_roots(-0.5, 2.0 * c + 2.0, 4.0 * h - 2.0 * c * c):
        if 0.0 <= r <= top:
            cuts.add(r)
    cuts = sorted(cuts)
    intervals: list[list[float]] = []
    for i, u in enumerate(cuts):
        if ok(u):
            if intervals and intervals[-1][1] == u:
                pass
            else:
                intervals.append([u, u])
        if i + 1 < len(cuts):
            lo, hi = u, cuts[i + 1]
            if hi > lo and ok(0.5 * (lo + hi)):
                if intervals and intervals[-1][1] == lo:
                    intervals[-1][1] = hi
                else:
                    intervals.append([lo, hi])
    return [(lo, hi) for lo, hi in intervals]


def fiber_points(h: float, c: float, n_heights: int = 9) -> list[np.ndarray]:
    """Sample points of the fiber over ``n_heights`` heights per interval.

    Both signs of ``z`` are used.
    """
    out: dict[tuple, np.ndarray] = {}
    for lo, hi in feasible_heights(h, c):
        us = [lo] if hi == lo else np.linspace(lo, hi, n_heights).tolist()
        for u in us:
            z = math.sqrt(u)
            for zz in {z, -z}:
                for pt in solve_initial_condition(h, c, zz + 0.0):
                    out[tuple(pt)] = pt
    return [out[k] for k in sorted(out)]


class FiberKind(str, enum.Enum):
    FINITE_POINT_SET = "FinitePointSet"
    PERIODIC_ORBIT_FAMILY = "PeriodicOrbitFamily"
    HETEROCLINIC_WEB = "HeteroclinicWeb"
    EMPTY = "Empty"


@dataclass(frozen=True)
class FiberSpec:
    target: EcPoint
    label: RegionLabel | None = None

    def __post_init__(self):
        object.__setattr__(self, "target", EcPoint(float(self.target[0]), float(self.target[1])))
        computed = classify(self.target)
        if self.label is None:
            object.__setattr__(self, "label", computed)
        elif RegionLabel(self.label) is not computed:
            raise ValueError(f"label {self.label} inconsistent with {self.target} ({computed.value})")


@dataclass(frozen=True)
class FiberDescription:
    kind: FiberKind
    label: RegionLabel
    target: EcPoint
    points: list[np.ndarray] = field(default_factory=list)
    count_hint: int | None = None
    witness_points: list[np.ndarray] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "label": self.label.value,
            "h": self.target.h,
            "c": self.target.c,
            "points": [p.tolist() for p in self.points],
            "count_hint": self.count_hint,
            "witness_points": [p.tolist() for p in self.witness_points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


# orbit-family counts read off the level-set pictures, not computed
_COUNT_HINTS = {RegionLabel.SIGMAP1: 4, RegionLabel.SIGMAP2: 2}


def describe_fiber(spec: FiberSpec, n_heights: int = 9) -> FiberDescription:
    h, c = spec.target
    label = spec.label
    witnesses = fiber_points(h, c, n_heights)
    if label is RegionLabel.OUTSIDE:
        return FiberDescription(FiberKind.EMPTY, label, spec.target)
    if label is RegionLabel.BIFURCATION:
        pts = [np.zeros(3)]
        return FiberDescription(FiberKind.FINITE_POINT_SET, label, spec.target, pts, None, witnesses)
    if label is RegionLabel.SIGMA12S:
        r = math.sqrt(2.0 * c)
        pts = [np.array(p) for p in ((r, 0.0, 0.0), (-r, 0.0, 0.0), (0.0, r, 0.0), (0.0, -r, 0.0))]
        return FiberDescription(FiberKind.FINITE_POINT_SET, label, spec.target, pts, None, witnesses)
    if label is RegionLabel.SIGMA3S:
        r = math.sqrt(2.0 * c)
        pts = [np.array([0.0, 0.0, r]), np.array([0.0, 0.0, -r])]
        return FiberDescription(FiberKind.FINITE_POINT_SET, label, spec.target, pts, None, witnesses)
    if label is RegionLabel.SIGMA45U:
        return FiberDescription(FiberKind.HETEROCLINIC_WEB, label, spec.target, saddles(c), None, witnesses)
    return FiberDescription(FiberKind.PERIODIC_ORBIT_FAMILY, label, spec.target, [], _COUNT_HINTS[label], witnesses)


def saddles(c: float) -> list[np.ndarray]:
    """The E4/E5 points on the sphere ``C = c``."""
    r = math.sqrt(c)
    return [np.array([sx * r, sy * r, 0.0]) for sx, sy in ((1, 1), (1, -1), (-1, -1), (-1, 1))]


def _chebyshev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


@dataclass(frozen=True)
class HeteroclinicRun:
    """Forward and backward integration from one point of an unstable fiber.

    ``*_distance`` is the componentwise (max-norm) distance from an endpoint
    to the nearest saddle.
    """

    start: np.ndarray
    forward_end: np.ndarray
    backward_end: np.ndarray
    forward_target: np.ndarray
    backward_target: np.ndarray
    forward_distance: float
    backward_distance: float
    dt: float
    steps: int
    forward: Trajectory = field(repr=False)
    backward: Trajectory = field(repr=False)

    @property
    def max_c_drift(self) -> float:
        return float(max(np.max(np.abs(self.forward.c_drift)), np.max(np.abs(self.backward.c_drift))))

    @property
    def max_h_drift(self) -> float:
        return float(max(np.max(np.abs(self.forward.h_drift)), np.max(np.abs(self.backward.h_drift))))

    def to_dict(self) -> dict:
        return {
            "kind": '"heteroclinic" (numerical evidence)',
            "start": self.start.tolist(),
            "forward_end": self.forward_end.tolist(),
            "backward_end": self.backward_end.tolist(),
            "forward_target": self.forward_target.tolist(),
            "backward_target": self.backward_target.tolist(),
            "forward_distance": self.forward_distance,
            "backward_distance": self.backward_distance,
            "forward_distance_euclidean": float(np.linalg.norm(self.forward_end - self.forward_target)),
            "backward_distance_euclidean": float(np.linalg.norm(self.backward_end - self.backward_target)),
            "dt": self.dt,
            "steps": self.steps,
            "max_c_drift": self.max_c_drift,
            "max_h_drift": self.max_h_drift,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _nearest(point: np.ndarray, candidates: list[np.ndarray]) -> tuple[np.ndarray, float]:
    dists = [_chebyshev(point, q) for q in candidates]
    i = int(np.argmin(dists))
    return candidates[i], dists[i]


def _run_from(start: np.ndarray, c: float, dt: float, steps: int, newton_tol: float) -> HeteroclinicRun:
    fwd = integrate(start, IntegratorConfig(dt=dt, newton_tol=newton_tol, max_steps=steps))
    bwd = integrate(start, IntegratorConfig(dt=-dt, newton_tol=newton_tol, max_steps=steps))
    targets = saddles(c)
    f_t, f_d = _nearest(fwd.final, targets)
    b_t, b_d = _nearest(bwd.final, targets)
    return HeteroclinicRun(start.copy(), fwd.final.copy(), bwd.final.copy(), f_t, b_t, f_d, b_d,
                           dt, steps, fwd, bwd)


def run_heteroclinic_experiment(h: float, z_seed: float, dt: float, steps: int,
                                solution_index: int = 0, newton_tol: float = 1e-12) -> HeteroclinicRun:
    """Integrate both ways from a point of the fiber ``(h, sqrt(2h))`` at height ``z_seed``.

    ``solution_index`` picks one of the lexicographically sorted solutions
    of :func:`solve_initial_condition`.

    Raises
    ------
    NoSolutions
        If the height ``z_seed`` misses the fiber or the index is out of range.
    """
    if not h > 0.0:
        raise ValueError(f"h must be positive, got {h!r}")
    c = math.sqrt(2.0 * h)
    sols = solve_initial_condition(h, c, z_seed)
    if not sols:
        raise NoSolutions(f"no fiber points at z={z_seed!r} for (h, c)=({h!r}, {c!r})")
    if not 0 <= solution_index < len(sols):
        raise NoSolutions(f"solution_index {solution_index} out of range for {len(sols)} solutions")
    return _run_from(sols[solution_index], c, dt, steps, newton_tol)


def run_from_start(start, dt: float, steps: int, newton_tol: float = 1e-12) -> HeteroclinicRun:
    """Same as :func:`run_heteroclinic_experiment` for an explicit start point."""
    start = as_state(start)
    return _run_from(start, casimir(start), dt, steps, newton_tol)


@dataclass(frozen=True)
class HeteroclinicWeb:
    h: float
    c: float
    runs: list[HeteroclinicRun]
    cycles: list[list[np.ndarray]]
    cycle_closed: list[bool]

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "c": self.c,
            "runs": [r.to_dict() for r in self.runs],
            "cycles": [[p.tolist() for p in cyc] for cyc in self.cycles],
            "cycle_closed": self.cycle_closed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _symmetry_orbit(start: np.ndarray) -> list[np.ndarray]:
    """Images of ``start`` under all compositions of the listed symmetries."""
    seen = {tuple(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for p in frontier:
            for t in SymmetryTransform:
                img = apply_symmetry(t, p) + 0.0
                key = tuple(img)
                if key not in seen:
                    seen[key] = img
                    nxt.append(img)
        frontier = nxt
    return list(seen.values())


def generate_heteroclinic_web(h: float, dt: float = 0.015, steps: int = 160, z_seed: float = 0.5,
                              newton_tol: float = 1e-12, tol: float = 5e-3) -> HeteroclinicWeb:
    """Runs from every symmetric image of a base fiber point, plus the two saddle cycles.

    The base point is the solution at height ``z_seed`` with the largest
    ``x`` and positive ``y``.  A cycle counts as closed when each consecutive
    pair of saddles is joined (backward end -> forward end, both within
    ``tol``) by some run.
    """
    c = math.sqrt(2.0 * h)
    sols = solve_initial_condition(h, c, z_seed)
    if not sols:
        raise NoSolutions(f"no fiber points at z={z_seed!r} for (h, c)=({h!r}, {c!r})")
    base = max(sols, key=lambda p: (p[0], p[1]))
    starts = _symmetry_orbit(base)
    runs = [_run_from(s, c, dt, steps, newton_tol) for s in starts]

    edges = set()
    for r in runs:
        if r.forward_distance <= tol and r.backward_distance <= tol:
            edges.add((tuple(r.backward_target), tuple(r.forward_target)))
    sq = math.sqrt(c)
    ring = [np.array([sq, sq, 0.0]), np.array([sq, -sq, 0.0]),
            np.array([-sq, -sq, 0.0]), np.array([-sq, sq, 0.0])]
    cycles = [ring, ring[:1] + ring[:0:-1]]
    closed = [
        all((tuple(cyc[i]), tuple(cyc[(i + 1) % 4])) in edges for i in range(4))
        for cyc in cycles
    ]
    return HeteroclinicWeb(h, c, runs, cycles, closed)


def closed_orbit_return(s0, dt: float, max_time: float, tol: float = 1e-3,
                        newton_tol: float = 1e-12) -> float | None:
    """Time at which the trajectory from ``s0`` first comes back within ``tol``.

    The trajectory must first leave the ``4*tol`` ball; the return distance
    is measured to each step segment, not only the step endpoints.  Returns
    ``None`` if there is no return before ``max_time``.
    """
    s0 = as_state(s0)
    n = int(math.ceil(max_time / abs(dt)))
    traj = integrate(s0, IntegratorConfig(dt=dt, newton_tol=newton_tol, max_steps=n))
    pts = traj.states
    far = np.max(np.abs(pts - s0), axis=1) > 4.0 * tol
    if not far.any():
        return None
    first_far = int(np.argmax(far))
    for k in range(first_far, n):
        a, b = pts[k], pts[k + 1]
        d = b - a
        denom = float(d @ d)
        lam = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((s0 - a) @ d) / denom))
        if np.max(np.abs(a + lam * d - s0)) <= tol:
            return (k + lam) * abs(dt)
    return None
