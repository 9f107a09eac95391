"""Implicit mid-point integration of the system.

Each step solves ``(s' - s)/dt = f((s + s')/2)`` for ``s'``.  The Casimir C
is quadratic, so it is conserved by the scheme up to the inner-solver
tolerance; H is quartic and drifts at second order in ``dt``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .dynamics import as_state, casimir, hamiltonian, jacobian, vector_field

__all__ = [
    "IntegratorConfig",
    "NonConvergence",
    "Trajectory",
    "TRAJECTORY_FIELDS",
    "midpoint_residual",
    "midpoint_residual_expanded",
    "midpoint_step",
    "integrate",
    "order_probe",
]

TRAJECTORY_FIELDS = ("step", "t", "x", "y", "z", "h_drift", "c_drift")
SOLVERS = ("newton", "picard")


class NonConvergence(RuntimeError):
    """The inner solve of an implicit step did not reach its tolerance.

    ``step_index`` is the 0-based index of the failed step when raised from
    :func:`integrate` and ``None`` when raised by a single step.
    """

    def __init__(self, last_residual: float, iterations: int, step_index: int | None = None):
        self.last_residual = last_residual
        self.iterations = iterations
        self.step_index = step_index
        where = "" if step_index is None else f" at step {step_index}"
        super().__init__(
            f"implicit solve did not converge{where}: residual {last_residual:.3e} "
            f"after {iterations} iterations"
        )


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    newton_tol: float = 1e-12
    max_inner_iters: int = 50
    max_steps: int = 1
    solver: str = "newton"

    def __post_init__(self):
        if not math.isfinite(self.dt) or self.dt == 0.0:
            raise ValueError(f"dt must be finite and non-zero, got {self.dt!r}")
        if not (self.newton_tol > 0.0 and math.isfinite(self.newton_tol)):
            raise ValueError(f"newton_tol must be positive, got {self.newton_tol!r}")
        if self.max_inner_iters < 1:
            raise ValueError(f"max_inner_iters must be >= 1, got {self.max_inner_iters!r}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")


def midpoint_residual(s, s_next, dt: float) -> np.ndarray:
    """``(s_next - s) - dt * f((s + s_next)/2)``."""
    s = np.asarray(s, dtype=np.float64)
    s_next = np.asarray(s_next, dtype=np.float64)
    return (s_next - s) - dt * vector_field(0.5 * (s + s_next))


def midpoint_residual_expanded(s, s_next, dt: float) -> np.ndarray:
    """Residual of the recursion written out in terms of the sums ``s + s'``.

    Differs from :func:`midpoint_residual` only by rounding; the two are
    kept as independent checks of one another.
    """
    x0, y0, z0 = np.asarray(s, dtype=np.float64)
    x1, y1, z1 = np.asarray(s_next, dtype=np.float64)
    sx, sy, sz = x0 + x1, y0 + y1, z0 + z1
    return np.array([
        (x1 - x0) - dt * sy * sz * (4.0 + sy * sy) / 16.0,
        (y1 - y0) + dt * sx * sz * (4.0 + sx * sx) / 16.0,
        (z1 - z0) - dt * sx * sy * (sx * sx - sy * sy) / 16.0,
    ])


def _newton(s: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    dt = cfg.dt
    guess = s + dt * vector_field(s)
    eye = np.eye(3)
    res = midpoint_residual(s, guess, dt)
    err = float(np.max(np.abs(res)))
    for _ in range(cfg.max_inner_iters):
        if err <= cfg.newton_tol:
            return guess
        mid = 0.5 * (s + guess)
        guess = guess - np.linalg.solve(eye - 0.5 * dt * jacobian(mid), res)
        if not np.all(np.isfinite(guess)):
            break
        res = midpoint_residual(s, guess, dt)
        err = float(np.max(np.abs(res)))
    if err <= cfg.newton_tol:
        return guess
    raise NonConvergence(err, cfg.max_inner_iters)


def _picard(s: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    dt = cfg.dt
    guess = s + dt * vector_field(s)
    res = midpoint_residual(s, guess, dt)
    err = float(np.max(np.abs(res)))
    for _ in range(cfg.max_inner_iters):
        if err <= cfg.newton_tol:
            return guess
        guess = s + dt * vector_field(0.5 * (s + guess))
        if not np.all(np.isfinite(guess)):
            break
        res = midpoint_residual(s, guess, dt)
        err = float(np.max(np.abs(res)))
    if err <= cfg.newton_tol:
        return guess
    raise NonConvergence(err, cfg.max_inner_iters)


def midpoint_step(s, cfg: IntegratorConfig) -> np.ndarray:
    """Advance ``s`` by one implicit mid-point step of size ``cfg.dt``.

    The returned state satisfies ``max|midpoint_residual| <= cfg.newton_tol``.
    Newton's method starts from the explicit Euler predictor and uses the
    analytic Jacobian ``I - dt/2 * J(mid)``; ``cfg.solver == "picard"``
    selects plain fixed-point iteration instead.

    Raises
    ------
    NonConvergence
        If the tolerance is not reached within ``cfg.max_inner_iters``.
    """
    s = as_state(s)
    if cfg.solver == "picard":
        return _picard(s, cfg)
    return _newton(s, cfg)


@dataclass(frozen=True)
class Trajectory:
    """Integration record: row ``k`` is the state after ``k`` steps.

    Row 0 is the initial state.  ``h_drift`` and ``c_drift`` are measured
    against the initial state.
    """

    initial: np.ndarray
    config: IntegratorConfig
    states: np.ndarray
    h_drift: np.ndarray
    c_drift: np.ndarray
    steps: np.ndarray = field(init=False)
    times: np.ndarray = field(init=False)

    def __post_init__(self):
        idx = np.arange(len(self.states))
        object.__setattr__(self, "steps", idx)
        object.__setattr__(self, "times", idx * self.config.dt)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def records(self) -> Iterator[dict]:
        for k in range(len(self)):
            x, y, z = self.states[k]
            yield {
                "step": int(self.steps[k]),
                "t": float(self.times[k]),
                "x": float(x),
                "y": float(y),
                "z": float(z),
                "h_drift": float(self.h_drift[k]),
                "c_drift": float(self.c_drift[k]),
            }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=TRAJECTORY_FIELDS, lineterminator="\n")
        writer.writeheader()
        for rec in self.records():
            writer.writerow({k: repr(v) for k, v in rec.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(list(self.records()), indent=1) + "\n"


def integrate(s0, cfg: IntegratorConfig) -> Trajectory:
    """Apply :func:`midpoint_step` ``cfg.max_steps`` times from ``s0``.

    Raises ``NonConvergence`` with ``step_index`` set when a step fails.
    """
    s0 = as_state(s0)
    states = np.empty((cfg.max_steps + 1, 3))
    states[0] = s0
    s = s0
    for k in range(cfg.max_steps):
        try:
            s = midpoint_step(s, cfg)
        except NonConvergence as exc:
            raise NonConvergence(exc.last_residual, exc.iterations, step_index=k) from None
        states[k + 1] = s
    h0, c0 = hamiltonian(s0), casimir(s0)
    x, y, z = states.T
    h = 0.25 * x**4 + 0.25 * y**4 - 0.5 * z**2
    c = 0.5 * (x * x + y * y + z * z)
    return Trajectory(s0.copy(), cfg, states, h - h0, c - c0)


def order_probe(s0, t_final: float, dt_list: Sequence[float], newton_tol: float = 1e-12) -> list[tuple[float, float]]:
    """|H drift| at ``t_final`` for each step size in ``dt_list``.

    Each ``dt`` must divide ``t_final`` into a whole number of steps.
    """
    out = []
    for dt in dt_list:
        n = t_final / dt
        n_steps = int(round(n))
        if n_steps < 1 or abs(n - n_steps) > 1e-9 * max(1.0, abs(n)):
            raise ValueError(f"dt={dt!r} does not divide t_final={t_final!r}")
        traj = integrate(s0, IntegratorConfig(dt=dt, newton_tol=newton_tol, max_steps=n_steps))
        out.append((dt, abs(float(traj.h_drift[-1]))))
    return out
