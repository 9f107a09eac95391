"""Headline numerical experiments with measured-vs-expected checks.

Used by ``bihamil reproduce``.  Each experiment returns a list of
:class:`Check` rows; an experiment passes when every row passes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ecmap import Family
from .fibers import generate_heteroclinic_web, run_from_start
from .stability import Verdict, classify_equilibrium, measure_period, predicted_period

__all__ = ["Check", "EXPERIMENTS", "run_experiment", "format_report"]

START = (1.25338, 0.42312, 0.5)
FORWARD_END = (1.00305, -0.996944, 0.00128394)
BACKWARD_END = (1.00438, 0.995591, -0.00465251)
ENDPOINT_TOL = 5e-3


@dataclass(frozen=True)
class Check:
    name: str
    measured: object
    expected: object
    tol: float | None
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        tol = "" if self.tol is None else f" tol={self.tol:g}"
        return f"{tag}  {self.name}: measured={self.measured} expected={self.expected}{tol}"


def _fmt(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def heteroclinic() -> list[Check]:
    checks = []
    base = run_from_start(START, 0.015, 160)
    for name, got, want in (("forward endpoint", base.forward_end, FORWARD_END),
                            ("backward endpoint", base.backward_end, BACKWARD_END)):
        err = float(np.max(np.abs(got - np.asarray(want))))
        checks.append(Check(name, _fmt(got), _fmt(want), ENDPOINT_TOL, err <= ENDPOINT_TOL))

    web = generate_heteroclinic_web(0.5, dt=0.015, steps=160, z_seed=0.5)
    checks.append(Check("run count", len(web.runs), 8, None, len(web.runs) == 8))
    worst = max(max(r.forward_distance, r.backward_distance) for r in web.runs)
    checks.append(Check("endpoint-to-saddle distance (max over runs)", f"{worst:.3e}", "<= tol",
                        ENDPOINT_TOL, worst <= ENDPOINT_TOL))
    drift = max(r.max_c_drift for r in web.runs)
    checks.append(Check("max |C drift| over runs", f"{drift:.3e}", "<= tol", 1e-10, drift <= 1e-10))
    for i, closed in enumerate(web.cycle_closed):
        seq = " -> ".join(_fmt(p[:2]) for p in web.cycles[i])
        checks.append(Check(f"cycle {i + 1} {seq}", closed, True, None, closed))
    return checks


def period() -> list[Check]:
    predicted = predicted_period(Family.E1, 1.0)
    measured = measure_period([1.0, 1e-3, 1e-3], dt=1e-3).period
    rel = abs(measured - predicted) / predicted
    return [Check("return time near E1(1,0,0)", f"{measured:.6f}", f"{predicted:.6f}", 0.01, rel <= 0.01)]


def stability() -> list[Check]:
    expected = {
        Family.E1: Verdict.NONLINEARLY_STABLE,
        Family.E2: Verdict.NONLINEARLY_STABLE,
        Family.E3: Verdict.NONLINEARLY_STABLE,
        Family.E4: Verdict.UNSTABLE,
        Family.E5: Verdict.UNSTABLE,
    }
    checks = []
    for M in (-2.0, 0.5, 1.0, 3.0):
        for fam, want in expected.items():
            v = classify_equilibrium(fam, M)
            checks.append(Check(f"{fam.value}(M={M:g}) [{v.certificate}]", v.verdict.value, want.value,
                                None, v.verdict is want))
    v = classify_equilibrium(Family.E1, 0.0)
    checks.append(Check(f"origin [{v.certificate}]", v.verdict.value, Verdict.NONLINEARLY_STABLE.value,
                        None, v.verdict is Verdict.NONLINEARLY_STABLE))
    return checks


EXPERIMENTS = {"heteroclinic": heteroclinic, "period": period, "stability": stability}


def run_experiment(name: str) -> list[Check]:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    return EXPERIMENTS[name]()


def format_report(name: str, checks: list[Check]) -> str:
    ok = all(c.passed for c in checks)
    lines = [f"experiment: {name}"] + [c.line() for c in checks]
    lines.append(f"result: {'PASS' if ok else 'FAIL'} ({sum(c.passed for c in checks)}/{len(checks)})")
    return "\n".join(lines) + "\n"

