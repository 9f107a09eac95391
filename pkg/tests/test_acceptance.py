"""Exit criteria.  Each test records a PASS/FAIL line shown in the summary."""
import math
import time

import numpy as np
import pytest

from bihamil.dynamics import casimir, gradients, hamiltonian, vector_field
from bihamil.ecmap import (
    EquilibriumFamily,
    Family,
    RegionLabel,
    classify,
    in_image,
    on_critical_family,
    rank_dec,
)
from bihamil.fibers import solve_initial_condition
from bihamil.integrator import IntegratorConfig, integrate, order_probe
from bihamil.poisson import (
    PI1,
    PI2,
    RealizationParams,
    grad_casimir_family,
    grad_h_family,
    jacobi_residual,
    pencil,
    pi1,
    pi2,
    pi_family,
)
from bihamil.stability import Verdict, arnold_test, classify_equilibrium, measure_period, spectrum_at

START = (1.25338, 0.42312, 0.5)
FORWARD_END = np.array([1.00305, -0.996944, 0.00128394])
BACKWARD_END = np.array([1.00438, 0.995591, -0.00465251])
SIGMA_P2_ORBIT = (0.5, 0.4, 1.2)


def test_01_heteroclinic_endpoints(record):
    t0 = time.perf_counter()
    fwd = integrate(START, IntegratorConfig(dt=0.015, max_steps=160)).final
    bwd = integrate(START, IntegratorConfig(dt=-0.015, max_steps=160)).final
    elapsed = time.perf_counter() - t0
    ef = float(np.max(np.abs(fwd - FORWARD_END)))
    eb = float(np.max(np.abs(bwd - BACKWARD_END)))
    ok = ef <= 5e-3 and eb <= 5e-3 and elapsed < 1.0
    record(1, "heteroclinic endpoints", ok, f"fwd err {ef:.2e}, bwd err {eb:.2e} (tol 5e-3), {elapsed:.2f}s")
    assert ok


def test_02_initial_condition_solver(record):
    sols = solve_initial_condition(0.5, 1.0, 0.5)
    hit = any(abs(p[0] - 1.25338) <= 1e-5 and abs(p[1] - 0.42312) <= 1e-5 for p in sols)
    ok = len(sols) == 8 and hit
    record(2, "initial-condition solver", ok, f"{len(sols)} solutions, contains (1.25338, 0.42312): {hit}")
    assert ok


def test_03_casimir_exact_and_second_order(record):
    s0 = SIGMA_P2_ORBIT
    assert classify((hamiltonian(s0), casimir(s0))) is RegionLabel.SIGMAP2
    traj = integrate(s0, IntegratorConfig(dt=0.01, newton_tol=1e-12, max_steps=10_000))
    c_drift = float(np.max(np.abs(traj.c_drift)))
    probe = order_probe(s0, 3.0, [0.02, 0.01, 0.005])
    ratios = [probe[i][1] / probe[i + 1][1] for i in range(len(probe) - 1)]
    ok = c_drift <= 1e-9 and all(3.5 <= r <= 4.5 for r in ratios)
    record(3, "Casimir exactness, O(dt^2) H drift", ok,
           f"max|C drift| {c_drift:.2e} (tol 1e-9), halving ratios {', '.join(f'{r:.3f}' for r in ratios)}")
    assert ok


def test_04_spectral_formulas(record):
    worst = 0.0
    for M in np.linspace(0.1, 3.0, 20):
        w = 2 * M * M * math.sqrt(M * M + 1)
        for fam in (Family.E4, Family.E5):
            ev = np.array(spectrum_at(fam, M))
            worst = max(worst, float(np.max(np.abs(ev - np.array([-w, 0, w])))) / w)
        w1 = M * M * math.sqrt(M * M + 1)
        ev = np.array(spectrum_at(Family.E1, M))
        worst = max(worst, float(np.max(np.abs(ev - np.array([-1j * w1, 0, 1j * w1])))) / w1)
    ok = worst <= 1e-9
    record(4, "spectral formulas at E1, E4, E5", ok, f"max relative error {worst:.2e} (tol 1e-9)")
    assert ok


def test_05_arnold_test_and_verdict_table(record):
    v = arnold_test(Family.E1, 1.0)
    e1_ok = (v.multiplier == -1.0 and sorted(v.restricted_eigenvalues) == [-2.0, -1.0]
             and v.verdict is Verdict.NONLINEARLY_STABLE)
    expected = {Family.E1: Verdict.NONLINEARLY_STABLE, Family.E2: Verdict.NONLINEARLY_STABLE,
                Family.E3: Verdict.NONLINEARLY_STABLE, Family.E4: Verdict.UNSTABLE, Family.E5: Verdict.UNSTABLE}
    table_ok = all(classify_equilibrium(f, M).verdict is want
                   for M in (-2.5, -1.0, 0.3, 1.0, 2.0) for f, want in expected.items())
    origin_ok = all(classify_equilibrium(f, 0.0).verdict is Verdict.NONLINEARLY_STABLE for f in Family)
    ok = e1_ok and table_ok and origin_ok
    record(5, "Arnold test and verdict table", ok,
           f"E1(1): lambda={v.multiplier}, restricted {sorted(v.restricted_eigenvalues)}; table ok={table_ok and origin_ok}")
    assert ok


def test_06_period_near_e1(record):
    t0 = time.perf_counter()
    measured = measure_period([1.0, 1e-3, 1e-3], dt=1e-3).period
    elapsed = time.perf_counter() - t0
    expected = 2 * math.pi / math.sqrt(2)
    rel = abs(measured - expected) / expected
    ok = rel <= 0.01 and elapsed < 5.0
    record(6, "period near E1", ok, f"{measured:.6f} vs {expected:.6f}, rel err {rel:.2e} (tol 1e-2), {elapsed:.2f}s")
    assert ok


# (h, c, label) placed by hand from the defining inequalities
HAND_GRID = [
    (0.0, 0.0, RegionLabel.BIFURCATION),
    (1.0, 1.0, RegionLabel.SIGMA12S), (0.25, 0.5, RegionLabel.SIGMA12S), (4.0, 2.0, RegionLabel.SIGMA12S),
    (-1.0, 1.0, RegionLabel.SIGMA3S), (-0.5, 0.5, RegionLabel.SIGMA3S), (-2.0, 2.0, RegionLabel.SIGMA3S),
    (0.5, 1.0, RegionLabel.SIGMA45U), (2.0, 2.0, RegionLabel.SIGMA45U), (0.125, 0.5, RegionLabel.SIGMA45U),
    (0.64, 0.9, RegionLabel.SIGMAP1), (1.0, 1.2, RegionLabel.SIGMAP1), (4.0, 2.5, RegionLabel.SIGMAP1),
    (0.5, 0.8, RegionLabel.SIGMAP1),
    (-1.0, 2.0, RegionLabel.SIGMAP2), (-0.5, 1.0, RegionLabel.SIGMAP2), (0.5, 1.5, RegionLabel.SIGMAP2),
    (2.0, 3.0, RegionLabel.SIGMAP2), (0.02, 0.5, RegionLabel.SIGMAP2), (-3.0, 3.5, RegionLabel.SIGMAP2),
    (1.0, 0.5, RegionLabel.OUTSIDE), (-1.0, 0.5, RegionLabel.OUTSIDE), (0.5, 0.5, RegionLabel.OUTSIDE),
    (0.5, 0.7, RegionLabel.OUTSIDE), (4.0, 1.9, RegionLabel.OUTSIDE), (-2.0, 1.0, RegionLabel.OUTSIDE),
    (1.0, -1.0, RegionLabel.OUTSIDE),
]


def test_07_image_and_partition(record, rng):
    S = rng.uniform(-3, 3, size=(100_000, 3))
    x, y, z = S.T
    h = 0.25 * x**4 + 0.25 * y**4 - 0.5 * z**2
    c = 0.5 * (x * x + y * y + z * z)
    violations = int(np.sum(~((c >= -h) & ((h <= 0) | (c >= np.sqrt(np.maximum(h, 0)))))))
    violations += sum(not in_image((hh, cc)) for hh, cc in zip(h, c))
    witness_ok = not in_image((0.5, 0.5)) and in_image((1.0, 1.0)) and in_image((0.0, 0.0))
    wrong = [(hh, cc, lab.value) for hh, cc, lab in HAND_GRID if classify((hh, cc), 1e-9) is not lab]
    ok = violations == 0 and witness_ok and not wrong and len(HAND_GRID) >= 25
    record(7, "image and partition", ok,
           f"{violations} violations in 1e5 states, (0.5,0.5) outside: {witness_ok}, "
           f"{len(HAND_GRID) - len(wrong)}/{len(HAND_GRID)} grid labels")
    assert ok


def test_08_critical_points(record):
    g = np.linspace(-2, 2, 41)
    mismatches = 0
    n_critical = 0
    for xx in g:
        for yy in g:
            for zz in g:
                crit = rank_dec((xx, yy, zz)) < 2
                n_critical += crit
                mismatches += crit != on_critical_family((xx, yy, zz), 1e-9)
    ok = mismatches == 0
    record(8, "critical points on 41^3 grid", ok, f"{n_critical} critical points, {mismatches} mismatches")
    assert ok


def _random_params(rng, n):
    out = []
    while len(out) < n:
        a, b, cc = rng.uniform(-2, 2, 3)
        if abs(a) >= 0.2:
            out.append(RealizationParams(a, b, cc, (1.0 + b * cc) / a))
    return out


def test_09_poisson_axioms(record, rng):
    pts = rng.uniform(-2, 2, size=(100, 3))
    params = _random_params(rng, 10)
    pencils = [pencil(a, b) for a, b in rng.uniform(-2, 2, size=(10, 2))]
    antisym = all(not (P(s) + P(s).T).any() for P in [PI1, PI2, *pencils] for s in pts)
    antisym &= all(not (pi_family(p, s) + pi_family(p, s).T).any() for p in params for s in pts)
    jac = max(jacobi_residual(P, s) for P in [PI1, PI2, *pencils] for s in pts)
    real = 0.0
    kern = 0.0
    for s in pts:
        gh, gc = gradients(s)
        f = vector_field(s)
        real = max(real, np.max(np.abs(pi1(s) @ gh - f)), np.max(np.abs(pi2(s) @ gc - f)))
        kern = max(kern, np.max(np.abs(pi1(s) @ gc)), np.max(np.abs(pi2(s) @ gh)))
        for p in params:
            P = pi_family(p, s)
            real = max(real, np.max(np.abs(P @ grad_h_family(p, s) - f)))
            kern = max(kern, np.max(np.abs(P @ grad_casimir_family(p, s))))
    ok = antisym and jac <= 1e-8 and real <= 1e-10 and kern <= 1e-10
    record(9, "Poisson axioms", ok,
           f"antisymmetric: {antisym}, Jacobi {jac:.1e} (tol 1e-8), realization {real:.1e}, kernel {kern:.1e} (tol 1e-10)")
    assert ok


@pytest.mark.parametrize("h, c, printed", [
    (1.0, 1.0, [(math.sqrt(2), 0, 0), (-math.sqrt(2), 0, 0), (0, math.sqrt(2), 0), (0, -math.sqrt(2), 0)]),
    (-1.0, 1.0, [(0, 0, math.sqrt(2)), (0, 0, -math.sqrt(2))]),
])
def test_10_boundary_fibers(record, h, c, printed):
    r = math.sqrt(2 * c)
    found = []
    for z in np.concatenate([np.linspace(-r, r, 20_001), [0.0]]):
        found += solve_initial_condition(h, c, z)
    printed = [np.array(p, dtype=float) for p in printed]
    extra = [p for p in found if min(np.max(np.abs(p - q)) for q in printed) > 1e-9]
    missing = [q for q in printed if not any(np.max(np.abs(p - q)) <= 1e-9 for p in found)]
    resid = max(max(abs(hamiltonian(p) - h), abs(casimir(p) - c)) for p in found)
    ok = not extra and not missing and resid <= 1e-9
    record(10, f"boundary fiber (h,c)=({h:g},{c:g})", ok,
           f"{len(found)} hits, {len(extra)} extra, {len(missing)} missing, residual {resid:.1e}")
    assert ok
