import math

import numpy as np
import pytest

from bihamil.ecmap import (
    EquilibriumFamily,
    Family,
    RegionLabel,
    classify,
    critical_points,
    dec_matrix,
    ec_map,
    image_of_family,
    in_image,
    on_critical_family,
    rank_dec,
    scan_image,
)
from bihamil.fibers import feasible_heights, fiber_points
from bihamil.dynamics import casimir, hamiltonian

L = RegionLabel

# (h, c, label) placed by hand from the defining inequalities
LABELED = [
    (0.0, 0.0, L.BIFURCATION),
    (1.0, 1.0, L.SIGMA12S),
    (0.25, 0.5, L.SIGMA12S),
    (4.0, 2.0, L.SIGMA12S),
    (9.0, 3.0, L.SIGMA12S),
    (-1.0, 1.0, L.SIGMA3S),
    (-0.5, 0.5, L.SIGMA3S),
    (-2.0, 2.0, L.SIGMA3S),
    (-3.0, 3.0, L.SIGMA3S),
    (0.5, 1.0, L.SIGMA45U),
    (2.0, 2.0, L.SIGMA45U),
    (0.125, 0.5, L.SIGMA45U),
    (0.64, 0.9, L.SIGMAP1),
    (1.0, 1.2, L.SIGMAP1),
    (4.0, 2.5, L.SIGMAP1),
    (0.5, 0.8, L.SIGMAP1),
    (-1.0, 2.0, L.SIGMAP2),
    (-0.5, 1.0, L.SIGMAP2),
    (0.0, 1.0, L.SIGMAP2),
    (0.5, 1.5, L.SIGMAP2),
    (2.0, 3.0, L.SIGMAP2),
    (0.02, 0.5, L.SIGMAP2),
    (1.0, 0.5, L.OUTSIDE),
    (-1.0, 0.5, L.OUTSIDE),
    (0.5, 0.5, L.OUTSIDE),
    (0.5, 0.7, L.OUTSIDE),
    (4.0, 1.9, L.OUTSIDE),
    (-2.0, 1.0, L.OUTSIDE),
    (0.0, -1.0, L.OUTSIDE),
    (1.0, -1.0, L.OUTSIDE),
]


@pytest.mark.parametrize("h, c, label", LABELED)
def test_classify_hand_grid(h, c, label):
    assert classify((h, c), 1e-9) is label


@pytest.mark.parametrize("s, expected", [
    ((0, 0, 0), (0.0, 0.0)),
    ((1, 1, 0), (0.5, 1.0)),
    ((0, 0, 1), (-0.5, 0.5)),
])
def test_ec_map_values(s, expected):
    assert tuple(ec_map(s)) == expected


@pytest.mark.parametrize("p, expected", [((0.5, 1), True), ((1, 0.5), False), ((-1, 1), True)])
def test_in_image_examples(p, expected):
    assert in_image(p) is expected


def test_non_convexity_witness():
    assert in_image((1, 1)) and in_image((0, 0))
    assert not in_image((0.5, 0.5))


def test_image_contains_all_values(rng):
    S = rng.uniform(-3, 3, size=(20000, 3))
    for s in S:
        assert classify(ec_map(s)) is not L.OUTSIDE


def test_image_is_sharp(rng):
    # the fiber solver is an independent route to membership
    H = rng.uniform(-3, 3, 1000)
    C = rng.uniform(-0.5, 3, 1000)
    for h, c in zip(H, C):
        pts = fiber_points(h, c, n_heights=3)
        if in_image((h, c)):
            assert pts, (h, c)
            for p in pts:
                assert abs(hamiltonian(p) - h) <= 1e-9 and abs(casimir(p) - c) <= 1e-9
        else:
            assert not feasible_heights(h, c) and not pts, (h, c)


def test_critical_points():
    pts = critical_points(1.0)
    expected = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, -1, 0)]
    for p, e in zip(pts, expected):
        np.testing.assert_array_equal(p, e)
    assert all(not p.any() for p in critical_points(0.0))
    for M in (-2.0, 0.3, 1.7):
        assert all(rank_dec(p) < 2 for p in critical_points(M))


def rank_by_minors(s, tol=1e-9):
    A = dec_matrix(s)
    minors = [A[0, i] * A[1, j] - A[0, j] * A[1, i] for i, j in ((0, 1), (0, 2), (1, 2))]
    if not A.any():
        return 0
    big = np.max(np.abs(A)) ** 2
    return 2 if max(abs(m) for m in minors) > tol * big else 1


@pytest.mark.parametrize("s, r", [((1, 1, 0), 1), ((1, 2, 3), 2), ((0, 0, 0), 0)])
def test_rank_examples(s, r):
    assert rank_dec(s) == r
    assert rank_by_minors(s) == r


def test_rank_agrees_with_minors(rng):
    for s in rng.uniform(-2, 2, size=(500, 3)):
        assert rank_dec(s) == rank_by_minors(s)


def test_rank_characterizes_families_on_coarse_grid():
    g = np.linspace(-2, 2, 11)
    for x in g:
        for y in g:
            for z in g:
                s = (x, y, z)
                assert (rank_dec(s) < 2) == on_critical_family(s), s


@pytest.mark.parametrize("fam, M, expected", [
    (Family.E4, 1.0, (0.5, 1.0)),
    (Family.E3, 2.0, (-2.0, 2.0)),
    (Family.E1, 0.0, (0.0, 0.0)),
])
def test_image_of_family_examples(fam, M, expected):
    assert tuple(image_of_family(EquilibriumFamily(fam, M))) == expected


def test_image_of_family_consistency(rng):
    for M in rng.uniform(-3, 3, 50):
        for fam in Family:
            f = EquilibriumFamily(fam, M)
            a, b = image_of_family(f), ec_map(f.realize())
            assert abs(a.h - b.h) <= 1e-14 * max(1, abs(b.h))
            assert abs(a.c - b.c) <= 1e-14 * max(1, abs(b.c))


def test_family_images_land_on_their_curves(rng):
    for M in rng.uniform(0.1, 3, 20):
        for fam, lab in ((Family.E1, L.SIGMA12S), (Family.E2, L.SIGMA12S),
                         (Family.E3, L.SIGMA3S), (Family.E4, L.SIGMA45U), (Family.E5, L.SIGMA45U)):
            assert classify(image_of_family(EquilibriumFamily(fam, M))) is lab


def test_every_point_gets_exactly_one_label(rng):
    for h, c in rng.uniform(-3, 3, size=(2000, 2)):
        lab = classify((h, c))
        assert (lab is L.OUTSIDE) == (not in_image((h, c), 1e-9))


def test_scan_image():
    rows = scan_image(-2, 2, 0, 3, 100)
    assert len(rows) == 100 * 100
    for h, c, lab in rows:
        assert (lab is not L.OUTSIDE) == in_image((h, c), 1e-9)
    single = scan_image(0.5, 0.5, 0, 3, 7)
    assert len(single) == 7 and {h for h, _, _ in single} == {0.5}
    with pytest.raises(ValueError):
        scan_image(-1, 1, 0, 1, 0)
    with pytest.raises(ValueError):
        scan_image(1, -1, 0, 1, 5)


def test_family_rejects_nonfinite():
    with pytest.raises(ValueError):
        EquilibriumFamily(Family.E1, math.inf)
