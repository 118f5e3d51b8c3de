import itertools

import numpy as np
import pytest

import rogcones as rc
from rogcones.errors import InvalidInputError
from rogcones.isomorph import (PartialMatrix, cross_ratio, rank1_complete,
                               rank1_complete_signs, reconstruct_isomorphism,
                               s4_orbit, same_s4_orbit)
from conftest import random_congruence


def test_complete_diagonal_only():
    pm = PartialMatrix(2, 2, {(0, 0): 1.0})
    out = rank1_complete(pm)
    assert out.feasible
    assert np.allclose(out.e, [1.0, 1.0]) and np.allclose(out.f, [1.0, 1.0])


def test_complete_consistent():
    pm = PartialMatrix.from_dense(np.array([[1.0, 2.0], [3.0, 6.0]]),
                                  np.ones((2, 2), dtype=bool))
    out = rank1_complete(pm)
    assert out.feasible
    assert np.allclose(out.e, [1.0, 3.0])
    assert np.allclose(out.f, [1.0, 2.0])


def test_complete_inconsistent_cycle():
    pm = PartialMatrix.from_dense(np.array([[1.0, 2.0], [3.0, 5.0]]),
                                  np.ones((2, 2), dtype=bool))
    out = rank1_complete(pm)
    assert not out.feasible
    assert out.violation == "cycle"
    assert out.cycle is not None and len(out.cycle) >= 4


def test_complete_zero_row_condition():
    # a zero entry with nonzero row and column companions is infeasible
    pm = PartialMatrix(2, 2, {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 1.0})
    out = rank1_complete(pm)
    assert not out.feasible
    assert "zero" in out.violation
    # but a fully zero row completes fine
    pm2 = PartialMatrix(2, 2, {(0, 0): 0.0, (0, 1): 0.0, (1, 0): 1.0})
    out2 = rank1_complete(pm2)
    assert out2.feasible
    assert abs(out2.matrix()[0, 0]) < 1e-12


def test_complete_roundtrip_random(rng):
    for _ in range(500):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        e = rng.standard_normal(n)
        f = rng.standard_normal(m)
        if rng.random() < 0.3:
            e[rng.integers(n)] = 0.0
        a = np.outer(e, f)
        mask = rng.random((n, m)) < 0.6
        out = rank1_complete(PartialMatrix.from_dense(a, mask))
        assert out.feasible
        c = out.matrix()
        assert np.abs((c - a)[mask]).max(initial=0.0) < 1e-9 * (1 + np.abs(a).max())


def test_signs_examples():
    pm = PartialMatrix(3, 3, {(0, 0): -1.0})
    out = rank1_complete_signs(pm)
    assert out.feasible and out.e[0] * out.f[0] == -1.0

    pm = PartialMatrix.from_dense(np.ones((2, 2)), np.ones((2, 2), dtype=bool))
    out = rank1_complete_signs(pm)
    assert out.feasible
    assert np.allclose(np.outer(out.e, out.f), np.ones((2, 2)))

    a = np.array([[1.0, 1.0], [1.0, -1.0]])
    out = rank1_complete_signs(PartialMatrix.from_dense(a, np.ones((2, 2), dtype=bool)))
    assert not out.feasible


def brute_force_sign_feasible(pm: PartialMatrix):
    n, m = pm.n_rows, pm.n_cols
    for bits in range(2 ** (n + m)):
        e = [1 if (bits >> i) & 1 else -1 for i in range(n)]
        f = [1 if (bits >> (n + j)) & 1 else -1 for j in range(m)]
        if all(e[i] * f[j] == v for (i, j), v in pm.entries.items()):
            return True
    return False


def test_signs_against_brute_force(rng):
    for _ in range(200):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 5))
        mask = rng.random((n, m)) < 0.5
        a = np.where(rng.random((n, m)) < 0.5, 1.0, -1.0)
        pm = PartialMatrix.from_dense(a, mask)
        assert rank1_complete_signs(pm).feasible == brute_force_sign_feasible(pm)


def test_reconstruct_identity():
    xs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0])]
    out = reconstruct_isomorphism(xs, xs)
    assert out.status == "isomorphic"
    s = out.witness.s_matrix
    assert np.allclose(s / s[0, 0], np.eye(2), atol=1e-10)


def test_reconstruct_homothety():
    xs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0])]
    ys = [-2.0 * x for x in xs]
    out = reconstruct_isomorphism(xs, ys)
    assert out.status == "isomorphic"
    for x, y, sg in zip(xs, ys, out.witness.sigma):
        assert np.allclose(sg * out.witness.s_matrix @ x, y, atol=1e-8)


def test_reconstruct_shear_with_signs(rng):
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    xs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0])]
    signs = [1.0, -1.0, 1.0]
    ys = [s * a @ x for s, x in zip(signs, xs)]
    out = reconstruct_isomorphism(xs, ys)
    assert out.status == "isomorphic"
    s = out.witness.s_matrix
    for x, y in zip(xs, ys):
        assert np.linalg.norm(s @ np.outer(x, x) @ s.T - np.outer(y, y)) < 1e-8


def test_reconstruct_roundtrip_random(rng):
    for _ in range(100):
        n = int(rng.integers(2, 5))
        m = n + int(rng.integers(1, 4))
        a = random_congruence(rng, n)
        xs = [rng.standard_normal(n) for _ in range(m)]
        if np.linalg.matrix_rank(np.array(xs)) < n:
            continue
        signs = rng.choice([-1.0, 1.0], m)
        ys = [s * a @ x for s, x in zip(signs, xs)]
        out = reconstruct_isomorphism(xs, ys)
        assert out.status == "isomorphic"
        s = out.witness.s_matrix
        for x, y in zip(xs, ys):
            err = np.linalg.norm(s @ np.outer(x, x) @ s.T - np.outer(y, y))
            assert err < 1e-7 * (1.0 + np.linalg.norm(np.outer(y, y)))


def test_reconstruct_incompatible():
    xs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0])]
    ys = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 2.0])]
    out = reconstruct_isomorphism(xs, ys)
    assert out.status == "incompatible"


def test_cones_isomorphic_roundtrip(rng):
    k = rc.hankel_cone(3)
    a = random_congruence(rng, 3)
    ka = rc.apply_congruence(k, a, keep_expr=False)
    out = rc.cones_isomorphic(k, ka)
    assert out.status == "isomorphic"


def test_cones_isomorphic_shuffled_generators(rng):
    k = rc.tridiagonal_cone(3)
    a = random_congruence(rng, 3)
    ka = rc.apply_congruence(k, a, keep_expr=False)
    shuffled = ka.copy_with(generators=ka.generators[rng.permutation(len(ka.generators))])
    out = rc.cones_isomorphic(k, shuffled, seed=5)
    assert out.status == "isomorphic"


def test_cones_not_isomorphic_signature():
    out = rc.cones_isomorphic(rc.hankel_cone(3), rc.tridiagonal_cone(3))
    assert out.status == "not_isomorphic"
    assert "signature" in out.reason


def test_cross_ratio_values():
    # angles with cotangents (0, 1, 2, 3)
    phis = [np.arctan2(1.0, c) for c in (0.0, 1.0, 2.0, 3.0)]
    lam = cross_ratio(*phis)
    assert abs(lam - 4.0 / 3.0) < 1e-12


def test_cross_ratio_harmonic():
    # cotangents (1, -1, 0, infinity); the vertical line is angle 0
    phis = [np.pi / 4, 3 * np.pi / 4, np.pi / 2, 0.0]
    lam = cross_ratio(*phis)
    assert abs(lam - (-1.0)) < 1e-12
    orbit = sorted(set(round(v, 9) for v in s4_orbit(lam)))
    assert orbit == [-1.0, 0.5, 2.0]


def test_cross_ratio_swap_inverts():
    phis = [0.3, 0.9, 1.7, 2.5]
    lam = cross_ratio(*phis)
    swapped = cross_ratio(phis[1], phis[0], phis[2], phis[3])
    assert abs(swapped - 1.0 / lam) < 1e-10
    assert same_s4_orbit(lam, swapped)


def test_cross_ratio_coincident_rejected():
    with pytest.raises(InvalidInputError):
        cross_ratio(0.3, 0.3, 1.0, 2.0)


def test_s4_orbit_invariance():
    phis = [0.25, 0.85, 1.55, 2.45]
    lam = cross_ratio(*phis)
    for perm in itertools.permutations(range(4)):
        lam_p = cross_ratio(*[phis[i] for i in perm])
        assert same_s4_orbit(lam, lam_p)


def test_cross_ratio_cones_isomorphism(rng):
    phis = [np.arctan2(1.0, c) for c in (0.0, 1.0, 2.0, 3.0)]
    k1 = rc.cross_ratio_cone(phis)
    # a permuted quadruple has an S4-equivalent cross-ratio
    k2 = rc.cross_ratio_cone([phis[2], phis[0], phis[3], phis[1]])
    out = rc.cones_isomorphic(k1, k2)
    assert out.status == "isomorphic"
    a = out.witness.s_matrix
    for s in k1.span_basis:
        img = a @ s @ a.T
        from rogcones import symlin
        assert symlin.span_distance(k2.span_basis, img) < 1e-7

    phis_b = [np.arctan2(1.0, c) for c in (0.0, 1.0, 2.0, -4.0)]
    assert abs(cross_ratio(*phis_b) - 2.5) < 1e-12
    k3 = rc.cross_ratio_cone(phis_b)
    out = rc.cones_isomorphic(k1, k3)
    assert out.status == "not_isomorphic"
