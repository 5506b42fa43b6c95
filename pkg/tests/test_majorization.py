import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import rand_pd, rand_unitary
from pdorbit.majorization import (
    SpectrumVector,
    anti_equality_gap,
    equality_gap,
    gnl_bounds,
    gnl_verify,
    majorization_violation,
    majorizes,
    relative_log_spectrum,
    submajorizes,
)
from pdorbit.matcore import random_pd

finite = st.floats(-50, 50, allow_nan=False)


def vectors(n):
    return arrays(np.float64, n, elements=finite)


def doubly_stochastic(n, rng):
    # convex combination of permutation matrices (Birkhoff)
    w = rng.dirichlet(np.ones(4))
    return sum(wk * np.eye(n)[rng.permutation(n)] for wk in w)


def test_submajorizes_examples():
    assert submajorizes([3, 1], [4, 1])
    assert submajorizes([3, 1], [3, 1])
    assert not submajorizes([3, 1], [2, 2])


def test_majorizes_examples():
    assert majorizes([2, 2], [3, 1])
    assert majorizes([1, 3], [3, 1])
    assert not majorizes([3, 1], [4, 1])


def test_length_mismatch():
    with pytest.raises(ValueError):
        submajorizes([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        majorizes([1], [1, 2])


def test_spectrum_vector_ordering():
    SpectrumVector([3, 2, 2], "non-increasing")
    SpectrumVector([1, 2, 2], "non-decreasing")
    with pytest.raises(ValueError):
        SpectrumVector([1, 2], "non-increasing")
    with pytest.raises(ValueError):
        SpectrumVector([2, 1], "non-decreasing")
    with pytest.raises(ValueError):
        SpectrumVector([1], "sorted")
    v = SpectrumVector.decreasing([1, 3, 2])
    np.testing.assert_array_equal(np.asarray(v), [3, 2, 1])


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(vectors(n), vectors(n))), st.randoms())
def test_sorting_invariance(xy, rnd):
    x, y = xy
    px = np.array(rnd.sample(list(x), len(x)))
    py = np.array(rnd.sample(list(y), len(y)))
    assert submajorizes(x, y) == submajorizes(px, py)
    assert majorizes(x, y) == majorizes(px, py)


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(vectors(n), arrays(np.float64, n, elements=st.floats(0, 10)))))
def test_entrywise_order_implies_submajorization(xd):
    x, delta = xd
    assert submajorizes(x, x + delta)


@given(st.integers(1, 6).flatmap(vectors), st.integers(0, 2**31))
def test_majorization_implies_abs_submajorization(y, seed):
    # x = S y with S doubly stochastic gives x ≺ y
    rng = np.random.default_rng(seed)
    x = doubly_stochastic(len(y), rng) @ y
    assert majorizes(x, y, tol=1e-9)
    assert submajorizes(np.abs(x), np.abs(y), tol=1e-9)


@given(st.integers(1, 6).flatmap(vectors), st.integers(0, 2**31))
def test_majorization_with_equal_abs_forces_equality(y, seed):
    rng = np.random.default_rng(seed)
    n = len(y)
    # candidates with |x|↓ = |y|↓: sign flips and permutations of y
    x = y[rng.permutation(n)] * rng.choice([-1.0, 1.0], n)
    np.testing.assert_array_equal(np.sort(np.abs(x)), np.sort(np.abs(y)))
    if majorizes(x, y, tol=0.0):
        np.testing.assert_allclose(np.sort(x), np.sort(y), atol=1e-9)


def test_abs_equality_constructed_cases():
    # (1,-1) and (1,1) share |.|↓ but neither majorizes the other: traces differ
    assert not majorizes([1, -1], [1, 1])
    # (2,-1,0) and (1,0,-2): same |.|↓ but traces 1 and -1
    assert not majorizes([2, -1, 0], [1, 0, -2])
    # permutation: majorizes and sorted vectors coincide
    assert majorizes([0, 2, -1], [2, -1, 0])


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(vectors(n), vectors(n))))
def test_violation_consistent_with_predicate(xy):
    x, y = xy
    v = majorization_violation(x, y)
    if v <= 0:
        assert majorizes(x, y, tol=1e-12)


def test_gnl_bounds_equal_inputs(rng):
    a = rand_pd(4, rng)
    lower, mid, upper = gnl_bounds(a, a)
    np.testing.assert_allclose(lower.values, 0, atol=1e-12)
    np.testing.assert_allclose(mid.values, 0, atol=1e-12)
    la = np.sort(np.log(np.linalg.eigvalsh(a)))
    np.testing.assert_allclose(upper.values, la[::-1] - la, atol=1e-12)


def test_gnl_bounds_diagonal_example():
    lower, mid, upper = gnl_bounds(np.diag([4.0, 1.0]), np.diag([9.0, 1.0]))
    np.testing.assert_allclose(lower.values, [math.log(9 / 4), 0], atol=1e-15)
    np.testing.assert_allclose(mid.values, [math.log(9 / 4), 0], atol=1e-15)
    np.testing.assert_allclose(upper.values, [math.log(9), -math.log(4)], atol=1e-15)


def test_gnl_random_3x3_seed_11():
    a, b = random_pd(3, [11, 0], 50.0), random_pd(3, [11, 1], 50.0)
    lower, mid, upper = gnl_bounds(a, b)
    assert majorizes(lower, mid, 1e-9)
    assert majorizes(mid, upper, 1e-9)


def test_mid_matches_generalized_eigenproblem(rng):
    # mid = log λ(B A^{-1}) = log of the generalised eigenvalues of (B, A)
    for d in (1, 2, 3):
        for _ in range(20):
            a, b = rand_pd(d, rng), rand_pd(d, rng)
            ref = np.sort(np.log(scipy.linalg.eigh(b, a, eigvals_only=True)))[::-1]
            _, mid, _ = gnl_bounds(a, b)
            np.testing.assert_allclose(mid.values, ref, atol=1e-8)
            np.testing.assert_allclose(relative_log_spectrum(a, b), ref, atol=1e-8)


def test_gnl_verify_equal_inputs(rng):
    a = rand_pd(3, rng)
    rep = gnl_verify(a, a)
    assert rep.left_holds and rep.right_holds
    assert rep.left_gap < 1e-12


def test_gnl_verify_aligned_pair(rng):
    u = rand_unitary(3, rng)
    a = (u * np.array([5.0, 2.0, 1.0])) @ u.conj().T
    b = (u * np.array([4.0, 3.0, 0.5])) @ u.conj().T
    rep = gnl_verify(a, b)
    assert rep.left_holds and rep.right_holds
    assert rep.left_gap < 1e-10
    assert rep.right_gap > 0.1


def test_gnl_chain_sweep():
    for d in range(2, 7):
        for k in range(200):
            a = random_pd(d, [d, k, 0], 10 ** (k % 4))
            b = random_pd(d, [d, k, 1], 10 ** ((k // 4) % 4))
            rep = gnl_verify(a, b, 1e-9)
            assert rep.left_holds and rep.right_holds, (d, k, rep)


def test_reversed_left_relation_fails(rng):
    # mid ≺ lower is false in general, which pins the orientation of the chain
    failures = 0
    for _ in range(50):
        a, b = rand_pd(3, rng), rand_pd(3, rng)
        lower, mid, _ = gnl_bounds(a, b)
        failures += not majorizes(mid, lower, 1e-9)
    assert failures > 0


def test_equality_gap_examples(rng):
    assert equality_gap(np.diag([5.0, 3, 1]), np.diag([2.0, 2, 0.5])) < 1e-10
    gap = equality_gap(np.diag([4.0, 1.0]), np.diag([1.0, 9.0]))
    expected = np.linalg.norm(np.array([math.log(9 / 4), 0]) - np.array([math.log(9), -math.log(4)]))
    assert gap > 1
    assert abs(gap - expected) < 1e-12
    a = rand_pd(4, rng)
    assert equality_gap(a, a) < 1e-12


def test_anti_gap_vanishes_when_anti_aligned():
    assert anti_equality_gap(np.diag([4.0, 1.0]), np.diag([1.0, 9.0])) < 1e-12
    assert anti_equality_gap(np.diag([4.0, 1.0]), np.diag([9.0, 1.0])) > 1


@given(st.integers(2, 5), st.integers(0, 2**31))
def test_gap_positive_for_generic_pairs(d, seed):
    a, b = random_pd(d, [seed, 0], 20.0), random_pd(d, [seed, 1], 20.0)
    assume(np.linalg.norm(a @ b - b @ a) > 1e-3)
    assert equality_gap(a, b) > 0
