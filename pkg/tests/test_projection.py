import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.linalg import subspace_angles

from dropmor.analysis import kalman_subspace
from dropmor.benchmarks import delay_system, demo_system
from dropmor.projection import (build_V, build_VW, build_W, orthonormalize, projection_pair,
                                realify, split_real)
from dropmor.sampling import SamplePoint, SampleSet, log_freq_grid, make_samples

from helpers import first_order, kalman_structured, orth_basis, random_stable


def at(*pts):
    return SampleSet(tuple(SamplePoint(complex(s), tuple(q)) for s, q in pts))


def siso(a=-1.0):
    return first_order(np.array([[a]]), np.ones((1, 1)), np.ones((1, 1)))


def test_demo_single_point_bases():
    pts = at((0, (0.0,)))
    np.testing.assert_allclose(build_V(demo_system(), pts), [[0.5], [0], [0.5]], atol=1e-15)
    np.testing.assert_allclose(build_W(demo_system(), pts), [[0.5], [1], [0]], atol=1e-15)


def test_siso_columns():
    V = build_V(siso(), at((0, ()), (1j, ())))
    np.testing.assert_allclose(V, [[1.0, 1 / (1 + 1j)]], atol=1e-15)


def test_empty_sample_set():
    for sys in (demo_system(), delay_system(7)):
        assert build_V(sys, SampleSet(())).shape == (sys.n, 0)
        assert build_W(sys, SampleSet(())).shape == (sys.n, 0)


def test_symmetric_system_W_equals_V():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((5, 5))
    A = -(M @ M.T) - np.eye(5)
    b = rng.standard_normal((5, 1))
    sys = first_order(A, b, b.T)
    pts = at((0.5j, ()), (3j, ()), (1 + 1j, ()))
    np.testing.assert_allclose(build_W(sys, pts), build_V(sys, pts), rtol=0, atol=1e-14)


def test_column_counts_with_and_without_directions():
    rng = np.random.default_rng(1)
    A, B, C = random_stable(rng, 6, m=2, p=3)
    sys = first_order(A, B, C)
    plain = make_samples((1e-1, 1e1), 4)
    V, W, _ = build_VW(sys, plain)
    assert V.shape == (6, 8) and W.shape == (6, 12)
    tang = make_samples((1e-1, 1e1), 4, tangential=(2, 3))
    V, W, _ = build_VW(sys, tang)
    assert V.shape == (6, 4) and W.shape == (6, 4)


def test_singular_sample_dropped_with_warning():
    with pytest.warns(RuntimeWarning, match="dropping sample 0"):
        V, W, dropped = build_VW(siso(0.0), at((0, ()), (1j, ())))
    assert dropped == (0,) and V.shape == (1, 1)


def test_realify_examples():
    rng = np.random.default_rng(2)
    M0 = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 3))
    R = realify(M0)
    assert R.shape[1] == 2 and np.isrealobj(R)
    assert subspace_angles(R, M0).max() <= 1e-12
    R2 = realify(1j * M0)
    assert R2.shape[1] == 2 and subspace_angles(R2, M0).max() <= 1e-12
    R3 = realify(np.array([[1 + 1j], [1 - 1j]]))
    assert R3.shape == (2, 2)
    np.testing.assert_allclose(R3.T @ R3, np.eye(2), atol=1e-15)


def test_split_real_keeps_scales():
    M = np.array([[2.0 + 0j, 1j], [0, 3 + 4j]])
    S = split_real(M)
    # real parts of both columns, then imaginary parts of the complex column only
    np.testing.assert_array_equal(S, [[2, 0, 1], [0, 3, 4]])


def test_orthonormalize_examples():
    Q = orthonormalize(np.eye(4))
    np.testing.assert_allclose(np.abs(Q), np.eye(4), atol=1e-15)
    rng = np.random.default_rng(4)
    M = rng.standard_normal((6, 3))
    assert orthonormalize(np.hstack([M, M[:, :1]])).shape[1] == 3
    x1, x2, y1, y2 = (rng.standard_normal(k) for k in (10, 10, 4, 4))
    R2 = np.outer(x1, y1) + np.outer(x2, y2)
    assert np.linalg.matrix_rank(R2) == 2
    assert orthonormalize(R2).shape == (10, 2)
    assert orthonormalize(np.zeros((3, 2))).shape == (3, 0)
    with pytest.raises(ValueError):
        orthonormalize(M, -1.0)


def test_projection_pair_flags():
    pair = projection_pair(demo_system(), make_samples((1e-4, 10), 5, [(-10, 10)]),
                           orthonormal=True)
    assert pair.realified and pair.orthonormalized
    for X in (pair.V, pair.W):
        np.testing.assert_allclose(X.T @ X, np.eye(X.shape[1]), atol=1e-10)
    one = projection_pair(demo_system(), make_samples((1e-4, 10), 5, [(-10, 10)]), one_sided=True)
    np.testing.assert_array_equal(one.V, one.W)


# ---------------------------------------------------------------- properties

@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(1, 10))
def test_subspace_inclusion(seed, n, N):
    rng = np.random.default_rng(seed)
    A, B, C = random_stable(rng, n, m=2)
    V = build_V(first_order(A, B, C), make_samples((1e-2, 1e2), N, seed=seed))
    Q = orthonormalize(V)
    resid = V - Q @ (Q.conj().T @ V)
    assert np.linalg.norm(resid, axis=0).max() <= 1e-10 * np.linalg.norm(V, axis=0).max()


def _imag_points(n, lo=1e-1, hi=1e1):
    return SampleSet(tuple(SamplePoint(s) for s in log_freq_grid(lo, hi, n)))


@given(st.integers(0, 2**32 - 1))
def test_reachable_subspace_generic(seed):
    rng = np.random.default_rng(seed)
    A, B, C = random_stable(rng, 8)
    V = build_V(first_order(A, B, C), _imag_points(8))
    K = kalman_subspace(A, B)
    assert subspace_angles(orthonormalize(realify(V), 1e-10), K).max() <= 1e-8


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_reachable_subspace_with_unreachable_part(seed, k):
    rng = np.random.default_rng(seed)
    A, B, C = kalman_structured(rng, 8, k)
    raw = split_real(build_V(first_order(A, B, C), _imag_points(8)))
    sv = np.linalg.svd(raw, compute_uv=False)
    K = kalman_subspace(A, B)
    # angles are only resolvable to eps / (weakest excited direction)
    assume(sv[K.shape[1] - 1] > 1e-6 * sv[0])
    V = orthonormalize(raw, 1e-10)
    assert V.shape[1] == K.shape[1]
    assert subspace_angles(V, K).max() <= 1e-8


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_rank_monotone_in_samples(seed, N):
    rng = np.random.default_rng(seed)
    A, B, C = kalman_structured(rng, 8, int(rng.integers(2, 7)))
    sys = first_order(A, B, C)
    small = make_samples((1e-1, 1e1), N, seed=seed)
    extra = make_samples((2e-1, 3e1), 3, seed=seed + 1)
    big = SampleSet(small.points + tuple(p for p in extra if p not in small.points))
    r_small = realify(build_V(sys, small), 1e-10).shape[1]
    r_big = realify(build_V(sys, big), 1e-10).shape[1]
    assert r_big >= r_small
