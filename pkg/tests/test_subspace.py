import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ria_dof.errors import EmptyResultError, ParameterError
from ria_dof.subspace import (
    IntersectionDimensionWarning,
    Rng,
    Subspace,
    contains,
    intersect,
    left_null_basis,
    matrix_from_json,
    matrix_to_json,
    orthonormal_complement,
    random_gaussian,
    rank,
    row_space,
)


def cn(rows, cols, seed):
    return random_gaussian(rows, cols, np.random.default_rng(seed))


def random_unitary(n, seed):
    q, r = np.linalg.qr(cn(n, n, seed))
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------- rank
def test_rank_identity():
    assert rank(np.eye(3), 1e-9) == 3


def test_rank_zero_matrix():
    assert rank(np.zeros((4, 2))) == 0


def test_rank_generic_tall():
    # M=3, N=5, W1=5, b=15: the stacked phase-1 interference is 25 x 15.
    assert rank(cn(25, 15, 0)) == 15


@pytest.mark.parametrize("k", [1, 4, 9, 15])
def test_rank_matches_factorization(k):
    # Product of a 25 x k and a k x 15 full-rank factor has rank exactly k.
    A = cn(25, k, 1) @ cn(k, 15, 2)
    assert rank(A) == k


@pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3, 2.0])
def test_rank_rejects_bad_tolerance(tol):
    with pytest.raises(ParameterError):
        rank(np.eye(2), tol)


def test_rank_rejects_nonfinite():
    with pytest.raises(ParameterError):
        rank(np.array([[1.0, np.nan]]))


@settings(max_examples=30, deadline=None)
@given(m=st.integers(2, 12), n=st.integers(2, 12), k=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_rank_unitary_invariance(m, n, k, seed):
    k = min(k, m, n)
    A = cn(m, k, seed) @ cn(k, n, seed + 1)
    r = rank(A)
    assert r == k
    assert rank(random_unitary(m, seed + 2) @ A @ random_unitary(n, seed + 3)) == r


# ---------------------------------------------------------------- left null basis
def test_left_null_coordinate_case():
    A = np.array([[1.0], [0.0], [0.0]])
    U = left_null_basis(A)
    assert U.shape == (2, 3)
    assert np.allclose(U @ A, 0)
    # Spans coordinates 2 and 3: no weight on the first coordinate.
    assert np.allclose(U[:, 0], 0)
    assert np.allclose(U @ U.conj().T, np.eye(2))


def test_left_null_generic_25x15():
    A = cn(25, 15, 3)
    U = left_null_basis(A)
    assert U.shape == (10, 25)
    assert np.linalg.norm(U @ A) <= 1e-9 * np.linalg.norm(A)
    assert np.allclose(U @ U.conj().T, np.eye(10), atol=1e-12)


def test_left_null_zero_matrix_is_unitary():
    U = left_null_basis(np.zeros((4, 3)))
    assert U.shape == (4, 4)
    assert np.allclose(U @ U.conj().T, np.eye(4))


def test_left_null_full_row_rank_raises():
    with pytest.raises(EmptyResultError):
        left_null_basis(cn(3, 5, 4))


def test_left_null_is_full_annihilator():
    # Rank-6 matrix in C^{10 x 8}: annihilator has dimension 4 and contains
    # every vector orthogonal to the column space built independently.
    B = cn(10, 6, 5)
    A = B @ cn(6, 8, 6)
    U = left_null_basis(A)
    assert U.shape == (4, 10)
    q, _ = np.linalg.qr(B, mode="complete")
    perp = q[:, 6:].conj().T  # rows y with y @ B = 0
    assert contains(row_space(U), perp, 1e-9)


# ---------------------------------------------------------------- row space
def test_row_space_rank_one():
    S = row_space(np.array([[1.0, 0.0], [2.0, 0.0]]))
    assert S.dim == 1
    assert np.allclose(np.abs(S.basis), [[1.0, 0.0]])


def test_row_space_identity():
    assert row_space(np.eye(4)).dim == 4


def test_row_space_generic_wide():
    S = row_space(cn(10, 15, 7))
    assert (S.ambient_dim, S.dim) == (15, 10)


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(ParameterError):
        Subspace(2, np.array([[1.0, 1.0]]))


def test_subspace_is_immutable():
    S = row_space(np.eye(2))
    with pytest.raises(ValueError):
        S.basis[0, 0] = 5


# ---------------------------------------------------------------- intersection
def test_intersect_idempotent():
    S = row_space(cn(4, 9, 8))
    R = intersect(S, S)
    assert R.dim == S.dim
    assert contains(S, R.basis, 1e-9) and contains(R, S.basis, 1e-9)


def test_intersect_complementary_is_zero():
    S = row_space(cn(3, 7, 9))
    assert intersect(S, orthonormal_complement(S)).dim == 0


def test_intersect_generic_grassmann():
    # Two generic 10-dim subspaces of C^15 meet in 2*10 - 15 = 5 dimensions.
    Sa, Sb = row_space(cn(10, 15, 10)), row_space(cn(10, 15, 11))
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntersectionDimensionWarning)
        R = intersect(Sa, Sb)
    assert R.dim == 5
    assert contains(Sa, R.basis, 1e-9) and contains(Sb, R.basis, 1e-9)


def test_intersect_recovers_planted_subspace():
    # Planted k-dim common part; everything else generic and small enough
    # that no accidental intersection can occur (3 + 2 + 2 <= 12).
    common = cn(3, 12, 12)
    Sa = row_space(np.vstack([common, cn(2, 12, 13)]))
    Sb = row_space(np.vstack([common, cn(2, 12, 14)]))
    R = intersect(Sa, Sb)
    assert R.dim == 3
    assert contains(R, common, 1e-9)


def test_intersect_ambient_mismatch():
    with pytest.raises(ParameterError):
        intersect(row_space(np.eye(3)), row_space(np.eye(4)))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 14), da=st.integers(0, 14), db=st.integers(0, 14), seed=st.integers(0, 2**32 - 1))
def test_intersect_symmetric_and_grassmann(n, da, db, seed):
    da, db = min(da, n), min(db, n)
    Sa = row_space(cn(da, n, seed)) if da else Subspace(n, np.zeros((0, n)))
    Sb = row_space(cn(db, n, seed + 1)) if db else Subspace(n, np.zeros((0, n)))
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntersectionDimensionWarning)
        ab, ba = intersect(Sa, Sb), intersect(Sb, Sa)
    stacked = np.vstack([Sa.basis, Sb.basis])
    sum_dim = rank(stacked) if stacked.shape[0] else 0
    assert ab.dim == ba.dim == Sa.dim + Sb.dim - sum_dim == max(0, da + db - n)
    if ab.dim:
        assert contains(ab, ba.basis, 1e-9) and contains(ba, ab.basis, 1e-9)


# ---------------------------------------------------------------- complement / contains
def test_complement_of_axis():
    C = orthonormal_complement(row_space(np.array([[1.0, 0.0, 0.0]])))
    assert C.dim == 2
    assert np.allclose(C.basis @ np.array([1.0, 0.0, 0.0]), 0)


def test_complement_of_full_space_raises():
    with pytest.raises(EmptyResultError):
        orthonormal_complement(row_space(np.eye(3)))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 16), d=st.integers(1, 15), seed=st.integers(0, 2**32 - 1))
def test_complement_rank_nullity_and_contains(n, d, seed):
    d = min(d, n - 1)
    S = row_space(cn(d, n, seed))
    C = orthonormal_complement(S)
    assert S.dim + C.dim == n
    assert np.max(np.abs(S.basis @ C.basis.conj().T)) <= 1e-9
    assert contains(S, S.basis)
    assert not contains(S, C.basis[:1])


def test_contains_vector_orthogonal():
    S = row_space(np.array([[1.0, 0.0]]))
    assert contains(S, [[3.0, 0.0]])
    assert not contains(S, [[0.0, 1.0]])


def test_contains_dimension_mismatch():
    with pytest.raises(ParameterError):
        contains(row_space(np.eye(2)), np.ones((1, 3)))


# ---------------------------------------------------------------- randomness
def test_random_gaussian_deterministic():
    assert np.array_equal(random_gaussian(4, 3, Rng(7).child(1, 2)), random_gaussian(4, 3, Rng(7).child(1, 2)))
    assert not np.array_equal(random_gaussian(4, 3, Rng(7).child(1, 2)), random_gaussian(4, 3, Rng(7).child(1, 3)))


def test_random_gaussian_unit_variance():
    z = random_gaussian(100_000, 1, Rng(2014))
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) <= 0.02
    # Circular symmetry: real and imaginary parts each carry half the power.
    assert abs(np.mean(z.real**2) - 0.5) <= 0.01
    assert abs(np.mean(z**2)) <= 0.01


def test_random_gaussian_square_nonsingular():
    assert rank(random_gaussian(20, 20, Rng(3))) == 20


def test_random_gaussian_rejects_empty():
    with pytest.raises(ParameterError):
        random_gaussian(0, 3, Rng(1))


def test_substreams_independent_of_order():
    root = Rng(99)
    forward = [random_gaussian(2, 2, root.child(t)) for t in range(5)]
    backward = [random_gaussian(2, 2, root.child(t)) for t in reversed(range(5))][::-1]
    for a, b in zip(forward, backward):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_rng_rejects_bad_seed(seed):
    with pytest.raises(ParameterError):
        Rng(seed)


def test_matrix_json_roundtrip():
    A = cn(3, 2, 21)
    obj = matrix_to_json(A)
    assert (obj["rows"], obj["cols"]) == (3, 2)
    assert np.array_equal(matrix_from_json(obj), A)
    with pytest.raises(ParameterError):
        matrix_from_json({**obj, "re": obj["re"][:-1]})
