"""
Tolerance-aware dense complex linear algebra.

Matrices are plain 2-D ``numpy`` arrays of dtype ``complex128``. Row spaces
are represented by :class:`Subspace`, which always stores an orthonormal
row basis so that projections, containment tests and intersections are
well conditioned.

Every rank decision goes through :func:`rank`, which counts singular values
above ``tol * sigma_max``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyResultError, ParameterError

__all__ = [
    "DEFAULT_TOL",
    "Subspace",
    "Rng",
    "IntersectionDimensionWarning",
    "as_matrix",
    "rank",
    "left_null_basis",
    "row_space",
    "intersect",
    "orthonormal_complement",
    "contains",
    "containment_residual",
    "random_gaussian",
    "matrix_to_json",
    "matrix_from_json",
]

DEFAULT_TOL = 1e-9

_UINT64_MAX = 2**64 - 1


class IntersectionDimensionWarning(RuntimeWarning):
    """Intersection dimension disagrees with the Grassmann formula."""


def as_matrix(A) -> np.ndarray:
    """Return `A` as a finite 2-D complex128 array, raising on bad input."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise ParameterError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError("matrix contains NaN or Inf entries")
    return A


def _check_tol(tol):
    if not (0.0 < tol < 1.0):
        raise ParameterError(f"tolerance must lie in (0, 1), got {tol!r}")


def _rank_from_singular_values(s, tol):
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def rank(A, tol: float = DEFAULT_TOL) -> int:
    """
    Numerical rank of `A`.

    Counts singular values strictly greater than ``tol * sigma_max``; a zero
    matrix has rank 0.
    """
    _check_tol(tol)
    A = as_matrix(A)
    if A.size == 0:
        return 0
    return _rank_from_singular_values(np.linalg.svd(A, compute_uv=False), tol)


def left_null_basis(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Orthonormal basis of the left annihilator of `A`.

    Parameters
    ----------
    A : array_like, shape (m, n)
    tol : float
        Relative singular value threshold.

    Returns
    -------
    U : ndarray, shape (m - r, m)
        Rows are orthonormal and ``U @ A`` vanishes up to the discarded
        singular values of `A`.

    Raises
    ------
    EmptyResultError
        If `A` has full row rank, so that no nonzero annihilator exists.
    """
    _check_tol(tol)
    A = as_matrix(A)
    m = A.shape[0]
    P, s, _ = np.linalg.svd(A, full_matrices=True)
    r = _rank_from_singular_values(s, tol)
    if r == m:
        raise EmptyResultError(f"matrix has full row rank {m}; left null space is empty")
    return P[:, r:].conj().T.copy()


@dataclass(frozen=True)
class Subspace:
    """
    Linear subspace of C^ambient_dim stored as an orthonormal row basis.

    A zero-dimensional subspace has a basis of shape ``(0, ambient_dim)``.
    Construct instances with :func:`row_space` rather than directly unless
    the basis is already known to be orthonormal.
    """

    ambient_dim: int
    basis: np.ndarray = field(repr=False)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.complex128)
        if basis.ndim != 2 or basis.shape[1] != self.ambient_dim:
            raise ParameterError(
                f"basis shape {basis.shape} incompatible with ambient dim {self.ambient_dim}"
            )
        if basis.shape[0] > self.ambient_dim:
            raise ParameterError("more basis vectors than the ambient dimension")
        gram = basis @ basis.conj().T
        if basis.shape[0] and np.max(np.abs(gram - np.eye(basis.shape[0]))) > max(10 * self.tol, 1e-12):
            raise ParameterError("basis rows are not orthonormal")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def project(self, vectors) -> np.ndarray:
        """Orthogonal projection of each row of `vectors` onto the subspace."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
        return (vectors @ self.basis.conj().T) @ self.basis

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim}, tol={self.tol:g})"


def row_space(A, tol: float = DEFAULT_TOL) -> Subspace:
    """Row space of `A` with dimension ``rank(A, tol)``."""
    _check_tol(tol)
    A = as_matrix(A)
    n = A.shape[1]
    if A.shape[0] == 0:
        return Subspace(n, np.zeros((0, n), dtype=np.complex128), tol)
    _, s, Vh = np.linalg.svd(A, full_matrices=False)
    r = _rank_from_singular_values(s, tol)
    return Subspace(n, Vh[:r].copy(), tol)


def _complement(S: Subspace) -> Subspace:
    # Allows the full-space input; the public wrapper refuses it.
    n = S.ambient_dim
    if S.dim == 0:
        return Subspace(n, np.eye(n, dtype=np.complex128), S.tol)
    _, _, Vh = np.linalg.svd(S.basis, full_matrices=True)
    return Subspace(n, Vh[S.dim:].copy(), S.tol)


def orthonormal_complement(S: Subspace) -> Subspace:
    """
    Orthogonal complement of `S` in its ambient space.

    Raises
    ------
    EmptyResultError
        If `S` is the whole space.
    """
    if S.dim >= S.ambient_dim:
        raise EmptyResultError("complement of the full space is empty")
    return _complement(S)


def intersect(Sa: Subspace, Sb: Subspace) -> Subspace:
    """
    Intersection of two subspaces of the same ambient space.

    Computed as the complement of ``Sa^perp + Sb^perp``. The resulting
    dimension is cross-checked against ``dim Sa + dim Sb - dim(Sa + Sb)``;
    a mismatch emits :class:`IntersectionDimensionWarning`.
    """
    if Sa.ambient_dim != Sb.ambient_dim:
        raise ParameterError(
            f"ambient dimension mismatch: {Sa.ambient_dim} != {Sb.ambient_dim}"
        )
    n = Sa.ambient_dim
    tol = max(Sa.tol, Sb.tol)
    perp_sum = np.vstack([_complement(Sa).basis, _complement(Sb).basis])
    if perp_sum.shape[0] == 0:
        result = Subspace(n, np.eye(n, dtype=np.complex128), tol)
    else:
        result = _complement(row_space(perp_sum, tol))

    sum_dim = rank(np.vstack([Sa.basis, Sb.basis]), tol) if Sa.dim + Sb.dim else 0
    grassmann = Sa.dim + Sb.dim - sum_dim
    if grassmann != result.dim:
        warnings.warn(
            f"intersection dimension {result.dim} disagrees with Grassmann formula {grassmann}",
            IntersectionDimensionWarning,
            stacklevel=2,
        )
    return result


def contains(S: Subspace, vectors, tol: float | None = None) -> bool:
    """
    True when every row ``v`` of `vectors` satisfies
    ``||v - proj_S(v)|| <= tol * ||v||``.
    """
    tol = S.tol if tol is None else tol
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
    if vectors.shape[1] != S.ambient_dim:
        raise ParameterError(
            f"vectors have {vectors.shape[1]} columns, subspace lives in C^{S.ambient_dim}"
        )
    residual = np.linalg.norm(vectors - S.project(vectors), axis=1)
    return bool(np.all(residual <= tol * np.linalg.norm(vectors, axis=1)))


def containment_residual(S: Subspace, vectors) -> float:
    """Largest relative distance of a row of `vectors` from `S` (0 for zero rows)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
    norms = np.linalg.norm(vectors, axis=1)
    residual = np.linalg.norm(vectors - S.project(vectors), axis=1)
    nonzero = norms > 0
    if not np.any(nonzero):
        return 0.0
    return float(np.max(residual[nonzero] / norms[nonzero]))


@dataclass(frozen=True)
class Rng:
    """
    Immutable, splittable random stream key.

    ``Rng(seed).child(trial, role)`` names an independent substream; the
    numbers it yields depend only on the seed and the key path, never on
    the order in which other substreams are consumed.
    """

    seed: int
    key: tuple = ()

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed <= _UINT64_MAX:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if any(not isinstance(k, (int, np.integer)) or k < 0 for k in self.key):
            raise ParameterError("substream keys must be nonnegative integers")

    def child(self, *key: int) -> "Rng":
        return Rng(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(int(self.seed), spawn_key=self.key))
        )


def random_gaussian(rows: int, cols: int, rng) -> np.ndarray:
    """
    Matrix of i.i.d. CN(0, 1) entries.

    `rng` may be an :class:`Rng` key (a fresh generator is derived from it,
    so equal keys give equal matrices) or a ``numpy.random.Generator``.
    """
    if rows < 1 or cols < 1:
        raise ParameterError(f"dimensions must be positive, got {rows}x{cols}")
    gen = rng.generator() if isinstance(rng, Rng) else rng
    z = gen.standard_normal((rows, cols, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def matrix_to_json(A) -> dict:
    A = as_matrix(A)
    return {
        "rows": A.shape[0],
        "cols": A.shape[1],
        "re": A.real.ravel().tolist(),
        "im": A.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re, im = obj["re"], obj["im"]
    if len(re) != rows * cols or len(im) != rows * cols:
        raise ParameterError("entry count does not match rows * cols")
    return as_matrix((np.asarray(re) + 1j * np.asarray(im)).reshape(rows, cols))
