"""Euclidean-space primitives.

Linear maps with cached SVD, subspaces stored as orthonormal frames, SPD
helpers, the principal-angle metric on the Grassmannian and the determinant
inequality for positive semi-definite forms.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.linalg

from .exceptions import InvalidInput

TAU_ORTH = 1e-10
TAU_SVD = 1e-12
RANK_RTOL = 1e-10


def _as_matrix(entries, name="matrix"):
    a = np.array(entries, dtype=float)
    if a.ndim == 1:
        a = a[np.newaxis, :]
    if a.ndim != 2 or a.size == 0:
        raise InvalidInput(f"{name} must be a non-empty 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite entries")
    return a


class LinearMap:
    """A real matrix ``rows x cols`` standing for a map ``R^cols -> R^rows``.

    The SVD is computed lazily and cached; instances are treated as immutable.
    """

    def __init__(self, entries):
        if isinstance(entries, LinearMap):
            entries = entries.matrix
        a = _as_matrix(entries, "linear map")
        a.setflags(write=False)
        self.matrix = a

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    @cached_property
    def svd(self):
        u, s, vt = np.linalg.svd(self.matrix, full_matrices=False)
        return u, s, vt.T

    @property
    def singular_values(self) -> np.ndarray:
        return self.svd[1]

    @property
    def norm(self) -> float:
        """Operator norm (largest singular value)."""
        return float(self.singular_values[0])

    @property
    def adjoint(self) -> "LinearMap":
        return LinearMap(self.matrix.T)

    def __matmul__(self, other):
        if isinstance(other, LinearMap):
            return LinearMap(self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other, dtype=float)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"LinearMap({self.matrix.tolist()!r})"


def as_map(x) -> LinearMap:
    return x if isinstance(x, LinearMap) else LinearMap(x)


def svd(map):
    """Thin SVD ``(U, sigma, V)`` with ``map = U diag(sigma) V^T``.

    ``sigma`` is sorted non-increasing; ``U`` and ``V`` have orthonormal columns.
    """
    return as_map(map).svd


def rank_tolerance(sigma) -> float:
    top = float(sigma[0]) if len(sigma) else 0.0
    return RANK_RTOL * max(1.0, top)


def _count_above(sigma, alpha, tol=None) -> int:
    if len(sigma) == 0:
        return 0
    if tol is None:
        tol = rank_tolerance(sigma)
    return int(np.count_nonzero(sigma > alpha + tol))


def essential_rank(map, alpha: float, tol: float | None = None) -> int:
    """Number of singular values strictly greater than ``alpha``.

    Strictness is resolved by counting ``sigma > alpha + tol`` with
    ``tol = 1e-10 * max(1, sigma_1)`` unless given.
    """
    if not alpha >= 0:
        raise InvalidInput(f"alpha must be non-negative, got {alpha}")
    return _count_above(as_map(map).singular_values, alpha, tol)


class Subspace:
    """A subspace of ``R^d`` given by a ``d x k`` orthonormal frame (``k`` may be 0)."""

    def __init__(self, frame, ambient_dim: int | None = None, check: bool = True):
        f = np.array(frame, dtype=float)
        if f.ndim == 1:
            f = f[:, np.newaxis]
        if f.ndim != 2:
            raise InvalidInput("frame must be 2-d")
        if ambient_dim is not None and f.shape[0] != ambient_dim:
            if f.size == 0:
                f = np.zeros((ambient_dim, 0))
            else:
                raise InvalidInput(f"frame has {f.shape[0]} rows, expected {ambient_dim}")
        if f.shape[0] < 1:
            raise InvalidInput("ambient dimension must be positive")
        if check and f.shape[1]:
            if not np.all(np.isfinite(f)):
                raise InvalidInput("frame has non-finite entries")
            err = np.abs(f.T @ f - np.eye(f.shape[1])).max()
            if err > TAU_ORTH:
                raise InvalidInput(f"frame is not orthonormal (error {err:.3g})")
        f.setflags(write=False)
        self.frame = f

    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None, tol: float = 1e-10) -> "Subspace":
        """Span of a list of vectors (given as rows, i.e. one vector per entry)."""
        vs = [np.ravel(np.asarray(v, dtype=float)) for v in vectors]
        if not vs:
            if ambient_dim is None:
                raise InvalidInput("ambient_dim required for an empty span")
            return cls.zero(ambient_dim)
        return cls.from_columns(np.column_stack(vs), tol=tol)

    @classmethod
    def from_columns(cls, columns, tol: float = 1e-10) -> "Subspace":
        """Column space of a ``d x m`` matrix."""
        a = np.array(columns, dtype=float)
        if a.ndim == 1:
            a = a[:, np.newaxis]
        if not np.all(np.isfinite(a)):
            raise InvalidInput("spanning vectors have non-finite entries")
        d = a.shape[0]
        if a.shape[1] == 0 or not np.any(a):
            return cls.zero(d)
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        r = int(np.count_nonzero(s > tol * max(1.0, s[0])))
        return cls(u[:, :r], check=False)

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls(np.zeros((d, 0)), check=False)

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls(np.eye(d), check=False)

    @classmethod
    def coordinate(cls, d: int, indices) -> "Subspace":
        """Span of the standard basis vectors with the given (0-based) indices."""
        return cls(np.eye(d)[:, sorted(indices)], check=False)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T

    def complement(self) -> "Subspace":
        d, k = self.frame.shape
        if k == 0:
            return Subspace.full(d)
        if k == d:
            return Subspace.zero(d)
        q, _ = np.linalg.qr(self.frame, mode="complete")
        return Subspace(q[:, k:], check=False)

    def __add__(self, other: "Subspace") -> "Subspace":
        _check_ambient(self, other)
        return Subspace.from_columns(np.hstack([self.frame, other.frame]))

    def intersection(self, other: "Subspace") -> "Subspace":
        _check_ambient(self, other)
        return (self.complement() + other.complement()).complement()

    def contains(self, vector, tol: float = 1e-9) -> bool:
        v = np.asarray(vector, dtype=float)
        return bool(np.linalg.norm(v - self.frame @ (self.frame.T @ v)) <= tol * max(1.0, np.linalg.norm(v)))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _check_ambient(v: Subspace, w: Subspace):
    if v.ambient_dim != w.ambient_dim:
        raise InvalidInput(f"ambient dimensions differ: {v.ambient_dim} vs {w.ambient_dim}")


def restrict(map, w: Subspace) -> np.ndarray:
    """Matrix of ``map`` restricted to ``w``, in the frame coordinates of ``w``."""
    m = as_map(map)
    if w.ambient_dim != m.cols:
        raise InvalidInput(f"subspace lives in R^{w.ambient_dim} but map acts on R^{m.cols}")
    return m.matrix @ w.frame


def essential_rank_restricted(map, w: Subspace, alpha: float, tol: float | None = None) -> int:
    if not alpha >= 0:
        raise InvalidInput(f"alpha must be non-negative, got {alpha}")
    a = restrict(map, w)
    if a.shape[1] == 0:
        return 0
    return _count_above(np.linalg.svd(a, compute_uv=False), alpha, tol)


def minimal_covering_subspace(map, w: Subspace, alpha: float, tol: float | None = None) -> Subspace:
    """Smallest ``E`` in the target with ``map(unit ball of w)`` inside ``alpha``-ball + ``E``.

    ``E`` is spanned by the images of the top right singular vectors of the
    restriction, so its dimension equals the restricted essential rank.
    """
    a = restrict(map, w)
    rows = a.shape[0]
    if a.shape[1] == 0:
        return Subspace.zero(rows)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = _count_above(s, alpha, tol)
    return Subspace(u[:, :r], ambient_dim=rows, check=False)


def principal_angles(v: Subspace, w: Subspace) -> np.ndarray:
    """Principal angles between ``v`` and ``w`` in increasing order."""
    _check_ambient(v, w)
    if v.dim == 0 or w.dim == 0:
        return np.zeros(0)
    return np.sort(scipy.linalg.subspace_angles(v.frame, w.frame))


def principal_angle_distance(v: Subspace, w: Subspace) -> float:
    """l2 norm of the principal angles; ``inf`` between subspaces of different dimension."""
    _check_ambient(v, w)
    if v.dim != w.dim:
        return float("inf")
    return float(np.linalg.norm(principal_angles(v, w)))


def orthogonal_projector(w: Subspace) -> LinearMap:
    return LinearMap(w.projector())


def det_bound_check(q, basis):
    """Both sides of ``det Q <= |e_1 ^ ... ^ e_d|^-2 prod <Q e_k, e_k>``.

    ``basis`` holds the vectors ``e_k`` as columns (or as a list of vectors).
    Returns ``(lhs, rhs)``.
    """
    qm = _as_matrix(q, "Q")
    if isinstance(basis, (list, tuple)):
        b = np.column_stack([np.ravel(np.asarray(e, dtype=float)) for e in basis])
    else:
        b = _as_matrix(basis, "basis")
    d = qm.shape[0]
    if qm.shape != (d, d) or b.shape != (d, d):
        raise InvalidInput(f"need a square Q and d={d} basis vectors of length {d}")
    if np.abs(qm - qm.T).max() > TAU_ORTH * max(1.0, np.abs(qm).max()):
        raise InvalidInput("Q is not symmetric")
    qm = (qm + qm.T) / 2
    if np.linalg.eigvalsh(qm)[0] < -TAU_ORTH * max(1.0, np.abs(qm).max()):
        raise InvalidInput("Q is not positive semi-definite")
    wedge = abs(np.linalg.det(b))
    if wedge <= 1e-12 * np.prod(np.linalg.norm(b, axis=0)):
        raise InvalidInput("basis vectors are linearly dependent")
    diag = np.einsum("ik,ij,jk->k", b, qm, b)
    return float(np.linalg.det(qm)), float(np.prod(diag) / wedge**2)


# SPD helpers


def as_spd(m, name: str = "matrix", dim: int | None = None) -> np.ndarray:
    """Validate a symmetric positive definite matrix and return a symmetrized copy."""
    a = _as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise InvalidInput(f"{name} must be {dim}x{dim}, got {a.shape}")
    scale = max(1.0, np.abs(a).max())
    if np.abs(a - a.T).max() > TAU_ORTH * scale:
        raise InvalidInput(f"{name} is not symmetric")
    a = (a + a.T) / 2
    if np.linalg.eigvalsh(a)[0] <= 0:
        raise InvalidInput(f"{name} is not positive definite")
    return a


def spd_apply(m: np.ndarray, fn) -> np.ndarray:
    """Apply a scalar function to the spectrum of a symmetric matrix."""
    w, v = np.linalg.eigh(m)
    out = (v * fn(w)) @ v.T
    return (out + out.T) / 2


def logdet_spd(m: np.ndarray) -> float:
    return float(np.sum(np.log(np.linalg.eigvalsh(m))))


def loewner_le(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    """``a <= b`` in Loewner order, up to ``tol`` relative to ``|b|``."""
    gap = np.linalg.eigvalsh((b - a + (b - a).T) / 2)[0]
    return bool(gap >= -tol * max(1.0, np.abs(b).max()))
