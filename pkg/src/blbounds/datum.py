"""Brascamp-Lieb data and the scalar functionals attached to them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import InvalidInput, NotSurjective
from .linalg import (
    Subspace,
    as_map,
    as_spd,
    essential_rank,
    essential_rank_restricted,
)


class Datum:
    """A family of linear maps ``l_j : R^d -> H_j`` with positive weights ``q_j``.

    ``codomain_frames`` optionally identifies ``H_j`` with a subspace of
    ``R^rows`` (an orthonormal ``rows x dim H_j`` frame). This is how square
    orthogonal projectors ``R^d -> R^d`` are given their true target
    ``H_j = image``; without a frame, ``H_j = R^rows``.
    """

    def __init__(self, maps: Sequence, weights: Sequence[float], codomain_frames=None):
        maps = [as_map(m) for m in maps]
        if not maps:
            raise InvalidInput("a datum needs at least one map")
        q = np.array(weights, dtype=float).ravel()
        if q.shape != (len(maps),):
            raise InvalidInput(f"got {len(maps)} maps but {q.size} weights")
        if not np.all(np.isfinite(q)) or np.any(q <= 0):
            raise InvalidInput("weights must be finite and strictly positive")
        d = maps[0].cols
        for j, m in enumerate(maps):
            if m.cols != d:
                raise InvalidInput(f"map {j} acts on R^{m.cols}, expected R^{d}")
        if codomain_frames is None:
            codomain_frames = [None] * len(maps)
        if len(codomain_frames) != len(maps):
            raise InvalidInput("one codomain frame (or None) per map is required")
        frames = []
        for j, (m, f) in enumerate(zip(maps, codomain_frames)):
            if f is not None:
                f = Subspace(f, ambient_dim=m.rows).frame
                resid = m.matrix - f @ (f.T @ m.matrix)
                if np.abs(resid).max() > 1e-9 * max(1.0, m.norm):
                    raise InvalidInput(f"map {j} is not valued in its codomain frame")
            frames.append(f)
        q.setflags(write=False)
        self.maps = maps
        self.weights = q
        self.codomain_frames = frames

    @classmethod
    def from_projectors(cls, subspaces: Sequence[Subspace], weights) -> "Datum":
        """Datum of orthogonal projectors ``pi_{H_j} : R^d -> H_j``."""
        maps = [s.projector() for s in subspaces]
        return cls(maps, weights, codomain_frames=[s.frame for s in subspaces])

    @property
    def ambient_dim(self) -> int:
        return self.maps[0].cols

    d = ambient_dim

    def __len__(self):
        return len(self.maps)

    @property
    def target_dims(self) -> np.ndarray:
        return np.array(
            [m.rows if f is None else f.shape[1] for m, f in zip(self.maps, self.codomain_frames)]
        )

    def coordinate_maps(self) -> list[np.ndarray]:
        """Each map as a ``dim H_j x d`` matrix in the coordinates of its codomain frame."""
        return [
            m.matrix if f is None else f.T @ m.matrix
            for m, f in zip(self.maps, self.codomain_frames)
        ]

    def with_weights(self, weights) -> "Datum":
        return Datum(self.maps, weights, self.codomain_frames)

    def subdatum(self, indices) -> "Datum":
        idx = list(indices)
        return Datum(
            [self.maps[i] for i in idx],
            self.weights[idx],
            [self.codomain_frames[i] for i in idx],
        )

    def is_projector_datum(self, tol: float = 1e-9) -> bool:
        """True when every map is a square orthogonal projector."""
        for m in self.maps:
            a = m.matrix
            if a.shape[0] != a.shape[1]:
                return False
            if np.abs(a - a.T).max() > tol or np.abs(a @ a - a).max() > tol:
                return False
        return True

    def __repr__(self):
        return f"Datum(d={self.d}, dims={self.target_dims.tolist()}, weights={self.weights.tolist()})"


@dataclass(frozen=True)
class LocalizedRegularizedDatum:
    """``(datum, (R_j), T)``: SPD regularisers on each ``H_j`` and an SPD localiser on ``R^d``."""

    datum: Datum
    regs: tuple = field(default=())
    loc: np.ndarray = None

    def __post_init__(self):
        dims = self.datum.target_dims
        if len(self.regs) != len(dims):
            raise InvalidInput(f"expected {len(dims)} regularisers, got {len(self.regs)}")
        regs = tuple(as_spd(r, f"R_{j}", dim=int(n)) for j, (r, n) in enumerate(zip(self.regs, dims)))
        object.__setattr__(self, "regs", regs)
        object.__setattr__(self, "loc", as_spd(self.loc, "T", dim=self.datum.d))

    @classmethod
    def isotropic(cls, datum: Datum, reg: float = 1.0, loc: float = 1.0) -> "LocalizedRegularizedDatum":
        """``R_j = reg * I`` and ``T = loc * I``."""
        regs = tuple(reg * np.eye(n) for n in datum.target_dims)
        return cls(datum, regs, loc * np.eye(datum.d))


def as_alphas(datum: Datum, alphas, strict: bool = False) -> np.ndarray:
    """Broadcast a scalar or per-map sequence of thresholds and validate it."""
    a = np.asarray(alphas, dtype=float)
    if a.ndim > 1 or (a.ndim == 1 and a.size != len(datum)):
        raise InvalidInput(f"expected a scalar or {len(datum)} alphas, got shape {a.shape}")
    a = np.broadcast_to(a, (len(datum),)).copy()
    if not np.all(np.isfinite(a)):
        raise InvalidInput("alphas must be finite")
    if strict and np.any(a <= 0):
        raise InvalidInput("alphas must be strictly positive")
    if np.any(a < 0):
        raise InvalidInput("alphas must be non-negative")
    return a


def is_globally_critical(datum: Datum, tol: float | None = None):
    """``(flag, defect)`` with ``defect = sum_j q_j dim H_j - d``."""
    if tol is None:
        tol = 1e-9 * datum.d
    defect = float(np.dot(datum.weights, datum.target_dims) - datum.d)
    return abs(defect) <= tol, defect


def restricted_ranks(datum: Datum, alphas, w: Subspace) -> np.ndarray:
    a = as_alphas(datum, alphas)
    if w.ambient_dim != datum.d:
        raise InvalidInput(f"subspace lives in R^{w.ambient_dim}, datum acts on R^{datum.d}")
    return np.array(
        [essential_rank_restricted(m, w, aj) for m, aj in zip(datum.coordinate_maps(), a)]
    )


def essential_acuity(datum: Datum, alphas, w: Subspace) -> float:
    """Weighted sum of the restricted essential ranks ``sum_j q_j rk_{alpha_j}(l_j | w)``."""
    return float(np.dot(datum.weights, restricted_ranks(datum, alphas, w)))


def perceptivity_slack(datum: Datum, alphas, beta: float, w: Subspace) -> float:
    """``acuity(w) - dim w + beta``; negative values witness a failure of perceptivity."""
    return essential_acuity(datum, alphas, w) - w.dim + beta


def total_acuity(datum: Datum) -> float:
    return float(np.dot(datum.weights, datum.target_dims))


def exponential_entropy(datum: Datum) -> float:
    q, n = datum.weights, datum.target_dims
    return float(np.exp(-0.5 * np.sum(q * n * np.log(q))))


def projector_reduction(datum: Datum):
    """Replace each map by the orthogonal projector with the same kernel.

    Returns ``(proj_datum, distortion)`` where ``distortion`` is
    ``prod_j |det(l_j restricted to ker(l_j)^perp)|^{-q_j}``, the product of the
    non-zero singular values raised to ``-q_j``.
    """
    maps, frames = [], []
    log_dist = 0.0
    for j, (c, qj) in enumerate(zip(datum.coordinate_maps(), datum.weights)):
        _, s, vt = np.linalg.svd(c, full_matrices=False)
        n = c.shape[0]
        if essential_rank(c, 0.0) != n:
            raise NotSurjective(f"map {j} has rank {essential_rank(c, 0.0)} < dim H_j = {n}")
        v = vt[:n].T
        maps.append(v @ v.T)
        frames.append(v)
        log_dist -= qj * np.sum(np.log(s[:n]))
    return Datum(maps, datum.weights, codomain_frames=frames), float(np.exp(log_dist))


def gram_matrix(datum: Datum, regs, loc) -> np.ndarray:
    """``T + sum_j q_j l_j^* R_j l_j``."""
    m = np.array(loc, dtype=float)
    for c, qj, r in zip(datum.coordinate_maps(), datum.weights, regs):
        m = m + qj * c.T @ r @ c
    return (m + m.T) / 2


def gram_norm(lrd: LocalizedRegularizedDatum) -> float:
    return float(np.linalg.eigvalsh(gram_matrix(lrd.datum, lrd.regs, lrd.loc))[-1])


def algebraic_perceptivity_defect(datum: Datum, w: Subspace) -> float:
    """``sum_j q_j dim l_j(w) - dim w`` using exact ranks (threshold 0 with the rank tolerance)."""
    return essential_acuity(datum, 0.0, w) - w.dim


def singular_values(datum: Datum) -> list[np.ndarray]:
    return [np.linalg.svd(c, compute_uv=False) for c in datum.coordinate_maps()]


def operator_norms(datum: Datum) -> np.ndarray:
    return np.array([s[0] if len(s) else 0.0 for s in singular_values(datum)])


def full_rank_at(datum: Datum, alphas) -> np.ndarray:
    """Per map, whether ``rk_{alpha_j}(l_j) = dim H_j``."""
    a = as_alphas(datum, alphas)
    return np.array(
        [essential_rank(c, aj) == c.shape[0] for c, aj in zip(datum.coordinate_maps(), a)]
    )


__all__ = [
    "Datum",
    "LocalizedRegularizedDatum",
    "algebraic_perceptivity_defect",
    "as_alphas",
    "essential_acuity",
    "exponential_entropy",
    "full_rank_at",
    "gram_matrix",
    "gram_norm",
    "is_globally_critical",
    "operator_norms",
    "perceptivity_slack",
    "projector_reduction",
    "restricted_ranks",
    "singular_values",
    "total_acuity",
]
