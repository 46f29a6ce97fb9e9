"""Explicit upper and lower bounds for Brascamp-Lieb constants.

Every bound is reported together with the hypotheses it rests on. Upper
bounds need (alpha, beta)-perceptivity; a bound whose hypotheses are not
established evaluates to ``math.inf`` and names the failed hypothesis, unless
the caller explicitly accepts an UNKNOWN perceptivity verdict with
``force=True`` (recorded in the report). All products are formed in log space.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .datum import (
    Datum,
    LocalizedRegularizedDatum,
    as_alphas,
    essential_acuity,
    exponential_entropy,
    full_rank_at,
    gram_norm,
    is_globally_critical,
    operator_norms,
    projector_reduction,
    total_acuity,
)
from .exceptions import InvalidInput, RankDeficient
from .linalg import Subspace, as_spd
from .perceptivity import PerceptivityVerdict, SearchBudget, Status, check_perceptivity

PASS, FAIL = "pass", "fail"


class BoundKind(str, enum.Enum):
    UPPER_GLOBAL = "UPPER_GLOBAL"
    UPPER_VARIANT = "UPPER_VARIANT"
    LOWER_GLOBAL = "LOWER_GLOBAL"
    UPPER_LOCALIZED = "UPPER_LOCALIZED"
    LOWER_LOCALIZED = "LOWER_LOCALIZED"


@dataclass(frozen=True)
class BoundReport:
    kind: BoundKind
    value: float
    hypotheses: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict, repr=False)
    forced: bool = False

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def failed(self) -> list:
        return [name for name, verdict in self.hypotheses if verdict not in (PASS, Status.CERTIFIED.value)]


def _positive_alphas(datum, alphas):
    a = as_alphas(datum, alphas)
    if np.any(a <= 0):
        raise InvalidInput("upper bounds need every alpha_j > 0")
    return a


def _perceptivity(datum, a, beta, verdict, budget):
    if verdict is None:
        return check_perceptivity(datum, a, beta, budget)
    if not isinstance(verdict, PerceptivityVerdict):
        raise InvalidInput("perceptivity must be a PerceptivityVerdict")
    if verdict.alphas is not None and not np.allclose(verdict.alphas, a, rtol=0, atol=1e-15):
        raise InvalidInput("perceptivity verdict was computed for different alphas")
    if abs(verdict.beta - beta) > 1e-15:
        raise InvalidInput("perceptivity verdict was computed for a different beta")
    return verdict


def _gate(hypotheses, verdict, force):
    """Append the perceptivity hypothesis; return ``(ok, forced)``."""
    if verdict.status is Status.UNKNOWN and force:
        hypotheses.append(("perceptivity", "UNKNOWN (forced)"))
        return True, True
    hypotheses.append(("perceptivity", verdict.status.value))
    return verdict.status is Status.CERTIFIED, False


def _log_upper_core(d_exp_half, datum, a):
    """``log(d^{d_exp_half} E(datum) prod_j alpha_j^{-q_j dim H_j})``."""
    q, n = datum.weights, datum.target_dims
    return d_exp_half * math.log(datum.d) + math.log(exponential_entropy(datum)) - float(np.sum(q * n * np.log(a)))


def upper_bound_global(
    datum: Datum,
    alphas,
    perceptivity: PerceptivityVerdict | None = None,
    *,
    force: bool = False,
    budget: SearchBudget | None = None,
) -> BoundReport:
    """``d^{d/2} E(datum) prod_j alpha_j^{-q_j dim H_j}`` for globally critical alpha-perceptive data.

    Without a verdict, alpha-perceptivity is checked here.
    """
    a = _positive_alphas(datum, alphas)
    crit, defect = is_globally_critical(datum)
    hyps = [("global criticality", PASS if crit else FAIL)]
    verdict = _perceptivity(datum, a, 0.0, perceptivity, budget)
    ok, forced = _gate(hyps, verdict, force)
    value = math.exp(_log_upper_core(datum.d / 2, datum, a)) if crit and ok else math.inf
    return BoundReport(BoundKind.UPPER_GLOBAL, value, hyps, {"alphas": a, "criticality_defect": defect}, forced)


def upper_bound_variant(
    datum: Datum,
    alphas,
    perceptivity: PerceptivityVerdict | None = None,
    *,
    force: bool = False,
    budget: SearchBudget | None = None,
) -> BoundReport:
    """The global bound after replacing each map by the projector with the same kernel.

    Equals ``d^{d/2} E Upsilon prod_j alpha_j^{-q_j dim H_j}`` with the
    distortion ``Upsilon``; hypotheses are checked on the projector datum, and
    a supplied verdict must refer to it. Raises ``NotSurjective`` when a map
    is not onto.
    """
    a = _positive_alphas(datum, alphas)
    proj, distortion = projector_reduction(datum)
    crit, defect = is_globally_critical(proj)
    hyps = [("global criticality", PASS if crit else FAIL)]
    verdict = _perceptivity(proj, a, 0.0, perceptivity, budget)
    ok, forced = _gate(hyps, verdict, force)
    value = (
        math.exp(_log_upper_core(datum.d / 2, datum, a) + math.log(distortion)) if crit and ok else math.inf
    )
    inputs = {"alphas": a, "distortion": distortion, "criticality_defect": defect}
    return BoundReport(BoundKind.UPPER_VARIANT, value, hyps, inputs, forced)


def _lower_constant(datum):
    c = 1.0 + float(operator_norms(datum).max())
    return c, float(np.sum(datum.weights))


def _check_unit_alpha(alpha):
    if not (np.isscalar(alpha) and 0 < float(alpha) <= 1):
        raise InvalidInput(f"alpha must be a real number in (0, 1], got {alpha!r}")
    return float(alpha)


def _subspace(datum, w):
    if w is None:
        return Subspace.zero(datum.d)
    if not isinstance(w, Subspace):
        raise InvalidInput("w must be a Subspace")
    if w.ambient_dim != datum.d:
        raise InvalidInput(f"w lives in R^{w.ambient_dim}, datum acts on R^{datum.d}")
    return w


def lower_bound_global(datum: Datum, alpha: float, w: Subspace | None = None) -> BoundReport:
    """``(C^2 sum q)^{-d/2} alpha^{acuity_alpha(W) - dim W}`` with ``C = 1 + max_j |l_j|``; ``W = {0}`` by default."""
    alpha = _check_unit_alpha(alpha)
    w = _subspace(datum, w)
    c, sq = _lower_constant(datum)
    expo = essential_acuity(datum, alpha, w) - w.dim
    value = math.exp(-0.5 * datum.d * math.log(c * c * sq) + expo * math.log(alpha))
    inputs = {"alpha": alpha, "w": w, "C": c, "exponent": expo}
    return BoundReport(BoundKind.LOWER_GLOBAL, value, [("0 < alpha <= 1", PASS)], inputs)


def lower_bound_localized(datum: Datum, t: float, alpha: float, w: Subspace | None = None) -> BoundReport:
    """Lower bound for ``R_j = I`` and ``T = t I``: ``((C/alpha)^2 t + C^2 sum q)^{-d/2} alpha^{acuity - dim W}``."""
    alpha = _check_unit_alpha(alpha)
    if not (np.isscalar(t) and float(t) > 0 and math.isfinite(float(t))):
        raise InvalidInput(f"t must be a positive real, got {t!r}")
    t = float(t)
    w = _subspace(datum, w)
    c, sq = _lower_constant(datum)
    expo = essential_acuity(datum, alpha, w) - w.dim
    base = (c / alpha) ** 2 * t + c * c * sq
    value = math.exp(-0.5 * datum.d * math.log(base) + expo * math.log(alpha))
    inputs = {"alpha": alpha, "t": t, "w": w, "C": c, "exponent": expo}
    return BoundReport(BoundKind.LOWER_LOCALIZED, value, [("0 < alpha <= 1", PASS)], inputs)


def upper_bound_localized(
    lrd: LocalizedRegularizedDatum,
    alphas,
    beta: float = 0.0,
    perceptivity: PerceptivityVerdict | None = None,
    *,
    force: bool = False,
    budget: SearchBudget | None = None,
) -> BoundReport:
    """Upper bound for the localized regularized constant under (alpha, beta)-perceptivity.

    ``d^{A/2} E prod_j alpha_j^{-q_j dim H_j} N^{(A - d + beta)/2} |T^{-1}|^{beta/2}``
    where ``A = sum_j q_j dim H_j`` and ``N`` is the Gram norm. Requires
    ``rk_{alpha_j}(l_j) = dim H_j``; raises ``RankDeficient`` otherwise.
    """
    datum = lrd.datum
    a = _positive_alphas(datum, alphas)
    if not (beta >= 0 and math.isfinite(beta)):
        raise InvalidInput(f"beta must be a non-negative real, got {beta!r}")
    full = full_rank_at(datum, a)
    if not full.all():
        bad = [int(j) for j in np.flatnonzero(~full)]
        raise RankDeficient(f"rk_alpha(l_j) < dim H_j for maps {bad}")
    hyps = [("full essential rank", PASS)]
    verdict = _perceptivity(datum, a, beta, perceptivity, budget)
    ok, forced = _gate(hyps, verdict, force)
    acuity = total_acuity(datum)
    n = gram_norm(lrd)
    inv_t = 1.0 / float(np.linalg.eigvalsh(lrd.loc)[0])
    if ok:
        log_v = (
            _log_upper_core(acuity / 2, datum, a)
            + 0.5 * (acuity - datum.d + beta) * math.log(n)
            + 0.5 * beta * math.log(inv_t)
        )
        value = math.exp(log_v)
    else:
        value = math.inf
    inputs = {"alphas": a, "beta": float(beta), "regs": lrd.regs, "loc": lrd.loc, "gram_norm": n, "inv_loc_norm": inv_t}
    return BoundReport(BoundKind.UPPER_LOCALIZED, value, hyps, inputs, forced)


# greedy index sets


def _dist_to_span(v, vectors):
    if not vectors:
        return float(np.linalg.norm(v))
    b = np.column_stack(vectors)
    coef, *_ = np.linalg.lstsq(b, v, rcond=None)
    return float(np.linalg.norm(v - b @ coef))


@dataclass(frozen=True)
class GreedyCertificate:
    """Eigenbasis of ``M`` (columns, eigenvalues descending) and per-map index sets.

    Indices are 0-based positions in the eigenbasis. For every map and every
    included ``i``, ``l_j e_i`` is at distance at least ``1/sqrt(d)`` from the
    images of the included vectors after ``i``; every excluded ``i`` is closer.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    index_sets: tuple
    images: tuple = field(repr=False, default=())

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    def _distances(self, j, inclusive):
        img, idx = self.images[j], set(self.index_sets[j])
        out = []
        for i in range(self.d):
            later = [img[:, k] for k in sorted(idx) if k > i or (inclusive and k == i)]
            out.append(_dist_to_span(img[:, i], later))
        return np.array(out)

    def inclusion_margins(self, j) -> np.ndarray:
        """``dist(l_j e_i, l_j V_{I_j after i}) - 1/sqrt(d)`` for ``i`` in ``I_j``; non-negative."""
        dist = self._distances(j, inclusive=False)
        return dist[list(self.index_sets[j])] - 1 / math.sqrt(self.d)

    def exclusion_margins(self, j) -> np.ndarray:
        """``1/sqrt(d) - dist(l_j e_i, l_j V_{I_j from i on})`` for every ``i``; positive."""
        return 1 / math.sqrt(self.d) - self._distances(j, inclusive=True)

    def wedge_norms(self) -> np.ndarray:
        """``|wedge_{i in I_j} l_j e_i|`` as the square root of the Gram determinant."""
        out = []
        for img, idx in zip(self.images, self.index_sets):
            b = img[:, list(idx)]
            out.append(math.sqrt(max(np.linalg.det(b.T @ b), 0.0)) if idx else 1.0)
        return np.array(out)

    def wedge_lower_bounds(self) -> np.ndarray:
        return np.array([self.d ** (-len(idx) / 2) for idx in self.index_sets])

    def verify(self, tol: float = 1e-9) -> bool:
        for j in range(len(self.index_sets)):
            if len(self.index_sets[j]) and self.inclusion_margins(j).min() < -tol:
                return False
            if self.exclusion_margins(j).min() <= -tol:
                return False
        return bool(np.all(self.wedge_norms() >= self.wedge_lower_bounds() * (1 - tol)))

    def tail_counts(self, weights) -> np.ndarray:
        """``sum_j q_j |I_j cap (k, d]|`` for ``k = 0..d`` (1-based tails, i.e. 0-based indices ``>= k``)."""
        q = np.asarray(weights, dtype=float)
        return np.array(
            [sum(qj * sum(1 for i in idx if i >= k) for qj, idx in zip(q, self.index_sets)) for k in range(self.d + 1)]
        )


def greedy_index_sets(datum: Datum, m) -> GreedyCertificate:
    """Greedy index sets along the eigenbasis of the SPD matrix ``m``.

    Scans the eigenvectors from the smallest eigenvalue to the largest and
    keeps ``i`` iff ``l_j e_i`` is at distance at least ``1/sqrt(d)`` from the
    span of the images already kept (ties are kept).
    """
    d = datum.d
    m = as_spd(m, "M", dim=d)
    lam, vecs = np.linalg.eigh(m)
    order = np.argsort(-lam, kind="stable")
    lam, basis = lam[order], vecs[:, order]
    thr = 1 / math.sqrt(d)
    sets, images = [], []
    for c in datum.coordinate_maps():
        img = c @ basis
        kept: list[int] = []
        for i in range(d - 1, -1, -1):
            dist = _dist_to_span(img[:, i], [img[:, k] for k in kept])
            if dist >= thr * (1 - 1e-12):
                kept.append(i)
        sets.append(tuple(sorted(kept)))
        images.append(img)
    return GreedyCertificate(basis, lam, tuple(sets), tuple(images))


__all__ = [
    "BoundKind",
    "BoundReport",
    "GreedyCertificate",
    "greedy_index_sets",
    "lower_bound_global",
    "lower_bound_localized",
    "upper_bound_global",
    "upper_bound_localized",
    "upper_bound_variant",
]
