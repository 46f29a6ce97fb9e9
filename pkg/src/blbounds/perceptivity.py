"""Deciding (alpha, beta)-perceptivity.

A datum is (alpha, beta)-perceptive when every subspace ``W`` satisfies
``acuity_alpha(W) >= dim W - beta``. The quantity ``acuity - dim W + beta`` is
called the *slack* of ``W``; a subspace with negative slack refutes
perceptivity.

Three routes are provided:

* ``rank_one_exact_check`` decides data made of rank-one maps by enumerating
  which maps are switched off and testing feasibility of each pattern.
* ``check_perceptivity`` first looks for a refutation (candidate lattice, then
  randomized rotations) and, in dimension at most ``D_MAX_EXACT``, certifies by
  an exhaustive branch-and-bound cover of the Grassmannian. Each cell of the
  cover is a box in a graph chart ``W = range [I; X]``; singular values of a
  map restricted to ``W`` move by at most ``|l| * |X - X0|_2`` inside a box
  (Weyl), which gives a lower bound on the acuity over the whole box.
* ``projector_sufficient_check`` evaluates the kernel-intersection sufficient
  condition for data of orthogonal projectors with a caller-supplied metric
  constant, over the same cover.

CERTIFIED is only returned by the exhaustive routes; sampling alone yields
UNKNOWN.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .datum import (
    Datum,
    algebraic_perceptivity_defect,
    as_alphas,
    is_globally_critical,
    perceptivity_slack,
)
from .exceptions import InvalidInput, UnsupportedDimension
from .linalg import RANK_RTOL, Subspace

D_MAX_EXACT = 4
TAU_FEAS = 1e-8
_BOUNDARY_RTOL = 1e-12


class Status(str, enum.Enum):
    CERTIFIED = "CERTIFIED"
    REFUTED = "REFUTED"
    UNKNOWN = "UNKNOWN"


ENUMERATION = "enumeration"
RANK_ONE_EXACT = "rank-one-exact"
SUFFICIENT_CONDITION = "sufficient-condition"
RANDOMIZED_SEARCH = "randomized-search"
EXACT_METHODS = (ENUMERATION, RANK_ONE_EXACT, SUFFICIENT_CONDITION)


@dataclass(frozen=True)
class PerceptivityVerdict:
    status: Status
    witness: Subspace | None
    min_slack: float
    method: str
    samples_used: int
    alphas: np.ndarray = field(repr=False, default=None)
    beta: float = 0.0

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.status is Status.REFUTED


@dataclass(frozen=True)
class SearchBudget:
    """Knobs for the Grassmannian searches; every run is deterministic given ``seed``."""

    restarts: int = 12
    sweeps: int = 4
    angles: int = 16
    lattice_cap: int = 120
    max_cells: int = 400_000
    feas_starts: int = 24
    seed: int = 0


def slack_tolerance(datum: Datum) -> float:
    return 1e-9 * (1.0 + float(np.sum(datum.weights)))


# batched evaluation


def _frame_slacks(cmaps, q, alphas, beta, frames, norms=None, radius=0.0):
    """Slack at each frame, and a lower bound on the slack within ``radius``.

    ``frames`` is ``(n, d, k)`` with orthonormal columns; ``radius`` bounds the
    operator-norm distance between the projector of a frame and those of its
    neighbourhood.
    """
    n, _, k = frames.shape
    acuity = np.zeros(n)
    lower = np.zeros(n)
    for j, (c, qj, aj) in enumerate(zip(cmaps, q, alphas)):
        s = np.linalg.svd(c @ frames, compute_uv=False)
        tol = RANK_RTOL * np.maximum(1.0, s[:, :1])
        acuity += qj * np.count_nonzero(s > aj + tol, axis=1)
        if norms is not None:
            lower += qj * np.count_nonzero(s > aj + tol + norms[j] * radius, axis=1)
    return acuity - k + beta, lower - k + beta


def _slack_one(cmaps, q, alphas, beta, frame):
    return float(_frame_slacks(cmaps, q, alphas, beta, frame[np.newaxis])[0][0])


# Grassmannian cover


def _chart_frames(d, chart, rest, xs):
    n, k = xs.shape[0], len(chart)
    f = np.zeros((n, d, k))
    f[:, list(chart), :] = np.eye(k)
    f[:, rest, :] = xs
    q, _ = np.linalg.qr(f)
    return q


def _grassmann_cover(d, k, classify, max_cells):
    """Branch and bound over ``Gr(k, d)``.

    The Grassmannian is covered by the ``C(d, k)`` graph charts over coordinate
    ``k``-subsets with ``X`` in ``[-1, 1]^{(d-k) x k}`` (every subspace has such a
    chart, take a maximal-volume ``k x k`` minor). ``classify(frames, h)`` gets
    the frames at cell centres and the cell half-width and returns boolean
    arrays ``(done, bad)``: ``done`` cells are settled, ``bad`` cells stop the
    search. Returns ``(outcome, frame, cells)`` with outcome in
    ``{"ok", "bad", "budget"}``.
    """
    p = k * (d - k)
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=p)))
    cells = 0
    for chart in itertools.combinations(range(d), k):
        rest = [i for i in range(d) if i not in chart]
        centers = np.zeros((1, p))
        h = 1.0
        while len(centers):
            if cells + len(centers) > max_cells:
                return "budget", None, cells
            frames = _chart_frames(d, chart, rest, centers.reshape(-1, d - k, k))
            done, bad = classify(frames, h)
            cells += len(centers)
            if bad.any():
                return "bad", frames[int(np.argmax(bad))], cells
            todo = centers[~done]
            h /= 2
            centers = (todo[:, np.newaxis, :] + h * signs[np.newaxis]).reshape(-1, p)
    return "ok", None, cells


def _cover_chart_radius(h, k, d):
    """Bound on ``|P_X - P_X0|_2`` for ``X`` in a box of half-width ``h``: ``|X - X0|_F``."""
    return h * math.sqrt(k * (d - k))


# candidate lattice and randomized search


def _dedupe_add(pool, sub, cap):
    if len(pool) >= cap:
        return False
    p = sub.projector()
    for other in pool:
        if other.dim == sub.dim and np.abs(other.projector() - p).max() < 1e-8:
            return False
    pool.append(sub)
    return True


def candidate_lattice(datum: Datum, alphas, cap: int = 120) -> list[Subspace]:
    """Subspaces generated by kernels and threshold singular subspaces of the maps.

    Starts from, for every map, its kernel, the span of its right singular
    vectors with singular value at most ``alpha_j`` (together with the kernel)
    and the complements of those; then closes under pairwise intersection and
    sum until ``cap`` subspaces are collected.
    """
    d = datum.d
    a = as_alphas(datum, alphas)
    pool: list[Subspace] = []
    for c, aj in zip(datum.coordinate_maps(), a):
        _, s, vt = np.linalg.svd(c, full_matrices=True)
        sig = np.zeros(d)
        sig[: len(s)] = s
        tol = RANK_RTOL * max(1.0, sig[0])
        for thr in (0.0, aj):
            small = vt[sig <= thr + tol].T
            sub = Subspace(small, ambient_dim=d, check=False) if small.size else Subspace.zero(d)
            _dedupe_add(pool, sub, cap)
            _dedupe_add(pool, sub.complement(), cap)
    frontier = list(pool)
    while frontier and len(pool) < cap:
        new = []
        for x, y in itertools.combinations(pool, 2):
            for z in (x.intersection(y), x + y):
                if 0 < z.dim < d and _dedupe_add(pool, z, cap):
                    new.append(z)
            if len(pool) >= cap:
                break
        frontier = new
    return [w for w in pool if w.dim > 0]


def _rotations(d, angles):
    out = []
    for a, b in itertools.combinations(range(d), 2):
        for t in angles:
            g = np.eye(d)
            c, s = math.cos(t), math.sin(t)
            g[a, a], g[a, b], g[b, a], g[b, b] = c, -s, s, c
            out.append(g)
    return np.array(out)


def _surrogate(cmaps, q, alphas, frames):
    """Smallest excess of an active singular value over its threshold, weighted."""
    out = np.zeros(frames.shape[0])
    for c, qj, aj in zip(cmaps, q, alphas):
        s = np.linalg.svd(c @ frames, compute_uv=False)
        ex = np.where(s > aj, s - aj, np.inf).min(axis=1)
        out += qj * np.where(np.isfinite(ex), ex, 0.0)
    return out


def _random_search(datum, alphas, beta, k, budget, rot):
    cmaps, q, d = datum.coordinate_maps(), datum.weights, datum.d
    best = (math.inf, None)
    evaluated = 0
    for r in range(budget.restarts):
        rng = np.random.default_rng([budget.seed, k, r])
        frame, _ = np.linalg.qr(rng.normal(size=(d, k)))
        cur_slack = _slack_one(cmaps, q, alphas, beta, frame)
        cur_sur = _surrogate(cmaps, q, alphas, frame[np.newaxis])[0]
        evaluated += 1
        for _ in range(budget.sweeps):
            cand = rot @ frame
            sl, _ = _frame_slacks(cmaps, q, alphas, beta, cand)
            sur = _surrogate(cmaps, q, alphas, cand)
            evaluated += len(cand)
            i = int(np.lexsort((sur, sl))[0])
            if (sl[i], sur[i]) < (cur_slack, cur_sur):
                frame, cur_slack, cur_sur = cand[i], sl[i], sur[i]
            else:
                break
        if cur_slack < best[0]:
            best = (cur_slack, frame)
    return best, evaluated


def _pick_witness(per_dim, tau):
    """Smallest slack overall, and the witness: lowest-dimensional violator if any, else the minimiser."""
    min_slack = min(v[0] for v in per_dim.values())
    bad = sorted(k for k, v in per_dim.items() if v[0] < -tau)
    k = bad[0] if bad else min(per_dim, key=lambda k: (per_dim[k][0], k))
    return Subspace(per_dim[k][1], check=False), min_slack


def _verdict(status, witness, min_slack, method, samples, alphas, beta):
    return PerceptivityVerdict(status, witness, float(min_slack), method, int(samples), alphas, float(beta))


def check_perceptivity(
    datum: Datum, alphas, beta: float = 0.0, budget: SearchBudget | None = None, *, rank_one_shortcut: bool = True
) -> PerceptivityVerdict:
    """Certify, refute or give up on (alpha, beta)-perceptivity of ``datum``.

    Rank-one data in dimension at most ``D_MAX_EXACT`` go to
    ``rank_one_exact_check`` unless ``rank_one_shortcut`` is off. Otherwise every dimension ``k`` is searched:
    the candidate lattice and randomized rotations look for a subspace with
    negative slack, then (for ``d <= D_MAX_EXACT``) the Grassmannian cover
    either certifies the dimension or finds a witness. Without an exhaustive
    route the verdict is UNKNOWN with the smallest slack observed.
    """
    budget = budget or SearchBudget()
    a = as_alphas(datum, alphas)
    if not beta >= 0:
        raise InvalidInput(f"beta must be non-negative, got {beta}")
    d = datum.d
    ranks = [np.linalg.matrix_rank(c) for c in datum.coordinate_maps()]
    if rank_one_shortcut and d <= D_MAX_EXACT and all(r == 1 for r in ranks):
        return rank_one_exact_check(datum, a, beta, budget)

    cmaps, q = datum.coordinate_maps(), datum.weights
    tau = slack_tolerance(datum)
    samples = 0
    per_dim: dict[int, tuple[float, np.ndarray]] = {}

    def note(slack, frame):
        k = frame.shape[1]
        if k not in per_dim or slack < per_dim[k][0]:
            per_dim[k] = (float(slack), frame)

    def done(status, method):
        witness, min_slack = _pick_witness(per_dim, tau)
        return _verdict(status, witness, min_slack, method, samples, a, beta)

    for w in candidate_lattice(datum, a, budget.lattice_cap):
        note(perceptivity_slack(datum, a, beta, w), w.frame)
        samples += 1
    note(perceptivity_slack(datum, a, beta, Subspace.full(d)), np.eye(d))
    if min(v[0] for v in per_dim.values()) < -tau:
        return done(Status.REFUTED, ENUMERATION)

    rot = _rotations(d, np.linspace(-math.pi / 2, math.pi / 2, budget.angles + 1)[1:])
    for k in range(1, d):
        (sl, frame), n = _random_search(datum, a, beta, k, budget, rot)
        samples += n
        note(sl, frame)
    if min(v[0] for v in per_dim.values()) < -tau:
        return done(Status.REFUTED, RANDOMIZED_SEARCH)

    if d > D_MAX_EXACT:
        return done(Status.UNKNOWN, RANDOMIZED_SEARCH)

    norms = np.array([np.linalg.norm(c, 2) for c in cmaps])
    for k in range(1, d):
        if k <= beta - tau:
            continue
        centre_min = [math.inf, None]

        def classify(frames, h, k=k):
            sl, lower = _frame_slacks(cmaps, q, a, beta, frames, norms, _cover_chart_radius(h, k, d))
            i = int(np.argmin(sl))
            if sl[i] < centre_min[0]:
                centre_min[0], centre_min[1] = sl[i], frames[i]
            return lower >= -tau, sl < -tau

        outcome, frame, cells = _grassmann_cover(d, k, classify, budget.max_cells)
        samples += cells
        if centre_min[1] is not None:
            note(centre_min[0], centre_min[1])
        if outcome == "bad":
            note(_slack_one(cmaps, q, a, beta, frame), frame)
            return done(Status.REFUTED, ENUMERATION)
        if outcome == "budget":
            return done(Status.UNKNOWN, ENUMERATION)
    return done(Status.CERTIFIED, ENUMERATION)


# rank-one data


def _rank_one_lines(datum: Datum):
    """Per map ``(sigma_j, u_j)`` with ``l_j = sigma_j * (unit) u_j^T`` up to an isometry."""
    out = []
    for j, c in enumerate(datum.coordinate_maps()):
        _, s, vt = np.linalg.svd(c, full_matrices=False)
        tol = RANK_RTOL * max(1.0, s[0])
        if s[0] <= tol or (len(s) > 1 and s[1] > tol):
            raise InvalidInput(f"map {j} is not of rank one")
        out.append((float(s[0]), vt[0]))
    return out


def _feasible_line(u, a):
    """Unit ``w`` with ``|<u_i, w>| <= a_i`` for all rows ``u_i`` of ``u``, or None.

    The constraint set is a symmetric convex polytope (unbounded when the rows
    do not span); a unit vector exists iff its farthest vertex has norm >= 1.
    """
    d = u.shape[1] if u.size else None
    keep = a < 1.0
    u, a = u[keep], a[keep]
    if d is None or len(u) == 0:
        return np.eye(d or 1)[0] if d else None
    if np.linalg.matrix_rank(u) < d:
        _, _, vt = np.linalg.svd(u, full_matrices=True)
        return vt[-1]
    best, best_w = -1.0, None
    sign_sets = [np.array((1.0,) + s) for s in itertools.product((-1.0, 1.0), repeat=d - 1)]
    for rows in itertools.combinations(range(len(u)), d):
        us = u[list(rows)]
        if abs(np.linalg.det(us)) < 1e-12:
            continue
        inv = np.linalg.inv(us)
        for sg in sign_sets:
            w = inv @ (sg * a[list(rows)])
            if np.all(np.abs(u @ w) <= a * (1 + 1e-12) + 1e-14):
                nw = np.linalg.norm(w)
                if nw > best:
                    best, best_w = nw, w
    if best >= 1.0 - _BOUNDARY_RTOL:
        return best_w / best
    return None


def _feasible_hyperplane(u, a):
    """Unit normal ``v`` with ``|pi_{v^perp} u_i| <= a_i``, i.e. ``|<u_i, v>| >= sqrt(1 - a_i^2)``.

    The minimum-norm point of the union of the sign-pattern polyhedra sits on an
    active set of at most ``d`` linearly independent constraints; enumerating
    active sets with their signs gives it exactly. A unit normal exists iff
    that norm is at most 1.
    """
    d = u.shape[1]
    keep = a < 1.0
    u, b = u[keep], np.sqrt(np.maximum(0.0, 1.0 - a[keep] ** 2))
    if len(u) == 0:
        return np.eye(d)[0]
    best, best_v = math.inf, None
    for size in range(1, min(d, len(u)) + 1):
        for rows in itertools.combinations(range(len(u)), size):
            ua = u[list(rows)]
            g = ua @ ua.T
            if abs(np.linalg.det(g)) < 1e-12:
                continue
            ginv = np.linalg.inv(g)
            for tail in itertools.product((-1.0, 1.0), repeat=size - 1):
                sg = np.array((1.0,) + tail)
                v = ua.T @ (ginv @ (sg * b[list(rows)]))
                if np.all(np.abs(u @ v) >= b * (1 - 1e-12) - 1e-14):
                    nv = np.linalg.norm(v)
                    if nv < best:
                        best, best_v = nv, v
    if best <= 1.0 + _BOUNDARY_RTOL:
        return best_v / best
    return None


def _feasible_general(u, a, k, budget, d):
    """Frame of a ``k``-dimensional ``W`` with ``|pi_W u_i| <= a_i``, found by multi-start descent."""
    keep = a < 1.0
    u, a = u[keep], a[keep]
    if len(u) == 0:
        return np.eye(d)[:, :k]
    target = np.maximum(a**2 - 1e-7, 0.0)

    def proj_norms(z):
        f, _ = np.linalg.qr(z.reshape(d, k))
        return np.sum((u @ f) ** 2, axis=1), f

    def loss(z):
        p, _ = proj_norms(z)
        return float(np.sum(np.maximum(0.0, p - target) ** 2))

    for r in range(budget.feas_starts):
        rng = np.random.default_rng([budget.seed, 7919, k, r])
        res = scipy.optimize.minimize(loss, rng.normal(size=d * k), method="L-BFGS-B")
        p, f = proj_norms(res.x)
        if np.sum(np.maximum(0.0, p - a**2)) <= TAU_FEAS and np.all(np.sqrt(p) <= a + 1e-12):
            return f
    return None


def _feasible_pattern(u, a, k, budget):
    """Frame of some ``k``-dimensional ``W`` switching off every line in ``u`` (thresholds ``a``), or None."""
    d = u.shape[1]
    if k == d:
        return np.eye(d) if np.all(a >= 1.0 - _BOUNDARY_RTOL) else None
    if k == 1:
        w = _feasible_line(u, a)
        return None if w is None else w[:, np.newaxis]
    if k == d - 1:
        v = _feasible_hyperplane(u, a)
        return None if v is None else Subspace.span([v]).complement().frame
    return _feasible_general(u, a, k, budget, d)


def rank_one_exact_check(datum: Datum, alphas, beta: float = 0.0, budget: SearchBudget | None = None) -> PerceptivityVerdict:
    """Exact perceptivity decision for data of rank-one maps, ``d <= D_MAX_EXACT``.

    A rank-one map ``sigma_j u_j^T`` is active on ``W`` iff
    ``|pi_W u_j| > alpha_j / sigma_j``. For every dimension the minimal slack
    is found by enumerating the set ``S`` of switched-off maps in order of
    increasing slack and testing whether some ``W`` switches all of them off.
    Lines and hyperplanes are decided in closed form (vertex / active-set
    enumeration); the middle dimensions of ``R^4`` use multi-start descent.
    """
    budget = budget or SearchBudget()
    a = as_alphas(datum, alphas)
    if not beta >= 0:
        raise InvalidInput(f"beta must be non-negative, got {beta}")
    lines = _rank_one_lines(datum)
    d = datum.d
    if d > D_MAX_EXACT:
        raise UnsupportedDimension(f"exact rank-one check supports d <= {D_MAX_EXACT}, got {d}")
    u = np.array([v for _, v in lines])
    thr = np.array([aj / s for aj, (s, _) in zip(a, lines)])
    q = datum.weights
    n = len(q)
    tau = slack_tolerance(datum)
    subsets = sorted(
        (s for r in range(n + 1) for s in itertools.combinations(range(n), r)),
        key=lambda s: (-float(q[list(s)].sum()), s),
    )
    per_dim: dict[int, tuple[float, np.ndarray]] = {}
    tried = 0
    for k in range(1, d + 1):
        infeasible: list[frozenset] = []
        for s in subsets:
            slack = float(q.sum() - q[list(s)].sum()) - k + beta
            fs = frozenset(s)
            if any(bad <= fs for bad in infeasible):
                continue
            tried += 1
            frame = _feasible_pattern(u[list(s)], thr[list(s)], k, budget) if s else np.eye(d)[:, :k]
            if frame is None:
                infeasible.append(fs)
                continue
            w = Subspace(frame, check=False)
            per_dim[k] = (min(slack, perceptivity_slack(datum, a, beta, w)), w.frame)
            break
    witness, min_slack = _pick_witness(per_dim, tau)
    status = Status.REFUTED if min_slack < -tau else Status.CERTIFIED
    return _verdict(status, witness, min_slack, RANK_ONE_EXACT, tried, a, beta)


# orthogonal projectors: kernel-intersection sufficient condition


def _projector_kernels(datum: Datum):
    out = []
    for j, c in enumerate(datum.coordinate_maps()):
        if np.abs(c @ c.T - np.eye(c.shape[0])).max() > 1e-8:
            raise InvalidInput(f"map {j} is not an orthogonal projector onto its codomain")
        out.append(Subspace.from_columns(c.T).complement())
    return out


def kernel_jump_dims(kernels, radii, frames):
    """For each frame ``W`` and kernel ``K_j``: the largest ``s`` such that some ``W'``
    within ``radii[j]`` of ``W`` (l2 principal-angle metric) meets ``K_j`` in dimension ``s``.

    The nearest ``W'`` containing ``s`` dimensions of ``K_j`` rotates the ``s``
    smallest principal angles between ``W`` and ``K_j`` to zero, so the distance
    is the l2 norm of those angles.
    """
    n, _, k = frames.shape
    out = np.zeros((n, len(kernels)), dtype=int)
    for j, (kern, r) in enumerate(zip(kernels, radii)):
        if kern.dim == 0:
            continue
        cos = np.linalg.svd(np.swapaxes(frames, 1, 2) @ kern.frame, compute_uv=False)
        theta = np.arccos(np.clip(cos, -1.0, 1.0))
        dist = np.sqrt(np.cumsum(theta**2, axis=1))
        out[:, j] = np.count_nonzero(dist <= r * (1 + 1e-12) + 1e-12, axis=1)
    return out


def projector_sufficient_check(
    datum: Datum, alphas, beta: float = 0.0, c_metric: float = 1.0, budget: SearchBudget | None = None
) -> PerceptivityVerdict:
    """Sufficient condition for (alpha, beta)-perceptivity of globally critical projector data.

    Checks, for every ``W`` of every dimension ``k``,
    ``sum_j q_j J_j(W) / k - beta / k <= sum_j q_j dim K_j / d`` where ``K_j`` is
    the kernel of the ``j``-th projector and ``J_j(W)`` the largest dimension of
    ``K_j`` meeting a subspace within distance ``c_metric * alpha_j`` of ``W``.
    The guarantee holds relative to ``c_metric``; the metric constant that
    makes the implication a theorem is only known to exist, so callers supply
    it (default 1). Returns CERTIFIED when the cover proves the inequality
    everywhere and UNKNOWN otherwise; the condition is never used to refute.
    """
    budget = budget or SearchBudget()
    a = as_alphas(datum, alphas)
    if not beta >= 0:
        raise InvalidInput(f"beta must be non-negative, got {beta}")
    if not c_metric > 0:
        raise InvalidInput("c_metric must be positive")
    kernels = _projector_kernels(datum)
    flag, defect = is_globally_critical(datum)
    if not flag:
        raise InvalidInput(f"datum is not globally critical (defect {defect:.3g})")
    d, q = datum.d, datum.weights
    tau = slack_tolerance(datum)
    if beta >= d:
        return _verdict(Status.CERTIFIED, None, beta - d, SUFFICIENT_CONDITION, 0, a, beta)
    rhs = float(np.dot(q, [kern.dim for kern in kernels])) / d
    radii = c_metric * a
    samples = 0
    worst = [-math.inf, None]
    for k in range(1, d + 1):
        if k == d:
            frames = np.eye(d)[np.newaxis]
            lhs = (kernel_jump_dims(kernels, radii, frames) @ q - beta) / k
            samples += 1
            if lhs[0] > rhs + tau:
                return _verdict(Status.UNKNOWN, Subspace.full(d), rhs - lhs[0], SUFFICIENT_CONDITION, samples, a, beta)
            continue

        def classify(frames, h, k=k):
            eps = 0.5 * math.pi * _cover_chart_radius(h, k, d)
            centre = (kernel_jump_dims(kernels, radii, frames) @ q - beta) / k
            upper = (kernel_jump_dims(kernels, radii + eps, frames) @ q - beta) / k
            i = int(np.argmax(centre))
            if centre[i] > worst[0]:
                worst[0], worst[1] = centre[i], frames[i]
            return upper <= rhs + tau, centre > rhs + tau

        outcome, frame, cells = _grassmann_cover(d, k, classify, budget.max_cells)
        samples += cells
        if outcome != "ok":
            w = None if frame is None else Subspace(frame, check=False)
            return _verdict(Status.UNKNOWN, w, rhs - worst[0], SUFFICIENT_CONDITION, samples, a, beta)
    return _verdict(Status.CERTIFIED, None, rhs - worst[0], SUFFICIENT_CONDITION, samples, a, beta)


# algebraic defect


def beta_min_estimate(datum: Datum, budget: SearchBudget | None = None):
    """Largest algebraic defect ``dim W - sum_j q_j dim l_j(W)`` found, with its subspace.

    Candidates are the lattice generated by the kernels of the maps (sums and
    intersections) plus random subspaces. This is a lower bound on the
    smallest ``beta`` for which the datum is (alpha, beta)-perceptive for small
    ``alpha``; it is exact whenever a maximising subspace lies in the lattice.
    Ties go to the subspace of smallest dimension.
    """
    budget = budget or SearchBudget()
    d = datum.d
    pool = [Subspace.zero(d), Subspace.full(d)]
    kernels = []
    for c in datum.coordinate_maps():
        _, s, vt = np.linalg.svd(c, full_matrices=True)
        r = int(np.count_nonzero(s > RANK_RTOL * max(1.0, s[0] if len(s) else 0.0)))
        if r < d:
            kernels.append(Subspace(vt[r:].T, check=False))
    for kern in kernels:
        _dedupe_add(pool, kern, budget.lattice_cap)
    for r in range(2, len(kernels) + 1):
        for combo in itertools.combinations(kernels, r):
            total = combo[0]
            inter = combo[0]
            for x in combo[1:]:
                total = total + x
                inter = inter.intersection(x)
            _dedupe_add(pool, total, budget.lattice_cap)
            if inter.dim:
                _dedupe_add(pool, inter, budget.lattice_cap)
    for x, y in itertools.combinations(list(pool), 2):
        for z in (x + y, x.intersection(y)):
            _dedupe_add(pool, z, budget.lattice_cap)
    rng = np.random.default_rng([budget.seed, 104729])
    for _ in range(budget.restarts):
        k = int(rng.integers(1, d + 1))
        f, _ = np.linalg.qr(rng.normal(size=(d, k)))
        pool.append(Subspace(f, check=False))
    # algebraic_perceptivity_defect is acuity - dim W, so the most negative wins
    scored = [(algebraic_perceptivity_defect(datum, w), w.dim, i) for i, w in enumerate(pool)]
    neg, _, i = min(scored)
    return (-neg, pool[i]) if neg < 0 else (0.0, Subspace.zero(d))
