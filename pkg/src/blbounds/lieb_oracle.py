"""Numerical Brascamp-Lieb constants through the Gaussian supremum.

For a localized regularized datum the constant equals the supremum over
``0 < A_j <= R_j`` of

    F(A) = (prod_j det(A_j)^{q_j} / det(T + sum_j q_j l_j^* A_j l_j))^{1/2}.

``maximize_gaussian`` runs a monotone ascent on ``log F``: the unconstrained
first-order condition ``A_j^{-1} = l_j M^{-1} l_j^*`` gives a target ``P_j``,
which is clipped to ``P_j <= R_j`` and approached along the geodesic
``A #_s P = A^{1/2} (A^{-1/2} P A^{-1/2})^s A^{1/2}``. Geometric means of
matrices below ``R_j`` stay below ``R_j``, so only extrapolated steps
(``s > 1``) need clipping again. The step ``s`` is halved until ``log F``
does not decrease, which keeps the trace monotone. Each step ends with an
exact line search over the common scale ``A -> cA``, along which ``log F`` is
concave in ``log c`` and nearly flat when ``T`` is small. The iteration
still crawls along other nearly flat directions (for example when one
``A_j`` sits on its bound), so after a first pass a quasi-Newton polish in an
unconstrained parametrisation is tried and kept only if it improves ``F``;
a final fixed-point pass decides convergence.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.special

from .datum import Datum, LocalizedRegularizedDatum
from .exceptions import InvalidInput
from .linalg import as_spd, logdet_spd, loewner_le, spd_apply

TAU_LOEWNER = 1e-8
DEFAULT_T_VALUES = tuple(10.0**k for k in range(0, 7))
DEFAULT_EPS_VALUES = tuple(10.0**-k for k in range(0, 7))


@dataclass(frozen=True)
class GaussianInput:
    """Covariance-type matrices ``A_j`` on each ``H_j``."""

    mats: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "mats", tuple(as_spd(a, f"A_{j}") for j, a in enumerate(self.mats))
        )

    def __len__(self):
        return len(self.mats)

    def __getitem__(self, j):
        return self.mats[j]


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmax: GaussianInput
    iterations: int
    converged: bool
    functional_trace: list = field(repr=False, default_factory=list)


def _check_input(lrd: LocalizedRegularizedDatum, a: GaussianInput):
    dims = lrd.datum.target_dims
    if len(a) != len(dims):
        raise InvalidInput(f"expected {len(dims)} matrices, got {len(a)}")
    for j, (aj, rj, n) in enumerate(zip(a.mats, lrd.regs, dims)):
        if aj.shape != (n, n):
            raise InvalidInput(f"A_{j} must be {n}x{n}, got {aj.shape}")
        if not loewner_le(aj, rj, TAU_LOEWNER):
            raise InvalidInput(f"A_{j} is not below R_{j} in Loewner order")


def _log_functional(cmaps, q, mats, loc):
    m = loc.copy()
    for c, qj, aj in zip(cmaps, q, mats):
        m += qj * c.T @ aj @ c
    m = (m + m.T) / 2
    top = sum(qj * logdet_spd(aj) for qj, aj in zip(q, mats))
    return 0.5 * (top - logdet_spd(m)), m


def lieb_functional(lrd: LocalizedRegularizedDatum, a) -> float:
    """``F(A)``; a lower bound for the localized regularized constant whenever ``A_j <= R_j``."""
    if not isinstance(a, GaussianInput):
        a = GaussianInput(tuple(a))
    _check_input(lrd, a)
    f, _ = _log_functional(lrd.datum.coordinate_maps(), lrd.datum.weights, a.mats, lrd.loc)
    return math.exp(f)


def clip_below(p: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``R^{1/2} min(R^{-1/2} P R^{-1/2}, I) R^{1/2}``, a matrix below both ``R`` and ``P``."""
    rh = spd_apply(r, np.sqrt)
    rmh = spd_apply(r, lambda w: 1 / np.sqrt(w))
    s = spd_apply(rmh @ p @ rmh, lambda w: np.minimum(w, 1.0))
    out = rh @ s @ rh
    return (out + out.T) / 2


def geodesic(a: np.ndarray, p: np.ndarray, s: float) -> np.ndarray:
    ah = spd_apply(a, np.sqrt)
    amh = spd_apply(a, lambda w: 1 / np.sqrt(w))
    power = lambda w: np.exp(np.clip(s * np.log(np.maximum(w, 1e-300)), -700.0, 700.0))
    out = ah @ spd_apply(amh @ p @ amh, power) @ ah
    return (out + out.T) / 2


def _best_scale(cmaps, q, mats, loc, regs):
    """Maximise ``log F(c A)`` over ``0 < c`` with ``c A_j <= R_j``; concave in ``log c``."""
    s = sum(qj * c.T @ a @ c for c, qj, a in zip(cmaps, q, mats))
    lh = spd_apply(loc, lambda w: 1 / np.sqrt(w))
    mu = np.maximum(np.linalg.eigvalsh(lh @ s @ lh), 0.0)
    total = float(sum(qj * a.shape[0] for qj, a in zip(q, mats)))
    u_max = math.inf
    for a, r in zip(mats, regs):
        rmh = spd_apply(r, lambda w: 1 / np.sqrt(w))
        u_max = min(u_max, -math.log(np.linalg.eigvalsh(rmh @ a @ rmh)[-1]))

    def slope(u):
        cm = math.exp(u) * mu
        return total - float(np.sum(cm / (1 + cm)))

    if slope(u_max) >= 0:
        return math.exp(u_max)
    lo = min(u_max, 0.0) - 1.0
    while slope(lo) < 0:
        lo -= 2 * (u_max - lo) + 1
    return math.exp(scipy.optimize.brentq(slope, lo, u_max, xtol=1e-14))


def _fixed_point(lrd, mats, max_iter, damping, tol_rel):
    """Monotone fixed-point ascent; returns ``(mats, trace, iterations, calm)``."""
    cmaps, q, regs = lrd.datum.coordinate_maps(), lrd.datum.weights, lrd.regs
    f, m = _log_functional(cmaps, q, mats, lrd.loc)
    trace = [math.exp(f)]
    calm, it, converged = 0, 0, False
    for it in range(1, max_iter + 1):
        minv = np.linalg.inv(m)
        targets = [clip_below(np.linalg.inv(c @ minv @ c.T), r) for c, r in zip(cmaps, regs)]

        def step(s):
            try:
                new = [geodesic(a, p, s) for a, p in zip(mats, targets)]
                if s > 1:
                    new = [clip_below(x, r) for x, r in zip(new, regs)]
                fs, ms = _log_functional(cmaps, q, new, lrd.loc)
            except np.linalg.LinAlgError:
                return None, -math.inf, None
            return (new, fs, ms) if math.isfinite(fs) else (None, -math.inf, None)

        s = 1.0
        new, fn, mn = step(s)
        while fn < f and s > 1e-8:
            s *= damping
            new, fn, mn = step(s)
        if fn < f:
            converged = True  # no ascent direction left at working precision
            break
        while s >= 1.0 and s < 2.0**40:
            cand = step(2 * s)
            if cand[1] <= fn:
                break
            s *= 2
            new, fn, mn = cand
        c = _best_scale(cmaps, q, new, lrd.loc, regs)
        if c != 1.0:
            scaled = [c * a for a in new]
            fs, ms = _log_functional(cmaps, q, scaled, lrd.loc)
            if fs > fn:
                new, fn, mn = scaled, fs, ms
        rel = abs(fn - f) / max(1.0, abs(f))
        mats, f, m = new, fn, mn
        trace.append(math.exp(f))
        calm = calm + 1 if rel < tol_rel else 0
        if calm >= 5:
            converged = True
            break
    return mats, trace, it, converged


def _polish(lrd, mats, max_iter):
    """Quasi-Newton refinement in the parametrisation ``A_j = R_j^{1/2} sigmoid(X_j) R_j^{1/2}``.

    The map ``X -> sigmoid(X)`` is a bijection from symmetric matrices onto
    ``0 < S < I``, so the constraint disappears; gradients go through the
    Daleckii-Krein formula. This removes the slow drift of the fixed-point
    iteration along nearly flat directions.
    """
    cmaps, q, regs, loc = lrd.datum.coordinate_maps(), lrd.datum.weights, lrd.regs, lrd.loc
    rh = [spd_apply(r, np.sqrt) for r in regs]
    rmh = [spd_apply(r, lambda w: 1 / np.sqrt(w)) for r in regs]
    dims = [a.shape[0] for a in mats]
    logdet_r = sum(qj * logdet_spd(r) for qj, r in zip(q, regs))

    def unpack(z):
        out, i = [], 0
        for n in dims:
            y = z[i : i + n * n].reshape(n, n)
            out.append((y + y.T) / 2)
            i += n * n
        return out

    def build(z):
        out = []
        for x, h in zip(unpack(z), rh):
            w, v = np.linalg.eigh(x)
            w = np.clip(w, -700.0, 700.0)
            sw = scipy.special.expit(w)
            out.append((w, v, sw, h @ ((v * sw) @ v.T) @ h))
        return out

    def neg(z):
        parts = build(z)
        m = loc + sum(qj * c.T @ p[3] @ c for qj, c, p in zip(q, cmaps, parts))
        wm, vm = np.linalg.eigh((m + m.T) / 2)
        if wm[0] <= 0:
            return math.inf, np.zeros_like(z)
        minv = (vm / wm) @ vm.T
        val = 0.5 * (logdet_r - np.sum(np.log(wm)))
        grads = []
        for qj, c, (w, v, sw, a), h, hm in zip(q, cmaps, parts, rh, rmh):
            val -= 0.5 * qj * np.sum(np.logaddexp(0.0, -w))
            a_inv = hm @ ((v / sw) @ v.T) @ hm
            g_s = h @ (0.5 * qj * (a_inv - c @ minv @ c.T)) @ h
            dw = w[:, None] - w[None, :]
            ds = sw[:, None] - sw[None, :]
            deriv = np.broadcast_to((sw * (1 - sw))[:, None], dw.shape)
            close = np.abs(dw) <= 1e-9
            gam = np.where(close, deriv, ds / np.where(close, 1.0, dw))
            grads.append((v @ (gam * (v.T @ g_s @ v)) @ v.T).ravel())
        grad = np.concatenate(grads)
        if not (math.isfinite(val) and np.all(np.isfinite(grad))):
            return math.inf, np.zeros_like(z)
        return -val, -grad

    z0 = []
    for a, m in zip(mats, rmh):
        w, v = np.linalg.eigh((m @ a @ m + (m @ a @ m).T) / 2)
        w = np.clip(w, 1e-12, 1 - 1e-12)
        z0.append(((v * np.log(w / (1 - w))) @ v.T).ravel())
    z0 = np.concatenate(z0)
    try:
        res = scipy.optimize.minimize(
            neg, z0, jac=True, method="L-BFGS-B", options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-12}
        )
    except np.linalg.LinAlgError:
        return list(mats), 0
    return [p[3] for p in build(res.x)], int(res.nit)


def _ascent(lrd, mats, max_iter, damping, tol_rel):
    cmaps, q = lrd.datum.coordinate_maps(), lrd.datum.weights
    mats, trace, its, _ = _fixed_point(lrd, mats, max(1, min(100, max_iter // 2)), damping, tol_rel)
    f = math.log(trace[-1])
    polished, nit = _polish(lrd, mats, max(1, max_iter // 4))
    its += nit
    fp, _ = _log_functional(cmaps, q, polished, lrd.loc)
    if fp > f:
        mats = polished
        trace.append(math.exp(fp))
    mats, tail, more, calm = _fixed_point(lrd, mats, max(5, max_iter - its), damping, tol_rel)
    trace.extend(tail[1:])
    return OracleResult(trace[-1], GaussianInput(tuple(mats)), its + more, calm, trace)


def _initial(lrd, restart, seed):
    if restart == 0:
        return [min(1.0, float(np.linalg.eigvalsh(r)[0])) * np.eye(r.shape[0]) for r in lrd.regs]
    rng = np.random.default_rng([seed, restart])
    out = []
    for r in lrd.regs:
        n = r.shape[0]
        g = rng.normal(size=(n, n))
        a = g @ g.T / n + 0.1 * np.eye(n)
        out.append(clip_below(a * math.exp(rng.normal()), r))
    return out


def _threads():
    try:
        return max(1, int(os.environ.get("BLB_THREADS", "1")))
    except ValueError:
        return 1


def maximize_gaussian(
    lrd: LocalizedRegularizedDatum,
    max_iter: int = 2000,
    damping: float = 0.5,
    tol_rel: float = 1e-10,
    seed: int = 0,
    restarts: int = 0,
    init=None,
) -> OracleResult:
    """Maximise ``F`` over ``0 < A_j <= R_j``.

    ``restarts`` adds seeded random starting points to the default
    ``A_j = min(1, lambda_min(R_j)) I``; the best result wins, ties going to
    the lowest restart index. ``init`` replaces the default start (it is
    clipped below ``R``). Restarts run on ``BLB_THREADS`` threads.
    """
    if not 0 < damping < 1:
        raise InvalidInput("damping must lie in (0, 1)")
    starts = [_initial(lrd, r, seed) for r in range(restarts + 1)]
    if init is not None:
        mats = init.mats if isinstance(init, GaussianInput) else init
        starts[0] = [clip_below(as_spd(a), r) for a, r in zip(mats, lrd.regs)]

    def run(start):
        return _ascent(lrd, start, max_iter, damping, tol_rel)

    workers = min(_threads(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    best = 0
    for i, res in enumerate(results):
        if res.value > results[best].value:
            best = i
    return results[best]


@dataclass(frozen=True)
class LimitPoint:
    t: float
    eps: float
    value: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class LimitTrace:
    """Oracle values along the ``(t, eps)`` schedule, ``R_j = t I`` and ``T = eps I``."""

    points: list
    extrapolated: float

    def values(self, t=None, eps=None):
        return [
            p.value
            for p in self.points
            if (t is None or p.t == t) and (eps is None or p.eps == eps)
        ]

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def bl_limit(
    datum: Datum,
    t_values=DEFAULT_T_VALUES,
    eps_values=DEFAULT_EPS_VALUES,
    max_iter: int = 2000,
    tol_rel: float = 1e-10,
    seed: int = 0,
    restarts: int = 0,
):
    """Approximate ``BL(datum)`` by ``R = t I``, ``T = eps I`` with ``eps -> 0`` then ``t -> inf``.

    Returns ``(estimate, trace)``: the value at the last schedule point and a
    ``LimitTrace``. ``trace.extrapolated`` adds ``(v_n - v_{n-1}) / (r - 1)``
    to the last value along the innermost axis, where ``r`` is the ratio of the
    last two ``eps``; for a decade schedule this is the Richardson correction
    for an error linear in ``eps``. Each point starts from the default
    initial matrices; when that lands below a neighbouring schedule point, the
    neighbour's argmax (feasible, with no smaller functional) is refined as
    well and the larger value kept, so the trace is monotone in both axes.
    ``seed`` and ``restarts`` are passed to ``maximize_gaussian`` for the cold starts.
    """
    t_values = [float(t) for t in t_values]
    eps_values = [float(e) for e in eps_values]
    if not t_values or not eps_values or min(t_values) <= 0 or min(eps_values) <= 0:
        raise InvalidInput("schedules must be non-empty and positive")
    points = []
    best = {}
    for a, t in enumerate(t_values):
        for b, eps in enumerate(eps_values):
            lrd = LocalizedRegularizedDatum.isotropic(datum, reg=t, loc=eps)
            res = maximize_gaussian(lrd, max_iter=max_iter, tol_rel=tol_rel, seed=seed, restarts=restarts)
            # a neighbour's argmax stays feasible here and its functional does not drop
            for key in ((a - 1, b), (a, b - 1)):
                prev = best.get(key)
                if prev is not None and prev.value > res.value:
                    warm = maximize_gaussian(lrd, max_iter=min(200, max_iter), tol_rel=tol_rel, init=prev.argmax)
                    if warm.value > res.value:
                        res = warm
            best[a, b] = res
            points.append(LimitPoint(t, eps, res.value, res.converged, res.iterations))
    est = points[-1].value
    if len(eps_values) >= 2:
        ratio = eps_values[-2] / eps_values[-1]
        prev = points[-2].value
    elif len(t_values) >= 2:
        ratio = t_values[-1] / t_values[-2]
        prev = points[-1 - len(eps_values)].value
    else:
        ratio, prev = math.inf, est
    extrap = est + (est - prev) / (ratio - 1) if math.isfinite(ratio) and ratio > 1 else est
    return est, LimitTrace(points, extrap)
