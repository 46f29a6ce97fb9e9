"""Covering-number checks of the visual inequality on finite point clouds.

For a datum of orthogonal projectors onto ``H_j`` and ``A`` in the unit ball,

    N_delta(A) <= C delta^{-beta} prod_j alpha_j^{-q_j dim H_j} prod_j N_delta(pi_j A)^{q_j}

with ``C`` of the form ``O_d(1)^{sum q} (1 + sum q)^{(A - d + beta)/2} E``.
Minimal coverings are replaced by two proxies: the number of occupied cells
of the origin-anchored grid ``prod_i [k_i delta, (k_i + 1) delta)`` (an upper
proxy, within a factor depending on ``d`` of the true number) and the size of
a greedy ``delta``-separated subset (a lower proxy). The inequality report
uses cell counts on both sides; the check allows a factor ``4^d`` on top of
the explicit part of ``C``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .datum import Datum, exponential_entropy, total_acuity
from .exceptions import InvalidInput
from .linalg import TAU_ORTH, Subspace
from .perceptivity import PerceptivityVerdict, Status, check_perceptivity


class PointCloud:
    """Finite subset of the closed unit ball of ``R^d`` (rows of ``points``)."""

    def __init__(self, points, ambient_dim: int | None = None, check: bool = True):
        p = np.asarray(points, dtype=float)
        if p.ndim == 1 and ambient_dim is not None and p.size == 0:
            p = p.reshape(0, ambient_dim)
        if p.ndim != 2:
            raise InvalidInput("points must form an (n, d) array")
        if ambient_dim is not None and p.shape[1] != ambient_dim:
            raise InvalidInput(f"points have dimension {p.shape[1]}, expected {ambient_dim}")
        if not np.all(np.isfinite(p)):
            raise InvalidInput("points must be finite")
        if check and len(p):
            norms = np.linalg.norm(p, axis=1)
            bad = int(np.argmax(norms))
            if norms[bad] > 1 + TAU_ORTH:
                raise InvalidInput(f"point {bad} has norm {norms[bad]:.6g} > 1")
        p.setflags(write=False)
        self.points = p

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        return f"PointCloud(n={len(self)}, d={self.ambient_dim})"


def read_cloud(path) -> PointCloud:
    """Read the text format: a header ``d n`` then ``n`` lines of ``d`` coordinates."""
    with open(path) as fh:
        lines = [(i + 1, ln.strip()) for i, ln in enumerate(fh)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InvalidInput(f"{path}: empty point-cloud file")
    lineno, header = lines[0]
    parts = header.split()
    try:
        d, n = int(parts[0]), int(parts[1])
        if len(parts) != 2 or d < 1 or n < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise InvalidInput(f"{path}:{lineno}: header must be 'd n' with d >= 1, n >= 0") from None
    if len(lines) - 1 != n:
        raise InvalidInput(f"{path}: header announces {n} points, found {len(lines) - 1}")
    pts = np.empty((n, d))
    for k, (lineno, ln) in enumerate(lines[1:]):
        fields = ln.split()
        if len(fields) != d:
            raise InvalidInput(f"{path}:{lineno}: expected {d} coordinates, got {len(fields)}")
        try:
            pts[k] = [float(x) for x in fields]
        except ValueError:
            raise InvalidInput(f"{path}:{lineno}: coordinates must be decimal numbers") from None
    try:
        return PointCloud(pts, d)
    except InvalidInput as err:
        raise InvalidInput(f"{path}: {err}") from None


def write_cloud(cloud: PointCloud, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{cloud.ambient_dim} {len(cloud)}\n")
        for p in cloud.points:
            fh.write(" ".join(repr(float(x)) for x in p) + "\n")


def grid_cloud(n: int, d: int, k: int | None = None) -> PointCloud:
    """Cell-centred ``n``-point-per-axis grid of ``[-1/2, 1/2]^k`` placed in ``R^d`` (other coordinates 0).

    With ``n`` even and ``delta = 1/n`` every point has its own grid cell.
    Requires ``k <= 4`` so that the cube fits in the unit ball.
    """
    k = d if k is None else k
    if not 0 <= k <= min(d, 4):
        raise InvalidInput("need 0 <= k <= min(d, 4)")
    axis = (np.arange(n) + 0.5) / n - 0.5
    pts = np.zeros((n**k, d))
    if k:
        mesh = np.meshgrid(*([axis] * k), indexing="ij")
        pts[:, :k] = np.stack([m.ravel() for m in mesh], axis=1)
    return PointCloud(pts, d)


def random_cloud(rng, d: int, n: int) -> PointCloud:
    """``n`` points uniform in the unit ball of ``R^d``."""
    g = rng.normal(size=(n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.uniform(size=(n, 1)) ** (1 / d)
    return PointCloud(g * r, d)


@dataclass(frozen=True)
class CoveringEstimate:
    delta: float
    cell_count: int
    separated_count: int


def _check_delta(delta):
    if not (np.isscalar(delta) and 0 < float(delta) < 1):
        raise InvalidInput(f"delta must lie in (0, 1), got {delta!r}")
    return float(delta)


def cell_count(points: np.ndarray, delta: float) -> int:
    """Number of distinct half-open grid cells ``[k delta, (k+1) delta)`` hit."""
    if len(points) == 0:
        return 0
    cells = np.floor(points / delta).astype(np.int64)
    return int(len(np.unique(cells, axis=0)))


def separated_count(points: np.ndarray, delta: float) -> int:
    """Greedy pass in input order keeping points farther than ``delta`` from all kept ones."""
    d = points.shape[1]
    buckets: dict[tuple, list[np.ndarray]] = {}
    offsets = list(itertools.product((-1, 0, 1), repeat=d))
    kept = 0
    for p, c in zip(points, np.floor(points / delta).astype(np.int64)):
        key = tuple(c)
        near = False
        for off in offsets:
            for q in buckets.get(tuple(a + b for a, b in zip(key, off)), ()):
                if np.sum((p - q) ** 2) <= delta * delta:
                    near = True
                    break
            if near:
                break
        if not near:
            buckets.setdefault(key, []).append(p)
            kept += 1
    return kept


def covering_estimate(cloud: PointCloud, delta: float) -> CoveringEstimate:
    """Grid-cell and separated-set proxies for the ``delta``-covering number.

    For ``r = delta``: a cell has diameter ``sqrt(d) delta`` and every
    ``delta``-ball meets at most ``3^d`` cells, so ``N_{sqrt(d) delta} <= cells``
    and ``cells <= 3^d N_delta``; the separated set satisfies
    ``separated <= N_{delta/2}``.
    """
    delta = _check_delta(delta)
    if len(cloud) == 0:
        raise InvalidInput("covering estimate of an empty cloud")
    return CoveringEstimate(delta, cell_count(cloud.points, delta), separated_count(cloud.points, delta))


def project_cloud(cloud: PointCloud, w: Subspace) -> PointCloud:
    """``pi_W`` applied to every point, in the coordinates of the frame of ``W``."""
    if w.ambient_dim != cloud.ambient_dim:
        raise InvalidInput(f"subspace lives in R^{w.ambient_dim}, cloud in R^{cloud.ambient_dim}")
    return PointCloud(cloud.points @ w.frame, w.dim, check=False)


def _projector_frames(datum: Datum):
    out = []
    for j, c in enumerate(datum.coordinate_maps()):
        if np.abs(c @ c.T - np.eye(c.shape[0])).max() > 1e-8:
            raise InvalidInput(f"map {j} is not an orthogonal projector")
        out.append(c)
    return out


@dataclass(frozen=True)
class VisualReport:
    delta: float
    lhs: int
    projected: tuple
    product: float
    rhs: float
    ratio: float
    constant_estimate: float
    allowance: float
    perceptivity: str
    forced: bool = False

    @property
    def holds(self) -> bool:
        return self.ratio <= self.allowance * self.constant_estimate


def constant_form(datum: Datum, beta: float) -> float:
    """Explicit part ``(1 + sum q)^{(A - d + beta)/2} E`` of the visual constant."""
    sq = float(np.sum(datum.weights))
    return (1 + sq) ** ((total_acuity(datum) - datum.d + beta) / 2) * exponential_entropy(datum)


def visual_check(
    datum: Datum,
    cloud: PointCloud,
    delta: float,
    alphas,
    beta: float = 0.0,
    perceptivity: PerceptivityVerdict | None = None,
    *,
    force: bool = False,
) -> VisualReport:
    """Both sides of the visual inequality at scale ``delta`` (cell-count proxies).

    ``ratio = lhs / rhs`` is compared with ``4^d`` times ``constant_form``.
    Perceptivity is checked here unless a verdict is given; a non-CERTIFIED
    verdict raises ``InvalidInput`` unless ``force`` is set for UNKNOWN.
    """
    delta = _check_delta(delta)
    if cloud.ambient_dim != datum.d:
        raise InvalidInput(f"cloud lives in R^{cloud.ambient_dim}, datum acts on R^{datum.d}")
    if len(cloud) == 0:
        raise InvalidInput("visual check of an empty cloud")
    maps = _projector_frames(datum)
    if not beta >= 0:
        raise InvalidInput("beta must be non-negative")
    verdict = perceptivity if perceptivity is not None else check_perceptivity(datum, alphas, beta)
    a = np.broadcast_to(np.asarray(alphas, dtype=float), (len(datum),))
    forced = False
    if verdict.status is not Status.CERTIFIED:
        if not (verdict.status is Status.UNKNOWN and force):
            raise InvalidInput(f"perceptivity is {verdict.status.value}; the visual inequality does not apply")
        forced = True
    lhs = cell_count(cloud.points, delta)
    projected = tuple(cell_count(cloud.points @ c.T, delta) for c in maps)
    q, n = datum.weights, datum.target_dims
    log_prod = float(np.dot(q, np.log(projected)))
    log_rhs = -beta * math.log(delta) - float(np.sum(q * n * np.log(a))) + log_prod
    return VisualReport(
        delta=delta,
        lhs=lhs,
        projected=projected,
        product=math.exp(log_prod),
        rhs=math.exp(log_rhs),
        ratio=lhs / math.exp(log_rhs),
        constant_estimate=constant_form(datum, beta),
        allowance=4.0**datum.d,
        perceptivity=verdict.status.value,
        forced=forced,
    )


def fit_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def slab_experiment(d: int, k: int, ns=(8, 16, 32, 64), alpha: float = 0.5):
    """Exponent of ``delta^{-beta}`` forced by dropping ``k`` of ``d`` coordinate-line projectors.

    The datum keeps the lines ``e_k, ..., e_{d-1}`` (weight 1) and is
    (alpha, k)-perceptive; ``A`` is a grid on the first ``k`` coordinates. The
    projections of ``A`` are single points while ``N_delta(A) ~ delta^{-k}``, so
    the fitted slope of ``log(lhs / prod N^q)`` against ``log(1/delta)`` is ``k``.
    Returns ``(slope, reports)``.
    """
    if not 1 <= k < d:
        raise InvalidInput("need 1 <= k < d")
    subs = [Subspace.coordinate(d, [i]) for i in range(k, d)]
    datum = Datum.from_projectors(subs, [1.0] * len(subs))
    verdict = check_perceptivity(datum, alpha, float(k))
    reports = [visual_check(datum, grid_cloud(n, d, k), 1.0 / n, alpha, float(k), verdict) for n in ns]
    slope = fit_slope([1.0 / r.delta for r in reports], [r.lhs / r.product for r in reports])
    return slope, reports


__all__ = [
    "CoveringEstimate",
    "PointCloud",
    "VisualReport",
    "constant_form",
    "covering_estimate",
    "fit_slope",
    "grid_cloud",
    "project_cloud",
    "random_cloud",
    "read_cloud",
    "slab_experiment",
    "visual_check",
    "write_cloud",
]
