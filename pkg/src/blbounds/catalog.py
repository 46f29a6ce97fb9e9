"""Standard data with known Brascamp-Lieb constants."""
from __future__ import annotations

import math

import numpy as np

from .datum import Datum
from .linalg import Subspace


def young(weights=(2 / 3, 2 / 3, 2 / 3)) -> Datum:
    """Young's convolution datum on R^2: ``x``, ``y`` and ``x - y``."""
    maps = [[[1.0, 0.0]], [[0.0, 1.0]], [[1.0, -1.0]]]
    return Datum(maps, weights)


def young_constant(weights) -> float:
    """Sharp constant ``(prod_j (1-q_j)^(1-q_j) / q_j^q_j)^(1/2)`` for ``0 < q_j <= 1``, ``sum q = 2``."""
    log = 0.0
    for q in weights:
        if q < 1:
            log += (1 - q) * math.log(1 - q)
        log -= q * math.log(q)
    return math.exp(log / 2)


def d_lambda(lam: float = 1.0, weights=(0.5, 0.5, 0.5)) -> Datum:
    """Loomis-Whitney datum on R^3 with the third map distorted by ``lam`` along ``x_2``.

    ``l_1(x) = (x_2, x_3)``, ``l_2(x) = (x_1, x_3)``, ``l_3(x) = (x_1, lam x_2)``.
    Its constant is ``lam^(-1/2)``.
    """
    maps = [
        [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        [[1.0, 0.0, 0.0], [0.0, lam, 0.0]],
    ]
    return Datum(maps, weights)


def loomis_whitney(weights=(0.5, 0.5, 0.5)) -> Datum:
    return d_lambda(1.0, weights)


def loomis_whitney_pair() -> Datum:
    """The last two maps of Loomis-Whitney (``x -> (x_1, x_3)``, ``x -> (x_1, x_2)``), weights 1/2.

    Not globally critical; its algebraic defect ``beta_min`` is 1.
    """
    return d_lambda(1.0).subdatum([1, 2])


def identity(d: int = 3, weight: float = 1.0) -> Datum:
    return Datum([np.eye(d)], [weight])


def coordinate_lines(d: int, indices=None, weight: float = 1.0) -> Datum:
    """Orthogonal projectors onto the coordinate axes ``e_i`` (0-based ``indices``)."""
    idx = range(d) if indices is None else indices
    subs = [Subspace.coordinate(d, [i]) for i in idx]
    return Datum.from_projectors(subs, [weight] * len(subs))


def coordinate_planes(d: int = 3, weight: float = 0.5) -> Datum:
    """Orthogonal projectors onto the coordinate hyperplanes ``e_i^perp``."""
    subs = [Subspace.coordinate(d, [k for k in range(d) if k != i]) for i in range(d)]
    return Datum.from_projectors(subs, [weight] * d)
