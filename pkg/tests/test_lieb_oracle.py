import math

import numpy as np
import pytest

from blbounds import catalog
from blbounds.datum import Datum, LocalizedRegularizedDatum
from blbounds.exceptions import InvalidInput
from blbounds.lieb_oracle import (
    GaussianInput,
    TAU_LOEWNER,
    bl_limit,
    clip_below,
    lieb_functional,
    maximize_gaussian,
)
from blbounds.linalg import loewner_le

from conftest import random_spd

LRD = LocalizedRegularizedDatum


def isotropic_inputs(datum, a=1.0):
    return GaussianInput(tuple(a * np.eye(n) for n in datum.target_dims))


# functional


@pytest.mark.parametrize("eps", [1e-1, 1e-3, 1e-6])
def test_functional_identity(eps):
    d = catalog.identity(3)
    v = lieb_functional(LRD.isotropic(d, 1.0, eps), isotropic_inputs(d))
    assert v == pytest.approx((1 + eps) ** -1.5, rel=1e-12)


@pytest.mark.parametrize("eps", [1e-1, 1e-3, 1e-6])
def test_functional_loomis_whitney_at_identity(eps):
    lw = catalog.loomis_whitney()
    v = lieb_functional(LRD.isotropic(lw, 1.0, eps), isotropic_inputs(lw))
    assert v == pytest.approx((1 + eps) ** -1.5, rel=1e-12)


def test_functional_young_at_extremiser():
    # Young at q = 2/3: equal one-dimensional variances are extremal by symmetry
    y = catalog.young()
    lrd = LRD.isotropic(y, 1e6, 1e-9)
    v = lieb_functional(lrd, isotropic_inputs(y, 1e3))
    assert v == pytest.approx(math.sqrt(3) / 2, rel=1e-5)


def test_functional_rejects_inputs_above_regulariser():
    lw = catalog.loomis_whitney()
    with pytest.raises(InvalidInput):
        lieb_functional(LRD.isotropic(lw, 1.0, 1.0), isotropic_inputs(lw, 2.0))
    with pytest.raises(InvalidInput):
        lieb_functional(LRD.isotropic(lw, 1.0, 1.0), [np.eye(2)])
    with pytest.raises(InvalidInput):
        GaussianInput((np.diag([1.0, -1.0]),))


def test_clip_below_respects_both_bounds(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        p, r = random_spd(rng, n), random_spd(rng, n)
        c = clip_below(p, r)
        assert loewner_le(c, r, 1e-9) and loewner_le(c, p, 1e-9)
        assert np.linalg.eigvalsh(c)[0] > 0


# maximisation


def test_loomis_whitney_value():
    r = maximize_gaussian(LRD.isotropic(catalog.loomis_whitney(), 1e6, 1e-6))
    assert r.converged
    assert r.value == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("lam", [4.0, 1.0, 0.5, 0.1, 0.01])
def test_d_lambda_value(lam):
    r = maximize_gaussian(LRD.isotropic(catalog.d_lambda(lam), 1e6, 1e-6))
    assert r.value == pytest.approx(lam**-0.5, rel=1e-2)


def test_trace_monotone_and_constraints(rng):
    for _ in range(10):
        d = int(rng.integers(2, 4))
        maps = [rng.normal(size=(int(rng.integers(1, d + 1)), d)) for _ in range(3)]
        datum = Datum(maps, rng.uniform(0.2, 1.0, size=3))
        lrd = LRD(datum, tuple(random_spd(rng, m.shape[0], 0.5) for m in maps), random_spd(rng, d, 0.1))
        r = maximize_gaussian(lrd, max_iter=300)
        assert np.all(np.diff(r.functional_trace) >= 0)
        assert r.value == pytest.approx(lieb_functional(lrd, r.argmax), rel=1e-12)
        for a, reg in zip(r.argmax.mats, lrd.regs):
            assert np.linalg.eigvalsh(reg - a)[0] >= -TAU_LOEWNER * max(1.0, np.abs(reg).max())


def test_oracle_dominates_random_feasible_inputs(rng):
    for _ in range(8):
        d = 3
        maps = [rng.normal(size=(2, d)), rng.normal(size=(1, d)), rng.normal(size=(2, d))]
        datum = Datum(maps, [0.5, 0.7, 0.4])
        lrd = LRD(datum, tuple(random_spd(rng, m.shape[0], 0.5) for m in maps), random_spd(rng, d, 0.2))
        best = maximize_gaussian(lrd, restarts=2, seed=3).value
        for _ in range(200):
            a = [clip_below(random_spd(rng, m.shape[0], 1e-3) * math.exp(rng.normal()), r) for m, r in zip(maps, lrd.regs)]
            assert lieb_functional(lrd, a) <= best * (1 + 1e-9)


def test_restarts_deterministic():
    lrd = LRD.isotropic(catalog.young((0.9, 0.6, 0.5)), 10.0, 1e-2)
    r1 = maximize_gaussian(lrd, restarts=3, seed=11)
    r2 = maximize_gaussian(lrd, restarts=3, seed=11)
    assert r1.value == r2.value
    assert r1.value >= maximize_gaussian(lrd).value - 1e-12


def test_restarts_thread_independent(monkeypatch):
    lrd = LRD.isotropic(catalog.young((0.9, 0.6, 0.5)), 10.0, 1e-2)
    serial = maximize_gaussian(lrd, restarts=3, seed=2).value
    monkeypatch.setenv("BLB_THREADS", "4")
    assert maximize_gaussian(lrd, restarts=3, seed=2).value == serial


def test_non_convergence_is_reported():
    r = maximize_gaussian(LRD.isotropic(catalog.d_lambda(0.01), 1e4, 1e-4), max_iter=3)
    assert not r.converged
    assert r.value > 0


def test_divergence_without_algebraic_perceptivity():
    pair = catalog.loomis_whitney_pair()
    vals = [maximize_gaussian(LRD.isotropic(pair, 1.0, eps)).value for eps in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert np.all(np.diff(vals) > 0)
    # value (2 eps)^{-1/2}: one unit of the (e2, e3)-plane is left unconstrained
    assert vals[-1] == pytest.approx((2e-8) ** -0.5, rel=1e-3)


# limits


def test_limit_identity():
    est, trace = bl_limit(catalog.identity(2))
    assert est == pytest.approx(1.0, abs=1e-6)
    assert len(trace) == 49


@pytest.mark.parametrize(
    "weights", [(2 / 3, 2 / 3, 2 / 3), (0.9, 0.6, 0.5), (0.7, 0.7, 0.6)]
)
def test_limit_young_closed_form(weights):
    est, trace = bl_limit(catalog.young(weights))
    assert est == pytest.approx(catalog.young_constant(weights), rel=1e-6)
    assert trace.extrapolated == pytest.approx(catalog.young_constant(weights), rel=1e-6)


def test_limit_loomis_whitney_monotone():
    est, trace = bl_limit(catalog.loomis_whitney())
    assert est == pytest.approx(1.0, abs=1e-3)
    grid = np.array([p.value for p in trace]).reshape(7, 7)
    assert np.all(np.diff(grid, axis=0) >= -1e-12)  # larger t
    assert np.all(np.diff(grid, axis=1) >= -1e-12)  # smaller eps
    assert trace.values(t=1.0, eps=1.0) == [grid[0, 0]]


def test_limit_schedule_validation():
    with pytest.raises(InvalidInput):
        bl_limit(catalog.identity(2), t_values=[])
    with pytest.raises(InvalidInput):
        bl_limit(catalog.identity(2), eps_values=[0.0])
