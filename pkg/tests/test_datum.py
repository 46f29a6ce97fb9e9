import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blbounds import catalog
from blbounds.datum import (
    Datum,
    LocalizedRegularizedDatum,
    algebraic_perceptivity_defect,
    essential_acuity,
    exponential_entropy,
    gram_norm,
    is_globally_critical,
    projector_reduction,
    total_acuity,
)
from blbounds.exceptions import InvalidInput, NotSurjective
from blbounds.linalg import Subspace

from conftest import random_frame, random_spd


def test_datum_validation():
    with pytest.raises(InvalidInput):
        Datum([np.eye(2)], [0.0])
    with pytest.raises(InvalidInput):
        Datum([np.eye(2), np.eye(3)], [1, 1])
    with pytest.raises(InvalidInput):
        Datum([np.eye(2)], [1, 1])


@pytest.mark.parametrize(
    "datum",
    [catalog.young(), catalog.identity(3), catalog.loomis_whitney(), catalog.coordinate_planes(3)],
)
def test_globally_critical_examples(datum):
    flag, defect = is_globally_critical(datum)
    assert flag and defect == pytest.approx(0, abs=1e-12)


def test_not_critical():
    flag, defect = is_globally_critical(catalog.loomis_whitney_pair())
    assert not flag and defect == pytest.approx(-1)


def test_essential_acuity_examples():
    y = catalog.young()
    assert essential_acuity(y, 0.3, Subspace.zero(2)) == 0
    # |l_j (1,0)| = 1, 0, 1 and none exceeds 1 strictly
    assert essential_acuity(y, 1.0, Subspace.span([[1.0, 0.0]])) == 0
    assert essential_acuity(y, 0.4, Subspace.full(2)) == pytest.approx(2)


def test_essential_acuity_monotone(rng):
    y = catalog.d_lambda(0.3)
    for _ in range(50):
        w = Subspace(random_frame(rng, 3, int(rng.integers(0, 4))))
        a = rng.uniform(0, 1.5, size=3)
        b = a + rng.uniform(0, 0.5, size=3)
        assert essential_acuity(y, b, w) <= essential_acuity(y, a, w)


def test_total_acuity_examples():
    assert total_acuity(catalog.young()) == pytest.approx(2)
    assert total_acuity(catalog.loomis_whitney()) == pytest.approx(3)
    assert total_acuity(catalog.identity(3)) == pytest.approx(3)


def test_exponential_entropy_examples():
    assert exponential_entropy(catalog.young([1.0, 1.0, 1.0])) == pytest.approx(1)
    assert exponential_entropy(catalog.loomis_whitney()) == pytest.approx(2**1.5)
    assert exponential_entropy(catalog.young()) == pytest.approx(1.5)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-3, 50), min_size=1, max_size=6), st.integers(0, 2**31 - 1))
def test_exponential_entropy_dominated(weights, seed):
    r = np.random.default_rng(seed)
    dims = r.integers(1, 4, size=len(weights))
    datum = Datum([r.normal(size=(n, 4)) for n in dims], weights)
    assert exponential_entropy(datum) <= math.exp(dims.sum() / (2 * math.e)) * (1 + 1e-12)


def test_projector_reduction_of_projectors(rng):
    subs = [Subspace(random_frame(rng, 4, k)) for k in (1, 2, 3)]
    datum = Datum.from_projectors(subs, [0.5, 0.7, 0.4])
    proj, ups = projector_reduction(datum)
    assert ups == pytest.approx(1)
    for m, p in zip(datum.maps, proj.maps):
        np.testing.assert_allclose(m.matrix, p.matrix, atol=1e-10)
    np.testing.assert_array_equal(proj.target_dims, datum.target_dims)


def test_projector_reduction_d_lambda():
    for lam in (1.0, 0.5, 0.01):
        proj, ups = projector_reduction(catalog.d_lambda(lam))
        assert ups == pytest.approx(lam**-0.5)
        # kernels preserved
        for m, p in zip(catalog.d_lambda(lam).maps, proj.maps):
            ker = Subspace.from_columns(np.eye(3) - p.matrix)
            np.testing.assert_allclose(m.matrix @ ker.frame, 0, atol=1e-12)


def test_projector_reduction_scaled_identity():
    _, ups = projector_reduction(Datum([2 * np.eye(2)], [1.0]))
    assert ups == pytest.approx(0.25)


def test_projector_reduction_not_surjective():
    with pytest.raises(NotSurjective):
        projector_reduction(Datum([[[1.0, 0.0], [2.0, 0.0]]], [1.0]))


def test_gram_norm_examples():
    assert gram_norm(LocalizedRegularizedDatum.isotropic(catalog.identity(3))) == pytest.approx(2)
    for delta in (0.5, 0.1):
        lrd = LocalizedRegularizedDatum.isotropic(catalog.loomis_whitney(), reg=delta**-2, loc=1.0)
        assert gram_norm(lrd) == pytest.approx(1 + delta**-2)
    tiny = Datum([np.eye(2)], [1e-14])
    assert gram_norm(LocalizedRegularizedDatum.isotropic(tiny, 1.0, 3.0)) == pytest.approx(3)


def test_gram_norm_dominates_localiser_and_monotone(rng):
    datum = catalog.d_lambda(0.4)
    for _ in range(30):
        regs = [random_spd(rng, 2) for _ in range(3)]
        t = random_spd(rng, 3)
        base = gram_norm(LocalizedRegularizedDatum(datum, tuple(regs), t))
        assert base >= np.linalg.eigvalsh(t)[-1] - 1e-10
        j = int(rng.integers(3))
        v = rng.normal(size=2)
        regs[j] = regs[j] + np.outer(v, v)
        assert gram_norm(LocalizedRegularizedDatum(datum, tuple(regs), t)) >= base - 1e-10


def test_lrd_validation():
    with pytest.raises(InvalidInput):
        LocalizedRegularizedDatum(catalog.identity(2), (np.eye(3),), np.eye(2))
    with pytest.raises(InvalidInput):
        LocalizedRegularizedDatum(catalog.identity(2), (np.eye(2),), -np.eye(2))


def test_algebraic_defect_examples():
    y = catalog.young()
    assert algebraic_perceptivity_defect(y, Subspace.zero(2)) == 0
    assert algebraic_perceptivity_defect(y, Subspace.span([[1.0, 0.0]])) == pytest.approx(1 / 3)
    assert algebraic_perceptivity_defect(catalog.loomis_whitney(), Subspace.full(3)) == pytest.approx(0)


def test_projector_datum_target_dims():
    planes = catalog.coordinate_planes(3)
    assert planes.is_projector_datum()
    np.testing.assert_array_equal(planes.target_dims, [2, 2, 2])
    assert not catalog.young().is_projector_datum()
