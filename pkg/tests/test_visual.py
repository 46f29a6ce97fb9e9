import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blbounds import catalog
from blbounds.datum import Datum
from blbounds.exceptions import InvalidInput
from blbounds.linalg import Subspace
from blbounds.perceptivity import check_perceptivity
from blbounds.visual import (
    PointCloud,
    constant_form,
    covering_estimate,
    fit_slope,
    grid_cloud,
    project_cloud,
    random_cloud,
    read_cloud,
    slab_experiment,
    visual_check,
    write_cloud,
)


# point clouds and file format


def test_cloud_rejects_points_outside_ball():
    with pytest.raises(InvalidInput, match="point 1"):
        PointCloud([[0.0, 0.0], [1.0, 0.1]])
    PointCloud([[1.0 + 1e-12, 0.0]])


def test_cloud_roundtrip(tmp_path, rng):
    c = random_cloud(rng, 3, 40)
    path = tmp_path / "c.txt"
    write_cloud(c, path)
    back = read_cloud(path)
    np.testing.assert_array_equal(back.points, c.points)


@pytest.mark.parametrize(
    "text, where",
    [
        ("2\n0 0\n", ":1:"),
        ("2 2\n0 0\n0.5\n", ":3:"),
        ("2 1\n0 x\n", ":2:"),
        ("2 3\n0 0\n", "announces 3"),
        ("2 1\n2 0\n", "norm"),
    ],
)
def test_read_cloud_errors_name_the_line(tmp_path, text, where):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(InvalidInput, match=where):
        read_cloud(path)


# covering proxies


def test_two_close_points():
    e = covering_estimate(PointCloud([[0.1, 0.1], [0.1, 0.1 + 0.05]]), 0.1)
    assert e.separated_count == 1


def test_single_point_and_grid_cells():
    assert covering_estimate(PointCloud([[0.3, -0.2]]), 0.5).cell_count == 1
    for n in (4, 16):
        e = covering_estimate(grid_cloud(n, 2), 1 / n)
        assert e.cell_count == n * n


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 2.0])
def test_delta_range(delta):
    with pytest.raises(InvalidInput):
        covering_estimate(PointCloud([[0.0, 0.0]]), delta)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.floats(0.05, 0.6))
def test_proxy_relations(seed, d, delta):
    rng = np.random.default_rng(seed)
    c = random_cloud(rng, d, 60)
    e = covering_estimate(c, delta)
    assert 1 <= e.separated_count <= len(c)
    assert 1 <= e.cell_count <= len(c)
    # a delta-ball meets at most 3^d cells, and the kept centres delta-cover the cloud
    assert e.cell_count <= 3**d * e.separated_count
    # halving the scale never decreases the counts
    e2 = covering_estimate(c, delta / 2)
    assert e2.cell_count >= e.cell_count or e2.separated_count >= e.separated_count


def test_separated_set_is_separated_and_covering(rng):
    c = random_cloud(rng, 2, 300)
    delta = 0.2
    e = covering_estimate(c, delta)
    # brute force greedy reference
    kept = []
    for p in c.points:
        if all(np.linalg.norm(p - q) > delta for q in kept):
            kept.append(p)
    assert e.separated_count == len(kept)


def test_project_cloud(rng):
    c = random_cloud(rng, 3, 20)
    w = Subspace.from_columns(rng.normal(size=(3, 2)))
    p = project_cloud(c, w)
    assert p.ambient_dim == 2
    np.testing.assert_allclose(p.points @ w.frame.T, c.points @ w.projector(), atol=1e-12)
    with pytest.raises(InvalidInput):
        project_cloud(c, Subspace.full(2))


# visual inequality


@pytest.mark.parametrize("n", [8, 16, 32])
def test_coordinate_lines_grid(n):
    r = visual_check(catalog.coordinate_lines(2), grid_cloud(n, 2), 1 / n, 0.5)
    assert r.lhs == n * n
    assert r.projected == (n, n)
    assert r.ratio == pytest.approx(0.25, rel=1e-12)
    assert r.constant_estimate == pytest.approx(1.0)
    assert r.holds


def test_loomis_whitney_random_clouds(rng):
    lw = catalog.loomis_whitney()
    verdict = check_perceptivity(lw, 0.3)
    for _ in range(5):
        c = random_cloud(rng, 3, 400)
        for delta in (0.3, 0.1, 0.03):
            r = visual_check(lw, c, delta, 0.3, perceptivity=verdict)
            assert r.holds


def test_constant_form_values():
    assert constant_form(catalog.coordinate_lines(2), 0.0) == pytest.approx(1.0)
    lw = catalog.loomis_whitney()
    assert constant_form(lw, 1.0) == pytest.approx(2.5**0.5 * 2**1.5)


def test_visual_rejects_non_projectors_and_refuted():
    y = catalog.young()
    with pytest.raises(InvalidInput, match="projector"):
        visual_check(y, PointCloud([[0.0, 0.0]]), 0.5, 0.3)
    lines = catalog.coordinate_lines(2)
    with pytest.raises(InvalidInput, match="REFUTED"):
        visual_check(lines, grid_cloud(4, 2), 0.25, 0.9)
    with pytest.raises(InvalidInput):
        visual_check(lines, grid_cloud(4, 3), 0.25, 0.5)


def test_visual_requires_beta_for_missing_directions():
    line = Datum.from_projectors([Subspace.coordinate(2, [1])], [1.0])
    with pytest.raises(InvalidInput):
        visual_check(line, grid_cloud(8, 2, 1), 1 / 8, 0.5, beta=0.0)
    r = visual_check(line, grid_cloud(8, 2, 1), 1 / 8, 0.5, beta=1.0)
    assert r.holds


@pytest.mark.parametrize("d, k", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_slab_slope(d, k):
    slope, reports = slab_experiment(d, k)
    assert abs(slope - k) <= 0.15
    assert all(r.holds for r in reports)


def test_fit_slope():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert fit_slope(x, 3 * x**1.5) == pytest.approx(1.5)
    assert math.isfinite(fit_slope(x, x))
