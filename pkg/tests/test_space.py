"""Tests for spaces, grids, balls, and constant estimation."""

import json

import numpy as np
import pytest

import besovext as bx

import oracles
from conftest import random_cloud, unit_square


def test_grid_counts_and_measure():
    space = bx.build_grid(0.5, ([0.0, 0.0], [1.0, 1.0]))
    assert space.n_points == 9
    assert np.allclose(space.weights, 0.25)
    assert space.total_measure == pytest.approx(2.25, abs=0.0)


def test_grid_one_dimensional():
    space = bx.build_grid(1.0, ([0.0], [1.0]))
    assert space.n_points == 2
    assert np.allclose(space.weights, 1.0)


def test_grid_empty_region_raises():
    nothing = bx.Region("nothing", lambda pts: np.zeros(len(pts), dtype=bool), {})
    with pytest.raises(bx.GeometryError):
        bx.build_grid(0.5, ([0.0, 0.0], [1.0, 1.0]), region=nothing)


def test_geometry_error_is_value_error():
    assert issubclass(bx.GeometryError, ValueError)


def test_ball_worked_examples():
    space = bx.build_grid(0.5, ([0.0], [1.0]))
    assert space.n_points == 3
    assert sorted(space.ball(1, 0.6).tolist()) == [0, 1, 2]
    assert space.ball(0, 0.5).tolist() == [0]


def test_ball_center_always_included():
    space = bx.build_grid(0.5, ([0.0], [1.0]))
    assert space.ball(2, 0.0).tolist() == [2]
    assert space.ball(2, -1.0).tolist() == [2]


def test_ball_matches_linear_scan():
    rng = np.random.default_rng(100)
    spaces = [random_cloud(rng, 40), unit_square(0.25)]
    for space in spaces:
        for _ in range(40):
            x = int(rng.integers(space.n_points))
            r = float(rng.uniform(0.0, 1.6))
            got = sorted(space.ball(x, r).tolist())
            assert got == oracles.ball_members(space, x, r)


def test_ball_monotone_in_radius():
    rng = np.random.default_rng(101)
    space = random_cloud(rng, 30)
    x = 7
    prev = set()
    for r in np.linspace(0.0, 2.0, 25):
        cur = set(space.ball(x, float(r)).tolist())
        assert prev <= cur
        prev = cur


def test_distance_table_space():
    d = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
    space = bx.MetricMeasureSpace(distances=d, weights=np.ones(3))
    assert sorted(space.ball(1, 1.5).tolist()) == [0, 1, 2]
    assert space.diameter == pytest.approx(2.0)
    assert space.min_gap == pytest.approx(1.0)


def test_distance_table_must_be_symmetric():
    d = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError):
        bx.MetricMeasureSpace(distances=d, weights=np.ones(2))


def test_weights_must_be_positive():
    with pytest.raises(ValueError):
        bx.MetricMeasureSpace(points=np.zeros((2, 1)), weights=np.array([1.0, 0.0]))


def test_grid_doubling_sanity():
    h = 1.0 / 8.0
    space = unit_square(h)
    dim = 2
    rng = np.random.default_rng(5)
    centers = rng.choice(space.n_points, 20, replace=False)
    for r in [4 * h, 6 * h, 0.4]:
        bound = 2.0 ** dim * (1.0 + 10.0 * h / r) ** dim
        for x in centers:
            small = space.weights[space.ball(int(x), r)].sum()
            big = space.weights[space.ball(int(x), 2 * r)].sum()
            assert big / small <= bound


def test_estimate_constants_two_dimensional():
    space = unit_square(1.0 / 16.0)
    consts = bx.estimate_constants(space, np.geomspace(0.125, 0.4, 8))
    assert 1.7 <= consts.dimension <= 2.2
    assert 1.0 <= consts.doubling <= 8.0


def test_estimate_constants_one_dimensional():
    space = bx.build_grid(1.0 / 64.0, ([0.0], [1.0]))
    consts = bx.estimate_constants(space, np.geomspace(0.05, 0.4, 8))
    assert 0.75 <= consts.dimension <= 1.25
    assert 1.0 <= consts.doubling <= 4.0


def test_estimate_constants_needs_two_radii():
    space = unit_square(0.25)
    with pytest.raises(ValueError):
        bx.estimate_constants(space, [0.3])
    with pytest.raises(ValueError):
        bx.estimate_constants(space, [0.3, 0.3])


def test_subset_and_induced_space():
    space = unit_square(0.25)
    mask = space.subset(bx.box_region([0.0, 0.0], [0.5, 0.5]))
    assert mask.size == 9
    assert mask.measure == pytest.approx(9 * 0.0625)
    inner = mask.induced_space()
    assert inner.n_points == mask.size
    assert inner.total_measure == pytest.approx(mask.measure)
    assert inner.min_gap >= space.min_gap - 1e-12


def test_subset_complement_partitions():
    space = unit_square(0.25)
    mask = space.subset(bx.disc_region([0.5, 0.5], 0.3))
    comp = mask.complement()
    assert mask.size + comp.size == space.n_points
    assert not np.any(mask.members & comp.members)


def test_subset_from_boolean_array():
    space = unit_square(0.5)
    members = np.zeros(space.n_points, dtype=bool)
    members[[0, 4]] = True
    mask = space.subset(members)
    assert mask.indices.tolist() == [0, 4]


def test_distance_to_mask():
    space = bx.build_grid(0.5, ([0.0], [2.0]))
    mask = space.subset(bx.box_region([0.0], [0.5]))
    dist = bx.distance_to_mask(space, mask)
    assert np.allclose(dist, [0.0, 0.0, 0.5, 1.0, 1.5])


def test_lattice_offsets_open_versus_closed():
    space = unit_square(0.5)
    offs_open, norms_open = bx.lattice_offsets(space.grid, 0.6)
    offs_closed, _ = bx.lattice_offsets(space.grid, 0.5 * np.sqrt(2.0), closed=True)
    got = {tuple(m) for m in offs_open}
    assert got == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    assert np.all(norms_open <= 0.6)
    assert {tuple(m) for m in offs_closed} == {
        (0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_load_domain_grid_and_cloud(tmp_path):
    spec = {"kind": "grid", "spacing": 0.5, "bbox": [[0.0, 0.0], [1.0, 1.0]]}
    space = bx.load_domain(spec)
    assert space.n_points == 9
    path = tmp_path / "domain.json"
    path.write_text(json.dumps(spec))
    again = bx.load_domain(path)
    assert again.n_points == 9
    cloud = bx.load_domain({
        "kind": "cloud",
        "points": [[0.0, 0.0], [1.0, 0.0]],
        "weights": [1.0, 2.0],
    })
    assert cloud.n_points == 2
    assert cloud.total_measure == pytest.approx(3.0)


def test_load_domain_rejects_unknown_kind():
    with pytest.raises(ValueError):
        bx.load_domain({"kind": "mesh"})


def test_diameter_and_min_gap_blockwise():
    rng = np.random.default_rng(3)
    space = random_cloud(rng, 60)
    dists = [oracles.pair_distance(space, i, j)
             for i in range(60) for j in range(i + 1, 60)]
    assert space.diameter == pytest.approx(max(dists), rel=1e-12)
    assert space.min_gap == pytest.approx(min(dists), rel=1e-12)
