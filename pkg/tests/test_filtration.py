import math

import numpy as np
import pytest

from eccmark.filtration import (betti_curves,
                                build_filtration, compute_persistence,
                                curve_to_csv, default_grid, diagram_from_matrix,
                                diagram_to_csv, ecc_from_matrix, log_grid,
                                mst_max_edge, stabilized_epsilon_max)

from oracle import betti_brute, euler_brute, random_pattern

SQRT2 = math.sqrt(2.0)


def dist(points):
    pts = np.asarray(points, float)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, 0.0)
    return d


UNIT_SQUARE = dist([(0, 0), (1, 0), (1, 1), (0, 1)])
EQUILATERAL = dist([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])


def test_build_filtration_two_points():
    f = build_filtration(dist([(0, 0), (3, 0)]), 5.0)
    dims = [s.dim for s in f.simplices]
    assert dims.count(0) == 2 and dims.count(1) == 1 and dims.count(2) == 0
    assert f.simplices[-1].value == 3.0


def test_build_filtration_equilateral():
    f = build_filtration(EQUILATERAL, 2.0)
    by_dim = {d: [s for s in f.simplices if s.dim == d] for d in (0, 1, 2)}
    assert len(by_dim[0]) == 3 and len(by_dim[1]) == 3 and len(by_dim[2]) == 1
    assert by_dim[2][0].value == pytest.approx(1.0)


def test_build_filtration_unit_square_truncated():
    # at 1.2 the sides are in, the sqrt(2) diagonals are not
    f = build_filtration(UNIT_SQUARE, 1.2)
    dims = [s.dim for s in f.simplices]
    assert dims.count(0) == 4 and dims.count(1) == 4 and dims.count(2) == 0
    assert all(s.value == 1.0 for s in f.simplices if s.dim == 1)


def test_filtration_order_faces_first():
    rng = np.random.default_rng(0)
    d = random_pattern(rng, 7)
    f = build_filtration(d, float(d.max()) + 1.0)
    position = {s.vertices: i for i, s in enumerate(f.simplices)}
    for s in f.simplices:
        if s.dim > 0:
            for omit in range(len(s.vertices)):
                face = s.vertices[:omit] + s.vertices[omit + 1:]
                assert position[face] < position[s.vertices]
    keys = [(s.value, s.dim, s.vertices) for s in f.simplices]
    assert keys == sorted(keys)


def test_build_filtration_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        build_filtration(UNIT_SQUARE, np.inf)
    with pytest.raises(ValueError):
        build_filtration(UNIT_SQUARE, -1.0)


def test_persistence_isolated_points():
    d = dist([(0, 0), (5, 0), (0, 5)])
    diag = diagram_from_matrix(d, 1.0)  # below every pairwise distance
    assert diag.pairs_dim0.shape == (3, 2)
    assert np.all(np.isinf(diag.pairs_dim0[:, 1]))
    assert diag.pairs_dim1.shape[0] == 0


def test_persistence_unit_square_loop():
    diag = diagram_from_matrix(UNIT_SQUARE, 2.0)
    assert diag.pairs_dim1.shape == (1, 2)
    birth, death = diag.pairs_dim1[0]
    assert birth == 1.0
    assert death == pytest.approx(SQRT2, rel=1e-15)
    # oracle check at scales bracketing the feature
    for eps, expected in ((0.9, (4, 0)), (1.1, (1, 1)), (1.5, (1, 0))):
        assert betti_brute(UNIT_SQUARE, eps) == expected
        curve = betti_curves(diag, np.array([eps]))
        assert (curve.beta0[0], curve.beta1[0]) == expected


def test_persistence_equilateral_zero_persistence_dropped():
    diag = diagram_from_matrix(EQUILATERAL, 2.0)
    deaths = np.sort(diag.pairs_dim0[:, 1])
    assert deaths[0] == pytest.approx(1.0) and deaths[1] == pytest.approx(1.0)
    assert np.isinf(deaths[2])
    assert diag.pairs_dim1.shape[0] == 0  # triangle fills the loop at its birth


def test_compute_persistence_matches_matrix_path():
    rng = np.random.default_rng(1)
    for _ in range(10):
        d = random_pattern(rng, 7)
        eps = float(np.quantile(d[np.triu_indices(7, 1)], 0.7))
        f = build_filtration(d, eps)
        a = compute_persistence(f)
        b = diagram_from_matrix(d, eps)
        assert np.array_equal(a.pairs_dim0, b.pairs_dim0)
        assert np.array_equal(a.pairs_dim1, b.pairs_dim1)


def test_compute_persistence_validates_order():
    bad = build_filtration(UNIT_SQUARE, 2.0)
    shuffled = type(bad)([bad.simplices[-1]] + bad.simplices[:-1], bad.n, bad.epsilon_max)
    with pytest.raises(ValueError):
        compute_persistence(shuffled)


def test_betti_curves_at_zero_and_beyond():
    rng = np.random.default_rng(2)
    d = random_pattern(rng, 9, marked=False)
    end = stabilized_epsilon_max(d)
    curve = ecc_from_matrix(d, np.linspace(0, end, 50))
    assert curve.beta0[0] == 9 and curve.beta1[0] == 0 and curve.chi[0] == 9
    assert curve.beta0[-1] == 1 and curve.beta1[-1] == 0 and curve.chi[-1] == 1
    assert np.all(np.diff(curve.beta0) <= 0)  # beta0 never increases
    assert np.all(curve.chi == curve.beta0 - curve.beta1)


def test_betti_curves_unit_square_values():
    diag = diagram_from_matrix(UNIT_SQUARE, 2.0)
    c = betti_curves(diag, np.array([0.0, 1.2, 1.9]))
    assert list(c.beta0) == [4, 1, 1]
    assert list(c.beta1) == [0, 1, 0]
    assert list(c.chi) == [4, 0, 1]


def test_betti_curves_rejects_bad_grid():
    diag = diagram_from_matrix(UNIT_SQUARE, 2.0)
    with pytest.raises(ValueError):
        betti_curves(diag, np.array([0.0, 0.0, 1.0]))


def test_beta0_one_at_mst_max():
    rng = np.random.default_rng(3)
    d = random_pattern(rng, 12)
    top = mst_max_edge(d)
    curve = ecc_from_matrix(d, np.array([top]), epsilon_max=top)
    assert curve.beta0[0] == 1


def test_oracle_equivalence_small_patterns():
    rng = np.random.default_rng(4)
    for _ in range(25):
        n = int(rng.integers(3, 9))
        d = random_pattern(rng, n)
        end = stabilized_epsilon_max(d)
        grid = np.linspace(0, end, 8)
        curve = ecc_from_matrix(d, grid)
        for t, eps in enumerate(grid):
            b0, b1 = betti_brute(d, eps)
            assert (curve.beta0[t], curve.beta1[t]) == (b0, b1)


def test_euler_identity_on_generic_instances():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d = random_pattern(rng, 7, marked=False)
        eps = float(np.quantile(d[np.triu_indices(7, 1)], 0.5))
        vet, beta2 = euler_brute(d, eps)
        b0, b1 = betti_brute(d, eps)
        assert b0 - b1 == vet - beta2


def test_constant_marks_match_euclidean():
    rng = np.random.default_rng(6)
    pts = rng.uniform(0, 10, (20, 2))
    d = dist(pts)
    dm = d * np.exp(np.abs(np.full(20, 3.3)[:, None] - np.full(20, 3.3)[None, :]))
    assert np.array_equal(d, dm)
    grid = default_grid(d, 40)
    a = ecc_from_matrix(d, grid)
    b = ecc_from_matrix(dm, grid)
    assert np.array_equal(a.chi, b.chi)


def test_default_grid_examples():
    two = dist([(0, 0), (10, 0)])
    assert np.allclose(default_grid(two, 3), [0.0, 6.0, 12.0])
    single = np.zeros((1, 1))
    assert np.allclose(default_grid(single, 2), [0.0, 1.0])
    collinear = dist([(0, 0), (1, 0), (2, 0)])
    assert default_grid(collinear, 5)[-1] == pytest.approx(1.2)


def test_log_grid_properties():
    rng = np.random.default_rng(7)
    d = random_pattern(rng, 15)
    g = log_grid(d, stabilized_epsilon_max(d), 60)
    assert g[0] == 0.0 and g.size == 60
    assert np.all(np.diff(g) > 0)
    pos = d[np.triu_indices(15, 1)]
    assert g[1] <= pos[pos > 0].min()


def test_stabilized_end_closes_open_loops():
    # circle: connectivity comes long before the big loop fills
    theta = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    d = dist(np.column_stack([np.cos(theta), np.sin(theta)]))
    end = stabilized_epsilon_max(d)
    curve = ecc_from_matrix(d, np.array([end]), epsilon_max=end)
    assert curve.chi[0] == 1
    assert end > 1.2 * mst_max_edge(d)


def test_diagram_csv_format(tmp_path):
    diag = diagram_from_matrix(UNIT_SQUARE, 2.0)
    path = tmp_path / "diag.csv"
    diagram_to_csv(diag, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "dim,birth,death"
    assert any(line.endswith(",inf") for line in lines[1:])
    assert any(line.startswith("1,1,") for line in lines[1:])


def test_curve_csv_format(tmp_path):
    c = ecc_from_matrix(UNIT_SQUARE, np.array([0.0, 1.2]), epsilon_max=2.0)
    path = tmp_path / "curve.csv"
    curve_to_csv(c, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "epsilon,beta0,beta1,chi"
    assert lines[1] == "0,4,0,4"
