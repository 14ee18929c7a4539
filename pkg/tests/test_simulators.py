import math

import numpy as np
import pytest

from eccmark.geometry import Window
from eccmark.simulators import (CHECKERBOARD, CLUSTER_MEANS, GRF_KRIGING,
                                HARDCORE, HPP, IID_UNIFORM, SINUSOID, THOMAS,
                                MarkModel, SpatialModel, cvl_discrepancy,
                                grf_lattice, kernel_intensity,
                                rescale_to_range, sample_inhomogeneous_poisson,
                                select_bandwidth_cvl, simulate_marks,
                                simulate_spatial)

WIN = Window(0.0, 10.0, 0.0, 10.0)


def min_pairwise(pts):
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    iu = np.triu_indices(pts.shape[0], 1)
    return float(d[iu].min())


def test_hpp_conditioned_count_and_window():
    pts = simulate_spatial(SpatialModel(HPP, WIN, rate=0.8), n_target=80, seed=0)
    assert pts.shape == (80, 2)
    assert np.all((pts >= 0) & (pts <= 10))


def test_hpp_unconditioned_poisson_count():
    counts = [simulate_spatial(SpatialModel(HPP, WIN, rate=0.8), seed=s).shape[0]
              for s in range(40)]
    assert 60 < np.mean(counts) < 100  # mean 80


def test_hardcore_min_separation_exact():
    pts = simulate_spatial(SpatialModel(HARDCORE, WIN, delta=0.9), n_target=80, seed=1)
    assert pts.shape == (80, 2)
    assert min_pairwise(pts) >= 0.9


def test_hardcore_infeasible_names_budget(monkeypatch):
    import eccmark.simulators as sim

    monkeypatch.setattr(sim, "HARDCORE_PROPOSAL_BUDGET", 500)
    with pytest.raises(ValueError, match="500-proposal budget"):
        simulate_spatial(SpatialModel(HARDCORE, WIN, delta=4.0), n_target=50, seed=2)


def test_thomas_zero_sigma_collapses_to_parents():
    pts, labels = simulate_spatial(SpatialModel(THOMAS, WIN, kappa=0.05, mu=8.0, sigma=0.0),
                                   seed=3, return_labels=True)
    if pts.shape[0] > 1:
        for lab in np.unique(labels):
            group = pts[labels == lab]
            assert np.all(group == group[0])  # offspring sit on their parent


def test_thomas_hits_target_count():
    pts, labels = simulate_spatial(SpatialModel(THOMAS, WIN), n_target=80, seed=4,
                                   return_labels=True)
    assert pts.shape == (80, 2)
    assert labels.shape == (80,)
    assert np.unique(labels).size >= 2


def test_thomas_displacement_moments():
    model = SpatialModel(THOMAS, Window(0, 50, 0, 50), kappa=0.02, mu=30.0, sigma=0.7)
    rng = np.random.default_rng(5)
    devs = []
    for _ in range(30):
        pts, labels = simulate_spatial(model, seed=rng, return_labels=True)
        for lab in np.unique(labels):
            group = pts[labels == lab]
            if group.shape[0] >= 3:
                devs.append(group - group.mean(axis=0))
    devs = np.concatenate(devs)
    assert abs(devs.mean()) < 3 * 0.7 / math.sqrt(devs.size)
    assert 0.45 < devs.std() < 0.95  # sd ~ sigma, deflated by windowing


def test_iid_uniform_range():
    marks = simulate_marks(MarkModel(IID_UNIFORM, lo=0, hi=8), np.zeros((500, 2)) + 5, seed=0)
    assert marks.min() >= 0 and marks.max() <= 8
    assert 3.0 < marks.mean() < 5.0


def test_checkerboard_block_parity():
    model = MarkModel(CHECKERBOARD, cell=2.5, low=0.0, high=8.0, noise_sd=0.01)
    marks = simulate_marks(model, np.array([[1.0, 1.0], [3.0, 1.0]]), seed=1)
    assert abs(marks[0] - 0.0) < 0.1   # b = 0, even
    assert abs(marks[1] - 8.0) < 0.1   # b = 1, odd


def test_sinusoid_origin_value():
    model = MarkModel(SINUSOID, amplitude=4, shift=4, noise_sd=0.0)
    marks = simulate_marks(model, np.array([[0.0, 0.0]]), seed=2)
    assert marks[0] == pytest.approx(4.0)


def test_sinusoid_clipped_range():
    model = MarkModel(SINUSOID, noise_sd=0.0)
    rng = np.random.default_rng(3)
    marks = simulate_marks(model, rng.uniform(0, 10, (300, 2)), seed=3)
    assert marks.min() >= 0.0 and marks.max() <= 8.0


def test_cluster_means_alternate():
    model = MarkModel(CLUSTER_MEANS, levels=(0.0, 8.0), noise_sd=0.01)
    labels = np.array([0, 0, 1, 1, 2, 3])
    marks = simulate_marks(model, np.zeros((6, 2)) + 5, seed=4, labels=labels)
    assert np.allclose(marks[[0, 1, 4]], 0.0, atol=0.1)
    assert np.allclose(marks[[2, 3, 5]], 8.0, atol=0.1)
    with pytest.raises(ValueError, match="labels"):
        simulate_marks(model, np.zeros((6, 2)) + 5, seed=4)


def test_grf_kriging_interpolates_lattice():
    # with a tiny nugget the kriged surface nearly reproduces the field at
    # the lattice nodes; evaluate there and compare against the raw draw
    model = MarkModel(GRF_KRIGING, rho=9.0, nugget=0.001, grid_dim=10)
    nodes = grf_lattice(WIN, 10)
    from eccmark._util import rng_for, STREAM_MARKS

    diff = nodes[:, None, :] - nodes[None, :, :]
    cov = np.exp(-np.sqrt((diff ** 2).sum(-1)) / 9.0)
    cov[np.diag_indices_from(cov)] += 0.001
    z = np.linalg.cholesky(cov) @ rng_for(7, STREAM_MARKS).standard_normal(100)

    marks = simulate_marks(model, nodes, seed=7, window=WIN)
    scaled = rescale_to_range(z, 0.0, 8.0)
    assert np.allclose(marks, scaled, atol=0.05)


def test_grf_kriging_smooth_field():
    rng = np.random.default_rng(8)
    pts = rng.uniform(0, 10, (80, 2))
    marks = simulate_marks(MarkModel(GRF_KRIGING), pts, seed=8, window=WIN)
    assert marks.min() == 0.0 and marks.max() == 8.0  # rescaled to the full range
    # nearby points get similar marks under a long-range field
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    iu = np.triu_indices(80, 1)
    gaps = np.abs(marks[:, None] - marks[None, :])[iu]
    close = d[iu] < 1.0
    assert gaps[close].mean() < gaps[~close].mean()


def test_rescale_constant_field_midpoint():
    out = rescale_to_range(np.full(5, 2.7), 0.0, 8.0)
    assert np.all(out == 4.0)


def test_generators_deterministic():
    for model in (SpatialModel(HPP, WIN), SpatialModel(THOMAS, WIN),
                  SpatialModel(HARDCORE, WIN, delta=0.9)):
        a = simulate_spatial(model, n_target=40, seed=11)
        b = simulate_spatial(model, n_target=40, seed=11)
        assert np.array_equal(a, b)
    marks_a = simulate_marks(MarkModel(IID_UNIFORM), np.zeros((9, 2)) + 3, seed=12)
    marks_b = simulate_marks(MarkModel(IID_UNIFORM), np.zeros((9, 2)) + 3, seed=12)
    assert np.array_equal(marks_a, marks_b)


def test_kernel_intensity_normalized_integral():
    rng = np.random.default_rng(13)
    pts = rng.uniform(0, 10, (80, 2))
    grid = kernel_intensity(pts, WIN, bandwidth=1.5)
    assert grid.integral() == pytest.approx(80.0, rel=1e-9)
    assert grid.values.min() >= 0.0


def test_kernel_intensity_single_point_mass():
    # raw kernel mass over the plane is 1; with the point centered and a
    # small bandwidth the window keeps essentially all of it
    grid = kernel_intensity(np.array([[5.0, 5.0]]), WIN, bandwidth=0.5)
    assert grid.integral() == pytest.approx(1.0, rel=1e-9)
    assert grid.bandwidth == 0.5


def test_cvl_two_far_points_closed_form():
    pts = np.array([[1.0, 1.0], [9.0, 9.0]])
    h = 0.1
    # isolated points: lambda at each is phi_h(0) = 1/(2 pi h^2)
    lam0 = 1.0 / (2 * math.pi * h * h)
    expected = abs(2.0 / lam0 - WIN.area)
    assert cvl_discrepancy(pts, WIN, h) == pytest.approx(expected, rel=1e-6)


def test_cvl_selected_bandwidth_interior():
    lo = 0.05 * WIN.diagonal
    hi = 5.0 * WIN.diagonal
    interior = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 10, (80, 2))
        h = select_bandwidth_cvl(pts, WIN)
        if lo * 1.0001 < h < hi * 0.9999:
            interior += 1
    assert interior >= 9  # >= 90% of seeds


def test_ipp_thinning_count():
    rng = np.random.default_rng(14)
    pts = rng.uniform(0, 10, (80, 2))
    grid = kernel_intensity(pts, WIN, bandwidth=1.2)
    total = grid.integral()
    counts = [sample_inhomogeneous_poisson(grid, np.random.default_rng(s)).shape[0]
              for s in range(50)]
    assert abs(np.mean(counts) - total) < 3 * math.sqrt(total / 50)


def test_model_validation():
    with pytest.raises(ValueError):
        SpatialModel("weird", WIN)
    with pytest.raises(ValueError):
        SpatialModel(HPP, WIN, rate=-1)
    with pytest.raises(ValueError):
        MarkModel(IID_UNIFORM, lo=5, hi=5)
    with pytest.raises(ValueError):
        MarkModel(CHECKERBOARD, cell=0)
    with pytest.raises(ValueError):
        kernel_intensity(np.zeros((0, 2)), WIN)
