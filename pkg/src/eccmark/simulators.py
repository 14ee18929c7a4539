"""Spatial point process generators, mark models, and kernel intensity.

Spatial models: homogeneous Poisson (optionally conditioned on the count),
Thomas cluster (Poisson parents, Gaussian offspring), hard-core inhibition
by sequential dart throwing, and inhomogeneous Poisson by thinning against
a raster intensity.  Mark models: iid uniform, kriged Gaussian random field,
alternating cluster means, a deterministic sinusoidal field, and an
alternating-block checkerboard.  All generators are pure functions of
(model, seed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import STREAM_MARKS, STREAM_PATTERN, rng_for
from .geometry import Window

HPP = "hpp"
THOMAS = "thomas"
HARDCORE = "hardcore"
IPP = "ipp"

IID_UNIFORM = "iid_uniform"
GRF_KRIGING = "grf_kriging"
CLUSTER_MEANS = "cluster_means"
SINUSOID = "sinusoid"
CHECKERBOARD = "checkerboard"

HARDCORE_PROPOSAL_BUDGET = 1_000_000
THOMAS_RESAMPLE_BUDGET = 100_000
CVL_CANDIDATES = 32
CVL_DIAG_FRACTIONS = (0.05, 5.0)
INTENSITY_RESOLUTION = 128


@dataclass(frozen=True)
class SpatialModel:
    """Tagged spatial process; only the fields of its tag are read."""

    tag: str
    window: Window
    rate: float = 1.0              # hpp intensity
    kappa: float = 0.08            # thomas: parents per unit area
    mu: float = 10.0               # thomas: mean offspring per parent
    sigma: float = 0.7             # thomas: offspring displacement sd
    lambda_proposal: float = 2.0   # hardcore: proposal intensity when unconditioned
    delta: float = 0.9             # hardcore: minimum separation
    intensity: "IntensityGrid | None" = None  # ipp

    def __post_init__(self):
        if self.tag not in (HPP, THOMAS, HARDCORE, IPP):
            raise ValueError(f"unknown spatial model {self.tag!r}")
        for name in ("rate", "kappa", "mu", "lambda_proposal"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma < 0 or self.delta < 0:
            raise ValueError("sigma and delta must be nonnegative")
        if self.tag == IPP and self.intensity is None:
            raise ValueError("ipp model needs an intensity grid")


@dataclass(frozen=True)
class MarkModel:
    """Tagged mark mechanism; only the fields of its tag are read."""

    tag: str
    lo: float = 0.0
    hi: float = 8.0
    rho: float = 9.0               # grf: exponential covariance range
    nugget: float = 0.001          # grf: diagonal inflation
    grid_dim: int = 20             # grf: lattice nodes per axis
    levels: tuple = (0.0, 8.0)     # cluster means
    noise_sd: float = 0.0
    amplitude: float = 4.0         # sinusoid
    shift: float = 4.0
    px: float = 12.0 * math.pi / 4.5
    py: float = 2.0 * math.pi / 2.5
    cell: float = 2.5              # checkerboard block width
    low: float = 0.0
    high: float = 8.0

    def __post_init__(self):
        if self.tag not in (IID_UNIFORM, GRF_KRIGING, CLUSTER_MEANS, SINUSOID, CHECKERBOARD):
            raise ValueError(f"unknown mark model {self.tag!r}")
        if not self.lo < self.hi:
            raise ValueError("mark range needs lo < hi")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if self.cell <= 0:
            raise ValueError("cell must be positive")
        if self.grid_dim < 2:
            raise ValueError("grid_dim must be at least 2")


@dataclass(frozen=True)
class IntensityGrid:
    """Piecewise-constant raster intensity over a window."""

    values: np.ndarray  # (resolution, resolution), row iy, column ix
    bandwidth: float
    window: Window

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError("intensity raster must be square")
        if (vals < 0).any():
            raise ValueError("intensity must be nonnegative")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @property
    def cell_area(self) -> float:
        res = self.resolution
        w = self.window
        return ((w.x_max - w.x_min) / res) * ((w.y_max - w.y_min) / res)

    def integral(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def at(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        res = self.resolution
        w = self.window
        ix = np.clip(((pts[:, 0] - w.x_min) / (w.x_max - w.x_min) * res).astype(int), 0, res - 1)
        iy = np.clip(((pts[:, 1] - w.y_min) / (w.y_max - w.y_min) * res).astype(int), 0, res - 1)
        return self.values[iy, ix]


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(int(seed), STREAM_PATTERN)


def _uniform_points(rng, window: Window, count: int) -> np.ndarray:
    xs = rng.uniform(window.x_min, window.x_max, count)
    ys = rng.uniform(window.y_min, window.y_max, count)
    return np.column_stack([xs, ys])


def simulate_spatial(model: SpatialModel, n_target: int | None = None, seed=0,
                     return_labels: bool = False):
    """Draw one realization of a spatial model.

    ``n_target`` conditions on the point count where the model supports it
    (uniform thinning for hpp, realization resampling for thomas, dart count
    for hardcore).  With ``return_labels`` the thomas generator also returns
    each point's parent index (all zeros for the other models).
    """
    rng = _as_rng(seed)
    w = model.window
    if model.tag == HPP:
        count = int(n_target) if n_target is not None else int(rng.poisson(model.rate * w.area))
        pts = _uniform_points(rng, w, count)
        labels = np.zeros(count, dtype=int)
    elif model.tag == THOMAS:
        pts, labels = _simulate_thomas(model, n_target, rng)
    elif model.tag == HARDCORE:
        pts = _simulate_hardcore(model, n_target, rng)
        labels = np.zeros(pts.shape[0], dtype=int)
    elif model.tag == IPP:
        pts = sample_inhomogeneous_poisson(model.intensity, rng)
        labels = np.zeros(pts.shape[0], dtype=int)
    else:  # pragma: no cover
        raise ValueError(model.tag)
    return (pts, labels) if return_labels else pts


def _simulate_thomas(model: SpatialModel, n_target, rng):
    w = model.window
    for _ in range(THOMAS_RESAMPLE_BUDGET):
        n_parents = int(rng.poisson(model.kappa * w.area))
        pts, labels = [], []
        for p in range(n_parents):
            parent = np.array([rng.uniform(w.x_min, w.x_max), rng.uniform(w.y_min, w.y_max)])
            n_off = int(rng.poisson(model.mu))
            if n_off == 0:
                continue
            off = parent + model.sigma * rng.standard_normal((n_off, 2))
            inside = (
                (off[:, 0] >= w.x_min) & (off[:, 0] <= w.x_max)
                & (off[:, 1] >= w.y_min) & (off[:, 1] <= w.y_max)
            )
            off = off[inside]
            pts.append(off)
            labels.extend([p] * off.shape[0])
        pts = np.concatenate(pts) if pts else np.zeros((0, 2))
        labels = np.asarray(labels, dtype=int)
        if n_target is None or pts.shape[0] == int(n_target):
            return pts, labels
    raise ValueError(
        f"thomas: no realization hit n={n_target} within {THOMAS_RESAMPLE_BUDGET} resamples"
    )


def _simulate_hardcore(model: SpatialModel, n_target, rng):
    w = model.window
    if n_target is None:
        proposals = int(rng.poisson(model.lambda_proposal * w.area))
        budget = proposals
        wanted = None
    else:
        budget = HARDCORE_PROPOSAL_BUDGET
        wanted = int(n_target)
    accepted = np.zeros((0, 2))
    used = 0
    chunk = 1024
    d2 = model.delta * model.delta
    while used < budget:
        take = min(chunk, budget - used)
        cand = _uniform_points(rng, w, take)
        used += take
        for row in cand:
            if accepted.shape[0]:
                dx = accepted[:, 0] - row[0]
                dy = accepted[:, 1] - row[1]
                if float(np.min(dx * dx + dy * dy)) < d2:
                    continue
            accepted = np.vstack([accepted, row])
            if wanted is not None and accepted.shape[0] == wanted:
                return accepted
    if wanted is None:
        return accepted
    raise ValueError(
        f"hardcore: only {accepted.shape[0]}/{wanted} points placed within the "
        f"{budget}-proposal budget (delta={model.delta})"
    )


def sample_inhomogeneous_poisson(intensity: IntensityGrid, rng) -> np.ndarray:
    """Thinning sampler: propose at the raster maximum, keep with odds
    ``intensity(u) / max``."""
    w = intensity.window
    lam_max = float(intensity.values.max())
    if lam_max <= 0.0:
        return np.zeros((0, 2))
    count = int(rng.poisson(lam_max * w.area))
    pts = _uniform_points(rng, w, count)
    u = rng.uniform(0.0, 1.0, count)
    keep = u * lam_max <= intensity.at(pts)
    return pts[keep]


# ---------------------------------------------------------------------------
# marks
# ---------------------------------------------------------------------------

def simulate_marks(model: MarkModel, locations, seed=0, window: Window | None = None,
                   labels=None) -> np.ndarray:
    """Draw marks for fixed locations under a mark model.

    ``window`` is required for the kriged field (its lattice covers the
    window); ``labels`` are required for cluster means.
    """
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(int(seed), STREAM_MARKS)
    pts = np.asarray(locations, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if model.tag == IID_UNIFORM:
        return rng.uniform(model.lo, model.hi, n)
    if model.tag == GRF_KRIGING:
        if window is None:
            raise ValueError("grf_kriging needs the window to place its lattice")
        return _kriged_field_marks(model, pts, window, rng)
    if model.tag == CLUSTER_MEANS:
        if labels is None:
            raise ValueError("cluster_means needs cluster labels from the thomas generator")
        labels = np.asarray(labels, dtype=int)
        if labels.shape != (n,):
            raise ValueError(f"{n} points but {labels.size} labels")
        levels = np.asarray(model.levels, dtype=float)
        base = levels[labels % len(levels)]
        return base + rng.normal(0.0, model.noise_sd, n)
    if model.tag == SINUSOID:
        field = model.amplitude * np.sin(model.px * pts[:, 0]) * np.cos(model.py * pts[:, 1])
        field = np.clip(field + model.shift, model.lo, model.hi)
        return field + rng.normal(0.0, model.noise_sd, n)
    if model.tag == CHECKERBOARD:
        block = np.floor(pts[:, 0] / model.cell) + np.floor(pts[:, 1] / model.cell)
        base = np.where(block.astype(int) % 2 == 0, model.low, model.high)
        return base + rng.normal(0.0, model.noise_sd, n)
    raise ValueError(model.tag)  # pragma: no cover


def grf_lattice(window: Window, grid_dim: int) -> np.ndarray:
    gx = np.linspace(window.x_min, window.x_max, grid_dim)
    gy = np.linspace(window.y_min, window.y_max, grid_dim)
    xx, yy = np.meshgrid(gx, gy)
    return np.column_stack([xx.ravel(), yy.ravel()])


def _kriged_field_marks(model: MarkModel, pts, window, rng) -> np.ndarray:
    nodes = grf_lattice(window, model.grid_dim)
    diff = nodes[:, None, :] - nodes[None, :, :]
    cov = np.exp(-np.sqrt((diff ** 2).sum(-1)) / model.rho)
    cov[np.diag_indices_from(cov)] += model.nugget
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError(
            "lattice covariance is not positive definite; increase the nugget"
        ) from None
    z = chol @ rng.standard_normal(nodes.shape[0])
    cross = np.exp(
        -np.sqrt(((pts[:, None, :] - nodes[None, :, :]) ** 2).sum(-1)) / model.rho
    )
    field = cross @ np.linalg.solve(cov, z)
    return rescale_to_range(field, model.lo, model.hi)


def rescale_to_range(values, lo: float, hi: float) -> np.ndarray:
    """Affine map onto [lo, hi]; a constant field lands on the midpoint."""
    v = np.asarray(values, dtype=float)
    span = float(v.max() - v.min()) if v.size else 0.0
    if span == 0.0:
        return np.full_like(v, (lo + hi) / 2.0)
    return lo + (v - v.min()) * (hi - lo) / span


# ---------------------------------------------------------------------------
# kernel intensity with reciprocal-intensity bandwidth selection
# ---------------------------------------------------------------------------

def cvl_discrepancy(locations, window: Window, bandwidth: float) -> float:
    """|sum_i 1 / lambda_h(x_i) - area|, the bandwidth selection objective."""
    lam = _gaussian_kde_at(locations, locations, bandwidth)
    return abs(float(np.sum(1.0 / lam)) - window.area)


def select_bandwidth_cvl(locations, window: Window) -> float:
    """Pick the candidate bandwidth minimizing the reciprocal-intensity
    discrepancy over a log-spaced sweep of window-diagonal fractions."""
    lo, hi = CVL_DIAG_FRACTIONS
    candidates = np.geomspace(lo * window.diagonal, hi * window.diagonal, CVL_CANDIDATES)
    scores = [cvl_discrepancy(locations, window, h) for h in candidates]
    return float(candidates[int(np.argmin(scores))])


def kernel_intensity(locations, window: Window, bandwidth="auto",
                     resolution: int = INTENSITY_RESOLUTION) -> IntensityGrid:
    """Gaussian kernel intensity raster, normalized to integrate to n.

    Without boundary correction the raw estimate leaks kernel mass outside
    the window; the global renormalization restores ``integral == n`` so
    Poisson resamples match the observed count in expectation.
    """
    pts = np.asarray(locations, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("kernel intensity needs at least one point")
    h = select_bandwidth_cvl(pts, window) if bandwidth == "auto" else float(bandwidth)
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    cx = window.x_min + (np.arange(resolution) + 0.5) * (window.x_max - window.x_min) / resolution
    cy = window.y_min + (np.arange(resolution) + 0.5) * (window.y_max - window.y_min) / resolution
    xx, yy = np.meshgrid(cx, cy)
    centers = np.column_stack([xx.ravel(), yy.ravel()])
    values = _gaussian_kde_at(centers, pts, h).reshape(resolution, resolution)
    cell_area = ((window.x_max - window.x_min) / resolution) * (
        (window.y_max - window.y_min) / resolution
    )
    total = float(values.sum() * cell_area)
    if total > 0:
        values = values * (pts.shape[0] / total)
    return IntensityGrid(values, h, window)


def _gaussian_kde_at(eval_points, data_points, h: float) -> np.ndarray:
    ev = np.asarray(eval_points, dtype=float).reshape(-1, 2)
    da = np.asarray(data_points, dtype=float).reshape(-1, 2)
    d2 = ((ev[:, None, :] - da[None, :, :]) ** 2).sum(-1)
    return np.exp(-d2 / (2.0 * h * h)).sum(axis=1) / (2.0 * math.pi * h * h)
