"""Vietoris-Rips 2-skeleton filtrations, persistence, and Euler curves.

Homology is computed over GF(2) and truncated at the 2-skeleton: dimension 0
comes from union-find over the sorted edges, dimension 1 from column
reduction of the triangle boundary matrix.  Higher Betti numbers are not
computed; the Euler characteristic reported everywhere is ``beta0 - beta1``.
Zero-persistence pairs (birth == death) are dropped from diagrams; they can
never satisfy ``birth <= eps < death`` and so never influence a curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernel
from ._kernel import pure as _pure


class Simplex(NamedTuple):
    vertices: tuple
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class Filtration:
    """Simplices sorted by (value, dimension, vertex tuple)."""

    simplices: list
    n: int
    epsilon_max: float


@dataclass(frozen=True)
class PersistenceDiagram:
    """Birth-death pairs per dimension; deaths may be ``inf``.

    All dim-0 births are 0.  In generic position there is one pair per
    vertex; coincident points merge at 0 and their zero-persistence pairs
    are dropped.
    """

    pairs_dim0: np.ndarray
    pairs_dim1: np.ndarray

    def __post_init__(self):
        for name in ("pairs_dim0", "pairs_dim1"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1, 2)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class EulerCurve:
    """beta0, beta1 and chi = beta0 - beta1 sampled on a shared grid."""

    grid: np.ndarray
    beta0: np.ndarray
    beta1: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        for name, dtype in (("grid", float), ("beta0", np.int64),
                            ("beta1", np.int64), ("chi", np.int64)):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def build_filtration(dist, epsilon_max: float) -> Filtration:
    """All vertices, edges and triangles of the VR complex up to ``epsilon_max``.

    Triangles carry the maximum of their three edge values.  The result is
    sorted so every face precedes its cofaces.
    """
    if not (isinstance(epsilon_max, (int, float)) and math.isfinite(epsilon_max)):
        raise ValueError(f"epsilon_max must be finite, got {epsilon_max!r}")
    if epsilon_max <= 0:
        raise ValueError(f"epsilon_max must be positive, got {epsilon_max}")
    dm = _entries(dist)
    n = dm.shape[0]
    ei, ej, ev, ta, tb, tc, tv = _pure.enumerate_complex(dm, float(epsilon_max))
    simplices = [Simplex((i,), 0.0) for i in range(n)]
    simplices.extend(
        Simplex((int(i), int(j)), float(v)) for i, j, v in zip(ei, ej, ev)
    )
    simplices.extend(
        Simplex((int(a), int(b), int(c)), float(v))
        for a, b, c, v in zip(ta, tb, tc, tv)
    )
    simplices.sort(key=lambda s: (s.value, s.dim, s.vertices))
    return Filtration(simplices, n, float(epsilon_max))


def compute_persistence(f: Filtration) -> PersistenceDiagram:
    """Persistence pairing of a filtration by boundary-matrix reduction.

    Dimension 0 equivalently comes from union-find (edges kill components);
    dimension 1 births sit on cycle-creating edges and die on the triangles
    that fill them.
    """
    _validate_filtration(f)
    edges = [s for s in f.simplices if s.dim == 1]
    tris = [s for s in f.simplices if s.dim == 2]
    ei = np.array([s.vertices[0] for s in edges], dtype=np.int32)
    ej = np.array([s.vertices[1] for s in edges], dtype=np.int32)
    ev = np.array([s.value for s in edges], dtype=np.float64)
    ta = np.array([s.vertices[0] for s in tris], dtype=np.int32)
    tb = np.array([s.vertices[1] for s in tris], dtype=np.int32)
    tc = np.array([s.vertices[2] for s in tris], dtype=np.int32)
    tv = np.array([s.value for s in tris], dtype=np.float64)
    deaths0, n_inf0, births1, deaths1 = _pure.reduce_vr(f.n, ei, ej, ev, ta, tb, tc, tv)
    return _diagram_from_pairs(deaths0, n_inf0, births1, deaths1)


def diagram_from_matrix(dist, epsilon_max: float) -> PersistenceDiagram:
    """Fast path from a distance matrix straight to the diagram."""
    dm = _entries(dist)
    deaths0, n_inf0, births1, deaths1 = _kernel.persistence_from_matrix(dm, float(epsilon_max))
    return _diagram_from_pairs(deaths0, n_inf0, births1, deaths1)


def betti_curves(diag: PersistenceDiagram, grid) -> EulerCurve:
    """Count pairs alive at each grid value: ``birth <= eps < death``."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    b0, d0 = diag.pairs_dim0[:, 0], diag.pairs_dim0[:, 1]
    b1, d1 = diag.pairs_dim1[:, 0], diag.pairs_dim1[:, 1]
    beta0 = _alive_counts(b0, d0, grid)
    beta1 = _alive_counts(b1, d1, grid)
    return EulerCurve(grid, beta0, beta1, beta0 - beta1)


def ecc_from_matrix(dist, grid, epsilon_max: float | None = None) -> EulerCurve:
    """Euler curve of a distance matrix on a grid (kernel fast path)."""
    grid = np.asarray(grid, dtype=float)
    if epsilon_max is None:
        epsilon_max = float(grid[-1])
    return betti_curves(diagram_from_matrix(dist, epsilon_max), grid)


def mst_max_edge(dist) -> float:
    """Largest edge of the minimum spanning tree (Kruskal over sorted pairs).

    This is the connectivity threshold: beta0 == 1 for every scale at or
    beyond it.  Returns 0.0 for a single point.
    """
    dm = _entries(dist)
    n = dm.shape[0]
    if n <= 1:
        return 0.0
    iu, ju = np.triu_indices(n, 1)
    vals = dm[iu, ju]
    order = np.lexsort((ju, iu, vals))
    parent = list(range(n))
    merges = 0
    out = 0.0
    for idx in order.tolist():
        a = _pure._find(parent, int(iu[idx]))
        b = _pure._find(parent, int(ju[idx]))
        if a != b:
            parent[b] = a
            out = float(vals[idx])
            merges += 1
            if merges == n - 1:
                break
    return out


def auto_epsilon_max(dist, factor: float = 1.2) -> float:
    """Default truncation scale: ``factor`` times the MST max edge."""
    dm = _entries(dist)
    if dm.shape[0] <= 1:
        return 1.0
    top = mst_max_edge(dm)
    return factor * top if top > 0.0 else 1.0


def stabilized_epsilon_max(dist, factor: float = 1.2) -> float:
    """Smallest convenient scale beyond which chi is identically 1.

    Starts from ``auto_epsilon_max`` and, if any loop is still open there,
    consults the full-complex diagram: past both the connectivity threshold
    and the last dim-1 death, every later scale has beta0 == 1, beta1 == 0.
    """
    dm = _entries(dist)
    n = dm.shape[0]
    if n <= 1:
        return 1.0
    end = auto_epsilon_max(dm, factor)
    diag = diagram_from_matrix(dm, end)
    d1 = diag.pairs_dim1[:, 1]
    if d1.size == 0 or np.isfinite(d1).all():
        return end
    full = diagram_from_matrix(dm, np.inf)
    d1 = full.pairs_dim1[:, 1]
    last_death = float(d1.max()) if d1.size else 0.0
    return max(end, last_death)


def default_grid(dist, k: int = 100) -> np.ndarray:
    """``k`` uniform values from 0 to ``auto_epsilon_max``."""
    if k < 2:
        raise ValueError(f"grid needs at least 2 points, got {k}")
    return np.linspace(0.0, auto_epsilon_max(dist), int(k))


def log_grid(dist, end: float, k: int = 100) -> np.ndarray:
    """Zero followed by ``k - 1`` geometrically spaced values up to ``end``.

    The first positive point anchors just below the smallest positive
    pairwise value, so resolution concentrates where merges actually happen.
    Mark-weighted scales can span four orders of magnitude, where a uniform
    grid would waste almost every point on the stabilized tail.
    """
    if k < 2:
        raise ValueError(f"grid needs at least 2 points, got {k}")
    dm = _entries(dist)
    pos = dm[np.triu_indices(dm.shape[0], 1)] if dm.shape[0] > 1 else np.zeros(0)
    pos = pos[pos > 0.0]
    if end <= 0.0 or pos.size == 0:
        return np.linspace(0.0, max(end, 1.0), int(k))
    lo = 0.9 * float(pos.min())
    if lo >= end:
        lo = end / float(k)
    grid = np.empty(int(k))
    grid[0] = 0.0
    grid[1:] = np.geomspace(lo, end, int(k) - 1)
    return grid


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def diagram_to_csv(diag: PersistenceDiagram, path) -> None:
    """Columns ``dim,birth,death``; infinite deaths serialize as ``inf``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("dim,birth,death\n")
        for dim, pairs in ((0, diag.pairs_dim0), (1, diag.pairs_dim1)):
            for b, d in pairs:
                death = "inf" if np.isinf(d) else f"{d:.17g}"
                fh.write(f"{dim},{b:.17g},{death}\n")


def curve_to_csv(curve: EulerCurve, path) -> None:
    """Columns ``epsilon,beta0,beta1,chi``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epsilon,beta0,beta1,chi\n")
        for e, b0, b1, x in zip(curve.grid, curve.beta0, curve.beta1, curve.chi):
            fh.write(f"{e:.17g},{b0},{b1},{x}\n")


# ---------------------------------------------------------------------------
# internals
# ---------------------------------------------------------------------------

def _entries(dist) -> np.ndarray:
    entries = getattr(dist, "entries", dist)
    return np.asarray(entries, dtype=float)


def _alive_counts(births, deaths, grid) -> np.ndarray:
    # pairs alive at t: born (b <= t) minus finitely dead (d <= t)
    births_sorted = np.sort(births)
    finite_deaths = np.sort(deaths[np.isfinite(deaths)])
    born = np.searchsorted(births_sorted, grid, side="right")
    dead = np.searchsorted(finite_deaths, grid, side="right")
    return (born - dead).astype(np.int64)


def _diagram_from_pairs(deaths0, n_inf0, births1, deaths1) -> PersistenceDiagram:
    pairs0 = np.column_stack(
        [np.zeros(deaths0.size + n_inf0),
         np.concatenate([deaths0, np.full(n_inf0, np.inf)])]
    )
    pairs1 = np.column_stack([births1, deaths1]) if births1.size else np.zeros((0, 2))
    return PersistenceDiagram(pairs0, pairs1)


def _validate_filtration(f: Filtration) -> None:
    seen = {}
    prev_key = None
    for pos, s in enumerate(f.simplices):
        key = (s.value, s.dim, s.vertices)
        if prev_key is not None and key < prev_key:
            raise ValueError(f"simplices out of order at position {pos}")
        prev_key = key
        if s.dim > 0:
            for omit in range(len(s.vertices)):
                face = s.vertices[:omit] + s.vertices[omit + 1:]
                if face not in seen:
                    raise ValueError(f"face {face} of {s.vertices} missing or later in order")
        seen[s.vertices] = pos
