"""Per-point Z-scores at the critical filtration scale.

Each point's mark-weighted degree (neighbours within ``epsilon_crit``) is
standardized against its own degree distribution under random relabeling.
Large positive scores flag connectivity hubs (marks consistent with the
neighbourhood, connections form early); large negative scores flag
structural outliers whose mark contrast delays local merging.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import STREAM_PERMUTATION, rng_for, thread_map
from .geometry import (EUCLIDEAN, MarkedPointPattern, mark_weighted_entries,
                       pairwise_matrix)


@dataclass(frozen=True)
class ZScoreMap:
    """Observed degrees, their permutation moments, and the Z-scores."""

    epsilon_crit: float
    scores: np.ndarray
    obs_degree: np.ndarray
    perm_mean: np.ndarray
    perm_sd: np.ndarray

    def __post_init__(self):
        for name, dtype in (("scores", float), ("obs_degree", np.int64),
                            ("perm_mean", float), ("perm_sd", float)):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def degrees_at(entries: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-point count of other points within ``epsilon`` (zero diagonal excluded)."""
    return (entries <= epsilon).sum(axis=1).astype(np.int64) - 1


def local_z_scores(pattern: MarkedPointPattern, epsilon_crit: float, s: int,
                   seed: int, threads: int | None = None) -> ZScoreMap:
    """Z-score of each point's mark-weighted degree at ``epsilon_crit``.

    The ``s`` mark permutations come from the same seed stream the envelope
    test uses, so a report and its Z-map describe one consistent experiment.
    Sample moments use the s - 1 divisor; points whose degree never moves
    (zero variance) get a score of 0.
    """
    if not epsilon_crit > 0:
        raise ValueError(f"epsilon_crit must be positive, got {epsilon_crit}")
    if s < 2:
        raise ValueError(f"variance needs at least 2 permutations, got s={s}")
    euclid = pairwise_matrix(pattern, EUCLIDEAN).entries
    marks = pattern.marks
    obs = degrees_at(mark_weighted_entries(euclid, marks), epsilon_crit)

    def one(j):
        perm = rng_for(seed, STREAM_PERMUTATION, j).permutation(pattern.n)
        return degrees_at(mark_weighted_entries(euclid, marks[perm]), epsilon_crit)

    perm_degrees = np.asarray(thread_map(one, range(s), threads), dtype=float)
    perm_mean = perm_degrees.mean(axis=0)
    perm_sd = perm_degrees.std(axis=0, ddof=1)
    scores = np.where(perm_sd > 0, (obs - perm_mean) / np.where(perm_sd > 0, perm_sd, 1.0), 0.0)
    return ZScoreMap(float(epsilon_crit), scores, obs, perm_mean, perm_sd)


def zscores_to_csv(zmap: ZScoreMap, pattern: MarkedPointPattern, path) -> None:
    """Columns ``index,x,y,mark,obs_degree,perm_mean,perm_sd,z``."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,x,y,mark,obs_degree,perm_mean,perm_sd,z\n")
        for i in range(pattern.n):
            x, y = pattern.points[i]
            fh.write(
                f"{i},{x:.17g},{y:.17g},{pattern.marks[i]:.17g},"
                f"{zmap.obs_degree[i]},{zmap.perm_mean[i]:.17g},"
                f"{zmap.perm_sd[i]:.17g},{zmap.scores[i]:.17g}\n"
            )
