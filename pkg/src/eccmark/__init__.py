"""Multiscale topological inference for marked spatial point patterns.

Builds (mark-weighted) Vietoris-Rips Euler characteristic curves, tests
them against random-labeling and CSR-style null models with global rank
envelopes, and localizes the signal with per-point Z-scores at the critical
filtration scale.
"""
from ._kernel import BACKEND as kernel_backend
from .envelopes import (CSR_INTENSITY, RANDOM_LABELING, CurveEnsemble,
                        EnvelopeReport, critical_scale, csr_ensemble,
                        random_labeling_ensemble, rank_envelope)
from .filtration import (EulerCurve, Filtration, PersistenceDiagram, Simplex,
                         betti_curves, build_filtration, compute_persistence,
                         default_grid, diagram_from_matrix, ecc_from_matrix,
                         log_grid, mst_max_edge, stabilized_epsilon_max)
from .geometry import (EUCLIDEAN, MARK_WEIGHTED, DistanceMatrix,
                       MarkedPointPattern, Window, euclidean_distance,
                       mark_weighted_distance, pairwise_matrix,
                       read_pattern_csv, write_pattern_csv)
from .localscores import ZScoreMap, local_z_scores
from .scenarios import (BandSummary, ScenarioSpec, analyze_pattern,
                        monte_carlo_bands, run_scenario,
                        simulate_scenario_pattern)
from .simulators import (IntensityGrid, MarkModel, SpatialModel,
                         kernel_intensity, simulate_marks, simulate_spatial)

__version__ = "0.1.0"
