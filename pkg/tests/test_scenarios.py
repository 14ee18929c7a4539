import json

import numpy as np
import pytest

from eccmark.scenarios import (ScenarioSpec, analyze_pattern,
                               load_scenario_config, mark_model_for,
                               monte_carlo_bands, run_scenario,
                               simulate_scenario_pattern, spatial_model_for)
from eccmark.simulators import (CHECKERBOARD, CLUSTER_MEANS, GRF_KRIGING,
                                HARDCORE, HPP, IID_UNIFORM, SINUSOID, THOMAS)


def test_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec("weird", "random")
    with pytest.raises(ValueError):
        ScenarioSpec("csr", "weird")
    with pytest.raises(ValueError):
        ScenarioSpec("csr", "random", n=1)


def test_mark_model_binding():
    assert mark_model_for(ScenarioSpec("csr", "random")).tag == IID_UNIFORM
    assert mark_model_for(ScenarioSpec("csr", "positive")).tag == GRF_KRIGING
    assert mark_model_for(ScenarioSpec("thomas", "positive")).tag == CLUSTER_MEANS
    assert mark_model_for(ScenarioSpec("hardcore", "positive")).tag == SINUSOID
    for spatial in ("csr", "thomas", "hardcore"):
        assert mark_model_for(ScenarioSpec(spatial, "negative")).tag == CHECKERBOARD


def test_spatial_model_binding():
    assert spatial_model_for(ScenarioSpec("csr", "random")).tag == HPP
    thomas = spatial_model_for(ScenarioSpec("thomas", "random"))
    assert thomas.tag == THOMAS and thomas.sigma == 0.7
    hard = spatial_model_for(ScenarioSpec("hardcore", "random"))
    assert hard.tag == HARDCORE and hard.delta == 0.9


def test_patterns_match_their_scenario():
    pat = simulate_scenario_pattern(ScenarioSpec("hardcore", "negative", n=40, seed=1))
    assert pat.n == 40
    d = np.sqrt(((pat.points[:, None] - pat.points[None, :]) ** 2).sum(-1))
    assert d[np.triu_indices(40, 1)].min() >= 0.9
    lo = pat.marks < 4
    assert 0 < lo.sum() < 40  # both checkerboard levels appear


def test_scenario_reproducible():
    a = simulate_scenario_pattern(ScenarioSpec("thomas", "positive", n=50, seed=9))
    b = simulate_scenario_pattern(ScenarioSpec("thomas", "positive", n=50, seed=9))
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.marks, b.marks)


def test_run_scenario_outputs():
    res = run_scenario(ScenarioSpec("csr", "random", n=30, s=19, seed=2))
    for rep in (res.report_csr, res.report_marked):
        assert 1 / 20 <= rep.p_value <= 1.0
        assert rep.epsilon_crit in rep.grid
        assert np.all(rep.lower <= rep.upper)
    assert res.zmap.scores.shape == (30,)
    for curve in res.analysis.curves.values():
        assert curve.chi[0] == 30
        assert curve.chi[-1] == 1


def test_analyze_pattern_single_null():
    pat = simulate_scenario_pattern(ScenarioSpec("csr", "random", n=20, seed=3))
    analysis = analyze_pattern(pat, ("csr",), s=9, seed=3)
    assert set(analysis.reports) == {"csr_intensity"}
    assert analysis.zmap is None


def test_bands_ordering_and_reproducibility():
    spec = ScenarioSpec("csr", "random", n=25, seed=4)
    a = monte_carlo_bands(spec, B=12, k=30)
    b = monte_carlo_bands(spec, B=12, k=30)
    for name in ("plain", "marked"):
        lo = getattr(a, f"lo_{name}")
        med = getattr(a, f"median_{name}")
        hi = getattr(a, f"hi_{name}")
        assert np.all(lo <= med) and np.all(med <= hi)
    assert np.array_equal(a.median_marked, b.median_marked)
    assert np.array_equal(a.grid, b.grid)
    with pytest.raises(ValueError):
        monte_carlo_bands(spec, B=1)


def test_bands_random_marks_overlap():
    spec = ScenarioSpec("csr", "random", n=30, seed=5)
    s = monte_carlo_bands(spec, B=30, k=40)
    # iid marks: the marked band envelops a similar mass; medians stay close
    # on the early half of the grid where both curves are active
    half = 20
    gap = np.abs(s.median_marked[:half] - s.median_plain[:half])
    assert gap.mean() < 8.0


def test_scenario_config_round_trip(tmp_path):
    cfg = {
        "spatial": {"tag": "thomas", "kappa": 0.1, "mu": 8.0, "sigma": 0.5},
        "marks": {"tag": "cluster_means", "levels": [0, 8], "noise_sd": 0.02},
        "n": 42,
        "seed": 7,
        "window": [0, 10, 0, 10],
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(cfg))
    loaded = load_scenario_config(path)
    assert loaded["n"] == 42 and loaded["seed"] == 7
    assert loaded["spatial_model"].tag == THOMAS
    assert loaded["spatial_model"].sigma == 0.5
    assert loaded["mark_model"].tag == CLUSTER_MEANS
    assert loaded["mark_model"].levels == (0.0, 8.0)
