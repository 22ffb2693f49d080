import json
from importlib import resources

import numpy as np
import pytest

from fertdiffusion.calibrate import (
    CalibrationError,
    ablate_network,
    anchor_rmse,
    anchors_from_trajectory,
    calibrate_omega,
    default_anchors,
    load_anchors,
    sensitivity_omega,
    sensitivity_subsidy,
)
from fertdiffusion.dynamics import ScenarioConfig
from fertdiffusion.montecarlo import run_ensemble, summarize_ensemble


@pytest.fixture(scope="module")
def cfg(study_config):
    return study_config.scenario


def _self_anchors(cfg, pop, net, omega, seed=99):
    ens = run_ensemble(cfg.with_adoption(omega=omega), pop, net, 50, base_seed=seed)
    return anchors_from_trajectory(ens.mean_adoption(), ens.years, range(2019, 2025))


def test_default_anchors():
    a = default_anchors()
    assert list(a.years) == list(range(2019, 2025))
    assert dict(zip(a.years[~a.interpolated], a.adoption[~a.interpolated])) == {2019: 0.03, 2021: 0.11, 2024: 0.40}
    assert list(a.interpolated) == [False, True, False, True, True, False]
    assert list(a.sim_years) == [1, 2, 3, 4, 5, 6]
    assert list(a.years[a.mask("test")]) == [2023, 2024]


def test_shipped_anchor_file_matches_default():
    with resources.as_file(resources.files("fertdiffusion").joinpath("data/anchors.csv")) as path:
        shipped = load_anchors(path)
    ref = default_anchors()
    assert np.array_equal(shipped.years, ref.years)
    assert np.allclose(shipped.adoption, ref.adoption)
    assert np.array_equal(shipped.interpolated, ref.interpolated)


def test_anchor_roundtrip_and_errors(tmp_path):
    default_anchors().to_csv(tmp_path / "a.csv")
    back = load_anchors(tmp_path / "a.csv")
    assert np.array_equal(back.interpolated, default_anchors().interpolated)
    (tmp_path / "bad.csv").write_text("year,adoption\n2019,0.1\n2018,0.2\n")
    with pytest.raises(CalibrationError, match="increasing"):
        load_anchors(tmp_path / "bad.csv")
    (tmp_path / "nocol.csv").write_text("year\n2019\n")
    with pytest.raises(CalibrationError, match="adoption"):
        load_anchors(tmp_path / "nocol.csv")


def test_anchor_rmse_observed_only():
    a = default_anchors()
    sim = np.zeros(16)
    years = np.arange(16)
    assert anchor_rmse(sim, years, a, "test", observed_only=True) == pytest.approx(0.40)
    assert anchor_rmse(sim, years, a, "all") == pytest.approx(np.sqrt(np.mean(a.adoption**2)))


def test_singleton_grid(cfg, pop295, net295):
    res = calibrate_omega(default_anchors(), [0.85], cfg, pop295, net295, n_iterations=5, base_seed=1)
    assert res.omega == 0.85
    assert json.loads(res.to_json())["winner"] == 0.85


def test_empty_grid(cfg, pop295, net295):
    with pytest.raises(CalibrationError):
        calibrate_omega(default_anchors(), [], cfg, pop295, net295, n_iterations=2)


def test_calibration_deterministic(cfg, pop295, net295):
    a = calibrate_omega(default_anchors(), [0.2, 0.5], cfg, pop295, net295, n_iterations=10, base_seed=4)
    b = calibrate_omega(default_anchors(), [0.2, 0.5], cfg, pop295, net295, n_iterations=10, base_seed=4)
    assert a.to_json() == b.to_json()


def test_self_consistency_085(cfg, pop295, net295):
    anchors = _self_anchors(cfg, pop295, net295, 0.85)
    res = calibrate_omega(anchors, [0.2, 0.5, 0.85], cfg, pop295, net295, n_iterations=50, base_seed=123)
    assert res.omega == 0.85


def test_ablation(cfg, pop295, net295):
    anchors = _self_anchors(cfg, pop295, net295, 0.85)
    res = ablate_network(cfg.with_adoption(omega=0.85), anchors, pop295, net295, n_iterations=50, base_seed=123)
    assert res.delta > 0
    assert res.rmse_without >= 3 * res.rmse_with
    flat = ablate_network(cfg.with_adoption(omega=0.0), anchors, pop295, net295, n_iterations=10, base_seed=1)
    assert flat.delta == 0


def test_ablation_positive_on_shipped_anchors(cfg, pop295, net295):
    assert ablate_network(cfg, default_anchors(), pop295, net295, n_iterations=50, base_seed=7).delta > 0


def test_sensitivity_omega(cfg, pop295, net295):
    pts = sensitivity_omega(cfg, pop295, net295, (0.0, 0.2, 0.85), n_iterations=30, base_seed=2)
    t0 = [pts[w].fits["baseline"].t0 for w in (0.2, 0.85)]
    assert t0[0] > t0[1]
    # Without peer influence the baseline never reaches 50%; it is the slowest curve.
    assert np.all(pts[0.0].summaries["baseline"].adoption_mean <= pts[0.2].summaries["baseline"].adoption_mean)
    assert all(p.scenario_order() == ("subsidy", "tax", "baseline") for w, p in pts.items() if w > 0)
    with pytest.raises(CalibrationError):
        sensitivity_omega(cfg, pop295, net295, (1.5,), n_iterations=1)


def test_sensitivity_subsidy(cfg, pop295, net295):
    pts = sensitivity_subsidy(cfg, pop295, net295, (0.0, 150.0, 200.0, 250.0), n_iterations=30, base_seed=2)
    base = summarize_ensemble(run_ensemble(cfg, pop295, net295, 30, 2))
    curve = {r: p.summaries["subsidy"].adoption_mean for r, p in pts.items()}
    assert curve[250.0][5] >= curve[200.0][5] >= curve[150.0][5]
    np.testing.assert_array_equal(curve[0.0], base.adoption_mean)
    below_one = base.adoption_mean[1:] < 1.0
    assert np.all(curve[150.0][1:][below_one] > base.adoption_mean[1:][below_one])
    with pytest.raises(CalibrationError):
        sensitivity_subsidy(cfg, pop295, net295, (-1.0,), n_iterations=1)


def test_omega_and_rate_monotone_pointwise(cfg, pop295, net295):
    means = [run_ensemble(cfg.with_adoption(omega=w), pop295, net295, 20, 3).mean_adoption() for w in (0.2, 0.5, 0.85)]
    assert np.all(means[0] <= means[1]) and np.all(means[1] <= means[2])


def test_short_horizon_extended_to_cover_anchors(pop295, net295):
    res = calibrate_omega(default_anchors(), [0.5], ScenarioConfig(horizon=3), pop295, net295, n_iterations=2)
    assert res.omega == 0.5 and set(res.test_rmse) == {0.5}


def test_anchor_span_too_short(cfg, pop295, net295):
    short = anchors_from_trajectory([0.0, 0.1, 0.2], [0, 1, 2], [2019, 2020])
    with pytest.raises(CalibrationError, match="3 years"):
        calibrate_omega(short, [0.5], cfg, pop295, net295, n_iterations=2)
