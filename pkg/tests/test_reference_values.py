"""Published headline values reproduced on the synthetic fixture, with wide bands.

Values that the synthetic population cannot reproduce are marked ``xfail``
with the reason; ``strict=True`` flags them if they ever start passing.
"""

import numpy as np
import pytest

from fertdiffusion.calibrate import calibrate_omega, default_anchors
from fertdiffusion.pipeline import run_full_study


@pytest.fixture(scope="module")
def study(study_config, pop295, net295):
    return run_full_study(study_config, pop295, net295, include_quartiles=False)


def test_baseline_t50(study):
    assert abs(np.nanmean(study.summaries["baseline"].t50) - 7.20) <= 1.0


def test_subsidy_t90(study):
    assert abs(np.nanmean(study.summaries["subsidy"].t90) - 4.68) <= 1.0


def test_subsidy_peak_velocity(study):
    assert abs(np.nanmean(study.summaries["subsidy"].peak_velocity) - 0.275) <= 0.03


def test_abatement_ordering(study):
    assert study.mean_abatement("subsidy") > study.mean_abatement("tax") > 0


def test_subsidy_lead_over_tax(study):
    assert 0.15 <= study.mean_abatement("subsidy") / study.mean_abatement("tax") - 1 <= 0.35


def test_ks_significant(study):
    assert study.ks["subsidy"].p_value < 1e-3


@pytest.mark.xfail(strict=True, reason="synthetic nitrogen totals are about half the published sector's")
def test_subsidy_abatement_magnitude(study):
    assert abs(study.mean_abatement("subsidy") - 121_351) <= 0.25 * 121_351


@pytest.mark.xfail(strict=True, reason="without a non-adopting laggard share, D is set by final adoption alone and both policies saturate")
def test_ks_subsidy_exceeds_tax(study):
    assert study.ks["subsidy"].d_statistic > study.ks["tax"].d_statistic


@pytest.mark.xfail(strict=True, reason="the shipped anchors are interpolated; on the synthetic farms 0.5 fits the test years best")
def test_reference_grid_selects_085(study_config, pop295, net295):
    res = calibrate_omega(default_anchors(), (0.2, 0.5, 0.85), study_config.scenario, pop295, net295, n_iterations=50, base_seed=study_config.base_seed)
    assert res.omega == 0.85 and abs(res.test_rmse[0.85] - 0.0274) <= 0.01
