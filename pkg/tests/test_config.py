import pytest

from fertdiffusion.config import default_config, default_config_text, load_config, parse_config
from fertdiffusion.dynamics import ConfigError


def test_default_matches_published_parameters(study_config):
    sc = study_config.scenario
    a = sc.adoption
    assert (a.beta0, a.omega, a.beta_size, a.beta_milk) == (0.005, 0.85, 0.04, 0.04)
    assert (sc.tax_rate, sc.subsidy_rate, sc.tax_delta, sc.subsidy_delta) == (71, 200, 0.08, 0.15)
    assert (sc.horizon, sc.initial_adopter_fraction) == (15, 0.01)
    f = sc.fertilizers
    assert (f.can.ef, f.urea.ef, f.pu.ef) == (0.0149, 0.0025, 0.0040)
    assert (f.can.n_content, f.pu.n_content) == (0.27, 0.46)
    assert (study_config.network.k, study_config.network.p) == (4, 0.1)
    assert (study_config.iterations, study_config.calibration_iterations) == (250, 50)


def test_empty_config_uses_library_defaults():
    cfg = parse_config("")
    assert cfg.scenario.adoption.omega == 0.85
    assert cfg.scenario.fertilizers.can.embedded_intensity is None


def test_overrides():
    cfg = parse_config("[adoption]\nomega = 0.5\n[fertilizer.CAN]\nembedded_intensity = 2\n[study]\nsnapshot_years = 2, 4\n")
    assert cfg.scenario.adoption.omega == 0.5
    assert cfg.scenario.fertilizers.can.embedded_intensity == 2.0
    assert cfg.snapshot_years == (2, 4)


@pytest.mark.parametrize(
    "text,field",
    [
        ("[adoption]\nomgea = 1\n", "adoption.omgea"),
        ("[adoption]\nomega = lots\n", "adoption.omega"),
        ("[weather]\nrain = 1\n", "weather"),
        ("[simulation]\npolicy = cap\n", "simulation.policy"),
        ("[montecarlo]\niterations = 0\n", "montecarlo.iterations"),
        ("[policy]\ntax_adopters = maybe\n", "policy.tax_adopters"),
    ],
)
def test_errors_name_the_field(text, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_config(text)


def test_load_relative_population(tmp_path):
    (tmp_path / "c.ini").write_text("[population]\ncsv = farms.csv\n")
    cfg = load_config(tmp_path / "c.ini")
    assert cfg.base_dir == tmp_path
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_default_text_roundtrip():
    assert parse_config(default_config_text()) == default_config()
