import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fertdiffusion.dynamics import (
    AdoptionParams,
    ConfigError,
    ScenarioConfig,
    adoption_probability,
    run_scenario,
    run_streams,
    seed_initial_adopters,
    step_year,
)
from fertdiffusion.economics import PriceTable
from fertdiffusion.emissions import CAN, FertilizerTable
from fertdiffusion.network import peer_signals, watts_strogatz

ZERO = AdoptionParams(beta0=0, omega=0, beta_size=0, beta_milk=0)


def test_probability_examples():
    assert adoption_probability(0, 0, 0, AdoptionParams()) == pytest.approx(0.005)
    assert adoption_probability(1, 1, 1, AdoptionParams(policy_delta=0.15)) == 1.0
    assert adoption_probability(0.5, 0.5, 0.5, AdoptionParams(policy_delta=0.08)) == pytest.approx(0.55)
    with pytest.raises(ValueError):
        adoption_probability(float("nan"), 0, 0, AdoptionParams())


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(-2, 2), st.floats(-2, 2))
def test_probability_clamped(peer, size, milk, beta0, delta):
    p = adoption_probability(peer, size, milk, AdoptionParams(beta0=beta0, policy_delta=delta))
    assert 0.0 <= p <= 1.0


def test_theoretical_preset():
    t = AdoptionParams.theoretical()
    assert (t.beta0, t.omega, t.beta_size, t.beta_milk) == (0.02, 0.4, 0.2, 0.2)


def test_initial_adopters():
    rng = np.random.default_rng(0)
    assert seed_initial_adopters(295, 0.01, rng).adopted.sum() == 3
    assert seed_initial_adopters(295, 0.0, rng).adopted.sum() == 0
    a = seed_initial_adopters(295, 0.01, np.random.default_rng(9)).adopted
    b = seed_initial_adopters(295, 0.01, np.random.default_rng(9)).adopted
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        seed_initial_adopters(10, 1.0, rng)


def test_step_absorbing_when_all_adopted(pop295, net295):
    state = seed_initial_adopters(295, 0.0, np.random.default_rng(0))
    state.adopted[:] = True
    nxt = step_year(state, pop295, net295, AdoptionParams())
    assert nxt.year == 1 and nxt.adopted.all()


def test_zero_params_never_adopt(pop295, net295):
    state = seed_initial_adopters(pop295, 0.01, np.random.default_rng(0))
    start = state.adopted.copy()
    for _ in range(15):
        state = step_year(state, pop295, net295, ZERO)
    assert np.array_equal(state.adopted, start)


def test_expected_new_adopters(pop295, net295):
    state = seed_initial_adopters(pop295, 0.01, np.random.default_rng(3))
    params = AdoptionParams()
    prob = adoption_probability(peer_signals(state.adopted, net295), pop295.size_norm, pop295.milk_norm, params)
    expected = prob[~state.adopted].sum()
    var = (prob * (1 - prob))[~state.adopted].sum()
    rng = np.random.default_rng(4)
    draws = 10_000
    counts = np.empty(draws)
    for k in range(draws):
        nxt = step_year(state, pop295, net295, params, uniforms=rng.random(295))
        counts[k] = nxt.adopted.sum() - state.adopted.sum()
    assert abs(counts.mean() - expected) < 3 * np.sqrt(var / draws)


def test_run_scenario_shape_and_start(pop295, net295):
    traj = run_scenario(ScenarioConfig(policy="subsidy"), pop295, net295, 11)
    assert traj.adoption[0] == pytest.approx(3 / 295)
    assert np.all(np.diff(traj.adoption) >= 0)
    assert len(traj.years) == 16 and traj.years[-1] == 15
    assert np.all(np.diff(traj.states.astype(int), axis=0) >= 0)


def test_run_scenario_deterministic(pop295, net295, tmp_path):
    cfg = ScenarioConfig(policy="tax", fertilizers=FertilizerTable(can=type(CAN)("CAN", 0.27, 0.0149, 1.1)))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_scenario(cfg, pop295, net295, 42).to_csv(a)
    run_scenario(cfg, pop295, net295, 42).to_csv(b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "year,adoption_fraction,emissions_gg,tax_eur,subsidy_eur"


def test_network_size_mismatch(pop295):
    with pytest.raises(ConfigError):
        run_scenario(ScenarioConfig(), pop295, watts_strogatz(50, 4, 0.1, 1), 0)


def test_streams_independent_of_scenario():
    a_init, a_draw = run_streams(5)
    b_init, b_draw = run_streams(5)
    assert a_init.random() == b_init.random() and a_draw.random() == b_draw.random()


def test_omega_zero_pathwise_slower(pop295, net295):
    social = ScenarioConfig()
    isolated = social.with_adoption(omega=0.0)
    strictly_somewhere = False
    for seed in range(30):
        fast = run_scenario(social, pop295, net295, seed).adoption
        slow = run_scenario(isolated, pop295, net295, seed).adoption
        assert np.all(slow <= fast)
        strictly_somewhere |= bool(np.any(slow < fast))
    assert strictly_somewhere


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["beta0", "omega", "policy_delta"]),
    st.floats(0, 0.5),
    st.floats(0, 0.5),
    st.integers(0, 10_000),
)
def test_parameter_monotonicity(pop295, net295, name, lo, extra, seed):
    base = ScenarioConfig(horizon=8).with_adoption(**{name: lo})
    more = ScenarioConfig(horizon=8).with_adoption(**{name: lo + extra})
    a = run_scenario(base, pop295, net295, seed).states
    b = run_scenario(more, pop295, net295, seed).states
    assert np.all(b >= a)


def test_scenario_config_validation():
    with pytest.raises(ConfigError, match="policy"):
        ScenarioConfig(policy="cap")
    with pytest.raises(ConfigError, match="horizon"):
        ScenarioConfig(horizon=0)
    with pytest.raises(ConfigError, match="initial_adopter_fraction"):
        ScenarioConfig(initial_adopter_fraction=1.0)


def test_tax_trigger_gates_delta():
    cheap = FertilizerTable(can=type(CAN)("CAN", 0.27, 0.0149, 1.1))
    cfg = ScenarioConfig(policy="tax", fertilizers=cheap)
    assert cfg.tax_trigger() and cfg.scenario_delta() == 0.08
    pricey_pu = ScenarioConfig(policy="tax", fertilizers=cheap, prices=PriceTable(pu=5000))
    assert not pricey_pu.tax_trigger() and pricey_pu.scenario_delta() == 0.0
    with pytest.raises(ConfigError, match="embedded_intensity"):
        ScenarioConfig(policy="tax").scenario_delta()


def test_subsidy_delta_scales_with_rate():
    assert ScenarioConfig(policy="subsidy").scenario_delta() == pytest.approx(0.15)
    assert ScenarioConfig(policy="subsidy", subsidy_rate=100).scenario_delta() == pytest.approx(0.075)
    assert ScenarioConfig(policy="baseline", subsidy_rate=100).scenario_delta() == 0
