"""Annual adoption state machine.

Each year every non-adopter adopts with probability

    beta0 + omega * S + beta_size * size_norm + beta_milk * milk_norm + delta

clamped to [0, 1], where S is the share of its neighbours that had adopted
by the end of the previous year. Adoption is absorbing.

Random numbers: a run seed spawns two independent streams, one for the
initial adopter draw and one for the yearly uniforms. Every year one
uniform is drawn per farm in id order, adopter or not, so a farm's draw in
year ``t`` does not depend on anyone's state. Runs that share a seed are
therefore coupled (common random numbers) across scenarios and parameters.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .economics import PriceTable
from .emissions import FertilizerTable, farm_co2eq
from .network import SocialNetwork, peer_signals, snapshot
from .policy import Cashflow, PolicyInstrument, policy_cashflow
from .population import Population

SCENARIOS = ("baseline", "tax", "subsidy")
_INSTRUMENT = {"baseline": "none", "tax": "carbon_tax", "subsidy": "subsidy"}


class ConfigError(ValueError):
    """Invalid simulation configuration; the message names the field."""


@dataclass(frozen=True)
class AdoptionParams:
    beta0: float = 0.005
    omega: float = 0.85
    beta_size: float = 0.04
    beta_milk: float = 0.04
    policy_delta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("beta0", "omega", "beta_size", "beta_milk", "policy_delta"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"adoption.{name} must be finite")

    @classmethod
    def theoretical(cls, policy_delta: float = 0.0) -> "AdoptionParams":
        """Pre-calibration coefficient set."""
        return cls(beta0=0.02, omega=0.4, beta_size=0.2, beta_milk=0.2, policy_delta=policy_delta)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one scenario run needs besides population and network.

    ``adoption.policy_delta`` is an extra shift on top of the scenario's own:
    ``tax_delta`` under ``tax`` (when taxed CAN costs more per tonne of N than
    PU) and ``subsidy_delta * subsidy_rate / reference_subsidy_rate`` under
    ``subsidy``.
    """

    horizon: int = 15
    policy: str = "baseline"
    initial_adopter_fraction: float = 0.01
    adoption: AdoptionParams = AdoptionParams()
    fertilizers: FertilizerTable = FertilizerTable()
    prices: PriceTable = PriceTable()
    tax_rate: float = 71.0
    subsidy_rate: float = 200.0
    tax_delta: float = 0.08
    subsidy_delta: float = 0.15
    reference_subsidy_rate: float = 200.0
    tax_adopters: bool = False
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.policy not in SCENARIOS:
            raise ConfigError(f"simulation.policy: unknown scenario {self.policy!r}; expected one of {SCENARIOS}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigError(f"simulation.horizon must be an integer >= 1, got {self.horizon!r}")
        if not 0.0 <= self.initial_adopter_fraction < 1.0:
            raise ConfigError(f"simulation.initial_adopter_fraction must lie in [0, 1), got {self.initial_adopter_fraction!r}")
        if self.tax_rate < 0:
            raise ConfigError("policy.tax_rate must be non-negative")
        if self.subsidy_rate < 0:
            raise ConfigError("policy.subsidy_rate must be non-negative")
        if self.reference_subsidy_rate <= 0:
            raise ConfigError("policy.reference_subsidy_rate must be positive")

    def with_policy(self, policy: str) -> "ScenarioConfig":
        return replace(self, policy=policy)

    def with_adoption(self, **changes) -> "ScenarioConfig":
        return replace(self, adoption=replace(self.adoption, **changes))

    def instrument(self) -> PolicyInstrument:
        return PolicyInstrument(
            kind=_INSTRUMENT[self.policy],
            tax_rate=self.tax_rate,
            subsidy_rate=self.subsidy_rate,
            tax_adopters=self.tax_adopters,
        )

    def tax_trigger(self) -> bool:
        """True when taxed CAN costs more than PU per tonne of nitrogen."""
        can, pu = self.fertilizers.can, self.fertilizers.pu
        if can.embedded_intensity is None:
            raise ConfigError("fertilizer.CAN.embedded_intensity is required for the tax scenario")
        can_cost = (self.prices.can + can.embedded_intensity * self.tax_rate) / can.n_content
        pu_price = self.prices.pu
        if self.tax_adopters:
            if pu.embedded_intensity is None:
                raise ConfigError("fertilizer.PU.embedded_intensity is required when adopters are taxed")
            pu_price += pu.embedded_intensity * self.tax_rate
        return can_cost > pu_price / pu.n_content

    def scenario_delta(self) -> float:
        if self.policy == "tax":
            return self.tax_delta if self.tax_trigger() else 0.0
        if self.policy == "subsidy":
            return self.subsidy_delta * self.subsidy_rate / self.reference_subsidy_rate
        return 0.0

    def effective_params(self) -> AdoptionParams:
        return replace(self.adoption, policy_delta=self.adoption.policy_delta + self.scenario_delta())


def adoption_probability(peer, size_norm, milk_norm, params: AdoptionParams):
    """Clamped linear adoption probability; scalars or arrays."""
    for value in (peer, size_norm, milk_norm):
        if not np.all(np.isfinite(value)):
            raise ValueError("adoption inputs must be finite")
    raw = params.beta0 + params.omega * np.asarray(peer, dtype=float) + params.beta_size * np.asarray(size_norm, dtype=float) + params.beta_milk * np.asarray(milk_norm, dtype=float) + params.policy_delta
    out = np.clip(raw, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass
class SimState:
    year: int
    adopted: np.ndarray
    rng: np.random.Generator = field(repr=False)

    @property
    def adoption_fraction(self) -> float:
        return float(self.adopted.mean()) if self.adopted.size else 0.0


def run_streams(run_seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """(initial-adopter stream, yearly-draw stream) for a run seed."""
    init_ss, draw_ss = np.random.SeedSequence(run_seed).spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(draw_ss)


def seed_initial_adopters(pop: Population | int, fraction: float, rng: np.random.Generator, draw_rng: np.random.Generator | None = None) -> SimState:
    """Mark ``round(n * fraction)`` distinct farms, chosen uniformly, as adopters at year 0.

    ``rng`` picks the adopters; the returned state carries ``draw_rng`` (or
    ``rng`` when not given) for the yearly transitions.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"fraction must lie in [0, 1), got {fraction}")
    n = pop if isinstance(pop, (int, np.integer)) else len(pop)
    count = int(round(n * fraction))
    adopted = np.zeros(n, dtype=bool)
    if count:
        adopted[rng.choice(n, size=count, replace=False)] = True
    return SimState(year=0, adopted=adopted, rng=draw_rng if draw_rng is not None else rng)


def step_year(state: SimState, pop: Population, net: SocialNetwork, params: AdoptionParams, uniforms: np.ndarray | None = None) -> SimState:
    """Advance one year. Peer signals use the incoming (previous-year) state."""
    if uniforms is None:
        uniforms = state.rng.random(len(pop))
    prob = adoption_probability(peer_signals(state.adopted, net), pop.size_norm, pop.milk_norm, params)
    adopted = state.adopted | (uniforms < prob)
    return SimState(year=state.year + 1, adopted=adopted, rng=state.rng)


@dataclass(frozen=True)
class Trajectory:
    """One run, years ``0..T``; year 0 is the seeded initial state."""

    scenario: str
    run_seed: int
    years: np.ndarray
    adoption: np.ndarray
    emissions_gg: np.ndarray
    tax_eur: np.ndarray
    subsidy_eur: np.ndarray
    states: np.ndarray = field(repr=False)  # (T+1, n) bool

    @property
    def horizon(self) -> int:
        return int(self.years[-1])

    def policy_cost(self) -> np.ndarray:
        return self.tax_eur + self.subsidy_eur

    def snapshot(self, year: int, net: SocialNetwork, pop: Population | None = None):
        return snapshot(self.states[year], year, net, None if pop is None else pop.size_norm)

    def rows(self) -> list[tuple]:
        return [
            (int(y), float(a), float(e), float(tx), float(sb))
            for y, a, e, tx, sb in zip(self.years, self.adoption, self.emissions_gg, self.tax_eur, self.subsidy_eur)
        ]

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["year", "adoption_fraction", "emissions_gg", "tax_eur", "subsidy_eur"])
            for row in self.rows():
                writer.writerow([row[0], *(repr(v) for v in row[1:])])


def _year_accounts(pop: Population, adopted: np.ndarray, config: ScenarioConfig, instrument: PolicyInstrument) -> tuple[float, Cashflow]:
    emissions = float(farm_co2eq(pop.nitrogen, adopted, config.fertilizers).sum() / 1e6)
    return emissions, policy_cashflow(pop, adopted, instrument, config.fertilizers)


def run_scenario(config: ScenarioConfig, pop: Population, net: SocialNetwork, run_seed: int) -> Trajectory:
    """Seed, then step ``config.horizon`` years, recording adoption, emissions and cash flows."""
    if net.n != len(pop):
        raise ConfigError(f"network has {net.n} nodes but population has {len(pop)} farms")
    params = config.effective_params()
    instrument = config.instrument()
    init_rng, draw_rng = run_streams(run_seed)
    state = seed_initial_adopters(pop, config.initial_adopter_fraction, init_rng, draw_rng)
    T = int(config.horizon)
    states = np.zeros((T + 1, len(pop)), dtype=bool)
    emissions = np.zeros(T + 1)
    tax = np.zeros(T + 1)
    subsidy = np.zeros(T + 1)
    for t in range(T + 1):
        if t:
            state = step_year(state, pop, net, params)
        states[t] = state.adopted
        emissions[t], flow = _year_accounts(pop, state.adopted, config, instrument)
        tax[t], subsidy[t] = flow.tax, flow.subsidy
    states.setflags(write=False)
    return Trajectory(
        scenario=config.policy,
        run_seed=int(run_seed),
        years=np.arange(T + 1),
        adoption=states.mean(axis=1),
        emissions_gg=emissions,
        tax_eur=tax,
        subsidy_eur=subsidy,
        states=states,
    )


__all__ = [
    "SCENARIOS",
    "AdoptionParams",
    "ConfigError",
    "ScenarioConfig",
    "SimState",
    "Trajectory",
    "adoption_probability",
    "run_scenario",
    "run_streams",
    "seed_initial_adopters",
    "step_year",
]
