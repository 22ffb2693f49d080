"""Study configuration and its INI-style file format.

Sections mirror the modules::

    [simulation]   horizon, policy, initial_adopter_fraction
    [adoption]     beta0, omega, beta_size, beta_milk, policy_delta
    [policy]       tax_rate, subsidy_rate, tax_delta, subsidy_delta,
                   reference_subsidy_rate, tax_adopters
    [fertilizer.CAN] / [fertilizer.UREA] / [fertilizer.PU]
                   n_content, ef, embedded_intensity
    [prices]       can, urea, pu, p, k, lime
    [network]      k, p, seed
    [population]   n, seed, csv
    [montecarlo]   iterations, calibration_iterations, base_seed
    [intensity]    ef_reduction, fertilizer_share, delta, tail_threshold
    [study]        snapshot_years, omega_values, subsidy_rates

Every key is optional; absent keys keep the library defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .dynamics import AdoptionParams, ConfigError, ScenarioConfig
from .economics import PriceTable
from .emissions import FertilizerSpec, FertilizerTable, IntensityConfig
from .network import SocialNetwork, watts_strogatz
from .population import Population, load_population, synthesize_population


@dataclass(frozen=True)
class NetworkParams:
    k: int = 4
    p: float = 0.1
    seed: int = 1

    def build(self, n: int) -> SocialNetwork:
        return watts_strogatz(n, self.k, self.p, self.seed)


@dataclass(frozen=True)
class PopulationSource:
    n: int = 295
    seed: int = 1
    csv: str | None = None

    def load(self, base_dir: Path | None = None) -> Population:
        if self.csv:
            path = Path(self.csv)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            return load_population(path)
        return synthesize_population(self.n, self.seed)


@dataclass(frozen=True)
class StudyConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    network: NetworkParams = NetworkParams()
    population: PopulationSource = PopulationSource()
    intensity: IntensityConfig = IntensityConfig()
    iterations: int = 250
    calibration_iterations: int = 50
    base_seed: int = 7
    snapshot_years: tuple[int, ...] = (1, 5, 15)
    omega_values: tuple[float, ...] = (0.20, 0.50, 0.85)
    subsidy_rates: tuple[float, ...] = (150.0, 200.0, 250.0)
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ConfigError("montecarlo.iterations must be >= 1")
        if self.calibration_iterations < 1:
            raise ConfigError("montecarlo.calibration_iterations must be >= 1")

    def load_population(self) -> Population:
        return self.population.load(self.base_dir)

    def build_network(self, n: int) -> SocialNetwork:
        return self.network.build(n)


# ---------------------------------------------------------------------------
# Parsing


def _coerce(section: str, key: str, raw: str, kind):
    name = f"{section}.{key}"
    text = raw.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind == "optional_float":
            return None if text.lower() in ("", "none") else float(text)
        if kind == "int_tuple":
            return tuple(int(v) for v in text.split(",") if v.strip())
        if kind == "float_tuple":
            return tuple(float(v) for v in text.split(",") if v.strip())
        if kind == "optional_str":
            return text or None
        return text
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


_SIMULATION = {"horizon": int, "policy": str, "initial_adopter_fraction": float}
_ADOPTION = {"beta0": float, "omega": float, "beta_size": float, "beta_milk": float, "policy_delta": float}
_POLICY = {
    "tax_rate": float,
    "subsidy_rate": float,
    "tax_delta": float,
    "subsidy_delta": float,
    "reference_subsidy_rate": float,
    "tax_adopters": bool,
}
_FERT = {"n_content": float, "ef": float, "embedded_intensity": "optional_float"}
_PRICES = {f.name: float for f in fields(PriceTable)}
_NETWORK = {"k": int, "p": float, "seed": int}
_POPULATION = {"n": int, "seed": int, "csv": "optional_str"}
_MONTECARLO = {"iterations": int, "calibration_iterations": int, "base_seed": int}
_INTENSITY = {"ef_reduction": float, "fertilizer_share": float, "delta": "optional_float", "tail_threshold": float}
_STUDY = {"snapshot_years": "int_tuple", "omega_values": "float_tuple", "subsidy_rates": "float_tuple"}

_SECTIONS = {
    "simulation": _SIMULATION,
    "adoption": _ADOPTION,
    "policy": _POLICY,
    "fertilizer.CAN": _FERT,
    "fertilizer.UREA": _FERT,
    "fertilizer.PU": _FERT,
    "prices": _PRICES,
    "network": _NETWORK,
    "population": _POPULATION,
    "montecarlo": _MONTECARLO,
    "intensity": _INTENSITY,
    "study": _STUDY,
}


def _section(parser: configparser.ConfigParser, name: str) -> dict:
    if not parser.has_section(name):
        return {}
    spec = _SECTIONS[name]
    out = {}
    for key, raw in parser.items(name):
        if key not in spec:
            raise ConfigError(f"{name}.{key}: unknown key")
        out[key] = _coerce(name, key, raw, spec[key])
    return out


def parse_config(text: str, base_dir: Path | None = None) -> StudyConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"{name}: unknown section")

    try:
        ferts = FertilizerTable()
        for kind, attr in (("CAN", "can"), ("UREA", "urea"), ("PU", "pu")):
            values = _section(parser, f"fertilizer.{kind}")
            if values:
                ferts = replace(ferts, **{attr: replace(getattr(ferts, attr), **values)})

        policy = _section(parser, "policy")
        mc = _section(parser, "montecarlo")
        scenario = ScenarioConfig(
            **_section(parser, "simulation"),
            adoption=AdoptionParams(**_section(parser, "adoption")),
            fertilizers=ferts,
            prices=PriceTable(**_section(parser, "prices")),
            base_seed=mc.get("base_seed", 7),
            **policy,
        )
        intensity = _section(parser, "intensity")
        if "delta" in intensity:
            intensity["delta_override"] = intensity.pop("delta")
        study = _section(parser, "study")
        return StudyConfig(
            scenario=scenario,
            network=NetworkParams(**_section(parser, "network")),
            population=PopulationSource(**_section(parser, "population")),
            intensity=IntensityConfig(**intensity),
            iterations=mc.get("iterations", 250),
            calibration_iterations=mc.get("calibration_iterations", 50),
            base_seed=mc.get("base_seed", 7),
            base_dir=base_dir,
            **study,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> StudyConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)


def default_config_text() -> str:
    return resources.files("fertdiffusion").joinpath("data/default.ini").read_text(encoding="utf-8")


def default_config() -> StudyConfig:
    """The bundled parameterisation (includes assumed embedded intensities and prices)."""
    return parse_config(default_config_text())


__all__ = [
    "NetworkParams",
    "PopulationSource",
    "StudyConfig",
    "default_config",
    "default_config_text",
    "load_config",
    "parse_config",
]
