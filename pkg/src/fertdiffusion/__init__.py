"""Agent-based simulation of low-emission fertiliser adoption on dairy-farm peer networks."""

from .config import StudyConfig, default_config, load_config
from .dynamics import AdoptionParams, ScenarioConfig, Trajectory, run_scenario
from .montecarlo import Ensemble, run_ensemble
from .network import SocialNetwork, watts_strogatz
from .pipeline import run_full_study, run_quartile_study
from .population import Farm, Population, load_population, synthesize_population

__version__ = "0.1.0"

__all__ = [
    "AdoptionParams",
    "Ensemble",
    "Farm",
    "Population",
    "ScenarioConfig",
    "SocialNetwork",
    "StudyConfig",
    "Trajectory",
    "default_config",
    "load_config",
    "load_population",
    "run_ensemble",
    "run_full_study",
    "run_quartile_study",
    "run_scenario",
    "synthesize_population",
    "watts_strogatz",
]
