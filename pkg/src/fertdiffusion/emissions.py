"""Nitrogen-to-product conversion, direct N2O, CO2-equivalents and carbon intensity.

Per-farm arithmetic is in kg; sector totals are converted to Gg only when
aggregated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .population import Farm, Population

N2O_MASS_RATIO = 44.0 / 28.0
GWP_N2O = 298.0
KG_PER_GG = 1e6


class EmissionsError(ValueError):
    pass


@dataclass(frozen=True)
class FertilizerSpec:
    """Nitrogen product. ``embedded_intensity`` (t CO2 per t product) has no default."""

    kind: str
    n_content: float
    ef: float
    embedded_intensity: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.n_content <= 1.0:
            raise EmissionsError(f"{self.kind}: n_content must lie in (0, 1], got {self.n_content}")
        if self.ef < 0:
            raise EmissionsError(f"{self.kind}: emission factor must be >= 0, got {self.ef}")
        if self.embedded_intensity is not None and self.embedded_intensity < 0:
            raise EmissionsError(f"{self.kind}: embedded intensity must be >= 0")


CAN = FertilizerSpec("CAN", n_content=0.27, ef=0.0149)
UREA = FertilizerSpec("UREA", n_content=0.46, ef=0.0025)
PU = FertilizerSpec("PU", n_content=0.46, ef=0.0040)


@dataclass(frozen=True)
class FertilizerTable:
    can: FertilizerSpec = CAN
    urea: FertilizerSpec = UREA
    pu: FertilizerSpec = PU


@dataclass(frozen=True)
class EmissionConstants:
    n2o_mass_ratio: float = N2O_MASS_RATIO
    gwp_n2o: float = GWP_N2O


def fertilizer_quantity(n_kg, spec: FertilizerSpec):
    """Tonnes of product delivering ``n_kg`` of nitrogen."""
    if spec.n_content <= 0:
        raise EmissionsError("n_content must be positive")
    if np.ndim(n_kg):
        n_kg = np.asarray(n_kg, dtype=float)
    return (n_kg / 1000.0) / spec.n_content


def n2o_direct(n_kg, spec: FertilizerSpec):
    """kg N2O from applying ``n_kg`` of nitrogen as ``spec``."""
    return n_kg * spec.ef * N2O_MASS_RATIO


def co2_equivalent(n2o_kg):
    return n2o_kg * GWP_N2O


def farm_co2eq(n_kg, adopted, specs: FertilizerTable = FertilizerTable()) -> np.ndarray:
    """Per-farm kg CO2-eq: PU factor for adopters, CAN otherwise."""
    n_kg = np.asarray(n_kg, dtype=float)
    ef = np.where(np.asarray(adopted, dtype=bool), specs.pu.ef, specs.can.ef)
    return n_kg * ef * N2O_MASS_RATIO * GWP_N2O


def sector_emissions(pop: Population | Sequence[float], adopted, specs: FertilizerTable = FertilizerTable()) -> float:
    """Sector fertiliser CO2-eq in Gg. ``pop`` may be a Population or a nitrogen vector."""
    nitrogen = pop.nitrogen if isinstance(pop, Population) else np.asarray(pop, dtype=float)
    if nitrogen.size == 0:
        return 0.0
    return float(farm_co2eq(nitrogen, adopted, specs).sum() / KG_PER_GG)


def carbon_intensity(farm: Farm | None = None, *, emissions_kg: float | None = None, fpcm_kg: float | None = None) -> float:
    """kg CO2-eq per kg FPCM, from a Farm or explicit keyword values."""
    if farm is not None:
        emissions_kg, fpcm_kg = farm.total_emissions_kg, farm.fpcm_kg
    if emissions_kg is None or fpcm_kg is None:
        raise EmissionsError("need a farm or both emissions_kg and fpcm_kg")
    if fpcm_kg <= 0:
        raise EmissionsError(f"fpcm_kg must be positive, got {fpcm_kg}")
    return emissions_kg / fpcm_kg


def intensities(pop: Population) -> np.ndarray:
    return pop.column("total_emissions_kg") / pop.column("fpcm_kg")


def post_policy_intensity(ci_base, delta: float, mean_adoption_final: float):
    """Scale baseline intensity by ``1 - delta * mean_adoption_final``."""
    if not 0.0 <= delta <= 1.0:
        raise EmissionsError(f"delta must lie in [0, 1], got {delta}")
    if not 0.0 <= mean_adoption_final <= 1.0:
        raise EmissionsError(f"mean adoption must lie in [0, 1], got {mean_adoption_final}")
    if delta * mean_adoption_final > 1.0:
        raise EmissionsError("delta * mean adoption exceeds 1")
    return ci_base * (1.0 - delta * mean_adoption_final)


@dataclass(frozen=True)
class IntensityConfig:
    """Whole-farm intensity reduction at full adoption.

    ``delta`` defaults to ``ef_reduction * fertilizer_share``; the fertiliser
    share of farm emissions is an assumption, not an observed value.
    """

    ef_reduction: float = 0.73
    fertilizer_share: float = 0.25
    delta_override: float | None = None
    tail_threshold: float = 1.25

    @property
    def delta(self) -> float:
        if self.delta_override is not None:
            return self.delta_override
        return self.ef_reduction * self.fertilizer_share


@dataclass(frozen=True)
class IntensityRecord:
    ci_base: float
    ci_post: float
    delta: float
    mean_adoption_final: float


__all__ = [
    "CAN",
    "GWP_N2O",
    "N2O_MASS_RATIO",
    "PU",
    "UREA",
    "EmissionConstants",
    "EmissionsError",
    "FertilizerSpec",
    "FertilizerTable",
    "IntensityConfig",
    "IntensityRecord",
    "carbon_intensity",
    "co2_equivalent",
    "farm_co2eq",
    "fertilizer_quantity",
    "intensities",
    "n2o_direct",
    "post_policy_intensity",
    "sector_emissions",
]
