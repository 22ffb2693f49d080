"""Fertiliser cost accounting, CAN-to-PU substitution, abatement costing and milk revenue."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np

from .emissions import CAN, PU
from .population import Farm, Population

SUBSTITUTION_MODES = ("as-written", "n-equivalent")


class EconomicsError(ValueError):
    pass


@dataclass(frozen=True)
class PriceTable:
    """EUR per tonne of product. Defaults are illustrative assumptions."""

    can: float = 420.0
    urea: float = 450.0
    pu: float = 520.0
    p: float = 600.0
    k: float = 480.0
    lime: float = 30.0

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if value < 0:
                raise EconomicsError(f"price for {name} must be non-negative, got {value}")


@dataclass(frozen=True)
class MilkPriceParams:
    protein_price: float
    fat_price: float
    kg_per_litre: float = 1.0297
    processing_cost: float = 0.0
    vat_multiplier: float = 1.044594
    bonus: float = 0.0

    def __post_init__(self) -> None:
        if self.kg_per_litre <= 0 or self.vat_multiplier <= 0:
            raise EconomicsError("conversion and VAT multipliers must be positive")


@dataclass(frozen=True)
class FertilizerMasses:
    """Product masses in kg (lime in tonnes)."""

    can_kg: float
    urea_kg: float
    pu_kg: float
    p_kg: float
    k_kg: float
    lime_t: float

    @classmethod
    def of(cls, farm: Farm) -> "FertilizerMasses":
        return cls(farm.can_kg, farm.urea_kg, farm.pu_kg, farm.p_kg, farm.k_kg, farm.lime_t)


def _masses_cost(m: FertilizerMasses, prices: PriceTable) -> float:
    return (
        prices.can * m.can_kg / 1000.0
        + prices.urea * m.urea_kg / 1000.0
        + prices.pu * m.pu_kg / 1000.0
        + prices.p * m.p_kg / 1000.0
        + prices.k * m.k_kg / 1000.0
        + prices.lime * m.lime_t
    )


def baseline_cost(pop: Population | Sequence[Farm], prices: PriceTable = PriceTable()) -> float:
    """Total fertiliser and lime spend in EUR at current product masses."""
    farms = pop.farms if isinstance(pop, Population) else pop
    return float(sum(_masses_cost(FertilizerMasses.of(f), prices) for f in farms))


def apply_substitution(farm: Farm | FertilizerMasses, alpha: float, mode: str = "as-written") -> FertilizerMasses:
    """Move a share ``alpha`` of CAN to protected urea.

    ``as-written`` transfers product mass one-for-one; ``n-equivalent``
    converts the moved CAN to the PU mass carrying the same nitrogen.
    """
    if not 0.0 <= alpha <= 1.0:
        raise EconomicsError(f"alpha must lie in [0, 1], got {alpha}")
    if mode not in SUBSTITUTION_MODES:
        raise EconomicsError(f"unknown substitution mode {mode!r}")
    m = farm if isinstance(farm, FertilizerMasses) else FertilizerMasses.of(farm)
    moved = alpha * m.can_kg
    if mode == "n-equivalent":
        moved *= CAN.n_content / PU.n_content
    return replace(m, can_kg=m.can_kg * (1.0 - alpha), pu_kg=m.pu_kg + moved)


def policy_cost(pop: Population | Sequence[Farm], alpha: float, prices: PriceTable = PriceTable(), mode: str = "as-written") -> float:
    farms = pop.farms if isinstance(pop, Population) else pop
    return float(sum(_masses_cost(apply_substitution(f, alpha, mode), prices) for f in farms))


def total_abatement(base_series: Sequence[float], policy_series: Sequence[float]) -> float:
    """Cumulative avoided emissions in tonnes CO2-eq from two Gg series."""
    base = np.asarray(base_series, dtype=float)
    pol = np.asarray(policy_series, dtype=float)
    if base.shape != pol.shape:
        raise EconomicsError(f"series length mismatch: {base.shape} vs {pol.shape}")
    return float(np.sum(base - pol) * 1e3)


@dataclass(frozen=True)
class AbatementReport:
    total_abatement_t: float
    delta_cost: float
    government_expenditure: float
    mac: float
    private_cost: float
    social_cost: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        width = max(len(k) for k in self.to_dict())
        return "\n".join(f"{k:<{width}}  {v:.6g}" for k, v in self.to_dict().items()) + "\n"


def abatement_costs(delta_cost: float, abatement_t: float, gov_expenditure: float = 0.0) -> AbatementReport:
    """Private (= marginal) and social cost per tonne abated."""
    if abatement_t <= 0:
        raise EconomicsError(f"abatement must be positive to cost it, got {abatement_t}")
    private = delta_cost / abatement_t
    return AbatementReport(
        total_abatement_t=abatement_t,
        delta_cost=delta_cost,
        government_expenditure=gov_expenditure,
        mac=private,
        private_cost=private,
        social_cost=(delta_cost + gov_expenditure) / abatement_t,
    )


def milk_price_per_litre(protein_pct: float, fat_pct: float, params: MilkPriceParams, bonus: bool = True) -> float:
    """Composition-adjusted value per litre.

    Component percentages multiply the per-unit component prices directly;
    the result is in whatever currency unit those prices use per litre.
    """
    if min(protein_pct, fat_pct, params.protein_price, params.fat_price) < 0:
        raise EconomicsError("milk composition and prices must be non-negative")
    value = ((protein_pct * params.protein_price + fat_pct * params.fat_price) * params.kg_per_litre - params.processing_cost)
    value *= params.vat_multiplier
    return value + (params.bonus if bonus else 0.0)


def milk_revenue(farm: Farm | None, params: MilkPriceParams, milk_yield_litres: float, *, protein_pct: float | None = None, fat_pct: float | None = None, bonus: bool = True) -> float:
    """Per-litre value times delivered litres; composition comes from ``farm`` unless given."""
    if protein_pct is None:
        protein_pct = farm.protein_pct
    if fat_pct is None:
        fat_pct = farm.fat_pct
    return milk_price_per_litre(protein_pct, fat_pct, params, bonus) * milk_yield_litres


__all__ = [
    "SUBSTITUTION_MODES",
    "AbatementReport",
    "EconomicsError",
    "FertilizerMasses",
    "MilkPriceParams",
    "PriceTable",
    "abatement_costs",
    "apply_substitution",
    "baseline_cost",
    "milk_price_per_litre",
    "milk_revenue",
    "policy_cost",
    "total_abatement",
]
