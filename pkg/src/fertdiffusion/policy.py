"""Carbon-tax liabilities, protected-urea subsidies and annual policy cash flows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .emissions import FertilizerSpec, FertilizerTable, fertilizer_quantity
from .population import Population

INSTRUMENTS = ("none", "carbon_tax", "subsidy")


class PolicyConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyInstrument:
    """Active instrument and its rates.

    ``tax_adopters`` also charges adopters tax on the embedded emissions of
    their protected urea; off by default.
    """

    kind: str = "none"
    tax_rate: float = 71.0
    subsidy_rate: float = 200.0
    tax_adopters: bool = False

    def __post_init__(self) -> None:
        if self.kind not in INSTRUMENTS:
            raise PolicyConfigError(f"unknown instrument {self.kind!r}; expected one of {INSTRUMENTS}")
        if self.tax_rate < 0 or self.subsidy_rate < 0:
            raise PolicyConfigError("policy rates must be non-negative")


def tax_liability(q_tonnes, spec: FertilizerSpec, rate: float = 71.0):
    """Tax in EUR on ``q_tonnes`` of product at ``rate`` EUR per t CO2."""
    if spec.embedded_intensity is None:
        raise PolicyConfigError(f"embedded carbon intensity for {spec.kind} is not configured")
    return q_tonnes * spec.embedded_intensity * rate


def subsidy_payment(q_pu_tonnes, rate: float = 200.0):
    return rate * q_pu_tonnes


@dataclass(frozen=True)
class Cashflow:
    tax: float
    subsidy: float

    @property
    def combined(self) -> float:
        return self.tax + self.subsidy

    def __iter__(self):
        return iter((self.tax, self.subsidy, self.combined))


def policy_cashflow(
    pop: Population | np.ndarray,
    adopted,
    instrument: PolicyInstrument,
    specs: FertilizerTable = FertilizerTable(),
) -> Cashflow:
    """Sector tax and subsidy for one year.

    Non-adopters are taxed on their CAN quantity; adopters receive the
    subsidy on their PU quantity. Quantities follow from each farm's nitrogen.
    """
    if instrument.kind == "none":
        return Cashflow(0.0, 0.0)
    nitrogen = pop.nitrogen if isinstance(pop, Population) else np.asarray(pop, dtype=float)
    adopted = np.asarray(adopted, dtype=bool)
    if instrument.kind == "carbon_tax":
        q_can = fertilizer_quantity(nitrogen[~adopted], specs.can)
        tax = float(np.sum(tax_liability(q_can, specs.can, instrument.tax_rate)))
        if instrument.tax_adopters:
            q_pu = fertilizer_quantity(nitrogen[adopted], specs.pu)
            tax += float(np.sum(tax_liability(q_pu, specs.pu, instrument.tax_rate)))
        return Cashflow(tax, 0.0)
    q_pu = fertilizer_quantity(nitrogen[adopted], specs.pu)
    return Cashflow(0.0, float(np.sum(subsidy_payment(q_pu, instrument.subsidy_rate))))


__all__ = [
    "INSTRUMENTS",
    "Cashflow",
    "PolicyConfigError",
    "PolicyInstrument",
    "policy_cashflow",
    "subsidy_payment",
    "tax_liability",
]
