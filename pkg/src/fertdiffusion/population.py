"""Farm population: CSV ingestion, synthetic generation and size stratification.

A :class:`Population` is an immutable, ordered collection of :class:`Farm`
records together with the max-normalised structural scores (land area and
milk output) that enter the adoption probability.
"""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, field, fields
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

# Column order of the CSV contract. Header names equal the Farm field names.
FARM_COLUMNS = (
    "id",
    "land_area_ha",
    "milk_production_kg",
    "livestock_units",
    "nitrogen_kg",
    "can_kg",
    "urea_kg",
    "pu_kg",
    "p_kg",
    "k_kg",
    "lime_t",
    "total_emissions_kg",
    "fpcm_kg",
    "protein_pct",
    "fat_pct",
)


class PopulationError(ValueError):
    """Raised when farm data fails parsing or validation."""


@dataclass(frozen=True)
class Farm:
    id: int
    land_area_ha: float
    milk_production_kg: float
    livestock_units: float
    nitrogen_kg: float
    can_kg: float
    urea_kg: float
    pu_kg: float
    p_kg: float
    k_kg: float
    lime_t: float
    total_emissions_kg: float
    fpcm_kg: float
    protein_pct: float
    fat_pct: float

    def validate(self, row: int | None = None) -> None:
        where = f"row {row}" if row is not None else f"farm {self.id}"
        for name in FARM_COLUMNS[1:]:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise PopulationError(f"{where}, column {name!r}: value {value!r} is not finite")
            if value < 0:
                raise PopulationError(f"{where}, column {name!r}: negative value {value!r}")
        if self.land_area_ha <= 0:
            raise PopulationError(f"{where}, column 'land_area_ha': must be > 0, got {self.land_area_ha!r}")
        if self.fpcm_kg <= 0:
            raise PopulationError(f"{where}, column 'fpcm_kg': must be > 0, got {self.fpcm_kg!r}")


def max_normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale ``values`` by their maximum so the largest entry is exactly 1."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return arr.copy()
    top = arr.max()
    if top <= 0:
        raise PopulationError("cannot max-normalise a vector whose maximum is not positive")
    out = arr / top
    out[arr == top] = 1.0
    return out


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Population:
    """Ordered farms plus normalised size and milk scores.

    ``size_norm`` and ``milk_norm`` are computed from the farms unless given
    explicitly (used by :meth:`subset`, which keeps the parent's scores).
    """

    farms: tuple[Farm, ...]
    size_norm: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    milk_norm: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        farms = tuple(self.farms)
        object.__setattr__(self, "farms", farms)
        ids = [f.id for f in farms]
        if len(set(ids)) != len(ids):
            raise PopulationError("farm ids must be unique")
        for farm in farms:
            farm.validate()
        if self.size_norm is None:
            object.__setattr__(self, "size_norm", _readonly(max_normalize([f.land_area_ha for f in farms])))
        else:
            object.__setattr__(self, "size_norm", _readonly(self.size_norm))
        if self.milk_norm is None:
            object.__setattr__(self, "milk_norm", _readonly(max_normalize([f.milk_production_kg for f in farms])))
        else:
            object.__setattr__(self, "milk_norm", _readonly(self.milk_norm))
        if len(self.size_norm) != len(farms) or len(self.milk_norm) != len(farms):
            raise PopulationError("normalised score vectors must match the farm count")

    def __len__(self) -> int:
        return len(self.farms)

    @property
    def n(self) -> int:
        return len(self.farms)

    def column(self, name: str) -> np.ndarray:
        """Return one Farm field as a float array in farm order."""
        if name not in FARM_COLUMNS:
            raise KeyError(name)
        return np.array([getattr(f, name) for f in self.farms], dtype=float)

    @property
    def ids(self) -> np.ndarray:
        return np.array([f.id for f in self.farms], dtype=int)

    @property
    def nitrogen(self) -> np.ndarray:
        return self.column("nitrogen_kg")

    def subset(self, indices: Sequence[int]) -> "Population":
        """Sub-population of the given positions, keeping the parent's normalised scores."""
        idx = np.asarray(indices, dtype=int)
        return Population(
            farms=tuple(self.farms[i] for i in idx),
            size_norm=self.size_norm[idx],
            milk_norm=self.milk_norm[idx],
        )

    def to_csv(self, path: str | Path) -> None:
        write_population(self, path)


# ---------------------------------------------------------------------------
# CSV ingestion


def _parse_cell(raw: str, row: int, column: str, integer: bool = False) -> float | int:
    text = raw.strip()
    try:
        if integer:
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return float(text)
    except ValueError:
        raise PopulationError(f"row {row}, column {column!r}: cannot parse {raw!r} as a number") from None


def load_population(path: str | Path, schema: Mapping[str, str] | None = None) -> Population:
    """Read a farm CSV into a :class:`Population`.

    ``schema`` maps Farm field names to CSV header names for files whose
    headers differ from the canonical ones; unmapped fields use their own name.
    Row numbers in error messages count data rows from 1.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    schema = dict(schema or {})
    unknown = set(schema) - set(FARM_COLUMNS)
    if unknown:
        raise PopulationError(f"schema refers to unknown fields: {sorted(unknown)}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        source = {name: schema.get(name, name) for name in FARM_COLUMNS}
        missing = [col for col in source.values() if col not in header]
        if missing:
            raise PopulationError(f"{path.name}: missing required column(s) {missing}")
        farms = []
        for row_no, record in enumerate(reader, start=1):
            values = {}
            for name, col in source.items():
                raw = record[col]
                if raw is None:
                    raise PopulationError(f"row {row_no}, column {col!r}: missing cell")
                values[name] = _parse_cell(raw, row_no, col, integer=(name == "id"))
            farm = Farm(**values)
            farm.validate(row=row_no)
            farms.append(farm)
    return Population(tuple(farms))


def write_population(pop: Population, path: str | Path) -> None:
    """Write ``pop`` with the canonical header; floats use round-trip repr."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FARM_COLUMNS)
        for farm in pop.farms:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple(farm)])


# ---------------------------------------------------------------------------
# Synthetic generator
#
# Stand-in constants: the source dataset's per-farm distributions are not
# public. Ranges target a sectoral mean carbon intensity near 1.0 kg CO2-eq
# per kg FPCM with a high-intensity tail reaching ~1.75.


@dataclass(frozen=True)
class SyntheticConstants:
    area_median_ha: float = 55.0
    area_sigma_log: float = 0.45
    area_bounds_ha: tuple[float, float] = (10.0, 300.0)
    milk_yield_kg_per_ha: tuple[float, float] = (5500.0, 11500.0)
    n_rate_kg_per_ha: tuple[float, float] = (150.0, 250.0)
    stocking_lu_per_ha: tuple[float, float] = (1.5, 3.0)
    p_product_kg_per_ha: tuple[float, float] = (10.0, 40.0)
    k_product_kg_per_ha: tuple[float, float] = (20.0, 60.0)
    lime_t_per_ha: tuple[float, float] = (0.0, 0.5)
    protein_pct: tuple[float, float] = (3.2, 3.8)
    fat_pct: tuple[float, float] = (3.8, 4.8)
    intensity_mean: float = 1.0
    intensity_sd: float = 0.2
    intensity_bounds: tuple[float, float] = (0.6, 1.8)
    can_n_content: float = 0.27


SYNTHETIC = SyntheticConstants()


def fpcm_factor(fat_pct: np.ndarray | float, protein_pct: np.ndarray | float) -> np.ndarray | float:
    """IDF fat-and-protein correction factor applied to raw milk mass."""
    return 0.1226 * fat_pct + 0.0776 * protein_pct + 0.2534


def synthesize_population(n: int, seed: int, constants: SyntheticConstants = SYNTHETIC) -> Population:
    """Draw ``n`` farms deterministically from ``seed``.

    All farms start on an all-CAN nitrogen programme, so ``can_kg`` carries
    exactly ``nitrogen_kg`` of N. ``fpcm_kg`` is the IDF-corrected milk mass.
    """
    if n < 2:
        raise PopulationError(f"need at least 2 farms, got n={n}")
    c = constants
    rng = np.random.default_rng(seed)
    area = np.exp(np.log(c.area_median_ha) + c.area_sigma_log * rng.standard_normal(n))
    area = np.clip(area, *c.area_bounds_ha)
    milk = area * rng.uniform(*c.milk_yield_kg_per_ha, size=n)
    nitrogen = area * rng.uniform(*c.n_rate_kg_per_ha, size=n)
    lu = area * rng.uniform(*c.stocking_lu_per_ha, size=n)
    p_kg = area * rng.uniform(*c.p_product_kg_per_ha, size=n)
    k_kg = area * rng.uniform(*c.k_product_kg_per_ha, size=n)
    lime = area * rng.uniform(*c.lime_t_per_ha, size=n)
    protein = rng.uniform(*c.protein_pct, size=n)
    fat = rng.uniform(*c.fat_pct, size=n)
    fpcm = milk * fpcm_factor(fat, protein)
    intensity = np.clip(c.intensity_mean + c.intensity_sd * rng.standard_normal(n), *c.intensity_bounds)
    emissions = fpcm * intensity
    farms = tuple(
        Farm(
            id=i,
            land_area_ha=float(area[i]),
            milk_production_kg=float(milk[i]),
            livestock_units=float(lu[i]),
            nitrogen_kg=float(nitrogen[i]),
            can_kg=float(nitrogen[i] / c.can_n_content),
            urea_kg=0.0,
            pu_kg=0.0,
            p_kg=float(p_kg[i]),
            k_kg=float(k_kg[i]),
            lime_t=float(lime[i]),
            total_emissions_kg=float(emissions[i]),
            fpcm_kg=float(fpcm[i]),
            protein_pct=float(protein[i]),
            fat_pct=float(fat[i]),
        )
        for i in range(n)
    )
    return Population(farms)


# ---------------------------------------------------------------------------
# Stratification


@dataclass(frozen=True)
class QuartileAssignment:
    labels: np.ndarray

    def members(self, q: int) -> np.ndarray:
        """Positions (not ids) of farms in quartile ``q``."""
        return np.flatnonzero(self.labels == q)

    def sizes(self) -> list[int]:
        return [int(np.sum(self.labels == q)) for q in range(4)]


def assign_quartiles(pop: Population) -> QuartileAssignment:
    """Label farms 0-3 by land-area rank, smallest first.

    Ranked order (area, then id) is cut into four contiguous groups whose
    sizes differ by at most one; the leading groups take the remainder.
    """
    n = len(pop)
    if n == 0:
        raise PopulationError("cannot stratify an empty population")
    order = np.lexsort((pop.ids, pop.column("land_area_ha")))
    base, extra = divmod(n, 4)
    labels = np.empty(n, dtype=int)
    start = 0
    for q in range(4):
        size = base + (1 if q < extra else 0)
        labels[order[start : start + size]] = q
        start += size
    labels.setflags(write=False)
    return QuartileAssignment(labels)


__all__ = [
    "FARM_COLUMNS",
    "Farm",
    "Population",
    "PopulationError",
    "QuartileAssignment",
    "SyntheticConstants",
    "assign_quartiles",
    "fpcm_factor",
    "load_population",
    "max_normalize",
    "synthesize_population",
    "write_population",
]

_FIELD_NAMES = tuple(f.name for f in fields(Farm))
assert _FIELD_NAMES == FARM_COLUMNS
