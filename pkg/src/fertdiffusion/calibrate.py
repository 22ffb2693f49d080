"""Back-testing against observed adoption, omega grid calibration,
sensitivity sweeps and the no-network ablation.

Simulation year ``t`` maps to calendar year ``FIRST_CALENDAR_YEAR - 1 + t``,
so year 1 is 2019. Anchor comparisons use the ensemble-mean trajectory.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dynamics import ScenarioConfig
from .montecarlo import CALIBRATION_ITERATIONS, EnsembleSummary, run_ensemble, summarize_ensemble
from .network import SocialNetwork
from .population import Population
from .stats import FitMetrics, LogisticFit, StatsError, fit_logistic, fit_metrics, rmse

FIRST_CALENDAR_YEAR = 2019


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class AnchorSeries:
    """Observed adoption by calendar year.

    Years up to and including ``split_year`` are training rows, later years
    are test rows. ``interpolated`` flags rows not directly observed.
    """

    years: np.ndarray
    adoption: np.ndarray
    interpolated: np.ndarray
    split_year: int

    def __post_init__(self) -> None:
        years = np.asarray(self.years, dtype=int)
        adoption = np.asarray(self.adoption, dtype=float)
        interp = np.asarray(self.interpolated, dtype=bool)
        if not (years.shape == adoption.shape == interp.shape):
            raise CalibrationError("anchor columns differ in length")
        if years.size and np.any(np.diff(years) <= 0):
            raise CalibrationError("anchor years must be strictly increasing")
        if np.any((adoption < 0) | (adoption > 1)):
            raise CalibrationError("anchor adoption values must lie in [0, 1]")
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "adoption", adoption)
        object.__setattr__(self, "interpolated", interp)

    @property
    def sim_years(self) -> np.ndarray:
        return self.years - FIRST_CALENDAR_YEAR + 1

    def mask(self, subset: str = "test", observed_only: bool = False) -> np.ndarray:
        if subset == "train":
            m = self.years <= self.split_year
        elif subset == "test":
            m = self.years > self.split_year
        elif subset == "all":
            m = np.ones(self.years.shape, dtype=bool)
        else:
            raise CalibrationError(f"unknown anchor subset {subset!r}")
        if observed_only:
            m &= ~self.interpolated
        return m

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["year", "adoption", "interpolated"])
            for y, a, i in zip(self.years, self.adoption, self.interpolated):
                writer.writerow([int(y), repr(float(a)), str(bool(i)).lower()])


OBSERVED_ANCHORS = {2019: 0.03, 2021: 0.11, 2024: 0.40}


def default_anchors(split_year: int = 2022) -> AnchorSeries:
    """The three observed points with linear interpolation for 2020, 2022 and 2023."""
    obs_years = np.array(sorted(OBSERVED_ANCHORS))
    obs = np.array([OBSERVED_ANCHORS[y] for y in obs_years])
    years = np.arange(obs_years[0], obs_years[-1] + 1)
    return AnchorSeries(
        years=years,
        adoption=np.interp(years, obs_years, obs),
        interpolated=~np.isin(years, obs_years),
        split_year=split_year,
    )


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no", ""):
        return False
    raise CalibrationError(f"cannot parse {text!r} as a boolean")


def load_anchors(path: str | Path, split_year: int = 2022) -> AnchorSeries:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"year", "adoption"} - set(reader.fieldnames or [])
        if missing:
            raise CalibrationError(f"anchor file missing column(s) {sorted(missing)}")
        years, values, flags = [], [], []
        for row_no, row in enumerate(reader, start=1):
            try:
                years.append(int(row["year"]))
                values.append(float(row["adoption"]))
            except ValueError:
                raise CalibrationError(f"row {row_no}: cannot parse year/adoption") from None
            flags.append(_parse_bool(row.get("interpolated") or "false"))
    return AnchorSeries(np.array(years), np.array(values), np.array(flags), split_year)


def anchors_from_trajectory(mean_adoption: Sequence[float], years: Sequence[int], calendar_years: Iterable[int], split_year: int = 2022) -> AnchorSeries:
    """Anchor series read off a simulated trajectory (for self-consistency checks)."""
    lookup = dict(zip(np.asarray(years).tolist(), np.asarray(mean_adoption, dtype=float).tolist()))
    cal = np.array(list(calendar_years))
    vals = np.array([lookup[int(y - FIRST_CALENDAR_YEAR + 1)] for y in cal])
    return AnchorSeries(cal, vals, np.zeros(cal.shape, dtype=bool), split_year)


def simulated_at_anchors(mean_adoption: np.ndarray, years: np.ndarray, anchors: AnchorSeries) -> np.ndarray:
    lookup = dict(zip(np.asarray(years).tolist(), mean_adoption.tolist()))
    try:
        return np.array([lookup[int(t)] for t in anchors.sim_years])
    except KeyError as exc:
        raise CalibrationError(f"simulation horizon does not cover anchor year {exc}") from None


def anchor_rmse(mean_adoption, years, anchors: AnchorSeries, subset: str = "test", observed_only: bool = False) -> float:
    m = anchors.mask(subset, observed_only)
    if not m.any():
        raise CalibrationError(f"no anchor rows in subset {subset!r}")
    sim = simulated_at_anchors(np.asarray(mean_adoption, dtype=float), years, anchors)
    return rmse(anchors.adoption[m], sim[m])


@dataclass(frozen=True)
class CalibrationResult:
    omega: float
    metrics: FitMetrics | None
    grid: tuple[float, ...]
    test_rmse: dict[float, float]
    train_rmse: dict[float, float]
    n_iterations: int
    base_seed: int
    interpolated_rows_used: bool

    def to_json(self) -> str:
        payload = {
            "winner": self.omega,
            "grid": list(self.grid),
            "candidates": [
                {"omega": w, "test_rmse": self.test_rmse[w], "train_rmse": self.train_rmse[w]} for w in self.grid
            ],
            "metrics": None if self.metrics is None else {"rmse": self.metrics.rmse, "mae": self.metrics.mae, "r2": self.metrics.r2},
            "n_iterations": self.n_iterations,
            "base_seed": self.base_seed,
            "interpolated_rows_used": self.interpolated_rows_used,
        }
        return json.dumps(payload, indent=2)


def calibrate_omega(
    anchors: AnchorSeries,
    candidate_grid: Sequence[float],
    config: ScenarioConfig,
    pop: Population,
    net: SocialNetwork,
    *,
    n_iterations: int = CALIBRATION_ITERATIONS,
    base_seed: int | None = None,
    observed_only: bool = False,
    workers: int | None = None,
) -> CalibrationResult:
    """Pick the omega whose ensemble-mean baseline trajectory has the lowest test-year RMSE.

    Ties go to the smaller omega. Every candidate uses the same seed family.
    """
    grid = tuple(sorted(float(w) for w in candidate_grid))
    if not grid:
        raise CalibrationError("candidate grid is empty")
    if len(anchors.years) < 3 or anchors.years[-1] - anchors.years[0] < 2:
        raise CalibrationError("anchors must span at least 3 years")
    base_seed = config.base_seed if base_seed is None else base_seed
    horizon = max(config.horizon, int(anchors.sim_years.max()))
    base_cfg = replace(config, policy="baseline", horizon=horizon)
    test, train, means = {}, {}, {}
    for w in grid:
        ens = run_ensemble(base_cfg.with_adoption(omega=w), pop, net, n_iterations, base_seed, workers)
        mean = ens.mean_adoption()
        means[w] = mean
        test[w] = anchor_rmse(mean, ens.years, anchors, "test", observed_only)
        train[w] = anchor_rmse(mean, ens.years, anchors, "train", observed_only)
    best = min(grid, key=lambda w: (test[w], w))
    m = anchors.mask("all", observed_only)
    sim = simulated_at_anchors(means[best], np.arange(horizon + 1), anchors)
    try:
        metrics = fit_metrics(anchors.adoption[m], sim[m])
    except StatsError:
        metrics = None
    return CalibrationResult(
        omega=best,
        metrics=metrics,
        grid=grid,
        test_rmse=test,
        train_rmse=train,
        n_iterations=n_iterations,
        base_seed=int(base_seed),
        interpolated_rows_used=not observed_only,
    )


@dataclass(frozen=True)
class AblationResult:
    rmse_with: float
    rmse_without: float

    @property
    def delta(self) -> float:
        return self.rmse_without - self.rmse_with

    def __iter__(self):
        return iter((self.rmse_with, self.rmse_without, self.delta))


def ablate_network(
    config: ScenarioConfig,
    anchors: AnchorSeries,
    pop: Population,
    net: SocialNetwork,
    *,
    n_iterations: int = CALIBRATION_ITERATIONS,
    base_seed: int | None = None,
    subset: str = "all",
    observed_only: bool = False,
    workers: int | None = None,
) -> AblationResult:
    """RMSE against anchors with and without the peer term (omega set to 0)."""
    base_seed = config.base_seed if base_seed is None else base_seed
    horizon = max(config.horizon, int(anchors.sim_years.max()))
    cfg = replace(config, policy="baseline", horizon=horizon)
    out = []
    for c in (cfg, cfg.with_adoption(omega=0.0)):
        ens = run_ensemble(c, pop, net, n_iterations, base_seed, workers)
        out.append(anchor_rmse(ens.mean_adoption(), ens.years, anchors, subset, observed_only))
    return AblationResult(*out)


@dataclass(frozen=True)
class SensitivityPoint:
    value: float
    summaries: dict[str, EnsembleSummary] = field(repr=False)
    fits: dict[str, LogisticFit | None] = field(default_factory=dict)

    def mean_t50(self, scenario: str) -> float:
        return float(np.nanmean(self.summaries[scenario].t50))

    def scenario_order(self) -> tuple[str, ...]:
        """Scenarios sorted by mean t50, fastest first."""
        return tuple(sorted(self.summaries, key=self.mean_t50))


def _safe_fit(summary: EnsembleSummary) -> LogisticFit | None:
    try:
        return fit_logistic(summary.adoption_mean, summary.years)
    except StatsError:
        return None


def sensitivity_omega(
    config: ScenarioConfig,
    pop: Population,
    net: SocialNetwork,
    values: Sequence[float] = (0.20, 0.50, 0.85),
    *,
    scenarios: Sequence[str] = ("baseline", "tax", "subsidy"),
    n_iterations: int = CALIBRATION_ITERATIONS,
    base_seed: int | None = None,
    workers: int | None = None,
) -> dict[float, SensitivityPoint]:
    base_seed = config.base_seed if base_seed is None else base_seed
    out = {}
    for w in values:
        if not 0.0 <= w <= 1.0:
            raise CalibrationError(f"omega must lie in [0, 1], got {w}")
        summaries = {
            s: summarize_ensemble(run_ensemble(config.with_policy(s).with_adoption(omega=w), pop, net, n_iterations, base_seed, workers))
            for s in scenarios
        }
        out[float(w)] = SensitivityPoint(float(w), summaries, {s: _safe_fit(v) for s, v in summaries.items()})
    return out


def subsidy_delta_for_rate(rate: float, config: ScenarioConfig) -> float:
    """Adoption shift for a subsidy rate: linear through the reference point."""
    return config.subsidy_delta * rate / config.reference_subsidy_rate


def sensitivity_subsidy(
    config: ScenarioConfig,
    pop: Population,
    net: SocialNetwork,
    rates: Sequence[float] = (150.0, 200.0, 250.0),
    *,
    n_iterations: int = CALIBRATION_ITERATIONS,
    base_seed: int | None = None,
    workers: int | None = None,
) -> dict[float, SensitivityPoint]:
    base_seed = config.base_seed if base_seed is None else base_seed
    out = {}
    for rate in rates:
        if rate < 0:
            raise CalibrationError(f"subsidy rate must be non-negative, got {rate}")
        cfg = replace(config, policy="subsidy", subsidy_rate=float(rate))
        summary = summarize_ensemble(run_ensemble(cfg, pop, net, n_iterations, base_seed, workers))
        out[float(rate)] = SensitivityPoint(float(rate), {"subsidy": summary}, {"subsidy": _safe_fit(summary)})
    return out


__all__ = [
    "FIRST_CALENDAR_YEAR",
    "OBSERVED_ANCHORS",
    "AblationResult",
    "AnchorSeries",
    "CalibrationError",
    "CalibrationResult",
    "SensitivityPoint",
    "ablate_network",
    "anchor_rmse",
    "anchors_from_trajectory",
    "calibrate_omega",
    "default_anchors",
    "load_anchors",
    "sensitivity_omega",
    "sensitivity_subsidy",
    "simulated_at_anchors",
    "subsidy_delta_for_rate",
]
