"""Seeded Monte Carlo ensembles of scenario runs.

Run ``i`` of an ensemble uses a seed derived from ``(base_seed, i)`` only,
so ensembles of different scenarios built from the same base seed are
paired run-by-run on identical random streams.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import ScenarioConfig, Trajectory, run_scenario
from .economics import total_abatement
from .network import SocialNetwork
from .population import Population
from .stats import DiffusionMetrics, diffusion_metrics

WORKERS_ENV = "FERTDIFFUSION_WORKERS"
ANALYSIS_ITERATIONS = 250
CALIBRATION_ITERATIONS = 50


def derive_run_seed(base_seed: int, run_index: int) -> int:
    """Stable 64-bit seed for run ``run_index`` of a family."""
    state = np.random.SeedSequence([int(base_seed), int(run_index)]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_chunk(args) -> list[Trajectory]:
    config, pop, net, seeds = args
    return [run_scenario(config, pop, net, s) for s in seeds]


@dataclass(frozen=True)
class Ensemble:
    runs: tuple[Trajectory, ...]
    scenario: str
    base_seed: int
    config: ScenarioConfig

    @property
    def n_iterations(self) -> int:
        return len(self.runs)

    @property
    def years(self) -> np.ndarray:
        return self.runs[0].years

    @property
    def adoption(self) -> np.ndarray:
        """(runs, years) adoption fractions."""
        return np.vstack([r.adoption for r in self.runs])

    @property
    def emissions(self) -> np.ndarray:
        return np.vstack([r.emissions_gg for r in self.runs])

    @property
    def subsidy(self) -> np.ndarray:
        return np.vstack([r.subsidy_eur for r in self.runs])

    @property
    def tax(self) -> np.ndarray:
        return np.vstack([r.tax_eur for r in self.runs])

    def mean_adoption(self) -> np.ndarray:
        return self.adoption.mean(axis=0)

    def summary(self) -> "EnsembleSummary":
        return summarize_ensemble(self)


def run_ensemble(
    config: ScenarioConfig,
    pop: Population,
    net: SocialNetwork,
    n: int = ANALYSIS_ITERATIONS,
    base_seed: int | None = None,
    workers: int | None = None,
) -> Ensemble:
    """``n`` independent runs; the result does not depend on ``workers``."""
    if n < 1:
        raise ValueError(f"ensemble needs n >= 1, got {n}")
    base_seed = config.base_seed if base_seed is None else base_seed
    seeds = [derive_run_seed(base_seed, i) for i in range(n)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n == 1:
        runs = _run_chunk((config, pop, net, seeds))
    else:
        chunks = [seeds[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(config, pop, net, c) for c in chunks]))
        # Re-interleave so run order matches seed order.
        runs = [None] * n
        for w, part in enumerate(parts):
            for j, traj in enumerate(part):
                runs[w + j * workers] = traj
    return Ensemble(runs=tuple(runs), scenario=config.policy, base_seed=int(base_seed), config=config)


@dataclass(frozen=True)
class EnsembleSummary:
    scenario: str
    years: np.ndarray
    adoption_mean: np.ndarray
    adoption_std: np.ndarray
    emissions_mean: np.ndarray
    emissions_std: np.ndarray
    metrics: tuple[DiffusionMetrics, ...]

    def _values(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(m, name) is None else getattr(m, name) for m in self.metrics], dtype=float)

    @property
    def t50(self) -> np.ndarray:
        return self._values("t50")

    @property
    def t90(self) -> np.ndarray:
        return self._values("t90")

    @property
    def peak_velocity(self) -> np.ndarray:
        return self._values("peak_velocity")

    @property
    def peak_year(self) -> np.ndarray:
        return self._values("peak_year")

    def metric_table(self) -> dict[str, dict[str, float]]:
        """Mean/std of each diffusion metric over runs that reached it."""
        out = {}
        for name in ("t50", "t90", "peak_velocity", "peak_year"):
            v = self._values(name)
            ok = v[~np.isnan(v)]
            out[name] = {
                "mean": float(ok.mean()) if ok.size else float("nan"),
                "std": float(ok.std(ddof=1)) if ok.size > 1 else 0.0,
                "reached": int(ok.size),
            }
        return out

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["scenario", "year", "adoption_mean", "adoption_std", "emissions_gg_mean", "emissions_gg_std"])
            for row in zip(self.years, self.adoption_mean, self.adoption_std, self.emissions_mean, self.emissions_std):
                writer.writerow([self.scenario, int(row[0]), *(repr(float(v)) for v in row[1:])])


def summarize_ensemble(ens: Ensemble) -> EnsembleSummary:
    adoption = ens.adoption
    emissions = ens.emissions
    ddof = 1 if ens.n_iterations > 1 else 0
    return EnsembleSummary(
        scenario=ens.scenario,
        years=ens.years,
        adoption_mean=adoption.mean(axis=0),
        adoption_std=adoption.std(axis=0, ddof=ddof),
        emissions_mean=emissions.mean(axis=0),
        emissions_std=emissions.std(axis=0, ddof=ddof),
        metrics=tuple(diffusion_metrics(r.adoption, r.years) for r in ens.runs),
    )


def abatement_distribution(base_ens: Ensemble, policy_ens: Ensemble) -> np.ndarray:
    """Per-run cumulative abatement (t CO2-eq) over years ``1..T``, paired by run index."""
    if base_ens.n_iterations != policy_ens.n_iterations:
        raise ValueError("ensembles differ in run count")
    if not np.array_equal(base_ens.years, policy_ens.years):
        raise ValueError("ensembles differ in horizon")
    return np.array(
        [total_abatement(b.emissions_gg[1:], p.emissions_gg[1:]) for b, p in zip(base_ens.runs, policy_ens.runs)]
    )


def write_abatement_csv(totals: Sequence[float], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run", "tonnes_co2eq"])
        for i, v in enumerate(totals):
            writer.writerow([i, repr(float(v))])


def write_trajectories(runs: Sequence[Trajectory], path: str | Path) -> None:
    """Long-form CSV of many runs: the single-run columns plus a ``run`` index."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run", "year", "adoption_fraction", "emissions_gg", "tax_eur", "subsidy_eur"])
        for i, traj in enumerate(runs):
            for row in traj.rows():
                writer.writerow([i, row[0], *(repr(v) for v in row[1:])])


__all__ = [
    "ANALYSIS_ITERATIONS",
    "CALIBRATION_ITERATIONS",
    "WORKERS_ENV",
    "Ensemble",
    "EnsembleSummary",
    "abatement_distribution",
    "default_workers",
    "derive_run_seed",
    "run_ensemble",
    "summarize_ensemble",
    "write_abatement_csv",
    "write_trajectories",
]
