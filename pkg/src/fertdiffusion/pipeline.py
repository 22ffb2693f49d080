"""Full experiment suite: paired scenario ensembles, distributional shift,
abatement economics, quartile stratification and the on-disk report."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .config import StudyConfig
from .dynamics import SCENARIOS, ScenarioConfig
from .economics import AbatementReport, EconomicsError, abatement_costs, baseline_cost, policy_cost
from .emissions import intensities, post_policy_intensity
from .montecarlo import Ensemble, EnsembleSummary, abatement_distribution, run_ensemble, summarize_ensemble, write_abatement_csv
from .network import SocialNetwork, Snapshot, watts_strogatz
from .population import Population, assign_quartiles
from .stats import (
    ConvergenceReport,
    DensityEstimate,
    KsResult,
    LogisticFit,
    SampleSummary,
    StatsError,
    convergence,
    fit_logistic,
    kde,
    ks_two_sample,
    silverman_bandwidth,
    summarize,
)

POLICY_SCENARIOS = ("tax", "subsidy")


@dataclass
class StudyReport:
    config: StudyConfig
    ensembles: dict[str, Ensemble] = field(repr=False)
    summaries: dict[str, EnsembleSummary] = field(repr=False)
    logistic_fits: dict[str, LogisticFit | None]
    abatement: dict[str, np.ndarray] = field(repr=False)
    convergence: dict[str, ConvergenceReport | None] = field(repr=False)
    intensity_base: np.ndarray = field(repr=False)
    intensity_post: dict[str, np.ndarray] = field(repr=False)
    intensity_summary: dict[str, SampleSummary] = field(repr=False)
    densities: dict[str, DensityEstimate] = field(repr=False)
    ks: dict[str, KsResult]
    abatement_report: AbatementReport | None
    snapshots: dict[str, list[Snapshot]] = field(repr=False)
    quartiles: "QuartileStudy | None" = field(default=None, repr=False)
    skipped: dict[str, str] = field(default_factory=dict)

    def mean_abatement(self, scenario: str) -> float:
        return float(np.mean(self.abatement[scenario]))

    def delta_mu(self, scenario: str) -> float:
        return self.intensity_summary[scenario].mean - self.intensity_summary["base"].mean

    def write(self, out_dir: str | Path) -> Path:
        return write_report(self, out_dir)


def _fit_or_none(summary: EnsembleSummary) -> LogisticFit | None:
    try:
        return fit_logistic(summary.adoption_mean, summary.years)
    except StatsError:
        return None


def run_full_study(
    study: StudyConfig,
    pop: Population | None = None,
    net: SocialNetwork | None = None,
    *,
    scenario_policies: Mapping[str, str] | None = None,
    workers: int | None = None,
    include_quartiles: bool = True,
) -> StudyReport:
    """Baseline, tax and subsidy ensembles on one population and network.

    ``scenario_policies`` maps report labels to the policy actually run, e.g.
    ``{"baseline": "baseline", "tax": "baseline", "subsidy": "baseline"}`` for
    a zero-policy control. All labels share the seed family ``study.base_seed``.
    """
    pop = study.load_population() if pop is None else pop
    net = study.build_network(len(pop)) if net is None else net
    policies = dict(scenario_policies or {s: s for s in SCENARIOS})
    if "baseline" not in policies:
        raise ValueError("scenario_policies needs a 'baseline' entry")
    base_cfg: ScenarioConfig = study.scenario

    ensembles = {
        label: run_ensemble(base_cfg.with_policy(policy), pop, net, study.iterations, study.base_seed, workers)
        for label, policy in policies.items()
    }
    summaries = {label: summarize_ensemble(e) for label, e in ensembles.items()}
    fits = {label: _fit_or_none(s) for label, s in summaries.items()}
    skipped: dict[str, str] = {}

    abatement = {}
    conv = {}
    for label in policies:
        if label == "baseline":
            continue
        totals = abatement_distribution(ensembles["baseline"], ensembles[label])
        abatement[label] = totals
        try:
            conv[label] = convergence(totals)
        except StatsError as exc:
            conv[label] = None
            skipped[f"convergence_{label}"] = str(exc)

    # Carbon intensity before (t=0) and after (t=T) under each scenario.
    ci_base = intensities(pop)
    delta = study.intensity.delta
    ci_post = {
        label: post_policy_intensity(ci_base, delta, float(s.adoption_mean[-1])) for label, s in summaries.items()
    }
    threshold = study.intensity.tail_threshold
    intensity_summary = {"base": summarize(ci_base, threshold)}
    intensity_summary.update({label: summarize(v, threshold) for label, v in ci_post.items()})
    lo = min(ci_base.min(), *(v.min() for v in ci_post.values()))
    hi = max(ci_base.max(), *(v.max() for v in ci_post.values()))
    h = max(silverman_bandwidth(ci_base), *(silverman_bandwidth(v) for v in ci_post.values()))
    grid = np.linspace(lo - 4 * h, hi + 4 * h, 512)
    densities = {"base": kde(ci_base, grid)}
    densities.update({label: kde(v, grid) for label, v in ci_post.items()})
    ks = {label: ks_two_sample(ci_base, ci_post[label]) for label in policies if label != "baseline"}

    report = None
    if "subsidy" in policies:
        sub = summaries["subsidy"]
        alpha = float(sub.adoption_mean[-1])
        dc = policy_cost(pop, alpha, base_cfg.prices) - baseline_cost(pop, base_cfg.prices)
        gov = float(ensembles["subsidy"].subsidy[:, 1:].sum(axis=1).mean())
        try:
            report = abatement_costs(dc, float(np.mean(abatement["subsidy"])), gov)
        except EconomicsError as exc:
            skipped["abatement_report"] = str(exc)
    else:
        skipped["abatement_report"] = "no subsidy scenario in study"

    years = [y for y in study.snapshot_years if y <= base_cfg.horizon]
    snaps = {
        label: [e.runs[0].snapshot(y, net, pop) for y in years] for label, e in ensembles.items()
    }

    quart = None
    if include_quartiles:
        try:
            quart = run_quartile_study(study, pop, workers=workers)
        except ValueError as exc:
            skipped["quartiles"] = str(exc)
    else:
        skipped["quartiles"] = "disabled"

    return StudyReport(
        config=study,
        ensembles=ensembles,
        summaries=summaries,
        logistic_fits=fits,
        abatement=abatement,
        convergence=conv,
        intensity_base=ci_base,
        intensity_post=ci_post,
        intensity_summary=intensity_summary,
        densities=densities,
        ks=ks,
        abatement_report=report,
        snapshots=snaps,
        quartiles=quart,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# Quartiles


@dataclass
class QuartileStudy:
    scenario: str
    sizes: list[int]
    summaries: dict[int, EnsembleSummary] = field(repr=False)
    networks: dict[int, SocialNetwork] = field(repr=False)

    def curve(self, q: int) -> np.ndarray:
        return self.summaries[q].adoption_mean

    def write_curves(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for q, s in self.summaries.items():
            path = out_dir / f"quartile_{q + 1}_curve.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["quartile", "year", "adoption_mean", "adoption_std"])
                for y, m, sd in zip(s.years, s.adoption_mean, s.adoption_std):
                    writer.writerow([q + 1, int(y), repr(float(m)), repr(float(sd))])
            paths.append(path)
        return paths


def run_quartile_study(
    study: StudyConfig,
    pop: Population | None = None,
    *,
    scenario: str = "subsidy",
    n_iterations: int | None = None,
    workers: int | None = None,
) -> QuartileStudy:
    """Simulate each land-area quartile as its own population on its own WS graph.

    Quartile farms keep the normalised scores of the full population, so
    structural differences between quartiles survive the split.
    """
    pop = study.load_population() if pop is None else pop
    labels = assign_quartiles(pop)
    cfg = study.scenario.with_policy(scenario)
    n_iter = study.iterations if n_iterations is None else n_iterations
    summaries, nets = {}, {}
    for q in range(4):
        sub = pop.subset(labels.members(q))
        if len(sub) <= study.network.k:
            raise ValueError(f"quartile {q + 1} has {len(sub)} farms, too few for k={study.network.k}")
        net = watts_strogatz(len(sub), study.network.k, study.network.p, study.network.seed + 1000 * (q + 1))
        nets[q] = net
        summaries[q] = summarize_ensemble(run_ensemble(cfg, sub, net, n_iter, study.base_seed + q + 1, workers))
    return QuartileStudy(scenario=scenario, sizes=labels.sizes(), summaries=summaries, networks=nets)


# ---------------------------------------------------------------------------
# Report writing


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fit_dict(fit: LogisticFit | None):
    if fit is None:
        return None
    return {"K": fit.K, "r": fit.r, "t0": fit.t0, "residual_rmse": fit.residual_rmse, "converged": fit.converged}


def write_report(report: StudyReport, out_dir: str | Path) -> Path:
    """Write all artifacts plus ``manifest.json`` (name -> sha256, skipped tables)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    path = out / "ensemble_summary.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scenario", "year", "adoption_mean", "adoption_std", "emissions_gg_mean", "emissions_gg_std"])
        for label, s in report.summaries.items():
            for row in zip(s.years, s.adoption_mean, s.adoption_std, s.emissions_mean, s.emissions_std):
                writer.writerow([label, int(row[0]), *(repr(float(v)) for v in row[1:])])
    written.append(path)

    for label, ens in report.ensembles.items():
        path = out / f"trajectory_{label}_run0.csv"
        ens.runs[0].to_csv(path)
        written.append(path)

    path = out / "diffusion_metrics.json"
    _dump_json({label: s.metric_table() for label, s in report.summaries.items()}, path)
    written.append(path)

    path = out / "logistic_fits.json"
    _dump_json({label: _fit_dict(f) for label, f in report.logistic_fits.items()}, path)
    written.append(path)

    for label, totals in report.abatement.items():
        path = out / f"abatement_{label}.csv"
        write_abatement_csv(totals, path)
        written.append(path)

    path = out / "convergence.json"
    _dump_json(
        {
            label: None
            if c is None
            else {"final_mean": c.final_mean, "cv": c.cv, "running_mean": [float(v) for v in c.running_mean]}
            for label, c in report.convergence.items()
        },
        path,
    )
    written.append(path)

    path = out / "ks_tests.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["comparison", "d_statistic", "p_value", "n", "m"])
        for label, r in report.ks.items():
            writer.writerow([f"baseline_vs_{label}", repr(r.d_statistic), repr(r.p_value), r.n, r.m])
    written.append(path)

    path = out / "intensity_samples.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        labels = list(report.intensity_post)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["farm", "ci_base", *(f"ci_post_{label}" for label in labels)])
        for i, base in enumerate(report.intensity_base):
            writer.writerow([i, repr(float(base)), *(repr(float(report.intensity_post[label][i])) for label in labels)])
    written.append(path)

    path = out / "intensity_kde.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        labels = list(report.densities)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", *(f"density_{label}" for label in labels)])
        grid = report.densities["base"].grid
        for j, x in enumerate(grid):
            writer.writerow([repr(float(x)), *(repr(float(report.densities[label].density[j])) for label in labels)])
    written.append(path)

    path = out / "intensity_summary.json"
    _dump_json(
        {
            label: {"mean": s.mean, "variance": s.variance, "tail_mass": s.tail_mass, "threshold": s.threshold}
            for label, s in report.intensity_summary.items()
        }
        | {"delta_mu": {label: report.delta_mu(label) for label in report.intensity_post}},
        path,
    )
    written.append(path)

    if report.abatement_report is not None:
        path = out / "abatement_report.json"
        path.write_text(report.abatement_report.to_json() + "\n", encoding="utf-8")
        written.append(path)
        path = out / "abatement_report.txt"
        path.write_text(report.abatement_report.to_text(), encoding="utf-8")
        written.append(path)

    for label, snaps in report.snapshots.items():
        for snap in snaps:
            path = out / f"snapshot_{label}_year{snap.year}.csv"
            snap.to_csv(path)
            written.append(path)

    if report.quartiles is not None:
        written.extend(report.quartiles.write_curves(out))

    manifest = {
        "artifacts": {p.name: _sha256(p) for p in sorted(written)},
        "skipped": dict(sorted(report.skipped.items())),
    }
    _dump_json(manifest, out / "manifest.json")
    return out / "manifest.json"


__all__ = [
    "QuartileStudy",
    "StudyReport",
    "run_full_study",
    "run_quartile_study",
    "write_report",
]
