"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .calibrate import CalibrationError, calibrate_omega, default_anchors, load_anchors
from .config import StudyConfig, default_config, load_config
from .dynamics import SCENARIOS, ConfigError
from .montecarlo import abatement_distribution, write_trajectories, default_workers, run_ensemble, summarize_ensemble, write_abatement_csv
from .network import NetworkError
from .pipeline import run_full_study, run_quartile_study
from .population import PopulationError, synthesize_population, write_population

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _config(args) -> StudyConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if getattr(args, "population", None):
        cfg = replace(cfg, population=replace(cfg.population, csv=str(Path(args.population).resolve())))
    if getattr(args, "iterations", None) is not None:
        if args.iterations < 1:
            raise UsageError("--iterations must be >= 1")
        cfg = replace(cfg, iterations=args.iterations, calibration_iterations=args.iterations)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, base_seed=args.seed, scenario=replace(cfg.scenario, base_seed=args.seed))
    return cfg


def cmd_gen_pop(args) -> int:
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    pop = synthesize_population(args.n, args.seed)
    write_population(pop, args.out)
    print(f"wrote {len(pop)} farms to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    pop = cfg.load_population()
    net = cfg.build_network(len(pop))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario_cfg = cfg.scenario.with_policy(args.scenario)
    ens = run_ensemble(scenario_cfg, pop, net, cfg.iterations, cfg.base_seed, args.workers)
    summary = summarize_ensemble(ens)
    summary.to_csv(out / f"ensemble_summary_{args.scenario}.csv")
    write_trajectories(ens.runs, out / f"trajectories_{args.scenario}.csv")
    (out / f"diffusion_metrics_{args.scenario}.json").write_text(json.dumps(summary.metric_table(), indent=2) + "\n")
    if args.scenario != "baseline":
        base = run_ensemble(cfg.scenario.with_policy("baseline"), pop, net, cfg.iterations, cfg.base_seed, args.workers)
        write_abatement_csv(abatement_distribution(base, ens), out / f"abatement_{args.scenario}.csv")
    print(f"{args.scenario}: {ens.n_iterations} runs written to {out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _config(args)
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--grid must be comma-separated numbers, got {args.grid!r}") from None
    anchors = load_anchors(args.anchors, args.split_year) if args.anchors else default_anchors(args.split_year)
    pop = cfg.load_population()
    net = cfg.build_network(len(pop))
    result = calibrate_omega(
        anchors,
        grid,
        cfg.scenario,
        pop,
        net,
        n_iterations=cfg.calibration_iterations,
        base_seed=cfg.base_seed,
        observed_only=args.observed_only,
        workers=args.workers,
    )
    text = result.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_study(args) -> int:
    cfg = _config(args)
    report = run_full_study(cfg, workers=args.workers, include_quartiles=not args.no_quartiles)
    manifest = report.write(args.out_dir)
    n = len(json.loads(manifest.read_text())["artifacts"])
    print(f"{n} artifacts written; manifest at {manifest}")
    return EXIT_OK


def cmd_quartiles(args) -> int:
    cfg = _config(args)
    if args.scenario not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.scenario!r}")
    q = run_quartile_study(cfg, scenario=args.scenario, workers=args.workers)
    paths = q.write_curves(args.out_dir)
    print(f"quartile sizes {q.sizes}; {len(paths)} curve files in {args.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fertdiffusion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file (default: bundled parameterisation)")
        p.add_argument("--population", help="farm CSV overriding the config's population")
        p.add_argument("--iterations", type=int, help="Monte Carlo iterations")
        p.add_argument("--seed", type=int, help="base seed for the run family")
        p.add_argument("--workers", type=int, default=None, help="worker processes (default: $FERTDIFFUSION_WORKERS or 1)")

    p = sub.add_parser("gen-pop", help="write a synthetic farm population CSV")
    p.add_argument("--n", type=int, default=295)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_pop)

    p = sub.add_parser("simulate", help="run one scenario ensemble")
    common(p)
    p.add_argument("--scenario", choices=SCENARIOS, default="baseline")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="grid-search the social-influence weight")
    common(p)
    p.add_argument("--anchors", help="anchor CSV (year, adoption, interpolated)")
    p.add_argument("--grid", default="0.2,0.5,0.85")
    p.add_argument("--split-year", type=int, default=2022)
    p.add_argument("--observed-only", action="store_true", help="ignore interpolated anchor rows")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("study", help="run the full three-scenario study")
    common(p)
    p.add_argument("--out-dir", default="study")
    p.add_argument("--no-quartiles", action="store_true")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("quartiles", help="per-quartile adoption curves")
    common(p)
    p.add_argument("--scenario", choices=SCENARIOS, default="subsidy")
    p.add_argument("--out-dir", default="quartiles")
    p.set_defaults(func=cmd_quartiles)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers()
    try:
        return args.func(args)
    except (UsageError, ConfigError, CalibrationError, PopulationError, NetworkError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
