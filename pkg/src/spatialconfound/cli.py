"""Batch command-line front end.

Subcommands: simulate | fit | mc | targets | scenario | aic-bias.

Exit codes: 0 success, 2 usage or config problems, 3 I/O failures,
4 statistical degeneracy (collinear designs, fully spatial exposures,
undefined estimands).  Every output file gets a ``<file>.manifest.json``
sidecar recording the resolved config, seed, and argv needed to reproduce
it byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Optional

from . import __version__
from .dgp import (
    config_to_dict,
    config_hash,
    dataset_to_csv,
    generate_dataset,
    load_config,
    read_observations_csv,
)
from .errors import ConfigError, DegeneracyError
from .estimators import EstimatorKind, fit_estimator
from .basis import fourier_basis
from .mc import (
    EstimatorSpec,
    MCPlan,
    SCENARIO_KINDS,
    aic_bias_experiment,
    aic_table_to_csv,
    default_aic_plan,
    default_scenario_plan,
    run_mc,
    scenario_experiment,
    summary_to_csv,
    summary_to_json,
)
from .oracle import compute_estimands
from .pls import DEFAULT_LAMBDA_GRID

ESTIMATOR_NAMES = tuple(kind.value for kind in EstimatorKind)


def _write_manifest(out_path: str, subcommand: str, argv, config=None, config_path=None,
                    master_seed=None, outputs=()):
    manifest = {
        "subcommand": subcommand,
        "argv": list(argv),
        "config_path": config_path,
        "config": None if config is None else config_to_dict(config),
        "config_hash": None if config is None else config_hash(config),
        "master_seed": master_seed,
        "outputs": list(outputs),
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    path = f"{out_path}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _default_max_freq(m: int) -> int:
    return min(10, (m - 1) // 2)


def _parse_lambdas(text: str):
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad lambda list {text!r}: {exc}") from exc
    if not values:
        raise ConfigError("lambda list is empty")
    return values


def cmd_simulate(args, argv) -> int:
    config = load_config(args.config)
    ds = generate_dataset(config, args.seed)
    dataset_to_csv(ds, args.out, latent=args.latent)
    _write_manifest(
        args.out, "simulate", argv, config=config, config_path=args.config,
        master_seed=args.seed, outputs=[args.out],
    )
    return 0


def cmd_fit(args, argv) -> int:
    obs = read_observations_csv(args.data)
    kind = EstimatorKind(args.estimator)
    basis = None
    if kind is not EstimatorKind.NONSPATIAL_OLS:
        max_freq = args.max_freq or _default_max_freq(obs.grid.m)
        basis = fourier_basis(obs.grid, max_freq)
    smoothing = args.lam if args.lam is not None else (
        _parse_lambdas(args.lambda_grid) if args.lambda_grid else None
    )
    record = fit_estimator(
        kind,
        obs,
        basis,
        smoothing=smoothing,
        cutoff=args.cutoff,
        include_c_in_stage1=not args.no_c_in_stage1,
    )
    json.dump(record.to_dict(), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def cmd_targets(args, argv) -> int:
    config = load_config(args.config)
    targets = compute_estimands(config)
    json.dump(targets.as_dict(), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _estimator_specs(names, max_freq, cutoff, lam) -> tuple[EstimatorSpec, ...]:
    specs = []
    for name in names:
        kind = EstimatorKind(name)
        specs.append(
            EstimatorSpec(
                kind=kind,
                max_freq=None if kind is EstimatorKind.NONSPATIAL_OLS else max_freq,
                smoothing=lam,
                cutoff=cutoff if kind is EstimatorKind.SPATIAL_PLUS_LOWFREQ else None,
            )
        )
    return tuple(specs)


def cmd_mc(args, argv) -> int:
    config = load_config(args.config)
    names = [n.strip() for n in args.estimators.split(",") if n.strip()]
    for n in names:
        if n not in ESTIMATOR_NAMES:
            raise ConfigError(
                f"unknown estimator {n!r}; valid names: {', '.join(ESTIMATOR_NAMES)}"
            )
    max_freq = args.max_freq or _default_max_freq(config.m)
    if "spatial-plus-lowfreq" in names and args.cutoff is None:
        raise ConfigError("spatial-plus-lowfreq requires --cutoff")
    plan = MCPlan(
        config=config,
        estimators=_estimator_specs(names, max_freq, args.cutoff, args.lam),
        R=args.reps,
        master_seed=args.seed,
    )
    summary = run_mc(plan, n_jobs=args.threads)
    csv_path = f"{args.out}.csv"
    json_path = f"{args.out}.json"
    summary_to_csv(summary, csv_path)
    summary_to_json(summary, json_path)
    _write_manifest(
        args.out, "mc", argv, config=config, config_path=args.config,
        master_seed=args.seed, outputs=[csv_path, json_path],
    )
    return 0


def cmd_scenario(args, argv) -> int:
    if args.config:
        config = load_config(args.config)
        base = MCPlan(
            config=config,
            estimators=default_scenario_plan(args.kind, r=args.reps).estimators,
            R=args.reps,
            master_seed=args.seed,
        )
    else:
        base = default_scenario_plan(args.kind, r=args.reps, master_seed=args.seed,
                                     max_freq=args.max_freq)
    result = scenario_experiment(args.kind, base)
    csv_path = f"{args.out}.csv"
    json_path = f"{args.out}.json"
    summary_to_csv(result.summary, csv_path)
    payload = {"verdict": result.verdict.to_dict(), "summary": result.summary.to_dict()}
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(
        args.out, "scenario", argv, config=result.plan.config, config_path=args.config,
        master_seed=args.seed, outputs=[csv_path, json_path],
    )
    return 0


def cmd_aic_bias(args, argv) -> int:
    if args.config:
        config = load_config(args.config)
        base = MCPlan(
            config=config,
            estimators=default_aic_plan(r=args.reps).estimators,
            R=args.reps,
            master_seed=args.seed,
        )
    else:
        base = default_aic_plan(r=args.reps, master_seed=args.seed, max_freq=args.max_freq)
    lambdas = _parse_lambdas(args.lambdas) if args.lambdas else list(DEFAULT_LAMBDA_GRID)
    result = aic_bias_experiment(base, lambdas)
    csv_path = f"{args.out}.csv"
    json_path = f"{args.out}.json"
    aic_table_to_csv(result, csv_path)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(
        args.out, "aic-bias", argv, config=base.config, config_path=args.config,
        master_seed=args.seed, outputs=[csv_path, json_path],
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spatialconfound",
        description="Spatial-confounding simulation and estimation laboratory.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="generate a dataset CSV from a config")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--latent", action="store_true", help="include latent field columns")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one estimator on a dataset CSV")
    p.add_argument("--data", required=True, help="dataset CSV (x,y,Z,C,Y)")
    p.add_argument("--estimator", required=True, choices=ESTIMATOR_NAMES)
    p.add_argument("--max-freq", type=int, default=None, dest="max_freq")
    p.add_argument("--lam", type=float, default=None,
                   help="fixed smoothing value (default: GCV selection)")
    p.add_argument("--lambda-grid", default=None, dest="lambda_grid",
                   help="comma-separated GCV grid")
    p.add_argument("--cutoff", type=int, default=None,
                   help="frequency cutoff for spatial-plus-lowfreq")
    p.add_argument("--no-c-in-stage1", action="store_true", dest="no_c_in_stage1",
                   help="exclude C from the Spatial+ exposure model")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("targets", help="print the population estimands for a config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_targets)

    p = sub.add_parser("mc", help="run a Monte Carlo study")
    p.add_argument("--config", required=True)
    p.add_argument("--estimators", default="nonspatial,spatial,spatial-plus,gsem",
                   help=f"comma-separated subset of: {', '.join(ESTIMATOR_NAMES)}")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-freq", type=int, default=None, dest="max_freq")
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads for replications (default: all cores)")
    p.add_argument("--out", required=True, help="output path stem (.csv/.json appended)")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("scenario", help="run one of the two confounding scenarios")
    p.add_argument("--kind", required=True, choices=SCENARIO_KINDS)
    p.add_argument("--config", default=None, help="override the default base config")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--seed", type=int, default=20240501)
    p.add_argument("--max-freq", type=int, default=10, dest="max_freq")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("aic-bias", help="tabulate mean AIC vs bias over smoothing values")
    p.add_argument("--config", default=None)
    p.add_argument("--reps", type=int, default=300)
    p.add_argument("--seed", type=int, default=20240707)
    p.add_argument("--max-freq", type=int, default=10, dest="max_freq")
    p.add_argument("--lambdas", default=None, help="comma-separated lambda table")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aic_bias)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegeneracyError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
