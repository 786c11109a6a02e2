"""Monte Carlo harness: replicate, estimate, summarize, and the two
scenario experiments.

``run_mc`` replays a plan: per replication it generates a dataset (seeds
derived from the master seed and the replication index), runs every
configured estimator, and aggregates bias / SD / RMSE / coverage of the
exposure coefficient against each of the four population targets.
Replications are independent work units; results are stored by replication
index and reduced in index order, so summaries are identical no matter how
many worker threads execute them.

``scenario_experiment`` builds the two confounding scenarios (a strong
predictor of the exposure that barely moves the outcome, and the reverse),
runs Spatial, Spatial+ and gSEM with GCV smoothing, and reports which
method tracks the spatially-conditional quantity better.
``aic_bias_experiment`` sweeps fixed smoothing values for the Spatial
model and tabulates mean AIC against mean absolute bias, flagging
smoothing levels that improve AIC while worsening the coefficient.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .basis import BasisSet, fourier_basis
from .dgp import ScenarioConfig, config_hash, generate_dataset
from .errors import DegeneracyError
from .estimators import EstimatorKind, Smoothing, fit_estimator
from .fields import IidSpec, SpectralSpec, derive_seed, make_grid
from .oracle import EstimandSet, compute_estimands
from .pls import DEFAULT_LAMBDA_GRID, sweep_lambda

TARGET_NAMES = ("beta_structural", "beta_uncond", "beta_cond_achieved", "beta_cond_S1")

SCENARIO_STRONG_EXPOSURE = "strong-exposure-weak-outcome"
SCENARIO_STRONG_OUTCOME = "weak-exposure-strong-outcome"
SCENARIO_KINDS = (SCENARIO_STRONG_EXPOSURE, SCENARIO_STRONG_OUTCOME)

# Scenario calibration: high-frequency confounder band well above the S1
# band, moderate noise, grid small enough for desk-scale replication counts.
_SCENARIO_BASE = dict(
    beta=(0.0, 2.0, 1.0, 1.0, 0.0, 0.0),  # b4 filled per scenario
    loadings=(1.0, 0.0, 0.5),  # a2 filled per scenario
    nu_sd=1.0,
    sigma=0.5,
    e_sd=0.5,
    u_sd=0.0,
    m=32,
)
_SCENARIO_S1_BAND = (1, 2)
_SCENARIO_S2_BAND = (6, 10)
_SCENARIO_STRENGTHS = {
    SCENARIO_STRONG_EXPOSURE: {"a2": 2.0, "b4": 0.2},
    SCENARIO_STRONG_OUTCOME: {"a2": 0.2, "b4": 2.0},
}
DEFAULT_SCENARIO_MAX_FREQ = 10


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator plus its basis / smoothing settings inside a plan."""

    kind: EstimatorKind
    max_freq: Optional[int] = None
    smoothing: Smoothing = None
    cutoff: Optional[int] = None
    include_c_in_stage1: bool = True
    label: Optional[str] = None

    @property
    def name(self) -> str:
        return self.label if self.label is not None else self.kind.value


@dataclass(frozen=True)
class MCPlan:
    """A full Monte Carlo specification; targets are computed on build."""

    config: ScenarioConfig
    estimators: tuple[EstimatorSpec, ...]
    R: int
    master_seed: int
    targets: Optional[EstimandSet] = None

    def __post_init__(self):
        if self.R < 1:
            raise ValueError(f"replication count must be >= 1, got {self.R}")
        estimators = tuple(self.estimators)
        if not estimators:
            raise ValueError("plan needs at least one estimator")
        names = [e.name for e in estimators]
        if len(set(names)) != len(names):
            raise ValueError(f"estimator labels must be unique, got {names}")
        object.__setattr__(self, "estimators", estimators)
        if self.targets is None:
            object.__setattr__(self, "targets", compute_estimands(self.config))


@dataclass(frozen=True)
class CellStats:
    """Summary of one (estimator, target) cell over the replications."""

    target_value: float
    mean_bias: float
    mc_se_of_bias: float
    sd: float
    rmse: float
    coverage95: float
    mean_aic: float
    n_success: int
    n_failed: int
    sd_defined: bool


@dataclass(frozen=True)
class MCSummary:
    cells: dict[str, dict[str, CellStats]]  # estimator label -> target -> stats
    targets: EstimandSet
    config_hash: str
    master_seed: int
    R: int

    def to_dict(self) -> dict:
        return {
            "provenance": {
                "config_hash": self.config_hash,
                "master_seed": self.master_seed,
                "R": self.R,
            },
            "targets": self.targets.as_dict(),
            "cells": {
                est: {t: vars(stats).copy() for t, stats in per_target.items()}
                for est, per_target in self.cells.items()
            },
        }


def _resolve_basis(spec: EstimatorSpec, grid, cache: dict) -> Optional[BasisSet]:
    if spec.kind is EstimatorKind.NONSPATIAL_OLS:
        return None
    max_freq = spec.max_freq
    if max_freq is None:
        raise ValueError(f"estimator {spec.name!r} needs max_freq for its basis")
    if max_freq not in cache:
        cache[max_freq] = fourier_basis(grid, max_freq)
    return cache[max_freq]


def _run_replication(config, estimators, bases, master_seed, rep):
    ds = generate_dataset(config, derive_seed(master_seed, rep))
    obs = ds.observations()
    out = {}
    for spec in estimators:
        try:
            rec = fit_estimator(
                spec.kind,
                obs,
                bases[spec.name],
                smoothing=spec.smoothing,
                cutoff=spec.cutoff,
                include_c_in_stage1=spec.include_c_in_stage1,
            )
            out[spec.name] = (rec.beta1_hat, rec.ci95[0], rec.ci95[1], rec.aic)
        except (DegeneracyError, np.linalg.LinAlgError):
            out[spec.name] = None
    return out


def _cell(values, lo, hi, aics, target, n_failed) -> CellStats:
    n_success = values.size
    if n_success == 0:
        nan = float("nan")
        return CellStats(
            target_value=float(target),
            mean_bias=nan,
            mc_se_of_bias=nan,
            sd=nan,
            rmse=nan,
            coverage95=nan,
            mean_aic=nan,
            n_success=0,
            n_failed=n_failed,
            sd_defined=False,
        )
    bias = float(values.mean() - target)
    dev = values - target
    rmse = float(np.sqrt((dev * dev).mean()))
    coverage = float(np.mean((lo <= target) & (target <= hi)))
    mean_aic = float(aics.mean())
    if n_success >= 2:
        sd = float(values.std(ddof=0))  # ddof=0 keeps rmse^2 = bias^2 + sd^2 exact
        mc_se = float(values.std(ddof=1) / np.sqrt(n_success))
        sd_defined = True
    else:
        sd = float("nan")
        mc_se = float("nan")
        sd_defined = False
    return CellStats(
        target_value=float(target),
        mean_bias=bias,
        mc_se_of_bias=mc_se,
        sd=sd,
        rmse=rmse,
        coverage95=coverage,
        mean_aic=mean_aic,
        n_success=n_success,
        n_failed=n_failed,
        sd_defined=sd_defined,
    )


def run_mc(plan: MCPlan, n_jobs: int = 1) -> MCSummary:
    """Execute the plan and summarize each estimator against each target.

    Estimator failures (collinearity, degenerate residuals, singular
    systems) are counted per estimator and never abort the run.  The
    summary is deterministic for a fixed plan regardless of ``n_jobs``.
    """
    grid = make_grid(plan.config.m)
    basis_cache: dict[int, BasisSet] = {}
    bases = {spec.name: _resolve_basis(spec, grid, basis_cache) for spec in plan.estimators}

    reps = range(plan.R)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(
                pool.map(
                    lambda rep: _run_replication(
                        plan.config, plan.estimators, bases, plan.master_seed, rep
                    ),
                    reps,
                )
            )
    else:
        results = [
            _run_replication(plan.config, plan.estimators, bases, plan.master_seed, rep)
            for rep in reps
        ]

    cells: dict[str, dict[str, CellStats]] = {}
    target_map = plan.targets.as_dict()
    for spec in plan.estimators:
        rows = [results[rep][spec.name] for rep in reps]
        ok = [r for r in rows if r is not None]
        n_failed = len(rows) - len(ok)
        values = np.array([r[0] for r in ok])
        lo = np.array([r[1] for r in ok])
        hi = np.array([r[2] for r in ok])
        aics = np.array([r[3] for r in ok])
        cells[spec.name] = {
            t: _cell(values, lo, hi, aics, target_map[t], n_failed) for t in TARGET_NAMES
        }
    return MCSummary(
        cells=cells,
        targets=plan.targets,
        config_hash=config_hash(plan.config),
        master_seed=plan.master_seed,
        R=plan.R,
    )


# ---------------------------------------------------------------------------
# Scenario experiments
# ---------------------------------------------------------------------------


def scenario_config(kind: str) -> ScenarioConfig:
    """The pinned configuration for one confounding scenario."""
    if kind not in SCENARIO_KINDS:
        raise ValueError(f"scenario kind must be one of {SCENARIO_KINDS}, got {kind!r}")
    strength = _SCENARIO_STRENGTHS[kind]
    base = _SCENARIO_BASE
    beta = list(base["beta"])
    beta[4] = strength["b4"]
    loadings = list(base["loadings"])
    loadings[1] = strength["a2"]
    return ScenarioConfig(
        beta=tuple(beta),
        loadings=tuple(loadings),
        nu_sd=base["nu_sd"],
        sigma=base["sigma"],
        spec_S1=SpectralSpec(*_SCENARIO_S1_BAND, decay=0.0, variance=1.0),
        spec_S2=SpectralSpec(*_SCENARIO_S2_BAND, decay=0.0, variance=1.0),
        spec_C=IidSpec(sd=1.0),
        e_sd=base["e_sd"],
        u_sd=base["u_sd"],
        m=base["m"],
    )


def _smoothed_trio(max_freq: int) -> tuple[EstimatorSpec, ...]:
    return (
        EstimatorSpec(kind=EstimatorKind.SPATIAL, max_freq=max_freq),
        EstimatorSpec(kind=EstimatorKind.SPATIAL_PLUS, max_freq=max_freq),
        EstimatorSpec(kind=EstimatorKind.GSEM, max_freq=max_freq),
    )


def default_scenario_plan(
    kind: str,
    r: int = 500,
    master_seed: int = 20240501,
    max_freq: int = DEFAULT_SCENARIO_MAX_FREQ,
) -> MCPlan:
    """The ledgered default plan for a scenario experiment."""
    return MCPlan(
        config=scenario_config(kind),
        estimators=_smoothed_trio(max_freq),
        R=r,
        master_seed=master_seed,
    )


@dataclass(frozen=True)
class ScenarioVerdict:
    """Outcome of one scenario: bias of each method vs the achieved target.

    ``margin_se`` is (|bias of expected loser| - |bias of expected winner|)
    divided by the combined MC standard error; positive means the expected
    ordering held, above 2 means it held clearly.  The gSEM comparison is
    reported, never asserted.
    """

    kind: str
    expected_winner: str
    bias: dict[str, float]
    mc_se: dict[str, float]
    abs_bias: dict[str, float]
    holds: bool
    margin_se: float
    gsem_not_worse_than_both: bool

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "expected_winner": self.expected_winner,
            "bias": dict(self.bias),
            "mc_se": dict(self.mc_se),
            "abs_bias": dict(self.abs_bias),
            "holds": self.holds,
            "margin_se": self.margin_se,
            "gsem_not_worse_than_both": self.gsem_not_worse_than_both,
        }


@dataclass(frozen=True)
class ScenarioResult:
    kind: str
    plan: MCPlan
    summary: MCSummary
    verdict: ScenarioVerdict


def scenario_experiment(kind: str, base: MCPlan) -> ScenarioResult:
    """Run one confounding scenario and compare Spatial vs Spatial+.

    The scenario's strength settings (a2, b4) are imposed on the base
    plan's configuration; estimators are taken from the base plan when it
    already carries the Spatial / Spatial+ / gSEM trio, and replaced by the
    GCV-smoothed trio otherwise.  Bias is judged against the achieved
    spatially-conditional target ``beta_cond_achieved``.
    """
    if kind not in SCENARIO_KINDS:
        raise ValueError(f"scenario kind must be one of {SCENARIO_KINDS}, got {kind!r}")
    strength = _SCENARIO_STRENGTHS[kind]
    beta = list(base.config.beta)
    beta[4] = strength["b4"]
    loadings = list(base.config.loadings)
    loadings[1] = strength["a2"]
    config = replace(base.config, beta=tuple(beta), loadings=tuple(loadings))
    kinds = {spec.kind for spec in base.estimators}
    trio = {EstimatorKind.SPATIAL, EstimatorKind.SPATIAL_PLUS, EstimatorKind.GSEM}
    if kinds == trio:
        estimators = base.estimators
    else:
        max_freq = next(
            (spec.max_freq for spec in base.estimators if spec.max_freq is not None),
            DEFAULT_SCENARIO_MAX_FREQ,
        )
        estimators = _smoothed_trio(max_freq)
    plan = MCPlan(config=config, estimators=estimators, R=base.R, master_seed=base.master_seed)
    summary = run_mc(plan)

    by_kind = {spec.kind: spec.name for spec in plan.estimators}
    cell = {
        k: summary.cells[by_kind[k]]["beta_cond_achieved"]
        for k in (EstimatorKind.SPATIAL, EstimatorKind.SPATIAL_PLUS, EstimatorKind.GSEM)
    }
    bias = {k.value: c.mean_bias for k, c in cell.items()}
    mc_se = {k.value: c.mc_se_of_bias for k, c in cell.items()}
    abs_bias = {k.value: abs(c.mean_bias) for k, c in cell.items()}
    if kind == SCENARIO_STRONG_EXPOSURE:
        winner, loser = EstimatorKind.SPATIAL_PLUS.value, EstimatorKind.SPATIAL.value
    else:
        winner, loser = EstimatorKind.SPATIAL.value, EstimatorKind.SPATIAL_PLUS.value
    combined = math.sqrt(mc_se[winner] ** 2 + mc_se[loser] ** 2)
    margin = (abs_bias[loser] - abs_bias[winner]) / combined if combined > 0 else math.inf
    gsem_ok = abs_bias[EstimatorKind.GSEM.value] <= max(
        abs_bias[EstimatorKind.SPATIAL.value], abs_bias[EstimatorKind.SPATIAL_PLUS.value]
    )
    verdict = ScenarioVerdict(
        kind=kind,
        expected_winner=winner,
        bias=bias,
        mc_se=mc_se,
        abs_bias=abs_bias,
        holds=margin > 0,
        margin_se=margin,
        gsem_not_worse_than_both=gsem_ok,
    )
    return ScenarioResult(kind=kind, plan=plan, summary=summary, verdict=verdict)


# ---------------------------------------------------------------------------
# AIC versus bias
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AicBiasRow:
    lam: float
    mean_aic: float
    mean_bias: float
    abs_mean_bias: float
    mc_se_of_bias: float


@dataclass(frozen=True)
class AicBiasResult:
    """Mean AIC and bias of the Spatial model per fixed smoothing value.

    ``flag`` is true when some lambda beats lambda = 0 on AIC while its
    absolute bias (against the achieved spatially-conditional target) is
    larger by more than two combined MC standard errors.
    """

    rows: tuple[AicBiasRow, ...]
    flag: bool
    flagged_lambdas: tuple[float, ...]
    target: float
    R: int
    n_failed: int

    def to_dict(self) -> dict:
        return {
            "rows": [vars(r).copy() for r in self.rows],
            "flag": self.flag,
            "flagged_lambdas": list(self.flagged_lambdas),
            "target": self.target,
            "R": self.R,
            "n_failed": self.n_failed,
        }


def default_aic_plan(r: int = 300, master_seed: int = 20240707, max_freq: int = 10) -> MCPlan:
    """Default plan for the AIC experiment: the high-frequency-confounder
    scenario where the confounder drives the exposure."""
    return MCPlan(
        config=scenario_config(SCENARIO_STRONG_EXPOSURE),
        estimators=(EstimatorSpec(kind=EstimatorKind.SPATIAL, max_freq=max_freq),),
        R=r,
        master_seed=master_seed,
    )


def aic_bias_experiment(
    base: MCPlan, lambda_grid: Optional[Sequence[float]] = None
) -> AicBiasResult:
    """Fit Spatial at every fixed lambda and tabulate mean AIC vs mean bias.

    The grid must contain lambda = 0, the unpenalized reference row.
    Replications where the unpenalized design is collinear are dropped (and
    counted) for every lambda, keeping rows comparable.
    """
    grid_lams = list(DEFAULT_LAMBDA_GRID if lambda_grid is None else map(float, lambda_grid))
    if 0.0 not in grid_lams:
        raise ValueError("lambda grid must include 0 (the unpenalized reference)")
    spatial = [s for s in base.estimators if s.kind is EstimatorKind.SPATIAL]
    max_freq = spatial[0].max_freq if spatial else DEFAULT_SCENARIO_MAX_FREQ
    grid = make_grid(base.config.m)
    b = fourier_basis(grid, max_freq)
    target = base.targets.beta_cond_achieved

    beta_rows = []
    aic_rows = []
    n_failed = 0
    for rep in range(base.R):
        ds = generate_dataset(base.config, derive_seed(base.master_seed, rep))
        obs = ds.observations()
        F = np.column_stack([np.ones(grid.n), obs.Z, obs.C])
        try:
            sweep = sweep_lambda(obs.Y, F, b, grid_lams, ["intercept", "Z", "C"])
        except (DegeneracyError, np.linalg.LinAlgError):
            n_failed += 1
            continue
        beta_rows.append(sweep.fixed_coefs[:, 1])
        aic_rows.append(sweep.aic)
    if not beta_rows:
        raise DegeneracyError("every replication failed; no AIC/bias table to build")
    betas = np.vstack(beta_rows)  # (R_ok, n_lambda)
    aics = np.vstack(aic_rows)
    r_ok = betas.shape[0]
    bias = betas.mean(axis=0) - target
    if r_ok > 1:
        mc_se = betas.std(axis=0, ddof=1) / np.sqrt(r_ok)
    else:
        mc_se = np.full(len(grid_lams), np.nan)
    mean_aic = aics.mean(axis=0)
    rows = tuple(
        AicBiasRow(
            lam=float(grid_lams[i]),
            mean_aic=float(mean_aic[i]),
            mean_bias=float(bias[i]),
            abs_mean_bias=float(abs(bias[i])),
            mc_se_of_bias=float(mc_se[i]),
        )
        for i in range(len(grid_lams))
    )
    i0 = grid_lams.index(0.0)
    flagged = []
    for i, lam in enumerate(grid_lams):
        if i == i0:
            continue
        combined = math.sqrt(mc_se[i] ** 2 + mc_se[i0] ** 2)
        if (
            mean_aic[i] < mean_aic[i0]
            and combined > 0
            and abs(bias[i]) - abs(bias[i0]) > 2.0 * combined
        ):
            flagged.append(float(lam))
    return AicBiasResult(
        rows=rows,
        flag=bool(flagged),
        flagged_lambdas=tuple(flagged),
        target=float(target),
        R=base.R,
        n_failed=n_failed,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def summary_to_csv(summary: MCSummary, path) -> None:
    """One row per (estimator, target) cell, long format."""
    cols = (
        "estimator,target,target_value,mean_bias,mc_se_of_bias,sd,rmse,"
        "coverage95,mean_aic,n_success,n_failed\n"
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(cols)
        for est, per_target in summary.cells.items():
            for t, c in per_target.items():
                fh.write(
                    f"{est},{t},{c.target_value!r},{c.mean_bias!r},{c.mc_se_of_bias!r},"
                    f"{c.sd!r},{c.rmse!r},{c.coverage95!r},{c.mean_aic!r},"
                    f"{c.n_success},{c.n_failed}\n"
                )


def summary_to_json(summary: MCSummary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def aic_table_to_csv(result: AicBiasResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("lambda,mean_aic,mean_bias,abs_mean_bias,mc_se_of_bias\n")
        for r in result.rows:
            fh.write(
                f"{r.lam!r},{r.mean_aic!r},{r.mean_bias!r},{r.abs_mean_bias!r},"
                f"{r.mc_se_of_bias!r}\n"
            )
