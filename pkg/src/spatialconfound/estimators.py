"""The six exposure-coefficient estimators.

All estimators consume only the observed data (Z, C, Y, grid); latent
fields never enter.  Each returns an ``EstimateRecord`` with the point
estimate for the exposure coefficient, a model-based standard error, the
per-stage smoothing parameters and effective degrees of freedom, the
outcome-stage AIC, and a few numeric diagnostics.

Methods:

    NonSpatialOLS       OLS of Y on (1, Z, C)
    RSR                 OLS of Y on (1, Z, C, basis projected off (1, Z, C));
                        leaves the exposure coefficient of the plain OLS
                        unchanged (only the residual accounting moves)
    Spatial             penalized fit of Y on (1, Z, C) + basis
    SpatialPlus         stage 1 residualizes Z on (1, C) + basis, stage 2
                        fits Y on (1, residual, C) + basis
    GSEM                residualize Y, Z, C each on (1) + basis, then OLS
                        of residuals on residuals
    SpatialPlusLowFreq  SpatialPlus on the basis restricted to labels
                        <= cutoff, unpenalized by default

Two-stage standard errors come from the final stage only; no propagation
of first-stage uncertainty is attempted, so coverage for those methods is
approximate by construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .basis import BasisSet, column_names, empty_basis, restrict_low_frequency
from .dgp import Observations
from .errors import DegenerateResidualError
from .pls import FitResult, fit_pls, project_out, select_lambda_gcv

Smoothing = Union[None, float, Sequence[float]]

Z_CRIT_95 = 1.96

# Stage-1 residual variance below this share of var(Z) means that, to
# working precision, the exposure is a function of the conditioning set.
RESIDUAL_DEGENERACY_SHARE = 1e-12


class EstimatorKind(enum.Enum):
    NONSPATIAL_OLS = "nonspatial"
    RSR = "rsr"
    SPATIAL = "spatial"
    SPATIAL_PLUS = "spatial-plus"
    GSEM = "gsem"
    SPATIAL_PLUS_LOWFREQ = "spatial-plus-lowfreq"


@dataclass(frozen=True)
class EstimateRecord:
    kind: EstimatorKind
    beta1_hat: float
    se: float
    ci95: tuple[float, float]
    lambdas: dict[str, float]
    edf: dict[str, float]
    aic: float
    diagnostics: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "beta1_hat": self.beta1_hat,
            "se": self.se,
            "ci95": list(self.ci95),
            "lambdas": dict(self.lambdas),
            "edf": dict(self.edf),
            "aic": self.aic,
            "diagnostics": dict(self.diagnostics),
        }


def _record(
    kind: EstimatorKind,
    beta1: float,
    se: float,
    lambdas: dict[str, float],
    edf: dict[str, float],
    aic: float,
    diagnostics: dict[str, float],
) -> EstimateRecord:
    half = Z_CRIT_95 * se
    return EstimateRecord(
        kind=kind,
        beta1_hat=float(beta1),
        se=float(se),
        ci95=(float(beta1 - half), float(beta1 + half)),
        lambdas=lambdas,
        edf=edf,
        aic=float(aic),
        diagnostics=diagnostics,
    )


def _fixed_design(obs: Observations) -> tuple[np.ndarray, list[str]]:
    n = obs.grid.n
    for name in ("Z", "C", "Y"):
        v = getattr(obs, name)
        if np.asarray(v).shape != (n,):
            raise ValueError(f"{name} has wrong length for the grid")
    if n <= 3:
        raise ValueError(f"need more than 3 observations, got {n}")
    F = np.column_stack([np.ones(n), obs.Z, obs.C])
    return F, ["intercept", "Z", "C"]


def _design_cond(M: np.ndarray) -> float:
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else math.inf


def _fit_stage(y, F, b: BasisSet, smoothing: Smoothing, names) -> FitResult:
    if smoothing is None:
        return select_lambda_gcv(y, F, b, None, names)
    if isinstance(smoothing, (int, float, np.floating, np.integer)) and not isinstance(
        smoothing, bool
    ):
        return fit_pls(y, F, b, float(smoothing), names)
    return select_lambda_gcv(y, F, b, smoothing, names)


def fit_nonspatial(obs: Observations) -> EstimateRecord:
    """OLS of the outcome on (1, Z, C): the unconditional-target estimator."""
    F, names = _fixed_design(obs)
    fit = fit_pls(obs.Y, F, empty_basis(obs.grid.n), 0.0, names)
    se = float(np.sqrt(fit.cov_fixed[1, 1]))
    return _record(
        EstimatorKind.NONSPATIAL_OLS,
        fit.fixed_coefs[1],
        se,
        lambdas={},
        edf={"outcome": fit.edf},
        aic=fit.aic,
        diagnostics={"fixed_cond": _design_cond(F)},
    )


def fit_rsr(obs: Observations, b: BasisSet) -> EstimateRecord:
    """Restricted spatial regression: spatial terms projected off (1, Z, C).

    The basis block is orthogonalized against the fixed design before
    entering the outcome OLS, so the exposure coefficient (a Frisch-Waugh
    identity) matches plain OLS; only the error accounting changes.
    """
    F, names = _fixed_design(obs)
    if b.p:
        b_perp = project_out(b.columns, F)
        joint = np.column_stack([F, b_perp])
        joint_names = names + [f"rsr:{c}" for c in column_names(b)]
    else:
        joint = F
        joint_names = names
    fit = fit_pls(obs.Y, joint, empty_basis(obs.grid.n), 0.0, joint_names)
    se = float(np.sqrt(fit.cov_fixed[1, 1]))
    return _record(
        EstimatorKind.RSR,
        fit.fixed_coefs[1],
        se,
        lambdas={},
        edf={"outcome": fit.edf},
        aic=fit.aic,
        diagnostics={"fixed_cond": _design_cond(F)},
    )


def fit_spatial(obs: Observations, b: BasisSet, smoothing: Smoothing = None) -> EstimateRecord:
    """Penalized outcome regression with the basis entered directly."""
    F, names = _fixed_design(obs)
    fit = _fit_stage(obs.Y, F, b, smoothing, names)
    se = float(np.sqrt(fit.cov_fixed[1, 1]))
    return _record(
        EstimatorKind.SPATIAL,
        fit.fixed_coefs[1],
        se,
        lambdas={"outcome": fit.lam},
        edf={"outcome": fit.edf},
        aic=fit.aic,
        diagnostics={"fixed_cond": _design_cond(F)},
    )


def _spatial_plus_stages(
    obs: Observations,
    b: BasisSet,
    smoothing: Smoothing,
    include_c_in_stage1: bool,
) -> tuple[FitResult, FitResult, np.ndarray]:
    n = obs.grid.n
    ones = np.ones(n)
    if include_c_in_stage1:
        F1 = np.column_stack([ones, obs.C])
        names1 = ["intercept", "C"]
    else:
        F1 = ones[:, None]
        names1 = ["intercept"]
    stage1 = _fit_stage(obs.Z, F1, b, smoothing, names1)
    r_z = stage1.residuals
    var_z = float(np.asarray(obs.Z).var())
    if float(r_z.var()) < RESIDUAL_DEGENERACY_SHARE * var_z or var_z == 0.0:
        raise DegenerateResidualError(
            "exposure residuals are numerically zero after spatial adjustment: "
            "the exposure is fully spatial and the spatially-conditional "
            "coefficient is not identified"
        )
    F2 = np.column_stack([ones, r_z, obs.C])
    stage2 = _fit_stage(obs.Y, F2, b, smoothing, ["intercept", "r_Z", "C"])
    return stage1, stage2, r_z


def fit_spatial_plus(
    obs: Observations,
    b: BasisSet,
    smoothing: Smoothing = None,
    include_c_in_stage1: bool = True,
) -> EstimateRecord:
    """Two-stage estimator: residualize the exposure, then fit the outcome.

    ``smoothing`` applies to both stages: None lets each stage pick its own
    GCV smoothing on the default grid, a float fixes that value for both,
    and a sequence is used as the GCV grid of each stage independently.

    Raises ``DegenerateResidualError`` when stage 1 leaves numerically zero
    residual variance (a fully spatial exposure).
    """
    _fixed_design(obs)  # validates shapes, n > 3
    stage1, stage2, r_z = _spatial_plus_stages(obs, b, smoothing, include_c_in_stage1)
    se = float(np.sqrt(stage2.cov_fixed[1, 1]))
    var_z = float(np.asarray(obs.Z).var())
    return _record(
        EstimatorKind.SPATIAL_PLUS,
        stage2.fixed_coefs[1],
        se,
        lambdas={"exposure": stage1.lam, "outcome": stage2.lam},
        edf={"exposure": stage1.edf, "outcome": stage2.edf},
        aic=stage2.aic,
        diagnostics={
            "exposure_residual_share": float(r_z.var() / var_z),
        },
    )


def fit_gsem(obs: Observations, b: BasisSet, smoothing: Smoothing = None) -> EstimateRecord:
    """Residualize outcome, exposure and covariate on space, then OLS.

    Each variable is residualized on (intercept + basis) with its own
    smoothing; the final stage regresses outcome residuals on exposure and
    covariate residuals.
    """
    F, _ = _fixed_design(obs)
    n = obs.grid.n
    ones = np.ones(n)[:, None]
    fits = {}
    resids = {}
    for name, values in (("outcome", obs.Y), ("exposure", obs.Z), ("covariate", obs.C)):
        fits[name] = _fit_stage(values, ones, b, smoothing, ["intercept"])
        resids[name] = fits[name].residuals
    var_z = float(np.asarray(obs.Z).var())
    if var_z == 0.0 or float(resids["exposure"].var()) < RESIDUAL_DEGENERACY_SHARE * var_z:
        raise DegenerateResidualError(
            "exposure residuals are numerically zero after spatial adjustment: "
            "the exposure is fully spatial and the spatially-conditional "
            "coefficient is not identified"
        )
    final_design = np.column_stack([np.ones(n), resids["exposure"], resids["covariate"]])
    final = fit_pls(
        resids["outcome"], final_design, empty_basis(n), 0.0, ["intercept", "r_Z", "r_C"]
    )
    se = float(np.sqrt(final.cov_fixed[1, 1]))
    return _record(
        EstimatorKind.GSEM,
        final.fixed_coefs[1],
        se,
        lambdas={name: fits[name].lam for name in fits},
        edf={**{name: fits[name].edf for name in fits}, "final_ols": final.edf},
        aic=final.aic,
        diagnostics={
            "exposure_residual_share": float(resids["exposure"].var() / var_z),
        },
    )


def fit_spatial_plus_lowfreq(
    obs: Observations,
    b: BasisSet,
    cutoff: int,
    smoothing: Smoothing = 0.0,
    include_c_in_stage1: bool = True,
) -> EstimateRecord:
    """SpatialPlus on the low-frequency block of the basis.

    Keeps only basis columns with frequency label <= cutoff and runs both
    stages unpenalized by default (pass a different ``smoothing`` to
    override).  Targets the coefficient conditional on C and the
    low-frequency confounder only.
    """
    restricted = restrict_low_frequency(b, cutoff)
    rec = fit_spatial_plus(obs, restricted, smoothing, include_c_in_stage1)
    return replace(
        rec,
        kind=EstimatorKind.SPATIAL_PLUS_LOWFREQ,
        diagnostics={**rec.diagnostics, "cutoff": float(cutoff)},
    )


def fit_estimator(
    kind: EstimatorKind,
    obs: Observations,
    b: Optional[BasisSet] = None,
    smoothing: Smoothing = None,
    cutoff: Optional[int] = None,
    include_c_in_stage1: bool = True,
) -> EstimateRecord:
    """Dispatch a single estimator by kind with uniform settings."""
    if kind is EstimatorKind.NONSPATIAL_OLS:
        return fit_nonspatial(obs)
    if b is None:
        raise ValueError(f"estimator {kind.value!r} needs a basis")
    if kind is EstimatorKind.RSR:
        return fit_rsr(obs, b)
    if kind is EstimatorKind.SPATIAL:
        return fit_spatial(obs, b, smoothing)
    if kind is EstimatorKind.SPATIAL_PLUS:
        return fit_spatial_plus(obs, b, smoothing, include_c_in_stage1)
    if kind is EstimatorKind.GSEM:
        return fit_gsem(obs, b, smoothing)
    if kind is EstimatorKind.SPATIAL_PLUS_LOWFREQ:
        if cutoff is None:
            raise ValueError("spatial-plus-lowfreq needs a cutoff")
        smoothing = 0.0 if smoothing is None else smoothing
        return fit_spatial_plus_lowfreq(obs, b, cutoff, smoothing, include_c_in_stage1)
    raise ValueError(f"unknown estimator kind {kind!r}")
