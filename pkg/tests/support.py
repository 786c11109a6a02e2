"""Shared test utilities: latent-column regressions and random configs."""

import numpy as np

from spatialconfound import IidSpec, ScenarioConfig, SpectralSpec


def ols_coef_and_se(X, y, index):
    """Coefficient and classical standard error for one column of an OLS."""
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    n, k = X.shape
    sigma2 = float(resid @ resid) / (n - k)
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return float(coef[index]), float(np.sqrt(cov[index, index]))


def latent_projection(ds, conditioners):
    """Empirical analogue of a population projection target.

    Regresses Y on (1, Z, *conditioners*) using latent columns and returns
    the Z coefficient and its standard error.
    """
    cols = {"C": ds.C, "S1": ds.S1, "S2": ds.S2, "E": ds.E, "U": ds.U}
    X = np.column_stack([np.ones(ds.grid.n), ds.Z] + [cols[c] for c in conditioners])
    return ols_coef_and_se(X, ds.Y, 1)


def random_config(rng, m=64, allow_spatial_c=True):
    """A randomized, comfortably non-degenerate scenario configuration."""
    def u(lo, hi):
        return float(rng.uniform(lo, hi))

    spatial_c = allow_spatial_c and rng.random() < 0.5
    spec_c = (
        SpectralSpec(1, int(rng.integers(2, 4)), u(0.0, 1.0), u(0.5, 2.0))
        if spatial_c
        else IidSpec(u(0.5, 1.5))
    )
    sign = lambda: float(rng.choice([-1.0, 1.0]))
    return ScenarioConfig(
        beta=(
            u(-1, 1),
            sign() * u(0.5, 2.0),
            sign() * u(0.2, 1.5),
            sign() * u(0.2, 1.5),
            sign() * u(0.2, 1.5),
            sign() * u(0.0, 1.0),
        ),
        loadings=(sign() * u(0.3, 1.5), sign() * u(0.3, 1.5), sign() * u(0.0, 1.0)),
        nu_sd=u(0.5, 1.5),
        sigma=u(0.2, 1.0),
        spec_S1=SpectralSpec(1, int(rng.integers(2, 4)), u(0.0, 1.0), u(0.5, 2.0)),
        spec_S2=SpectralSpec(5, int(rng.integers(6, 9)), u(0.0, 1.0), u(0.5, 2.0)),
        spec_C=spec_c,
        e_sd=u(0.3, 1.2),
        u_sd=u(0.0, 1.0),
        m=m,
    )
