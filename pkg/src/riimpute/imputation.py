"""Imputation of a single incomplete variable: the random-indicator method and
its comparators.

The random-indicator imputer alternates three draws: selection-model
coefficients given the current completed target, a pseudo response indicator
from those coefficients, and new imputations from a regression of the target
on the covariates plus the pseudo indicator. The coefficient on the pseudo
indicator estimates the location shift between observed and missing parts, so
imputations are corrected beyond what an ignorable model would produce.

Comparators: ``mar_impute`` (Bayesian regression imputation assuming an
ignorable mechanism) and ``complete_case`` (drop incomplete rows).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRdot,
    DimensionMismatch,
    InvalidParameter,
    TooFewRows,
)
from .fitters import LinearFit, LogisticFit, logistic_fit, ols_fit
from .mechanism import (
    NonresponseParams,
    ResponseIndicator,
    generate_missingness,
    indicator_values,
)
from .rng import RngStream, mix_stream_id, sample_mvnormal, sample_scaled_inv_chi2

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IncompleteDataset:
    """One incomplete numeric target plus fully observed covariates.

    Missing target cells are NaN; covariates must be complete.
    """

    target: np.ndarray
    covariates: np.ndarray
    target_name: str = "x1"
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        target = np.asarray(self.target, dtype=float)
        covariates = np.asarray(self.covariates, dtype=float)
        if covariates.ndim == 1:
            covariates = covariates[:, None]
        if target.ndim != 1 or covariates.ndim != 2:
            raise DimensionMismatch("target must be 1-d and covariates 2-d")
        if covariates.shape[0] != target.shape[0]:
            raise DimensionMismatch(
                f"covariates have {covariates.shape[0]} rows, target has {target.shape[0]}"
            )
        if np.isnan(covariates).any():
            raise InvalidParameter("covariates must be fully observed")
        names = tuple(self.covariate_names) or tuple(
            f"z{i + 1}" for i in range(covariates.shape[1])
        )
        if len(names) != covariates.shape[1]:
            raise DimensionMismatch("one name per covariate column required")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "covariates", covariates)
        object.__setattr__(self, "covariate_names", names)

    @property
    def n(self) -> int:
        return self.target.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]

    @property
    def observed_mask(self) -> np.ndarray:
        return ~np.isnan(self.target)

    @property
    def response(self) -> ResponseIndicator:
        return ResponseIndicator(self.observed_mask.astype(np.int8))

    @property
    def n_observed(self) -> int:
        return int(self.observed_mask.sum())

    @property
    def n_missing(self) -> int:
        return self.n - self.n_observed

    def require_imputable(self) -> None:
        if self.n_observed < 2:
            raise TooFewRows("imputation needs at least 2 observed target values")
        if self.n_missing < 1:
            raise TooFewRows("nothing to impute: target has no missing values")

    def require_fittable(self, n_params: int) -> None:
        if self.n_observed < n_params + 2:
            raise TooFewRows(
                f"model with {n_params} parameters needs at least {n_params + 2} "
                f"observed rows, got {self.n_observed}"
            )


@dataclass(frozen=True)
class ImputationParams:
    """Regression parameters of the imputation model.

    ``phi`` holds the intercept and covariate coefficients, ``sigma2`` the
    residual variance, ``delta_adj`` the location shift applied per pseudo
    indicator level.
    """

    phi: np.ndarray
    sigma2: float
    delta_adj: float


@dataclass(frozen=True)
class RiConfig:
    """Settings for the random-indicator imputer."""

    iterations: int = 10
    num_imputations: int = 5
    max_rdot_redraws: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 1 or self.num_imputations < 1:
            raise InvalidParameter("iterations and num_imputations must be >= 1")


@dataclass(frozen=True)
class CellMeans:
    """Target means in the four response x pseudo-response cells."""

    mu11: float
    mu10: float
    mu01: float
    mu00: float
    counts: tuple[int, int, int, int]

    @property
    def empty_cells(self) -> tuple[str, ...]:
        labels = ("11", "10", "01", "00")
        return tuple(lab for lab, c in zip(labels, self.counts) if c == 0)

    @property
    def delta_observed(self) -> float:
        return self.mu11 - self.mu10

    @property
    def delta_missing(self) -> float:
        return self.mu01 - self.mu00

    @property
    def grand_mean(self) -> float:
        mus = np.array([self.mu11, self.mu10, self.mu01, self.mu00])
        counts = np.array(self.counts, dtype=float)
        return float(np.nansum(np.where(counts > 0, mus * counts, 0.0)) / counts.sum())


def _with_intercept(z: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(z.shape[0]), z])


def estimate_adjustment(
    data: IncompleteDataset, r, rdot
) -> tuple[LinearFit, ImputationParams]:
    """Fit the observed-part regression with the pseudo-indicator offset.

    Regresses the observed target on intercept, covariates, and (rdot - 1);
    the coefficient on (rdot - 1) is the estimated shift ``delta_adj``.
    """
    r = indicator_values(r)
    rdot = indicator_values(rdot)
    if len(r) != data.n or len(rdot) != data.n:
        raise DimensionMismatch("indicators must match the dataset length")
    obs = r == 1
    rdot_obs = rdot[obs]
    if rdot_obs.size == 0 or rdot_obs.min() == rdot_obs.max():
        raise DegenerateRdot("pseudo indicator is constant among observed rows")
    n_params = data.n_covariates + 2
    data.require_fittable(n_params)

    design = np.column_stack(
        [_with_intercept(data.covariates[obs]), rdot_obs.astype(float) - 1.0]
    )
    fit = ols_fit(design, data.target[obs])
    params = ImputationParams(
        phi=fit.coefficients[:-1],
        sigma2=fit.residual_variance,
        delta_adj=float(fit.coefficients[-1]),
    )
    return fit, params


def predicted_means(
    params: ImputationParams, covariates: np.ndarray, r, rdot
) -> np.ndarray:
    """Model conditional means row-wise.

    Observed rows get ``z.phi + delta_adj * (rdot - 1)``; missing rows get one
    extra shift, ``z.phi + delta_adj * (rdot - 2)``.
    """
    r = indicator_values(r).astype(float)
    rdot = indicator_values(rdot).astype(float)
    covariates = np.asarray(covariates, dtype=float)
    if covariates.ndim == 1:
        covariates = covariates[:, None]
    base = _with_intercept(covariates) @ params.phi
    return base + params.delta_adj * (rdot - 2.0 + r)


def _draw_posterior_coefficients(
    fit: LinearFit, rng: RngStream, coef_slice: slice
) -> tuple[np.ndarray, float]:
    """Noninformative-prior posterior draw for an OLS fit.

    Residual variance is a scaled inverse chi-square draw on the residual
    degrees of freedom; coefficients are multivariate normal around the
    estimate. An exact-fit model (zero residual variance) returns the
    estimates unchanged.
    """
    df = fit.n_rows - fit.n_params
    if df <= 0:
        raise TooFewRows("posterior draw needs positive residual degrees of freedom")
    if fit.residual_variance > 0:
        sigma2_dot = sample_scaled_inv_chi2(df, fit.residual_variance, rng)
    else:
        sigma2_dot = 0.0
    sub_cov = sigma2_dot * fit.gram_inverse[coef_slice, coef_slice]
    coef_dot = sample_mvnormal(fit.coefficients[coef_slice], sub_cov, rng)
    return coef_dot, sigma2_dot


def impute_given_rdot(
    data: IncompleteDataset, r, rdot, rng: RngStream
) -> np.ndarray:
    """Impute the missing target values for a fixed pseudo indicator.

    Estimates the shift from observed rows, draws regression parameters from
    their posterior, predicts each missing row with the shift applied once for
    pseudo-observed rows and twice for pseudo-missing rows, then adds normal
    noise at the drawn residual variance.
    """
    fit, params = estimate_adjustment(data, r, rdot)
    phi_dot, sigma2_dot = _draw_posterior_coefficients(fit, rng, slice(0, fit.n_params - 1))
    draw = ImputationParams(phi=phi_dot, sigma2=sigma2_dot, delta_adj=params.delta_adj)

    r = indicator_values(r)
    mis = r == 0
    means = predicted_means(draw, data.covariates[mis], r[mis], indicator_values(rdot)[mis])
    completed = data.target.copy()
    completed[mis] = means + np.sqrt(sigma2_dot) * rng.generator.standard_normal(mis.sum())
    return completed


def nonresponse_fit(completed_target, covariates, r) -> LogisticFit:
    """Fit the selection model of the response indicator on the completed data."""
    completed_target = np.asarray(completed_target, dtype=float)
    covariates = np.asarray(covariates, dtype=float)
    if covariates.ndim == 1:
        covariates = covariates[:, None]
    design = np.column_stack(
        [np.ones(completed_target.shape[0]), completed_target, covariates]
    )
    return logistic_fit(design, indicator_values(r))


def draw_nonresponse_params(fit: LogisticFit, rng: RngStream) -> NonresponseParams:
    """One approximate posterior draw: normal around the estimate with the fit covariance."""
    draw = sample_mvnormal(fit.coefficients, fit.covariance, rng)
    return NonresponseParams(psi0=draw[0], psi1=draw[1], psi_z=draw[2:])


def draw_psi_posterior(
    completed_target, covariates, r, rng: RngStream
) -> NonresponseParams:
    """Fit the selection model and draw coefficients from its approximate posterior."""
    return draw_nonresponse_params(nonresponse_fit(completed_target, covariates, r), rng)


def draw_rdot(
    completed_target, covariates, psi: NonresponseParams, rng: RngStream
) -> ResponseIndicator:
    """Draw a pseudo response indicator from the selection model on completed data."""
    return generate_missingness(completed_target, covariates, psi, rng)


def _mar_fit(data: IncompleteDataset) -> LinearFit:
    obs = data.observed_mask
    data.require_fittable(data.n_covariates + 1)
    return ols_fit(_with_intercept(data.covariates[obs]), data.target[obs])


def _impute_mar_draw(data: IncompleteDataset, rng: RngStream, fit: LinearFit | None = None) -> np.ndarray:
    """One Bayesian regression imputation of the missing rows (no shift)."""
    fit = fit if fit is not None else _mar_fit(data)
    phi_dot, sigma2_dot = _draw_posterior_coefficients(fit, rng, slice(0, fit.n_params))
    mis = ~data.observed_mask
    completed = data.target.copy()
    means = _with_intercept(data.covariates[mis]) @ phi_dot
    completed[mis] = means + np.sqrt(sigma2_dot) * rng.generator.standard_normal(mis.sum())
    return completed


def mar_impute(data: IncompleteDataset, m: int, rng: RngStream) -> list[np.ndarray]:
    """Multiple imputation under an ignorable mechanism.

    Per imputation: draw residual variance and coefficients from the
    noninformative posterior of the observed-rows regression, then predict
    missing rows and add noise.
    """
    if m < 1:
        raise InvalidParameter("m must be >= 1")
    if data.n_missing == 0:
        logger.warning("target has no missing values; returning %d identical copies", m)
        return [data.target.copy() for _ in range(m)]
    data.require_imputable()
    fit = _mar_fit(data)
    return [_impute_mar_draw(data, rng, fit) for _ in range(m)]


def ri_impute(
    data: IncompleteDataset,
    config: RiConfig,
    nonresponse_columns: tuple[int, ...] | None = None,
) -> list[np.ndarray]:
    """Random-indicator multiple imputation of the incomplete target.

    Runs ``config.num_imputations`` independent chains. Each chain starts from
    missing values resampled out of the observed ones, then repeats for
    ``config.iterations`` sweeps: draw selection coefficients from their
    posterior given the completed target, draw a pseudo response indicator,
    and reimpute the missing rows with the estimated shift.

    ``nonresponse_columns`` restricts which covariate columns enter the
    selection model (default: all of them). If the drawn pseudo indicator is
    constant among observed rows it is redrawn up to
    ``config.max_rdot_redraws`` times, after which the sweep falls back to an
    unshifted imputation and logs a warning.
    """
    if data.n_missing == 0:
        logger.warning(
            "target has no missing values; returning %d identical copies",
            config.num_imputations,
        )
        return [data.target.copy() for _ in range(config.num_imputations)]
    data.require_imputable()
    cols = tuple(range(data.n_covariates)) if nonresponse_columns is None else tuple(nonresponse_columns)
    z_nr = data.covariates[:, cols]

    r = data.response
    obs = data.observed_mask
    observed_values = data.target[obs]
    results: list[np.ndarray] = []
    for chain in range(config.num_imputations):
        rng = RngStream(config.seed, mix_stream_id("ri-chain", chain))
        completed = data.target.copy()
        completed[~obs] = rng.generator.choice(observed_values, size=data.n_missing, replace=True)
        for _ in range(config.iterations):
            psi_dot = draw_psi_posterior(completed, z_nr, r, rng)
            rdot = draw_rdot(completed, z_nr, psi_dot, rng)
            redraws = 0
            while _rdot_degenerate(rdot, r) and redraws < config.max_rdot_redraws:
                rdot = draw_rdot(completed, z_nr, psi_dot, rng)
                redraws += 1
            if _rdot_degenerate(rdot, r):
                logger.warning(
                    "pseudo indicator degenerate after %d redraws; sweep uses zero shift",
                    redraws,
                )
                completed = _impute_mar_draw(data, rng)
            else:
                completed = impute_given_rdot(data, r, rdot, rng)
        results.append(completed)
    return results


def _rdot_degenerate(rdot: ResponseIndicator, r: ResponseIndicator) -> bool:
    vals = rdot.values[r.values == 1]
    return vals.size == 0 or vals.min() == vals.max()


def complete_case(data: IncompleteDataset) -> tuple[np.ndarray, np.ndarray]:
    """Covariates and target restricted to rows with an observed target."""
    n_params = data.n_covariates + 1
    if data.n_observed < n_params + 2:
        raise TooFewRows(
            f"complete-case analysis needs at least {n_params + 2} observed rows, "
            f"got {data.n_observed}"
        )
    obs = data.observed_mask
    return data.covariates[obs].copy(), data.target[obs].copy()


def cell_means(target, r, rdot) -> CellMeans:
    """Empirical target means in the four response x pseudo-response cells.

    Empty cells get NaN means and show up in ``CellMeans.empty_cells``.
    """
    target = np.asarray(target, dtype=float)
    r = indicator_values(r)
    rdot = indicator_values(rdot)
    if not (len(target) == len(r) == len(rdot)):
        raise DimensionMismatch("target and indicators must have equal length")

    means = []
    counts = []
    for rv, dv in ((1, 1), (1, 0), (0, 1), (0, 0)):
        cell = target[(r == rv) & (rdot == dv)]
        counts.append(int(cell.size))
        means.append(float(cell.mean()) if cell.size else float("nan"))
    return CellMeans(
        mu11=means[0], mu10=means[1], mu01=means[2], mu00=means[3], counts=tuple(counts)
    )
