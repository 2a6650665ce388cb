"""Multinomial component densities and the standard (aspatial) mixture."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import NumericError

# Floor applied to category probabilities after every M-step; keeps
# log-densities finite when a fitted category probability collapses.
LAMBDA_FLOOR = 1e-10


@dataclass
class CountMatrix:
    """Region-by-category count data.

    ``y`` is an (n, J) non-negative integer matrix; row totals ``m`` are
    derived.  Rows with zero total carry no information and are rejected:
    filter them out before constructing the matrix.
    """

    y: np.ndarray
    m: np.ndarray = field(init=False)

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.ndim != 2:
            raise ValueError(f"counts must be 2-dimensional, got shape {y.shape}")
        if y.shape[1] < 2:
            raise ValueError("need at least two count categories")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(y == np.floor(y)):
                raise ValueError("counts must be integers")
            y = y.astype(np.int64)
        if np.any(y < 0):
            raise ValueError("counts must be non-negative")
        self.y = y
        self.m = y.sum(axis=1)
        if np.any(self.m < 1):
            bad = np.flatnonzero(self.m < 1)
            raise ValueError(
                f"rows with zero total counts are not allowed (rows {bad.tolist()}); "
                "filter empty regions before building the count matrix"
            )

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def J(self):
        return self.y.shape[1]


def floor_simplex(lam, floor=LAMBDA_FLOOR):
    """Clamp probabilities below at ``floor`` and renormalize each row."""
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    lam = np.maximum(lam, floor)
    return lam / lam.sum(axis=1, keepdims=True)


def log_multinomial_pmf(y, lam_k, include_coefficient=True):
    """Log density of one count vector under category probabilities lam_k.

    The combinatorial coefficient log m! - sum log y_j! is evaluated with
    log-gamma and added only when ``include_coefficient`` is set.
    """
    y = np.asarray(y, dtype=float)
    lam_k = np.asarray(lam_k, dtype=float)
    if y.shape != lam_k.shape:
        raise ValueError(f"shape mismatch: counts {y.shape} vs probabilities {lam_k.shape}")
    if np.any((lam_k <= 0) & (y > 0)):
        raise NumericError("zero category probability with positive count; flooring failed")
    loglam = np.where(y > 0, np.log(np.where(lam_k > 0, lam_k, 1.0)), 0.0)
    out = float(np.dot(y, loglam))
    if include_coefficient:
        out += float(gammaln(y.sum() + 1) - gammaln(y + 1).sum())
    return out


def log_pmf_matrix(data, lam, include_coefficient=True):
    """(n, K) matrix of per-region, per-component multinomial log densities."""
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    if lam.shape[1] != data.J:
        raise ValueError(f"probability rows have length {lam.shape[1]}, expected {data.J}")
    if np.any(lam <= 0):
        raise NumericError("component probabilities must be strictly positive; apply flooring")
    out = data.y @ np.log(lam).T
    if include_coefficient:
        out = out + (gammaln(data.m + 1) - gammaln(data.y + 1).sum(axis=1))[:, None]
    return out


def standard_mixture_loglik(data, lam, weights):
    """Log-likelihood of the independent mixture: sum_i log sum_k p_k f(y_i | lam_k)."""
    weights = np.asarray(weights, dtype=float)
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    if weights.shape != (lam.shape[0],):
        raise ValueError("one mixing weight per component is required")
    if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0):
        raise ValueError("mixing weights must form a probability vector")
    logf = log_pmf_matrix(data, lam, include_coefficient=True)
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    return float(logsumexp(logf + logw[None, :], axis=1).sum())


def check_identifiability(data, K):
    """Warn when min_i m_i < 2K - 1, the generic identifiability bound."""
    K = int(K)
    if K < 1:
        raise ValueError("K must be at least 1")
    ok = int(data.m.min()) >= 2 * K - 1
    if not ok:
        warnings.warn(
            f"smallest row total {int(data.m.min())} is below 2K-1 = {2 * K - 1}; "
            f"a {K}-component multinomial mixture may not be identifiable",
            stacklevel=2,
        )
    return ok
