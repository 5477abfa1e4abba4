"""Nadaraya-Watson location-scale regression with LSCV bandwidths.

Every smoother here uses the standard Gaussian kernel.  Weights are
formed from unnormalized kernel values ``exp(-u**2 / 2)``; the constant
cancels in the ratio, and an evaluation point whose kernel values all
underflow raises :class:`BandwidthTooSmall` instead of dividing by zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import AllBandwidthsFail, BandwidthTooSmall, DegenerateCovariate, DimensionMismatch

logger = logging.getLogger(__name__)

LSCV_GRID_SIZE = 30
LSCV_GRID_SPAN = (0.05, 20.0)
VAR_FLOOR_REL = 1e-8
VAR_FLOOR_ABS = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric kernel density.  Only ``"gaussian"`` is available."""

    family: str = "gaussian"

    def __post_init__(self) -> None:
        if self.family != "gaussian":
            raise ValueError(f"unsupported kernel family {self.family!r}")

    def density(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)

    def unnormalized(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.exp(-0.5 * u * u)


GAUSSIAN = KernelSpec()


def variance_floor(ys) -> float:
    """Lower bound applied to every conditional variance estimate of ``ys``."""
    v = float(np.var(ys))
    return VAR_FLOOR_REL * v if v > 0 else VAR_FLOOR_ABS


def _check_bandwidth(g: float) -> None:
    if not (g > 0 and np.isfinite(g)):
        raise ValueError(f"bandwidth must be positive and finite, got {g!r}")


def weight_matrix(x_eval, xs, g: float, kernel: KernelSpec = GAUSSIAN) -> NDArray[np.float64]:
    """Row-stochastic NW weights: row ``r`` holds the weights at ``x_eval[r]``."""
    _check_bandwidth(g)
    x_eval = np.atleast_1d(np.asarray(x_eval, dtype=np.float64))
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise DimensionMismatch("xs must be non-empty")
    k = kernel.unnormalized((x_eval[:, None] - xs[None, :]) / g)
    totals = k.sum(axis=1)
    if np.any(totals == 0):
        bad = x_eval[np.argmax(totals == 0)]
        raise BandwidthTooSmall(f"all kernel weights underflow at x={bad:g} with bandwidth g={g:g}")
    return k / totals[:, None]


def nw_weights(x0: float, xs, g: float, kernel: KernelSpec = GAUSSIAN) -> NDArray[np.float64]:
    """Nadaraya-Watson weights at ``x0``; nonnegative and summing to one."""
    return weight_matrix([x0], xs, g, kernel)[0]


def nw_regress(x0: float, xs, ys, g: float) -> float:
    """Kernel-weighted mean of ``ys`` at ``x0``.

    The weights are applied to ``ys - mean(ys)`` so that a constant
    response is reproduced exactly despite round-off in the weights.
    """
    ys = np.asarray(ys, dtype=np.float64)
    c = ys.mean()
    return float(c + nw_weights(x0, xs, g) @ (ys - c))


def nw_variance(x0: float, xs, ys, fitted_at_data, g: float) -> float:
    """Kernel-weighted mean of squared residuals about the fit, floored."""
    ys = np.asarray(ys, dtype=np.float64)
    resid = ys - np.asarray(fitted_at_data, dtype=np.float64)
    v = float(nw_weights(x0, xs, g) @ (resid * resid))
    return max(v, variance_floor(ys))


def lscv_grid(xs) -> NDArray[np.float64]:
    """Log-spaced candidate bandwidths anchored at the rule-of-thumb ``sd * n**(-1/5)``."""
    xs = np.asarray(xs, dtype=np.float64)
    rot = np.std(xs, ddof=1) * xs.size ** (-0.2)
    lo, hi = LSCV_GRID_SPAN
    return np.geomspace(lo * rot, hi * rot, LSCV_GRID_SIZE)


def lscv_scores(xs, ys, grid=None) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Leave-one-out mean squared prediction error for each candidate bandwidth.

    Points whose leave-one-out neighbourhood underflows are left out of
    the average for that bandwidth.  A bandwidth where every point is
    left out scores ``inf``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DimensionMismatch("xs and ys must be 1-D arrays of equal length")
    if xs.size < 3:
        raise ValueError(f"LSCV needs at least 3 points, got {xs.size}")
    if np.ptp(xs) == 0:
        raise DegenerateCovariate("all covariate values are equal")
    if grid is None:
        grid = lscv_grid(xs)
    grid = np.asarray(grid, dtype=np.float64)

    half_d2 = -0.5 * (xs[:, None] - xs[None, :]) ** 2
    scores = np.full(grid.size, np.inf)
    for j, g in enumerate(grid):
        k = np.exp(half_d2 / (g * g))
        np.fill_diagonal(k, 0.0)
        totals = k.sum(axis=1)
        ok = totals > 0
        if not ok.any():
            continue
        skipped = int(xs.size - ok.sum())
        if skipped:
            logger.warning("LSCV g=%.4g: skipped %d points with empty neighbourhood", g, skipped)
        pred = (k[ok] @ ys) / totals[ok]
        scores[j] = float(np.mean((ys[ok] - pred) ** 2))
    return grid, scores


def lscv_bandwidth(xs, ys, grid=None) -> float:
    """Bandwidth minimizing the leave-one-out CV score; ties go to the largest."""
    grid, scores = lscv_scores(xs, ys, grid)
    finite = np.isfinite(scores)
    if not finite.any():
        raise AllBandwidthsFail("every candidate bandwidth left all points without neighbours")
    best = scores[finite].min()
    ys = np.asarray(ys, dtype=np.float64)
    tol = best * 1e-9 + 1e-24 * (1.0 + float(np.mean(ys * ys)))
    tied = np.flatnonzero(finite & (scores <= best + tol))
    return float(grid[tied[-1]])


@dataclass(frozen=True)
class RegressionFit:
    """Location-scale fit of one marker in one population.

    ``residuals`` are the standardized residuals
    ``(ys - fitted_means) / fitted_sds``.
    """

    g: float
    xs: NDArray[np.float64]
    ys: NDArray[np.float64]
    fitted_means: NDArray[np.float64]
    fitted_sds: NDArray[np.float64]
    residuals: NDArray[np.float64]
    var_floor: float

    @property
    def n(self) -> int:
        return self.xs.size

    def mean_at(self, x0: float) -> float:
        return nw_regress(x0, self.xs, self.ys, self.g)

    def sd_at(self, x0: float) -> float:
        w = nw_weights(x0, self.xs, self.g)
        resid = self.ys - self.fitted_means
        return float(np.sqrt(max(float(w @ (resid * resid)), self.var_floor)))

    def sd_floored_at(self, x0: float) -> bool:
        """True when the variance floor is active at ``x0``."""
        w = nw_weights(x0, self.xs, self.g)
        resid = self.ys - self.fitted_means
        return float(w @ (resid * resid)) <= self.var_floor


def fit_location_scale(xs, ys, g: float) -> RegressionFit:
    """Fit conditional mean and standard deviation with one bandwidth ``g``."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DimensionMismatch("xs and ys must be 1-D arrays of equal length")
    w = weight_matrix(xs, xs, g)
    c = ys.mean()
    means = c + w @ (ys - c)
    resid = ys - means
    floor = variance_floor(ys)
    sds = np.sqrt(np.maximum(w @ (resid * resid), floor))
    return RegressionFit(
        g=float(g),
        xs=xs,
        ys=ys,
        fitted_means=means,
        fitted_sds=sds,
        residuals=resid / sds,
        var_floor=floor,
    )
