"""Pair-conditioned ROC estimation from location-scale residuals.

The smoothed estimator is

    ROC(p) = 1 - integral H_F(H_G^{-1}(1 - p + h u) * b - a) kappa(u) du

with ``H_F`` and ``H_G`` the empirical CDFs of the standardized
residuals.  The integral is evaluated with a fixed Gauss-Legendre rule
on ``[-6, 6]``.  Because the empirical quantile of ``H_G`` only takes
``n_G`` distinct values, the rule collapses into a sparse ``m x n_G``
mass matrix that maps the sorted healthy residuals to the grid; this
lets the bootstrap evaluate hundreds of curves with one matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import ndtr, ndtri

from .errors import EmptySample, GridMismatch
from .smoothing import RegressionFit

QUAD_NODES = 64
QUAD_HALF_WIDTH = 6.0
DEFAULT_GRID_SIZE = 101
# guards ceil(u * n) against round-off when u * n is an integer
_QUANTILE_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class PGrid:
    """Strictly increasing grid of false-positive rates inside ``(0, 1)``."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("grid must be a non-empty 1-D array")
        if not (v[0] > 0 and v[-1] < 1 and np.all(np.diff(v) > 0)):
            raise ValueError("grid values must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        return isinstance(other, PGrid) and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())


def default_grid(m: int = DEFAULT_GRID_SIZE) -> PGrid:
    """``m`` equispaced interior points ``1/(m+1), ..., m/(m+1)``."""
    return PGrid(np.arange(1, m + 1) / (m + 1.0))


@dataclass(frozen=True)
class RocCurve:
    grid: PGrid
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.m,):
            raise GridMismatch(f"curve has {v.size} values for a grid of {self.grid.m}")
        object.__setattr__(self, "values", v)

    def sup_distance(self, other: "RocCurve") -> float:
        if self.grid != other.grid:
            raise GridMismatch("curves live on different grids")
        return float(np.max(np.abs(self.values - other.values)))


@dataclass(frozen=True)
class ConditionalRocInputs:
    fitF: RegressionFit
    fitG: RegressionFit
    a: float
    b: float
    h: float

    def __post_init__(self) -> None:
        if not self.b > 0:
            raise ValueError(f"scale ratio b must be positive, got {self.b}")
        if not self.h > 0:
            raise ValueError(f"smoothing bandwidth h must be positive, got {self.h}")


class ShiftScale(NamedTuple):
    a: float
    b: float
    sd_floored: bool = False


def _nonempty(values) -> NDArray[np.float64]:
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptySample("empirical distribution of an empty sample")
    return v


def ecdf(values, y):
    """Fraction of ``values`` that are ``<= y`` (vectorized over ``y``)."""
    v = np.sort(_nonempty(values))
    out = np.searchsorted(v, y, side="right") / v.size
    return float(out) if np.ndim(out) == 0 else out


def quantile_index(u, n: int):
    """Index into the sorted sample of the left-continuous inverse at ``u``."""
    u = np.asarray(u, dtype=np.float64)
    idx = np.ceil(u * n - _QUANTILE_EPS).astype(np.intp) - 1
    return np.clip(idx, 0, n - 1)


def equantile(values, u):
    """Generalized inverse ``inf{y : H(y) >= u}``; ``u <= 0`` returns the minimum."""
    v = np.sort(_nonempty(values))
    out = v[quantile_index(u, v.size)]
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=1)
def quadrature_rule() -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gauss-Legendre nodes on ``[-6, 6]`` with weights times the Gaussian density."""
    x, w = np.polynomial.legendre.leggauss(QUAD_NODES)
    nodes = QUAD_HALF_WIDTH * x
    weights = QUAD_HALF_WIDTH * w * _gauss_density(nodes)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _gauss_density(u):
    return np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)


def quadrature_mass(grid: PGrid, n_g: int, h: float) -> NDArray[np.float64]:
    """``m x n_g`` matrix of quadrature mass placed on each sorted healthy residual.

    Quantile arguments ``1 - p + h u`` are clamped to ``[1/n_g, 1]``.
    """
    nodes, weights = quadrature_rule()
    u = 1.0 - grid.values[:, None] + h * nodes[None, :]
    u = np.clip(u, 1.0 / n_g, 1.0)
    idx = quantile_index(u, n_g)
    flat = (np.arange(grid.m)[:, None] * n_g + idx).ravel()
    mass = np.bincount(flat, weights=np.broadcast_to(weights, idx.shape).ravel(),
                       minlength=grid.m * n_g)
    return mass.reshape(grid.m, n_g)


def smoothed_roc_batch(sorted_f, sorted_g, a, b, mass) -> NDArray[np.float64]:
    """Evaluate the smoothed estimator for a batch of residual samples.

    Parameters
    ----------
    sorted_f : (R, n_F) array
        Sorted diseased residuals, one row per replicate.
    sorted_g : (R, n_G) array
        Sorted healthy residuals.
    a, b : (R,) arrays
        Location shift and scale ratio per replicate.
    mass : (m, n_G) array
        Output of :func:`quadrature_mass`.

    Returns
    -------
    (R, m) array of ROC values clipped to ``[0, 1]``.
    """
    sorted_f = np.atleast_2d(sorted_f)
    sorted_g = np.atleast_2d(sorted_g)
    a = np.atleast_1d(a)
    b = np.atleast_1d(b)
    n_f = sorted_f.shape[1]
    thresholds = sorted_g * b[:, None] - a[:, None]
    counts = np.empty(thresholds.shape, dtype=np.float64)
    for r in range(sorted_f.shape[0]):
        counts[r] = np.searchsorted(sorted_f[r], thresholds[r], side="right")
    roc = 1.0 - (counts / n_f) @ mass.T
    return np.clip(roc, 0.0, 1.0)


def smoothed_roc(res_f, res_g, a: float, b: float, h: float, grid: PGrid) -> RocCurve:
    """Smoothed pair-conditioned ROC from raw residual samples."""
    res_f = np.sort(_nonempty(res_f))
    res_g = np.sort(_nonempty(res_g))
    mass = quadrature_mass(grid, res_g.size, h)
    vals = smoothed_roc_batch(res_f[None, :], res_g[None, :], np.array([a]), np.array([b]), mass)
    return RocCurve(grid, vals[0])


def estimate_conditional_roc(inputs: ConditionalRocInputs, grid: PGrid | None = None) -> RocCurve:
    grid = grid or default_grid()
    return smoothed_roc(inputs.fitF.residuals, inputs.fitG.residuals,
                        inputs.a, inputs.b, inputs.h, grid)


def ab_from_fits(fitF: RegressionFit, fitG: RegressionFit, xF: float, xG: float) -> ShiftScale:
    """Standardized location shift ``a`` and scale ratio ``b`` at ``(xF, xG)``."""
    mu_f, mu_g = fitF.mean_at(xF), fitG.mean_at(xG)
    sd_f, sd_g = fitF.sd_at(xF), fitG.sd_at(xG)
    floored = fitF.sd_floored_at(xF) or fitG.sd_floored_at(xG)
    return ShiftScale((mu_f - mu_g) / sd_f, sd_g / sd_f, floored)


def pooled_bandwidth(gF: float, gG: float, nF: int, nG: int) -> float:
    """Sample-size weighted average ``(nF gF + nG gG) / (nF + nG)``."""
    return (nF * gF + nG * gG) / (nF + nG)


def weighted_average_curve(curves: Sequence[RocCurve], weights) -> RocCurve:
    """Pointwise ``sum_k g_k ROC_k / sum_k g_k``."""
    if not curves:
        raise ValueError("need at least one curve")
    grid = curves[0].grid
    if any(c.grid != grid for c in curves[1:]):
        raise GridMismatch("curves live on different grids")
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(curves),) or np.any(~(w > 0)):
        raise ValueError("need one positive weight per curve")
    stacked = np.vstack([c.values for c in curves])
    return RocCurve(grid, (w / w.sum()) @ stacked)


def iroc_from_samples(fitF: RegressionFit, fitG: RegressionFit, a: float, b: float,
                      grid: PGrid | None = None) -> RocCurve:
    """Unsmoothed inverted ROC ``1 - H_G((H_F^{-1}(1 - q) + a) / b)``."""
    grid = grid or default_grid()
    res_f = np.sort(_nonempty(fitF.residuals))
    res_g = np.sort(_nonempty(fitG.residuals))
    u = np.clip(1.0 - grid.values, 1.0 / res_f.size, 1.0)
    q_f = res_f[quantile_index(u, res_f.size)]
    vals = 1.0 - np.searchsorted(res_g, (q_f + a) / b, side="right") / res_g.size
    return RocCurve(grid, vals)


def binormal_roc_oracle(a: float, b: float, grid: PGrid | None = None) -> RocCurve:
    """Closed form ``Phi(a + b Phi^{-1}(p))`` for Gaussian errors."""
    if not b > 0:
        raise ValueError("b must be positive")
    grid = grid or default_grid()
    return RocCurve(grid, ndtr(a + b * ndtri(grid.values)))
