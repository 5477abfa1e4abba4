"""Bootstrap comparison of K dependent ROC curves at a pair of scalar covariate values.

Bandwidths are chosen once on the original sample and frozen for every
bootstrap replicate.  With covariates and bandwidths fixed, the kernel
weight matrices are fixed too, so each population's bootstrap refits
collapse into a pair of matrix products over all replicates at once
(see :class:`PopulationSide`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from . import _rng
from .errors import BootstrapDegenerate, DimensionMismatch, GridMismatch
from .report import TestReport
from .roc import PGrid, default_grid, quadrature_mass, smoothed_roc_batch
from .smoothing import RegressionFit, fit_location_scale, lscv_bandwidth, weight_matrix

logger = logging.getLogger(__name__)

MAX_FAILED_FRACTION = 0.10


@dataclass(frozen=True)
class PsiFunctional:
    """Curve discrepancy: ``"L2"`` (trapezoidal integral of f**2) or ``"KS"`` (sup |f|)."""

    kind: str = "L2"

    def __post_init__(self) -> None:
        kind = self.kind.upper()
        if kind not in ("L2", "KS"):
            raise ValueError(f"psi must be 'L2' or 'KS', got {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    def __call__(self, values, grid: PGrid):
        """Apply along the last axis of ``values``."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape[-1] != grid.m:
            raise GridMismatch(f"function has {values.shape[-1]} points, grid has {grid.m}")
        if self.kind == "KS":
            return np.max(np.abs(values), axis=-1)
        return np.trapezoid(values * values, grid.values, axis=-1)


L2 = PsiFunctional("L2")
KS = PsiFunctional("KS")


def psi_apply(psi: PsiFunctional, f, grid: PGrid | None = None) -> float:
    """Scalar discrepancy of a gridded function (a RocCurve or raw values)."""
    if grid is None:
        grid, f = f.grid, f.values
    return float(psi(f, grid))


@dataclass(frozen=True)
class AlphaMatrix:
    entries: NDArray[np.float64]

    @classmethod
    def from_bandwidths(cls, g) -> "AlphaMatrix":
        """``alpha_kj = I(k = j) - sqrt(g_k g_j) / sum_i g_i``."""
        g = np.asarray(g, dtype=np.float64)
        root = np.sqrt(g)
        return cls(np.eye(g.size) - np.outer(root, root) / g.sum())


def centered_deviations(curves, g, n: int) -> NDArray[np.float64]:
    """Scaled deviations ``sqrt(n g_k) (C_k - C_bullet)`` from the g-weighted mean.

    ``curves`` has the marker axis second to last, ``(..., K, m)``.  The
    difference from the mean is accumulated as ``sum_j w_j (C_k - C_j)``
    so that identical curves give exactly zero.  For bootstrap
    deviations this equals ``sum_j sqrt(n g_j) alpha_kj D_j``.
    """
    curves = np.asarray(curves, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    w = g / g.sum()
    pairwise = curves[..., :, None, :] - curves[..., None, :, :]
    dev = np.einsum("j,...kjm->...km", w, pairwise)
    return np.sqrt(n * g)[:, None] * dev


def statistic_from_curves(curves, g, n: int, psi: PsiFunctional, grid: PGrid):
    """``sum_k psi(sqrt(n g_k) (ROC_k - ROC_bullet))``; batch axes are kept."""
    return psi(centered_deviations(curves, g, n), grid).sum(axis=-1)


def statistic_T_boot(boot_curves, orig_curves, g, n: int, psi: PsiFunctional, grid: PGrid):
    """Bootstrap statistic built from the deviations ``ROC*_j - ROC_j``."""
    boot_curves = np.asarray(boot_curves, dtype=np.float64)
    return statistic_from_curves(boot_curves - np.asarray(orig_curves), g, n, psi, grid)


def resample_residual_vectors(residuals, rng: np.random.Generator) -> NDArray[np.float64]:
    """Draw whole rows with replacement, keeping cross-marker dependence."""
    residuals = np.asarray(residuals, dtype=np.float64)
    n = residuals.shape[0]
    return residuals[rng.integers(0, n, size=n)]


def reconstruct_bootstrap_markers(fits: Sequence[RegressionFit], resampled) -> NDArray[np.float64]:
    """``Y* = mu_hat(X_i) + sigma_hat(X_i) eps*`` column by column."""
    resampled = np.asarray(resampled, dtype=np.float64)
    if resampled.ndim != 2 or resampled.shape[1] != len(fits):
        raise DimensionMismatch("need one residual column per fit")
    means = np.column_stack([f.fitted_means for f in fits])
    sds = np.column_stack([f.fitted_sds for f in fits])
    if means.shape != resampled.shape:
        raise DimensionMismatch(f"fits have {means.shape[0]} rows, residuals {resampled.shape[0]}")
    return means + sds * resampled


def _floor_rows(var_rows):
    floor = 1e-8 * var_rows
    return np.where(var_rows > 0, floor, 1e-12)


@dataclass
class PopulationSide:
    """One population projected onto a scalar covariate, with frozen bandwidths.

    Holds the original location-scale fits of every marker plus the
    estimates needed at the conditioning value ``x0``.  ``bootstrap``
    refits all markers for a batch of resampling index rows.
    """

    xs: NDArray[np.float64]
    markers: NDArray[np.float64]
    x0: float
    bandwidths: NDArray[np.float64]
    fits: list[RegressionFit] = field(init=False)
    w0: NDArray[np.float64] = field(init=False)
    smoothers: list[NDArray[np.float64]] = field(init=False)

    def __post_init__(self) -> None:
        self.xs = np.asarray(self.xs, dtype=np.float64)
        self.markers = np.asarray(self.markers, dtype=np.float64)
        self.bandwidths = np.asarray(self.bandwidths, dtype=np.float64)
        if self.markers.shape[0] != self.xs.size or self.bandwidths.size != self.markers.shape[1]:
            raise DimensionMismatch("covariates, markers and bandwidths are not conformable")
        self.fits = []
        self.smoothers = []
        w0 = []
        for k, g in enumerate(self.bandwidths):
            w = weight_matrix(self.xs, self.xs, g)
            self.smoothers.append(w)
            self.fits.append(fit_location_scale(self.xs, self.markers[:, k], g))
            w0.append(weight_matrix([self.x0], self.xs, g)[0])
        self.w0 = np.vstack(w0)

    @classmethod
    def select(cls, xs, markers, x0: float, bandwidths=None) -> "PopulationSide":
        """Build a side, choosing each marker's bandwidth by LSCV when not given."""
        markers = np.asarray(markers, dtype=np.float64)
        if bandwidths is None:
            bandwidths = [lscv_bandwidth(xs, markers[:, k]) for k in range(markers.shape[1])]
        return cls(xs, markers, float(x0), np.asarray(bandwidths, dtype=np.float64))

    @property
    def n(self) -> int:
        return self.xs.size

    @property
    def K(self) -> int:
        return self.markers.shape[1]

    @property
    def residuals(self) -> NDArray[np.float64]:
        return np.column_stack([f.residuals for f in self.fits])

    def original(self):
        """Sorted residuals ``(1, n, K)``, mean and sd at ``x0`` as ``(1, K)``."""
        ys = self.markers
        mu0 = np.empty(self.K)
        sd0 = np.empty(self.K)
        for k, fit in enumerate(self.fits):
            resid = ys[:, k] - fit.fitted_means
            c = ys[:, k].mean()
            mu0[k] = c + self.w0[k] @ (ys[:, k] - c)
            sd0[k] = np.sqrt(max(self.w0[k] @ (resid * resid), fit.var_floor))
        return np.sort(self.residuals, axis=0)[None], mu0[None], sd0[None]

    def bootstrap(self, indices):
        """Refit every marker for each row of ``indices`` (shape ``(B, n)``).

        Returns sorted bootstrap residuals ``(B, n, K)`` and the mean and
        sd at ``x0``, each ``(B, K)``.
        """
        indices = np.asarray(indices)
        B = indices.shape[0]
        eps = self.residuals[indices]  # (B, n, K)
        sorted_res = np.empty((B, self.n, self.K))
        mu0 = np.empty((B, self.K))
        sd0 = np.empty((B, self.K))
        for k, fit in enumerate(self.fits):
            ys = fit.fitted_means + fit.fitted_sds * eps[:, :, k]
            w = self.smoothers[k]
            c = ys.mean(axis=1, keepdims=True)
            means = c + (ys - c) @ w.T
            resid = ys - means
            sq = resid * resid
            floor = _floor_rows(np.var(ys, axis=1))
            sds = np.sqrt(np.maximum(sq @ w.T, floor[:, None]))
            sorted_res[:, :, k] = np.sort(resid / sds, axis=1)
            mu0[:, k] = c[:, 0] + (ys - c) @ self.w0[k]
            sd0[:, k] = np.sqrt(np.maximum(sq @ self.w0[k], floor))
        return sorted_res, mu0, sd0


def pair_curves(side_f, side_g, mass) -> NDArray[np.float64]:
    """ROC curves ``(R, K, m)`` from matching batches of the two populations.

    ``side_f`` and ``side_g`` are the tuples returned by
    :meth:`PopulationSide.original` or :meth:`PopulationSide.bootstrap`.
    """
    sorted_f, mu_f, sd_f = side_f
    sorted_g, mu_g, sd_g = side_g
    R, _, K = sorted_f.shape
    out = np.empty((R, K, mass.shape[0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (mu_f - mu_g) / sd_f
        b = sd_g / sd_f
    for k in range(K):
        out[:, k, :] = smoothed_roc_batch(sorted_f[:, :, k], sorted_g[:, :, k], a[:, k], b[:, k], mass)
    bad = ~(np.isfinite(a) & np.isfinite(b) & (b > 0)).all(axis=1)
    out[bad] = np.nan
    return out


def pooled_bandwidths(side_f: PopulationSide, side_g: PopulationSide) -> NDArray[np.float64]:
    n_f, n_g = side_f.n, side_g.n
    return (n_f * side_f.bandwidths + n_g * side_g.bandwidths) / (n_f + n_g)


def default_h(n: int) -> float:
    return 1.0 / np.sqrt(n)


def pvalue(observed: float, boot) -> float:
    """``mean(observed <= boot)``; ties count as exceedances."""
    boot = np.asarray(boot, dtype=np.float64)
    if boot.size == 0:
        raise BootstrapDegenerate("no bootstrap statistics available")
    return float(np.mean(observed <= boot))


def drop_failed(stats, B: int) -> NDArray[np.bool_]:
    """Mask of usable replicates; abort when more than 10% failed."""
    ok = np.isfinite(stats)
    failed = int(B - ok.sum())
    if failed:
        logger.warning("%d of %d bootstrap replicates failed and were dropped", failed, B)
    if failed == B or failed > MAX_FAILED_FRACTION * B:
        raise BootstrapDegenerate(f"{failed} of {B} bootstrap replicates failed")
    return ok


@dataclass(frozen=True)
class UniTestInputs:
    """Samples projected onto a scalar covariate plus the test settings.

    ``bandwidths_f`` / ``bandwidths_g`` force the per-marker regression
    bandwidths; when omitted they are chosen by LSCV.  ``h`` defaults to
    ``1 / sqrt(nF + nG)``.
    """

    covariates_f: NDArray[np.float64]
    markers_f: NDArray[np.float64]
    covariates_g: NDArray[np.float64]
    markers_g: NDArray[np.float64]
    x_f: float
    x_g: float
    psi: PsiFunctional = L2
    B: int = 200
    seed: int = 0
    grid: PGrid = field(default_factory=default_grid)
    bandwidths_f: Sequence[float] | None = None
    bandwidths_g: Sequence[float] | None = None
    h: float | None = None

    def __post_init__(self) -> None:
        for name in ("covariates_f", "covariates_g"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64).ravel())
        for name in ("markers_f", "markers_g"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr[:, None] if arr.ndim == 1 else arr)
        if self.markers_f.shape[1] != self.markers_g.shape[1]:
            raise DimensionMismatch("both populations need the same markers")
        if self.markers_f.shape[1] < 2:
            raise ValueError("comparing curves needs K >= 2 markers")
        if self.B < 1:
            raise ValueError("B must be at least 1")

    @property
    def n(self) -> int:
        return self.covariates_f.size + self.covariates_g.size

    def sides(self) -> tuple[PopulationSide, PopulationSide]:
        side_f = PopulationSide.select(self.covariates_f, self.markers_f, self.x_f, self.bandwidths_f)
        side_g = PopulationSide.select(self.covariates_g, self.markers_g, self.x_g, self.bandwidths_g)
        return side_f, side_g


def _observed(inputs: UniTestInputs):
    side_f, side_g = inputs.sides()
    h = inputs.h if inputs.h is not None else default_h(inputs.n)
    mass = quadrature_mass(inputs.grid, side_g.n, h)
    curves = pair_curves(side_f.original(), side_g.original(), mass)[0]
    return side_f, side_g, h, mass, curves


def statistic_S(inputs: UniTestInputs) -> float:
    """Observed statistic for the pair ``(x_f, x_g)``."""
    side_f, side_g, _, _, curves = _observed(inputs)
    g = pooled_bandwidths(side_f, side_g)
    return float(statistic_from_curves(curves, g, inputs.n, inputs.psi, inputs.grid))


def test_1d(inputs: UniTestInputs) -> TestReport:
    """Residual-bootstrap p-value for equality of the K conditional ROC curves."""
    side_f, side_g, h, mass, curves = _observed(inputs)
    g = pooled_bandwidths(side_f, side_g)
    n = inputs.n
    s_obs = float(statistic_from_curves(curves, g, n, inputs.psi, inputs.grid))

    idx_f = _rng.resample_index_matrix(inputs.seed, _rng.POP_F, side_f.n, inputs.B)
    idx_g = _rng.resample_index_matrix(inputs.seed, _rng.POP_G, side_g.n, inputs.B)
    boot = pair_curves(side_f.bootstrap(idx_f), side_g.bootstrap(idx_g), mass)
    t_boot = statistic_T_boot(boot, curves, g, n, inputs.psi, inputs.grid)
    ok = drop_failed(t_boot, inputs.B)
    t_boot = t_boot[ok]

    return TestReport(
        statistic=s_obs,
        p_value=pvalue(s_obs, t_boot),
        B_effective=int(t_boot.size),
        psi=inputs.psi.kind,
        bandwidths={
            "g_f": side_f.bandwidths.tolist(),
            "g_g": side_g.bandwidths.tolist(),
            "g": g.tolist(),
            "h": float(h),
        },
        seed=int(inputs.seed),
        bootstrap_stats=t_boot.tolist(),
        diagnostics={"x_f": float(inputs.x_f), "x_g": float(inputs.x_g), "B_requested": inputs.B},
    )


test_1d.__test__ = False  # not a pytest test
