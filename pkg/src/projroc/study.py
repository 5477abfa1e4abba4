"""Two-population sample model, validation and covariate standardization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import (
    ConditioningPointOutsideSupport,
    DegenerateCovariate,
    DimensionMismatch,
    NonFiniteValue,
    TooFewObservations,
)

DISEASED = "F"
HEALTHY = "G"


def _as_matrix(values, name: str) -> NDArray[np.float64]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-D array, got ndim={arr.ndim}")
    return arr


@dataclass(frozen=True)
class PopulationSample:
    """One population: an ``n x d`` covariate matrix and ``n x K`` markers."""

    covariates: NDArray[np.float64]
    markers: NDArray[np.float64]
    label: str = DISEASED

    def __post_init__(self) -> None:
        object.__setattr__(self, "covariates", _as_matrix(self.covariates, "covariates"))
        object.__setattr__(self, "markers", _as_matrix(self.markers, "markers"))

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def d(self) -> int:
        return self.covariates.shape[1]

    @property
    def K(self) -> int:
        return self.markers.shape[1]


@dataclass(frozen=True)
class Study:
    """Diseased (F) and healthy (G) samples plus the conditioning point ``x``."""

    diseased: PopulationSample
    healthy: PopulationSample
    x: NDArray[np.float64] = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=np.float64)))

    @property
    def d(self) -> int:
        return self.diseased.d

    @property
    def K(self) -> int:
        return self.diseased.K

    @property
    def n(self) -> int:
        return self.diseased.n + self.healthy.n


@dataclass(frozen=True)
class StandardizationParams:
    """Location vector ``a`` and the diagonal of the scale matrix ``B``."""

    means: NDArray[np.float64]
    sds: NDArray[np.float64]

    def __post_init__(self) -> None:
        means = np.atleast_1d(np.asarray(self.means, dtype=np.float64))
        sds = np.atleast_1d(np.asarray(self.sds, dtype=np.float64))
        if means.shape != sds.shape:
            raise DimensionMismatch("means and sds must have the same length")
        if np.any(~(sds > 0)):
            raise DegenerateCovariate("every standard deviation must be strictly positive")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)

    @property
    def d(self) -> int:
        return self.means.shape[0]


def _check_population(pop: PopulationSample, name: str) -> None:
    if pop.covariates.shape[0] != pop.markers.shape[0]:
        raise DimensionMismatch(
            f"{name}: covariates have {pop.covariates.shape[0]} rows but markers have "
            f"{pop.markers.shape[0]}"
        )
    if pop.n < 2:
        raise TooFewObservations(f"{name}: need at least 2 observations, got {pop.n}")
    if pop.d < 1 or pop.K < 1:
        raise DimensionMismatch(f"{name}: need d >= 1 and K >= 1, got d={pop.d}, K={pop.K}")
    for part, arr in (("covariates", pop.covariates), ("markers", pop.markers)):
        bad = ~np.isfinite(arr)
        if bad.any():
            row = int(np.argwhere(bad)[0, 0])
            raise NonFiniteValue(f"{name}: non-finite {part} value in row {row}")


def validate_study(study: Study) -> Study:
    """Check every invariant of ``study`` and return it unchanged.

    Raises
    ------
    DimensionMismatch, NonFiniteValue, TooFewObservations
        On malformed populations.
    ConditioningPointOutsideSupport
        When ``x`` leaves the intersection of the two covariate boxes.
    """
    _check_population(study.diseased, "diseased")
    _check_population(study.healthy, "healthy")
    if study.diseased.d != study.healthy.d:
        raise DimensionMismatch(
            f"covariate dimension differs: diseased d={study.diseased.d}, healthy d={study.healthy.d}"
        )
    if study.diseased.K != study.healthy.K:
        raise DimensionMismatch(
            f"marker count differs: diseased K={study.diseased.K}, healthy K={study.healthy.K}"
        )
    if study.x.shape != (study.d,):
        raise DimensionMismatch(f"x has length {study.x.size}, expected {study.d}")
    if not np.all(np.isfinite(study.x)):
        raise NonFiniteValue("conditioning point x has non-finite entries")

    lo = np.maximum(study.diseased.covariates.min(axis=0), study.healthy.covariates.min(axis=0))
    hi = np.minimum(study.diseased.covariates.max(axis=0), study.healthy.covariates.max(axis=0))
    outside = (study.x < lo) | (study.x > hi)
    if outside.any():
        j = int(np.argmax(outside))
        raise ConditioningPointOutsideSupport(
            f"x[{j}]={study.x[j]:g} lies outside the common covariate range [{lo[j]:g}, {hi[j]:g}]"
        )
    return study


def fit_standardization(study: Study) -> StandardizationParams:
    """Pooled per-column sample means and standard deviations (``ddof=1``)."""
    pooled = np.vstack([study.diseased.covariates, study.healthy.covariates])
    means = pooled.mean(axis=0)
    sds = pooled.std(axis=0, ddof=1)
    flat = ~(sds > 0)
    if flat.any():
        raise DegenerateCovariate(f"covariate column {int(np.argmax(flat))} is constant")
    return StandardizationParams(means=means, sds=sds)


def apply_standardization(study: Study, params: StandardizationParams) -> Study:
    """Map covariates and ``x`` to ``(value - mean) / sd``; markers are untouched."""
    if params.d != study.d or study.x.shape[0] != params.d:
        raise DimensionMismatch(f"parameters fitted for d={params.d}, study has d={study.d}")

    def scale(values):
        return (values - params.means) / params.sds

    return Study(
        diseased=PopulationSample(
            scale(study.diseased.covariates), study.diseased.markers, study.diseased.label
        ),
        healthy=PopulationSample(
            scale(study.healthy.covariates), study.healthy.markers, study.healthy.label
        ),
        x=scale(study.x),
    )
