"""Random directions on the unit sphere and covariate projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatch
from .smoothing import nw_weights


@dataclass(frozen=True)
class Direction:
    coords: NDArray[np.float64]

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.coords, dtype=np.float64))
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise ValueError("a direction must have unit Euclidean norm")
        object.__setattr__(self, "coords", c)

    @property
    def d(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class DirectionPair:
    betaF: Direction
    betaG: Direction

    def __post_init__(self) -> None:
        if self.betaF.d != self.betaG.d:
            raise DimensionMismatch("both directions of a pair need the same dimension")


def sample_sphere(d: int, count: int, rng: np.random.Generator) -> list[Direction]:
    """Uniform draws from the unit sphere in ``R^d`` by normalizing Gaussian vectors."""
    if d < 1 or count < 1:
        raise ValueError("need d >= 1 and count >= 1")
    out = []
    while len(out) < count:
        z = rng.standard_normal(d)
        norm = np.linalg.norm(z)
        if norm == 0:
            continue
        out.append(Direction(z / norm))
    return out


def sample_torus_pairs(d: int, count: int, rng: np.random.Generator,
                       rng_g: np.random.Generator | None = None) -> list[DirectionPair]:
    """Independent pairs uniform on the product of two unit spheres.

    Diseased directions come from ``rng``; healthy directions come from
    ``rng_g`` when given, otherwise from ``rng`` after all diseased draws.
    """
    betas_f = sample_sphere(d, count, rng)
    betas_g = sample_sphere(d, count, rng if rng_g is None else rng_g)
    return [DirectionPair(bf, bg) for bf, bg in zip(betas_f, betas_g)]


def project(covariates, beta: Direction) -> NDArray[np.float64]:
    """Inner products of each covariate row (or a single point) with ``beta``."""
    cov = np.asarray(covariates, dtype=np.float64)
    if cov.shape[-1] != beta.d:
        raise DimensionMismatch(f"covariates have dimension {cov.shape[-1]}, direction {beta.d}")
    return cov @ beta.coords


def projected_conditional_cdf(projected, ys, x0: float, thresholds, g: float):
    """Kernel estimate of ``P(Y <= c | projected covariate = x0)`` for each threshold."""
    w = nw_weights(x0, projected, g)
    ys = np.asarray(ys, dtype=np.float64)
    c = np.atleast_1d(np.asarray(thresholds, dtype=np.float64))
    return (ys[None, :] <= c[:, None]).astype(np.float64) @ w
