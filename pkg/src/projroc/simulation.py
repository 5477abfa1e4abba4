"""Simulation scenarios and Monte Carlo level/power experiments.

Six location-scale scenarios (three with two covariates, three with
three) are compared at ``x = (0.5, 0.6)`` or ``(0.5, 0.6, 0.5)``.
Covariates are uniform on the unit cube and the K regression errors are
equicorrelated standard normals.  Repetition ``r`` draws its data from
the stream ``(seed, SIM_DATA, r)`` and its test seed from
``(seed, SIM_TEST, r)``, so the rejection table does not depend on how
repetitions are spread over workers.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.stats import binomtest

from . import _rng
from .errors import DimensionMismatch, InvalidCorrelation, InvalidPlan
from .multivariate import MODES, MultiTestConfig, md_statistics
from .study import DISEASED, HEALTHY, PopulationSample, Study, apply_standardization, fit_standardization
from .univariate import PsiFunctional

logger = logging.getLogger(__name__)

Fn = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def _sin_part(x):
    return np.sin(0.5 * np.pi * x[..., 0]) + 0.1 * x[..., 1]


@dataclass(frozen=True)
class Scenario:
    """Conditional means and standard deviations of one marker in F and G."""

    id: str
    d: int
    mu_f: Fn
    mu_g: Fn
    sd_f: Fn
    sd_g: Fn


def _sd_x1(x):
    return 0.5 + 0.5 * x[..., 0]


def _sd_x3(x):
    return 0.5 + 0.1 * x[..., 2]


SCENARIOS: dict[str, Scenario] = {
    "ROC1": Scenario("ROC1", 2, _sin_part, lambda x: 0.5 * x[..., 0] * x[..., 1], _sd_x1, _sd_x1),
    "ROC2": Scenario("ROC2", 2, lambda x: 0.3 + _sin_part(x),
                     lambda x: 0.5 * x[..., 0] * x[..., 1], _sd_x1, _sd_x1),
    "ROC3": Scenario("ROC3", 2, _sin_part,
                     lambda x: -0.3 + 0.4 * x[..., 1] + 0.5 * x[..., 0] * x[..., 1], _sd_x1, _sd_x1),
    "ROC4": Scenario("ROC4", 3, lambda x: _sin_part(x) + 0.5 * x[..., 2],
                     lambda x: 0.5 * x[..., 0] * x[..., 1] + x[..., 2], _sd_x3, _sd_x3),
    "ROC5": Scenario("ROC5", 3, lambda x: _sin_part(x) + 0.5 * x[..., 2],
                     lambda x: x[..., 0] * x[..., 1] + x[..., 2], _sd_x3, _sd_x3),
    "ROC6": Scenario("ROC6", 3, lambda x: _sin_part(x) + 0.5 * x[..., 2],
                     lambda x: -0.3 + 0.5 * x[..., 0] * x[..., 1] + x[..., 2],
                     lambda x: 0.5 + 0.2 * x[..., 1] + 0.3 * x[..., 2], _sd_x3),
}

CONDITIONING_POINTS = {2: (0.5, 0.6), 3: (0.5, 0.6, 0.5)}


def eval_scenario_functions(scenario_id: str, x) -> tuple[float, float, float, float]:
    """``(mu_F, mu_G, sigma_F, sigma_G)`` of a scenario at the point ``x``."""
    sc = SCENARIOS[scenario_id]
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (sc.d,):
        raise DimensionMismatch(f"{scenario_id} needs a point of dimension {sc.d}")
    return tuple(float(f(x)) for f in (sc.mu_f, sc.mu_g, sc.sd_f, sc.sd_g))


def gen_correlated_errors(n: int, K: int, rho: float, rng: np.random.Generator) -> NDArray[np.float64]:
    """Rows i.i.d. normal with unit variances and all pairwise correlations ``rho``."""
    if not -1 < rho < 1 or (K > 1 and rho <= -1.0 / (K - 1)):
        raise InvalidCorrelation(f"rho={rho} does not give a positive definite {K}x{K} matrix")
    corr = np.full((K, K), rho)
    np.fill_diagonal(corr, 1.0)
    chol = np.linalg.cholesky(corr)
    return rng.standard_normal((n, K)) @ chol.T


@dataclass(frozen=True)
class ExperimentPlan:
    """One cell of the simulation grid, run for ``reps`` repetitions."""

    scenarios: tuple[str, ...] = ("ROC1", "ROC1")
    nF: int = 100
    nG: int = 100
    rho: float = 0.0
    B: int = 200
    mode: str = "grid"
    n_beta: int = 5
    m_beta: int = 25
    reps: int = 200
    alphas: tuple[float, ...] = (0.01, 0.05, 0.10)
    psis: tuple[str, ...] = ("L2", "KS")
    seed: int = 0
    standardize: bool = False
    threads: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "psis", tuple(PsiFunctional(p).kind for p in self.psis))
        unknown = [s for s in self.scenarios if s not in SCENARIOS]
        if unknown:
            raise InvalidPlan(f"unknown scenarios {unknown}")
        if len(self.scenarios) < 2:
            raise InvalidPlan("a plan compares at least K=2 scenarios")
        if len({SCENARIOS[s].d for s in self.scenarios}) != 1:
            raise InvalidPlan("all compared scenarios need the same covariate dimension")
        if not -1 < self.rho < 1:
            raise InvalidPlan("rho must lie in (-1, 1)")
        if min(self.nF, self.nG, self.B, self.n_beta, self.m_beta, self.reps, self.threads) < 1:
            raise InvalidPlan("counts must be positive")
        if self.mode not in MODES:
            raise InvalidPlan(f"mode must be one of {MODES}")
        if any(not 0 <= a <= 1 for a in self.alphas):
            raise InvalidPlan("alphas must lie in [0, 1]")

    @property
    def d(self) -> int:
        return SCENARIOS[self.scenarios[0]].d

    @property
    def K(self) -> int:
        return len(self.scenarios)

    @property
    def is_null(self) -> bool:
        return len(set(self.scenarios)) == 1

    def test_config(self, rep: int) -> MultiTestConfig:
        return MultiTestConfig(mode=self.mode, n_beta=self.n_beta, m_beta=self.m_beta, B=self.B,
                               seed=_rng.derived_seed(self.seed, _rng.SIM_TEST, rep))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentPlan":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise InvalidPlan(f"unknown plan keys {sorted(extra)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise InvalidPlan(str(exc)) from exc

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("scenarios", "alphas", "psis"):
            out[key] = list(out[key])
        return out


def load_plan(path) -> ExperimentPlan:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidPlan(f"cannot read plan {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidPlan("a plan file must hold a JSON object")
    return ExperimentPlan.from_dict(data)


def _population(scenarios, n: int, d: int, rho: float, rng, label: str) -> PopulationSample:
    x = rng.uniform(size=(n, d))
    eps = gen_correlated_errors(n, len(scenarios), rho, rng)
    cols = []
    for k, sid in enumerate(scenarios):
        sc = SCENARIOS[sid]
        mu, sd = (sc.mu_f, sc.sd_f) if label == DISEASED else (sc.mu_g, sc.sd_g)
        cols.append(mu(x) + sd(x) * eps[:, k])
    return PopulationSample(x, np.column_stack(cols), label)


def gen_study(plan: ExperimentPlan, rep: int, rng: np.random.Generator | None = None) -> Study:
    """Simulated diseased and healthy samples for repetition ``rep``."""
    if rng is None:
        rng = _rng.stream(plan.seed, _rng.SIM_DATA, rep)
    diseased = _population(plan.scenarios, plan.nF, plan.d, plan.rho, rng, DISEASED)
    healthy = _population(plan.scenarios, plan.nG, plan.d, plan.rho, rng, HEALTHY)
    return Study(diseased, healthy, np.array(CONDITIONING_POINTS[plan.d]))


def run_repetition(plan: ExperimentPlan, rep: int) -> dict[str, float]:
    """p-value of every functional in ``plan.psis`` for one simulated study."""
    study = gen_study(plan, rep)
    if plan.standardize:
        study = apply_standardization(study, fit_standardization(study))
    res = md_statistics(study, plan.test_config(rep), [PsiFunctional(p) for p in plan.psis])
    return res.p_value


def _run_one(args):
    plan, rep = args
    return run_repetition(plan, rep)


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    pvalues: dict[str, NDArray[np.float64]] = field(default_factory=dict)

    def rate(self, psi: str, alpha: float) -> float:
        return float(np.mean(self.pvalues[psi] <= alpha))

    def rows(self) -> list[dict]:
        p = self.plan
        out = []
        for psi in p.psis:
            for alpha in p.alphas:
                k = int(np.sum(self.pvalues[psi] <= alpha))
                ci = binomtest(k, p.reps).proportion_ci(confidence_level=0.95, method="exact")
                out.append({
                    "scenario": "-".join(p.scenarios),
                    "nF": p.nF,
                    "nG": p.nG,
                    "rho": p.rho,
                    "psi": psi,
                    "mode": p.mode,
                    "alpha": alpha,
                    "rate": k / p.reps,
                    "reps": p.reps,
                    "ci_low": float(ci.low),
                    "ci_high": float(ci.high),
                })
        return out

    def to_csv(self) -> str:
        return rows_to_csv(self.rows())


CSV_COLUMNS = ("scenario", "nF", "nG", "rho", "psi", "mode", "alpha", "rate", "reps",
               "ci_low", "ci_high")


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def run_experiment(plan: ExperimentPlan, progress: Callable[[int, int], None] | None = None,
                   threads: int | None = None) -> ExperimentResult:
    """Run every repetition of ``plan`` and collect the p-values in repetition order."""
    workers = threads or plan.threads
    jobs = [(plan, r) for r in range(plan.reps)]
    results = []
    if workers <= 1:
        for i, job in enumerate(jobs):
            results.append(_run_one(job))
            if progress:
                progress(i + 1, plan.reps)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, res in enumerate(pool.map(_run_one, jobs, chunksize=4)):
                results.append(res)
                if progress:
                    progress(i + 1, plan.reps)
    pvalues = {psi: np.array([r[psi] for r in results]) for psi in plan.psis}
    return ExperimentResult(plan, pvalues)


def run_level_experiment(plan: ExperimentPlan, **kwargs) -> ExperimentResult:
    """Rejection rates when every compared marker follows the same scenario."""
    if not plan.is_null:
        raise InvalidPlan("a level experiment compares one scenario with itself")
    return run_experiment(plan, **kwargs)


def run_power_experiment(plan: ExperimentPlan, **kwargs) -> ExperimentResult:
    """Rejection rates when the compared scenarios differ."""
    if plan.is_null:
        raise InvalidPlan("a power experiment needs at least two distinct scenarios")
    return run_experiment(plan, **kwargs)
