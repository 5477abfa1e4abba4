"""Nonparametric bootstrap comparison of dependent ROC curves conditioned on a
multidimensional covariate, via random projections of the covariate."""

from .datasets import read_dataset
from .errors import ProjRocError
from .multivariate import MultiTestConfig, md_statistics, test_md
from .report import TestReport
from .roc import PGrid, RocCurve, default_grid, estimate_conditional_roc
from .simulation import ExperimentPlan, run_experiment
from .study import PopulationSample, Study, apply_standardization, fit_standardization, validate_study
from .univariate import KS, L2, PsiFunctional, UniTestInputs, test_1d

__all__ = [
    "KS", "L2", "ExperimentPlan", "MultiTestConfig", "PGrid", "PopulationSample", "ProjRocError",
    "PsiFunctional", "RocCurve", "Study", "TestReport", "UniTestInputs", "apply_standardization",
    "default_grid", "estimate_conditional_roc", "fit_standardization", "md_statistics",
    "read_dataset", "run_experiment", "test_1d", "test_md", "validate_study",
]

__version__ = "0.1.0"
