import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from projroc.errors import (
    ConditioningPointOutsideSupport,
    DegenerateCovariate,
    DimensionMismatch,
    NonFiniteValue,
    TooFewObservations,
)
from projroc.projections import Direction, project
from projroc.study import (
    PopulationSample,
    StandardizationParams,
    Study,
    apply_standardization,
    fit_standardization,
    validate_study,
)

from conftest import make_study


class TestValidateStudy:
    def test_accepts_paper_conditioning_point(self):
        study = make_study(x=[0.5, 0.6])
        assert validate_study(study) is study

    def test_point_outside_support(self):
        with pytest.raises(ConditioningPointOutsideSupport):
            validate_study(make_study(x=[2.0, 2.0]))

    def test_marker_count_mismatch(self):
        rng = np.random.default_rng(1)
        F = PopulationSample(rng.uniform(size=(10, 2)), rng.normal(size=(10, 2)))
        G = PopulationSample(rng.uniform(size=(10, 2)), rng.normal(size=(10, 3)), "G")
        with pytest.raises(DimensionMismatch):
            validate_study(Study(F, G, [0.5, 0.5]))

    def test_covariate_dimension_mismatch(self):
        rng = np.random.default_rng(1)
        F = PopulationSample(rng.uniform(size=(10, 2)), rng.normal(size=(10, 2)))
        G = PopulationSample(rng.uniform(size=(10, 3)), rng.normal(size=(10, 2)), "G")
        with pytest.raises(DimensionMismatch):
            validate_study(Study(F, G, [0.5, 0.5]))

    def test_row_count_mismatch(self):
        F = PopulationSample(np.zeros((5, 1)) + np.arange(5)[:, None], np.zeros((4, 2)))
        G = PopulationSample(np.arange(5.0)[:, None], np.zeros((5, 2)), "G")
        with pytest.raises(DimensionMismatch):
            validate_study(Study(F, G, [1.0]))

    def test_non_finite(self):
        study = make_study()
        study.diseased.markers[3, 1] = np.nan
        with pytest.raises(NonFiniteValue, match="row 3"):
            validate_study(study)

    def test_too_few(self):
        F = PopulationSample([[0.5]], [[1.0, 2.0]])
        G = PopulationSample([[0.0], [1.0]], [[1.0, 2.0], [0.0, 1.0]], "G")
        with pytest.raises(TooFewObservations):
            validate_study(Study(F, G, [0.5]))

    def test_wrong_x_length(self):
        with pytest.raises(DimensionMismatch):
            validate_study(make_study(x=[0.5, 0.5, 0.5]))


class TestStandardization:
    def test_two_point_column(self):
        F = PopulationSample([[0.0]], [[1.0]])
        G = PopulationSample([[2.0]], [[1.0]], "G")
        params = fit_standardization(Study(F, G, [1.0]))
        assert params.means[0] == pytest.approx(1.0)
        assert params.sds[0] == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_apply_two_point_column(self):
        F = PopulationSample([[0.0]], [[1.0]])
        G = PopulationSample([[2.0]], [[5.0]], "G")
        study = Study(F, G, [1.0])
        out = apply_standardization(study, StandardizationParams([1.0], [np.sqrt(2.0)]))
        assert out.diseased.covariates[0, 0] == pytest.approx(-0.70711, abs=1e-5)
        assert out.healthy.covariates[0, 0] == pytest.approx(0.70711, abs=1e-5)
        assert out.x[0] == 0.0
        np.testing.assert_array_equal(out.healthy.markers, study.healthy.markers)

    def test_already_standard(self):
        rng = np.random.default_rng(3)
        pooled = rng.normal(size=(60, 2))
        pooled = (pooled - pooled.mean(0)) / pooled.std(0, ddof=1)
        study = Study(PopulationSample(pooled[:25], rng.normal(size=(25, 2))),
                      PopulationSample(pooled[25:], rng.normal(size=(35, 2)), "G"), [0.0, 0.0])
        params = fit_standardization(study)
        np.testing.assert_allclose(params.means, 0.0, atol=1e-12)
        np.testing.assert_allclose(params.sds, 1.0, atol=1e-12)

    def test_constant_column(self):
        F = PopulationSample([[3.0, 0.0], [3.0, 1.0]], [[1.0], [2.0]])
        G = PopulationSample([[3.0, 0.5], [3.0, 0.7]], [[1.0], [2.0]], "G")
        with pytest.raises(DegenerateCovariate):
            fit_standardization(Study(F, G, [3.0, 0.5]))

    def test_identity_params(self, small_study):
        out = apply_standardization(small_study, StandardizationParams([0.0, 0.0], [1.0, 1.0]))
        np.testing.assert_array_equal(out.diseased.covariates, small_study.diseased.covariates)
        np.testing.assert_array_equal(out.healthy.covariates, small_study.healthy.covariates)
        np.testing.assert_array_equal(out.x, small_study.x)

    def test_dimension_mismatch(self, small_study):
        with pytest.raises(DimensionMismatch):
            apply_standardization(small_study, StandardizationParams([0.0] * 3, [1.0] * 3))

    def test_nonpositive_sd_rejected(self):
        with pytest.raises(DegenerateCovariate):
            StandardizationParams([0.0], [0.0])


@settings(max_examples=50, deadline=None)
@given(
    cov=arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3)),
    scale=st.floats(0.1, 100.0),
)
def test_standardized_columns_have_mean_zero_sd_one(cov, scale):
    cov = cov * scale + np.arange(12)[:, None]  # keeps every column non-constant
    study = Study(PopulationSample(cov[:5], np.zeros((5, 1))),
                  PopulationSample(cov[5:], np.zeros((7, 1)), "G"), cov[0])
    out = apply_standardization(study, fit_standardization(study))
    pooled = np.vstack([out.diseased.covariates, out.healthy.covariates])
    # round-off scales with how far the raw values sit from their mean, in sd units
    tol = 1e-13 * (1 + np.max(np.abs(cov)) / np.min(cov.std(0, ddof=1)))
    np.testing.assert_allclose(pooled.mean(0), 0.0, atol=tol)
    np.testing.assert_allclose(pooled.std(0, ddof=1), 1.0, atol=tol)


def test_standardize_then_project_matches_projecting_rescaled_data(small_study):
    params = fit_standardization(small_study)
    out = apply_standardization(small_study, params)
    beta = Direction(np.array([0.6, 0.8]))
    direct = project(out.diseased.covariates, beta)
    # project the pre-standardized data along the rescaled direction, then shift
    rescaled = project(small_study.diseased.covariates, Direction(np.array([0.6, 0.8]))) * 0
    manual = (small_study.diseased.covariates - params.means) / params.sds @ beta.coords + rescaled
    np.testing.assert_allclose(direct, manual, atol=1e-12)
