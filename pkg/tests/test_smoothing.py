import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from projroc.errors import AllBandwidthsFail, BandwidthTooSmall, DegenerateCovariate
from projroc.smoothing import (
    GAUSSIAN,
    KernelSpec,
    fit_location_scale,
    lscv_bandwidth,
    lscv_grid,
    lscv_scores,
    nw_regress,
    nw_variance,
    nw_weights,
    variance_floor,
    weight_matrix,
)


def loo_score_bruteforce(xs, ys, g):
    """Plain-loop leave-one-out squared error, written independently of the library."""
    errs = []
    for i in range(len(xs)):
        num = den = 0.0
        for j in range(len(xs)):
            if j == i:
                continue
            k = np.exp(-0.5 * ((xs[i] - xs[j]) / g) ** 2)
            num += k * ys[j]
            den += k
        if den > 0:
            errs.append((ys[i] - num / den) ** 2)
    return np.mean(errs) if errs else np.inf


class TestKernel:
    def test_density_integrates_to_one(self):
        u = np.linspace(-10, 10, 20001)
        assert np.trapezoid(GAUSSIAN.density(u), u) == pytest.approx(1.0, abs=1e-10)

    def test_density_at_zero(self):
        assert GAUSSIAN.density(0.0) == pytest.approx(1 / np.sqrt(2 * np.pi))

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            KernelSpec("epanechnikov")


class TestNadarayaWatson:
    def test_weights_sum_to_one(self):
        w = nw_weights(0.3, np.linspace(0, 1, 11), 0.2)
        assert w.sum() == pytest.approx(1.0)
        assert np.all(w >= 0)

    def test_constant_response(self):
        xs = np.random.default_rng(0).uniform(size=40)
        assert nw_regress(0.4, xs, np.full(40, 3.25), 0.1) == pytest.approx(3.25)

    def test_symmetric_two_points(self):
        assert nw_regress(0.5, [0.0, 1.0], [0.0, 2.0], 0.3) == pytest.approx(1.0)

    def test_matches_explicit_formula(self):
        xs = np.array([0.0, 0.2, 0.7])
        ys = np.array([1.0, -1.0, 4.0])
        k = np.exp(-0.5 * ((0.25 - xs) / 0.15) ** 2)
        assert nw_regress(0.25, xs, ys, 0.15) == pytest.approx(k @ ys / k.sum())

    def test_underflow_raises(self):
        with pytest.raises(BandwidthTooSmall):
            weight_matrix([0.0], [100.0, 200.0], 1e-3)

    def test_bad_bandwidth(self):
        with pytest.raises(ValueError):
            nw_weights(0.0, [0.0, 1.0], 0.0)

    def test_variance_floor(self):
        xs = np.linspace(0, 1, 5)
        ys = np.full(5, 2.0)
        assert nw_variance(0.5, xs, ys, ys, 0.2) == pytest.approx(1e-12)
        ys = np.arange(5.0)
        assert variance_floor(ys) == pytest.approx(1e-8 * np.var(ys))
        assert nw_variance(0.5, xs, ys, ys, 0.2) == pytest.approx(variance_floor(ys))

    def test_sin_regression(self):
        rng = np.random.default_rng(11)
        xs = rng.uniform(size=2000)
        ys = np.sin(2 * np.pi * xs)
        fit = fit_location_scale(xs, ys, 0.02)
        for x0 in (0.25, 0.5, 0.6):
            assert fit.mean_at(x0) == pytest.approx(np.sin(2 * np.pi * x0), abs=0.01)

    def test_sd_recovers_noise_level(self):
        rng = np.random.default_rng(12)
        xs = rng.uniform(size=2000)
        ys = xs + (0.5 + 0.5 * xs) * rng.standard_normal(2000)
        g = lscv_bandwidth(xs, ys)
        fit = fit_location_scale(xs, ys, g)
        assert fit.mean_at(0.5) == pytest.approx(0.5, abs=0.08)
        assert fit.sd_at(0.5) == pytest.approx(0.75, abs=0.08)


class TestLscv:
    def test_grid_shape(self):
        xs = np.linspace(0, 1, 50)
        grid = lscv_grid(xs)
        rot = np.std(xs, ddof=1) * 50 ** -0.2
        assert grid.size == 30
        assert grid[0] == pytest.approx(0.05 * rot)
        assert grid[-1] == pytest.approx(20 * rot)
        np.testing.assert_allclose(np.diff(np.log(grid)), np.log(400) / 29)

    def test_three_point_example(self):
        xs = np.array([0.0, 0.5, 1.0])
        ys = np.array([0.0, 1.0, 0.0])
        grid = lscv_grid(xs)
        brute = np.array([loo_score_bruteforce(xs, ys, g) for g in grid])
        # minimizer of the brute-force score, ties resolved toward the largest bandwidth
        expected = grid[np.flatnonzero(brute <= brute.min() * (1 + 1e-9))[-1]]
        assert lscv_bandwidth(xs, ys) == pytest.approx(expected)
        assert lscv_bandwidth(xs, ys) == pytest.approx(8.027415617602307, rel=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_scores_match_bruteforce(self, seed):
        rng = np.random.default_rng(seed)
        xs = rng.uniform(size=25)
        ys = np.cos(3 * xs) + 0.3 * rng.standard_normal(25)
        grid, scores = lscv_scores(xs, ys)
        brute = [loo_score_bruteforce(xs, ys, g) for g in grid]
        np.testing.assert_allclose(scores, brute, rtol=1e-10)

    def test_tie_goes_to_largest(self):
        xs = np.linspace(0, 1, 10)
        ys = np.full(10, 1.5)
        grid = lscv_grid(xs)
        assert lscv_bandwidth(xs, ys) == pytest.approx(grid[-1])

    def test_selected_is_on_grid(self):
        rng = np.random.default_rng(4)
        xs = rng.uniform(size=60)
        ys = xs ** 2 + 0.1 * rng.standard_normal(60)
        assert lscv_bandwidth(xs, ys) in lscv_grid(xs)

    def test_all_fail(self):
        xs = np.array([0.0, 1e3, 2e3])
        with pytest.raises(AllBandwidthsFail):
            lscv_bandwidth(xs, [0.0, 1.0, 2.0], grid=[1e-3, 1e-2])

    def test_skip_is_logged(self, caplog):
        xs = np.array([0.0, 0.01, 0.02, 50.0])
        _, scores = lscv_scores(xs, np.arange(4.0), grid=[0.05])
        assert np.isfinite(scores[0])
        assert "skipped 1" in caplog.text

    def test_constant_covariate(self):
        with pytest.raises(DegenerateCovariate):
            lscv_bandwidth(np.ones(5), np.arange(5.0))


class TestRegressionFit:
    def test_scenario_residuals_near_standard(self):
        rng = np.random.default_rng(13)
        xs = rng.uniform(size=2000)
        ys = np.sin(0.5 * np.pi * xs) + 0.06 + (0.5 + 0.5 * xs) * rng.standard_normal(2000)
        fit = fit_location_scale(xs, ys, lscv_bandwidth(xs, ys))
        assert abs(fit.residuals.mean()) <= 0.1
        assert abs(fit.residuals.std() - 1) <= 0.1

    def test_reconstructs_response(self):
        rng = np.random.default_rng(14)
        xs, ys = rng.uniform(size=50), rng.standard_normal(50)
        fit = fit_location_scale(xs, ys, 0.1)
        np.testing.assert_allclose(fit.fitted_means + fit.fitted_sds * fit.residuals, ys, atol=1e-10)

    def test_constant_response_zero_residuals(self):
        fit = fit_location_scale(np.linspace(0, 1, 8), np.full(8, 4.0), 0.2)
        assert np.all(fit.residuals == 0.0)

    def test_residuals_standardized(self):
        rng = np.random.default_rng(5)
        xs = rng.uniform(size=100)
        ys = 2 * xs + rng.standard_normal(100)
        fit = fit_location_scale(xs, ys, 0.2)
        np.testing.assert_allclose(fit.residuals, (ys - fit.fitted_means) / fit.fitted_sds)

    def test_mean_at_data_point_matches_fitted(self):
        rng = np.random.default_rng(6)
        xs = rng.uniform(size=30)
        ys = rng.standard_normal(30)
        fit = fit_location_scale(xs, ys, 0.15)
        assert fit.mean_at(xs[7]) == pytest.approx(fit.fitted_means[7])

    def test_floored_sd(self):
        xs = np.linspace(0, 1, 6)
        fit = fit_location_scale(xs, np.full(6, 1.0), 0.3)
        assert fit.sd_floored_at(0.5)
        assert fit.sd_at(0.5) == pytest.approx(1e-6)


@settings(max_examples=40, deadline=None)
@given(
    xs=arrays(np.float64, 15, elements=st.floats(0, 1), unique=True),
    ys=arrays(np.float64, 15, elements=st.floats(-10, 10)),
    shift=st.floats(-5, 5),
    scale=st.floats(0.1, 10),
)
def test_fit_affine_equivariance(xs, ys, shift, scale):
    """Affine maps of the response carry through the mean, sd and standardized residuals."""
    if np.ptp(xs) < 1e-3 or np.var(ys) < 1e-6:
        return
    a = fit_location_scale(xs, ys, 0.2)
    b = fit_location_scale(xs, shift + scale * ys, 0.2)
    np.testing.assert_allclose(b.fitted_means, shift + scale * a.fitted_means, atol=1e-8 * (1 + abs(shift) + scale * 10))
    np.testing.assert_allclose(b.fitted_sds, scale * a.fitted_sds, rtol=1e-7, atol=1e-9)
    np.testing.assert_allclose(b.residuals, a.residuals, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(
    xs=arrays(np.float64, 12, elements=st.floats(-3, 3)),
    x0=st.floats(-3, 3),
    g=st.floats(0.05, 5),
)
def test_weights_are_a_probability_vector(xs, x0, g):
    w = nw_weights(x0, xs, g)
    assert np.all(w >= 0)
    assert w.sum() == pytest.approx(1.0)
