"""Pooled-score density estimation and the bimodal valley threshold."""

import numpy as np
import pytest
from helpers import normal_pdf

from spcgrowth import (
    DegenerateBandwidthError,
    DensityEstimate,
    InsufficientDataError,
    ParameterError,
    UnimodalDensityError,
    find_bimodal_threshold,
    gaussian_kde,
    scott_bandwidth,
)

# Height of N(mu, 0.05^2) at its mode: 1 / (0.05 * sqrt(2 pi)).
NORMAL_PEAK_HEIGHT = 7.978845608028654

# Valley locations of the exact two-Gaussian mixtures used below, found by
# brute-force minimisation on a 10,000-point reference grid between the modes.
EQUAL_MIX_VALLEY = 0.4999499949995
SKEWED_MIX_VALLEY = 0.5036503650365036


def mixture_density(grid, w_left):
    return w_left * normal_pdf(grid, 0.2, 0.05) + (1.0 - w_left) * normal_pdf(
        grid, 0.8, 0.05
    )


def exact_mixture_estimate(w_left, grid_size=1024):
    """Mixture density evaluated directly on a grid, bypassing sampling."""
    grid = np.linspace(0.0, 1.0, grid_size)
    return DensityEstimate(
        grid=grid,
        density=mixture_density(grid, w_left),
        bandwidth=0.05,
        n_samples=2,
    )


def brute_force_valley(w_left):
    ref = np.linspace(0.0, 1.0, 10_000)
    inner = (ref > 0.2) & (ref < 0.8)
    vals = mixture_density(ref[inner], w_left)
    return float(ref[inner][np.argmin(vals)])


class TestKde:
    def test_repeated_single_value_peaks_there_symmetrically(self):
        est = gaussian_kde(np.full(50, 0.5), bandwidth=0.1)
        assert est.grid[np.argmax(est.density)] == pytest.approx(
            0.5, abs=est.grid[1] - est.grid[0]
        )
        # grid is centred on the sample, so the profile must mirror
        assert np.allclose(est.density, est.density[::-1], atol=1e-12)

    def test_normal_sample_mode_height(self):
        rng = np.random.default_rng(2)
        draws = rng.normal(0.3, 0.05, size=10_000)
        est = gaussian_kde(draws)
        at_mode = est.density[np.argmin(np.abs(est.grid - 0.3))]
        assert at_mode == pytest.approx(NORMAL_PEAK_HEIGHT, rel=0.05)
        assert 0.99 <= est.integral() <= 1.01

    def test_mixture_sample_shows_both_modes(self):
        rng = np.random.default_rng(4)
        draws = np.concatenate(
            [rng.normal(0.2, 0.05, 5000), rng.normal(0.8, 0.05, 5000)]
        )
        est = gaussian_kde(draws)
        th = find_bimodal_threshold(est)
        assert th.left_peak == pytest.approx(0.2, abs=0.05)
        assert th.right_peak == pytest.approx(0.8, abs=0.05)
        assert 0.99 <= est.integral() <= 1.01

    def test_pooled_density_is_the_weighted_average(self):
        rng = np.random.default_rng(6)
        s1 = rng.normal(0.3, 0.1, 400)
        s2 = rng.normal(0.7, 0.1, 600)
        grid = np.linspace(-0.5, 1.5, 512)
        e1 = gaussian_kde(s1, bandwidth=0.08, grid=grid)
        e2 = gaussian_kde(s2, bandwidth=0.08, grid=grid)
        pooled = gaussian_kde(np.concatenate([s1, s2]), bandwidth=0.08, grid=grid)
        mix = (s1.size * e1.density + s2.size * e2.density) / (s1.size + s2.size)
        assert np.max(np.abs(pooled.density - mix)) <= 1e-12

    def test_auto_bandwidth_follows_scott(self):
        rng = np.random.default_rng(8)
        draws = rng.normal(0.0, 1.0, 300)
        est = gaussian_kde(draws)
        want = float(np.std(draws, ddof=1)) * 300 ** (-1.0 / 5.0)
        assert est.bandwidth == pytest.approx(want, rel=1e-12)
        assert scott_bandwidth(draws) == pytest.approx(want, rel=1e-12)

    def test_grid_spans_four_bandwidths(self):
        draws = np.array([0.2, 0.4, 0.6])
        est = gaussian_kde(draws, bandwidth=0.1, grid_size=256)
        assert est.grid.size == 256
        assert est.grid[0] == pytest.approx(0.2 - 0.4)
        assert est.grid[-1] == pytest.approx(0.6 + 0.4)

    def test_clip_restricts_the_grid(self):
        draws = np.array([0.1, 0.5, 0.9])
        est = gaussian_kde(draws, bandwidth=0.2, clip=(0.0, 1.0))
        assert est.grid[0] >= 0.0 and est.grid[-1] <= 1.0

    def test_density_never_negative(self):
        rng = np.random.default_rng(10)
        est = gaussian_kde(rng.normal(size=100))
        assert np.all(est.density >= 0.0)

    def test_single_sample_rejected(self):
        with pytest.raises(InsufficientDataError):
            gaussian_kde(np.array([0.5]))

    def test_zero_spread_auto_bandwidth_rejected(self):
        with pytest.raises(DegenerateBandwidthError):
            gaussian_kde(np.full(10, 0.3))

    @pytest.mark.parametrize("bad", [0.0, -0.1])
    def test_nonpositive_bandwidth_rejected(self, bad):
        with pytest.raises(ParameterError):
            gaussian_kde(np.array([0.1, 0.9]), bandwidth=bad)

    def test_non_finite_samples_rejected(self):
        with pytest.raises(ParameterError):
            gaussian_kde(np.array([0.1, np.nan, 0.9]))


class TestBimodalThreshold:
    def test_equal_mixture_valley(self):
        est = exact_mixture_estimate(0.5)
        th = find_bimodal_threshold(est)
        step = est.grid[1] - est.grid[0]
        assert abs(th.spc1_0 - EQUAL_MIX_VALLEY) <= step
        assert abs(th.spc1_0 - brute_force_valley(0.5)) <= step
        assert th.left_peak == pytest.approx(0.2, abs=2 * step)
        assert th.right_peak == pytest.approx(0.8, abs=2 * step)

    def test_heavier_left_mode_pushes_the_valley_right(self):
        est = exact_mixture_estimate(0.7)
        th = find_bimodal_threshold(est)
        step = est.grid[1] - est.grid[0]
        assert abs(th.spc1_0 - SKEWED_MIX_VALLEY) <= step
        assert abs(th.spc1_0 - brute_force_valley(0.7)) <= step
        assert th.spc1_0 > 0.5

    def test_threshold_sits_between_the_peaks_below_them(self):
        for w in (0.5, 0.7, 0.3):
            th = find_bimodal_threshold(exact_mixture_estimate(w))
            assert th.left_peak < th.spc1_0 < th.right_peak
            assert th.threshold_density <= min(th.peak_densities)

    def test_grid_refinement_barely_moves_the_valley(self):
        coarse = find_bimodal_threshold(exact_mixture_estimate(0.5, 1024))
        fine = find_bimodal_threshold(exact_mixture_estimate(0.5, 2048))
        step = 1.0 / 1023
        assert abs(coarse.spc1_0 - fine.spc1_0) <= step

    def test_single_mode_rejected(self):
        grid = np.linspace(0.0, 1.0, 1024)
        est = DensityEstimate(grid, normal_pdf(grid, 0.5, 0.1), 0.1, 2)
        with pytest.raises(UnimodalDensityError):
            find_bimodal_threshold(est)

    def test_oversmoothed_mixture_rejected(self):
        rng = np.random.default_rng(12)
        draws = np.concatenate(
            [rng.normal(0.2, 0.05, 2000), rng.normal(0.8, 0.05, 2000)]
        )
        est = gaussian_kde(draws, bandwidth=0.5)
        with pytest.raises(UnimodalDensityError):
            find_bimodal_threshold(est)

    def test_plateau_peak_collapses_to_its_midpoint(self):
        grid = np.arange(7, dtype=float)
        density = np.array([0.0, 2.0, 2.0, 2.0, 0.0, 5.0, 0.0])
        th = find_bimodal_threshold(DensityEstimate(grid, density, 1.0, 7))
        assert th.left_peak == 2.0  # run 1..3 collapsed
        assert th.right_peak == 5.0
        assert th.spc1_0 == 4.0

    def test_equal_valley_ties_break_to_the_smallest_location(self):
        grid = np.arange(7, dtype=float)
        density = np.array([0.0, 3.0, 1.0, 1.0, 1.0, 3.0, 0.0])
        th = find_bimodal_threshold(DensityEstimate(grid, density, 1.0, 7))
        assert th.spc1_0 == 2.0
